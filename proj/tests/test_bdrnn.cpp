#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "bisent/bdrnn.hpp"
#include "bisent/error.hpp"
#include "bisent/preprocess.hpp"
#include "support/oracles.hpp"

using namespace bisent;
using bisent::testing::finite_difference_check;
using bisent::testing::random_model;
using bisent::testing::random_sequence;

namespace {

Hyperparams tiny(std::uint64_t vocab = 20, std::uint64_t embed = 3, std::uint64_t hidden = 4,
                 std::uint64_t layers = 2) {
  Hyperparams hp;
  hp.vocab_size = vocab;
  hp.embed_dim = embed;
  hp.hidden_dim = hidden;
  hp.num_recurrent_layers = layers;
  hp.max_seq_len = 16;
  return hp;
}

Document doc_of(std::initializer_list<const char*> words) {
  Document d;
  for (const auto* w : words) d.tokens.push_back({w, w, TokenKind::Word, false});
  return d;
}

}  // namespace

TEST(Hyperparams, DefaultsFollowTheReferenceConfiguration) {
  const Hyperparams hp;
  EXPECT_EQ(hp.embed_dim, 100u);
  EXPECT_EQ(hp.hidden_dim, 128u);
  EXPECT_EQ(hp.num_recurrent_layers, 3u);
  EXPECT_EQ(hp.vocab_size, 13398u);
  EXPECT_EQ(hp.num_classes, 7u);
  EXPECT_DOUBLE_EQ(hp.dropout_keep, 0.6);
  EXPECT_DOUBLE_EQ(hp.l2_coeff, 1.3e-3);
  EXPECT_EQ(hp.batch_size, 64u);
  EXPECT_EQ(hp.epochs, 5u);
  EXPECT_EQ(hp.max_seq_len, 64u);
  EXPECT_NO_THROW(validate(hp));
}

TEST(Hyperparams, ValidateRejectsDegenerateValues) {
  auto hp = tiny();
  hp.hidden_dim = 0;
  EXPECT_THROW(validate(hp), std::invalid_argument);
  hp = tiny();
  hp.dropout_keep = 0.0;
  EXPECT_THROW(validate(hp), std::invalid_argument);
  hp.dropout_keep = 1.01;
  EXPECT_THROW(validate(hp), std::invalid_argument);
  hp = tiny();
  hp.learning_rate = 0.0;
  EXPECT_THROW(validate(hp), std::invalid_argument);
  hp = tiny();
  hp.l2_coeff = -1.0;
  EXPECT_THROW(validate(hp), std::invalid_argument);
  hp = tiny();
  hp.dropout_keep = 1.0;
  EXPECT_NO_THROW(validate(hp));
}

TEST(Vocab, ThreeDistinctWordsPlusReserved) {
  const std::vector<Document> docs = {doc_of({"a", "b"}), doc_of({"c", "a"})};
  const auto v = Vocabulary::build(docs, 100);
  EXPECT_EQ(v.size(), 5u);
  EXPECT_EQ(v.id("a"), 2);
  EXPECT_EQ(v.id("zzz"), kOovId);
}

TEST(Vocab, BuildIsDeterministic) {
  const std::vector<Document> docs = {doc_of({"x", "y", "z", "y"}), doc_of({"w", "x"})};
  EXPECT_EQ(Vocabulary::build(docs, 100), Vocabulary::build(docs, 100));
  EXPECT_EQ(Vocabulary::build(docs, 100).hash(), Vocabulary::build(docs, 100).hash());
}

TEST(Vocab, FrequencyTiesBreakLexicographically) {
  const std::vector<Document> docs = {doc_of({"b", "a", "c"}), doc_of({"b", "a"}), doc_of({"a", "b"})};
  const auto v = Vocabulary::build(docs, 4);
  EXPECT_EQ(v.words(), (std::vector<std::string>{"a", "b"}));
}

TEST(Vocab, EmptyCorpusIsAnError) {
  EXPECT_THROW(Vocabulary::build({}, 10), DataError);
}

TEST(Vocab, FileRoundTrip) {
  const auto v = Vocabulary::from_words({"good", "bad", "ok"});
  std::stringstream s;
  v.write(s);
  EXPECT_EQ(s.str(), "good\t2\nbad\t3\nok\t4\n");
  EXPECT_EQ(Vocabulary::read(s), v);
}

TEST(Vocab, EncodeTruncatesTailAndNeverEmpty) {
  const auto v = Vocabulary::from_words({"a", "b"});
  const auto s = encode(doc_of({"a", "b", "q", "a"}), v, 3);
  EXPECT_EQ(s.token_ids, (std::vector<int>{2, 3, kOovId}));
  EXPECT_EQ(s.length, 3u);
  const auto e = encode(Document{}, v, 3);
  EXPECT_EQ(e.length, 1u);
  EXPECT_EQ(e.token_ids, (std::vector<int>{kOovId}));
}

TEST(Step, ZeroWeightsGiveZero) {
  DirectionWeights w{Matrix::Zero(3, 2), Matrix::Zero(3, 3), Vector::Zero(3)};
  const Vector out = forward_step(w, Vector::Zero(2), Vector::Zero(3));
  EXPECT_EQ(out, Vector::Zero(3));
}

TEST(Step, ScalarTanh) {
  DirectionWeights w{Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1), Vector::Zero(1)};
  const Vector in = Vector::Constant(1, 0.5);
  EXPECT_NEAR(forward_step(w, in, Vector::Zero(1))[0], 0.46211715726000974, 1e-15);
  EXPECT_NEAR(backward_step(w, in, Vector::Zero(1))[0], 0.46211715726000974, 1e-15);
}

TEST(Step, OutputsStayInsideOpenUnitInterval) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    DirectionWeights w{Matrix(4, 3), Matrix(4, 4), Vector(4)};
    for (auto* m : {&w.input, &w.recurrent}) {
      for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = rng.uniform(-1, 1);
    }
    for (Eigen::Index i = 0; i < 4; ++i) w.bias[i] = rng.uniform(-1, 1);
    Vector x(3), h(4);
    for (Eigen::Index i = 0; i < 3; ++i) x[i] = rng.uniform(-2, 2);
    for (Eigen::Index i = 0; i < 4; ++i) h[i] = rng.uniform(-1, 1);
    const Vector out = forward_step(w, x, h);
    EXPECT_LT(out.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Step, DimensionMismatchThrows) {
  DirectionWeights w{Matrix::Zero(3, 2), Matrix::Zero(3, 3), Vector::Zero(3)};
  EXPECT_THROW(forward_step(w, Vector::Zero(4), Vector::Zero(3)), std::invalid_argument);
  EXPECT_THROW(backward_step(w, Vector::Zero(2), Vector::Zero(2)), std::invalid_argument);
}

TEST(Step, BackwardRunEqualsForwardRunOverReversedInput) {
  Rng rng(9);
  DirectionWeights w{Matrix(3, 2), Matrix(3, 3), Vector(3)};
  for (auto* m : {&w.input, &w.recurrent}) {
    for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = rng.uniform(-1, 1);
  }
  for (Eigen::Index i = 0; i < 3; ++i) w.bias[i] = rng.uniform(-1, 1);
  std::vector<Vector> xs(6, Vector(2));
  for (auto& x : xs) x << rng.uniform(-1, 1), rng.uniform(-1, 1);
  auto rev = xs;
  std::reverse(rev.begin(), rev.end());
  const auto back = run_backward(w, xs);
  auto fwd = run_forward(w, rev);
  std::reverse(fwd.begin(), fwd.end());
  for (std::size_t t = 0; t < xs.size(); ++t) EXPECT_EQ(back[t], fwd[t]);
}

TEST(Forward, ZeroModelIsUniform) {
  BdrnnModel m{tiny(), Parameters::zeros(tiny()), 0};
  const auto fr = forward(m, random_sequence(20, 5, 1));
  for (Eigen::Index c = 0; c < 7; ++c) EXPECT_NEAR(fr.probs[c], 1.0 / 7.0, 1e-15);
  EXPECT_EQ(predict_index(m, random_sequence(20, 5, 1)), 0u);
  EXPECT_EQ(predict(m, random_sequence(20, 5, 1)), SentimentClass::StrongNeg);
}

TEST(Forward, DistributionSumsToOne) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto m = random_model(tiny(), s, 2.0);
    const auto fr = forward(m, random_sequence(20, 1 + s % 10, s));
    EXPECT_NEAR(fr.probs.sum(), 1.0, 1e-9);
    EXPECT_GE(fr.probs.minCoeff(), 0.0);
  }
}

TEST(Forward, MatchesHandTrace) {
  auto hp = tiny(5, 2, 2, 1);
  const auto m = random_model(hp, 77, 0.9);
  EncodedSequence seq{{3, 1}, 2};
  const auto fr = forward(m, seq);
  const auto hand = bisent::testing::hand_forward(m, 3, 1);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(fr.cache.layers[0].fwd[0][i], hand.f1[i], 1e-12);
    EXPECT_NEAR(fr.cache.layers[0].fwd[1][i], hand.f2[i], 1e-12);
    EXPECT_NEAR(fr.cache.layers[0].bwd[0][i], hand.b1[i], 1e-12);
    EXPECT_NEAR(fr.cache.layers[0].bwd[1][i], hand.b2[i], 1e-12);
  }
  for (int c = 0; c < 7; ++c) EXPECT_NEAR(fr.probs[c], hand.probs[c], 1e-12);
}

TEST(Forward, IdOutOfRangeThrows) {
  const auto m = random_model(tiny(), 1);
  EXPECT_THROW(forward(m, EncodedSequence{{2, 20}, 2}), std::out_of_range);
  EXPECT_THROW(forward(m, EncodedSequence{{-1}, 1}), std::out_of_range);
}

TEST(Forward, TrainModeNeedsRng) {
  const auto m = random_model(tiny(), 1);
  EXPECT_THROW(forward(m, random_sequence(20, 3, 1), Mode::Train), std::invalid_argument);
}

TEST(Forward, PaddingBeyondLengthIsIgnored) {
  const auto m = random_model(tiny(), 4);
  auto seq = random_sequence(20, 5, 4);
  const auto base = forward(m, seq).probs;
  seq.token_ids.insert(seq.token_ids.end(), {kPadId, kPadId, 7});
  EXPECT_EQ(forward(m, seq).probs, base);
}

TEST(Forward, ReversedSequenceOnMirroredModel) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto hp = tiny(15, 3, 4, 1 + s % 3);
    const auto m = random_model(hp, 100 + s, 0.8);
    const auto seq = random_sequence(15, 2 + s % 6, s);
    const auto a = forward(m, seq);
    const auto b = forward(bisent::testing::mirrored(m), bisent::testing::reversed(seq));
    EXPECT_LE((a.cache.summary_fwd - b.cache.summary_bwd).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((a.cache.summary_bwd - b.cache.summary_fwd).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((a.probs - b.probs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Loss, Fixtures) {
  const auto m = random_model(tiny(), 1);
  Vector onehot = Vector::Zero(7);
  onehot[2] = 1.0;
  EXPECT_DOUBLE_EQ(loss(onehot, 2, m, 0.0), 0.0);
  EXPECT_NEAR(loss(Vector::Constant(7, 1.0 / 7.0), 0, m, 0.0), 1.9459101490553132, 1e-12);
  EXPECT_THROW(cross_entropy(onehot, 7), std::out_of_range);
}

TEST(Loss, PenaltyOnThreeWeightToyModel) {
  auto hp = tiny(3, 1, 1, 1);
  hp.num_classes = 1;
  BdrnnModel m{hp, Parameters::zeros(hp), 0};
  m.params.layers[0].fwd.input(0, 0) = 2.0;
  m.params.layers[0].fwd.recurrent(0, 0) = -1.0;
  m.params.out_fwd(0, 0) = 0.5;
  m.params.layers[0].fwd.bias[0] = 100.0;  // unpenalized
  m.params.embedding(1, 0) = 100.0;        // unpenalized
  EXPECT_DOUBLE_EQ(l2_penalty(m.params, 0.1), 0.5 * 0.1 * (4.0 + 1.0 + 0.25));
}

TEST(Backward, MatchesFiniteDifferencesInference) {
  auto hp = tiny(12, 3, 4, 2);
  hp.l2_coeff = 0.01;
  const auto m = random_model(hp, 5);
  const auto check = finite_difference_check(m, random_sequence(12, 5, 2), 3, Mode::Inference, 0);
  EXPECT_LE(check.max_relative_error, 1e-4) << check.worst;
  EXPECT_EQ(check.checked, m.params.count());
}

TEST(Backward, MatchesFiniteDifferencesWithDropout) {
  auto hp = tiny(12, 3, 4, 3);
  hp.dropout_keep = 0.7;
  hp.l2_coeff = 0.02;
  const auto m = random_model(hp, 6);
  const auto check = finite_difference_check(m, random_sequence(12, 6, 3), 5, Mode::Train, 42);
  EXPECT_LE(check.max_relative_error, 1e-4) << check.worst;
}

TEST(Backward, UntouchedEmbeddingRowsHaveZeroGradient) {
  const auto m = random_model(tiny(), 8);
  const EncodedSequence seq{{4, 9, 4}, 3};
  const auto g = backward(m, forward(m, seq).cache, 1);
  EXPECT_EQ(g.touched_rows, (std::vector<int>{4, 9}));
  for (Eigen::Index r = 0; r < 20; ++r) {
    if (r == 4 || r == 9) {
      EXPECT_GT(g.grad.embedding.row(r).norm(), 0.0);
    } else {
      EXPECT_EQ(g.grad.embedding.row(r).norm(), 0.0);
    }
  }
}

TEST(Backward, DoublingL2DoublesPenaltyComponent) {
  auto hp = tiny();
  const auto seq = random_sequence(20, 4, 1);
  auto m0 = random_model(hp, 11);
  m0.hp.l2_coeff = 0.0;
  auto m1 = m0;
  m1.hp.l2_coeff = 0.01;
  auto m2 = m0;
  m2.hp.l2_coeff = 0.02;
  const auto g0 = backward(m0, forward(m0, seq).cache, 2);
  const auto g1 = backward(m1, forward(m1, seq).cache, 2);
  const auto g2 = backward(m2, forward(m2, seq).cache, 2);
  const Matrix p1 = g1.grad.layers[1].bwd.recurrent - g0.grad.layers[1].bwd.recurrent;
  const Matrix p2 = g2.grad.layers[1].bwd.recurrent - g0.grad.layers[1].bwd.recurrent;
  EXPECT_LE((p2 - 2.0 * p1).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(g2.grad.layers[1].bwd.bias, g0.grad.layers[1].bwd.bias);
}

TEST(Backward, StaleCacheThrows) {
  const auto m = random_model(tiny(), 1);
  const auto other = random_model(tiny(20, 3, 5, 2), 1);
  const auto cache = forward(other, random_sequence(20, 3, 1)).cache;
  EXPECT_THROW(backward(m, cache, 0), std::invalid_argument);
}

TEST(Clip, GlobalNormBounded) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto m = random_model(tiny(), s, 3.0);
    auto g = backward(m, forward(m, random_sequence(20, 6, s)).cache, s % 7);
    const double before = gradient_norm(g);
    const double max_norm = 0.05 * static_cast<double>(s + 1);
    EXPECT_DOUBLE_EQ(clip_gradients(g, max_norm), before);
    EXPECT_LE(gradient_norm(g), max_norm + 1e-12);
    if (before <= max_norm) {
      EXPECT_DOUBLE_EQ(gradient_norm(g), before);
    }
  }
}

namespace {

std::vector<LabeledSequence> separable_toy() {
  // Class follows the first token: ids 2..5 -> StrongPos, 6..9 -> StrongNeg.
  std::vector<LabeledSequence> data;
  for (int i = 0; i < 8; ++i) {
    data.push_back({EncodedSequence{{2 + i, 10 + i % 3}, 2}, i < 4 ? 6u : 0u});
  }
  return data;
}

}  // namespace

TEST(Train, LossDecreasesOnSeparableToySet) {
  auto hp = tiny(16, 4, 6, 2);
  hp.learning_rate = 0.5;
  hp.batch_size = 4;
  hp.dropout_keep = 1.0;
  const auto data = separable_toy();
  const auto result = train(BdrnnModel::initialize(hp), data, hp);
  ASSERT_EQ(result.trace.size(), 5u);
  EXPECT_LT(result.trace.back().mean_loss, result.trace.front().mean_loss);
  for (std::size_t e = 0; e < 5; ++e) EXPECT_EQ(result.trace[e].epoch, e + 1);
}

TEST(Train, SameSeedIsBitIdentical) {
  auto hp = tiny(16, 4, 6, 2);
  hp.batch_size = 3;
  hp.seed = 17;
  const auto data = separable_toy();
  const auto a = train(BdrnnModel::initialize(hp), data, hp);
  const auto b = train(BdrnnModel::initialize(hp), data, hp);
  std::stringstream sa, sb;
  write_model(a.model, sa);
  write_model(b.model, sb);
  EXPECT_EQ(sa.str(), sb.str());
  hp.seed = 18;
  const auto c = train(BdrnnModel::initialize(hp), data, hp);
  EXPECT_FALSE(c.model == a.model);
}

TEST(Train, CallbackSeesEveryEpoch) {
  auto hp = tiny(16, 4, 6, 1);
  hp.epochs = 3;
  std::vector<std::size_t> seen;
  train(BdrnnModel::initialize(hp), separable_toy(), hp,
        [&](const EpochStats& s, const BdrnnModel&) { seen.push_back(s.epoch); });
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(Train, Errors) {
  auto hp = tiny(16, 4, 6, 1);
  EXPECT_THROW(train(BdrnnModel::initialize(hp), {}, hp), DataError);
  auto huge = hp;
  huge.learning_rate = 1e300;
  huge.grad_clip = 1e300;
  EXPECT_THROW(train(BdrnnModel::initialize(hp), separable_toy(), huge), NumericError);
  auto shape = hp;
  shape.hidden_dim = 7;
  EXPECT_THROW(train(BdrnnModel::initialize(hp), separable_toy(), shape), std::invalid_argument);
}

TEST(Predict, InferenceIgnoresTrainingSeed) {
  auto hp = tiny();
  auto a = random_model(hp, 3);
  auto b = a;
  b.hp.seed = 999;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto seq = random_sequence(20, 4, s);
    EXPECT_EQ(predict(a, seq), predict(b, seq));
  }
}

TEST(ModelFile, RoundTripIsBitExact) {
  auto m = random_model(tiny(), 21);
  m.vocab_hash = 0x1234abcd;
  std::stringstream s;
  write_model(m, s);
  const auto bytes = s.str();
  const auto back = read_model(s);
  EXPECT_TRUE(back == m);
  std::stringstream again;
  write_model(back, again);
  EXPECT_EQ(again.str(), bytes);
}

TEST(ModelFile, SizeFollowsShapeArithmetic) {
  // header: 8 magic + 4 version + 9*8 ints + 4*8 reals + 8 hash + 8 count = 132
  // params (V=20, E=3, H=4, K=7, 2 layers):
  //   embedding 60; layer0 2*(4*3+16+4)=64; layer1 2*(4*8+16+4)=104; output 2*28+7=63 -> 291
  const auto hp = tiny();
  EXPECT_EQ(model_file_size(hp), 132u + 8u * 291u + 8u);
  EXPECT_EQ(Parameters::zeros(hp).count(), 291u);
  std::stringstream s;
  write_model(random_model(hp, 1), s);
  EXPECT_EQ(s.str().size(), model_file_size(hp));
}

TEST(ModelFile, CorruptionIsRejectedCleanly) {
  std::stringstream s;
  write_model(random_model(tiny(), 2), s);
  const auto bytes = s.str();

  auto expect_error = [](std::string data) {
    std::stringstream in(data);
    EXPECT_THROW(read_model(in), DataError);
  };
  expect_error(bytes.substr(0, 100));
  expect_error(bytes.substr(0, bytes.size() - 1));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  expect_error(bad_magic);
  auto bad_version = bytes;
  bad_version[8] = 2;
  expect_error(bad_version);
  auto bad_dim = bytes;
  bad_dim[12] = 0;  // embed_dim
  expect_error(bad_dim);
  auto flipped = bytes;
  flipped[200] ^= 0x01;
  expect_error(flipped);
  expect_error(bytes + "x");
  expect_error("");
}

TEST(ModelFile, VocabularyHashMismatchIsRejected) {
  const auto dir = std::filesystem::temp_directory_path() / "bisent_model_test";
  std::filesystem::create_directories(dir);
  const auto vocab = Vocabulary::from_words({"a", "b", "c"});
  auto hp = tiny(vocab.size());
  auto m = random_model(hp, 3);
  m.vocab_hash = vocab.hash();
  save_model(m, dir / "m.bin");
  EXPECT_TRUE(load_model(dir / "m.bin", vocab) == m);
  EXPECT_THROW(load_model(dir / "m.bin", Vocabulary::from_words({"a", "b", "d"})), DataError);
  EXPECT_THROW(load_model(dir / "missing.bin"), DataError);
  std::filesystem::remove_all(dir);
}

TEST(Initialize, SeededUniformRange) {
  auto hp = tiny();
  hp.seed = 5;
  const auto a = BdrnnModel::initialize(hp);
  EXPECT_TRUE(a == BdrnnModel::initialize(hp));
  double max_abs = 0.0;
  visit_tensors(a.params, [&](const auto& t, bool) { max_abs = std::max(max_abs, t.cwiseAbs().maxCoeff()); });
  EXPECT_LE(max_abs, 0.1);
  EXPECT_GT(max_abs, 0.05);
}
