#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bisent/random.hpp"
#include "bisent/sentiment_class.hpp"
#include "bisent/vocabulary.hpp"

namespace bisent {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Hyperparams {
  std::uint64_t embed_dim = 100;
  std::uint64_t hidden_dim = 128;
  std::uint64_t num_recurrent_layers = 3;
  std::uint64_t vocab_size = 13398;
  std::uint64_t num_classes = kNumClasses;
  double dropout_keep = 0.6;
  double l2_coeff = 1.3e-3;
  double learning_rate = 0.05;
  std::uint64_t batch_size = 64;
  std::uint64_t epochs = 5;
  double grad_clip = 5.0;
  std::uint64_t seed = 0;
  std::uint64_t max_seq_len = 64;

  bool operator==(const Hyperparams&) const = default;
};

// Throws std::invalid_argument when a dimension is zero or a rate is out of range.
void validate(const Hyperparams& hp);

// Weights of one recurrent direction of one layer:
//   h_t = tanh(input * x_t + recurrent * h_{t-1 or t+1} + bias)
struct DirectionWeights {
  Matrix input;      // hidden x layer input
  Matrix recurrent;  // hidden x hidden
  Vector bias;       // hidden
};

struct LayerWeights {
  DirectionWeights fwd;
  DirectionWeights bwd;
};

// All trainable tensors. Their canonical order (initialization, files,
// gradient norms) is: embedding; for each layer bottom-up: fwd input,
// fwd recurrent, fwd bias, bwd input, bwd recurrent, bwd bias; then
// out_fwd, out_bwd, out_bias. Matrices are traversed row by row.
struct Parameters {
  RowMatrix embedding;  // vocab x embed
  std::vector<LayerWeights> layers;
  Matrix out_fwd;   // classes x hidden, applied to the top forward state at t = T
  Matrix out_bwd;   // classes x hidden, applied to the top backward state at t = 1
  Vector out_bias;  // classes

  static Parameters zeros(const Hyperparams& hp);
  std::size_t count() const;
};

// Calls f(tensor, penalized) for every tensor in canonical order; penalized
// is true for the weight matrices under the L2 term (not biases, not the
// embedding).
template <typename P, typename F>
void visit_tensors(P& params, F&& f) {
  f(params.embedding, false);
  for (auto& layer : params.layers) {
    for (auto* dir : {&layer.fwd, &layer.bwd}) {
      f(dir->input, true);
      f(dir->recurrent, true);
      f(dir->bias, false);
    }
  }
  f(params.out_fwd, true);
  f(params.out_bwd, true);
  f(params.out_bias, false);
}

struct BdrnnModel {
  Hyperparams hp;
  Parameters params;
  std::uint64_t vocab_hash = 0;

  // Every tensor drawn from uniform(-0.1, 0.1) in canonical order, seeded by hp.seed.
  static BdrnnModel initialize(const Hyperparams& hp);

  bool operator==(const BdrnnModel& other) const;
};

Vector forward_step(const DirectionWeights& w, const Vector& below, const Vector& prev_time);
Vector backward_step(const DirectionWeights& w, const Vector& below, const Vector& next_time);

// Whole-sequence recurrences with zero boundary states. run_backward walks
// t = T..1 and returns states indexed by t.
std::vector<Vector> run_forward(const DirectionWeights& w, std::span<const Vector> inputs);
std::vector<Vector> run_backward(const DirectionWeights& w, std::span<const Vector> inputs);

enum class Mode { Inference, Train };

struct LayerTrace {
  std::vector<Vector> inputs;  // what the layer consumed, after dropout
  std::vector<Vector> masks;   // inverted-dropout masks on inputs (train mode, layers above the first)
  std::vector<Vector> fwd;
  std::vector<Vector> bwd;
};

struct ForwardCache {
  std::vector<int> ids;  // the first `length` token ids
  std::vector<LayerTrace> layers;
  Vector summary_fwd;  // top forward state at t = T, after dropout
  Vector summary_bwd;  // top backward state at t = 1, after dropout
  Vector summary_fwd_mask;
  Vector summary_bwd_mask;
  Vector probs;
};

struct ForwardResult {
  Vector probs;
  ForwardCache cache;
};

// Embedding, stacked bidirectional layers (each above the first reads the
// concatenated fwd|bwd states below), softmax over
// out_fwd * F_T + out_bwd * B_1 + out_bias. Train mode applies inverted
// dropout to layer inputs above the embedding and to the two summary states
// and needs an rng. Throws std::out_of_range for ids outside the vocabulary.
ForwardResult forward(const BdrnnModel& model, const EncodedSequence& seq, Mode mode = Mode::Inference,
                      Rng* rng = nullptr);

double cross_entropy(const Vector& probs, std::size_t gold);

// 0.5 * l2_coeff * sum of squared penalized weights.
double l2_penalty(const Parameters& params, double l2_coeff);

// Cross-entropy plus the L2 penalty.
double loss(const Vector& probs, std::size_t gold, const BdrnnModel& model, double l2_coeff);

struct Gradients {
  Parameters grad;
  std::vector<int> touched_rows;  // embedding rows with nonzero gradient, sorted
};

Gradients zero_gradients(const Hyperparams& hp);

// Exact gradient of loss(probs, gold, model, model.hp.l2_coeff) with
// respect to every parameter, by backpropagation through time over the
// cached activations. Throws std::invalid_argument when the cache does not
// match the model.
Gradients backward(const BdrnnModel& model, const ForwardCache& cache, std::size_t gold);

// Adds the data term of the gradient into acc (no L2 term).
void accumulate_gradients(const BdrnnModel& model, const ForwardCache& cache, std::size_t gold, Gradients& acc);

// sqrt of the sum of squares over every tensor.
double gradient_norm(const Gradients& g);

// Scales g so its global norm is at most max_norm. Returns the pre-clip norm.
double clip_gradients(Gradients& g, double max_norm);

struct LabeledSequence {
  EncodedSequence seq;
  std::size_t label = 0;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&, const BdrnnModel&)>;

struct TrainResult {
  BdrnnModel model;
  std::vector<EpochStats> trace;
};

// Mini-batch SGD on mean batch loss with global-norm clipping. The shuffle
// order and dropout masks come from streams derived from hp.seed, so the
// result is a pure function of (model, data, hp). hp's shape fields must
// match the model; its training fields are recorded in the returned model.
// Throws DataError for an empty set and NumericError on a non-finite loss.
TrainResult train(BdrnnModel model, std::span<const LabeledSequence> data, const Hyperparams& hp,
                  const EpochCallback& on_epoch = {});

// Argmax of the inference distribution; ties go to the lower class index.
std::size_t predict_index(const BdrnnModel& model, const EncodedSequence& seq);
SentimentClass predict(const BdrnnModel& model, const EncodedSequence& seq);

// Binary model file, little-endian:
//   magic "BISENTM\0" | u32 version | u64 embed_dim hidden_dim layers
//   vocab_size classes batch_size epochs seed max_seq_len | f64 dropout_keep
//   l2_coeff learning_rate grad_clip | u64 vocab_hash | u64 parameter count |
//   f64 parameters in canonical order | u64 FNV-1a of all preceding bytes
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::uint64_t model_file_size(const Hyperparams& hp);

void write_model(const BdrnnModel& model, std::ostream& out);
// Throws DataError on bad magic, version mismatch, truncation or checksum failure.
BdrnnModel read_model(std::istream& in);
void save_model(const BdrnnModel& model, const std::filesystem::path& path);
BdrnnModel load_model(const std::filesystem::path& path);
// Also checks the stored vocabulary hash against `vocab`.
BdrnnModel load_model(const std::filesystem::path& path, const Vocabulary& vocab);

}  // namespace bisent
