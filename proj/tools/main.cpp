// bisent: command-line driver for the sentiment pipeline.
//
//   bisent synth          --out corpus.jsonl
//   bisent build-lexicon  --corpus c.jsonl --out lexicon.tsv [--holdout h.jsonl]
//   bisent train          --corpus c.jsonl --out model.bin [--lexicon l.tsv] [--trace t.tsv]
//   bisent classify       --corpus c.jsonl --lexicon l.tsv [--model m.bin] --out scored.tsv
//   bisent rate           --corpus a.jsonl --scored a.tsv [--corpus b.jsonl --scored b.tsv ...]
//   bisent evaluate       --corpus test.jsonl (--model m.bin | --lexicon l.tsv)
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bisent/bdrnn.hpp"
#include "bisent/corpus.hpp"
#include "bisent/error.hpp"
#include "bisent/format.hpp"
#include "bisent/impact.hpp"
#include "bisent/lexicon.hpp"
#include "bisent/metrics.hpp"
#include "bisent/polarity.hpp"
#include "bisent/preprocess.hpp"
#include "bisent/vocabulary.hpp"

namespace fs = std::filesystem;
using namespace bisent;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreprocessFlags {
  std::string stoplist;
  std::string expansions;

  void add(CLI::App* cmd) {
    cmd->add_option("--stoplist", stoplist, "Stop-word file, one word per line")->check(CLI::ExistingFile);
    cmd->add_option("--expansions", expansions, "Expansion map, word<TAB>addition...")->check(CLI::ExistingFile);
  }

  PreprocessOptions options() const {
    PreprocessOptions opts;
    if (!stoplist.empty()) opts.stops = load_stop_list(stoplist);
    if (!expansions.empty()) opts.expansions = load_expansion_map(expansions);
    return opts;
  }
};

Corpus read_corpus_file(const std::string& path) {
  auto loaded = load_corpus(path);
  for (const auto& r : loaded.rejects) {
    std::cerr << "warning: " << path << ":" << r.line << ": skipped: " << r.reason << "\n";
  }
  return std::move(loaded.corpus);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

std::vector<std::string> split_tags(const std::string& csv) {
  std::vector<std::string> tags;
  for (const auto& t : split(csv, ',')) {
    const auto s = std::string(trim(t));
    if (!s.empty()) tags.push_back(s);
  }
  return tags;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

// --- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string out;
  SynthConfig config = default_synth_config();
};

int run_synth(const SynthArgs& a, std::uint64_t seed) {
  const auto corpus = synth_corpus(a.config, seed);
  save_corpus(corpus, a.out);
  std::cout << "posts=" << corpus.posts.size() << "\n";
  return 0;
}

// --- build-lexicon -------------------------------------------------------

struct LexiconArgs {
  std::string corpus;
  std::string holdout;
  std::string out;
  std::string positive_tags;
  std::string negative_tags;
  double upper_threshold = 1.0;
  double theta = kDefaultTheta;
  std::int64_t min_count = 3;
  PreprocessFlags pre;
};

int run_build_lexicon(const LexiconArgs& a) {
  SeedSpec seeds{split_tags(a.positive_tags), split_tags(a.negative_tags), a.upper_threshold};
  validate(seeds);
  const auto corpus = read_corpus_file(a.corpus);
  if (corpus.posts.empty()) throw DataError("corpus " + a.corpus + " is empty");
  const auto opts = a.pre.options();
  const auto [pos, neg] = collect_seed_posts(corpus, seeds);
  const auto dpos = preprocess_corpus(pos, opts);
  const auto dneg = preprocess_corpus(neg, opts);

  ScoreOptions score_opts;
  score_opts.min_count = a.min_count;
  score_opts.excluded_hashtags.insert(seeds.positive_hashtags.begin(), seeds.positive_hashtags.end());
  score_opts.excluded_hashtags.insert(seeds.negative_hashtags.begin(), seeds.negative_hashtags.end());

  double theta = a.theta;
  if (!a.holdout.empty()) {
    const auto holdout = read_corpus_file(a.holdout);
    const auto cal = calibrate_theta(dpos, dneg, holdout, opts, score_opts);
    theta = cal.theta;
    for (const auto& t : cal.trials) {
      std::cout << "trial theta=" << format_double(t.theta) << " errors=" << t.errors << "\n";
    }
  }
  const auto lexicon = score_words(dpos, dneg, theta, score_opts);
  save_lexicon(lexicon, a.out);

  std::size_t counts[3] = {0, 0, 0};
  for (const auto& [word, s] : lexicon.scores) ++counts[s + 1];
  std::cout << "theta=" << format_double(theta) << "\n"
            << "seed_posts_positive=" << pos.posts.size() << "\n"
            << "seed_posts_negative=" << neg.posts.size() << "\n"
            << "words_positive=" << counts[2] << "\n"
            << "words_negative=" << counts[0] << "\n"
            << "words_neutral=" << counts[1] << "\n";
  return 0;
}

// --- train ---------------------------------------------------------------

struct TrainArgs {
  std::string corpus;
  std::string lexicon;
  std::string validation;
  std::string out;
  std::string vocab;
  std::string trace;
  std::uint64_t max_vocab = 13398;
  Hyperparams hp;
  PreprocessFlags pre;
};

// Gold class when present, otherwise the lexicon bucket of the post.
std::vector<SentimentClass> labels_for(const Corpus& corpus, std::span<const Document> docs,
                                       const std::optional<Lexicon>& lexicon) {
  std::vector<SentimentClass> labels;
  labels.reserve(corpus.posts.size());
  for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
    const auto& post = corpus.posts[i];
    if (post.gold_class) {
      labels.push_back(*post.gold_class);
    } else if (lexicon) {
      labels.push_back(bucket(message_polarity(docs[i], *lexicon)));
    } else {
      throw DataError("post " + post.id + " has no gold_class and no --lexicon was given");
    }
  }
  return labels;
}

std::vector<LabeledSequence> encode_all(std::span<const Document> docs, std::span<const SentimentClass> labels,
                                        const Vocabulary& vocab, std::size_t max_seq_len) {
  std::vector<LabeledSequence> out;
  out.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    out.push_back({encode(docs[i], vocab, max_seq_len), class_index(labels[i])});
  }
  return out;
}

EvalReport evaluate_model(const BdrnnModel& model, std::span<const LabeledSequence> data) {
  std::vector<SentimentClass> golds, preds;
  for (const auto& ex : data) {
    golds.push_back(class_from_index(ex.label));
    preds.push_back(predict(model, ex.seq));
  }
  return evaluate(golds, preds);
}

int run_train(TrainArgs a, std::uint64_t seed) {
  const auto opts = a.pre.options();
  const auto corpus = read_corpus_file(a.corpus);
  if (corpus.posts.empty()) throw DataError("training set is empty");
  std::optional<Lexicon> lexicon;
  if (!a.lexicon.empty()) lexicon = load_lexicon(a.lexicon);

  const auto docs = preprocess_corpus(corpus, opts);
  const auto labels = labels_for(corpus, docs, lexicon);
  const auto vocab = Vocabulary::build(docs, a.max_vocab);

  auto hp = a.hp;
  hp.seed = seed;
  hp.vocab_size = vocab.size();
  validate(hp);
  const auto train_set = encode_all(docs, labels, vocab, hp.max_seq_len);

  std::vector<LabeledSequence> validation_set;
  if (!a.validation.empty()) {
    const auto vcorpus = read_corpus_file(a.validation);
    const auto vdocs = preprocess_corpus(vcorpus, opts);
    validation_set = encode_all(vdocs, labels_for(vcorpus, vdocs, lexicon), vocab, hp.max_seq_len);
  }
  const auto& monitor = validation_set.empty() ? train_set : validation_set;

  std::ostringstream trace;
  write_trace_header(trace);
  auto model = BdrnnModel::initialize(hp);
  model.vocab_hash = vocab.hash();
  const auto result = train(std::move(model), train_set, hp, [&](const EpochStats& s, const BdrnnModel& m) {
    const auto report = evaluate_model(m, monitor);
    write_trace_row(trace, s.epoch, s.mean_loss, report);
    std::cout << "epoch=" << s.epoch << " loss=" << format_double(s.mean_loss)
              << " train_accuracy=" << format_double(s.accuracy)
              << " monitor_accuracy=" << format_double(report.accuracy) << "\n";
  });

  save_model(result.model, a.out);
  vocab.save(a.vocab.empty() ? a.out + ".vocab" : a.vocab);
  if (!a.trace.empty()) open_out(a.trace) << trace.str();
  std::cout << "vocab_size=" << vocab.size() << "\n"
            << "parameters=" << result.model.params.count() << "\n";
  return 0;
}

// --- classify ------------------------------------------------------------

struct ClassifyArgs {
  std::string corpus;
  std::string lexicon;
  std::string model;
  std::string vocab;
  std::string out;
  int emphasis_multiplier = 1;
  PreprocessFlags pre;
};

int run_classify(const ClassifyArgs& a) {
  const auto opts = a.pre.options();
  const auto corpus = read_corpus_file(a.corpus);
  const auto lexicon = load_lexicon(a.lexicon);
  std::optional<BdrnnModel> model;
  Vocabulary vocab;
  if (!a.model.empty()) {
    vocab = Vocabulary::load(a.vocab.empty() ? a.model + ".vocab" : a.vocab);
    model = load_model(a.model, vocab);
  }
  const PolarityOptions popts{a.emphasis_multiplier};
  std::vector<ScoredPost> scored;
  scored.reserve(corpus.posts.size());
  std::size_t agree = 0;
  for (const auto& post : corpus.posts) {
    const auto doc = preprocess(post, opts);
    const auto pol = message_polarity(doc, lexicon, popts);
    const auto by_lexicon = bucket(pol);
    auto cls = by_lexicon;
    if (model) {
      cls = predict(*model, encode(doc, vocab, model->hp.max_seq_len));
      if (cls == by_lexicon) ++agree;
    }
    scored.push_back({post.id, pol.p, cls});
  }
  save_scored_posts(scored, a.out);
  std::cout << "posts=" << scored.size() << "\n";
  if (model && !scored.empty()) {
    std::cout << "lexicon_agreement=" << format_double(static_cast<double>(agree) / scored.size()) << "\n";
  }
  return 0;
}

// --- rate ----------------------------------------------------------------

struct RateArgs {
  std::vector<std::string> corpora;
  std::vector<std::string> scored;
  std::string denominator = "positive";
  std::string out;
};

int run_rate(const RateArgs& a) {
  if (a.corpora.size() != a.scored.size()) {
    throw UsageError("--corpus and --scored must be given the same number of times");
  }
  const auto denominator = parse_denominator(a.denominator);
  std::vector<RateReport> reports;
  for (std::size_t i = 0; i < a.corpora.size(); ++i) {
    const auto corpus = read_corpus_file(a.corpora[i]);
    const auto scored = load_scored_posts(a.scored[i]);
    const auto records = impact_records(corpus, scored);
    reports.push_back(rate(corpus.topic, records, denominator));
  }
  const auto ranked = compare_topics(std::move(reports));
  if (a.out.empty()) {
    write_rate_reports(ranked, std::cout);
  } else {
    auto out = open_out(a.out);
    write_rate_reports(ranked, out);
  }
  return 0;
}

// --- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  std::string corpus;
  std::string model;
  std::string vocab;
  std::string lexicon;
  std::string out;
  PreprocessFlags pre;
};

int run_evaluate(const EvaluateArgs& a) {
  if (a.model.empty() == a.lexicon.empty()) throw UsageError("evaluate needs exactly one of --model or --lexicon");
  const auto opts = a.pre.options();
  const auto corpus = read_corpus_file(a.corpus);
  if (corpus.posts.empty()) throw DataError("evaluation corpus is empty");
  for (const auto& post : corpus.posts) {
    if (!post.gold_class) throw DataError("no gold labels: post " + post.id + " has no gold_class");
  }
  std::optional<BdrnnModel> model;
  std::optional<Lexicon> lexicon;
  Vocabulary vocab;
  if (!a.model.empty()) {
    vocab = Vocabulary::load(a.vocab.empty() ? a.model + ".vocab" : a.vocab);
    model = load_model(a.model, vocab);
  } else {
    lexicon = load_lexicon(a.lexicon);
  }
  std::vector<SentimentClass> golds, preds;
  for (const auto& post : corpus.posts) {
    const auto doc = preprocess(post, opts);
    golds.push_back(*post.gold_class);
    preds.push_back(model ? predict(*model, encode(doc, vocab, model->hp.max_seq_len))
                          : bucket(message_polarity(doc, *lexicon)));
  }
  const auto report = evaluate(golds, preds);
  if (a.out.empty()) {
    write_eval_report(report, std::cout);
  } else {
    auto out = open_out(a.out);
    write_eval_report(report, out);
    std::cout << "accuracy=" << format_double(report.accuracy) << "\n";
  }
  return 0;
}

// --- config file ---------------------------------------------------------

// Flat key=value lines become --key=value flags placed right after the
// subcommand, so flags on the real command line take precedence.
std::vector<std::string> config_flags(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::vector<std::string> flags;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw UsageError(path + ":" + std::to_string(n) + ": expected key=value");
    auto key = std::string(trim(t.substr(0, eq)));
    const auto value = std::string(trim(t.substr(eq + 1)));
    if (key.empty()) throw UsageError(path + ":" + std::to_string(n) + ": empty key");
    if (key == "config") throw UsageError(path + ":" + std::to_string(n) + ": config files cannot nest");
    std::replace(key.begin(), key.end(), '_', '-');
    flags.push_back("--" + key + "=" + value);
  }
  return flags;
}

std::vector<std::string> expand_config(std::vector<std::string> args, const std::vector<std::string>& commands) {
  std::string config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    }
  }
  if (config.empty()) return args;
  const auto flags = config_flags(config);
  auto sub = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
    return std::find(commands.begin(), commands.end(), a) != commands.end();
  });
  const auto at = sub == args.end() ? args.begin() : sub + 1;
  args.insert(at, flags.begin(), flags.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentiment lexicon, bidirectional RNN classifier and topic support rating"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::uint64_t seed = 0;
  std::string config_path;
  app.add_option("--seed", seed, "Seed for every random stream")->capture_default_str();
  app.add_option("--config", config_path, "Flat key=value file of flag defaults");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a labelled synthetic corpus");
  c_synth->add_option("--out", synth.out, "Output corpus (JSONL)")->required();
  c_synth->add_option("--posts", synth.config.num_posts)->capture_default_str();
  c_synth->add_option("--topic", synth.config.topic)->capture_default_str();
  c_synth->add_option("--positive-share", synth.config.positive_share)->capture_default_str();
  c_synth->add_option("--negative-share", synth.config.negative_share)->capture_default_str();
  c_synth->add_option("--hashtag-rate", synth.config.hashtag_rate)->capture_default_str();
  c_synth->add_option("--topic-hashtag-rate", synth.config.topic_hashtag_rate)->capture_default_str();
  c_synth->add_option("--ambiguity-rate", synth.config.ambiguity_rate)->capture_default_str();
  c_synth->add_option("--emphasis-rate", synth.config.emphasis_rate)->capture_default_str();
  c_synth->add_option("--likes-mean", synth.config.likes_mean)->capture_default_str();
  c_synth->add_option("--retweets-mean", synth.config.retweets_mean)->capture_default_str();

  const auto defaults = default_synth_config();
  LexiconArgs lex;
  lex.positive_tags = join(defaults.positive_hashtags);
  lex.negative_tags = join(defaults.negative_hashtags);
  auto* c_lex = app.add_subcommand("build-lexicon", "Score words from seed-hashtag posts");
  c_lex->add_option("--corpus", lex.corpus)->required()->check(CLI::ExistingFile);
  c_lex->add_option("--out", lex.out, "Output lexicon (TSV)")->required();
  c_lex->add_option("--holdout", lex.holdout, "Labelled corpus for theta calibration")->check(CLI::ExistingFile);
  c_lex->add_option("--positive-tags", lex.positive_tags, "Comma-separated seed hashtags")->capture_default_str();
  c_lex->add_option("--negative-tags", lex.negative_tags, "Comma-separated seed hashtags")->capture_default_str();
  c_lex->add_option("--upper-threshold", lex.upper_threshold)->capture_default_str();
  c_lex->add_option("--theta", lex.theta, "Used when no holdout is given")->capture_default_str();
  c_lex->add_option("--min-count", lex.min_count)->capture_default_str();
  lex.pre.add(c_lex);

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train the bidirectional RNN classifier");
  c_train->add_option("--corpus", tr.corpus)->required()->check(CLI::ExistingFile);
  c_train->add_option("--out", tr.out, "Output model file")->required();
  c_train->add_option("--lexicon", tr.lexicon, "Labels posts without gold_class")->check(CLI::ExistingFile);
  c_train->add_option("--validation", tr.validation, "Corpus monitored in the trace")->check(CLI::ExistingFile);
  c_train->add_option("--vocab", tr.vocab, "Vocabulary output (default <out>.vocab)");
  c_train->add_option("--trace", tr.trace, "Per-epoch trace (TSV)");
  c_train->add_option("--max-vocab", tr.max_vocab)->capture_default_str();
  c_train->add_option("--embed-dim", tr.hp.embed_dim)->capture_default_str();
  c_train->add_option("--hidden-dim", tr.hp.hidden_dim)->capture_default_str();
  c_train->add_option("--layers", tr.hp.num_recurrent_layers)->capture_default_str();
  c_train->add_option("--dropout-keep", tr.hp.dropout_keep)->capture_default_str();
  c_train->add_option("--l2", tr.hp.l2_coeff)->capture_default_str();
  c_train->add_option("--lr", tr.hp.learning_rate)->capture_default_str();
  c_train->add_option("--batch-size", tr.hp.batch_size)->capture_default_str();
  c_train->add_option("--epochs", tr.hp.epochs)->capture_default_str();
  c_train->add_option("--grad-clip", tr.hp.grad_clip)->capture_default_str();
  c_train->add_option("--max-seq-len", tr.hp.max_seq_len)->capture_default_str();
  tr.pre.add(c_train);

  ClassifyArgs cl;
  auto* c_classify = app.add_subcommand("classify", "Score and classify every post");
  c_classify->add_option("--corpus", cl.corpus)->required()->check(CLI::ExistingFile);
  c_classify->add_option("--lexicon", cl.lexicon)->required()->check(CLI::ExistingFile);
  c_classify->add_option("--model", cl.model, "Classify with the model instead of lexicon buckets")
      ->check(CLI::ExistingFile);
  c_classify->add_option("--vocab", cl.vocab, "Model vocabulary (default <model>.vocab)")->check(CLI::ExistingFile);
  c_classify->add_option("--out", cl.out, "Output scored posts (TSV)")->required();
  c_classify->add_option("--emphasis-multiplier", cl.emphasis_multiplier)->capture_default_str();
  cl.pre.add(c_classify);

  RateArgs ra;
  auto* c_rate = app.add_subcommand("rate", "Degree of impact and support rate per topic");
  c_rate->add_option("--corpus", ra.corpora, "Topic corpus; repeat per topic")
      ->required()
      ->check(CLI::ExistingFile)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  c_rate->add_option("--scored", ra.scored, "Scored posts for the matching --corpus")
      ->required()
      ->check(CLI::ExistingFile)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  c_rate->add_option("--denominator", ra.denominator)
      ->check(CLI::IsMember({"positive", "all"}))
      ->capture_default_str();
  c_rate->add_option("--out", ra.out, "Report file (default stdout)");

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Score predictions against gold labels");
  c_eval->add_option("--corpus", ev.corpus, "Labelled test corpus")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--model", ev.model)->check(CLI::ExistingFile);
  c_eval->add_option("--vocab", ev.vocab, "Model vocabulary (default <model>.vocab)")->check(CLI::ExistingFile);
  c_eval->add_option("--lexicon", ev.lexicon, "Evaluate lexicon buckets instead of a model")
      ->check(CLI::ExistingFile);
  c_eval->add_option("--out", ev.out, "Report file (default stdout)");
  ev.pre.add(c_eval);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::vector<std::string> names;
    for (const auto* sub : app.get_subcommands({})) names.push_back(sub->get_name());
    args = expand_config(std::move(args), names);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }

  try {
    if (c_synth->parsed()) return run_synth(synth, seed);
    if (c_lex->parsed()) return run_build_lexicon(lex);
    if (c_train->parsed()) return run_train(tr, seed);
    if (c_classify->parsed()) return run_classify(cl);
    if (c_rate->parsed()) return run_rate(ra);
    if (c_eval->parsed()) return run_evaluate(ev);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
