#include "bisent/bdrnn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bisent {
namespace {

std::size_t layer_input_dim(const Hyperparams& hp, std::size_t layer) {
  return layer == 0 ? hp.embed_dim : 2 * hp.hidden_dim;
}

Vector step(const DirectionWeights& w, const Vector& below, const Vector& neighbour) {
  if (w.input.cols() != below.size() || w.recurrent.cols() != neighbour.size() ||
      w.input.rows() != w.bias.size() || w.recurrent.rows() != w.bias.size()) {
    throw std::invalid_argument("recurrent step: dimension mismatch");
  }
  return (w.input * below + w.recurrent * neighbour + w.bias).array().tanh().matrix();
}

Vector dropout_mask(Rng& rng, Eigen::Index size, double keep) {
  Vector mask(size);
  const double scale = 1.0 / keep;
  for (Eigen::Index i = 0; i < size; ++i) mask[i] = rng.bernoulli(keep) ? scale : 0.0;
  return mask;
}

void insert_sorted(std::vector<int>& rows, int id) {
  const auto it = std::lower_bound(rows.begin(), rows.end(), id);
  if (it == rows.end() || *it != id) rows.insert(it, id);
}

template <typename T>
void flatten_into(const T& tensor, std::vector<double>& out) {
  if constexpr (T::ColsAtCompileTime == 1) {
    for (Eigen::Index i = 0; i < tensor.size(); ++i) out.push_back(tensor[i]);
  } else {
    for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor.cols(); ++c) out.push_back(tensor(r, c));
    }
  }
}

std::vector<double> flatten(const Parameters& params) {
  std::vector<double> out;
  out.reserve(params.count());
  visit_tensors(params, [&](const auto& t, bool) { flatten_into(t, out); });
  return out;
}

}  // namespace

void validate(const Hyperparams& hp) {
  if (hp.embed_dim == 0 || hp.hidden_dim == 0 || hp.num_recurrent_layers == 0 || hp.num_classes == 0 ||
      hp.batch_size == 0 || hp.max_seq_len == 0) {
    throw std::invalid_argument("hyperparameter dimensions must be at least 1");
  }
  if (hp.vocab_size <= kReservedIds) throw std::invalid_argument("vocab_size must exceed 2");
  if (!(hp.dropout_keep > 0.0 && hp.dropout_keep <= 1.0)) throw std::invalid_argument("dropout_keep must lie in (0, 1]");
  if (!(hp.l2_coeff >= 0.0) || !std::isfinite(hp.l2_coeff)) throw std::invalid_argument("l2_coeff must be >= 0");
  if (!(hp.learning_rate > 0.0) || !std::isfinite(hp.learning_rate)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(hp.grad_clip > 0.0)) throw std::invalid_argument("grad_clip must be > 0");
}

Parameters Parameters::zeros(const Hyperparams& hp) {
  validate(hp);
  const auto h = static_cast<Eigen::Index>(hp.hidden_dim);
  const auto k = static_cast<Eigen::Index>(hp.num_classes);
  Parameters p;
  p.embedding = RowMatrix::Zero(static_cast<Eigen::Index>(hp.vocab_size), static_cast<Eigen::Index>(hp.embed_dim));
  p.layers.resize(hp.num_recurrent_layers);
  for (std::size_t n = 0; n < p.layers.size(); ++n) {
    const auto in = static_cast<Eigen::Index>(layer_input_dim(hp, n));
    for (auto* dir : {&p.layers[n].fwd, &p.layers[n].bwd}) {
      dir->input = Matrix::Zero(h, in);
      dir->recurrent = Matrix::Zero(h, h);
      dir->bias = Vector::Zero(h);
    }
  }
  p.out_fwd = Matrix::Zero(k, h);
  p.out_bwd = Matrix::Zero(k, h);
  p.out_bias = Vector::Zero(k);
  return p;
}

std::size_t Parameters::count() const {
  std::size_t n = 0;
  visit_tensors(*this, [&](const auto& t, bool) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

BdrnnModel BdrnnModel::initialize(const Hyperparams& hp) {
  BdrnnModel model{hp, Parameters::zeros(hp), 0};
  Rng rng(Rng::derive_seed(hp.seed, 0));
  visit_tensors(model.params, [&](auto& t, bool) {
    using T = std::decay_t<decltype(t)>;
    if constexpr (T::ColsAtCompileTime == 1) {
      for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(-0.1, 0.1);
    } else {
      for (Eigen::Index r = 0; r < t.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = rng.uniform(-0.1, 0.1);
      }
    }
  });
  return model;
}

bool BdrnnModel::operator==(const BdrnnModel& other) const {
  return hp == other.hp && vocab_hash == other.vocab_hash && flatten(params) == flatten(other.params);
}

Vector forward_step(const DirectionWeights& w, const Vector& below, const Vector& prev_time) {
  return step(w, below, prev_time);
}

Vector backward_step(const DirectionWeights& w, const Vector& below, const Vector& next_time) {
  return step(w, below, next_time);
}

std::vector<Vector> run_forward(const DirectionWeights& w, std::span<const Vector> inputs) {
  std::vector<Vector> states;
  states.reserve(inputs.size());
  Vector h = Vector::Zero(w.bias.size());
  for (const auto& x : inputs) {
    h = forward_step(w, x, h);
    states.push_back(h);
  }
  return states;
}

std::vector<Vector> run_backward(const DirectionWeights& w, std::span<const Vector> inputs) {
  std::vector<Vector> states(inputs.size());
  Vector h = Vector::Zero(w.bias.size());
  for (std::size_t t = inputs.size(); t-- > 0;) {
    h = backward_step(w, inputs[t], h);
    states[t] = h;
  }
  return states;
}

ForwardResult forward(const BdrnnModel& model, const EncodedSequence& seq, Mode mode, Rng* rng) {
  const auto& hp = model.hp;
  const auto& p = model.params;
  if (mode == Mode::Train && rng == nullptr) throw std::invalid_argument("train-mode forward needs an rng");
  if (seq.length == 0 || seq.length > seq.token_ids.size()) throw std::invalid_argument("sequence length out of range");
  if (seq.length > hp.max_seq_len) throw std::invalid_argument("sequence longer than max_seq_len");

  const bool dropout = mode == Mode::Train && hp.dropout_keep < 1.0;
  const std::size_t steps = seq.length;
  const auto h = static_cast<Eigen::Index>(hp.hidden_dim);

  ForwardCache cache;
  cache.ids.assign(seq.token_ids.begin(), seq.token_ids.begin() + static_cast<std::ptrdiff_t>(steps));
  std::vector<Vector> inputs(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const int id = cache.ids[t];
    if (id < 0 || id >= p.embedding.rows()) throw std::out_of_range("token id " + std::to_string(id) + " out of range");
    inputs[t] = p.embedding.row(id).transpose();
  }

  cache.layers.resize(p.layers.size());
  for (std::size_t n = 0; n < p.layers.size(); ++n) {
    auto& trace = cache.layers[n];
    if (n > 0) {
      const auto& below = cache.layers[n - 1];
      for (std::size_t t = 0; t < steps; ++t) {
        inputs[t].resize(2 * h);
        inputs[t] << below.fwd[t], below.bwd[t];
        if (dropout) {
          trace.masks.push_back(dropout_mask(*rng, 2 * h, hp.dropout_keep));
          inputs[t].array() *= trace.masks.back().array();
        }
      }
    }
    trace.fwd = run_forward(p.layers[n].fwd, inputs);
    trace.bwd = run_backward(p.layers[n].bwd, inputs);
    trace.inputs = inputs;
  }

  const auto& top = cache.layers.back();
  cache.summary_fwd = top.fwd.back();
  cache.summary_bwd = top.bwd.front();
  if (dropout) {
    cache.summary_fwd_mask = dropout_mask(*rng, h, hp.dropout_keep);
    cache.summary_bwd_mask = dropout_mask(*rng, h, hp.dropout_keep);
    cache.summary_fwd.array() *= cache.summary_fwd_mask.array();
    cache.summary_bwd.array() *= cache.summary_bwd_mask.array();
  }

  Vector z = p.out_fwd * cache.summary_fwd + p.out_bwd * cache.summary_bwd + p.out_bias;
  z.array() -= z.maxCoeff();
  Vector probs = z.array().exp().matrix();
  probs /= probs.sum();
  cache.probs = probs;
  return {std::move(probs), std::move(cache)};
}

double cross_entropy(const Vector& probs, std::size_t gold) {
  if (gold >= static_cast<std::size_t>(probs.size())) throw std::out_of_range("gold class out of range");
  return -std::log(probs[static_cast<Eigen::Index>(gold)]);
}

double l2_penalty(const Parameters& params, double l2_coeff) {
  double sum = 0.0;
  visit_tensors(params, [&](const auto& t, bool penalized) {
    if (penalized) sum += t.squaredNorm();
  });
  return 0.5 * l2_coeff * sum;
}

double loss(const Vector& probs, std::size_t gold, const BdrnnModel& model, double l2_coeff) {
  return cross_entropy(probs, gold) + l2_penalty(model.params, l2_coeff);
}

Gradients zero_gradients(const Hyperparams& hp) { return {Parameters::zeros(hp), {}}; }

void accumulate_gradients(const BdrnnModel& model, const ForwardCache& cache, std::size_t gold, Gradients& acc) {
  const auto& hp = model.hp;
  const auto& p = model.params;
  const auto h = static_cast<Eigen::Index>(hp.hidden_dim);
  const std::size_t steps = cache.ids.size();
  if (cache.layers.size() != p.layers.size() || steps == 0 || cache.probs.size() != p.out_bias.size() ||
      cache.summary_fwd.size() != h || cache.summary_bwd.size() != h) {
    throw std::invalid_argument("forward cache does not match the model");
  }
  for (const auto& trace : cache.layers) {
    if (trace.fwd.size() != steps || trace.bwd.size() != steps || trace.inputs.size() != steps) {
      throw std::invalid_argument("forward cache does not match the model");
    }
  }
  if (gold >= static_cast<std::size_t>(cache.probs.size())) throw std::out_of_range("gold class out of range");

  auto& g = acc.grad;
  Vector dz = cache.probs;
  dz[static_cast<Eigen::Index>(gold)] -= 1.0;
  g.out_fwd.noalias() += dz * cache.summary_fwd.transpose();
  g.out_bwd.noalias() += dz * cache.summary_bwd.transpose();
  g.out_bias += dz;

  std::vector<Vector> d_fwd(steps, Vector::Zero(h));
  std::vector<Vector> d_bwd(steps, Vector::Zero(h));
  d_fwd.back() = p.out_fwd.transpose() * dz;
  d_bwd.front() = p.out_bwd.transpose() * dz;
  if (cache.summary_fwd_mask.size() == h) {
    d_fwd.back().array() *= cache.summary_fwd_mask.array();
    d_bwd.front().array() *= cache.summary_bwd_mask.array();
  }

  for (std::size_t n = p.layers.size(); n-- > 0;) {
    const auto& w = p.layers[n];
    auto& gw = g.layers[n];
    const auto& trace = cache.layers[n];
    std::vector<Vector> d_in(steps, Vector::Zero(static_cast<Eigen::Index>(layer_input_dim(hp, n))));

    Vector carry = Vector::Zero(h);
    for (std::size_t t = steps; t-- > 0;) {
      const Vector da = ((d_fwd[t] + carry).array() * (1.0 - trace.fwd[t].array().square())).matrix();
      gw.fwd.input.noalias() += da * trace.inputs[t].transpose();
      if (t > 0) gw.fwd.recurrent.noalias() += da * trace.fwd[t - 1].transpose();
      gw.fwd.bias += da;
      d_in[t].noalias() += w.fwd.input.transpose() * da;
      carry.noalias() = w.fwd.recurrent.transpose() * da;
    }

    carry.setZero();
    for (std::size_t t = 0; t < steps; ++t) {
      const Vector da = ((d_bwd[t] + carry).array() * (1.0 - trace.bwd[t].array().square())).matrix();
      gw.bwd.input.noalias() += da * trace.inputs[t].transpose();
      if (t + 1 < steps) gw.bwd.recurrent.noalias() += da * trace.bwd[t + 1].transpose();
      gw.bwd.bias += da;
      d_in[t].noalias() += w.bwd.input.transpose() * da;
      carry.noalias() = w.bwd.recurrent.transpose() * da;
    }

    if (n > 0) {
      for (std::size_t t = 0; t < steps; ++t) {
        if (!trace.masks.empty()) d_in[t].array() *= trace.masks[t].array();
        d_fwd[t] = d_in[t].head(h);
        d_bwd[t] = d_in[t].tail(h);
      }
    } else {
      for (std::size_t t = 0; t < steps; ++t) {
        const int id = cache.ids[t];
        g.embedding.row(id) += d_in[t].transpose();
        insert_sorted(acc.touched_rows, id);
      }
    }
  }
}

Gradients backward(const BdrnnModel& model, const ForwardCache& cache, std::size_t gold) {
  Gradients g = zero_gradients(model.hp);
  accumulate_gradients(model, cache, gold, g);
  const double l2 = model.hp.l2_coeff;
  if (l2 != 0.0) {
    auto& gp = g.grad;
    const auto& mp = model.params;
    for (std::size_t n = 0; n < mp.layers.size(); ++n) {
      gp.layers[n].fwd.input += l2 * mp.layers[n].fwd.input;
      gp.layers[n].fwd.recurrent += l2 * mp.layers[n].fwd.recurrent;
      gp.layers[n].bwd.input += l2 * mp.layers[n].bwd.input;
      gp.layers[n].bwd.recurrent += l2 * mp.layers[n].bwd.recurrent;
    }
    gp.out_fwd += l2 * mp.out_fwd;
    gp.out_bwd += l2 * mp.out_bwd;
  }
  return g;
}

double gradient_norm(const Gradients& g) {
  double sum = 0.0;
  for (int row : g.touched_rows) sum += g.grad.embedding.row(row).squaredNorm();
  bool first = true;
  visit_tensors(g.grad, [&](const auto& t, bool) {
    if (first) {  // embedding, counted over touched rows above
      first = false;
      return;
    }
    sum += t.squaredNorm();
  });
  return std::sqrt(sum);
}

double clip_gradients(Gradients& g, double max_norm) {
  const double norm = gradient_norm(g);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (int row : g.touched_rows) g.grad.embedding.row(row) *= scale;
    bool first = true;
    visit_tensors(g.grad, [&](auto& t, bool) {
      if (first) {
        first = false;
        return;
      }
      t *= scale;
    });
  }
  return norm;
}

std::size_t predict_index(const BdrnnModel& model, const EncodedSequence& seq) {
  const auto result = forward(model, seq, Mode::Inference);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < result.probs.size(); ++i) {
    if (result.probs[i] > result.probs[best]) best = i;
  }
  return static_cast<std::size_t>(best);
}

SentimentClass predict(const BdrnnModel& model, const EncodedSequence& seq) {
  return class_from_index(predict_index(model, seq));
}

}  // namespace bisent
