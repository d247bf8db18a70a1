#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "bisent/bdrnn.hpp"
#include "bisent/error.hpp"

namespace bisent {
namespace {

void check_shape(const Hyperparams& model_hp, const Hyperparams& hp) {
  if (model_hp.embed_dim != hp.embed_dim || model_hp.hidden_dim != hp.hidden_dim ||
      model_hp.num_recurrent_layers != hp.num_recurrent_layers || model_hp.vocab_size != hp.vocab_size ||
      model_hp.num_classes != hp.num_classes) {
    throw std::invalid_argument("training hyperparameters do not match the model shape");
  }
}

void reset(Gradients& g) {
  for (int row : g.touched_rows) g.grad.embedding.row(row).setZero();
  g.touched_rows.clear();
  bool first = true;
  visit_tensors(g.grad, [&](auto& t, bool) {
    if (first) {
      first = false;
      return;
    }
    t.setZero();
  });
}

// g = g / batch + l2 * W for the penalized weights.
void finish_batch_gradient(Gradients& g, const Parameters& params, double batch, double l2) {
  const double inv = 1.0 / batch;
  for (int row : g.touched_rows) g.grad.embedding.row(row) *= inv;
  for (std::size_t n = 0; n < params.layers.size(); ++n) {
    auto& gl = g.grad.layers[n];
    const auto& pl = params.layers[n];
    gl.fwd.input = gl.fwd.input * inv + l2 * pl.fwd.input;
    gl.fwd.recurrent = gl.fwd.recurrent * inv + l2 * pl.fwd.recurrent;
    gl.fwd.bias *= inv;
    gl.bwd.input = gl.bwd.input * inv + l2 * pl.bwd.input;
    gl.bwd.recurrent = gl.bwd.recurrent * inv + l2 * pl.bwd.recurrent;
    gl.bwd.bias *= inv;
  }
  g.grad.out_fwd = g.grad.out_fwd * inv + l2 * params.out_fwd;
  g.grad.out_bwd = g.grad.out_bwd * inv + l2 * params.out_bwd;
  g.grad.out_bias *= inv;
}

void apply_update(Parameters& params, const Gradients& g, double lr) {
  for (int row : g.touched_rows) params.embedding.row(row) -= lr * g.grad.embedding.row(row);
  for (std::size_t n = 0; n < params.layers.size(); ++n) {
    auto& pl = params.layers[n];
    const auto& gl = g.grad.layers[n];
    pl.fwd.input -= lr * gl.fwd.input;
    pl.fwd.recurrent -= lr * gl.fwd.recurrent;
    pl.fwd.bias -= lr * gl.fwd.bias;
    pl.bwd.input -= lr * gl.bwd.input;
    pl.bwd.recurrent -= lr * gl.bwd.recurrent;
    pl.bwd.bias -= lr * gl.bwd.bias;
  }
  params.out_fwd -= lr * g.grad.out_fwd;
  params.out_bwd -= lr * g.grad.out_bwd;
  params.out_bias -= lr * g.grad.out_bias;
}

std::size_t argmax(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return static_cast<std::size_t>(best);
}

}  // namespace

TrainResult train(BdrnnModel model, std::span<const LabeledSequence> data, const Hyperparams& hp,
                  const EpochCallback& on_epoch) {
  validate(hp);
  check_shape(model.hp, hp);
  if (data.empty()) throw DataError("training set is empty");
  for (const auto& ex : data) {
    if (ex.label >= hp.num_classes) throw std::out_of_range("training label out of range");
  }
  model.hp = hp;

  Rng shuffle_rng(Rng::derive_seed(hp.seed, 1));
  Rng dropout_rng(Rng::derive_seed(hp.seed, 2));
  Gradients acc = zero_gradients(hp);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= hp.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(hp.batch_size));
      reset(acc);
      const double penalty = l2_penalty(model.params, hp.l2_coeff);
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = data[order[k]];
        const auto fr = forward(model, ex.seq, Mode::Train, &dropout_rng);
        const double l = cross_entropy(fr.probs, ex.label) + penalty;
        if (!std::isfinite(l)) {
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", example " +
                             std::to_string(order[k]));
        }
        loss_sum += l;
        if (argmax(fr.probs) == ex.label) ++correct;
        accumulate_gradients(model, fr.cache, ex.label, acc);
      }
      finish_batch_gradient(acc, model.params, static_cast<double>(end - start), hp.l2_coeff);
      clip_gradients(acc, hp.grad_clip);
      apply_update(model.params, acc, hp.learning_rate);
    }
    const auto n = static_cast<double>(data.size());
    EpochStats stats{epoch, loss_sum / n, static_cast<double>(correct) / n};
    result.trace.push_back(stats);
    if (on_epoch) on_epoch(stats, model);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace bisent
