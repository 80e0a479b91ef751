#include "canids/plenet.hpp"

#include <cmath>
#include <numeric>

#include "canids/error.hpp"
#include "canids/rng.hpp"

namespace canids::plenet {

std::vector<nn::LayerSpec> plenet_layers() {
  return {
      nn::Conv1D{5, 5, 1}, nn::ReLU{},  nn::MaxPool1D{},     nn::Conv1D{20, 5, 5}, nn::ReLU{},  nn::MaxPool1D{},
      nn::Flatten{},       nn::Dense{20, 500}, nn::ReLU{}, nn::Dense{500, 2},    nn::Softmax{},
  };
}

nn::Network build_plenet(std::uint64_t seed) {
  nn::Network net(nn::Shape{ingest::kFeatureWidth, 1}, plenet_layers());
  if (net.parameter_count() != kTotalParameters || net.layer_parameter_count(0) != 30 ||
      net.layer_parameter_count(3) != 520 || net.layer_parameter_count(7) != 10'500 ||
      net.layer_parameter_count(9) != 1'002) {
    throw Error(Errc::ShapeMismatch, "P-LeNet parameter layout differs from 30/520/10500/1002");
  }
  net.init_glorot(seed);
  return net;
}

nn::Tensor to_input(const ingest::FeatureVector& fv) {
  return nn::Tensor(ingest::kFeatureWidth, 1, std::vector<double>(fv.x.begin(), fv.x.end()));
}

namespace {

Prediction from_probs(const std::vector<double>& p) {
  Prediction out;
  out.p_normal = p[0];
  out.p_attack = p[1];
  out.label = p[1] >= p[0] ? 1 : 0;
  return out;
}

void check_model(const nn::Network& model) {
  const auto in = model.input_shape();
  if (in.length * in.channels != ingest::kFeatureWidth || model.shapes().empty() ||
      model.shapes().back().length != 2) {
    throw Error(Errc::ShapeMismatch, "model must map 16 features to 2 classes");
  }
}

nn::Tensor input_for(const nn::Network& model, const ingest::FeatureVector& fv) {
  const auto in = model.input_shape();
  return nn::Tensor(in.length, in.channels, std::vector<double>(fv.x.begin(), fv.x.end()));
}

}  // namespace

Prediction predict_one(const nn::Network& model, const ingest::FeatureVector& fv) {
  check_model(model);
  return from_probs(model.forward(input_for(model, fv)).data);
}

std::vector<Prediction> predict(const nn::Network& model, std::span<const ingest::FeatureVector> rows) {
  check_model(model);
  std::vector<Prediction> out;
  out.reserve(rows.size());
  nn::Trace trace;
  for (const auto& fv : rows) {
    model.forward(input_for(model, fv), trace);
    out.push_back(from_probs(trace.activations.back().data));
  }
  return out;
}

Evaluation evaluate(const nn::Network& model, std::span<const ingest::FeatureVector> rows) {
  check_model(model);
  Evaluation e;
  if (rows.empty()) return e;
  nn::Trace trace;
  std::size_t correct = 0;
  for (const auto& fv : rows) {
    model.forward(input_for(model, fv), trace);
    const auto& p = trace.activations.back().data;
    e.loss -= std::log(std::max(p[fv.y], 1e-12));
    if (from_probs(p).label == fv.y) ++correct;
  }
  e.loss /= static_cast<double>(rows.size());
  e.accuracy = static_cast<double>(correct) / static_cast<double>(rows.size());
  return e;
}

TrainHistory train(nn::Network& model, const ingest::PreparedDataset& data, const TrainConfig& cfg,
                   const std::vector<bool>& trainable, const EpochCallback& on_epoch) {
  check_model(model);
  if (data.train.rows.empty() || data.validation.rows.empty()) {
    throw Error(Errc::EmptyPartition, "training and validation partitions must be non-empty");
  }
  if (cfg.batch_size < 1 || cfg.patience < 1) throw Error(Errc::InvalidArgument, "batch_size and patience must be >= 1");
  if (!trainable.empty() && trainable.size() != model.layers().size()) {
    throw Error(Errc::ShapeMismatch, "trainable mask size differs from layer count");
  }

  const auto& rows = data.train.rows;
  std::vector<nn::Tensor> inputs;
  inputs.reserve(rows.size());
  for (const auto& fv : rows) inputs.push_back(input_for(model, fv));

  nn::AdamState adam = nn::AdamState::for_params(model.params(), nn::AdamHyper{cfg.lr});
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);

  TrainHistory history;
  std::vector<nn::LayerParams> best = model.params();
  double best_acc = -1.0;
  std::size_t since_best = 0;
  nn::Trace trace;
  nn::Gradients grads = model.zero_gradients();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (auto& g : grads) {
        std::fill(g.weights.begin(), g.weights.end(), 0.0);
        std::fill(g.biases.begin(), g.biases.end(), 0.0);
      }
      double batch_loss = 0.0;
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        batch_loss += model.accumulate_gradients(inputs[i], rows[i].y, grads, scale, trace);
        if (from_probs(trace.activations.back().data).label == rows[i].y) ++correct;
      }
      if (!std::isfinite(batch_loss)) {
        throw Error(Errc::NonFiniteLoss, "loss diverged at epoch " + std::to_string(epoch + 1));
      }
      loss_sum += batch_loss;
      nn::adam_step(model.params(), grads, adam, trainable);
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(rows.size());
    stats.train_acc = static_cast<double>(correct) / static_cast<double>(rows.size());
    const auto val = evaluate(model, data.validation.rows);
    stats.val_loss = val.loss;
    stats.val_acc = val.accuracy;
    history.epochs.push_back(stats);
    if (on_epoch) on_epoch(epoch, stats);

    if (stats.val_acc > best_acc) {
      best_acc = stats.val_acc;
      history.best_epoch = epoch;
      best = model.params();
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  model.params() = std::move(best);
  return history;
}

double mmd_distance(std::span<const std::vector<double>> source, std::span<const std::vector<double>> target) {
  if (source.empty() || target.empty()) throw Error(Errc::EmptyDomain, "both domains need at least one sample");
  const std::size_t dim = source.front().size();
  std::vector<double> diff(dim, 0.0);
  for (const auto& v : source) {
    if (v.size() != dim) throw Error(Errc::DimensionMismatch, "source feature widths differ");
    for (std::size_t j = 0; j < dim; ++j) diff[j] += v[j];
  }
  for (auto& d : diff) d /= static_cast<double>(source.size());
  std::vector<double> mean_t(dim, 0.0);
  for (const auto& v : target) {
    if (v.size() != dim) throw Error(Errc::DimensionMismatch, "target feature width differs from source");
    for (std::size_t j = 0; j < dim; ++j) mean_t[j] += v[j];
  }
  double sq = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double d = diff[j] - mean_t[j] / static_cast<double>(target.size());
    sq += d * d;
  }
  return std::sqrt(sq);
}

double mmd_distance(std::span<const ingest::FeatureVector> source, std::span<const ingest::FeatureVector> target) {
  auto widen = [](std::span<const ingest::FeatureVector> rows) {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.emplace_back(r.x.begin(), r.x.end());
    return out;
  };
  const auto s = widen(source);
  const auto t = widen(target);
  return mmd_distance(s, t);
}

std::vector<bool> trainable_mask(const nn::Network& model, FreezeMode freeze) {
  std::vector<bool> mask(model.layers().size(), true);
  if (freeze == FreezeMode::ConvFrozen) {
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (std::holds_alternative<nn::Conv1D>(model.layers()[i])) mask[i] = false;
    }
  }
  return mask;
}

TransferResult transfer_finetune(const nn::Network& source, const ingest::PreparedDataset& target,
                                 const TrainConfig& cfg, FreezeMode freeze, const EpochCallback& on_epoch) {
  TransferResult out{source, {}};
  const auto mask = trainable_mask(out.model, freeze);
  out.history = train(out.model, target, cfg, mask, on_epoch);
  return out;
}

}  // namespace canids::plenet
