#pragma once

// The P-LeNet classifier: two Conv1D/ReLU/MaxPool stages, a 500-unit dense
// hidden layer and a 2-way softmax over the 16-wide feature vector, plus the
// shared training loop, inference, the mean-embedding domain distance and
// transfer fine-tuning.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "canids/ingest.hpp"
#include "canids/nn.hpp"

namespace canids::plenet {

inline constexpr std::size_t kTotalParameters = 12'052;

/// Input(16,1) -> Conv1D(5,k5) -> ReLU -> MaxPool -> Conv1D(20,k5) -> ReLU ->
/// MaxPool -> Flatten -> Dense(20,500) -> ReLU -> Dense(500,2) -> Softmax.
std::vector<nn::LayerSpec> plenet_layers();

/// Glorot-initialized P-LeNet. Asserts the 30 / 520 / 10,500 / 1,002 split.
nn::Network build_plenet(std::uint64_t seed);

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double lr = 0.001;
  std::size_t patience = 50;  // epochs without validation-accuracy improvement
  std::uint64_t seed = 0;
};

struct EpochStats {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  bool operator==(const EpochStats&) const = default;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;  // index into epochs; max val_acc, earliest on ties
  bool operator==(const TrainHistory&) const = default;
};

using EpochCallback = std::function<void(std::size_t epoch, const EpochStats&)>;

/// Mini-batch Adam on mean categorical cross-entropy with a seeded shuffle per
/// epoch. Validation runs after every epoch; training stops after `patience`
/// epochs without improvement and `model` is left at the best epoch's
/// parameters. Layers whose `trainable` flag is false receive no updates.
/// Train loss/accuracy are accumulated from the forward passes of the epoch.
/// Throws EmptyPartition, ShapeMismatch or NonFiniteLoss.
TrainHistory train(nn::Network& model, const ingest::PreparedDataset& data, const TrainConfig& cfg,
                   const std::vector<bool>& trainable = {}, const EpochCallback& on_epoch = {});

struct Prediction {
  double p_normal = 0.0;
  double p_attack = 0.0;
  std::uint8_t label = 0;  // argmax, exact ties -> Attack
  bool operator==(const Prediction&) const = default;
};

nn::Tensor to_input(const ingest::FeatureVector& fv);

Prediction predict_one(const nn::Network& model, const ingest::FeatureVector& fv);
std::vector<Prediction> predict(const nn::Network& model, std::span<const ingest::FeatureVector> rows);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

Evaluation evaluate(const nn::Network& model, std::span<const ingest::FeatureVector> rows);

/// || mean(source) - mean(target) ||_2 with an identity feature map. Throws
/// EmptyDomain or DimensionMismatch.
double mmd_distance(std::span<const std::vector<double>> source, std::span<const std::vector<double>> target);
double mmd_distance(std::span<const ingest::FeatureVector> source, std::span<const ingest::FeatureVector> target);

enum class FreezeMode { None, ConvFrozen };

struct TransferResult {
  nn::Network model;
  TrainHistory history;
};

/// Copies the source model and continues training on the target data. Under
/// ConvFrozen the two Conv1D layers are excluded from every update.
TransferResult transfer_finetune(const nn::Network& source, const ingest::PreparedDataset& target,
                                 const TrainConfig& cfg, FreezeMode freeze, const EpochCallback& on_epoch = {});

/// Trainable flags for a freeze mode: false for Conv1D layers under ConvFrozen.
std::vector<bool> trainable_mask(const nn::Network& model, FreezeMode freeze);

}  // namespace canids::plenet
