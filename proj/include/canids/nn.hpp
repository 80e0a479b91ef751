#pragma once

// Small dependency-free neural-network kernel: valid 1-D convolution,
// max-pooling, dense, ReLU, softmax with categorical cross-entropy, Adam, and
// a central-difference gradient checker. 64-bit floats throughout.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace canids::nn {

/// (length, channels) sequence data stored row-major: data[t * channels + c].
/// Flat data uses channels == 1.
struct Tensor {
  std::size_t length = 0;
  std::size_t channels = 1;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t length, std::size_t channels, double fill = 0.0)
      : length(length), channels(channels), data(length * channels, fill) {}
  Tensor(std::size_t length, std::size_t channels, std::vector<double> values);

  static Tensor flat(std::vector<double> values) {
    const std::size_t n = values.size();
    return Tensor(n, 1, std::move(values));
  }

  std::size_t size() const noexcept { return data.size(); }
  double& at(std::size_t t, std::size_t c) { return data[t * channels + c]; }
  double at(std::size_t t, std::size_t c) const { return data[t * channels + c]; }
  bool operator==(const Tensor&) const = default;
};

struct Conv1D {
  std::size_t filters = 1;
  std::size_t kernel_size = 1;
  std::size_t in_channels = 1;
  bool operator==(const Conv1D&) const = default;
};
struct MaxPool1D {
  std::size_t pool_size = 2;
  std::size_t stride = 2;
  bool operator==(const MaxPool1D&) const = default;
};
struct Flatten {
  bool operator==(const Flatten&) const = default;
};
struct Dense {
  std::size_t in_units = 1;
  std::size_t out_units = 1;
  bool operator==(const Dense&) const = default;
};
struct ReLU {
  bool operator==(const ReLU&) const = default;
};
struct Softmax {
  bool operator==(const Softmax&) const = default;
};

using LayerSpec = std::variant<Conv1D, MaxPool1D, Flatten, Dense, ReLU, Softmax>;

/// Conv1D weights: filters x kernel x in_channels, i.e. w[(f*K + k)*C + c].
/// Dense weights: in x out, i.e. W[i*out + j]. Parameter-free layers hold
/// empty arrays.
struct LayerParams {
  std::vector<double> weights;
  std::vector<double> biases;

  std::size_t count() const noexcept { return weights.size() + biases.size(); }
  bool operator==(const LayerParams&) const = default;
};

/// Conv1D: F*(K*C+1); Dense: in*out+out; 0 otherwise.
std::size_t parameter_count(const LayerSpec& spec);
bool has_parameters(const LayerSpec& spec);
/// Zero-filled params of the right size.
LayerParams zero_params(const LayerSpec& spec);

/// "conv1d:F:K:C", "maxpool1d:P:S", "flatten", "dense:IN:OUT", "relu", "softmax".
std::string describe(const LayerSpec& spec);
LayerSpec parse_layer(std::string_view text);

// --- per-layer operations ------------------------------------------------

Tensor conv1d_forward(const Tensor& input, const LayerParams& params, const Conv1D& spec);

struct ParamGrads {
  Tensor input_grad;
  LayerParams params_grad;
};

ParamGrads conv1d_backward(const Tensor& input, const LayerParams& params, const Conv1D& spec,
                           const Tensor& upstream);

struct PoolResult {
  Tensor output;
  std::vector<std::size_t> argmax;  // flat input index for each output element
};

/// Window 2, stride 2, trailing odd element dropped, ties to the earlier index.
PoolResult maxpool1d_forward(const Tensor& input, const MaxPool1D& spec = {});
Tensor maxpool1d_backward(std::span<const std::size_t> argmax, const Tensor& upstream, std::size_t input_length,
                          std::size_t channels);

Tensor dense_forward(const Tensor& input, const LayerParams& params, const Dense& spec);
ParamGrads dense_backward(const Tensor& input, const LayerParams& params, const Dense& spec, const Tensor& upstream);

Tensor relu(const Tensor& input);
/// upstream where input > 0, else 0.
Tensor relu_backward(const Tensor& input, const Tensor& upstream);

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);
/// -sum y_i ln(max(p_i, 1e-12)). Throws InvalidOneHot unless `onehot` has a
/// single 1 and zeros elsewhere, and LengthMismatch-style ShapeMismatch on
/// size disagreement.
double cross_entropy(std::span<const double> probs, std::span<const double> onehot);
/// Gradient of cross_entropy(softmax(z), y) with respect to z: p - y.
std::vector<double> softmax_cross_entropy_grad(std::span<const double> probs, std::span<const double> onehot);

std::vector<double> one_hot(std::size_t label, std::size_t classes);

// --- networks ----------------------------------------------------------------

struct Shape {
  std::size_t length = 0;
  std::size_t channels = 1;
  bool operator==(const Shape&) const = default;
};

using Gradients = std::vector<LayerParams>;

/// Per-sample activations kept for the backward pass.
struct Trace {
  std::vector<Tensor> activations;                // activations[0] is the input; [i+1] is layer i's output
  std::vector<std::vector<std::size_t>> argmax;   // per layer, pooling only
  std::vector<double> logits;                     // input of the final softmax
};

class Network {
 public:
  Network() = default;
  /// Validates that consecutive layer shapes agree; throws ShapeMismatch.
  Network(Shape input, std::vector<LayerSpec> layers);

  /// Uniform in +-sqrt(6 / (fan_in + fan_out)) per weight array, zero biases.
  void init_glorot(std::uint64_t seed);

  Shape input_shape() const noexcept { return input_; }
  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  const std::vector<Shape>& shapes() const noexcept { return shapes_; }  // output shape per layer
  std::vector<LayerParams>& params() noexcept { return params_; }
  const std::vector<LayerParams>& params() const noexcept { return params_; }
  std::size_t parameter_count() const;
  std::size_t layer_parameter_count(std::size_t layer) const { return params_[layer].count(); }

  Gradients zero_gradients() const;

  /// Output of the last layer (probabilities when it ends in Softmax).
  Tensor forward(const Tensor& input) const;
  void forward(const Tensor& input, Trace& trace) const;

  /// Cross-entropy for one sample; adds scale * dLoss/dParams into `grads`.
  /// The last layer must be Softmax. Throws ShapeMismatch otherwise.
  double accumulate_gradients(const Tensor& input, std::size_t label, Gradients& grads, double scale,
                              Trace& scratch) const;

  /// One descriptor per layer joined by ';', prefixed by "in:L:C".
  std::string descriptor() const;
  static Network from_descriptor(std::string_view text);

  bool operator==(const Network&) const = default;

 private:
  Shape input_;
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;
  std::vector<LayerParams> params_;
};

/// Cross-entropy from logits via log-sum-exp; used where accuracy matters more
/// than matching the clamped probability form.
double cross_entropy_from_logits(std::span<const double> logits, std::size_t label);

// --- optimizer -------------------------------------------------------------

struct AdamHyper {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<LayerParams> m;
  std::vector<LayerParams> v;
  std::uint64_t t = 0;
  AdamHyper hyper;

  static AdamState for_params(const std::vector<LayerParams>& params, AdamHyper hyper = {});
  bool operator==(const AdamState&) const = default;
};

/// One Adam update on every layer whose `trainable` entry is true (all layers
/// when `trainable` is empty). t is incremented before bias correction.
/// Throws ShapeMismatch or NonFiniteGradient; on throw nothing is modified.
void adam_step(std::vector<LayerParams>& params, const Gradients& grads, AdamState& state,
               const std::vector<bool>& trainable = {});

// --- verification ------------------------------------------------------------

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // perturbation crossed a ReLU kink or changed a pooling argmax
};

/// Central differences of the mean batch cross-entropy over every parameter.
/// relative error = |analytic - numeric| / max(|analytic| + |numeric|, 1e-8).
GradCheckResult grad_check(const Network& net, std::span<const Tensor> inputs, std::span<const std::size_t> labels,
                           double h = 1e-5);

}  // namespace canids::nn
