#include "canids/nn.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "canids/error.hpp"
#include "canids/rng.hpp"
#include "canids/simd.hpp"

namespace canids::nn {
namespace {

[[noreturn]] void shape_error(const std::string& why) { throw Error(Errc::ShapeMismatch, why); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_params(const LayerParams& params, std::size_t weights, std::size_t biases) {
  if (params.weights.size() != weights || params.biases.size() != biases) shape_error("parameter arrays have wrong size");
}

// Hot-path forms that reuse `out` storage and accumulate gradients.

void conv_forward_into(const Tensor& in, const LayerParams& p, const Conv1D& s, Tensor& out) {
  if (in.channels != s.in_channels) shape_error("conv1d input channels differ from spec");
  if (in.length < s.kernel_size) shape_error("conv1d input shorter than kernel");
  check_params(p, s.filters * s.kernel_size * s.in_channels, s.filters);
  const std::size_t out_len = in.length - s.kernel_size + 1;
  const std::size_t window = s.kernel_size * s.in_channels;
  out.length = out_len;
  out.channels = s.filters;
  out.data.resize(out_len * s.filters);
  const auto& k = simd::active();
  for (std::size_t t = 0; t < out_len; ++t) {
    const double* x = in.data.data() + t * s.in_channels;
    for (std::size_t f = 0; f < s.filters; ++f) {
      out.data[t * s.filters + f] = p.biases[f] + k.dot(p.weights.data() + f * window, x, window);
    }
  }
}

void conv_backward_acc(const Tensor& in, const LayerParams& p, const Conv1D& s, const Tensor& up, LayerParams& acc,
                       Tensor* in_grad) {
  const std::size_t out_len = in.length - s.kernel_size + 1;
  if (up.length != out_len || up.channels != s.filters) shape_error("conv1d upstream gradient shape");
  const std::size_t window = s.kernel_size * s.in_channels;
  if (in_grad != nullptr) {
    in_grad->length = in.length;
    in_grad->channels = in.channels;
    in_grad->data.assign(in.size(), 0.0);
  }
  const auto& k = simd::active();
  for (std::size_t t = 0; t < out_len; ++t) {
    const double* x = in.data.data() + t * s.in_channels;
    for (std::size_t f = 0; f < s.filters; ++f) {
      const double g = up.data[t * s.filters + f];
      if (g == 0.0) continue;
      acc.biases[f] += g;
      k.axpy(g, x, acc.weights.data() + f * window, window);
      if (in_grad != nullptr) k.axpy(g, p.weights.data() + f * window, in_grad->data.data() + t * s.in_channels, window);
    }
  }
}

void dense_forward_into(const Tensor& in, const LayerParams& p, const Dense& s, Tensor& out) {
  if (in.size() != s.in_units) shape_error("dense input size differs from spec");
  check_params(p, s.in_units * s.out_units, s.out_units);
  out.length = s.out_units;
  out.channels = 1;
  out.data.assign(p.biases.begin(), p.biases.end());
  const auto& k = simd::active();
  for (std::size_t i = 0; i < s.in_units; ++i) {
    const double xi = in.data[i];
    if (xi == 0.0) continue;
    k.axpy(xi, p.weights.data() + i * s.out_units, out.data.data(), s.out_units);
  }
}

void dense_backward_acc(const Tensor& in, const LayerParams& p, const Dense& s, const Tensor& up, LayerParams& acc,
                        Tensor* in_grad) {
  if (up.size() != s.out_units) shape_error("dense upstream gradient shape");
  const auto& k = simd::active();
  k.axpy(1.0, up.data.data(), acc.biases.data(), s.out_units);
  for (std::size_t i = 0; i < s.in_units; ++i) {
    const double xi = in.data[i];
    if (xi != 0.0) k.axpy(xi, up.data.data(), acc.weights.data() + i * s.out_units, s.out_units);
  }
  if (in_grad != nullptr) {
    in_grad->length = in.length;
    in_grad->channels = in.channels;
    in_grad->data.resize(in.size());
    for (std::size_t i = 0; i < s.in_units; ++i) {
      in_grad->data[i] = k.dot(p.weights.data() + i * s.out_units, up.data.data(), s.out_units);
    }
  }
}

void pool_forward_into(const Tensor& in, const MaxPool1D& s, Tensor& out, std::vector<std::size_t>& argmax) {
  if (s.pool_size != 2 || s.stride != 2) shape_error("only pool_size = stride = 2 is supported");
  if (in.length < 2) shape_error("maxpool1d input shorter than its window");
  const std::size_t out_len = in.length / 2;
  out.length = out_len;
  out.channels = in.channels;
  out.data.resize(out_len * in.channels);
  argmax.resize(out.data.size());
  for (std::size_t t = 0; t < out_len; ++t) {
    for (std::size_t c = 0; c < in.channels; ++c) {
      const std::size_t a = (2 * t) * in.channels + c;
      const std::size_t b = a + in.channels;
      const std::size_t pick = in.data[b] > in.data[a] ? b : a;
      out.data[t * in.channels + c] = in.data[pick];
      argmax[t * in.channels + c] = pick;
    }
  }
}

void pool_backward_into(std::span<const std::size_t> argmax, const Tensor& up, std::size_t in_len, std::size_t ch,
                        Tensor& out) {
  if (argmax.size() != up.size() || up.channels != ch || up.length != in_len / 2) {
    shape_error("maxpool1d upstream gradient shape");
  }
  out.length = in_len;
  out.channels = ch;
  out.data.assign(in_len * ch, 0.0);
  for (std::size_t i = 0; i < argmax.size(); ++i) {
    if (argmax[i] >= out.data.size()) shape_error("argmax index out of range");
    out.data[argmax[i]] += up.data[i];
  }
}

void relu_into(const Tensor& in, Tensor& out) {
  out.length = in.length;
  out.channels = in.channels;
  out.data.resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = in.data[i] > 0.0 ? in.data[i] : 0.0;
}

std::size_t parse_size(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) shape_error("bad number in layer descriptor: " + std::string(s));
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Shape output_shape(const Shape& in, const LayerSpec& spec) {
  return std::visit(
      Overloaded{
          [&](const Conv1D& s) {
            if (s.filters < 1 || s.kernel_size < 1 || s.in_channels < 1) shape_error("conv1d dimensions must be positive");
            if (in.channels != s.in_channels) shape_error("conv1d channel mismatch");
            if (in.length < s.kernel_size) shape_error("conv1d input shorter than kernel");
            return Shape{in.length - s.kernel_size + 1, s.filters};
          },
          [&](const MaxPool1D& s) {
            if (s.pool_size != 2 || s.stride != 2) shape_error("only pool_size = stride = 2 is supported");
            if (in.length < 2) shape_error("maxpool1d input shorter than window");
            return Shape{in.length / 2, in.channels};
          },
          [&](const Flatten&) { return Shape{in.length * in.channels, 1}; },
          [&](const Dense& s) {
            if (s.in_units < 1 || s.out_units < 1) shape_error("dense dimensions must be positive");
            if (in.length * in.channels != s.in_units) shape_error("dense input size mismatch");
            return Shape{s.out_units, 1};
          },
          [&](const ReLU&) { return in; },
          [&](const Softmax&) { return in; },
      },
      spec);
}

}  // namespace

Tensor::Tensor(std::size_t length, std::size_t channels, std::vector<double> values)
    : length(length), channels(channels), data(std::move(values)) {
  if (data.size() != length * channels) shape_error("tensor data size differs from shape");
}

std::size_t parameter_count(const LayerSpec& spec) {
  if (const auto* c = std::get_if<Conv1D>(&spec)) return c->filters * (c->kernel_size * c->in_channels + 1);
  if (const auto* d = std::get_if<Dense>(&spec)) return d->in_units * d->out_units + d->out_units;
  return 0;
}

bool has_parameters(const LayerSpec& spec) {
  return std::holds_alternative<Conv1D>(spec) || std::holds_alternative<Dense>(spec);
}

LayerParams zero_params(const LayerSpec& spec) {
  LayerParams p;
  if (const auto* c = std::get_if<Conv1D>(&spec)) {
    p.weights.assign(c->filters * c->kernel_size * c->in_channels, 0.0);
    p.biases.assign(c->filters, 0.0);
  } else if (const auto* d = std::get_if<Dense>(&spec)) {
    p.weights.assign(d->in_units * d->out_units, 0.0);
    p.biases.assign(d->out_units, 0.0);
  }
  return p;
}

std::string describe(const LayerSpec& spec) {
  return std::visit(
      Overloaded{
          [](const Conv1D& s) {
            return "conv1d:" + std::to_string(s.filters) + ":" + std::to_string(s.kernel_size) + ":" +
                   std::to_string(s.in_channels);
          },
          [](const MaxPool1D& s) { return "maxpool1d:" + std::to_string(s.pool_size) + ":" + std::to_string(s.stride); },
          [](const Flatten&) { return std::string("flatten"); },
          [](const Dense& s) { return "dense:" + std::to_string(s.in_units) + ":" + std::to_string(s.out_units); },
          [](const ReLU&) { return std::string("relu"); },
          [](const Softmax&) { return std::string("softmax"); },
      },
      spec);
}

LayerSpec parse_layer(std::string_view text) {
  const auto parts = split(text, ':');
  const auto& kind = parts[0];
  if (kind == "conv1d" && parts.size() == 4) return Conv1D{parse_size(parts[1]), parse_size(parts[2]), parse_size(parts[3])};
  if (kind == "maxpool1d" && parts.size() == 3) return MaxPool1D{parse_size(parts[1]), parse_size(parts[2])};
  if (kind == "flatten" && parts.size() == 1) return Flatten{};
  if (kind == "dense" && parts.size() == 3) return Dense{parse_size(parts[1]), parse_size(parts[2])};
  if (kind == "relu" && parts.size() == 1) return ReLU{};
  if (kind == "softmax" && parts.size() == 1) return Softmax{};
  shape_error("unknown layer descriptor: " + std::string(text));
}

Tensor conv1d_forward(const Tensor& input, const LayerParams& params, const Conv1D& spec) {
  Tensor out;
  conv_forward_into(input, params, spec, out);
  return out;
}

ParamGrads conv1d_backward(const Tensor& input, const LayerParams& params, const Conv1D& spec, const Tensor& upstream) {
  if (input.channels != spec.in_channels || input.length < spec.kernel_size) shape_error("conv1d input shape");
  check_params(params, spec.filters * spec.kernel_size * spec.in_channels, spec.filters);
  ParamGrads g;
  g.params_grad = zero_params(spec);
  conv_backward_acc(input, params, spec, upstream, g.params_grad, &g.input_grad);
  return g;
}

PoolResult maxpool1d_forward(const Tensor& input, const MaxPool1D& spec) {
  PoolResult r;
  pool_forward_into(input, spec, r.output, r.argmax);
  return r;
}

Tensor maxpool1d_backward(std::span<const std::size_t> argmax, const Tensor& upstream, std::size_t input_length,
                          std::size_t channels) {
  Tensor out;
  pool_backward_into(argmax, upstream, input_length, channels, out);
  return out;
}

Tensor dense_forward(const Tensor& input, const LayerParams& params, const Dense& spec) {
  Tensor out;
  dense_forward_into(input, params, spec, out);
  return out;
}

ParamGrads dense_backward(const Tensor& input, const LayerParams& params, const Dense& spec, const Tensor& upstream) {
  if (input.size() != spec.in_units) shape_error("dense input size");
  check_params(params, spec.in_units * spec.out_units, spec.out_units);
  ParamGrads g;
  g.params_grad = zero_params(spec);
  dense_backward_acc(input, params, spec, upstream, g.params_grad, &g.input_grad);
  return g;
}

Tensor relu(const Tensor& input) {
  Tensor out;
  relu_into(input, out);
  return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& upstream) {
  if (input.size() != upstream.size()) shape_error("relu upstream gradient shape");
  Tensor out(input.length, input.channels);
  for (std::size_t i = 0; i < input.size(); ++i) out.data[i] = input.data[i] > 0.0 ? upstream.data[i] : 0.0;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) shape_error("softmax of empty vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

namespace {

void check_one_hot(std::span<const double> probs, std::span<const double> onehot) {
  if (probs.size() != onehot.size()) shape_error("prediction and one-hot sizes differ");
  std::size_t ones = 0;
  for (double y : onehot) {
    if (y == 1.0) {
      ++ones;
    } else if (y != 0.0) {
      throw Error(Errc::InvalidOneHot, "one-hot entries must be 0 or 1");
    }
  }
  if (ones != 1) throw Error(Errc::InvalidOneHot, "one-hot vector needs exactly one 1");
}

}  // namespace

double cross_entropy(std::span<const double> probs, std::span<const double> onehot) {
  check_one_hot(probs, onehot);
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (onehot[i] != 0.0) loss -= onehot[i] * std::log(std::max(probs[i], 1e-12));
  }
  return loss;
}

std::vector<double> softmax_cross_entropy_grad(std::span<const double> probs, std::span<const double> onehot) {
  check_one_hot(probs, onehot);
  std::vector<double> g(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) g[i] = probs[i] - onehot[i];
  return g;
}

std::vector<double> one_hot(std::size_t label, std::size_t classes) {
  if (label >= classes) throw Error(Errc::InvalidOneHot, "label outside class range");
  std::vector<double> v(classes, 0.0);
  v[label] = 1.0;
  return v;
}

double cross_entropy_from_logits(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) throw Error(Errc::InvalidOneHot, "label outside class range");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  return mx + std::log(sum) - logits[label];
}

// --- Network ---------------------------------------------------------------

Network::Network(Shape input, std::vector<LayerSpec> layers) : input_(input), layers_(std::move(layers)) {
  if (input_.length == 0 || input_.channels == 0) shape_error("input shape must be non-empty");
  Shape cur = input_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (std::holds_alternative<Softmax>(layers_[i]) && i + 1 != layers_.size()) shape_error("softmax must be last");
    cur = output_shape(cur, layers_[i]);
    shapes_.push_back(cur);
    params_.push_back(zero_params(layers_[i]));
  }
}

void Network::init_glorot(std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    double fan_in = 0.0, fan_out = 0.0;
    if (const auto* c = std::get_if<Conv1D>(&layers_[i])) {
      fan_in = static_cast<double>(c->kernel_size * c->in_channels);
      fan_out = static_cast<double>(c->kernel_size * c->filters);
    } else if (const auto* d = std::get_if<Dense>(&layers_[i])) {
      fan_in = static_cast<double>(d->in_units);
      fan_out = static_cast<double>(d->out_units);
    } else {
      continue;
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& w : params_[i].weights) w = uniform_real(rng, -limit, limit);
    std::fill(params_[i].biases.begin(), params_[i].biases.end(), 0.0);
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.count();
  return n;
}

Gradients Network::zero_gradients() const {
  Gradients g;
  g.reserve(layers_.size());
  for (const auto& l : layers_) g.push_back(zero_params(l));
  return g;
}

void Network::forward(const Tensor& input, Trace& trace) const {
  if (input.length != input_.length || input.channels != input_.channels) shape_error("network input shape");
  trace.activations.resize(layers_.size() + 1);
  trace.argmax.resize(layers_.size());
  trace.activations[0] = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Tensor& in = trace.activations[i];
    Tensor& out = trace.activations[i + 1];
    std::visit(Overloaded{
                   [&](const Conv1D& s) { conv_forward_into(in, params_[i], s, out); },
                   [&](const MaxPool1D& s) { pool_forward_into(in, s, out, trace.argmax[i]); },
                   [&](const Flatten&) {
                     out.length = in.size();
                     out.channels = 1;
                     out.data = in.data;
                   },
                   [&](const Dense& s) { dense_forward_into(in, params_[i], s, out); },
                   [&](const ReLU&) { relu_into(in, out); },
                   [&](const Softmax&) {
                     trace.logits = in.data;
                     out.length = in.length;
                     out.channels = in.channels;
                     out.data = softmax(in.data);
                   },
               },
               layers_[i]);
  }
}

Tensor Network::forward(const Tensor& input) const {
  Trace trace;
  forward(input, trace);
  return std::move(trace.activations.back());
}

double Network::accumulate_gradients(const Tensor& input, std::size_t label, Gradients& grads, double scale,
                                     Trace& trace) const {
  if (layers_.empty() || !std::holds_alternative<Softmax>(layers_.back())) shape_error("network must end in softmax");
  if (grads.size() != layers_.size()) shape_error("gradient buffer does not match network");
  forward(input, trace);
  const auto& probs = trace.activations.back().data;
  if (label >= probs.size()) throw Error(Errc::InvalidOneHot, "label outside class range");
  const double loss = -std::log(std::max(probs[label], 1e-12));

  Tensor delta(probs.size(), 1);
  for (std::size_t j = 0; j < probs.size(); ++j) delta.data[j] = scale * (probs[j] - (j == label ? 1.0 : 0.0));
  Tensor next;
  for (std::size_t i = layers_.size() - 1; i-- > 0;) {
    const Tensor& in = trace.activations[i];
    Tensor* in_grad = i == 0 ? nullptr : &next;
    std::visit(Overloaded{
                   [&](const Conv1D& s) { conv_backward_acc(in, params_[i], s, delta, grads[i], in_grad); },
                   [&](const MaxPool1D&) {
                     if (in_grad) pool_backward_into(trace.argmax[i], delta, in.length, in.channels, next);
                   },
                   [&](const Flatten&) {
                     if (in_grad) next = Tensor(in.length, in.channels, delta.data);
                   },
                   [&](const Dense& s) { dense_backward_acc(in, params_[i], s, delta, grads[i], in_grad); },
                   [&](const ReLU&) {
                     if (in_grad) {
                       next.length = in.length;
                       next.channels = in.channels;
                       next.data.resize(in.size());
                       for (std::size_t k = 0; k < in.size(); ++k) next.data[k] = in.data[k] > 0.0 ? delta.data[k] : 0.0;
                     }
                   },
                   [&](const Softmax&) { shape_error("softmax must be last"); },
               },
               layers_[i]);
    if (i == 0) break;
    std::swap(delta, next);
  }
  return loss;
}

std::string Network::descriptor() const {
  std::string out = "in:" + std::to_string(input_.length) + ":" + std::to_string(input_.channels);
  for (const auto& l : layers_) out += ";" + describe(l);
  return out;
}

Network Network::from_descriptor(std::string_view text) {
  const auto parts = split(text, ';');
  const auto head = split(parts[0], ':');
  if (head.size() != 3 || head[0] != "in") shape_error("descriptor must start with in:L:C");
  std::vector<LayerSpec> layers;
  for (std::size_t i = 1; i < parts.size(); ++i) layers.push_back(parse_layer(parts[i]));
  return Network(Shape{parse_size(head[1]), parse_size(head[2])}, std::move(layers));
}

// --- Adam --------------------------------------------------------------------

AdamState AdamState::for_params(const std::vector<LayerParams>& params, AdamHyper hyper) {
  AdamState s;
  s.hyper = hyper;
  for (const auto& p : params) {
    s.m.push_back(LayerParams{std::vector<double>(p.weights.size(), 0.0), std::vector<double>(p.biases.size(), 0.0)});
  }
  s.v = s.m;
  return s;
}

void adam_step(std::vector<LayerParams>& params, const Gradients& grads, AdamState& state,
               const std::vector<bool>& trainable) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size() ||
      (!trainable.empty() && trainable.size() != params.size())) {
    shape_error("adam: layer counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    for (const LayerParams* other : std::array<const LayerParams*, 3>{&grads[i], &state.m[i], &state.v[i]}) {
      if (other->weights.size() != p.weights.size() || other->biases.size() != p.biases.size()) {
        shape_error("adam: arrays are not congruent");
      }
    }
    if (!trainable.empty() && !trainable[i]) continue;
    for (const auto* arr : {&grads[i].weights, &grads[i].biases}) {
      for (double g : *arr) {
        if (!std::isfinite(g)) throw Error(Errc::NonFiniteGradient, "gradient contains NaN or Inf");
      }
    }
  }

  const auto& h = state.hyper;
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  auto update = [&](std::vector<double>& theta, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m[k] = h.beta1 * m[k] + (1.0 - h.beta1) * g[k];
      v[k] = h.beta2 * v[k] + (1.0 - h.beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      theta[k] -= h.lr * m_hat / (std::sqrt(v_hat) + h.epsilon);
    }
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!trainable.empty() && !trainable[i]) continue;
    update(params[i].weights, grads[i].weights, state.m[i].weights, state.v[i].weights);
    update(params[i].biases, grads[i].biases, state.m[i].biases, state.v[i].biases);
  }
}

// --- gradient check ------------------------------------------------------------

namespace {

// The finite-difference side re-evaluates the loss with a plain
// extended-precision forward pass that shares no code with the analytic path.
// In double precision the rounding of a loss near ln 2 alone is ~1e-16, which
// after dividing by 2h swamps gradients of order 1e-9.
using Wide = long double;

struct WideEval {
  Wide loss = 0.0L;
  std::vector<std::size_t> pattern;  // ReLU on/off bits and pooling argmaxes
};

void wide_forward(const Network& net, const Tensor& input, std::size_t label, WideEval& e) {
  std::vector<Wide> x(input.data.begin(), input.data.end());
  std::size_t length = input.length, channels = input.channels;
  std::vector<Wide> y;
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const auto& p = net.params()[i];
    const auto& spec = net.layers()[i];
    if (const auto* c = std::get_if<Conv1D>(&spec)) {
      const std::size_t out_len = length - c->kernel_size + 1;
      y.assign(out_len * c->filters, 0.0L);
      for (std::size_t t = 0; t < out_len; ++t)
        for (std::size_t f = 0; f < c->filters; ++f) {
          Wide acc = p.biases[f];
          for (std::size_t k = 0; k < c->kernel_size; ++k)
            for (std::size_t ch = 0; ch < channels; ++ch)
              acc += static_cast<Wide>(p.weights[(f * c->kernel_size + k) * channels + ch]) * x[(t + k) * channels + ch];
          y[t * c->filters + f] = acc;
        }
      length = out_len;
      channels = c->filters;
    } else if (const auto* mp = std::get_if<MaxPool1D>(&spec)) {
      const std::size_t out_len = (length - mp->pool_size) / mp->stride + 1;
      y.assign(out_len * channels, 0.0L);
      for (std::size_t t = 0; t < out_len; ++t)
        for (std::size_t ch = 0; ch < channels; ++ch) {
          std::size_t best = t * mp->stride * channels + ch;
          for (std::size_t k = 1; k < mp->pool_size; ++k) {
            const std::size_t idx = (t * mp->stride + k) * channels + ch;
            if (x[idx] > x[best]) best = idx;
          }
          y[t * channels + ch] = x[best];
          e.pattern.push_back(best);
        }
      length = out_len;
    } else if (std::holds_alternative<Flatten>(spec)) {
      length *= channels;
      channels = 1;
      continue;
    } else if (const auto* d = std::get_if<Dense>(&spec)) {
      y.assign(p.biases.begin(), p.biases.end());
      for (std::size_t in = 0; in < d->in_units; ++in) {
        const double* row = p.weights.data() + in * d->out_units;
        for (std::size_t j = 0; j < d->out_units; ++j) y[j] += row[j] * x[in];
      }
      length = d->out_units;
      channels = 1;
    } else if (std::holds_alternative<ReLU>(spec)) {
      y = x;
      for (auto& v : y) {
        e.pattern.push_back(v > 0.0L ? 1 : 0);
        if (v < 0.0L) v = 0.0L;
      }
    } else {
      // Softmax: cross-entropy straight from the logits via log-sum-exp.
      const Wide m = *std::max_element(x.begin(), x.end());
      Wide sum = 0.0L;
      for (Wide v : x) sum += std::exp(v - m);
      e.loss += m + std::log(sum) - x[label];
      return;
    }
    x.swap(y);
  }
}

WideEval evaluate_batch(const Network& net, std::span<const Tensor> inputs, std::span<const std::size_t> labels) {
  WideEval e;
  for (std::size_t b = 0; b < inputs.size(); ++b) wide_forward(net, inputs[b], labels[b], e);
  e.loss /= static_cast<Wide>(inputs.size());
  return e;
}

}  // namespace

GradCheckResult grad_check(const Network& net, std::span<const Tensor> inputs, std::span<const std::size_t> labels,
                           double h) {
  if (inputs.size() != labels.size() || inputs.empty()) shape_error("grad_check needs one label per input");
  Trace trace;
  Gradients analytic = net.zero_gradients();
  const double scale = 1.0 / static_cast<double>(inputs.size());
  for (std::size_t b = 0; b < inputs.size(); ++b) net.accumulate_gradients(inputs[b], labels[b], analytic, scale, trace);
  const auto base = evaluate_batch(net, inputs, labels);

  GradCheckResult result;
  Network probe = net;
  for (std::size_t layer = 0; layer < probe.params().size(); ++layer) {
    for (int which = 0; which < 2; ++which) {
      auto& arr = which == 0 ? probe.params()[layer].weights : probe.params()[layer].biases;
      const auto& ga = which == 0 ? analytic[layer].weights : analytic[layer].biases;
      for (std::size_t k = 0; k < arr.size(); ++k) {
        const double saved = arr[k];
        arr[k] = saved + h;
        const auto plus = evaluate_batch(probe, inputs, labels);
        arr[k] = saved - h;
        const auto minus = evaluate_batch(probe, inputs, labels);
        arr[k] = saved;
        if (plus.pattern != base.pattern || minus.pattern != base.pattern) {
          ++result.skipped;
          continue;
        }
        const double numeric = static_cast<double>((plus.loss - minus.loss) / (2.0L * h));
        const double rel = std::abs(ga[k] - numeric) / std::max(std::abs(ga[k]) + std::abs(numeric), 1e-8);
        result.max_rel_error = std::max(result.max_rel_error, rel);
        ++result.checked;
      }
    }
  }
  return result;
}

}  // namespace canids::nn
