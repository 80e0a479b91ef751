#include <doctest.h>

#include <cmath>
#include <functional>

#include "canids/error.hpp"
#include "canids/nn.hpp"
#include "canids/rng.hpp"

using namespace canids;
using namespace canids::nn;

namespace {

template <typename Fn>
Errc code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::IoFailure;
}

void fill(std::vector<double>& v, Rng& rng, double scale = 1.0) {
  for (auto& x : v) x = uniform_real(rng, -scale, scale);
}

Tensor random_tensor(std::size_t l, std::size_t c, Rng& rng) {
  Tensor t(l, c);
  fill(t.data, rng);
  return t;
}

// Scalar objective sum(w .* f(x)) with fixed random weights w, so the upstream
// gradient is w.
struct Probe {
  std::vector<double> w;
  double operator()(const Tensor& out) const {
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += w[i] * out.data[i];
    return s;
  }
};

double rel_err(double a, double n) { return std::abs(a - n) / std::max(std::abs(a) + std::abs(n), 1e-8); }

double central(std::vector<double>& v, std::size_t k, const std::function<double()>& f, double h = 1e-5) {
  const double saved = v[k];
  v[k] = saved + h;
  const double plus = f();
  v[k] = saved - h;
  const double minus = f();
  v[k] = saved;
  return (plus - minus) / (2.0 * h);
}

}  // namespace

TEST_SUITE("nn") {
  TEST_CASE("conv1d forward examples") {
    const Conv1D spec{5, 5, 1};
    Rng rng(1);
    LayerParams p = zero_params(spec);
    CHECK(p.count() == 30);
    CHECK(conv1d_forward(random_tensor(16, 1, rng), p, spec).length == 12);
    CHECK(conv1d_forward(random_tensor(16, 1, rng), p, spec).channels == 5);

    const Conv1D one{1, 5, 1};
    LayerParams ones{std::vector<double>(5, 1.0), {0.0}};
    const auto out = conv1d_forward(Tensor(8, 1, 1.0), ones, one);
    for (double v : out.data) CHECK(v == 5.0);

    fill(p.biases, rng);
    fill(p.weights, rng);
    const auto zero_out = conv1d_forward(Tensor(16, 1, 0.0), p, spec);
    for (std::size_t t = 0; t < 12; ++t)
      for (std::size_t f = 0; f < 5; ++f) CHECK(zero_out.at(t, f) == p.biases[f]);

    CHECK(code_of([&] { conv1d_forward(Tensor(4, 1), p, spec); }) == Errc::ShapeMismatch);
    CHECK(code_of([&] { conv1d_forward(Tensor(16, 2), p, spec); }) == Errc::ShapeMismatch);
  }

  TEST_CASE("conv1d backward examples and finite differences") {
    const Conv1D spec{3, 4, 2};
    Rng rng(2);
    LayerParams p = zero_params(spec);
    fill(p.weights, rng);
    fill(p.biases, rng);
    Tensor x = random_tensor(9, 2, rng);

    const auto zero = conv1d_backward(x, p, spec, Tensor(6, 3, 0.0));
    for (double v : zero.input_grad.data) CHECK(v == 0.0);
    for (double v : zero.params_grad.weights) CHECK(v == 0.0);

    Tensor single(6, 3, 0.0);
    single.at(2, 1) = 1.0;
    const auto g1 = conv1d_backward(x, p, spec, single);
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t c = 0; c < 2; ++c) CHECK(g1.params_grad.weights[(1 * 4 + k) * 2 + c] == x.at(2 + k, c));
    CHECK(g1.params_grad.biases[1] == 1.0);

    Probe probe{std::vector<double>(18)};
    fill(probe.w, rng);
    Tensor up(6, 3);
    up.data = probe.w;
    const auto g = conv1d_backward(x, p, spec, up);
    const auto f = [&] { return probe(conv1d_forward(x, p, spec)); };
    for (std::size_t k = 0; k < p.weights.size(); ++k) CHECK(rel_err(g.params_grad.weights[k], central(p.weights, k, f)) < 1e-6);
    for (std::size_t k = 0; k < p.biases.size(); ++k) CHECK(rel_err(g.params_grad.biases[k], central(p.biases, k, f)) < 1e-6);
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(rel_err(g.input_grad.data[k], central(x.data, k, f)) < 1e-6);
    double bias_sum = 0.0;
    for (std::size_t t = 0; t < 6; ++t) bias_sum += up.at(t, 0);
    CHECK(g.params_grad.biases[0] == doctest::Approx(bias_sum).epsilon(1e-14));
  }

  TEST_CASE("maxpool examples") {
    const auto r = maxpool1d_forward(Tensor(4, 1, std::vector<double>{1, 3, 2, 8}));
    CHECK(r.output.data == std::vector<double>{3, 8});
    CHECK(maxpool1d_forward(Tensor(7, 1, 0.5)).output.length == 3);
    const auto tie = maxpool1d_forward(Tensor(2, 1, std::vector<double>{5, 5}));
    CHECK(tie.output.data[0] == 5.0);
    CHECK(tie.argmax[0] == 0);
    const auto back = maxpool1d_backward(r.argmax, Tensor(2, 1, 1.0), 4, 1);
    CHECK(back.data == std::vector<double>{0, 1, 0, 1});
    const auto odd = maxpool1d_forward(Tensor(5, 1, std::vector<double>{1, 2, 3, 4, 9}));
    CHECK(maxpool1d_backward(odd.argmax, Tensor(2, 1, 1.0), 5, 1).data[4] == 0.0);
    CHECK(code_of([] { maxpool1d_forward(Tensor(1, 1)); }) == Errc::ShapeMismatch);
  }

  TEST_CASE("maxpool finite differences away from ties") {
    Rng rng(3);
    Tensor x = random_tensor(11, 3, rng);
    const auto r = maxpool1d_forward(x);
    Probe probe{std::vector<double>(r.output.size())};
    fill(probe.w, rng);
    Tensor up(r.output.length, 3);
    up.data = probe.w;
    const auto g = maxpool1d_backward(r.argmax, up, 11, 3);
    const auto f = [&] { return probe(maxpool1d_forward(x).output); };
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(rel_err(g.data[k], central(x.data, k, f)) < 1e-6);
  }

  TEST_CASE("dense forward, backward and parameter count") {
    const Dense id{3, 3};
    LayerParams p{{1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0}};
    const auto x = Tensor::flat({0.5, -2.0, 3.0});
    CHECK(dense_forward(x, p, id).data == x.data);
    CHECK(parameter_count(Dense{20, 500}) == 10'500);

    Rng rng(4);
    const Dense spec{7, 4};
    LayerParams q = zero_params(spec);
    fill(q.weights, rng);
    fill(q.biases, rng);
    Tensor in = random_tensor(7, 1, rng);
    Probe probe{std::vector<double>(4)};
    fill(probe.w, rng);
    const auto g = dense_backward(in, q, spec, Tensor::flat(probe.w));
    const auto f = [&] { return probe(dense_forward(in, q, spec)); };
    for (std::size_t k = 0; k < q.weights.size(); ++k) CHECK(rel_err(g.params_grad.weights[k], central(q.weights, k, f)) < 1e-6);
    for (std::size_t k = 0; k < q.biases.size(); ++k) CHECK(rel_err(g.params_grad.biases[k], central(q.biases, k, f)) < 1e-6);
    for (std::size_t k = 0; k < in.size(); ++k) CHECK(rel_err(g.input_grad.data[k], central(in.data, k, f)) < 1e-6);
    CHECK(code_of([&] { dense_forward(Tensor::flat({1.0}), q, spec); }) == Errc::ShapeMismatch);
  }

  TEST_CASE("relu, softmax and cross-entropy") {
    const auto x = Tensor::flat({-1.0, 0.0, 2.0});
    CHECK(relu(x).data == std::vector<double>{0, 0, 2});
    CHECK(relu_backward(x, Tensor::flat({5, 5, 5})).data == std::vector<double>{0, 0, 5});

    for (double c : {-1000.0, 0.0, 3.0, 1e6}) {
      const std::vector<double> z{c, c};
      const auto p = softmax(z);
      CHECK(p[0] == 0.5);
      CHECK(p[1] == 0.5);
    }
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
      std::vector<double> z(2 + uniform_below(rng, 6));
      fill(z, rng, 30.0);
      const auto p = softmax(z);
      double s = 0.0;
      for (double v : p) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
    const std::vector<double> y{1, 0};
    CHECK(cross_entropy(std::vector<double>{1, 0}, y) == 0.0);
    CHECK(cross_entropy(std::vector<double>{0.5, 0.5}, y) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(cross_entropy(std::vector<double>{0, 1}, y) == doctest::Approx(-std::log(1e-12)));
    CHECK(code_of([] { cross_entropy(std::vector<double>{0.5, 0.5}, std::vector<double>{1, 1}); }) ==
          Errc::InvalidOneHot);
    CHECK(code_of([] { cross_entropy(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.5}); }) ==
          Errc::InvalidOneHot);

    std::vector<double> z{0.3, -1.2, 0.8};
    const auto onehot = one_hot(2, 3);
    const auto g = softmax_cross_entropy_grad(softmax(z), onehot);
    const auto f = [&] { return cross_entropy(softmax(z), onehot); };
    for (std::size_t k = 0; k < z.size(); ++k) CHECK(rel_err(g[k], central(z, k, f)) < 1e-6);
  }

  TEST_CASE("network construction and descriptors") {
    CHECK(code_of([] { Network({16, 1}, {Dense{5, 2}, Softmax{}}); }) == Errc::ShapeMismatch);
    CHECK(code_of([] { Network({4, 1}, {Softmax{}, Dense{4, 2}}); }) == Errc::ShapeMismatch);
    Network net({16, 1}, {Conv1D{2, 3, 1}, ReLU{}, MaxPool1D{}, Flatten{}, Dense{14, 2}, Softmax{}});
    net.init_glorot(3);
    const auto back = Network::from_descriptor(net.descriptor());
    CHECK(back.descriptor() == net.descriptor());
    CHECK(back.shapes() == net.shapes());
    Network same({16, 1}, net.layers());
    same.init_glorot(3);
    CHECK(same == net);
    const double limit = std::sqrt(6.0 / (3.0 + 2.0 * 3.0));
    for (double w : net.params()[0].weights) CHECK(std::abs(w) <= limit);
    for (double b : net.params()[4].biases) CHECK(b == 0.0);

    Rng rng(6);
    const auto x = random_tensor(16, 1, rng);
    CHECK(net.forward(x) == net.forward(x));
  }

  TEST_CASE("adam examples") {
    std::vector<LayerParams> params{{{0.5, -0.25}, {1.0}}};
    const auto original = params;
    auto state = AdamState::for_params(params);
    adam_step(params, Gradients{{{0.0, 0.0}, {0.0}}}, state);
    CHECK(params == original);

    params = original;
    state = AdamState::for_params(params);
    adam_step(params, Gradients{{{1.0, 1.0}, {1.0}}}, state);
    CHECK(params[0].weights[0] - 0.5 == doctest::Approx(-0.001).epsilon(1e-6));
    CHECK(state.t == 1);

    // Two-step scalar recurrence with constant g.
    const double g = 0.3, b1 = 0.9, b2 = 0.999, lr = 0.001, eps = 1e-8;
    double theta = 0.5, m = 0.0, v = 0.0;
    for (int t = 1; t <= 2; ++t) {
      m = b1 * m + (1.0 - b1) * g;
      v = b2 * v + (1.0 - b2) * g * g;
      theta -= lr * (m / (1.0 - std::pow(b1, t))) / (std::sqrt(v / (1.0 - std::pow(b2, t))) + eps);
    }
    std::vector<LayerParams> one{{{0.5}, {}}};
    auto s1 = AdamState::for_params(one);
    adam_step(one, Gradients{{{g}, {}}}, s1);
    adam_step(one, Gradients{{{g}, {}}}, s1);
    CHECK(std::abs(one[0].weights[0] - theta) <= 1e-15);

    std::vector<LayerParams> frozen = original;
    auto s0 = AdamState::for_params(frozen, {0.0});
    for (int i = 0; i < 5; ++i) adam_step(frozen, Gradients{{{0.7, -3.0}, {2.0}}}, s0);
    CHECK(frozen == original);

    auto s2 = AdamState::for_params(params);
    const auto before = params;
    CHECK(code_of([&] { adam_step(params, Gradients{{{NAN, 0.0}, {0.0}}}, s2); }) == Errc::NonFiniteGradient);
    CHECK(params == before);
    CHECK(s2.t == 0);
    CHECK(code_of([&] { adam_step(params, Gradients{{{1.0}, {0.0}}}, s2); }) == Errc::ShapeMismatch);

    std::vector<LayerParams> two{{{1.0}, {}}, {{1.0}, {}}};
    auto s3 = AdamState::for_params(two);
    adam_step(two, Gradients{{{1.0}, {}}, {{1.0}, {}}}, s3, {false, true});
    CHECK(two[0].weights[0] == 1.0);
    CHECK(two[1].weights[0] < 1.0);
  }

  TEST_CASE("grad_check on small networks") {
    Rng rng(7);
    std::vector<Tensor> inputs;
    std::vector<std::size_t> labels;
    for (int i = 0; i < 4; ++i) {
      inputs.push_back(random_tensor(6, 1, rng));
      labels.push_back(static_cast<std::size_t>(i % 2));
    }
    Network dense({6, 1}, {Flatten{}, Dense{6, 5}, Dense{5, 3}, Softmax{}});
    dense.init_glorot(1);
    const auto r = grad_check(dense, inputs, labels);
    CHECK(r.checked == dense.parameter_count());
    CHECK(r.skipped == 0);
    CHECK(r.max_rel_error < 1e-7);

    Network conv({6, 1}, {Conv1D{3, 2, 1}, ReLU{}, MaxPool1D{}, Flatten{}, Dense{6, 2}, Softmax{}});
    conv.init_glorot(2);
    const auto rc = grad_check(conv, inputs, labels);
    CHECK(rc.checked + rc.skipped == conv.parameter_count());
    CHECK(rc.max_rel_error < 1e-5);
  }

  TEST_CASE("grad_check excludes parameters whose perturbation crosses a ReLU kink") {
    // One hidden unit with pre-activation exactly 0 for the only input.
    Network net({1, 1}, {Dense{1, 1}, ReLU{}, Dense{1, 2}, Softmax{}});
    net.params()[0] = {{1.0}, {0.0}};
    net.params()[2] = {{0.5, -0.5}, {0.0, 0.0}};
    const std::vector<Tensor> inputs{Tensor::flat({0.0})};
    const std::vector<std::size_t> labels{0};
    const auto r = grad_check(net, inputs, labels);
    CHECK(r.skipped >= 1);
    CHECK(r.max_rel_error < 1e-7);
  }
}
