#include <doctest.h>

#include <cmath>
#include <vector>

#include "canids/rng.hpp"
#include "canids/simd.hpp"

using namespace canids;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform_real(rng, -2.0, 2.0);
  return v;
}

// Reassociation only: allow a few ulps of the sum of absolute terms.
double bound(const std::vector<double>& a, const std::vector<double>& b, bool diff) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += diff ? (a[i] - b[i]) * (a[i] - b[i]) : std::abs(a[i] * b[i]);
  return 8.0 * 0x1.0p-52 * (s + 1.0) * static_cast<double>(a.size() + 1);
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("reference kernels on hand values") {
    const auto& k = simd::scalar_kernels();
    const double a[] = {1, 2, 3};
    const double b[] = {4, -5, 6};
    CHECK(k.dot(a, b, 3) == 12.0);
    CHECK(k.l2sq(a, b, 3) == 9.0 + 49.0 + 9.0);
    double y[] = {1, 1, 1};
    k.axpy(2.0, a, y, 3);
    CHECK(y[0] == 3.0);
    CHECK(y[2] == 7.0);
    CHECK(k.dot(a, b, 0) == 0.0);
  }

  TEST_CASE("every supported variant matches the reference, including ragged tails") {
    const auto isas = simd::supported_isas();
    REQUIRE(!isas.empty());
    CHECK(isas.front() == simd::Isa::Scalar);
    const auto& ref = simd::scalar_kernels();
    Rng rng(11);
    for (auto isa : isas) {
      const auto& k = simd::kernels_for(isa);
      CAPTURE(simd::isa_name(isa));
      for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 20u, 31u, 500u, 1001u}) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        CHECK(std::abs(k.dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= bound(a, b, false));
        CHECK(std::abs(k.l2sq(a.data(), b.data(), n) - ref.l2sq(a.data(), b.data(), n)) <= bound(a, b, true));
        auto y1 = b, y2 = b;
        k.axpy(0.37, a.data(), y1.data(), n);
        ref.axpy(0.37, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 4e-16 * (std::abs(y2[i]) + 1.0));
      }
    }
  }

  TEST_CASE("active table is one of the supported ones and is stable") {
    const auto& a = simd::active();
    const auto isas = simd::supported_isas();
    CHECK(std::find(isas.begin(), isas.end(), a.isa) != isas.end());
    CHECK(&simd::active() == &a);
  }
}
