#pragma once

// Data-parallel inner loops shared by the network layers and the KNN
// baseline. Each kernel has a scalar reference implementation and, where the
// build target allows, an AVX2 (x86-64) or NEON (AArch64) variant. The
// variant is picked once at first use from what the CPU supports; setting
// CANIDS_SIMD=scalar in the environment forces the reference path.
//
// Vector variants reassociate sums, so they agree with the reference to a few
// ulps rather than bit-for-bit. Results are bit-reproducible for a fixed
// kernel selection.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace canids::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;

struct Kernels {
  Isa isa;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// sum_i (a[i] - b[i])^2
  double (*l2sq)(const double* a, const double* b, std::size_t n);
};

const Kernels& scalar_kernels() noexcept;

/// Variants compiled into this binary and supported by the running CPU,
/// reference first.
std::vector<Isa> supported_isas();

/// Kernel table for one ISA; throws std::invalid_argument if unsupported.
const Kernels& kernels_for(Isa isa);

/// The table used by the library.
const Kernels& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double l2sq(std::span<const double> a, std::span<const double> b) {
  return active().l2sq(a.data(), b.data(), a.size());
}

namespace detail {
#if defined(CANIDS_HAVE_AVX2)
const Kernels& avx2_kernels() noexcept;
#endif
#if defined(CANIDS_HAVE_NEON)
const Kernels& neon_kernels() noexcept;
#endif
}  // namespace detail

}  // namespace canids::simd
