#include <cstdlib>
#include <stdexcept>
#include <string>

#include "canids/simd.hpp"

namespace canids::simd {

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(CANIDS_HAVE_AVX2)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(CANIDS_HAVE_NEON)
      return true;  // mandatory on AArch64
#else
      return false;
#endif
  }
  return false;
}

const Kernels& select_kernels() {
  if (const char* forced = std::getenv("CANIDS_SIMD"); forced != nullptr) {
    const std::string name(forced);
    for (Isa isa : supported_isas()) {
      if (isa_name(isa) == name) return kernels_for(isa);
    }
  }
  const auto isas = supported_isas();
  return kernels_for(isas.back());
}

}  // namespace

std::vector<Isa> supported_isas() {
  std::vector<Isa> out{Isa::Scalar};
  if (cpu_supports(Isa::Avx2)) out.push_back(Isa::Avx2);
  if (cpu_supports(Isa::Neon)) out.push_back(Isa::Neon);
  return out;
}

const Kernels& kernels_for(Isa isa) {
  if (!cpu_supports(isa)) throw std::invalid_argument("simd variant not available: " + std::string(isa_name(isa)));
  switch (isa) {
    case Isa::Scalar: return scalar_kernels();
#if defined(CANIDS_HAVE_AVX2)
    case Isa::Avx2: return detail::avx2_kernels();
#endif
#if defined(CANIDS_HAVE_NEON)
    case Isa::Neon: return detail::neon_kernels();
#endif
    default: break;
  }
  throw std::invalid_argument("simd variant not compiled in");
}

const Kernels& active() noexcept {
  static const Kernels& selected = select_kernels();
  return selected;
}

}  // namespace canids::simd
