#include <atomic>
#include <cstdlib>
#include <string>

#include "punchdet/error.hpp"
#include "punchdet/simd/kernels.hpp"

namespace punchdet::simd {

namespace {

constexpr int kAuto = -1;
std::atomic<int> g_forced{kAuto};

Isa detect_best() noexcept {
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2")) return Isa::avx2;
#elif defined(__aarch64__)
  return Isa::neon;
#endif
  return Isa::scalar;
}

Isa from_environment() noexcept {
  const Isa best = detect_best();
  const char* env = std::getenv("PUNCHDET_SIMD");
  if (env == nullptr) return best;
  const std::string want(env);
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
    if (want == to_string(isa) && isa_available(isa)) return isa;
  }
  return best;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "scalar";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() noexcept {
  const int forced = g_forced.load(std::memory_order_relaxed);
  if (forced != kAuto) return static_cast<Isa>(forced);
  static const Isa chosen = from_environment();
  return chosen;
}

void force_isa(std::optional<Isa> isa) {
  if (!isa) {
    g_forced.store(kAuto);
    return;
  }
  if (!isa_available(*isa)) {
    throw Error(ErrorCode::invalid_argument,
                "SIMD variant not available: " + std::string(to_string(*isa)));
  }
  g_forced.store(static_cast<int>(*isa));
}

void overlap_row(const BoundingBox& pivot, ColumnsView others, Overlap kind,
                 std::span<double> out) noexcept {
  switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::avx2:
      overlap_row_avx2(pivot, others, kind, out);
      return;
#endif
#if defined(__aarch64__)
    case Isa::neon:
      overlap_row_neon(pivot, others, kind, out);
      return;
#endif
    default:
      overlap_row_scalar(pivot, others, kind, out);
      return;
  }
}

}  // namespace punchdet::simd
