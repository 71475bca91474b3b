#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "moralmap/kernels.hpp"

namespace moralmap::kernels {
namespace {

struct Table {
  double (*dot)(std::span<const double>, std::span<const double>) noexcept;
  double (*squared_euclidean)(std::span<const double>, std::span<const double>) noexcept;
  double (*manhattan)(std::span<const double>, std::span<const double>) noexcept;
  double (*squared_norm)(std::span<const double>) noexcept;
  void (*accumulate)(std::span<double>, std::span<const double>) noexcept;
};

constexpr Table kScalar{scalar::dot, scalar::squared_euclidean, scalar::manhattan,
                        scalar::squared_norm, scalar::accumulate};
#if defined(MORALMAP_HAVE_AVX2)
constexpr Table kAvx2{avx2::dot, avx2::squared_euclidean, avx2::manhattan, avx2::squared_norm,
                      avx2::accumulate};
#endif

const Table& table_for(Isa isa) noexcept {
#if defined(MORALMAP_HAVE_AVX2)
  if (isa == Isa::avx2) return kAvx2;
#endif
  (void)isa;
  return kScalar;
}

Isa detect() noexcept {
  if (const char* env = std::getenv("MORALMAP_ISA")) {
    const std::string_view v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && isa_available(Isa::avx2)) return Isa::avx2;
  }
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

const Table& active() noexcept { return table_for(current().load(std::memory_order_relaxed)); }

}  // namespace

std::string_view isa_name(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(MORALMAP_HAVE_AVX2)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void force_isa(std::optional<Isa> isa) {
  if (!isa) {
    current().store(detect());
    return;
  }
  if (!isa_available(*isa))
    throw std::invalid_argument("kernel variant not available: " + std::string(isa_name(*isa)));
  current().store(*isa);
}

double dot(std::span<const double> a, std::span<const double> b) noexcept { return active().dot(a, b); }
double squared_euclidean(std::span<const double> a, std::span<const double> b) noexcept {
  return active().squared_euclidean(a, b);
}
double manhattan(std::span<const double> a, std::span<const double> b) noexcept {
  return active().manhattan(a, b);
}
double squared_norm(std::span<const double> a) noexcept { return active().squared_norm(a); }
void accumulate(std::span<double> acc, std::span<const double> x) noexcept { active().accumulate(acc, x); }

}  // namespace moralmap::kernels
