#pragma once

// Vector kernels used by every distance-heavy stage (silhouette, k-NN graphs,
// HDBSCAN core distances, DBCV). Each kernel has a scalar reference version
// and, on x86-64, an AVX2/FMA version; the variant is chosen once at runtime
// from CPUID and can be pinned with MORALMAP_ISA=scalar|avx2 or force_isa().
//
// The variants sum in different orders, so results agree to rounding only.

#include <optional>
#include <span>
#include <string_view>

namespace moralmap::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// True when this binary contains the variant and the CPU can run it.
bool isa_available(Isa isa) noexcept;

/// The variant the dispatching entry points currently route to.
Isa active_isa() noexcept;

/// Pins dispatch to `isa` (must be available), or restores auto-detection.
void force_isa(std::optional<Isa> isa);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_euclidean(std::span<const double> a, std::span<const double> b) noexcept;
double manhattan(std::span<const double> a, std::span<const double> b) noexcept;
double squared_norm(std::span<const double> a) noexcept;
/// acc += x
void accumulate(std::span<double> acc, std::span<const double> x) noexcept;

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_euclidean(std::span<const double> a, std::span<const double> b) noexcept;
double manhattan(std::span<const double> a, std::span<const double> b) noexcept;
double squared_norm(std::span<const double> a) noexcept;
void accumulate(std::span<double> acc, std::span<const double> x) noexcept;
}  // namespace scalar

#if defined(MORALMAP_HAVE_AVX2)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_euclidean(std::span<const double> a, std::span<const double> b) noexcept;
double manhattan(std::span<const double> a, std::span<const double> b) noexcept;
double squared_norm(std::span<const double> a) noexcept;
void accumulate(std::span<double> acc, std::span<const double> x) noexcept;
}  // namespace avx2
#endif

}  // namespace moralmap::kernels
