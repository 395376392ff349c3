#pragma once

// Dense double-precision inner-loop kernels used by the neural engine and
// the error metrics. Every kernel has a portable scalar reference and, where
// the host supports it, a vectorised variant (AVX2+FMA on x86-64, NEON on
// AArch64). The variant is chosen once, at first use, from the CPU features;
// the environment variable MODEFLOW_ISA=scalar|avx2|neon overrides it.
//
// Matrices passed to the kernels are dense row-major with `cols` as stride.

#include <cstddef>
#include <span>
#include <string_view>

namespace modeflow::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa) noexcept;

/// True when `isa` can run on this host.
bool isa_supported(Isa isa) noexcept;

/// Currently selected instruction set.
Isa active_isa() noexcept;

/// Force a particular variant (tests and benchmarks). Throws ConfigError when
/// the host cannot run it.
void set_isa(Isa isa);

double dot(std::span<const double> x, std::span<const double> y);

/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

/// sum_i (x_i - y_i)^2
double sum_sq_diff(std::span<const double> x, std::span<const double> y);

/// y += A x, A is rows x cols row-major.
void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y);

/// y += A^T x, A is rows x cols row-major.
void gemv_t(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y);

/// A += alpha * x y^T, A is x.size() x y.size() row-major.
void ger(double alpha, std::span<const double> x, std::span<const double> y,
         std::span<double> a);

/// Function table implemented once per instruction set.
struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*sum_sq_diff)(const double*, const double*, std::size_t);
};

namespace detail {
const KernelTable& scalar_table() noexcept;
const KernelTable* avx2_table() noexcept;  // nullptr when not compiled in
const KernelTable* neon_table() noexcept;  // nullptr when not compiled in
}  // namespace detail

/// Table for a specific ISA (used by equivalence tests).
const KernelTable& table_for(Isa isa);

}  // namespace modeflow::kernels
