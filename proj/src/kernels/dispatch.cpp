#include <atomic>
#include <cstdlib>
#include <string>

#include "modeflow/error.hpp"
#include "modeflow/kernels.hpp"

namespace modeflow::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() noexcept {
  if (const char* env = std::getenv("MODEFLOW_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && isa_supported(Isa::kAvx2)) return Isa::kAvx2;
    if (want == "neon" && isa_supported(Isa::kNeon)) return Isa::kNeon;
  }
  if (isa_supported(Isa::kAvx2)) return Isa::kAvx2;
  if (isa_supported(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

struct State {
  std::atomic<Isa> isa;
  std::atomic<const KernelTable*> table;
  State() : isa(detect()), table(&table_for(isa.load())) {}
};

State& state() {
  static State s;
  return s;
}

const KernelTable& active() { return *state().table.load(std::memory_order_relaxed); }

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2: return detail::avx2_table() != nullptr && cpu_has_avx2();
    case Isa::kNeon: return detail::neon_table() != nullptr;
  }
  return false;
}

Isa active_isa() noexcept { return state().isa.load(); }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw ConfigError("instruction set '" + std::string(isa_name(isa)) + "' is not available on this host");
  }
  state().table.store(&table_for(isa));
  state().isa.store(isa);
}

const KernelTable& table_for(Isa isa) {
  switch (isa) {
    case Isa::kAvx2:
      if (auto* t = detail::avx2_table(); t && cpu_has_avx2()) return *t;
      break;
    case Isa::kNeon:
      if (auto* t = detail::neon_table()) return *t;
      break;
    case Isa::kScalar:
      return detail::scalar_table();
  }
  throw ConfigError("instruction set '" + std::string(isa_name(isa)) + "' is not available on this host");
}

double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}

double sum_sq_diff(std::span<const double> x, std::span<const double> y) {
  return active().sum_sq_diff(x.data(), y.data(), x.size());
}

void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y) {
  const auto& t = active();
  for (std::size_t r = 0; r < rows; ++r) y[r] += t.dot(a.data() + r * cols, x.data(), cols);
}

void gemv_t(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) {
  const auto& t = active();
  for (std::size_t r = 0; r < rows; ++r) {
    if (x[r] != 0.0) t.axpy(x[r], a.data() + r * cols, y.data(), cols);
  }
}

void ger(double alpha, std::span<const double> x, std::span<const double> y,
         std::span<double> a) {
  const auto& t = active();
  const std::size_t cols = y.size();
  for (std::size_t r = 0; r < x.size(); ++r) {
    const double s = alpha * x[r];
    if (s != 0.0) t.axpy(s, y.data(), a.data() + r * cols, cols);
  }
}

}  // namespace modeflow::kernels
