#pragma once

// Centering and scaling of snapshot matrices, v~ = (v - mean_j) / c_j, with one
// mean and one divisor per variable. Variables occupy contiguous, equally sized
// row blocks (component-major folding puts each component in its own block).

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "modeflow/tensor.hpp"

namespace modeflow {

enum class ScalerKind {
  kNone,
  kRange,   // c_j = max - min
  kAuto,    // c_j = standard deviation
  kPareto,  // c_j = sqrt(standard deviation)
  kMpm,     // max per mode: c = sum over rows (modes) of max |v|, shared by all
};

std::string_view to_string(ScalerKind kind) noexcept;
ScalerKind parse_scaler_kind(std::string_view name);

/// Centering is on by default for range/auto/pareto, off for none/mpm.
bool default_centering(ScalerKind kind) noexcept;

struct ScalerSpec {
  ScalerKind kind = ScalerKind::kNone;
  bool centering = false;
  std::size_t rows_per_variable = 1;
  std::vector<double> means;
  std::vector<double> factors;

  std::size_t variables() const noexcept { return factors.size(); }
};

/// Fit a scaler on `m` split into `variables` equal row blocks. For kMpm every
/// row is its own variable and `variables` must be 0 or m.rows().
/// Standard deviations are population (ddof = 0) over the whole block.
/// Throws NumericalError naming the variable if a divisor would be zero.
ScalerSpec fit_scaler(const Eigen::MatrixXd& m, ScalerKind kind, std::size_t variables, bool centering);
ScalerSpec fit_scaler(const Eigen::MatrixXd& m, ScalerKind kind, std::size_t variables);

Eigen::MatrixXd apply_scaler(const Eigen::MatrixXd& m, const ScalerSpec& s);
Eigen::MatrixXd invert_scaler(const Eigen::MatrixXd& m, const ScalerSpec& s);

inline SnapshotMatrix apply_scaler(const SnapshotMatrix& m, const ScalerSpec& s) { return {apply_scaler(m.data, s), m.dt}; }
inline SnapshotMatrix invert_scaler(const SnapshotMatrix& m, const ScalerSpec& s) { return {invert_scaler(m.data, s), m.dt}; }

}  // namespace modeflow
