#pragma once

// Gappy SVD/HOSVD repair and iterative SVD/HOSVD super-resolution.

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "modeflow/tensor.hpp"

namespace modeflow {

enum class InitFill { kZero, kMean, kLinearInterp };

std::string_view to_string(InitFill f) noexcept;
InitFill parse_init_fill(std::string_view name);

struct GappyConfig {
  InitFill init_fill = InitFill::kZero;
  Eigen::Index rank = 10;  // P'
  Shape ranks;             // per-axis ranks for the HOSVD variant; empty = `rank` on every axis
  double tol_gaps = 1e-6;
  int max_iters = 500;
};

struct GappyTrace {
  // MSE_gaps = sqrt(sum over gaps of |update|) / N_gaps, one entry per iteration.
  std::vector<double> mse_gaps;
  // Conventional root mean square of the update over the gaps.
  std::vector<double> rmse_gaps;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

struct GappyResult {
  Eigen::MatrixXd field;
  GappyTrace trace;
};

struct GappyTensorResult {
  SnapshotTensor tensor;
  GappyTrace trace;
};

/// Fill the gaps of a 2-d field before the first iteration. Mean uses the
/// known values of the same column; linear interpolation runs down each column
/// and holds the nearest known value past the ends. Columns without any known
/// value fall back to zero.
void initial_fill(Eigen::MatrixXd& field, const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& gaps, InitFill fill);

/// Iterative rank-P' completion of a 2-d field. Known entries are never
/// modified. Stops once MSE_gaps <= tol_gaps; hitting max_iters returns the
/// last iterate with converged = false and a warning.
GappyResult gappy_svd(const Eigen::MatrixXd& field, const GapMask& mask, const GappyConfig& cfg);

/// Same loop on a whole snapshot tensor with a truncated HOSVD inner step.
GappyTensorResult gappy_hosvd(const SnapshotTensor& t, const GapMask& mask, const GappyConfig& cfg);

enum class Interp { kLinear, kCubic };
enum class TemporalMode { kHold, kEnlarge };

std::string_view to_string(Interp i) noexcept;
Interp parse_interp(std::string_view name);
std::string_view to_string(TemporalMode m) noexcept;
TemporalMode parse_temporal_mode(std::string_view name);

struct SuperResConfig {
  int doublings = 1;       // s
  Eigen::Index rank = 10;  // P'
  Interp interp = Interp::kLinear;
  TemporalMode temporal = TemporalMode::kHold;
};

/// Double the number of rows: coarse row i lands on fine row 2i, odd rows are
/// interpolated midpoints and the final row repeats the last coarse row.
/// Cubic uses the four-point midpoint rule where both neighbours exist.
Eigen::MatrixXd double_rows(const Eigen::MatrixXd& m, Interp interp);

struct SuperResResult {
  Eigen::MatrixXd field;
  std::vector<std::string> warnings;
};

struct SuperResTensorResult {
  SnapshotTensor tensor;
  std::vector<std::string> warnings;
};

/// s rounds of: rank-P' SVD, interpolate W and T to twice their length,
/// recombine. Output is (2^s N1) x (2^s N2).
SuperResResult superres_svd(const Eigen::MatrixXd& field, const SuperResConfig& cfg);

/// HOSVD variant: every spatial axis is doubled per round, the component axis
/// never, and the time axis only in TemporalMode::kEnlarge (dt halves).
SuperResTensorResult superres_hosvd(const SnapshotTensor& t, const SuperResConfig& cfg);

}  // namespace modeflow
