#pragma once

// Higher order SVD (Tucker form) of snapshot tensors.
//
// Factor matrices come from the thin SVD of each mode unfolding; the core is
// the projection of the tensor onto all truncated factors. No HOOI refinement.

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modeflow/tensor.hpp"

namespace modeflow {

struct HosvdFactors {
  Tensor core;                                  // shape = ranks
  std::vector<Eigen::MatrixXd> factors;         // dim(axis) x rank(axis); last one is T
  std::vector<Eigen::VectorXd> singular_values; // untruncated, one set per axis
  Shape ranks;

  Tensor reconstruct() const;
};

/// Per-axis tolerances (one per axis, or a single shared value) select each
/// rank as the smallest P with sigma_{P+1}/sigma_1 <= tol. Works on any order
/// >= 2; throws NumericalError if an unfolding is identically zero.
HosvdFactors hosvd(const Tensor& t, std::span<const double> tols);
HosvdFactors hosvd(const Tensor& t, double tol);

/// Snapshot-tensor entry point; enforces order 3..5.
HosvdFactors hosvd(const SnapshotTensor& t, std::span<const double> tols);
HosvdFactors hosvd(const SnapshotTensor& t, double tol);

/// Fixed ranks per axis, each clamped to [1, dim(axis)].
HosvdFactors hosvd_with_ranks(const Tensor& t, const Shape& ranks);

/// Spatial/temporal split of a Tucker expansion:
///   V(j..., k) = sum_n W(j..., n) Vhat(k, n)
/// with W = (core x spatial factors)(..., n) / sigma^t_n and
/// Vhat(k, n) = sigma^t_n T(k, n).
struct HosvdModes {
  Eigen::MatrixXd spatial;   // J x N (flattened component-major)
  Eigen::MatrixXd temporal;  // K x N
  Eigen::VectorXd sigma_t;   // N temporal singular values
  Shape spatial_shape;       // (J1, J2, ...) without the time axis
  std::vector<std::string> warnings;

  Eigen::MatrixXd reconstruct_matrix() const { return spatial * temporal.transpose(); }
};

/// Modes with a zero temporal singular value are dropped (with a warning).
HosvdModes hosvd_spatial_temporal_modes(const HosvdFactors& f);

}  // namespace modeflow
