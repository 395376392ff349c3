#pragma once

// Truncated SVD / POD of snapshot matrices.
//
// Singular vectors carry a deterministic sign: in every mode the spatial entry
// of largest magnitude is positive (first such entry on ties), with the
// temporal vector flipped alongside.

#include <optional>

#include <Eigen/Dense>

#include "modeflow/tensor.hpp"

namespace modeflow {

struct SvdFactors {
  Eigen::MatrixXd W;          // J x N spatial modes
  Eigen::VectorXd sigma;      // N retained singular values, descending
  Eigen::MatrixXd T;          // K x N temporal modes
  Eigen::VectorXd all_sigma;  // singular values before truncation
  double tol = 0.0;

  Eigen::Index rank() const noexcept { return sigma.size(); }
  Eigen::MatrixXd reconstruct() const { return W * sigma.asDiagonal() * T.transpose(); }
};

/// Smallest N with sigma[N] / sigma[0] <= tol (or < tol when `strict`);
/// the full length when no index qualifies. `sigma` must be descending.
Eigen::Index rank_for_tolerance(const Eigen::VectorXd& sigma, double tol, bool strict = false);

/// Make the largest-magnitude entry of each column of `w` positive, flipping
/// the matching column of `t` (if non-null) too.
void canonicalize_signs(Eigen::MatrixXd& w, Eigen::MatrixXd* t);

/// Full thin SVD followed by tolerance truncation; `max_rank`, when given,
/// fixes the rank instead (clamped to min(J, K)).
SvdFactors svd_truncated(const Eigen::MatrixXd& m, double tol, std::optional<Eigen::Index> max_rank = std::nullopt);
inline SvdFactors svd_truncated(const SnapshotMatrix& m, double tol, std::optional<Eigen::Index> max_rank = std::nullopt) {
  return svd_truncated(m.data, tol, max_rank);
}

/// Leading `rank` singular triplets from the Gram matrix of the smaller side,
/// via a partial symmetric eigensolve. Cheaper than a full SVD when
/// rank << min(J, K); accuracy of small singular values is limited to about
/// sqrt(machine epsilon) * sigma_1. `all_sigma` holds only the computed values.
SvdFactors leading_svd(const Eigen::MatrixXd& m, Eigen::Index rank);

struct PodExpansion {
  Eigen::MatrixXd modes;         // J x N, Phi_n
  Eigen::MatrixXd coefficients;  // K x N, c_n(t_k) = sigma_n T_kn

  Eigen::MatrixXd reconstruct() const { return modes * coefficients.transpose(); }
};

PodExpansion pod_expansion(const SvdFactors& f);

/// Reduced snapshot matrix Sigma T^T together with the basis that lifts it back.
struct ReducedSnapshotMatrix {
  Eigen::MatrixXd data;      // N x K
  Eigen::MatrixXd parent_W;  // J x N
  double dt = 1.0;

  Eigen::MatrixXd lift() const { return parent_W * data; }
  Eigen::MatrixXd lift(const Eigen::MatrixXd& coefficients) const { return parent_W * coefficients; }
};

ReducedSnapshotMatrix reduce(const SnapshotMatrix& m, double tol, std::optional<Eigen::Index> max_rank = std::nullopt);

}  // namespace modeflow
