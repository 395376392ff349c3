#pragma once

// Higher order DMD on snapshot matrices and tensors, the iterative
// multidimensional variant, and extrapolation of the fitted expansion
//
//   v(t) = sum_m a_m u_m exp((delta_m + i omega_m) (t - t0)).

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modeflow/tensor.hpp"

namespace modeflow {

struct DmdMode {
  double amplitude = 0.0;
  double omega = 0.0;  // rad / time
  double delta = 0.0;  // 1 / time
  Eigen::VectorXcd u;  // unit Euclidean norm
};

struct DmdExpansion {
  std::vector<DmdMode> modes;  // descending amplitude
  std::size_t d = 1;
  double eps_svd = 0.0;
  double eps_a = 0.0;
  Eigen::Index N = 0;        // spatial complexity
  Eigen::Index N_prime = 0;  // rank of the delayed matrix
  Eigen::Index M = 0;        // spectral complexity
  Shape ranks;               // HOSVD ranks (tensor variants only)
  Shape spatial_shape;       // (components, space...) when fitted on a tensor
  double dt = 1.0;
  double t0 = 0.0;
  double reconstruction_rrmse = 0.0;
  std::vector<std::string> warnings;

  Eigen::Index J() const noexcept { return modes.empty() ? 0 : modes.front().u.size(); }

  /// Complex field at the given times (J x times.size()).
  Eigen::MatrixXcd evaluate(std::span<const double> times) const;
  /// Real part of evaluate() at t0 + k dt, k = 0..K-1.
  Eigen::MatrixXd reconstruct(Eigen::Index K) const;
};

/// HODMD of a snapshot matrix with d delays. d outside [K/10, K/2] only warns.
/// Throws ConfigError for d < 1 or K <= d, NumericalError when the reduced
/// Koopman eigenproblem is numerically defective.
DmdExpansion hodmd(const SnapshotMatrix& m, std::size_t d, double eps_svd, double eps_a, double t0 = 0.0);

/// Delay step of HODMD on already reduced coordinates: `reduced` is N x K and
/// `basis` (J x N, orthonormal columns) lifts reduced modes to space.
DmdExpansion hodmd_reduced(const Eigen::MatrixXd& reduced, const Eigen::MatrixXd& basis, double dt, std::size_t d,
                           double eps_svd, double eps_a, double t0 = 0.0);

/// HOSVD reduction (one tolerance per axis or a single shared one) followed by
/// the delay step on the temporal modes. Modes are lifted through the HOSVD
/// spatial modes and flattened component-major.
DmdExpansion mdhodmd(const SnapshotTensor& t, std::size_t d, std::span<const double> eps_svd, double eps_a);

struct MdhodmdIterResult {
  DmdExpansion expansion;
  int iterations = 0;  // re-applications to reconstructed data
  bool converged = false;
  std::vector<Shape> rank_history;
};

/// Reapply mdhodmd to its own reconstruction until the HOSVD rank vector is
/// the same for two consecutive applications, or max_iters re-applications.
MdhodmdIterResult mdhodmd_iterative(const SnapshotTensor& t, std::size_t d, std::span<const double> eps_svd,
                                    double eps_a, int max_iters = 20);

struct DmdForecast {
  SnapshotMatrix field;            // J x times, real part
  double imag_residue = 0.0;       // ||Im|| / ||Re||
  std::vector<std::size_t> kept;   // indices into the expansion's modes
  std::vector<std::string> warnings;
};

/// Keep modes with |delta| < eps_perm (optionally forcing delta = 0) and
/// evaluate at `times`. Throws NumericalError, listing the growth rates closest
/// to the threshold, when nothing survives the filter.
DmdForecast dmd_forecast(const DmdExpansion& e, double eps_perm, bool freeze_growth, std::span<const double> times);

struct SpectrumRow {
  double omega = 0.0;
  double delta = 0.0;
  double amplitude = 0.0;
};

/// One row per mode, in the expansion's (amplitude) order.
std::vector<SpectrumRow> dmd_spectrum_report(const DmdExpansion& e);

/// Conjugate pairs folded into one row with omega >= 0 (tolerance 1e-8).
std::vector<SpectrumRow> paired_spectrum(const DmdExpansion& e, double tol = 1e-8);

/// "permanent" when |delta| < eps, otherwise "transient" (delta < 0) or "growing".
std::string mode_kind(double delta, double eps = 1e-3);

/// Header `omega,delta,amplitude`, 17 significant digits.
void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRow>& rows);

}  // namespace modeflow
