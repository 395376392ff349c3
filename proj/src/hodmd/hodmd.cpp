#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "modeflow/error.hpp"
#include "modeflow/hodmd.hpp"
#include "modeflow/hosvd.hpp"
#include "modeflow/svd.hpp"

namespace modeflow {
namespace {

constexpr double kMaxEigvecCondition = 1e14;

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

void check_delays(Eigen::Index K, std::size_t d, std::vector<std::string>& warnings) {
  if (d < 1) throw ConfigError("hodmd: d must be at least 1");
  if (static_cast<Eigen::Index>(d) >= K) {
    throw ConfigError("hodmd: need more snapshots than delays (K = " + std::to_string(K) + ", d = " + std::to_string(d) + ")");
  }
  const double k = static_cast<double>(K);
  const double dd = static_cast<double>(d);
  if (d > 1 && (dd < k / 10.0 || dd > k / 2.0)) {
    warnings.push_back("d = " + std::to_string(d) + " is outside the recommended range [K/10, K/2] for K = " +
                       std::to_string(K));
  }
}

}  // namespace

Eigen::MatrixXcd DmdExpansion::evaluate(std::span<const double> times) const {
  const Eigen::Index n = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(J(), n);
  for (const auto& m : modes) {
    const std::complex<double> lambda(m.delta, m.omega);
    Eigen::RowVectorXcd coeff(n);
    for (Eigen::Index k = 0; k < n; ++k) coeff(k) = m.amplitude * std::exp(lambda * (times[k] - t0));
    out.noalias() += m.u * coeff;
  }
  return out;
}

Eigen::MatrixXd DmdExpansion::reconstruct(Eigen::Index K) const {
  std::vector<double> times(static_cast<std::size_t>(K));
  for (Eigen::Index k = 0; k < K; ++k) times[k] = t0 + static_cast<double>(k) * dt;
  return evaluate(times).real();
}

DmdExpansion hodmd_reduced(const Eigen::MatrixXd& reduced, const Eigen::MatrixXd& basis, double dt, std::size_t d,
                           double eps_svd, double eps_a, double t0) {
  if (!(dt > 0.0)) throw ConfigError("hodmd: dt must be positive");
  if (eps_svd < 0.0 || eps_a < 0.0) throw ConfigError("hodmd: tolerances must be non-negative");
  if (basis.cols() != reduced.rows()) throw ConfigError("hodmd: basis and reduced data disagree on N");

  DmdExpansion e;
  e.d = d;
  e.eps_svd = eps_svd;
  e.eps_a = eps_a;
  e.dt = dt;
  e.t0 = t0;
  const Eigen::Index N = reduced.rows();
  const Eigen::Index K = reduced.cols();
  e.N = N;
  check_delays(K, d, e.warnings);
  const auto di = static_cast<Eigen::Index>(d);

  // Delay-embedded (modified) snapshot matrix: block i holds snapshots i .. i+K-d.
  const Eigen::Index cols = K - di + 1;
  Eigen::MatrixXd delayed(N * di, cols);
  for (Eigen::Index i = 0; i < di; ++i) delayed.middleRows(i * N, N) = reduced.middleCols(i, cols);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(delayed, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("hodmd: SVD of the delayed matrix failed");
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) throw NumericalError("hodmd: data is identically zero");
  const Eigen::Index Np = rank_for_tolerance(s, eps_svd, /*strict=*/true);
  e.N_prime = Np;
  const Eigen::MatrixXd U1 = svd.matrixU().leftCols(Np);
  const Eigen::MatrixXd hatT = s.head(Np).asDiagonal() * svd.matrixV().leftCols(Np).transpose();

  // Minimum-norm least squares R V1 = V2.
  const Eigen::MatrixXd V1 = hatT.leftCols(cols - 1);
  const Eigen::MatrixXd V2 = hatT.rightCols(cols - 1);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(V1.transpose());
  const Eigen::MatrixXd R = cod.solve(V2.transpose()).transpose();

  Eigen::EigenSolver<Eigen::MatrixXd> eig(R);
  if (eig.info() != Eigen::Success) throw NumericalError("hodmd: eigenvalue solver did not converge");
  const Eigen::VectorXcd mu_all = eig.eigenvalues();
  const Eigen::MatrixXcd Q_all = eig.eigenvectors();
  {
    Eigen::JacobiSVD<Eigen::MatrixXcd> qs(Q_all);
    const auto& qsv = qs.singularValues();
    const double cond = qsv(qsv.size() - 1) > 0.0 ? qsv(0) / qsv(qsv.size() - 1) : std::numeric_limits<double>::infinity();
    if (!(cond < kMaxEigvecCondition)) {
      throw NumericalError("hodmd: Koopman eigenproblem is defective (eigenvector condition number " + fmt(cond) +
                           ", N' = " + std::to_string(Np) + "); try a larger eps_svd or a different d");
    }
  }

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < mu_all.size(); ++i) {
    if (std::abs(mu_all(i)) > 0.0) {
      keep.push_back(i);
    } else {
      e.warnings.push_back("discarded an eigenvalue with |mu| = 0");
    }
  }
  if (keep.empty()) throw NumericalError("hodmd: every Koopman eigenvalue is zero");
  const auto P = static_cast<Eigen::Index>(keep.size());
  Eigen::VectorXcd mu(P);
  Eigen::MatrixXcd Q(N, P);
  const Eigen::MatrixXcd U1c = U1.cast<std::complex<double>>();
  for (Eigen::Index p = 0; p < P; ++p) {
    mu(p) = mu_all(keep[p]);
    // Last delay block of the lifted eigenvector, unit norm.
    Eigen::VectorXcd q = U1c.bottomRows(N) * Q_all.col(keep[p]);
    const double nq = q.norm();
    if (nq == 0.0) throw NumericalError("hodmd: a DMD mode vanishes in the reduced space");
    Q.col(p) = q / nq;
  }

  // Amplitudes: least squares over all snapshots of reduced(:, k) = Q diag(mu^k) a.
  Eigen::MatrixXcd A(N * K, P);
  Eigen::VectorXcd b(N * K);
  Eigen::VectorXcd powk = Eigen::VectorXcd::Ones(P);
  for (Eigen::Index k = 0; k < K; ++k) {
    A.middleRows(k * N, N) = Q * powk.asDiagonal();
    b.segment(k * N, N) = reduced.col(k).cast<std::complex<double>>();
    powk = powk.cwiseProduct(mu);
  }
  const Eigen::VectorXcd a = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd>(A).solve(b);

  const Eigen::MatrixXcd basis_c = basis.cast<std::complex<double>>();
  std::vector<DmdMode> modes;
  modes.reserve(static_cast<std::size_t>(P));
  for (Eigen::Index p = 0; p < P; ++p) {
    DmdMode m;
    m.amplitude = std::abs(a(p));
    m.delta = std::log(std::abs(mu(p))) / dt;
    m.omega = std::arg(mu(p)) / dt;
    const std::complex<double> phase = m.amplitude > 0.0 ? a(p) / m.amplitude : std::complex<double>(1.0, 0.0);
    m.u = basis_c * (Q.col(p) * phase);
    const double nu = m.u.norm();
    if (nu > 0.0) m.u /= nu;
    modes.push_back(std::move(m));
  }
  std::stable_sort(modes.begin(), modes.end(),
                   [](const DmdMode& x, const DmdMode& y) { return x.amplitude > y.amplitude; });
  if (modes.front().amplitude == 0.0) throw NumericalError("hodmd: all fitted amplitudes are zero");
  const double a1 = modes.front().amplitude;
  std::size_t M = 0;
  while (M < modes.size() && modes[M].amplitude / a1 >= eps_a) ++M;
  modes.resize(M);
  e.modes = std::move(modes);
  e.M = static_cast<Eigen::Index>(M);

  const Eigen::MatrixXd approx = e.reconstruct(K);
  const Eigen::MatrixXd truth = basis * reduced;
  const double denom = truth.squaredNorm();
  e.reconstruction_rrmse = denom > 0.0 ? std::sqrt((truth - approx).squaredNorm() / denom) : 0.0;
  return e;
}

DmdExpansion hodmd(const SnapshotMatrix& m, std::size_t d, double eps_svd, double eps_a, double t0) {
  if (m.K() < 2) throw ConfigError("hodmd: need at least 2 snapshots");
  if (!m.data.allFinite()) throw ConfigError("hodmd: snapshot matrix contains non-finite values");
  const SvdFactors f = svd_truncated(m.data, eps_svd);
  if (f.rank() == 0 || f.sigma(0) == 0.0) throw NumericalError("hodmd: data is identically zero");
  const Eigen::MatrixXd reduced = f.sigma.asDiagonal() * f.T.transpose();
  DmdExpansion e = hodmd_reduced(reduced, f.W, m.dt, d, eps_svd, eps_a, t0);
  e.ranks = {static_cast<std::size_t>(f.rank())};
  return e;
}

DmdExpansion mdhodmd(const SnapshotTensor& t, std::size_t d, std::span<const double> eps_svd, double eps_a) {
  if (eps_svd.empty()) throw ConfigError("mdhodmd: at least one tolerance is required");
  const HosvdFactors f = hosvd(t, eps_svd);
  HosvdModes modes = hosvd_spatial_temporal_modes(f);
  const double eps_t = eps_svd.back();
  DmdExpansion e = hodmd_reduced(modes.temporal.transpose(), modes.spatial, t.dt(), d, eps_t, eps_a);
  e.ranks = f.ranks;
  e.spatial_shape = modes.spatial_shape;
  e.warnings.insert(e.warnings.begin(), modes.warnings.begin(), modes.warnings.end());
  // Report against the raw data rather than its HOSVD truncation.
  const SnapshotMatrix raw = reshape_tensor_to_matrix(t);
  const double denom = raw.data.squaredNorm();
  if (denom > 0.0) e.reconstruction_rrmse = std::sqrt((raw.data - e.reconstruct(raw.K())).squaredNorm() / denom);
  return e;
}

MdhodmdIterResult mdhodmd_iterative(const SnapshotTensor& t, std::size_t d, std::span<const double> eps_svd,
                                    double eps_a, int max_iters) {
  if (max_iters < 1) throw ConfigError("mdhodmd_iterative: max_iters must be at least 1");
  MdhodmdIterResult r;
  r.expansion = mdhodmd(t, d, eps_svd, eps_a);
  r.rank_history.push_back(r.expansion.ranks);
  Shape spatial = t.shape();
  spatial.pop_back();
  for (int it = 1; it <= max_iters; ++it) {
    const SnapshotMatrix rec{r.expansion.reconstruct(static_cast<Eigen::Index>(t.times())), t.dt()};
    DmdExpansion next = mdhodmd(reshape_matrix_to_tensor(rec, spatial), d, eps_svd, eps_a);
    r.iterations = it;
    r.rank_history.push_back(next.ranks);
    const bool stable = next.ranks == r.expansion.ranks;
    r.expansion = std::move(next);
    if (stable) {
      r.converged = true;
      break;
    }
  }
  if (!r.converged) {
    r.expansion.warnings.push_back("mdhodmd_iterative: HOSVD ranks still changing after " + std::to_string(max_iters) +
                                   " iterations");
  }
  // Error against the original data, not the last reconstruction.
  const SnapshotMatrix raw = reshape_tensor_to_matrix(t);
  const double denom = raw.data.squaredNorm();
  if (denom > 0.0) {
    r.expansion.reconstruction_rrmse = std::sqrt((raw.data - r.expansion.reconstruct(raw.K())).squaredNorm() / denom);
  }
  return r;
}

DmdForecast dmd_forecast(const DmdExpansion& e, double eps_perm, bool freeze_growth, std::span<const double> times) {
  if (!(eps_perm > 0.0)) throw ConfigError("dmd_forecast: eps_perm must be positive");
  if (e.modes.empty()) throw ConfigError("dmd_forecast: expansion has no modes");
  DmdForecast out;
  DmdExpansion kept = e;
  kept.modes.clear();
  for (std::size_t i = 0; i < e.modes.size(); ++i) {
    if (std::abs(e.modes[i].delta) < eps_perm) {
      out.kept.push_back(i);
      kept.modes.push_back(e.modes[i]);
      if (freeze_growth) kept.modes.back().delta = 0.0;
    }
  }
  if (kept.modes.empty()) {
    std::vector<double> deltas;
    for (const auto& m : e.modes) deltas.push_back(m.delta);
    std::sort(deltas.begin(), deltas.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
    std::string near;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, deltas.size()); ++i) near += (i ? ", " : "") + fmt(deltas[i]);
    throw NumericalError("dmd_forecast: no mode has |delta| < " + fmt(eps_perm) + "; closest growth rates: " + near);
  }
  const Eigen::MatrixXcd z = kept.evaluate(times);
  const double re = z.real().norm();
  const double im = z.imag().norm();
  out.imag_residue = re > 0.0 ? im / re : (im > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  if (out.imag_residue > 1e-8) {
    out.warnings.push_back("forecast has a relative imaginary part of " + fmt(out.imag_residue) +
                           " (unpaired complex mode?); discarded");
  }
  out.field = SnapshotMatrix{z.real(), e.dt};
  return out;
}

std::vector<SpectrumRow> dmd_spectrum_report(const DmdExpansion& e) {
  std::vector<SpectrumRow> rows;
  rows.reserve(e.modes.size());
  for (const auto& m : e.modes) rows.push_back({m.omega, m.delta, m.amplitude});
  return rows;
}

std::vector<SpectrumRow> paired_spectrum(const DmdExpansion& e, double tol) {
  std::vector<SpectrumRow> rows;
  std::vector<bool> used(e.modes.size(), false);
  for (std::size_t i = 0; i < e.modes.size(); ++i) {
    if (used[i]) continue;
    const auto& m = e.modes[i];
    used[i] = true;
    if (m.omega != 0.0) {
      const double scale = std::max({1.0, std::abs(m.omega), std::abs(m.delta), m.amplitude});
      for (std::size_t j = i + 1; j < e.modes.size(); ++j) {
        const auto& c = e.modes[j];
        if (!used[j] && std::abs(c.omega + m.omega) <= tol * scale && std::abs(c.delta - m.delta) <= tol * scale &&
            std::abs(c.amplitude - m.amplitude) <= tol * scale) {
          used[j] = true;
          break;
        }
      }
    }
    rows.push_back({std::abs(m.omega), m.delta, m.amplitude});
  }
  return rows;
}

std::string mode_kind(double delta, double eps) {
  if (std::abs(delta) < eps) return "permanent";
  return delta < 0.0 ? "transient" : "growing";
}

void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRow>& rows) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << "omega,delta,amplitude\n" << std::setprecision(17);
  for (const auto& r : rows) os << r.omega << ',' << r.delta << ',' << r.amplitude << '\n';
  os.flags(flags);
  os.precision(prec);
}

}  // namespace modeflow
