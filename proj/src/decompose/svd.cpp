#include "modeflow/svd.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>


#include "modeflow/error.hpp"

namespace modeflow {

Eigen::Index rank_for_tolerance(const Eigen::VectorXd& sigma, double tol, bool strict) {
  const Eigen::Index n = sigma.size();
  if (n == 0 || sigma(0) <= 0.0) return 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double ratio = sigma(i) / sigma(0);
    if (strict ? ratio < tol : ratio <= tol) return i;
  }
  return n;
}

void canonicalize_signs(Eigen::MatrixXd& w, Eigen::MatrixXd* t) {
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    Eigen::Index imax = 0;
    w.col(c).cwiseAbs().maxCoeff(&imax);
    if (w(imax, c) < 0.0) {
      w.col(c) *= -1.0;
      if (t) t->col(c) *= -1.0;
    }
  }
}

SvdFactors svd_truncated(const Eigen::MatrixXd& m, double tol, std::optional<Eigen::Index> max_rank) {
  if (m.size() == 0) throw ConfigError("svd: empty matrix");
  if (!m.allFinite()) throw ConfigError("svd: matrix contains non-finite entries");
  if (!max_rank && !(tol >= 0.0 && tol < 1.0)) throw ConfigError("svd: tolerance must lie in [0, 1)");
  if (max_rank && *max_rank < 1) throw ConfigError("svd: max_rank must be at least 1");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("svd: singular value solver did not converge");

  SvdFactors f;
  f.tol = tol;
  f.all_sigma = svd.singularValues();
  Eigen::Index n = max_rank ? std::min<Eigen::Index>(*max_rank, f.all_sigma.size()) : rank_for_tolerance(f.all_sigma, tol);
  if (n == 0) throw NumericalError("svd: matrix is identically zero");
  f.W = svd.matrixU().leftCols(n);
  f.T = svd.matrixV().leftCols(n);
  f.sigma = f.all_sigma.head(n);
  canonicalize_signs(f.W, &f.T);
  return f;
}

SvdFactors leading_svd(const Eigen::MatrixXd& m, Eigen::Index rank) {
  if (m.size() == 0) throw ConfigError("leading_svd: empty matrix");
  const bool tall = m.rows() >= m.cols();
  const Eigen::Index n = tall ? m.cols() : m.rows();
  rank = std::clamp<Eigen::Index>(rank, 1, n);

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  if (tall) {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(m.transpose());
  } else {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(m);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericalError("leading_svd: symmetric eigensolver did not converge");

  // Ascending eigenvalues; take the last `rank` in descending order.
  SvdFactors f;
  f.sigma.resize(rank);
  Eigen::MatrixXd small(n, rank);
  for (Eigen::Index i = 0; i < rank; ++i) {
    const Eigen::Index src = n - 1 - i;
    f.sigma(i) = std::sqrt(std::max(eig.eigenvalues()(src), 0.0));
    small.col(i) = eig.eigenvectors().col(src);
  }
  Eigen::MatrixXd big = tall ? Eigen::MatrixXd(m * small) : Eigen::MatrixXd(m.transpose() * small);
  for (Eigen::Index i = 0; i < rank; ++i) {
    if (f.sigma(i) > 0.0) {
      big.col(i) /= f.sigma(i);
    } else {
      big.col(i).setZero();
    }
  }
  f.W = tall ? big : small;
  f.T = tall ? small : big;
  f.all_sigma = f.sigma;
  canonicalize_signs(f.W, &f.T);
  return f;
}

PodExpansion pod_expansion(const SvdFactors& f) {
  return PodExpansion{f.W, f.T * f.sigma.asDiagonal()};
}

ReducedSnapshotMatrix reduce(const SnapshotMatrix& m, double tol, std::optional<Eigen::Index> max_rank) {
  SvdFactors f = svd_truncated(m.data, tol, max_rank);
  return ReducedSnapshotMatrix{f.sigma.asDiagonal() * f.T.transpose(), std::move(f.W), m.dt};
}

}  // namespace modeflow
