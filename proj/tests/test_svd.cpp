#include "doctest.h"
#include "modeflow/error.hpp"
#include "modeflow/svd.hpp"
#include "support.hpp"

using namespace modeflow;

TEST_CASE("rank selection by relative tolerance") {
  Eigen::VectorXd s(4);
  s << 10, 1, 0.1, 0.01;
  CHECK(rank_for_tolerance(s, 0.5) == 1);
  CHECK(rank_for_tolerance(s, 0.1) == 1);
  CHECK(rank_for_tolerance(s, 0.1, true) == 2);
  CHECK(rank_for_tolerance(s, 0.0005) == 4);
  CHECK(rank_for_tolerance(s, 0.0) == 4);
  CHECK(rank_for_tolerance(s, 1e-9) == 4);
}

TEST_CASE("truncated SVD singular values match a Jacobi oracle") {
  const Eigen::MatrixXd m = testing::random_matrix(40, 25, 11);
  const SvdFactors f = svd_truncated(m, 0.0);
  Eigen::JacobiSVD<Eigen::MatrixXd> oracle(m);
  CHECK((f.all_sigma - oracle.singularValues()).norm() < 1e-10 * oracle.singularValues()(0));
  CHECK(rrmse(m, f.reconstruct()) < 1e-12);
  CHECK((f.W.transpose() * f.W - Eigen::MatrixXd::Identity(25, 25)).norm() < 1e-10);
  for (Eigen::Index n = 0; n < f.W.cols(); ++n) {
    Eigen::Index imax;
    f.W.col(n).cwiseAbs().maxCoeff(&imax);
    CHECK(f.W(imax, n) > 0.0);
  }
}

TEST_CASE("truncation error equals the tail of the spectrum") {
  const Eigen::MatrixXd m = testing::random_matrix(30, 20, 12);
  const SvdFactors f = svd_truncated(m, 0.0, 5);
  CHECK(f.rank() == 5);
  const double tail = f.all_sigma.tail(15).squaredNorm();
  CHECK((m - f.reconstruct()).squaredNorm() == doctest::Approx(tail).epsilon(1e-10));
  CHECK(svd_truncated(m, 0.0, 1000).rank() == 20);
}

TEST_CASE("leading_svd agrees with the full SVD on both orientations") {
  for (auto [rows, cols] : {std::pair{60, 25}, std::pair{25, 60}, std::pair{449, 199}, std::pair{199, 449}}) {
    const Eigen::MatrixXd m = testing::random_orthonormal(rows, 6, 1) * Eigen::VectorXd::LinSpaced(6, 6, 1).asDiagonal() *
                              testing::random_orthonormal(cols, 6, 2).transpose();
    const SvdFactors full = svd_truncated(m, 0.0, 4);
    const SvdFactors lead = leading_svd(m, 4);
    CHECK((full.sigma - lead.sigma).norm() < 1e-10);
    CHECK((full.reconstruct() - lead.reconstruct()).norm() < 1e-8);
    CHECK((full.W - lead.W).norm() < 1e-8);
  }
}

TEST_CASE("pod expansion and reduced matrix lift back") {
  const Eigen::MatrixXd m = testing::random_matrix(12, 9, 5);
  const SnapshotMatrix sm{m, 0.5};
  const ReducedSnapshotMatrix r = reduce(sm, 0.0);
  CHECK(r.dt == 0.5);
  CHECK(rrmse(m, r.lift()) < 1e-12);
  const PodExpansion pod = pod_expansion(svd_truncated(m, 0.0));
  CHECK(rrmse(m, pod.reconstruct()) < 1e-12);
}
