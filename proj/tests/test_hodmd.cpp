#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "modeflow/error.hpp"
#include "modeflow/hodmd.hpp"
#include "modeflow/hosvd.hpp"
#include "support.hpp"

using namespace modeflow;
using testing::TrueMode;

namespace {

// Match every true mode (both members of a pair) to the closest recovered one.
void check_recovery(const DmdExpansion& e, const std::vector<TrueMode>& truth, double tol) {
  std::size_t expected = 0;
  for (const auto& t : truth) {
    for (double sign : {1.0, -1.0}) {
      if (t.omega == 0.0 && sign < 0.0) continue;
      ++expected;
      const auto it = std::min_element(e.modes.begin(), e.modes.end(), [&](const DmdMode& a, const DmdMode& b) {
        return std::abs(a.omega - sign * t.omega) + std::abs(a.delta - t.delta) <
               std::abs(b.omega - sign * t.omega) + std::abs(b.delta - t.delta);
      });
      REQUIRE(it != e.modes.end());
      CAPTURE(t.omega);
      CHECK(std::abs(it->omega - sign * t.omega) < tol);
      CHECK(std::abs(it->delta - t.delta) < tol);
      CHECK(testing::rel_err(it->amplitude, t.a) < tol);
    }
  }
  CHECK(e.modes.size() == expected);
}

}  // namespace

TEST_CASE("constant data yields one steady mode with amplitude = column norm") {
  Eigen::VectorXd c(4);
  c << 1, -2, 3, 0.5;
  const SnapshotMatrix m{c.replicate(1, 30), 0.1};
  const DmdExpansion e = hodmd(m, 5, 1e-10, 1e-6);
  REQUIRE(e.modes.size() == 1);
  CHECK(std::abs(e.modes[0].omega) < 1e-12);
  CHECK(std::abs(e.modes[0].delta) < 1e-8);
  CHECK(e.modes[0].amplitude == doctest::Approx(c.norm()).epsilon(1e-10));
  CHECK(e.modes[0].u.norm() == doctest::Approx(1.0));
}

TEST_CASE("two-mode synthetic signal is recovered exactly") {
  const std::vector<TrueMode> truth{{1.0, 0.5, 0.0}, {0.6, 1.3, -0.05}};
  const SnapshotMatrix m{testing::dmd_signal(20, 300, 0.1, truth, 3), 0.1};
  const DmdExpansion e = hodmd(m, 60, 1e-10, 1e-8);
  check_recovery(e, truth, 1e-6);
  CHECK(e.N == 4);
  CHECK(e.M == 4);
  CHECK(e.reconstruction_rrmse < 1e-8);
  for (const auto& mode : e.modes) CHECK(mode.u.norm() == doctest::Approx(1.0));
}

TEST_CASE("d = 1 is standard DMD when the spatial rank suffices") {
  const std::vector<TrueMode> truth{{1.0, 0.5, 0.0}, {0.6, 1.3, -0.05}};
  const SnapshotMatrix m{testing::dmd_signal(20, 100, 0.1, truth, 4), 0.1};
  check_recovery(hodmd(m, 1, 1e-10, 1e-8), truth, 1e-6);
}

TEST_CASE("delays recover more frequencies than the spatial rank allows") {
  // Rank-1 space, two frequencies: impossible for d = 1.
  Eigen::MatrixXd v(3, 200);
  for (Eigen::Index k = 0; k < 200; ++k) {
    const double t = 0.05 * k;
    v.col(k) = Eigen::Vector3d(1, 2, 2) / 3.0 * (std::cos(1.1 * t) + 0.5 * std::cos(2.7 * t));
  }
  const DmdExpansion e = hodmd(SnapshotMatrix{v, 0.05}, 40, 1e-10, 1e-8);
  CHECK(e.N == 1);
  REQUIRE(e.modes.size() == 4);
  std::vector<double> om;
  for (const auto& m : e.modes) om.push_back(std::abs(m.omega));
  std::sort(om.begin(), om.end());
  CHECK(om[0] == doctest::Approx(1.1).epsilon(1e-8));
  CHECK(om[3] == doctest::Approx(2.7).epsilon(1e-8));
}

TEST_CASE("doubling K and d leaves the spectrum unchanged") {
  const std::vector<TrueMode> truth{{1.0, 0.8, -0.02}, {0.4, 2.1, 0.0}};
  const DmdExpansion a = hodmd({testing::dmd_signal(10, 150, 0.1, truth, 5), 0.1}, 30, 1e-10, 1e-8);
  const DmdExpansion b = hodmd({testing::dmd_signal(10, 300, 0.1, truth, 5), 0.1}, 60, 1e-10, 1e-8);
  REQUIRE(a.modes.size() == b.modes.size());
  auto key = [](const DmdExpansion& e) {
    std::vector<std::pair<double, double>> out;
    for (const auto& m : e.modes) out.emplace_back(m.omega, m.delta);
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto ka = key(a), kb = key(b);
  for (std::size_t i = 0; i < ka.size(); ++i) {
    CHECK(std::abs(ka[i].first - kb[i].first) < 1e-6);
    CHECK(std::abs(ka[i].second - kb[i].second) < 1e-6);
  }
}

TEST_CASE("conjugate pairs are symmetric in the spectrum and fold in the summary") {
  const std::vector<TrueMode> truth{{1.0, 0.5, 0.0}, {0.3, 0.0, 0.0}};
  const DmdExpansion e = hodmd({testing::dmd_signal(8, 120, 0.1, truth, 6), 0.1}, 20, 1e-10, 1e-8);
  const auto rows = dmd_spectrum_report(e);
  REQUIRE(rows.size() == 3);
  double sum = 0.0;
  for (const auto& r : rows) sum += r.omega;
  CHECK(std::abs(sum) < 1e-8);
  const auto paired = paired_spectrum(e);
  REQUIRE(paired.size() == 2);
  for (const auto& r : paired) CHECK(r.omega >= 0.0);
  std::ostringstream os;
  write_spectrum_csv(os, rows);
  CHECK(os.str().rfind("omega,delta,amplitude\n", 0) == 0);
  std::istringstream lines(os.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(std::stod(first.substr(first.rfind(',') + 1)) == rows[0].amplitude);  // 17 digits round-trip
}

TEST_CASE("argument validation and warnings") {
  const SnapshotMatrix m{testing::random_matrix(4, 20, 1), 1.0};
  CHECK_THROWS_AS(hodmd(m, 0, 1e-6, 1e-6), ConfigError);
  CHECK_THROWS_AS(hodmd(m, 20, 1e-6, 1e-6), ConfigError);
  CHECK_FALSE(hodmd(m, 15, 1e-6, 1e-6).warnings.empty());
  CHECK_THROWS_AS(hodmd({Eigen::MatrixXd::Zero(4, 20), 1.0}, 3, 1e-6, 1e-6), NumericalError);
  CHECK(mode_kind(-0.2) == "transient");
  CHECK(mode_kind(1e-5) == "permanent");
}

TEST_CASE("forecast keeps permanent modes and matches the analytic attractor") {
  const double dt = 0.1;
  const Eigen::Index K = 200;
  const std::vector<TrueMode> all{{1.0, 0.8, 0.0}, {2.0, 1.9, -0.1}};
  const DmdExpansion e = hodmd({testing::dmd_signal(12, K, dt, all, 7), dt}, 40, 1e-10, 1e-8);
  std::vector<double> times;
  for (Eigen::Index k = K; k < 3 * K; ++k) times.push_back(k * dt);
  const DmdForecast f = dmd_forecast(e, 1e-3, true, times);
  CHECK(f.kept.size() == 2);
  CHECK(f.imag_residue < 1e-8);
  // Attractor: the permanent pair alone, same spatial profiles (same seed and ordering).
  Eigen::MatrixXd full = testing::dmd_signal(12, 3 * K, dt, {{1.0, 0.8, 0.0}, {0.0, 1.9, -0.1}}, 7);
  CHECK(rrmse(Eigen::MatrixXd(full.rightCols(2 * K)), f.field.data) < 1e-4);
}

TEST_CASE("forecast with no surviving mode lists the nearest misses") {
  const DmdExpansion e = hodmd({testing::dmd_signal(6, 100, 0.1, {{1.0, 0.8, -0.2}}, 8), 0.1}, 20, 1e-10, 1e-8);
  const std::vector<double> times{20.0};
  CHECK_THROWS_WITH_AS(dmd_forecast(e, 1e-3, false, times), doctest::Contains("closest growth rates: -0.2"),
                       NumericalError);
  CHECK_THROWS_AS(dmd_forecast(e, 0.0, false, times), ConfigError);
}

TEST_CASE("steady expansion forecasts a constant") {
  const SnapshotMatrix m{Eigen::VectorXd::LinSpaced(5, 1, 2).replicate(1, 20), 1.0};
  const DmdExpansion e = hodmd(m, 4, 1e-10, 1e-6);
  const std::vector<double> far{1e3, 1e5};
  const DmdForecast f = dmd_forecast(e, 1e-3, true, far);
  CHECK((f.field.data.col(0) - m.data.col(0)).norm() < 1e-10);
  CHECK((f.field.data.col(1) - m.data.col(0)).norm() < 1e-10);
}

namespace {

SnapshotTensor separable(std::size_t K, double dt, double omega) {
  SnapshotTensor t(1, {6, 5}, K, dt);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      for (std::size_t k = 0; k < K; ++k) {
        t.at(i * 5 + j, k) = std::sin(0.5 + i) * std::cos(0.3 * j) * std::cos(omega * k * dt);
      }
    }
  }
  return t;
}

}  // namespace

TEST_CASE("mdHODMD on a separable oscillating tensor") {
  const SnapshotTensor t = separable(100, 0.1, 1.7);
  const std::vector<double> tol{1e-8};
  const DmdExpansion e = mdhodmd(t, 20, tol, 1e-6);
  CHECK(e.ranks == Shape{1, 1, 1, 1});
  REQUIRE(e.modes.size() == 2);
  for (const auto& m : e.modes) CHECK(std::abs(std::abs(m.omega) - 1.7) < 1e-8);
  CHECK(e.spatial_shape == Shape{1, 6, 5});
  CHECK(e.reconstruction_rrmse < 1e-8);
}

TEST_CASE("mdHODMD on a steady tensor and per-axis tolerances") {
  SnapshotTensor t(2, {3, 4}, 30, 1.0);
  for (std::size_t j = 0; j < t.spatial_size(); ++j) {
    for (std::size_t k = 0; k < 30; ++k) t.at(j, k) = 1.0 + 0.1 * static_cast<double>(j);
  }
  const std::vector<double> tol{1e-8, 1e-8, 1e-6, 1e-8};
  const DmdExpansion e = mdhodmd(t, 5, tol, 1e-6);
  REQUIRE(e.modes.size() == 1);
  CHECK(std::abs(e.modes[0].delta) < 1e-8);
  CHECK(e.modes[0].omega == 0.0);
}

TEST_CASE("iterative mdHODMD: exact data converges at once; noisy data stabilises") {
  const std::vector<double> tight{1e-8};
  const auto exact = mdhodmd_iterative(separable(100, 0.1, 1.7), 20, tight, 1e-6);
  CHECK(exact.converged);
  CHECK(exact.iterations == 1);

  // Rank-4 (two pairs) oscillating tensor plus 1% noise.
  const std::vector<TrueMode> truth{{1.0, 0.9, 0.0}, {0.7, 2.3, 0.0}};
  const Eigen::MatrixXd clean = testing::dmd_signal(2 * 8 * 7, 200, 0.1, truth, 11);
  Eigen::MatrixXd noisy = clean + 0.01 * clean.cwiseAbs().maxCoeff() * testing::random_matrix(clean.rows(), 200, 12);
  const SnapshotTensor t = reshape_matrix_to_tensor({noisy, 0.1}, {2, 8, 7});
  const std::vector<double> loose{5e-2};
  const auto r = mdhodmd_iterative(t, 40, loose, 5e-2);
  CHECK(r.converged);
  std::vector<double> om;
  for (const auto& m : r.expansion.modes) om.push_back(std::abs(m.omega));
  for (double w : {0.9, 2.3}) {
    const double best = *std::min_element(om.begin(), om.end(), [&](double a, double b) {
      return std::abs(a - w) < std::abs(b - w);
    });
    CHECK(std::abs(best - w) < 1e-2);
  }
}
