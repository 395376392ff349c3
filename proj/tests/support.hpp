#pragma once

// Test-side oracles: independent generators and brute-force references.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "modeflow/tensor.hpp"

namespace testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = g(rng);
  }
  return m;
}

inline Eigen::MatrixXd random_orthonormal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rows, cols, seed));
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

struct TrueMode {
  double a, omega, delta;
};

/// Real data from an exact DMD expansion. A mode with omega != 0 stands for
/// a conjugate pair, each member carrying amplitude `a` and unit-norm profile
/// (p +- i q) / sqrt(2); a mode with omega == 0 uses a real unit profile.
inline Eigen::MatrixXd dmd_signal(Eigen::Index J, Eigen::Index K, double dt, const std::vector<TrueMode>& modes,
                                  std::uint64_t seed) {
  Eigen::Index cols = 0;
  for (const auto& m : modes) cols += m.omega != 0.0 ? 2 : 1;
  const Eigen::MatrixXd basis = random_orthonormal(J, cols, seed);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(J, K);
  Eigen::Index c = 0;
  for (const auto& m : modes) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const double t = static_cast<double>(k) * dt;
      const double g = m.a * std::exp(m.delta * t);
      if (m.omega != 0.0) {
        // 2 Re(a u e^{i w t}) with u = (p + i q)/sqrt(2)
        v.col(k) += std::sqrt(2.0) * g * (basis.col(c) * std::cos(m.omega * t) - basis.col(c + 1) * std::sin(m.omega * t));
      } else {
        v.col(k) += g * basis.col(c);
      }
    }
    c += m.omega != 0.0 ? 2 : 1;
  }
  return v;
}

/// Unfolding by explicit multi-index enumeration (no reshapes).
inline Eigen::MatrixXd brute_unfold(const modeflow::Tensor& t, std::size_t axis) {
  const auto& s = t.shape();
  const std::size_t n = s[axis];
  const std::size_t cols = t.size() / n;
  Eigen::MatrixXd out(n, cols);
  std::vector<std::size_t> idx(s.size(), 0);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    std::size_t rem = flat;
    for (std::size_t a = s.size(); a-- > 0;) {
      idx[a] = rem % s[a];
      rem /= s[a];
    }
    std::size_t col = 0;
    for (std::size_t a = 0; a < s.size(); ++a) {
      if (a != axis) col = col * s[a] + idx[a];
    }
    out(static_cast<Eigen::Index>(idx[axis]), static_cast<Eigen::Index>(col)) = t[flat];
  }
  return out;
}

inline modeflow::Tensor random_tensor(const modeflow::Shape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  modeflow::Tensor t(shape);
  for (auto& v : t.values()) v = g(rng);
  return t;
}

/// Tucker tensor core x_a factors with random factors of the given ranks.
inline modeflow::Tensor low_rank_tensor(const modeflow::Shape& shape, const modeflow::Shape& ranks, std::uint64_t seed) {
  modeflow::Tensor t = random_tensor(ranks, seed);
  for (std::size_t a = 0; a < shape.size(); ++a) {
    t = modeflow::mode_product(t, random_matrix(static_cast<Eigen::Index>(shape[a]), static_cast<Eigen::Index>(ranks[a]),
                                                seed + 17 * (a + 1)),
                               a);
  }
  return t;
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

}  // namespace testing
