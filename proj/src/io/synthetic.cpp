#include <cmath>
#include <random>

#include "json.hpp"
#include "modeflow/error.hpp"
#include "modeflow/io.hpp"

namespace modeflow::io {

SnapshotTensor generate_synthetic(const SyntheticSection& s, double dt) {
  if (s.modes.empty()) throw ConfigError("synthetic data needs at least one mode");
  if (s.components < 1) throw ConfigError("synthetic data needs at least one component");
  if (s.space.empty() || s.space.size() > 3) throw ConfigError("synthetic data needs 1 to 3 spatial axes");
  for (auto d : s.space) {
    if (d < 2) throw ConfigError("every synthetic spatial axis needs at least 2 points");
  }
  if (s.times < 2) throw ConfigError("synthetic data needs at least 2 snapshots");
  if (!(dt > 0.0)) throw ConfigError("synthetic dt must be positive");
  if (s.noise < 0.0) throw ConfigError("synthetic noise level must be non-negative");

  const auto J = static_cast<Eigen::Index>(s.components * shape_product(s.space));
  Eigen::Index cols = 0;
  for (const auto& m : s.modes) cols += m.omega != 0.0 ? 2 : 1;
  if (cols > J) {
    throw ConfigError("synthetic modes need " + std::to_string(cols) + " orthonormal profiles but J = " + std::to_string(J));
  }

  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd g(J, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index j = 0; j < J; ++j) g(j, c) = gauss(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(J, cols);

  SnapshotTensor out(s.components, s.space, s.times, dt);
  Eigen::VectorXd v(J);
  for (std::size_t k = 0; k < s.times; ++k) {
    const double t = static_cast<double>(k) * dt;
    v.setZero();
    Eigen::Index c = 0;
    for (const auto& m : s.modes) {
      const double g = m.a * std::exp(m.delta * t);
      if (m.omega != 0.0) {
        // 2 Re(a u e^{(delta + i omega) t}) with u = (p + i q) / sqrt(2)
        v += std::sqrt(2.0) * g * (basis.col(c) * std::cos(m.omega * t) - basis.col(c + 1) * std::sin(m.omega * t));
        c += 2;
      } else {
        v += g * basis.col(c);
        c += 1;
      }
    }
    for (Eigen::Index j = 0; j < J; ++j) out.at(static_cast<std::size_t>(j), k) = v(j);
  }
  if (s.noise > 0.0) {
    std::normal_distribution<double> noise(0.0, s.noise);
    for (auto& x : out.values().values()) x += noise(rng);
  }
  return out;
}

std::string synthetic_manifest(const SyntheticSection& s, double dt) {
  using json = nlohmann::json;
  json modes = json::array();
  for (const auto& m : s.modes) {
    modes.push_back({{"amplitude", m.a}, {"omega", m.omega}, {"delta", m.delta}});
    if (m.omega != 0.0) modes.push_back({{"amplitude", m.a}, {"omega", -m.omega}, {"delta", m.delta}});
  }
  const json j = {{"modes", modes},
                  {"components", s.components},
                  {"space", s.space},
                  {"times", s.times},
                  {"dt", dt},
                  {"noise", s.noise},
                  {"seed", s.seed},
                  {"profiles", "orthonormal; a pair shares (p + i q) / sqrt(2) and its conjugate"}};
  return j.dump(2);
}

}  // namespace modeflow::io
