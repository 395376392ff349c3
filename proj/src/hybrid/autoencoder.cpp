#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "modeflow/error.hpp"
#include "modeflow/hybrid.hpp"

namespace modeflow {
namespace {

std::span<const double> col_span(const Eigen::MatrixXd& m, Eigen::Index k) {
  return {m.data() + k * m.rows(), static_cast<std::size_t>(m.rows())};
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

AeResult ae_identify_patterns(const SnapshotMatrix& m, const AeConfig& cfg) {
  const Eigen::Index J = m.J(), K = m.K();
  if (J == 0 || K < 2) throw ConfigError("autoencoder: need a non-empty snapshot matrix with K >= 2");
  if (!m.data.allFinite()) throw ConfigError("autoencoder: snapshot matrix contains non-finite values");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    throw ConfigError("autoencoder: train_fraction must lie in (0, 1)");
  }
  const auto k_train = static_cast<std::size_t>(std::floor(static_cast<double>(K) * cfg.train_fraction + 1e-9));
  const std::size_t M = cfg.encoding_dim;
  if (M == 0) throw ConfigError("autoencoder: encoding_dim must be at least 1");
  if (M >= k_train) {
    throw ConfigError("autoencoder: encoding_dim M = " + std::to_string(M) + " must be smaller than K_training = " +
                      std::to_string(k_train));
  }
  if (k_train >= static_cast<std::size_t>(K)) throw ConfigError("autoencoder: no snapshots left for validation");

  nn::NetworkSpec spec;
  spec.input = {1, static_cast<std::size_t>(J)};
  spec.seed = cfg.train.seed;
  for (auto w : cfg.hidden) spec.layers.push_back(nn::LayerSpec::dense(w, cfg.activation));
  spec.layers.push_back(nn::LayerSpec::dense(M));
  for (auto it = cfg.hidden.rbegin(); it != cfg.hidden.rend(); ++it) {
    spec.layers.push_back(nn::LayerSpec::dense(*it, cfg.activation));
  }
  spec.layers.push_back(nn::LayerSpec::dense(static_cast<std::size_t>(J)));
  const std::size_t latent = cfg.hidden.size() + 1;

  nn::Dataset tr{spec.input, spec.input, {}, {}}, va{spec.input, spec.input, {}, {}};
  for (Eigen::Index k = 0; k < K; ++k) {
    auto& d = static_cast<std::size_t>(k) < k_train ? tr : va;
    d.push(col_span(m.data, k), col_span(m.data, k));
  }

  AeResult r;
  r.latent_layer = latent;
  r.model = nn::train(nn::Network(spec), tr, va, cfg.train);
  const nn::Network& net = r.model->net;
  const std::size_t L = net.layer_count();

  Eigen::MatrixXd z(static_cast<Eigen::Index>(M), K);
  r.reconstruction.resize(J, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    z.col(k) = to_vec(net.forward_range(col_span(m.data, k), 0, latent));
    r.reconstruction.col(k) = to_vec(net.forward_range(std::vector<double>(z.col(k).data(), z.col(k).data() + M), latent, L));
  }
  r.rrmse = rrmse(m.data, r.reconstruction);

  const Eigen::VectorXd d0 = to_vec(net.forward_range(std::vector<double>(M, 0.0), latent, L));
  Eigen::MatrixXd patterns(J, static_cast<Eigen::Index>(M));
  std::vector<double> unit_err(M);
  for (std::size_t u = 0; u < M; ++u) {
    std::vector<double> e(M, 0.0);
    e[u] = 1.0;
    patterns.col(static_cast<Eigen::Index>(u)) = to_vec(net.forward_range(e, latent, L)) - d0;
    Eigen::MatrixXd single(J, K);
    for (Eigen::Index k = 0; k < K; ++k) {
      std::vector<double> zu(M, 0.0);
      zu[u] = z(static_cast<Eigen::Index>(u), k);
      single.col(k) = to_vec(net.forward_range(zu, latent, L));
    }
    unit_err[u] = rrmse(m.data, single);
  }
  r.order.resize(M);
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) { return unit_err[a] < unit_err[b]; });
  r.patterns.resize(J, static_cast<Eigen::Index>(M));
  for (std::size_t i = 0; i < M; ++i) {
    r.patterns.col(static_cast<Eigen::Index>(i)) = patterns.col(static_cast<Eigen::Index>(r.order[i]));
    r.unit_rrmse.push_back(unit_err[r.order[i]]);
  }
  return r;
}

}  // namespace modeflow
