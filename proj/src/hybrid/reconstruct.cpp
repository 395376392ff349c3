#include <algorithm>
#include <cmath>
#include <string>

#include "modeflow/error.hpp"
#include "modeflow/hybrid.hpp"

namespace modeflow {
namespace {

struct SensorSample {
  Eigen::MatrixXd w;      // n1 x P, columns are decoder-1 inputs
  Eigen::VectorXd sigma;  // P
  Eigen::MatrixXd t;      // n2 x P, columns are decoder-2 inputs
  Eigen::MatrixXd target; // N1 x N2
};

nn::NetworkSpec decoder_spec(std::size_t in, std::size_t out, const ReconstructionConfig& cfg, std::uint64_t seed) {
  nn::NetworkSpec s;
  s.input = {1, in};
  s.seed = seed;
  for (std::size_t i = 0; i + 2 < cfg.depth; ++i) s.layers.push_back(nn::LayerSpec::dense(cfg.hidden, cfg.activation));
  s.layers.push_back(nn::LayerSpec::dense(out));
  return s;
}

// Field predicted by the two decoders; per-column workspaces kept for backprop.
Eigen::MatrixXd predict(const nn::Network& d1, const nn::Network& d2, const SensorSample& s, std::vector<nn::Workspace>& ws1,
                        std::vector<nn::Workspace>& ws2, Eigen::MatrixXd& w_hat, Eigen::MatrixXd& t_hat) {
  const Eigen::Index P = s.sigma.size();
  w_hat.resize(static_cast<Eigen::Index>(d1.output_dims().size()), P);
  t_hat.resize(static_cast<Eigen::Index>(d2.output_dims().size()), P);
  for (Eigen::Index m = 0; m < P; ++m) {
    d1.forward(std::span<const double>(s.w.col(m).data(), static_cast<std::size_t>(s.w.rows())), ws1[m]);
    d2.forward(std::span<const double>(s.t.col(m).data(), static_cast<std::size_t>(s.t.rows())), ws2[m]);
    w_hat.col(m) = Eigen::Map<const Eigen::VectorXd>(ws1[m].output().data(), w_hat.rows());
    t_hat.col(m) = Eigen::Map<const Eigen::VectorXd>(ws2[m].output().data(), t_hat.rows());
  }
  return w_hat * s.sigma.asDiagonal() * t_hat.transpose();
}

}  // namespace

SnapshotTensor downsample(const SnapshotTensor& full, std::size_t stride1, std::size_t stride2) {
  if (full.shape().size() != 4) throw ConfigError("downsample: expected a (components, N1, N2, K) tensor");
  if (stride1 == 0 || stride2 == 0) throw ConfigError("downsample: strides must be positive");
  const auto& s = full.shape();
  const std::size_t C = s[0], N1 = s[1], N2 = s[2], K = s[3];
  const std::size_t n1 = (N1 + stride1 - 1) / stride1, n2 = (N2 + stride2 - 1) / stride2;
  SnapshotTensor out(C, {n1, n2}, K, full.dt());
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < n1; ++i) {
      for (std::size_t j = 0; j < n2; ++j) {
        for (std::size_t k = 0; k < K; ++k) {
          out.at((c * n1 + i) * n2 + j, k) = full.at((c * N1 + i * stride1) * N2 + j * stride2, k);
        }
      }
    }
  }
  return out;
}

ReconstructionResult reconstruct_from_sensors(const SnapshotTensor& full, const ReconstructionConfig& cfg,
                                              std::function<void(const nn::EpochStats&)> on_epoch) {
  if (cfg.depth < 2) throw ConfigError("reconstruction: decoder depth must be at least 2 (input and output)");
  if (cfg.rank < 1) throw ConfigError("reconstruction: rank must be at least 1");
  const SnapshotTensor ds = downsample(full, cfg.stride1, cfg.stride2);
  const auto& fs = full.shape();
  const std::size_t C = fs[0], N1 = fs[1], N2 = fs[2], K = fs[3];
  const std::size_t n1 = ds.shape()[1], n2 = ds.shape()[2];
  const Eigen::Index P = cfg.rank;
  if (static_cast<std::size_t>(P) > std::min(n1, n2)) {
    throw ConfigError("reconstruction: rank " + std::to_string(P) + " exceeds the down-sampled dims " + std::to_string(n1) +
                      "x" + std::to_string(n2));
  }

  // Samples ordered by snapshot, then component, so blocks split in time.
  std::vector<SensorSample> samples;
  samples.reserve(C * K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t c = 0; c < C; ++c) {
      Eigen::MatrixXd x(static_cast<Eigen::Index>(n1), static_cast<Eigen::Index>(n2));
      for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n2; ++j) x(i, j) = ds.at((c * n1 + i) * n2 + j, k);
      }
      SvdFactors f = svd_truncated(x, 0.0, P);
      if (!(f.sigma(P - 1) > 1e-12 * std::max(f.sigma(0), 1e-300))) {
        throw ConfigError("reconstruction: rank " + std::to_string(P) + " exceeds the rank of down-sampled snapshot " +
                          std::to_string(k) + " (component " + std::to_string(c) + ")");
      }
      SensorSample s{std::move(f.W), std::move(f.sigma), std::move(f.T),
                     Eigen::MatrixXd(static_cast<Eigen::Index>(N1), static_cast<Eigen::Index>(N2))};
      for (std::size_t i = 0; i < N1; ++i) {
        for (std::size_t j = 0; j < N2; ++j) s.target(i, j) = full.at((c * N1 + i) * N2 + j, k);
      }
      samples.push_back(std::move(s));
    }
  }

  ReconstructionResult r{full, 0.0, {}, nn::split_counts(K, cfg.train.split), {}, {}, {}};
  if (r.blocks[0] == 0 || r.blocks[1] == 0) throw ConfigError("reconstruction: training and validation blocks must be non-empty");
  const std::size_t n_train = r.blocks[0] * C, n_val = r.blocks[1] * C;

  nn::Network d1(decoder_spec(n1, N1, cfg, cfg.train.seed));
  nn::Network d2(decoder_spec(n2, N2, cfg, cfg.train.seed + 1));
  std::vector<nn::Workspace> ws1(static_cast<std::size_t>(P)), ws2(static_cast<std::size_t>(P));
  Eigen::MatrixXd w_hat, t_hat;
  const double n_out = static_cast<double>(N1 * N2);

  auto sample_loss = [&](std::size_t i) {
    const Eigen::MatrixXd pred = predict(d1, d2, samples[i], ws1, ws2, w_hat, t_hat);
    return (pred - samples[i].target).squaredNorm() / n_out;
  };
  auto block_loss = [&](std::size_t first, std::size_t count) {
    double sum = 0.0;
    for (std::size_t i = first; i < first + count; ++i) sum += sample_loss(i);
    return sum / static_cast<double>(count);
  };

  nn::GradientProblem problem;
  problem.params = {d1.params(), d2.params()};
  problem.train_count = n_train;
  problem.sample_grad = [&](std::size_t i, std::vector<std::span<double>>& g) {
    const SensorSample& s = samples[i];
    const Eigen::MatrixXd pred = predict(d1, d2, s, ws1, ws2, w_hat, t_hat);
    const Eigen::MatrixXd resid = pred - s.target;
    const Eigen::MatrixXd grad = (2.0 / n_out) * resid;
    const Eigen::MatrixXd dw = grad * t_hat * s.sigma.asDiagonal();
    const Eigen::MatrixXd dt = grad.transpose() * w_hat * s.sigma.asDiagonal();
    for (Eigen::Index m = 0; m < P; ++m) {
      d1.backward(ws1[m], std::span<const double>(dw.col(m).data(), static_cast<std::size_t>(dw.rows())), g[0]);
      d2.backward(ws2[m], std::span<const double>(dt.col(m).data(), static_cast<std::size_t>(dt.rows())), g[1]);
    }
    return resid.squaredNorm() / n_out;
  };
  problem.train_loss = [&] { return block_loss(0, n_train); };
  problem.val_loss = [&] { return block_loss(n_train, n_val); };
  problem.on_epoch = std::move(on_epoch);
  r.history = nn::optimize(problem, cfg.train);

  // Reassemble every snapshot and score the held-out block.
  Eigen::MatrixXd truth_test(static_cast<Eigen::Index>(C * N1 * N2), static_cast<Eigen::Index>(r.blocks[2]));
  Eigen::MatrixXd pred_test(truth_test.rows(), truth_test.cols());
  const std::size_t test_start = r.blocks[0] + r.blocks[1];
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t c = 0; c < C; ++c) {
      const SensorSample& s = samples[k * C + c];
      const Eigen::MatrixXd pred = predict(d1, d2, s, ws1, ws2, w_hat, t_hat);
      for (std::size_t i = 0; i < N1; ++i) {
        for (std::size_t j = 0; j < N2; ++j) {
          r.reconstruction.at((c * N1 + i) * N2 + j, k) = pred(i, j);
          if (k >= test_start) {
            const auto row = static_cast<Eigen::Index>((c * N1 + i) * N2 + j);
            const auto col = static_cast<Eigen::Index>(k - test_start);
            pred_test(row, col) = pred(i, j);
            truth_test(row, col) = s.target(i, j);
          }
        }
      }
    }
  }
  if (r.blocks[2] > 0) {
    r.rrmse = rrmse(truth_test, pred_test);
    r.per_snapshot_rrmse = per_snapshot_rrmse(truth_test, pred_test);
  }
  r.decoder1 = nn::TrainedModel{std::move(d1), r.history};
  r.decoder2 = nn::TrainedModel{std::move(d2), r.history};
  return r;
}

}  // namespace modeflow
