#include <algorithm>
#include <string>

#include "modeflow/error.hpp"
#include "modeflow/hybrid.hpp"

namespace modeflow {

std::string_view to_string(Framework f) noexcept { return f == Framework::kFullyDl ? "fully_dl" : "hybrid_dl"; }
std::string_view to_string(ModelKind m) noexcept { return m == ModelKind::kCnn ? "cnn" : "rnn"; }

Framework parse_framework(std::string_view name) {
  if (name == "hybrid_dl") return Framework::kHybridDl;
  if (name == "fully_dl") return Framework::kFullyDl;
  throw ConfigError("unknown framework '" + std::string(name) + "' (expected hybrid_dl or fully_dl)");
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "cnn") return ModelKind::kCnn;
  if (name == "rnn") return ModelKind::kRnn;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected cnn or rnn)");
}

Eigen::MatrixXd RomPipeline::lift(const Eigen::MatrixXd& cols) const {
  if (framework == Framework::kFullyDl) return invert_scaler(cols, scaler1);
  return invert_scaler(W * invert_scaler(cols, scaler2), scaler1);
}

RomPipeline prepare_rom(const SnapshotTensor& data, const ForecastRomConfig& cfg) {
  RomPipeline p;
  p.framework = cfg.framework;
  p.dt = data.dt();
  p.spatial_shape = data.shape();
  p.spatial_shape.pop_back();
  p.truth = reshape_tensor_to_matrix(data).data;
  p.blocks = nn::split_counts(data.times(), cfg.train.split);
  p.scaler1 = fit_scaler(p.truth, cfg.scaling1, cfg.scaling1 == ScalerKind::kMpm ? 0 : data.components());
  const Eigen::MatrixXd scaled = apply_scaler(p.truth, p.scaler1);
  if (cfg.framework == Framework::kHybridDl) {
    if (cfg.svd_rank < 1) throw ConfigError("hybrid_dl needs svd_rank >= 1");
    const SvdFactors f = svd_truncated(scaled, 0.0, cfg.svd_rank);
    p.W = f.W;
    const Eigen::MatrixXd reduced = f.sigma.asDiagonal() * f.T.transpose();
    p.scaler2 = fit_scaler(reduced, cfg.scaling2, cfg.scaling2 == ScalerKind::kMpm ? 0 : f.rank());
    p.features = apply_scaler(reduced, p.scaler2);
  } else {
    p.scaler2 = ScalerSpec{};
    p.features = scaled;
  }
  p.truncated = p.lift(p.features);
  return p;
}

nn::NetworkSpec forecast_network(const ForecastRomConfig& cfg, std::size_t features) {
  using nn::LayerSpec;
  nn::NetworkSpec s;
  s.input = {cfg.q, features};
  s.seed = cfg.train.seed;
  if (cfg.model == ModelKind::kRnn) {
    s.layers = {LayerSpec::lstm(cfg.hidden), LayerSpec::dense(cfg.hidden, cfg.hidden_activation)};
  } else {
    s.layers = {LayerSpec::conv1d(cfg.cnn_filters, cfg.cnn_kernel, cfg.hidden_activation),
                LayerSpec::conv1d(cfg.cnn_filters, cfg.cnn_kernel, cfg.hidden_activation), LayerSpec::flatten(),
                LayerSpec::dense(cfg.hidden, cfg.hidden_activation)};
  }
  s.layers.push_back(LayerSpec::dense(cfg.p * features, cfg.output_activation));
  return s;
}

ForecastResult rollout(const RomPipeline& pipe, std::size_t q, const Predictor& predictor) {
  const std::size_t start = pipe.test_start();
  const std::size_t n = pipe.blocks[2];
  if (n == 0) throw ConfigError("forecast: the test block is empty");
  if (start < q) throw ConfigError("forecast: fewer than q snapshots precede the test block");
  const Eigen::Index F = pipe.features.rows();

  Eigen::MatrixXd history(F, static_cast<Eigen::Index>(q + n));
  history.leftCols(static_cast<Eigen::Index>(q)) = pipe.features.middleCols(static_cast<Eigen::Index>(start - q),
                                                                             static_cast<Eigen::Index>(q));
  std::size_t filled = 0;
  while (filled < n) {
    const Eigen::MatrixXd window = history.middleCols(static_cast<Eigen::Index>(filled), static_cast<Eigen::Index>(q));
    const Eigen::MatrixXd next = predictor(window, start + filled);
    if (next.rows() != F || next.cols() < 1) throw ConfigError("forecast: predictor returned the wrong shape");
    const auto take = std::min<Eigen::Index>(next.cols(), static_cast<Eigen::Index>(n - filled));
    history.middleCols(static_cast<Eigen::Index>(q + filled), take) = next.leftCols(take);
    filled += static_cast<std::size_t>(take);
  }

  ForecastResult r;
  r.test_start = start;
  r.predicted_features = history.rightCols(static_cast<Eigen::Index>(n));
  r.predicted = pipe.lift(r.predicted_features);
  const Eigen::MatrixXd truth = pipe.truth.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(n));
  r.rrmse = rrmse(truth, r.predicted);
  r.truncation_rrmse = rrmse(truth, pipe.truncated.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(n)));
  r.per_snapshot_rrmse = per_snapshot_rrmse(truth, r.predicted);
  return r;
}

ForecastResult forecast_rom(const SnapshotTensor& data, const ForecastRomConfig& cfg,
                            std::function<void(const nn::EpochStats&)> on_epoch) {
  const RomPipeline pipe = prepare_rom(data, cfg);
  const auto F = static_cast<std::size_t>(pipe.features.rows());
  const nn::RollingWindowDataset windows = nn::make_windows(pipe.features, cfg.q, cfg.p, cfg.train.split);
  nn::TrainedModel model = nn::train(nn::Network(forecast_network(cfg, F)), windows.train, windows.val, cfg.train,
                                     std::move(on_epoch));
  const nn::Network& net = model.net;
  const std::size_t p = cfg.p;
  auto predictor = [&](const Eigen::MatrixXd& window, std::size_t) {
    std::vector<double> x(cfg.q * F);
    for (std::size_t t = 0; t < cfg.q; ++t) {
      for (std::size_t f = 0; f < F; ++f) x[t * F + f] = window(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(t));
    }
    const std::vector<double> y = net.forward(x);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(F), static_cast<Eigen::Index>(p));
    for (std::size_t t = 0; t < p; ++t) {
      for (std::size_t f = 0; f < F; ++f) out(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(t)) = y[t * F + f];
    }
    return out;
  };
  ForecastResult r = rollout(pipe, cfg.q, predictor);
  r.model = std::move(model);
  return r;
}

}  // namespace modeflow
