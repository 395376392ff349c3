#pragma once

// Applications built on the neural engine: autoencoder pattern
// identification, SVD + network forecasting ROMs, and field reconstruction
// from sparse sensors through two decoders working in parallel.

#include <array>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "modeflow/neural.hpp"
#include "modeflow/scaling.hpp"
#include "modeflow/svd.hpp"
#include "modeflow/tensor.hpp"

namespace modeflow {

struct AeConfig {
  std::size_t encoding_dim = 10;   // M
  std::vector<std::size_t> hidden; // encoder widths; the decoder mirrors them
  nn::Activation activation = nn::Activation::kLinear;
  double train_fraction = 0.8;     // the rest of the snapshots validates
  nn::TrainOptions train;
};

struct AeResult {
  Eigen::MatrixXd patterns;         // J x M, D(e_m) - D(0), in ranked order
  std::vector<std::size_t> order;   // latent unit behind each pattern column
  std::vector<double> unit_rrmse;   // single-unit reconstruction error, ranked order
  Eigen::MatrixXd reconstruction;   // J x K
  double rrmse = 0.0;
  std::size_t latent_layer = 0;     // layers [0, latent_layer) form the encoder
  std::optional<nn::TrainedModel> model;
};

/// Snapshots are samples. Requires M < K_training.
AeResult ae_identify_patterns(const SnapshotMatrix& m, const AeConfig& cfg);

enum class Framework { kHybridDl, kFullyDl };
enum class ModelKind { kCnn, kRnn };

std::string_view to_string(Framework f) noexcept;
std::string_view to_string(ModelKind m) noexcept;
Framework parse_framework(std::string_view name);
ModelKind parse_model_kind(std::string_view name);

struct ForecastRomConfig {
  Framework framework = Framework::kHybridDl;
  ModelKind model = ModelKind::kRnn;
  Eigen::Index svd_rank = 10;  // N, hybrid only
  ScalerKind scaling1 = ScalerKind::kNone;
  ScalerKind scaling2 = ScalerKind::kNone;
  std::size_t q = 10;
  std::size_t p = 1;
  std::size_t hidden = 100;
  nn::Activation hidden_activation = nn::Activation::kElu;
  nn::Activation output_activation = nn::Activation::kLinear;
  std::size_t cnn_filters = 32;
  std::size_t cnn_kernel = 3;
  nn::TrainOptions train;
};

/// Scaled, reduced view of a database and the way back to physical units.
struct RomPipeline {
  Framework framework = Framework::kHybridDl;
  ScalerSpec scaler1, scaler2;
  Eigen::MatrixXd W;         // J x N (hybrid only)
  Eigen::MatrixXd features;  // F x K model-space snapshots
  Eigen::MatrixXd truth;     // J x K original snapshots
  Eigen::MatrixXd truncated; // J x K features lifted back (hybrid: rank-N truncation)
  std::array<std::size_t, 3> blocks{};
  double dt = 1.0;
  Shape spatial_shape;

  /// Model-space columns to physical snapshots.
  Eigen::MatrixXd lift(const Eigen::MatrixXd& cols) const;
  std::size_t test_start() const noexcept { return blocks[0] + blocks[1]; }
};

/// Given the last q model-space snapshots (F x q) and the snapshot index of
/// the first one to predict, return the next p snapshots (F x p).
using Predictor = std::function<Eigen::MatrixXd(const Eigen::MatrixXd& window, std::size_t first_index)>;

RomPipeline prepare_rom(const SnapshotTensor& data, const ForecastRomConfig& cfg);

/// Network used for the configured model (input q x F, output 1 x p*F).
nn::NetworkSpec forecast_network(const ForecastRomConfig& cfg, std::size_t features);

struct ForecastResult {
  Eigen::MatrixXd predicted;         // J x K_test
  Eigen::MatrixXd predicted_features;// F x K_test
  double rrmse = 0.0;                // vs the original test snapshots
  double truncation_rrmse = 0.0;     // of the lifted features on the test block
  std::vector<double> per_snapshot_rrmse;
  std::size_t test_start = 0;
  std::optional<nn::TrainedModel> model;
};

/// Autoregressive rollout over the test block, starting from the q snapshots
/// before it; predictions are fed back as inputs.
ForecastResult rollout(const RomPipeline& pipe, std::size_t q, const Predictor& predictor);

/// Full pipeline: prepare, window, train, roll out, lift, score.
ForecastResult forecast_rom(const SnapshotTensor& data, const ForecastRomConfig& cfg,
                            std::function<void(const nn::EpochStats&)> on_epoch = {});

struct ReconstructionConfig {
  Eigen::Index rank = 5;       // P'
  std::size_t depth = 5;       // layers per decoder, counting input and output
  std::size_t hidden = 13;
  nn::Activation activation = nn::Activation::kRelu;
  std::size_t stride1 = 30;    // sensor spacing along the first spatial axis
  std::size_t stride2 = 30;
  nn::TrainOptions train;

  ReconstructionConfig() {
    train.lr = 0.002;
    train.batch = 23;
    train.epochs = 500;
    train.patience = 500;
    train.split = {0.8, 0.1, 0.1};
  }
};

/// Keep every stride-th point along both spatial axes (index 0 included) of a
/// (components, N1, N2, K) tensor.
SnapshotTensor downsample(const SnapshotTensor& full, std::size_t stride1, std::size_t stride2);

struct ReconstructionResult {
  SnapshotTensor reconstruction;      // same shape as the supervision tensor
  double rrmse = 0.0;                 // held-out (test block) snapshots
  std::vector<double> per_snapshot_rrmse;
  std::array<std::size_t, 3> blocks{};
  nn::TrainHistory history;
  std::optional<nn::TrainedModel> decoder1, decoder2;
};

/// Each (component, snapshot) field is sampled at the sensors, factorised to
/// rank P', and its spatial factors are mapped column by column through two
/// shared decoders (first axis, second axis). The output recombines them with
/// the sensor singular values; training minimises the MSE to the full field.
ReconstructionResult reconstruct_from_sensors(const SnapshotTensor& full, const ReconstructionConfig& cfg,
                                              std::function<void(const nn::EpochStats&)> on_epoch = {});

}  // namespace modeflow
