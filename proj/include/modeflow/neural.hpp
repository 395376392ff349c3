#pragma once

// Small feed-forward/recurrent networks with exact backpropagation.
//
// A sample is a row-major (rows x cols) array: rows index sequence steps,
// cols index features. Dense layers act on the last axis (row by row, shared
// weights), conv1d slides over rows, lstm consumes the rows as a sequence and
// returns its final hidden state, flatten turns (rows, cols) into (1, rows*cols).

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace modeflow::nn {

enum class Activation { kLinear, kRelu, kElu, kTanh };
enum class LayerKind { kDense, kConv1d, kLstm, kFlatten };
enum class LossKind { kMse, kPaMse };

std::string_view to_string(Activation a) noexcept;
std::string_view to_string(LayerKind k) noexcept;
std::string_view to_string(LossKind k) noexcept;
Activation parse_activation(std::string_view name);
LossKind parse_loss(std::string_view name);

struct Dims {
  std::size_t rows = 1;
  std::size_t cols = 0;

  std::size_t size() const noexcept { return rows * cols; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  std::size_t units = 0;   // dense units, conv filters, lstm units
  std::size_t kernel = 1;  // conv1d only
  Activation activation = Activation::kLinear;

  static LayerSpec dense(std::size_t units, Activation a = Activation::kLinear) { return {LayerKind::kDense, units, 1, a}; }
  static LayerSpec conv1d(std::size_t filters, std::size_t kernel, Activation a = Activation::kLinear) {
    return {LayerKind::kConv1d, filters, kernel, a};
  }
  static LayerSpec lstm(std::size_t units) { return {LayerKind::kLstm, units, 1, Activation::kTanh}; }
  static LayerSpec flatten() { return {LayerKind::kFlatten, 0, 1, Activation::kLinear}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// mse = mean((y - t)^2). pa_mse adds lambda * (sum_{s in species} y_s - 1)^2
/// for every consecutive group of `group` outputs (0 = one group holding the
/// whole output); empty `species` means every entry of the group.
struct LossSpec {
  LossKind kind = LossKind::kMse;
  double lambda = 1.0;
  std::size_t group = 0;
  std::vector<std::size_t> species;

  friend bool operator==(const LossSpec&, const LossSpec&) = default;
};

struct NetworkSpec {
  Dims input;
  std::vector<LayerSpec> layers;
  LossSpec loss;
  std::uint64_t seed = 0;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Loss value and, if `grad` is non-empty, d loss / d y written into it.
double loss_value(const LossSpec& loss, std::span<const double> y, std::span<const double> target,
                  std::span<double> grad = {});

/// Per-call scratch for a forward pass that will be backpropagated.
struct Workspace {
  std::vector<std::vector<double>> acts;  // acts[0] = input, acts[i+1] = output of layer i
  std::vector<std::vector<double>> pre;   // pre-activations (lstm: gates and cell states)
  std::vector<std::vector<double>> grad_acts;

  std::span<const double> output() const { return acts.back(); }
};

class Network {
 public:
  /// Validates that layer shapes compose (ConfigError naming the layer) and
  /// initialises parameters from spec.seed.
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const noexcept { return spec_; }
  Dims input_dims() const noexcept { return dims_.front(); }
  Dims output_dims() const noexcept { return dims_.back(); }
  /// Dims after layer i (i = 0 is the input).
  Dims dims_at(std::size_t i) const { return dims_.at(i); }
  std::size_t layer_count() const noexcept { return spec_.layers.size(); }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }
  std::size_t param_count() const noexcept { return params_.size(); }
  /// Parameters of layer i (weights first, then biases).
  std::span<double> layer_params(std::size_t i);

  /// Pure inference on one sample.
  std::vector<double> forward(std::span<const double> x) const;
  /// Run layers [first, last) on an input shaped like dims_at(first).
  std::vector<double> forward_range(std::span<const double> x, std::size_t first, std::size_t last) const;

  /// Forward pass that records what backward() needs.
  void forward(std::span<const double> x, Workspace& ws) const;
  /// Accumulate parameter gradients into `grad` given d loss / d output.
  /// Returns d loss / d input (valid until the next call with `ws`).
  std::span<const double> backward(Workspace& ws, std::span<const double> dout, std::span<double> grad) const;

  /// Loss of one sample under spec().loss.
  double loss(std::span<const double> x, std::span<const double> target) const;
  /// Loss of one sample; its gradient is added to `grad`.
  double accumulate_gradient(std::span<const double> x, std::span<const double> target, std::span<double> grad,
                             Workspace& ws) const;

 private:
  NetworkSpec spec_;
  std::vector<Dims> dims_;
  std::vector<std::size_t> offsets_;  // layer i owns params_[offsets_[i], offsets_[i+1])
  std::vector<double> params_;
};

/// Samples stored back to back; sample i is x[i * in.size() ...].
struct Dataset {
  Dims in;
  Dims out;
  std::vector<double> x;
  std::vector<double> y;

  std::size_t size() const noexcept { return in.size() ? x.size() / in.size() : 0; }
  std::span<const double> input(std::size_t i) const { return {x.data() + i * in.size(), in.size()}; }
  std::span<const double> target(std::size_t i) const { return {y.data() + i * out.size(), out.size()}; }
  void push(std::span<const double> xi, std::span<const double> yi);
};

struct SplitFractions {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
};

/// Contiguous block sizes (train, val, test) for K snapshots; the test block
/// takes what rounding leaves.
std::array<std::size_t, 3> split_counts(std::size_t K, const SplitFractions& f);

struct TrainOptions {
  double lr = 1e-3;
  std::size_t batch = 32;
  std::size_t epochs = 100;
  std::size_t patience = 20;
  SplitFractions split;
  std::uint64_t seed = 0;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::size_t best_epoch = 0;  // 1-based
  bool stopped_early = false;

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

/// A training problem over several parameter blocks. `sample_grad` adds the
/// gradient of training sample i to `grads` (same layout as `params`) and
/// returns its loss; `train_loss` / `val_loss` evaluate the current weights.
struct GradientProblem {
  std::vector<std::span<double>> params;
  std::size_t train_count = 0;
  std::function<double(std::size_t, std::vector<std::span<double>>&)> sample_grad;
  std::function<double()> train_loss;
  std::function<double()> val_loss;
  std::function<void(const EpochStats&)> on_epoch;
};

/// Mini-batch Adam (0.9, 0.999, 1e-8) with per-epoch shuffling from opts.seed,
/// early stopping on validation loss and restoration of the best weights.
/// Throws NumericalError on a non-finite loss.
TrainHistory optimize(GradientProblem& problem, const TrainOptions& opts);

struct TrainedModel {
  Network net;
  TrainHistory history;
};

TrainedModel train(Network net, const Dataset& train_set, const Dataset& val_set, const TrainOptions& opts,
                   std::function<void(const EpochStats&)> on_epoch = {});

double mean_loss(const Network& net, const Dataset& d);

struct RollingWindowDataset {
  std::size_t q = 0, p = 0;
  std::array<std::size_t, 3> blocks{};  // snapshot counts of train, val, test
  Dataset train, val, test;
};

/// Offset-1 windows of q snapshots (columns of `m`, features = rows) with the
/// next p snapshots as target, never crossing a block boundary. Input dims are
/// (q, features), target dims (p, features). Blocks with a zero fraction are
/// left empty; any other block shorter than q + p is a ConfigError.
RollingWindowDataset make_windows(const Eigen::MatrixXd& m, std::size_t q, std::size_t p, const SplitFractions& split);

/// Checkpoint: "MFNN1", u64 length + JSON (spec and history), u64 count +
/// little-endian float64 parameters in layer order.
void save_checkpoint(std::ostream& os, const TrainedModel& model);
TrainedModel load_checkpoint(std::istream& is);

std::string spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const std::string& text);

}  // namespace modeflow::nn
