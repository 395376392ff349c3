#pragma once

// Files, run configuration, synthetic data and artifact directories.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modeflow/hodmd.hpp"
#include "modeflow/hybrid.hpp"
#include "modeflow/repair.hpp"
#include "modeflow/tensor.hpp"

namespace modeflow::io {

// TensorFile: "MFT1", dtype byte, ndim byte, ndim x u64 LE shape, f64 LE payload.
inline constexpr std::uint8_t kDtypeF64 = 0x00;
inline constexpr std::uint8_t kGappyFlag = 0x10;

struct TensorFile {
  Tensor tensor;
  bool gappy = false;  // NaN entries mark gaps
};

void write_tensor(std::ostream& os, const Tensor& t, bool gappy = false);
void write_tensor_file(const std::filesystem::path& path, const Tensor& t, bool gappy = false);
TensorFile read_tensor(std::istream& is);
TensorFile read_tensor_file(const std::filesystem::path& path);

/// Header row of labels, one row per snapshot. Returns a (J, K) tensor; empty
/// cells and "nan" become NaN.
Tensor read_csv(std::istream& is);
Tensor read_csv_file(const std::filesystem::path& path);

struct SvdSection {
  double tol = 1e-3;
  std::optional<Eigen::Index> max_rank;
};

struct HosvdSection {
  std::vector<double> tols{1e-3};  // one shared value or one per axis
};

struct HodmdSection {
  std::size_t d = 15;
  std::vector<double> eps_svd{1e-3};
  double eps_a = 1e-3;
  int max_iters = 20;  // mdhodmd iterations
  bool iterative = false;
};

struct DmdForecastSection {
  double eps_perm = 1e-3;
  bool freeze_growth = false;
  double horizon = 3.0;  // multiple of the training window
  std::size_t d = 15;
  double eps_svd = 1e-3;
  double eps_a = 1e-3;
};

/// One generated mode; omega != 0 stands for a conjugate pair.
struct SyntheticModeSpec {
  double a = 1.0;
  double omega = 0.0;
  double delta = 0.0;
};

struct SyntheticSection {
  std::vector<SyntheticModeSpec> modes;  // filled by the CLI when empty
  std::size_t components = 1;
  Shape space{16, 12};
  std::size_t times = 200;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

struct RunConfig {
  double dt = 1.0;  // used when an input file carries no time step
  SvdSection svd;
  HosvdSection hosvd;
  HodmdSection hodmd;
  GappyConfig gappy;
  SuperResConfig superres;
  DmdForecastSection dmd_forecast;
  ForecastRomConfig forecast_nn;
  ReconstructionConfig reconstruct;
  AeConfig autoencode;
  SyntheticSection synthetic;
};

/// Unknown keys and wrong types raise ConfigError naming the key path.
RunConfig parse_config(const std::string& json);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& cfg);

/// Ground truth written next to generated data.
std::string synthetic_manifest(const SyntheticSection& s, double dt);

/// Snapshots at t = k dt; dt is the run-wide time step.
SnapshotTensor generate_synthetic(const SyntheticSection& s, double dt);

/// Output directory for one run. Creating over an existing path is an error.
class ArtifactDir {
 public:
  explicit ArtifactDir(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path path(const std::string& name) const { return root_ / name; }
  void write_tensor(const std::string& name, const Tensor& t) const;
  void write_text(const std::string& name, const std::string& text) const;

 private:
  std::filesystem::path root_;
};

void write_spectrum_svg(std::ostream& os, const std::vector<SpectrumRow>& rows);
/// Diverging blue-white-red colour map, symmetric about zero.
void write_heatmap_ppm(std::ostream& os, const Eigen::MatrixXd& field);

}  // namespace modeflow::io
