#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "modeflow/error.hpp"
#include "modeflow/hodmd.hpp"
#include "modeflow/hosvd.hpp"
#include "modeflow/hybrid.hpp"
#include "modeflow/io.hpp"
#include "modeflow/repair.hpp"
#include "modeflow/svd.hpp"

namespace modeflow::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Collects report.json fields; timings are the only run-dependent entries.
class Report {
 public:
  Report(std::string command, const io::RunConfig& cfg) : start_(Clock::now()) {
    j_["command"] = std::move(command);
    j_["config"] = json::parse(io::config_to_json(cfg));
    j_["rrmse"] = nullptr;
    j_["ranks"] = json::array();
    j_["warnings"] = json::array();
  }

  json& operator[](const char* key) { return j_[key]; }
  void warn(const std::vector<std::string>& w) {
    for (const auto& s : w) j_["warnings"].push_back(s);
  }
  void lap(const char* name) {
    const auto now = Clock::now();
    j_["timings"][name] = std::chrono::duration<double>(now - lap_).count();
    lap_ = now;
  }

  void write(const io::ArtifactDir& dir) {
    j_["timings"]["total_s"] = std::chrono::duration<double>(Clock::now() - start_).count();
    dir.write_text("report.json", j_.dump(2) + "\n");
    std::cout << "wrote " << dir.root().string() << "\n";
  }

 private:
  json j_;
  Clock::time_point start_;
  Clock::time_point lap_ = Clock::now();
};

io::RunConfig load_config(const std::string& path) {
  return path.empty() ? io::RunConfig{} : io::load_config(path);
}

void check_output_free(const std::string& out) {
  if (fs::exists(out)) throw Error("output directory '" + out + "' already exists; choose a new path");
}

io::TensorFile load_input(const std::string& path) {
  if (fs::path(path).extension() == ".csv") {
    io::TensorFile f{io::read_csv_file(path), false};
    for (double v : f.tensor.values()) f.gappy = f.gappy || std::isnan(v);
    return f;
  }
  return io::read_tensor_file(path);
}

void reject_gaps(const Tensor& t, const std::string& path) {
  for (double v : t.values()) {
    if (std::isnan(v)) throw ConfigError("'" + path + "' contains gaps; run 'repair gappy' first");
  }
}

struct Setup {
  io::RunConfig cfg;
  Tensor raw;
  double dt = 1.0;
};

Setup prepare(const RunArgs& a, bool allow_gaps = false) {
  check_output_free(a.output);
  Setup s;
  s.cfg = load_config(a.config);
  if (a.dt) s.cfg.dt = *a.dt;
  if (a.seed) {
    s.cfg.forecast_nn.train.seed = *a.seed;
    s.cfg.reconstruct.train.seed = *a.seed;
    s.cfg.autoencode.train.seed = *a.seed;
  }
  s.dt = s.cfg.dt;
  s.raw = load_input(a.input).tensor;
  if (!allow_gaps) reject_gaps(s.raw, a.input);
  return s;
}

Tensor matrix_tensor(const Eigen::MatrixXd& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) t[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
  }
  return t;
}

Tensor vector_tensor(const Eigen::VectorXd& v) {
  return Tensor({static_cast<std::size_t>(v.size())}, std::vector<double>(v.data(), v.data() + v.size()));
}

// J x n columns laid out as (spatial_shape..., n).
Tensor field_tensor(const Eigen::MatrixXd& cols, Shape spatial) {
  Tensor m = matrix_tensor(cols);
  spatial.push_back(static_cast<std::size_t>(cols.cols()));
  return Tensor(std::move(spatial), std::move(m.values()));
}

// Shape (spatial..., K) of the user's file, 2-d inputs included.
Shape file_spatial(const Tensor& raw) { return Shape(raw.shape().begin(), raw.shape().end() - 1); }

std::optional<Tensor> load_truth(const RunArgs& a) {
  if (a.truth.empty()) return std::nullopt;
  Tensor t = load_input(a.truth).tensor;
  reject_gaps(t, a.truth);
  return t;
}

void set_truth_rrmse(Report& r, const RunArgs& a, const Tensor& result) {
  if (auto truth = load_truth(a)) {
    if (truth->size() != result.size()) {
      throw ConfigError("--truth has " + std::to_string(truth->size()) + " entries, the result has " +
                        std::to_string(result.size()));
    }
    r["rrmse"] = rrmse(Tensor({truth->size()}, truth->values()), Tensor({result.size()}, result.values()));
  }
}

std::string spectrum_csv(const std::vector<SpectrumRow>& rows) {
  std::ostringstream os;
  write_spectrum_csv(os, rows);
  return os.str();
}

json mode_table(const DmdExpansion& e) {
  json rows = json::array();
  for (const auto& m : paired_spectrum(e)) {
    rows.push_back({{"omega", m.omega}, {"delta", m.delta}, {"amplitude", m.amplitude}, {"kind", mode_kind(m.delta)}});
  }
  return rows;
}

// First component, first spatial axis down, everything else across.
Eigen::MatrixXd heatmap_view(const Eigen::VectorXd& v, const Shape& spatial) {
  if (spatial.size() < 2) return Eigen::MatrixXd(v.transpose());
  const auto rows = static_cast<Eigen::Index>(spatial[1]);
  const auto per_component = static_cast<Eigen::Index>(shape_product(spatial) / spatial[0]);
  const Eigen::Index cols = per_component / rows;
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = v(i * cols + j);
  }
  return out;
}

void write_ppm(const io::ArtifactDir& dir, const std::string& name, const Eigen::MatrixXd& m) {
  std::ofstream os(dir.path(name), std::ios::binary);
  io::write_heatmap_ppm(os, m);
}

void write_svg(const io::ArtifactDir& dir, const std::vector<SpectrumRow>& rows) {
  std::ofstream os(dir.path("spectrum.svg"));
  io::write_spectrum_svg(os, rows);
}

void write_history(const io::ArtifactDir& dir, const nn::TrainHistory& h) {
  std::ostringstream os;
  os << "epoch,train_loss,val_loss\n" << std::setprecision(17);
  for (std::size_t i = 0; i < h.train_loss.size(); ++i) {
    os << i + 1 << "," << h.train_loss[i] << "," << h.val_loss[i] << "\n";
  }
  dir.write_text("history.csv", os.str());
}

void write_checkpoint(const io::ArtifactDir& dir, const std::string& name, const nn::TrainedModel& m) {
  std::ofstream os(dir.path(name), std::ios::binary);
  nn::save_checkpoint(os, m);
}

std::function<void(const nn::EpochStats&)> progress(bool verbose) {
  if (!verbose) return {};
  return [](const nn::EpochStats& e) {
    if (e.epoch % 10 == 0 || e.epoch == 1) {
      std::cerr << "epoch " << e.epoch << " train " << e.train_loss << " val " << e.val_loss << "\n";
    }
  };
}

json history_summary(const nn::TrainHistory& h) {
  return {{"epochs_run", h.train_loss.size()},
          {"best_epoch", h.best_epoch},
          {"stopped_early", h.stopped_early},
          {"best_val_loss", h.best_epoch ? json(h.val_loss[h.best_epoch - 1]) : json(nullptr)}};
}

void write_dmd_modes(const io::ArtifactDir& dir, const DmdExpansion& e, const Shape& spatial) {
  Eigen::MatrixXd re(e.J(), static_cast<Eigen::Index>(e.modes.size()));
  Eigen::MatrixXd im(re.rows(), re.cols());
  for (std::size_t m = 0; m < e.modes.size(); ++m) {
    re.col(static_cast<Eigen::Index>(m)) = e.modes[m].u.real();
    im.col(static_cast<Eigen::Index>(m)) = e.modes[m].u.imag();
  }
  dir.write_tensor("modes_real.mft", field_tensor(re, spatial));
  dir.write_tensor("modes_imag.mft", field_tensor(im, spatial));
}

void finish_dmd(Report& r, const io::ArtifactDir& dir, const DmdExpansion& e, const Shape& spatial, bool plots) {
  dir.write_text("spectrum.csv", spectrum_csv(dmd_spectrum_report(e)));
  write_dmd_modes(dir, e, spatial);
  r["mode_table"] = mode_table(e);
  r.warn(e.warnings);
  if (plots) {
    write_svg(dir, paired_spectrum(e));
    if (!e.modes.empty()) write_ppm(dir, "mode1.ppm", heatmap_view(e.modes[0].u.real(), spatial));
  }
}

}  // namespace

void run_decompose(const std::string& method, const RunArgs& a) {
  Setup s = prepare(a);
  Report r("decompose " + method, s.cfg);
  const Shape spatial = file_spatial(s.raw);
  const SnapshotTensor t = SnapshotTensor::from_tensor(s.raw, s.dt);
  const SnapshotMatrix m = reshape_tensor_to_matrix(t);
  r.lap("load_s");

  if (method == "svd") {
    const SvdFactors f = svd_truncated(m, s.cfg.svd.tol, s.cfg.svd.max_rank);
    r.lap("compute_s");
    io::ArtifactDir dir(a.output);
    dir.write_tensor("W.mft", field_tensor(f.W, spatial));
    dir.write_tensor("sigma.mft", vector_tensor(f.sigma));
    dir.write_tensor("T.mft", matrix_tensor(f.T));
    dir.write_tensor("singular_values.mft", vector_tensor(f.all_sigma));
    r["rrmse"] = rrmse(m.data, f.reconstruct());
    r["ranks"] = {f.rank()};
    if (a.plots) write_ppm(dir, "mode1.ppm", heatmap_view(f.W.col(0), spatial));
    r.write(dir);
  } else if (method == "hosvd") {
    const HosvdFactors f = hosvd(t, std::span<const double>(s.cfg.hosvd.tols));
    const Tensor rec = f.reconstruct();
    r.lap("compute_s");
    io::ArtifactDir dir(a.output);
    dir.write_tensor("core.mft", f.core);
    for (std::size_t ax = 0; ax < f.factors.size(); ++ax) {
      dir.write_tensor("factor_" + std::to_string(ax) + ".mft", matrix_tensor(f.factors[ax]));
      dir.write_tensor("singular_values_" + std::to_string(ax) + ".mft", vector_tensor(f.singular_values[ax]));
    }
    r["rrmse"] = rrmse(t.values(), rec);
    r["ranks"] = f.ranks;
    r.write(dir);
  } else if (method == "hodmd") {
    const auto& h = s.cfg.hodmd;
    const DmdExpansion e = hodmd(m, h.d, h.eps_svd.front(), h.eps_a);
    r.lap("compute_s");
    io::ArtifactDir dir(a.output);
    dir.write_tensor("reconstruction.mft", field_tensor(e.reconstruct(m.K()), spatial));
    r["rrmse"] = e.reconstruction_rrmse;
    r["ranks"] = {e.N, e.N_prime, e.M};
    finish_dmd(r, dir, e, spatial, a.plots);
    r.write(dir);
  } else {
    const auto& h = s.cfg.hodmd;
    DmdExpansion e;
    json iter = nullptr;
    if (h.iterative) {
      MdhodmdIterResult it = mdhodmd_iterative(t, h.d, h.eps_svd, h.eps_a, h.max_iters);
      iter = {{"iterations", it.iterations}, {"converged", it.converged}, {"rank_history", it.rank_history}};
      e = std::move(it.expansion);
    } else {
      e = mdhodmd(t, h.d, h.eps_svd, h.eps_a);
    }
    r.lap("compute_s");
    io::ArtifactDir dir(a.output);
    dir.write_tensor("reconstruction.mft", field_tensor(e.reconstruct(m.K()), spatial));
    r["rrmse"] = e.reconstruction_rrmse;
    json ranks = e.ranks;
    ranks.push_back(e.M);
    r["ranks"] = ranks;
    if (!iter.is_null()) r["iteration"] = iter;
    finish_dmd(r, dir, e, spatial, a.plots);
    r.write(dir);
  }
}

void run_repair_gappy(const RunArgs& a) {
  Setup s = prepare(a, true);
  Report r("repair gappy", s.cfg);
  r["method"] = a.method.empty() ? "svd" : a.method;
  const Shape shape = s.raw.shape();
  GapMask mask = extract_gaps(s.raw);
  r["gaps"] = {{"count", mask.count()}, {"fraction", mask.fraction()}};

  Tensor repaired;
  GappyTrace trace;
  if (a.method == "hosvd") {
    const SnapshotTensor t = SnapshotTensor::from_tensor(s.raw, s.dt);
    mask.shape = t.shape();
    GappyTensorResult res = gappy_hosvd(t, mask, s.cfg.gappy);
    repaired = Tensor(shape, std::move(res.tensor.values().values()));
    trace = std::move(res.trace);
  } else {
    const SnapshotMatrix m = reshape_tensor_to_matrix(SnapshotTensor::from_tensor(s.raw, s.dt));
    mask.shape = {static_cast<std::size_t>(m.J()), static_cast<std::size_t>(m.K())};
    GappyResult res = gappy_svd(m.data, mask, s.cfg.gappy);
    repaired = Tensor(shape, std::move(matrix_tensor(res.field).values()));
    trace = std::move(res.trace);
  }
  r.lap("compute_s");
  r["ranks"] = a.method == "hosvd" && !s.cfg.gappy.ranks.empty() ? json(s.cfg.gappy.ranks) : json::array({s.cfg.gappy.rank});
  r["convergence"] = {{"iterations", trace.iterations},
                      {"converged", trace.converged},
                      {"mse_gaps", trace.mse_gaps.empty() ? json(nullptr) : json(trace.mse_gaps.back())},
                      {"rmse_gaps", trace.rmse_gaps.empty() ? json(nullptr) : json(trace.rmse_gaps.back())}};
  r.warn(trace.warnings);
  set_truth_rrmse(r, a, repaired);
  io::ArtifactDir dir(a.output);
  dir.write_tensor("repaired.mft", repaired);
  {
    std::ostringstream os;
    os << "iteration,mse_gaps,rmse_gaps\n" << std::setprecision(17);
    for (std::size_t i = 0; i < trace.mse_gaps.size(); ++i) {
      os << i + 1 << "," << trace.mse_gaps[i] << "," << trace.rmse_gaps[i] << "\n";
    }
    dir.write_text("trace.csv", os.str());
  }
  if (a.plots && repaired.order() == 2) {
    const SnapshotMatrix m = reshape_tensor_to_matrix(SnapshotTensor::from_tensor(repaired, s.dt));
    write_ppm(dir, "repaired.ppm", m.data);
  }
  r.write(dir);
}

void run_superres(const RunArgs& a) {
  Setup s = prepare(a);
  Report r("superres", s.cfg);
  r["method"] = a.method.empty() ? "svd" : a.method;
  Tensor out;
  std::vector<std::string> warnings;
  if (a.method == "hosvd") {
    SuperResTensorResult res = superres_hosvd(SnapshotTensor::from_tensor(s.raw, s.dt), s.cfg.superres);
    r["dt"] = res.tensor.dt();
    out = std::move(res.tensor.values());
    warnings = std::move(res.warnings);
  } else {
    if (s.raw.order() != 2) throw ConfigError("superres --method svd expects a 2-d field; use --method hosvd for tensors");
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> f(
        s.raw.values().data(), static_cast<Eigen::Index>(s.raw.dim(0)), static_cast<Eigen::Index>(s.raw.dim(1)));
    SuperResResult res = superres_svd(f, s.cfg.superres);
    out = matrix_tensor(res.field);
    warnings = std::move(res.warnings);
  }
  r.lap("compute_s");
  r["ranks"] = {s.cfg.superres.rank};
  r["output_shape"] = out.shape();
  r.warn(warnings);
  set_truth_rrmse(r, a, out);
  io::ArtifactDir dir(a.output);
  dir.write_tensor("enlarged.mft", out);
  if (a.plots && out.order() == 2) {
    const SnapshotMatrix m = reshape_tensor_to_matrix(SnapshotTensor::from_tensor(out, 1.0));
    write_ppm(dir, "enlarged.ppm", m.data);
  }
  r.write(dir);
}

void run_forecast_dmd(const RunArgs& a) {
  Setup s = prepare(a);
  Report r("forecast dmd", s.cfg);
  const auto& f = s.cfg.dmd_forecast;
  const Shape spatial = file_spatial(s.raw);
  const SnapshotMatrix m = reshape_tensor_to_matrix(SnapshotTensor::from_tensor(s.raw, s.dt));
  if (!(f.horizon > 0.0)) throw ConfigError("dmd_forecast.horizon must be positive");
  const DmdExpansion e = hodmd(m, f.d, f.eps_svd, f.eps_a);
  const auto steps = static_cast<std::size_t>(std::ceil(f.horizon * static_cast<double>(m.K()) - 1e-9));
  std::vector<double> times(steps);
  for (std::size_t k = 0; k < steps; ++k) times[k] = e.t0 + static_cast<double>(k) * s.dt;
  const DmdForecast fc = dmd_forecast(e, f.eps_perm, f.freeze_growth, times);
  r.lap("compute_s");

  const Tensor out = field_tensor(fc.field.data, spatial);
  r["fit_rrmse"] = e.reconstruction_rrmse;
  r["ranks"] = {e.N, e.N_prime, e.M};
  r["kept_modes"] = fc.kept.size();
  r["imag_residue"] = fc.imag_residue;
  r["forecast_snapshots"] = steps;
  r.warn(fc.warnings);
  set_truth_rrmse(r, a, out);
  io::ArtifactDir dir(a.output);
  dir.write_tensor("forecast.mft", out);
  finish_dmd(r, dir, e, spatial, a.plots);
  r.write(dir);
}

void run_forecast_nn(const RunArgs& a) {
  Setup s = prepare(a);
  Report r("forecast nn", s.cfg);
  const SnapshotTensor t = SnapshotTensor::from_tensor(s.raw, s.dt);
  const ForecastResult res = forecast_rom(t, s.cfg.forecast_nn, progress(a.verbose));
  r.lap("compute_s");
  r["rrmse"] = res.rrmse;
  r["truncation_rrmse"] = res.truncation_rrmse;
  r["test_start"] = res.test_start;
  r["per_snapshot_rrmse"] = res.per_snapshot_rrmse;
  if (s.cfg.forecast_nn.framework == Framework::kHybridDl) r["ranks"] = {s.cfg.forecast_nn.svd_rank};
  r["training"] = history_summary(res.model->history);
  io::ArtifactDir dir(a.output);
  dir.write_tensor("predicted.mft", field_tensor(res.predicted, file_spatial(s.raw)));
  write_checkpoint(dir, "model.ckpt", *res.model);
  write_history(dir, res.model->history);
  r.write(dir);
}

void run_reconstruct_nn(const RunArgs& a) {
  Setup s = prepare(a);
  Report r("reconstruct nn", s.cfg);
  const SnapshotTensor t = SnapshotTensor::from_tensor(s.raw, s.dt);
  const ReconstructionResult res = reconstruct_from_sensors(t, s.cfg.reconstruct, progress(a.verbose));
  r.lap("compute_s");
  r["rrmse"] = res.rrmse;
  r["ranks"] = {s.cfg.reconstruct.rank};
  r["blocks"] = res.blocks;
  r["per_snapshot_rrmse"] = res.per_snapshot_rrmse;
  r["training"] = history_summary(res.history);
  io::ArtifactDir dir(a.output);
  dir.write_tensor("reconstruction.mft", Tensor(s.raw.shape(), res.reconstruction.values().values()));
  write_checkpoint(dir, "decoder1.ckpt", *res.decoder1);
  write_checkpoint(dir, "decoder2.ckpt", *res.decoder2);
  write_history(dir, res.history);
  r.write(dir);
}

void run_autoencode(const RunArgs& a) {
  Setup s = prepare(a);
  Report r("autoencode", s.cfg);
  const Shape spatial = file_spatial(s.raw);
  const SnapshotMatrix m = reshape_tensor_to_matrix(SnapshotTensor::from_tensor(s.raw, s.dt));
  const AeResult res = ae_identify_patterns(m, s.cfg.autoencode);
  r.lap("compute_s");
  r["rrmse"] = res.rrmse;
  r["ranks"] = {s.cfg.autoencode.encoding_dim};
  r["unit_rrmse"] = res.unit_rrmse;
  r["unit_order"] = res.order;
  r["training"] = history_summary(res.model->history);
  io::ArtifactDir dir(a.output);
  dir.write_tensor("patterns.mft", field_tensor(res.patterns, spatial));
  dir.write_tensor("reconstruction.mft", field_tensor(res.reconstruction, spatial));
  write_checkpoint(dir, "model.ckpt", *res.model);
  write_history(dir, res.model->history);
  if (a.plots) write_ppm(dir, "pattern1.ppm", heatmap_view(res.patterns.col(0), spatial));
  r.write(dir);
}

void run_generate_synthetic(const SyntheticArgs& a) {
  check_output_free(a.output);
  io::RunConfig cfg = load_config(a.config);
  auto& g = cfg.synthetic;
  if (a.dt) cfg.dt = *a.dt;
  if (a.noise) g.noise = *a.noise;
  if (a.seed) g.seed = *a.seed;
  if (a.modes || g.modes.empty()) {
    // Default spectrum: decaying amplitudes on well separated frequencies.
    const std::size_t n = a.modes.value_or(2);
    g.modes.clear();
    for (std::size_t i = 0; i < n; ++i) {
      g.modes.push_back({1.0 / static_cast<double>(i + 1), 0.5 * static_cast<double>(i + 1), 0.0});
    }
  }
  Report r("generate synthetic", cfg);
  const SnapshotTensor t = io::generate_synthetic(g, cfg.dt);
  r.lap("compute_s");
  r["shape"] = t.shape();
  io::ArtifactDir dir(a.output);
  dir.write_tensor("data.mft", t.values());
  dir.write_text("manifest.json", io::synthetic_manifest(g, cfg.dt) + "\n");
  r.write(dir);
}

void run_info(const std::string& path) {
  const io::TensorFile f = load_input(path);
  const Tensor& t = f.tensor;
  std::size_t gaps = 0;
  double lo = INFINITY, hi = -INFINITY, sum = 0.0;
  for (double v : t.values()) {
    if (std::isnan(v)) {
      ++gaps;
      continue;
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  std::cout << "file:    " << path << "\n"
            << "dtype:   float64" << (f.gappy ? " (gappy)" : "") << "\n"
            << "shape:   (";
  for (std::size_t i = 0; i < t.order(); ++i) std::cout << (i ? ", " : "") << t.dim(i);
  std::cout << ")\n"
            << "entries: " << t.size() << "\n"
            << "gaps:    " << gaps << "\n";
  if (gaps < t.size()) {
    std::cout << std::setprecision(10) << "min:     " << lo << "\n"
              << "max:     " << hi << "\n"
              << "mean:    " << sum / static_cast<double>(t.size() - gaps) << "\n";
  }
}

}  // namespace modeflow::cli
