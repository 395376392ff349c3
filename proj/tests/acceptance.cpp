// Acceptance gate: one PASS/FAIL line per criterion. Optional arguments pick
// criteria by number, e.g. `acceptance 3 7`.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "modeflow/error.hpp"
#include "modeflow/hodmd.hpp"
#include "modeflow/hosvd.hpp"
#include "modeflow/hybrid.hpp"
#include "modeflow/io.hpp"
#include "modeflow/repair.hpp"
#include "nn_gradcheck.hpp"
#include "support.hpp"

using namespace modeflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Closest fitted mode (over omega, delta) to a target; inf when none.
double mode_error(const DmdExpansion& e, double a, double omega, double delta) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : e.modes) {
    if (std::abs(m.omega - omega) > 1e-3 || std::abs(m.delta - delta) > 1e-3) continue;
    best = std::min(best, std::max({std::abs(m.omega - omega), std::abs(m.delta - delta), std::abs(m.amplitude - a) / a}));
  }
  return best;
}

Outcome c1_hodmd() {
  const std::vector<testing::TrueMode> modes = {{1.0, 0.7, 0.0}, {0.5, 1.6, -0.03}, {0.3, 2.9, 0.01}};
  const double dt = 0.05;
  const SnapshotMatrix m{testing::dmd_signal(30, 400, dt, modes, 11), dt};
  Stopwatch clock;
  double worst = 0.0;
  std::size_t count_ok = 0;
  for (std::size_t d : {40u, 100u, 200u}) {
    const DmdExpansion e = hodmd(m, d, 1e-10, 1e-8);
    if (e.modes.size() == 6) ++count_ok;
    for (const auto& t : modes) {
      worst = std::max({worst, mode_error(e, t.a, t.omega, t.delta), mode_error(e, t.a, -t.omega, t.delta)});
    }
  }
  const double s = clock.seconds();
  return {count_ok == 3 && worst < 1e-6 && s < 10.0,
          fmt("worst omega/delta/amplitude error %.2e over d = 40, 100, 200; %zu/3 fits with 6 modes; %.2f s", worst,
              count_ok, s)};
}

Outcome c2_hosvd() {
  const Tensor t = testing::random_tensor({4, 20, 20, 30}, 5);
  const HosvdFactors f = hosvd(t, 0.0);
  const double recon = rrmse(t, f.reconstruct());
  double sv = 0.0;
  for (std::size_t a = 0; a < 4; ++a) {
    const Eigen::VectorXd want = Eigen::JacobiSVD<Eigen::MatrixXd>(testing::brute_unfold(t, a)).singularValues();
    const Eigen::VectorXd& got = f.singular_values[a];
    if (got.size() != want.size()) return {false, fmt("axis %zu has %td singular values, oracle %td", a, got.size(), want.size())};
    sv = std::max(sv, (got - want).cwiseAbs().maxCoeff() / want(0));
  }
  return {recon < 1e-10 && sv < 1e-10, fmt("reconstruction error %.2e, singular value deviation %.2e", recon, sv)};
}

Outcome c3_gappy() {
  const Eigen::Index N1 = 449, N2 = 199, R = 10;
  const int snapshots = 20;
  Eigen::MatrixXd F(N1, R), G(N2, R);
  for (Eigen::Index r = 0; r < R; ++r) {
    for (Eigen::Index i = 0; i < N1; ++i) F(i, r) = std::sin((r + 1) * M_PI * double(i) / double(N1 - 1));
    for (Eigen::Index j = 0; j < N2; ++j) G(j, r) = std::sin((r + 1) * M_PI * double(j) / double(N2 - 1));
  }
  GappyConfig cfg;
  cfg.rank = R;
  cfg.init_fill = InitFill::kZero;
  cfg.tol_gaps = 1e-6;
  cfg.max_iters = 500;
  double err2 = 0.0, norm2 = 0.0, gap_fraction = 0.0;
  int worst_iters = 0, converged = 0;
  Stopwatch clock;
  for (int s = 0; s < snapshots; ++s) {
    Eigen::VectorXd sigma(R);
    for (Eigen::Index r = 0; r < R; ++r) sigma(r) = (1.0 + 0.3 * std::sin(0.7 * s + r)) / (1.0 + 0.25 * r);
    const Eigen::MatrixXd truth = F * sigma.asDiagonal() * G.transpose();
    std::mt19937_64 rng(100 + s);
    std::uniform_real_distribution<double> u;
    Eigen::MatrixXd field = truth;
    GapMask mask{{std::size_t(N1), std::size_t(N2)}, std::vector<std::uint8_t>(std::size_t(N1 * N2), 0)};
    for (Eigen::Index i = 0; i < N1; ++i) {
      for (Eigen::Index j = 0; j < N2; ++j) {
        if (u(rng) < 0.63) {
          mask.gaps[std::size_t(i * N2 + j)] = 1;
          field(i, j) = 0.0;
        }
      }
    }
    gap_fraction += mask.fraction() / snapshots;
    const GappyResult r = gappy_svd(field, mask, cfg);
    err2 += (r.field - truth).squaredNorm();
    norm2 += truth.squaredNorm();
    worst_iters = std::max(worst_iters, r.trace.iterations);
    converged += r.trace.converged ? 1 : 0;
  }
  const double s = clock.seconds();
  const double e = std::sqrt(err2 / norm2);
  return {e < 0.02 && converged == snapshots && worst_iters <= 500 && s < 60.0,
          fmt("RRMSE %.2e at %.1f%% gaps; %d/%d converged, at most %d iterations; %.1f s", e, 100 * gap_fraction,
              converged, snapshots, worst_iters, s)};
}

Outcome c4_superres() {
  const Eigen::Index N1 = 512, N2 = 256, R = 10;
  Eigen::MatrixXd fine = Eigen::MatrixXd::Zero(N1, N2);
  for (Eigen::Index r = 0; r < R; ++r) {
    Eigen::VectorXd phi(N1), psi(N2);
    for (Eigen::Index i = 0; i < N1; ++i) phi(i) = std::cos(0.5 * r * M_PI * double(i) / double(N1 - 1) + 0.3 * r);
    for (Eigen::Index j = 0; j < N2; ++j) psi(j) = std::sin((r + 1) * M_PI * double(j) / (3.0 * double(N2 - 1)) + 0.2);
    fine += phi * psi.transpose() / (1.0 + r);
  }
  Eigen::MatrixXd coarse(N1 / 8, N2 / 8);
  for (Eigen::Index i = 0; i < coarse.rows(); ++i) {
    for (Eigen::Index j = 0; j < coarse.cols(); ++j) coarse(i, j) = fine(8 * i, 8 * j);
  }
  SuperResConfig cfg;
  cfg.doublings = 3;
  cfg.rank = R;
  const SuperResResult r = superres_svd(coarse, cfg);
  if (r.field.rows() != N1 || r.field.cols() != N2) return {false, "enlarged field has the wrong shape"};
  const double e = rrmse(fine, r.field);

  // Constant fields, matrix and tensor variants.
  const double c = 2.75;
  const SuperResResult cm = superres_svd(Eigen::MatrixXd::Constant(9, 7, c), cfg);
  double const_err = (cm.field.array() - c).abs().maxCoeff();
  SnapshotTensor ct(2, {5, 4}, 6, 1.0);
  for (auto& v : ct.values().values()) v = c;
  SuperResConfig tc;
  tc.doublings = 3;
  tc.rank = 3;
  const SuperResTensorResult ctr = superres_hosvd(ct, tc);
  for (double v : ctr.tensor.values().values()) const_err = std::max(const_err, std::abs(v - c));
  return {e < 0.03 && const_err <= 1e-12 * c,
          fmt("RRMSE %.2e on %tdx%td from %tdx%td; constant field max deviation %.1e", e, N1, N2, coarse.rows(),
              coarse.cols(), const_err)};
}

Outcome c5_dmd_forecast() {
  const double dt = 0.1;
  const Eigen::Index J = 12, K = 200;
  const std::vector<testing::TrueMode> all = {{0.5, 0.0, 0.0}, {1.0, 0.8, 0.0}, {2.0, 1.9, -0.1}, {0.8, 3.1, -0.05}};
  std::vector<testing::TrueMode> permanent = all;
  permanent[2].a = 0.0;
  permanent[3].a = 0.0;
  const SnapshotMatrix train{testing::dmd_signal(J, K, dt, all, 3), dt};
  const DmdExpansion e = hodmd(train, 40, 1e-10, 1e-8);

  std::vector<double> times;
  for (Eigen::Index k = K; k < 3 * K; ++k) times.push_back(double(k) * dt);
  Stopwatch rom_clock;
  const DmdForecast f = dmd_forecast(e, 1e-3, false, times);
  const double rom_s = rom_clock.seconds();
  Stopwatch gen_clock;
  const Eigen::MatrixXd attractor = testing::dmd_signal(J, 3 * K, dt, permanent, 3).rightCols(2 * K);
  const double gen_s = gen_clock.seconds();
  const double err = rrmse(attractor, f.field.data);
  return {err < 0.01, fmt("RRMSE %.2e over [T, 3T] with %zu permanent modes kept; speedup vs regeneration %.1fx (%.2e s vs %.2e s)",
                          err, f.kept.size(), gen_s / std::max(rom_s, 1e-9), rom_s, gen_s)};
}

Outcome c6_gradients() {
  std::size_t failures = 0, checked = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    testing::RandomNet r = testing::random_net(seed);
    nn::Network net(r.spec);
    const auto g = testing::gradient_check(net, r.x, r.t);
    failures += g.failures;
    checked += g.checked;
    worst = std::max(worst, g.worst_rel);
  }

  // Replay: train the same conv1d + lstm net twice.
  nn::NetworkSpec spec{{6, 2}, {nn::LayerSpec::conv1d(3, 2, nn::Activation::kTanh), nn::LayerSpec::lstm(4), nn::LayerSpec::dense(2)}, {}, 9};
  nn::Dataset tr{{6, 2}, {1, 2}, {}, {}}, va{{6, 2}, {1, 2}, {}, {}};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int i = 0; i < 48; ++i) {
    std::vector<double> x(12), y(2);
    for (auto& v : x) v = g(rng);
    y[0] = x[10] - x[0];
    y[1] = 0.5 * x[11];
    (i % 6 == 0 ? va : tr).push(x, y);
  }
  nn::TrainOptions o;
  o.lr = 0.01;
  o.batch = 8;
  o.epochs = 30;
  o.seed = 4;
  const auto a = nn::train(nn::Network(spec), tr, va, o);
  const auto b = nn::train(nn::Network(spec), tr, va, o);
  const bool same = a.history == b.history &&
                    std::equal(a.net.params().begin(), a.net.params().end(), b.net.params().begin());
  return {failures == 0 && same, fmt("%zu/%zu gradient entries off (worst rel %.1e) over 25 nets; replay %s", failures,
                                     checked, worst, same ? "bit-identical" : "differs")};
}

SnapshotTensor travelling_wave(std::size_t J, std::size_t K, double dt, double omega, double third) {
  SnapshotTensor t(1, {J}, K, dt);
  for (std::size_t j = 0; j < J; ++j) {
    const double x = double(j) / double(J);
    for (std::size_t k = 0; k < K; ++k) {
      const double tk = double(k) * dt;
      t.at(j, k) = std::sin(2 * M_PI * x - omega * tk) + third * std::cos(6 * M_PI * x) * std::sin(2.3 * tk);
    }
  }
  return t;
}

Outcome c7_forecast() {
  // Oracle: rank-3 data truncated to N = 2, so the truncation error is not zero.
  const SnapshotTensor data3 = travelling_wave(40, 150, 0.25, 0.5, 0.2);
  double oracle_gap = 0.0, trunc = 0.0;
  for (auto s : {ScalerKind::kNone, ScalerKind::kAuto, ScalerKind::kMpm}) {
    ForecastRomConfig cfg;
    cfg.svd_rank = 2;
    cfg.scaling1 = s == ScalerKind::kMpm ? ScalerKind::kAuto : s;
    cfg.scaling2 = s;
    const RomPipeline pipe = prepare_rom(data3, cfg);
    const ForecastResult r = rollout(pipe, cfg.q, [&pipe](const Eigen::MatrixXd&, std::size_t first) {
      return Eigen::MatrixXd(pipe.features.middleCols(Eigen::Index(first), 1));
    });
    oracle_gap = std::max(oracle_gap, std::abs(r.rrmse - r.truncation_rrmse));
    trunc = std::max(trunc, r.truncation_rrmse);
  }

  const SnapshotTensor data = travelling_wave(40, 200, 0.25, 0.5, 0.0);
  ForecastRomConfig cfg;
  cfg.framework = Framework::kHybridDl;
  cfg.model = ModelKind::kRnn;
  cfg.svd_rank = 2;
  cfg.q = 10;
  cfg.p = 1;
  cfg.scaling1 = ScalerKind::kAuto;
  cfg.scaling2 = ScalerKind::kMpm;
  cfg.hidden = 100;
  cfg.hidden_activation = nn::Activation::kElu;
  cfg.output_activation = nn::Activation::kTanh;
  cfg.train.lr = 0.005;
  cfg.train.batch = 12;
  cfg.train.epochs = 400;
  cfg.train.patience = 400;
  cfg.train.split = {0.65, 0.15, 0.2};
  cfg.train.seed = 0;
  Stopwatch clock;
  const ForecastResult r = forecast_rom(data, cfg);
  const double s = clock.seconds();
  return {oracle_gap < 1e-10 && r.rrmse < 0.10 && s < 300.0,
          fmt("oracle |RRMSE - truncation| %.1e (truncation %.2e); RNN test RRMSE %.2e over %td snapshots, %zu epochs, %.0f s",
              oracle_gap, trunc, r.rrmse, r.predicted.cols(), r.model->history.train_loss.size(), s)};
}

// Rank-5 wake-like flow: mean deficit plus two travelling harmonics with
// Hermite cross-stream profiles.
SnapshotTensor wake_flow() {
  const std::size_t n1 = 449, n2 = 199, K = 150;
  const double dt = 0.2, w = 0.9;
  SnapshotTensor full(1, {n1, n2}, K, dt);
  for (std::size_t i = 0; i < n1; ++i) {
    const double x = -1 + 9.0 * double(i) / double(n1 - 1);
    const double env = std::tanh(x + 1.0) * std::exp(-0.1 * x);
    for (std::size_t j = 0; j < n2; ++j) {
      const double y = -2 + 4.0 * double(j) / double(n2 - 1);
      const double e = std::exp(-y * y / 2);
      const double h[5] = {e, 2 * y * e, (4 * y * y - 2) * e / 2, (8 * y * y * y - 12 * y) * e / 4,
                           (16 * y * y * y * y - 48 * y * y + 12) * e / 12};
      const double deficit = -0.6 * std::exp(-0.3 * (x + 1)) * h[0];
      for (std::size_t k = 0; k < K; ++k) {
        const double t = double(k) * dt;
        full.at(i * n2 + j, k) = deficit + env * (std::cos(1.2 * x - w * t) * h[1] + std::sin(1.2 * x - w * t) * h[2]) +
                                 0.3 * env * (std::cos(2.4 * x - 2 * w * t) * h[3] + std::sin(2.4 * x - 2 * w * t) * h[4]);
      }
    }
  }
  return full;
}

Outcome c8_reconstruction() {
  const SnapshotTensor full = wake_flow();
  ReconstructionConfig cfg;
  cfg.train.seed = 1;
  const SnapshotTensor sensors = downsample(full, cfg.stride1, cfg.stride2);
  Stopwatch clock;
  const ReconstructionResult r = reconstruct_from_sensors(full, cfg);
  const double s = clock.seconds();
  const Shape sd = sensors.space_dims();
  return {r.rrmse < 0.08 && s < 600.0, fmt("held-out RRMSE %.2e (%zu snapshots) from %zux%zu sensors; %.0f s", r.rrmse,
                                           r.blocks[2], sd[0], sd[1], s)};
}

Outcome c9_autoencoder() {
  const Eigen::Index J = 20, K = 50;
  const Eigen::MatrixXd u = testing::random_orthonormal(J, 1, 4);
  SnapshotMatrix m{Eigen::MatrixXd(J, K), 1.0};
  for (Eigen::Index k = 0; k < K; ++k) m.data.col(k) = u * (2.0 + std::sin(0.4 * double(k)));
  AeConfig cfg;
  cfg.encoding_dim = 1;
  cfg.train.lr = 0.01;
  cfg.train.batch = 8;
  cfg.train.epochs = 1500;
  cfg.train.patience = 1500;
  const AeResult r = ae_identify_patterns(m, cfg);
  const Eigen::VectorXd pod = Eigen::JacobiSVD<Eigen::MatrixXd>(m.data, Eigen::ComputeThinU).matrixU().col(0);
  const Eigen::VectorXd p = r.patterns.col(0);
  const double cosine = std::abs(p.dot(pod)) / p.norm();
  return {r.rrmse < 1e-3 && cosine > 0.99, fmt("RRMSE %.2e, |cos| with first POD mode %.6f", r.rrmse, cosine)};
}

// ---- criterion 10 -----------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + MODEFLOW_CLI + "\" " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

// Every file of two artifact directories, report.json compared without timings.
bool same_artifacts(const fs::path& a, const fs::path& b, std::string& why) {
  std::set<std::string> names_a, names_b;
  for (const auto& e : fs::directory_iterator(a)) names_a.insert(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b)) names_b.insert(e.path().filename().string());
  if (names_a != names_b) {
    why = "file lists differ";
    return false;
  }
  for (const auto& n : names_a) {
    if (n == "report.json") {
      auto ja = nlohmann::json::parse(slurp(a / n)), jb = nlohmann::json::parse(slurp(b / n));
      ja.erase("timings");
      jb.erase("timings");
      if (ja != jb) {
        why = n;
        return false;
      }
    } else if (slurp(a / n) != slurp(b / n)) {
      why = n;
      return false;
    }
  }
  return true;
}

Outcome c10_format() {
  const fs::path dir = fs::temp_directory_path() / fmt("modeflow_acceptance_%d", int(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<std::string> problems;

  // Round trip.
  const Tensor rt = testing::random_tensor({3, 5, 7}, 21);
  io::write_tensor_file(dir / "rt.mft", rt);
  const io::TensorFile back = io::read_tensor_file(dir / "rt.mft");
  const bool round_trip = back.tensor.shape() == rt.shape() &&
                          std::memcmp(back.tensor.values().data(), rt.values().data(), rt.size() * sizeof(double)) == 0;
  if (!round_trip) problems.push_back("round trip");

  // Inputs.
  SnapshotTensor sig(1, {6, 5}, 40, 0.2);
  {
    const Eigen::MatrixXd m = testing::dmd_signal(30, 40, 0.2, {{1.0, 0.9, 0.0}, {0.4, 2.1, -0.02}}, 2);
    for (std::size_t j = 0; j < 30; ++j) {
      for (std::size_t k = 0; k < 40; ++k) sig.at(j, k) = m(Eigen::Index(j), Eigen::Index(k));
    }
  }
  io::write_tensor_file(dir / "sig.mft", sig.values());
  Tensor gappy = sig.values();
  std::mt19937_64 rng(8);
  for (auto& v : gappy.values()) {
    if (rng() % 5 == 0) v = std::nan("");
  }
  io::write_tensor_file(dir / "gappy.mft", gappy, true);
  {
    std::ofstream c(dir / "cfg.json");
    c << R"({"dt": 0.2,
      "hodmd": {"d": 8, "eps_svd": [1e-6], "eps_a": 1e-6},
      "dmd_forecast": {"d": 8, "eps_svd": 1e-6, "eps_a": 1e-6, "eps_perm": 0.05, "horizon": 2.0},
      "gappy": {"rank": 4, "max_iters": 50},
      "superres": {"doublings": 1, "rank": 4},
      "forecast_nn": {"svd_rank": 3, "q": 4, "hidden": 8, "train": {"epochs": 5, "batch": 4, "seed": 3}},
      "reconstruct": {"rank": 2, "hidden": 4, "depth": 3, "stride1": 2, "stride2": 2,
                      "train": {"epochs": 5, "batch": 4, "seed": 3}},
      "autoencode": {"encoding_dim": 2, "hidden": [6], "activation": "tanh",
                     "train": {"epochs": 5, "batch": 4, "seed": 3}},
      "synthetic": {"space": [8, 6], "times": 30, "noise": 0.01, "seed": 5}})";
  }
  const std::string in = (dir / "sig.mft").string(), cfg = (dir / "cfg.json").string();
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"svd", "decompose svd -i " + in},
      {"hosvd", "decompose hosvd -i " + in},
      {"hodmd", "decompose hodmd -i " + in},
      {"mdhodmd", "decompose mdhodmd -i " + in},
      {"gappy", "repair gappy -i " + (dir / "gappy.mft").string() + " --truth " + in},
      {"superres", "superres --method hosvd -i " + in},
      {"fdmd", "forecast dmd -i " + in},
      {"fnn", "forecast nn -i " + in},
      {"recon", "reconstruct nn -i " + in},
      {"ae", "autoencode -i " + in},
  };
  std::size_t reproducible = 0, total = commands.size() + 1;
  for (const auto& [tag, args] : commands) {
    const fs::path a = dir / (tag + "_a"), b = dir / (tag + "_b");
    const int ra = run_cli(args + " -c " + cfg + " -o " + a.string());
    const int rb = run_cli(args + " -c " + cfg + " -o " + b.string());
    std::string why;
    if (ra != 0 || rb != 0) {
      problems.push_back(tag + fmt(" exit %d/%d", ra, rb));
    } else if (!same_artifacts(a, b, why)) {
      problems.push_back(tag + " differs in " + why);
    } else {
      ++reproducible;
    }
  }
  {
    const fs::path a = dir / "gen_a", b = dir / "gen_b";
    const int ra = run_cli("generate synthetic -c " + cfg + " --modes 3 -o " + a.string());
    const int rb = run_cli("generate synthetic -c " + cfg + " --modes 3 -o " + b.string());
    std::string why;
    if (ra == 0 && rb == 0 && same_artifacts(a, b, why)) {
      ++reproducible;
    } else {
      problems.push_back("generate");
    }
  }
  if (run_cli("info " + in) != 0) problems.push_back("info");

  // Malformed inputs and the exit-code contract.
  const std::string good = slurp(dir / "sig.mft");
  auto craft = [&](const std::string& name, std::string bytes) {
    std::ofstream(dir / name, std::ios::binary) << bytes;
    return (dir / name).string();
  };
  std::string bad_magic = good, bad_dtype = good, nan_payload = good;
  bad_magic[0] = 'X';
  bad_dtype[4] = 0x03;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(nan_payload.data() + nan_payload.size() - 8, &nan, 8);
  {
    std::ofstream(dir / "unknown.json") << R"({"svd": {"tol": 1e-3, "tolerance": 2}})";
  }
  const std::vector<std::tuple<std::string, std::string, int>> cases = {
      {"bad magic", "decompose svd -i " + craft("magic.mft", bad_magic), 4},
      {"truncated payload", "decompose svd -i " + craft("trunc.mft", good.substr(0, good.size() - 13)), 4},
      {"NaN without gappy flag", "decompose svd -i " + craft("nan.mft", nan_payload), 4},
      {"bad dtype", "decompose svd -i " + craft("dtype.mft", bad_dtype), 4},
      {"unknown config key", "decompose svd -i " + in + " -c " + (dir / "unknown.json").string(), 2},
      {"missing file", "decompose svd -i " + (dir / "absent.mft").string(), 1},
      {"output collision", "decompose svd -i " + in + " -o " + (dir / "svd_a").string(), 1},
  };
  std::size_t honoured = 0;
  int serial = 0;
  for (const auto& [what, args, want] : cases) {
    const std::string out = args.find(" -o ") == std::string::npos ? " -o " + (dir / fmt("bad%d", serial++)).string() : "";
    const int got = run_cli(args + out);
    if (got == want) {
      ++honoured;
    } else {
      problems.push_back(what + fmt(" exit %d (want %d)", got, want));
    }
  }

  fs::remove_all(dir);
  std::string detail = fmt("round trip %s; %zu/%zu commands reproducible; %zu/%zu malformed inputs with the right exit code",
                           round_trip ? "bit-identical" : "differs", reproducible, total, honoured, cases.size());
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"HODMD exactness", c1_hodmd},
      {"HOSVD exactness", c2_hosvd},
      {"gappy repair", c3_gappy},
      {"super-resolution", c4_superres},
      {"predictive DMD", c5_dmd_forecast},
      {"neural gradients and replay", c6_gradients},
      {"hybrid forecasting", c7_forecast},
      {"sensor reconstruction", c8_reconstruction},
      {"autoencoder vs POD", c9_autoencoder},
      {"format and determinism", c10_format},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = int(i) + 1;
    if (!pick.empty() && !pick.contains(n)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %2d %s  %s: %s\n", n, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
