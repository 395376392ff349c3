#include <algorithm>
#include <string>

#include "modeflow/error.hpp"
#include "modeflow/hosvd.hpp"
#include "modeflow/repair.hpp"
#include "modeflow/svd.hpp"

namespace modeflow {

std::string_view to_string(Interp i) noexcept { return i == Interp::kCubic ? "cubic" : "linear"; }

Interp parse_interp(std::string_view name) {
  if (name == "linear") return Interp::kLinear;
  if (name == "cubic") return Interp::kCubic;
  throw ConfigError("unknown interpolation '" + std::string(name) + "' (expected linear or cubic)");
}

std::string_view to_string(TemporalMode m) noexcept { return m == TemporalMode::kEnlarge ? "enlarge" : "hold"; }

TemporalMode parse_temporal_mode(std::string_view name) {
  if (name == "hold") return TemporalMode::kHold;
  if (name == "enlarge") return TemporalMode::kEnlarge;
  throw ConfigError("unknown temporal mode '" + std::string(name) + "' (expected hold or enlarge)");
}

Eigen::MatrixXd double_rows(const Eigen::MatrixXd& m, Interp interp) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd out(2 * n, m.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    out.row(2 * i) = m.row(i);
    if (i + 1 == n) {
      out.row(2 * i + 1) = m.row(i);
    } else if (interp == Interp::kCubic && i >= 1 && i + 2 < n) {
      out.row(2 * i + 1) = (-m.row(i - 1) + 9.0 * m.row(i) + 9.0 * m.row(i + 1) - m.row(i + 2)) / 16.0;
    } else {
      out.row(2 * i + 1) = 0.5 * (m.row(i) + m.row(i + 1));
    }
  }
  return out;
}

SuperResResult superres_svd(const Eigen::MatrixXd& field, const SuperResConfig& cfg) {
  if (cfg.doublings < 1) throw ConfigError("superres: number of doublings must be at least 1");
  if (cfg.rank < 1) throw ConfigError("superres: retained rank must be at least 1");
  if (field.rows() < 2 || field.cols() < 2) throw ConfigError("superres: field needs at least 2 points per axis");
  if (!field.allFinite()) throw ConfigError("superres: field contains non-finite values");

  SuperResResult out{field, {}};
  const Eigen::Index max_rank = std::min(field.rows(), field.cols());
  Eigen::Index rank = cfg.rank;
  if (rank > max_rank) {
    out.warnings.push_back("retained rank " + std::to_string(rank) + " exceeds min(dims) = " + std::to_string(max_rank) +
                           "; clamped");
    rank = max_rank;
  }
  for (int i = 0; i < cfg.doublings; ++i) {
    const SvdFactors f = svd_truncated(out.field, 0.0, rank);
    const Eigen::MatrixXd w = double_rows(f.W, cfg.interp);
    const Eigen::MatrixXd t = double_rows(f.T, cfg.interp);
    out.field = w * f.sigma.asDiagonal() * t.transpose();
  }
  return out;
}

SuperResTensorResult superres_hosvd(const SnapshotTensor& t, const SuperResConfig& cfg) {
  if (cfg.doublings < 1) throw ConfigError("superres: number of doublings must be at least 1");
  if (cfg.rank < 1) throw ConfigError("superres: retained rank must be at least 1");
  const std::size_t order = t.shape().size();
  const std::size_t time_axis = order - 1;
  for (std::size_t a = 1; a < order; ++a) {
    const bool enlarged = a < time_axis || cfg.temporal == TemporalMode::kEnlarge;
    if (enlarged && t.shape()[a] < 2) throw ConfigError("superres: enlarged axes need at least 2 points");
  }

  SuperResTensorResult out{t, {}};
  Tensor work = t.values();
  const std::size_t smallest = *std::min_element(t.shape().begin() + 1, t.shape().end());
  if (static_cast<std::size_t>(cfg.rank) > smallest) {
    out.warnings.push_back("retained rank " + std::to_string(cfg.rank) + " exceeds the smallest axis (" +
                           std::to_string(smallest) + "); clamped per axis");
  }
  double dt = t.dt();
  for (int i = 0; i < cfg.doublings; ++i) {
    Shape ranks;
    for (std::size_t a = 0; a < order; ++a) ranks.push_back(std::min<std::size_t>(cfg.rank, work.dim(a)));
    HosvdFactors f = hosvd_with_ranks(work, ranks);
    for (std::size_t a = 1; a < order; ++a) {
      if (a < time_axis || cfg.temporal == TemporalMode::kEnlarge) f.factors[a] = double_rows(f.factors[a], cfg.interp);
    }
    work = f.reconstruct();
    if (cfg.temporal == TemporalMode::kEnlarge) dt /= 2.0;
  }
  out.tensor = SnapshotTensor::from_tensor(std::move(work), dt);
  return out;
}

}  // namespace modeflow
