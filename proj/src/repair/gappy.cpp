#include <cmath>
#include <string>

#include "modeflow/error.hpp"
#include "modeflow/hosvd.hpp"
#include "modeflow/repair.hpp"
#include "modeflow/svd.hpp"

namespace modeflow {
namespace {

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Updates gap entries of `current` from `next` and records MSE_gaps.
void update_gaps(std::span<double> current, std::span<const double> next, const std::vector<std::size_t>& gaps,
                 GappyTrace& trace) {
  double abs_sum = 0.0, sq_sum = 0.0;
  for (auto i : gaps) {
    const double d = next[i] - current[i];
    abs_sum += std::abs(d);
    sq_sum += d * d;
    current[i] = next[i];
  }
  const auto n = static_cast<double>(gaps.size());
  trace.mse_gaps.push_back(std::sqrt(abs_sum) / n);
  trace.rmse_gaps.push_back(std::sqrt(sq_sum / n));
  ++trace.iterations;
}

void check_config(const GappyConfig& cfg) {
  if (cfg.rank < 1) throw ConfigError("gappy: retained rank must be at least 1");
  if (!(cfg.tol_gaps > 0.0)) throw ConfigError("gappy: tol_gaps must be positive");
  if (cfg.max_iters < 1) throw ConfigError("gappy: max_iters must be at least 1");
}

void finish(GappyTrace& trace, const GappyConfig& cfg) {
  if (!trace.converged) {
    trace.warnings.push_back("gappy repair did not reach MSE_gaps <= " + std::to_string(cfg.tol_gaps) + " within " +
                             std::to_string(cfg.max_iters) + " iterations (last " +
                             std::to_string(trace.mse_gaps.empty() ? 0.0 : trace.mse_gaps.back()) + ")");
  }
}

}  // namespace

std::string_view to_string(InitFill f) noexcept {
  switch (f) {
    case InitFill::kZero: return "zero";
    case InitFill::kMean: return "mean";
    case InitFill::kLinearInterp: return "linear_interp";
  }
  return "zero";
}

InitFill parse_init_fill(std::string_view name) {
  if (name == "zero") return InitFill::kZero;
  if (name == "mean") return InitFill::kMean;
  if (name == "linear_interp") return InitFill::kLinearInterp;
  throw ConfigError("unknown init_fill '" + std::string(name) + "' (expected zero, mean or linear_interp)");
}

void initial_fill(Eigen::MatrixXd& field, const BoolArray& gaps, InitFill fill) {
  const Eigen::Index rows = field.rows();
  for (Eigen::Index c = 0; c < field.cols(); ++c) {
    switch (fill) {
      case InitFill::kZero:
        for (Eigen::Index r = 0; r < rows; ++r) {
          if (gaps(r, c)) field(r, c) = 0.0;
        }
        break;
      case InitFill::kMean: {
        double sum = 0.0;
        Eigen::Index known = 0;
        for (Eigen::Index r = 0; r < rows; ++r) {
          if (!gaps(r, c)) {
            sum += field(r, c);
            ++known;
          }
        }
        const double mean = known ? sum / static_cast<double>(known) : 0.0;
        for (Eigen::Index r = 0; r < rows; ++r) {
          if (gaps(r, c)) field(r, c) = mean;
        }
        break;
      }
      case InitFill::kLinearInterp: {
        Eigen::Index prev = -1;
        for (Eigen::Index r = 0; r <= rows; ++r) {
          if (r < rows && gaps(r, c)) continue;
          // r is the next known row (or rows); fill (prev, r).
          for (Eigen::Index g = prev + 1; g < r; ++g) {
            if (prev < 0 && r == rows) {
              field(g, c) = 0.0;
            } else if (prev < 0) {
              field(g, c) = field(r, c);
            } else if (r == rows) {
              field(g, c) = field(prev, c);
            } else {
              const double w = static_cast<double>(g - prev) / static_cast<double>(r - prev);
              field(g, c) = (1.0 - w) * field(prev, c) + w * field(r, c);
            }
          }
          prev = r;
        }
        break;
      }
    }
  }
}

GappyResult gappy_svd(const Eigen::MatrixXd& field, const GapMask& mask, const GappyConfig& cfg) {
  check_config(cfg);
  if (mask.shape != Shape{static_cast<std::size_t>(field.rows()), static_cast<std::size_t>(field.cols())}) {
    throw ConfigError("gappy_svd: mask shape does not match the field");
  }
  const BoolArray gaps = mask_as_array(mask);
  std::vector<std::size_t> gap_index;  // column-major offsets into `field`
  for (Eigen::Index c = 0; c < field.cols(); ++c) {
    for (Eigen::Index r = 0; r < field.rows(); ++r) {
      if (gaps(r, c)) gap_index.push_back(static_cast<std::size_t>(c * field.rows() + r));
    }
  }
  if (gap_index.size() == static_cast<std::size_t>(field.size())) throw ConfigError("gappy_svd: every entry is a gap");

  GappyResult out{field, {}};
  for (auto i : gap_index) {
    if (!std::isfinite(out.field.data()[i])) out.field.data()[i] = 0.0;
  }
  if (!out.field.allFinite()) throw ConfigError("gappy_svd: known entries must be finite");
  if (gap_index.empty()) {
    out.trace.mse_gaps.push_back(0.0);
    out.trace.rmse_gaps.push_back(0.0);
    out.trace.iterations = 1;
    out.trace.converged = true;
    return out;
  }
  initial_fill(out.field, gaps, cfg.init_fill);

  const auto n = static_cast<std::size_t>(out.field.size());
  for (int it = 0; it < cfg.max_iters; ++it) {
    const Eigen::MatrixXd next = leading_svd(out.field, cfg.rank).reconstruct();
    update_gaps(std::span<double>(out.field.data(), n), std::span<const double>(next.data(), n), gap_index, out.trace);
    if (out.trace.mse_gaps.back() <= cfg.tol_gaps) {
      out.trace.converged = true;
      break;
    }
  }
  finish(out.trace, cfg);
  return out;
}

GappyTensorResult gappy_hosvd(const SnapshotTensor& t, const GapMask& mask, const GappyConfig& cfg) {
  check_config(cfg);
  if (mask.shape != t.shape()) throw ConfigError("gappy_hosvd: mask shape does not match the tensor");
  Shape ranks = cfg.ranks;
  if (ranks.empty()) ranks.assign(t.shape().size(), static_cast<std::size_t>(cfg.rank));
  if (ranks.size() != t.shape().size()) throw ConfigError("gappy_hosvd: need one rank per tensor axis");

  std::vector<std::size_t> gap_index;
  for (std::size_t i = 0; i < mask.gaps.size(); ++i) {
    if (mask.gaps[i]) gap_index.push_back(i);
  }
  if (gap_index.size() == mask.gaps.size()) throw ConfigError("gappy_hosvd: every entry is a gap");

  Tensor work = t.values();
  GappyTrace trace;
  if (gap_index.empty()) {
    trace.mse_gaps.push_back(0.0);
    trace.rmse_gaps.push_back(0.0);
    trace.iterations = 1;
    trace.converged = true;
    return {t, trace};
  }

  // Initial fill along the time axis: view each spatial point as a row.
  {
    const auto J = static_cast<Eigen::Index>(t.spatial_size());
    const auto K = static_cast<Eigen::Index>(t.times());
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RowMajor> view(work.data().data(), J, K);
    Eigen::MatrixXd cols = view.transpose();  // K x J, fill down the time axis
    BoolArray g(K, J);
    for (Eigen::Index j = 0; j < J; ++j) {
      for (Eigen::Index k = 0; k < K; ++k) g(k, j) = mask.gaps[static_cast<std::size_t>(j * K + k)] != 0;
    }
    initial_fill(cols, g, cfg.init_fill);
    view = cols.transpose();
  }

  for (int it = 0; it < cfg.max_iters; ++it) {
    const Tensor next = hosvd_with_ranks(work, ranks).reconstruct();
    update_gaps(work.data(), next.data(), gap_index, trace);
    if (trace.mse_gaps.back() <= cfg.tol_gaps) {
      trace.converged = true;
      break;
    }
  }
  finish(trace, cfg);
  return {SnapshotTensor::from_tensor(std::move(work), t.dt()), trace};
}

}  // namespace modeflow
