#include "modeflow/hosvd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "modeflow/error.hpp"
#include "modeflow/svd.hpp"

namespace modeflow {
namespace {

struct AxisSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd sigma;
};

AxisSvd axis_svd(const Tensor& t, std::size_t axis) {
  const Eigen::MatrixXd a = unfold(t, axis);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  if (svd.info() != Eigen::Success) throw NumericalError("hosvd: SVD of unfolding " + std::to_string(axis) + " did not converge");
  AxisSvd out{svd.matrixU(), svd.singularValues()};
  if (out.sigma.size() == 0 || out.sigma(0) <= 0.0) {
    throw NumericalError("hosvd: unfolding along axis " + std::to_string(axis) + " has rank 0");
  }
  return out;
}

HosvdFactors assemble(const Tensor& t, std::vector<AxisSvd> axes, const Shape& ranks) {
  HosvdFactors f;
  f.ranks = ranks;
  Tensor core = t;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    Eigen::MatrixXd u = axes[a].u.leftCols(static_cast<Eigen::Index>(ranks[a]));
    canonicalize_signs(u, nullptr);
    core = mode_product(core, u.transpose(), a);
    f.factors.push_back(std::move(u));
    f.singular_values.push_back(std::move(axes[a].sigma));
  }
  f.core = std::move(core);
  return f;
}

void check_order(const Tensor& t) {
  if (t.order() < 2) throw ConfigError("hosvd: tensor order must be at least 2");
  if (t.size() == 0) throw ConfigError("hosvd: empty tensor");
  for (double v : t.values()) {
    if (!std::isfinite(v)) throw ConfigError("hosvd: tensor contains non-finite entries");
  }
}

}  // namespace

Tensor HosvdFactors::reconstruct() const {
  Tensor out = core;
  for (std::size_t a = 0; a < factors.size(); ++a) out = mode_product(out, factors[a], a);
  return out;
}

HosvdFactors hosvd(const Tensor& t, std::span<const double> tols) {
  check_order(t);
  if (tols.size() != 1 && tols.size() != t.order()) {
    throw ConfigError("hosvd: expected 1 or " + std::to_string(t.order()) + " tolerances, got " + std::to_string(tols.size()));
  }
  std::vector<AxisSvd> axes;
  Shape ranks;
  for (std::size_t a = 0; a < t.order(); ++a) {
    const double tol = tols.size() == 1 ? tols[0] : tols[a];
    if (!(tol >= 0.0 && tol <= 1.0)) throw ConfigError("hosvd: tolerances must lie in [0, 1]");
    axes.push_back(axis_svd(t, a));
    ranks.push_back(static_cast<std::size_t>(rank_for_tolerance(axes.back().sigma, tol)));
  }
  return assemble(t, std::move(axes), ranks);
}

HosvdFactors hosvd(const Tensor& t, double tol) { return hosvd(t, std::span<const double>(&tol, 1)); }

HosvdFactors hosvd(const SnapshotTensor& t, std::span<const double> tols) { return hosvd(t.values(), tols); }
HosvdFactors hosvd(const SnapshotTensor& t, double tol) { return hosvd(t.values(), tol); }

HosvdFactors hosvd_with_ranks(const Tensor& t, const Shape& ranks) {
  check_order(t);
  if (ranks.size() != t.order()) throw ConfigError("hosvd: need one rank per axis");
  std::vector<AxisSvd> axes;
  Shape clamped;
  for (std::size_t a = 0; a < t.order(); ++a) {
    axes.push_back(axis_svd(t, a));
    clamped.push_back(std::clamp<std::size_t>(ranks[a], 1, static_cast<std::size_t>(axes.back().u.cols())));
  }
  return assemble(t, std::move(axes), clamped);
}

HosvdModes hosvd_spatial_temporal_modes(const HosvdFactors& f) {
  const std::size_t time_axis = f.factors.size() - 1;
  Tensor spatial = f.core;
  for (std::size_t a = 0; a < time_axis; ++a) spatial = mode_product(spatial, f.factors[a], a);

  HosvdModes modes;
  for (std::size_t a = 0; a < time_axis; ++a) modes.spatial_shape.push_back(f.factors[a].rows());
  const auto J = static_cast<Eigen::Index>(shape_product(modes.spatial_shape));
  const auto N = static_cast<Eigen::Index>(f.ranks.back());
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> raw(spatial.data().data(), J, N);
  const Eigen::MatrixXd& T = f.factors.back();
  const Eigen::VectorXd& st = f.singular_values.back();

  std::vector<Eigen::Index> keep;
  for (Eigen::Index n = 0; n < N; ++n) {
    if (st(n) > 0.0) {
      keep.push_back(n);
    } else {
      modes.warnings.push_back("temporal mode " + std::to_string(n) + " has zero singular value and was dropped");
    }
  }
  const auto kept = static_cast<Eigen::Index>(keep.size());
  modes.spatial.resize(J, kept);
  modes.temporal.resize(T.rows(), kept);
  modes.sigma_t.resize(kept);
  for (Eigen::Index i = 0; i < kept; ++i) {
    const Eigen::Index n = keep[static_cast<std::size_t>(i)];
    modes.sigma_t(i) = st(n);
    modes.spatial.col(i) = raw.col(n) / st(n);
    modes.temporal.col(i) = st(n) * T.col(n);
  }
  return modes;
}

}  // namespace modeflow
