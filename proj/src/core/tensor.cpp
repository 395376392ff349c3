#include "modeflow/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "modeflow/error.hpp"
#include "modeflow/kernels.hpp"

namespace modeflow {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

// Sizes of the index ranges before and after `axis`.
std::pair<std::size_t, std::size_t> split_at(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) throw ConfigError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(shape));
  std::size_t pre = 1, post = 1;
  for (std::size_t i = 0; i < axis; ++i) pre *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) post *= shape[i];
  return {pre, post};
}

}  // namespace

std::size_t shape_product(std::span<const std::size_t> shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_product(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_product(shape_)) {
    throw ConfigError("tensor data length " + std::to_string(data_.size()) + " does not match shape " + shape_str(shape_));
  }
}

std::size_t Tensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) throw ConfigError("index order mismatch");
  std::size_t off = 0;
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (index[i] >= shape_[i]) throw ConfigError("index out of range on axis " + std::to_string(i));
    off = off * shape_[i] + index[i];
  }
  return off;
}

Eigen::MatrixXd unfold(const Tensor& t, std::size_t axis) {
  const auto [pre, post] = split_at(t.shape(), axis);
  const auto n = static_cast<Eigen::Index>(t.dim(axis));
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(pre * post));
  for (std::size_t p = 0; p < pre; ++p) {
    Eigen::Map<const RowMajor> block(t.data().data() + p * n * post, n, static_cast<Eigen::Index>(post));
    out.middleCols(static_cast<Eigen::Index>(p * post), static_cast<Eigen::Index>(post)) = block;
  }
  return out;
}

Tensor fold(const Eigen::MatrixXd& m, std::size_t axis, const Shape& shape) {
  const auto [pre, post] = split_at(shape, axis);
  if (static_cast<std::size_t>(m.rows()) != shape[axis] || static_cast<std::size_t>(m.cols()) != pre * post) {
    throw ConfigError("fold: matrix does not match shape " + shape_str(shape));
  }
  Tensor out(shape);
  const auto n = m.rows();
  for (std::size_t p = 0; p < pre; ++p) {
    Eigen::Map<RowMajor> block(out.data().data() + p * n * post, n, static_cast<Eigen::Index>(post));
    block = m.middleCols(static_cast<Eigen::Index>(p * post), static_cast<Eigen::Index>(post));
  }
  return out;
}

Eigen::MatrixXd unfolding_gram(const Tensor& t, std::size_t axis) {
  const auto [pre, post] = split_at(t.shape(), axis);
  const auto n = static_cast<Eigen::Index>(t.dim(axis));
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t p = 0; p < pre; ++p) {
    Eigen::Map<const RowMajor> block(t.data().data() + p * n * post, n, static_cast<Eigen::Index>(post));
    g.selfadjointView<Eigen::Lower>().rankUpdate(block);
  }
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

Tensor mode_product(const Tensor& t, const Eigen::MatrixXd& m, std::size_t axis) {
  const auto [pre, post] = split_at(t.shape(), axis);
  if (static_cast<std::size_t>(m.cols()) != t.dim(axis)) {
    throw ConfigError("mode_product: matrix has " + std::to_string(m.cols()) + " columns, axis " +
                      std::to_string(axis) + " has length " + std::to_string(t.dim(axis)));
  }
  Shape out_shape = t.shape();
  out_shape[axis] = static_cast<std::size_t>(m.rows());
  Tensor out(out_shape);
  const auto n = m.cols();
  const auto r = m.rows();
  for (std::size_t p = 0; p < pre; ++p) {
    Eigen::Map<const RowMajor> in(t.data().data() + p * n * post, n, static_cast<Eigen::Index>(post));
    Eigen::Map<RowMajor> res(out.data().data() + p * r * post, r, static_cast<Eigen::Index>(post));
    res.noalias() = m * in;
  }
  return out;
}

SnapshotTensor::SnapshotTensor(std::size_t components, Shape space_dims, std::size_t times, double dt)
    : SnapshotTensor(components, std::move(space_dims), times, dt, {}) {}

SnapshotTensor::SnapshotTensor(std::size_t components, Shape space_dims, std::size_t times, double dt,
                               std::vector<double> data)
    : dt_(dt) {
  Shape shape;
  shape.push_back(components);
  shape.insert(shape.end(), space_dims.begin(), space_dims.end());
  shape.push_back(times);
  if (data.empty()) data.assign(shape_product(shape), 0.0);
  values_ = Tensor(std::move(shape), std::move(data));
  validate();
}

SnapshotTensor::SnapshotTensor(Tensor values, double dt) : values_(std::move(values)), dt_(dt) { validate(); }

SnapshotTensor SnapshotTensor::from_tensor(Tensor t, double dt) {
  if (t.order() == 2) {
    Shape s{1, t.dim(0), t.dim(1)};
    return SnapshotTensor(Tensor(std::move(s), std::move(t.values())), dt);
  }
  return SnapshotTensor(std::move(t), dt);
}

Shape SnapshotTensor::space_dims() const {
  const auto& s = values_.shape();
  return Shape(s.begin() + 1, s.end() - 1);
}

void SnapshotTensor::validate() const {
  const auto& s = values_.shape();
  if (s.size() < 3 || s.size() > 5) {
    throw ConfigError("snapshot tensor must have order 3 to 5 (components, 1-3 space axes, time), got " + shape_str(s));
  }
  for (auto d : s) {
    if (d == 0) throw ConfigError("snapshot tensor has an empty axis: " + shape_str(s));
  }
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw ConfigError("time step must be positive and finite");
  for (double v : values_.values()) {
    if (!std::isfinite(v)) throw ConfigError("snapshot tensor contains non-finite values; extract gaps first");
  }
}

GapMask GapMask::none(const Shape& shape) { return GapMask{shape, std::vector<std::uint8_t>(shape_product(shape), 0)}; }

std::size_t GapMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(gaps.begin(), gaps.end(), std::uint8_t{1}));
}

double GapMask::fraction() const noexcept {
  return gaps.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(gaps.size());
}

GapMask extract_gaps(Tensor& t) {
  GapMask mask = GapMask::none(t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::isnan(t[i])) {
      mask.gaps[i] = 1;
      t[i] = 0.0;
    } else if (!std::isfinite(t[i])) {
      throw ConfigError("infinite value at flat index " + std::to_string(i));
    }
  }
  return mask;
}

GapMask extract_gaps(Eigen::MatrixXd& m) {
  const auto rows = static_cast<std::size_t>(m.rows());
  const auto cols = static_cast<std::size_t>(m.cols());
  GapMask mask = GapMask::none({rows, cols});
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double& v = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (std::isnan(v)) {
        mask.gaps[i * cols + j] = 1;
        v = 0.0;
      } else if (!std::isfinite(v)) {
        throw ConfigError("infinite value at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
  return mask;
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask_as_array(const GapMask& mask) {
  if (mask.shape.size() != 2) throw ConfigError("mask is not two-dimensional");
  const auto rows = static_cast<Eigen::Index>(mask.shape[0]);
  const auto cols = static_cast<Eigen::Index>(mask.shape[1]);
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = mask.gaps[static_cast<std::size_t>(i * cols + j)] != 0;
  }
  return out;
}

SnapshotMatrix reshape_tensor_to_matrix(const SnapshotTensor& t) {
  const auto J = static_cast<Eigen::Index>(t.spatial_size());
  const auto K = static_cast<Eigen::Index>(t.times());
  Eigen::Map<const RowMajor> view(t.values().data().data(), J, K);
  return SnapshotMatrix{Eigen::MatrixXd(view), t.dt()};
}

SnapshotTensor reshape_matrix_to_tensor(const SnapshotMatrix& m, const Shape& shape) {
  if (shape.size() < 2) throw ConfigError("reshape needs (components, space...) with at least one space axis");
  if (shape_product(shape) != static_cast<std::size_t>(m.J())) {
    throw ConfigError("shape " + shape_str(shape) + " has " + std::to_string(shape_product(shape)) +
                      " entries but the matrix has J = " + std::to_string(m.J()));
  }
  std::vector<double> data(static_cast<std::size_t>(m.J() * m.K()));
  Eigen::Map<RowMajor>(data.data(), m.J(), m.K()) = m.data;
  return SnapshotTensor(shape[0], Shape(shape.begin() + 1, shape.end()), static_cast<std::size_t>(m.K()), m.dt,
                        std::move(data));
}

double rrmse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& approx) {
  if (truth.rows() != approx.rows() || truth.cols() != approx.cols()) {
    throw ConfigError("rrmse: shapes differ (" + std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()) +
                      " vs " + std::to_string(approx.rows()) + "x" + std::to_string(approx.cols()) + ")");
  }
  const auto n = static_cast<std::size_t>(truth.size());
  std::span<const double> a(truth.data(), n), b(approx.data(), n);
  const double den = kernels::dot(a, a);
  if (den == 0.0) throw NumericalError("rrmse: reference field has zero norm");
  return std::sqrt(kernels::sum_sq_diff(a, b) / den);
}

double rrmse(const SnapshotMatrix& truth, const SnapshotMatrix& approx) { return rrmse(truth.data, approx.data); }

double rrmse(const Tensor& truth, const Tensor& approx) {
  if (truth.shape() != approx.shape()) throw ConfigError("rrmse: tensor shapes differ");
  const double den = kernels::dot(truth.data(), truth.data());
  if (den == 0.0) throw NumericalError("rrmse: reference field has zero norm");
  return std::sqrt(kernels::sum_sq_diff(truth.data(), approx.data()) / den);
}

std::vector<double> per_snapshot_rrmse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& approx) {
  if (truth.rows() != approx.rows() || truth.cols() != approx.cols()) throw ConfigError("per_snapshot_rrmse: shapes differ");
  std::vector<double> out(static_cast<std::size_t>(truth.cols()));
  const auto J = static_cast<std::size_t>(truth.rows());
  for (Eigen::Index k = 0; k < truth.cols(); ++k) {
    std::span<const double> a(truth.col(k).data(), J), b(approx.col(k).data(), J);
    const double den = kernels::dot(a, a);
    out[static_cast<std::size_t>(k)] = den > 0.0 ? std::sqrt(kernels::sum_sq_diff(a, b) / den) : std::sqrt(kernels::dot(b, b));
  }
  return out;
}

}  // namespace modeflow
