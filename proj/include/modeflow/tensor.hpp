#pragma once

// Snapshot containers and the tensor algebra shared by every module.
//
// Layout convention: all tensors are dense, row-major, time on the last axis.
// A snapshot tensor has shape (J1, J2[, J3[, J4]], K) where J1 counts the
// components (variables). Folding into a snapshot matrix merges the leading
// axes in declared order, component-major:
//
//   j = ((j1 * J2 + j2) * J3 + j3) * J4 + j4
//
// so column k of the matrix is the snapshot at time index k.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace modeflow {

using Shape = std::vector<std::size_t>;

std::size_t shape_product(std::span<const std::size_t> shape) noexcept;

/// Dense row-major N-d array of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t order() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Flat offset of a multi-index (bounds-checked).
  std::size_t offset(std::span<const std::size_t> index) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Mode-`axis` unfolding: dim(axis) rows; columns enumerate the remaining
/// indices in row-major order with `axis` removed.
Eigen::MatrixXd unfold(const Tensor& t, std::size_t axis);

/// Inverse of unfold for a tensor of the given shape.
Tensor fold(const Eigen::MatrixXd& m, std::size_t axis, const Shape& shape);

/// Gram matrix of the mode-`axis` unfolding, unfold(t) * unfold(t)^T.
Eigen::MatrixXd unfolding_gram(const Tensor& t, std::size_t axis);

/// n-mode product: result index i_axis is replaced by r with
/// result[..r..] = sum_i m(r, i) * t[..i..].
Tensor mode_product(const Tensor& t, const Eigen::MatrixXd& m, std::size_t axis);

/// Data matrix with columns as snapshots (J x K) and a uniform time step.
struct SnapshotMatrix {
  Eigen::MatrixXd data;
  double dt = 1.0;

  Eigen::Index J() const noexcept { return data.rows(); }
  Eigen::Index K() const noexcept { return data.cols(); }
};

/// Spatio-temporal database of shape (components, space..., times).
class SnapshotTensor {
 public:
  SnapshotTensor(std::size_t components, Shape space_dims, std::size_t times, double dt);
  SnapshotTensor(std::size_t components, Shape space_dims, std::size_t times, double dt,
                 std::vector<double> data);

  /// Interpret a tensor as (components, space..., time). A 2-d tensor is read
  /// as a single-component (J, K) database.
  static SnapshotTensor from_tensor(Tensor t, double dt);

  std::size_t components() const noexcept { return values_.dim(0); }
  Shape space_dims() const;
  std::size_t times() const noexcept { return values_.shape().back(); }
  double dt() const noexcept { return dt_; }
  /// J = components * product(space_dims)
  std::size_t spatial_size() const noexcept { return values_.size() / times(); }

  const Tensor& values() const noexcept { return values_; }
  Tensor& values() noexcept { return values_; }
  const Shape& shape() const noexcept { return values_.shape(); }

  /// Value at flat spatial index j (component-major) and time index k.
  double& at(std::size_t j, std::size_t k) noexcept { return values_[j * times() + k]; }
  double at(std::size_t j, std::size_t k) const noexcept { return values_[j * times() + k]; }

 private:
  SnapshotTensor(Tensor values, double dt);
  void validate() const;

  Tensor values_;
  double dt_;
};

/// Entries flagged as gaps. Same row-major layout as the data it describes.
struct GapMask {
  Shape shape;
  std::vector<std::uint8_t> gaps;

  static GapMask none(const Shape& shape);
  std::size_t count() const noexcept;
  double fraction() const noexcept;
  bool operator[](std::size_t i) const noexcept { return gaps[i] != 0; }
};

/// Replace NaN entries by zero and record them in a mask.
GapMask extract_gaps(Tensor& t);
GapMask extract_gaps(Eigen::MatrixXd& m);

/// Mask of a (rows x cols) matrix as an Eigen boolean array.
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask_as_array(const GapMask& mask);

SnapshotMatrix reshape_tensor_to_matrix(const SnapshotTensor& t);

/// `shape` = (components, space...), with product equal to J.
SnapshotTensor reshape_matrix_to_tensor(const SnapshotMatrix& m, const Shape& shape);

/// Relative root mean square error over all snapshots.
double rrmse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& approx);
double rrmse(const SnapshotMatrix& truth, const SnapshotMatrix& approx);
double rrmse(const Tensor& truth, const Tensor& approx);

/// ||v_k - a_k|| / ||v_k|| for each column.
std::vector<double> per_snapshot_rrmse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& approx);

}  // namespace modeflow
