#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "morphlab/error.hpp"

namespace morphlab {

inline constexpr std::size_t kStyleRows = 18;
inline constexpr std::size_t kStyleWidth = 512;
inline constexpr std::size_t kDefaultIdentityRows = 7;

/// Dense row-major rank-2 tensor of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw InputError("matrix data size " + std::to_string(data_.size()) +
                       " does not match shape " + std::to_string(rows_) + "x" +
                       std::to_string(cols_));
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double x) { return std::isfinite(x); });
  }

  std::string shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Copy of rows [first, last) of `m`.
inline Matrix slice_rows(const Matrix& m, std::size_t first, std::size_t last) {
  Matrix out(last - first, m.cols());
  std::copy(m.values().begin() + static_cast<std::ptrdiff_t>(first * m.cols()),
            m.values().begin() + static_cast<std::ptrdiff_t>(last * m.cols()),
            out.values().begin());
  return out;
}

/// Stacks `top` above `bottom`; column counts must agree.
inline Matrix stack_rows(const Matrix& top, const Matrix& bottom) {
  if (top.cols() != bottom.cols()) {
    throw InputError("cannot stack " + top.shape_string() + " on " +
                     bottom.shape_string() + ": column mismatch");
  }
  Matrix out(top.rows() + bottom.rows(), top.cols());
  auto it = std::copy(top.values().begin(), top.values().end(), out.values().begin());
  std::copy(bottom.values().begin(), bottom.values().end(), it);
  return out;
}

/// One face in the extended latent space: 18 style rows of 512 components,
/// row 0 feeding the coarsest generator layer.
class LatentCode {
 public:
  explicit LatentCode(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != kStyleRows || m_.cols() != kStyleWidth) {
      throw InputError("latent code must be 18x512, got " + m_.shape_string());
    }
    if (!m_.all_finite()) throw InputError("latent code has non-finite components");
  }

  static LatentCode zeros() { return LatentCode(Matrix(kStyleRows, kStyleWidth)); }

  const Matrix& matrix() const noexcept { return m_; }

  friend bool operator==(const LatentCode&, const LatentCode&) = default;

 private:
  Matrix m_;
};

/// Leading identity rows and trailing attribute rows of a latent.
struct LatentParts {
  Matrix identity;
  Matrix attributes;
};

// Generic over the row count so the morph pipeline can be checked on small
// hand-evaluated instances.
inline LatentParts split_rows(const Matrix& w, std::size_t k) {
  if (k < 1 || k >= w.rows()) {
    throw InputError("identity row count " + std::to_string(k) + " outside [1," +
                     std::to_string(w.rows() == 0 ? 0 : w.rows() - 1) + "]");
  }
  return {slice_rows(w, 0, k), slice_rows(w, k, w.rows())};
}

inline LatentParts split_latent(const LatentCode& w, std::size_t k = kDefaultIdentityRows) {
  return split_rows(w.matrix(), k);
}

/// Inverse of split_latent. The identity and attribute row counts must sum to
/// 18 and both must be 512 wide.
inline LatentCode merge_latent(const Matrix& identity, const Matrix& attributes) {
  if (identity.cols() != kStyleWidth || attributes.cols() != kStyleWidth ||
      identity.rows() + attributes.rows() != kStyleRows || identity.rows() == 0 ||
      attributes.rows() == 0) {
    throw InputError("cannot merge identity " + identity.shape_string() +
                     " with attributes " + attributes.shape_string() +
                     " into an 18x512 latent");
  }
  return LatentCode(stack_rows(identity, attributes));
}

inline LatentCode merge_latent(const LatentParts& parts) {
  return merge_latent(parts.identity, parts.attributes);
}

/// Identity-transfer offset added to both subjects' identity rows.
class LatentDirection {
 public:
  explicit LatentDirection(Matrix m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.cols() == 0) throw InputError("empty latent direction");
    if (!m_.all_finite()) throw InputError("latent direction has non-finite components");
  }

  const Matrix& matrix() const noexcept { return m_; }

 private:
  Matrix m_;
};

}  // namespace morphlab
