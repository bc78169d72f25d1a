#pragma once

#include <cassert>
#include <cstddef>
#include <utility>
#include <vector>

namespace degen {

/// Dense row-major matrix. Vectors are 1×n matrices or plain std::vector.
/// Row convention throughout: a map f is a matrix whose row i is f(e_i).
template <class T>
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, const T& fill)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  T& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  const T& operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  std::vector<T> row(std::size_t i) const {
    return std::vector<T>(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                          data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }
  void set_row(std::size_t i, const std::vector<T>& v) {
    assert(v.size() == cols_);
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = v[j];
  }
  /// Appends a row; an empty matrix adopts the row's width.
  void push_row(const std::vector<T>& v) {
    if (rows_ == 0) cols_ = v.size();
    assert(v.size() == cols_);
    data_.insert(data_.end(), v.begin(), v.end());
    ++rows_;
  }
  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
  }
  void swap_cols(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
  }
  /// Keeps the width when no rows exist (needed for zero-row relation sets).
  void set_cols(std::size_t c) {
    assert(rows_ == 0);
    cols_ = c;
  }

  friend bool operator==(const Mat& a, const Mat& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class T>
Mat<T> vstack(const Mat<T>& a, const Mat<T>& b) {
  assert(a.cols() == b.cols() || a.rows() == 0 || b.rows() == 0);
  Mat<T> out;
  out.set_cols(a.rows() ? a.cols() : b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) out.push_row(a.row(i));
  for (std::size_t i = 0; i < b.rows(); ++i) out.push_row(b.row(i));
  if (out.rows() == 0) out.set_cols(a.cols() ? a.cols() : b.cols());
  return out;
}

template <class T>
Mat<T> select_rows(const Mat<T>& a, const std::vector<std::size_t>& idx) {
  Mat<T> out;
  out.set_cols(a.cols());
  for (auto i : idx) out.push_row(a.row(i));
  return out;
}

}  // namespace degen
