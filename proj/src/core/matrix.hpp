#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace arrec {

using Vector = std::vector<double>;

// Square, row-major, dense. Dimensions here are tiny (d <= ~8) so there is
// no point in anything fancier.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t dim);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t dim() const noexcept { return dim_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
  std::span<const double> data() const noexcept { return data_; }

  /// Maximum row sum (the l-infinity operator norm for nonnegative matrices).
  double norm_inf() const;
  /// Maximum column sum.
  double norm_1() const;
  double min_entry() const;
  double max_entry() const;
  bool is_nonnegative() const;
  bool is_positive() const;
  bool is_zero() const;

  Matrix operator*(const Matrix& rhs) const;
  Matrix scaled(double factor) const;
  Matrix transposed() const;
  std::vector<std::vector<double>> rows() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

Vector multiply(const Matrix& a, std::span<const double> x);
double norm_inf(std::span<const double> x);
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace arrec
