#ifndef RWMLAB_MATRIX_HPP
#define RWMLAB_MATRIX_HPP

#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace rwmlab {

/// Small dense square matrix, row-major. Sized for state spaces of a
/// handful of dimensions; nothing here is tuned for large matrices.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim, 0.0) {}
  SquareMatrix(int dim, std::initializer_list<double> entries);

  static SquareMatrix identity(int dim);
  static SquareMatrix diagonal(std::span<const double> d);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * dim_ + j]; }
  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * dim_ + j]; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const;
  double max_abs() const;
  double trace() const;

  SquareMatrix& operator+=(const SquareMatrix& rhs);
  SquareMatrix& operator-=(const SquareMatrix& rhs);
  SquareMatrix& operator*=(double s);
  SquareMatrix transpose() const;

  friend SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b);
  friend SquareMatrix operator+(SquareMatrix a, const SquareMatrix& b) { return a += b; }
  friend SquareMatrix operator-(SquareMatrix a, const SquareMatrix& b) { return a -= b; }
  friend SquareMatrix operator*(SquareMatrix a, double s) { return a *= s; }
  friend SquareMatrix operator*(double s, SquareMatrix a) { return a *= s; }

 private:
  int dim_ = 0;
  std::vector<double> data_;
};

/// Discrete distribution over states: entries nonnegative, summing to one.
using ProbVector = std::vector<double>;

/// e^(a*t) by scaling-and-squaring with a fixed-order diagonal Pade
/// approximant. Exact identity for t = 0. Throws std::invalid_argument for
/// non-finite entries or t < 0.
SquareMatrix mat_exp(const SquareMatrix& a, double t);

/// True if q is a conservative generator: off-diagonals >= 0 and every row
/// sums to zero (within a scale-relative tolerance).
bool is_generator(const SquareMatrix& q, double tol = 1e-9);

/// Stationary distribution nu of an irreducible conservative generator,
/// solving nu*Q = 0 with the normalization row appended (least squares via
/// normal equations). Throws std::invalid_argument for non-generator or
/// reducible input.
ProbVector stationary_dist(const SquareMatrix& q);

/// Solves a x = b by Gaussian elimination with partial pivoting.
/// Throws std::invalid_argument if a is singular to working precision.
std::vector<double> solve_linear(SquareMatrix a, std::vector<double> b);

/// Solves a X = b column by column (shared factorization).
SquareMatrix solve_matrix(SquareMatrix a, SquareMatrix b);

/// Lower-triangular L with sigma = L L^T, or nullopt if sigma is not
/// positive definite.
std::optional<SquareMatrix> cholesky(const SquareMatrix& sigma);

/// Forward substitution: solves L y = b for lower-triangular L.
std::vector<double> solve_lower(const SquareMatrix& l, std::span<const double> b);

/// Row vector times matrix (v^T M).
std::vector<double> row_times(std::span<const double> v, const SquareMatrix& m);

/// Matrix times column vector (M v).
std::vector<double> times_col(const SquareMatrix& m, std::span<const double> v);

}  // namespace rwmlab

#endif  // RWMLAB_MATRIX_HPP
