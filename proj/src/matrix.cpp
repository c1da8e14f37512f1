#include "rwmlab/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rwmlab {

SquareMatrix::SquareMatrix(int dim, std::initializer_list<double> entries)
    : dim_(dim), data_(entries) {
  if (dim < 1 || data_.size() != static_cast<std::size_t>(dim) * dim) {
    throw std::invalid_argument("SquareMatrix: entry count does not match dimension");
  }
}

SquareMatrix SquareMatrix::identity(int dim) {
  SquareMatrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

SquareMatrix SquareMatrix::diagonal(std::span<const double> d) {
  SquareMatrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.dim(); ++i) m(i, i) = d[i];
  return m;
}

bool SquareMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

double SquareMatrix::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

double SquareMatrix::trace() const {
  double t = 0.0;
  for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

SquareMatrix& SquareMatrix::operator+=(const SquareMatrix& rhs) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

SquareMatrix& SquareMatrix::operator-=(const SquareMatrix& rhs) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

SquareMatrix& SquareMatrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

SquareMatrix SquareMatrix::transpose() const {
  SquareMatrix t(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) {
  const int n = a.dim();
  SquareMatrix c(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

namespace {

// LU with partial pivoting, in place. Returns the permuted row order.
// Throws on a pivot that is zero to working precision.
std::vector<int> lu_factor(SquareMatrix& a) {
  const int n = a.dim();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  const double scale = std::max(a.max_abs(), 1.0);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) < 1e-13 * scale) {
      throw std::invalid_argument("solve_linear: singular matrix");
    }
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(perm[k], perm[piv]);
    }
    for (int i = k + 1; i < n; ++i) {
      a(i, k) /= a(k, k);
      const double lik = a(i, k);
      for (int j = k + 1; j < n; ++j) a(i, j) -= lik * a(k, j);
    }
  }
  return perm;
}

std::vector<double> lu_solve(const SquareMatrix& lu, const std::vector<int>& perm,
                             std::span<const double> b) {
  const int n = lu.dim();
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = b[perm[i]];
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) x[i] -= lu(i, j) * x[j];
    x[i] /= lu(i, i);
  }
  return x;
}

}  // namespace

std::vector<double> solve_linear(SquareMatrix a, std::vector<double> b) {
  if (a.dim() != static_cast<int>(b.size())) {
    throw std::invalid_argument("solve_linear: dimension mismatch");
  }
  auto perm = lu_factor(a);
  return lu_solve(a, perm, b);
}

SquareMatrix solve_matrix(SquareMatrix a, SquareMatrix b) {
  const int n = a.dim();
  auto perm = lu_factor(a);
  SquareMatrix x(n);
  std::vector<double> col(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) col[i] = b(i, j);
    auto xc = lu_solve(a, perm, col);
    for (int i = 0; i < n; ++i) x(i, j) = xc[i];
  }
  return x;
}

std::optional<SquareMatrix> cholesky(const SquareMatrix& sigma) {
  const int n = sigma.dim();
  SquareMatrix l(n);
  for (int j = 0; j < n; ++j) {
    double d = sigma(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = sigma(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

std::vector<double> solve_lower(const SquareMatrix& l, std::span<const double> b) {
  const int n = l.dim();
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int j = 0; j < i; ++j) s -= l(i, j) * y[j];
    y[i] = s / l(i, i);
  }
  return y;
}

std::vector<double> row_times(std::span<const double> v, const SquareMatrix& m) {
  const int n = m.dim();
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    for (int j = 0; j < n; ++j) out[j] += vi * m(i, j);
  }
  return out;
}

std::vector<double> times_col(const SquareMatrix& m, std::span<const double> v) {
  const int n = m.dim();
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

SquareMatrix mat_exp(const SquareMatrix& a, double t) {
  if (!a.all_finite() || !std::isfinite(t)) {
    throw std::invalid_argument("mat_exp: non-finite input");
  }
  if (t < 0.0) {
    throw std::invalid_argument("mat_exp: negative time");
  }
  const int n = a.dim();
  SquareMatrix b = a * t;

  // Scale so the Pade argument has norm <= 1/2, square back afterwards.
  int squarings = 0;
  double norm = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += std::abs(b(i, j));
    norm = std::max(norm, row);
  }
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    b *= std::pow(2.0, -squarings);
  }

  // Diagonal Pade of order 6: coefficients c_{j+1} = c_j (6-j)/((12-j)(j+1)).
  constexpr int order = 6;
  double c[order + 1];
  c[0] = 1.0;
  for (int j = 0; j < order; ++j) {
    c[j + 1] = c[j] * static_cast<double>(order - j) /
               static_cast<double>((2 * order - j) * (j + 1));
  }

  SquareMatrix power = SquareMatrix::identity(n);
  SquareMatrix num = SquareMatrix::identity(n);   // sum c_j B^j
  SquareMatrix den = SquareMatrix::identity(n);   // sum c_j (-B)^j
  double sign = 1.0;
  for (int j = 1; j <= order; ++j) {
    power = power * b;
    sign = -sign;
    num += power * c[j];
    den += power * (sign * c[j]);
  }

  SquareMatrix result = solve_matrix(den, num);
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

bool is_generator(const SquareMatrix& q, double tol) {
  const int n = q.dim();
  if (n < 1 || !q.all_finite()) return false;
  const double scale = std::max(1.0, q.max_abs());
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i != j && q(i, j) < -tol * scale) return false;
      row += q(i, j);
    }
    if (std::abs(row) > tol * scale) return false;
  }
  return true;
}

ProbVector stationary_dist(const SquareMatrix& q) {
  const int n = q.dim();
  if (!is_generator(q)) {
    throw std::invalid_argument("stationary_dist: input is not a conservative generator");
  }
  if (n == 1) return {1.0};

  // Normal equations for the stacked system [Q^T; 1^T] nu = [0; 1].
  SquareMatrix qt = q.transpose();
  SquareMatrix gram(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 1.0;  // contribution of the all-ones normalization row
      for (int k = 0; k < n; ++k) s += qt(k, i) * qt(k, j);
      gram(i, j) = s;
    }
  }
  std::vector<double> rhs(n, 1.0);
  std::vector<double> nu = solve_linear(gram, rhs);

  // Residual check doubles as the irreducibility guard: a reducible
  // generator either trips the singularity check above or fails here.
  std::vector<double> resid = row_times(nu, q);
  for (double r : resid) {
    if (std::abs(r) > 1e-10) {
      throw std::invalid_argument("stationary_dist: no unique stationary distribution");
    }
  }
  double total = 0.0;
  for (double& x : nu) {
    if (x < -1e-10) {
      throw std::invalid_argument("stationary_dist: no unique stationary distribution");
    }
    x = std::max(x, 0.0);
    total += x;
  }
  for (double& x : nu) x /= total;
  return nu;
}

}  // namespace rwmlab
