#pragma once

// Dense kernels shared by every solver: restricted least squares with the
// minimum-norm convention, projection residuals (I - P_J) y and Gram-matrix
// diagnostics of a column submatrix X_J.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "snr_sentry/errors.hpp"

namespace snr_sentry {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Ordered set of distinct column indices. Insertion order is kept because
/// the order in which OMP selects columns is meaningful.
class SupportSet {
 public:
  SupportSet() = default;
  SupportSet(std::initializer_list<Index> indices) {
    for (Index j : indices) push_back(j);
  }
  explicit SupportSet(const std::vector<Index>& indices) {
    for (Index j : indices) push_back(j);
  }

  void push_back(Index j) {
    if (j < 0) throw DimensionError("support index must be nonnegative");
    if (contains(j)) {
      throw std::invalid_argument("support index " + std::to_string(j) + " repeated");
    }
    indices_.push_back(j);
  }

  bool contains(Index j) const {
    return std::find(indices_.begin(), indices_.end(), j) != indices_.end();
  }

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  Index operator[](std::size_t i) const { return indices_[i]; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }
  const std::vector<Index>& indices() const { return indices_; }

  std::vector<Index> sorted() const {
    auto out = indices_;
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Throws unless every index lies in [0, p).
  void check_bounds(Index p) const {
    for (Index j : indices_) {
      if (j >= p) {
        throw DimensionError("support index " + std::to_string(j) + " out of range for p = " +
                             std::to_string(p));
      }
    }
  }

  /// Ordered equality (same elements in the same insertion order).
  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<Index> indices_;
};

/// Set equality, ignoring insertion order.
inline bool same_set(const SupportSet& a, const SupportSet& b) {
  return a.size() == b.size() && a.sorted() == b.sorted();
}

/// Dense n x p design matrix together with its unit-norm-column status.
class DesignMatrix {
 public:
  static constexpr double kDefaultNormTol = 1e-10;

  explicit DesignMatrix(Matrix entries, double column_norm_tol = kDefaultNormTol)
      : entries_(std::move(entries)), column_norm_tol_(column_norm_tol) {
    if (entries_.rows() < 1 || entries_.cols() < 1) {
      throw DimensionError("design matrix needs n >= 1 and p >= 1");
    }
    if (!entries_.allFinite()) throw std::invalid_argument("design matrix has non-finite entries");
    unit_norm_ = true;
    for (Index j = 0; j < entries_.cols(); ++j) {
      if (std::abs(entries_.col(j).norm() - 1.0) > column_norm_tol_) {
        unit_norm_ = false;
        break;
      }
    }
  }

  /// Construct and assert the unit-norm flag; throws PreconditionError otherwise.
  static DesignMatrix with_unit_norm(Matrix entries, double column_norm_tol = kDefaultNormTol) {
    DesignMatrix x(std::move(entries), column_norm_tol);
    x.require_unit_norm("DesignMatrix::with_unit_norm");
    return x;
  }

  const Matrix& entries() const { return entries_; }
  Index rows() const { return entries_.rows(); }
  Index cols() const { return entries_.cols(); }
  auto col(Index j) const { return entries_.col(j); }
  double column_norm_tol() const { return column_norm_tol_; }
  bool has_unit_norm_columns() const { return unit_norm_; }

  void require_unit_norm(const std::string& who) const {
    if (!unit_norm_) {
      throw PreconditionError(who + ": design matrix columns must have unit l2 norm");
    }
  }

  void check_observation(const Vector& y) const {
    if (y.size() != rows()) {
      throw DimensionError("observation length " + std::to_string(y.size()) +
                           " does not match n = " + std::to_string(rows()));
    }
  }

  /// X_J, columns in the order of J.
  Matrix columns(const SupportSet& support) const {
    support.check_bounds(cols());
    Matrix out(rows(), static_cast<Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) out.col(static_cast<Index>(i)) = entries_.col(support[i]);
    return out;
  }

 private:
  Matrix entries_;
  double column_norm_tol_;
  bool unit_norm_ = false;
};

/// Singular values below rank_tolerance * sigma_max count as zero.
inline double rank_tolerance(Index rows, Index cols) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

namespace detail {

// Thin SVD of a column block with the numerical rank resolved once.
struct RankedSvd {
  Matrix u;       // n x r, orthonormal basis of col(X_J)
  Vector s;       // r leading singular values
  Matrix v;       // |J| x r
  Vector all_singular_values;
  Index rank = 0;

  explicit RankedSvd(const Matrix& block) {
    Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeThinU | Eigen::ComputeThinV);
    all_singular_values = svd.singularValues();
    const double smax = all_singular_values.size() > 0 ? all_singular_values(0) : 0.0;
    const double cutoff = rank_tolerance(block.rows(), block.cols()) * smax;
    rank = 0;
    while (rank < all_singular_values.size() && all_singular_values(rank) > cutoff && smax > 0.0) ++rank;
    u = svd.matrixU().leftCols(rank);
    v = svd.matrixV().leftCols(rank);
    s = all_singular_values.head(rank);
  }
};

}  // namespace detail

/// Numerical rank of X_J under the shared rank rule.
inline Index column_rank(const DesignMatrix& x, const SupportSet& support) {
  if (support.empty()) return 0;
  return detail::RankedSvd(x.columns(support)).rank;
}

struct LeastSquaresResult {
  Vector coefficients;  // length |J|, minimum-norm when X_J is rank deficient
  double residual_sq = 0.0;
  Index rank = 0;
};

/// Minimum-norm solution of min_a ||y - X_J a||_2 and ||(I - P_J) y||^2.
inline LeastSquaresResult least_squares_min_norm(const DesignMatrix& x, const SupportSet& support,
                                                 const Vector& y) {
  x.check_observation(y);
  if (support.empty()) throw std::invalid_argument("least_squares_min_norm: empty support");
  const detail::RankedSvd svd(x.columns(support));
  const Vector uty = svd.u.transpose() * y;
  LeastSquaresResult out;
  out.rank = svd.rank;
  out.coefficients = svd.v * uty.cwiseQuotient(svd.s);
  const Vector residual = y - svd.u * uty;
  out.residual_sq = residual.squaredNorm();
  return out;
}

struct ProjectionResult {
  Vector residual;  // (I - P_J) y
  double residual_sq = 0.0;
  Index rank = 0;  // rank(P_J) = rank(X_J)
};

/// (I - P_J) y, with P_J the orthogonal projector onto col(X_J); the empty
/// support has the zero projector.
inline ProjectionResult projection_residual(const DesignMatrix& x, const SupportSet& support,
                                            const Vector& y) {
  x.check_observation(y);
  ProjectionResult out;
  if (support.empty()) {
    out.residual = y;
    out.residual_sq = y.squaredNorm();
    return out;
  }
  const detail::RankedSvd svd(x.columns(support));
  out.rank = svd.rank;
  out.residual = y - svd.u * (svd.u.transpose() * y);
  out.residual_sq = out.residual.squaredNorm();
  return out;
}

struct GramDiagnostics {
  double gram_inverse_inf_norm = 0.0;  // ||(X_J^T X_J)^{-1}||_{inf,inf}
  Vector diag_sqrt;                    // c_j = sqrt(((X_J^T X_J)^{-1})_{jj})
  double min_eigenvalue = 0.0;         // lambda_min(X_J^T X_J)
  double pseudo_inverse_21_norm = 0.0; // max_{||v||_2 = 1} ||X_J^+ v||_1
  double pseudo_inverse_22_norm = 0.0; // spectral norm of X_J^+

  /// d_j = ||Gram^{-1}||_{inf,inf} / c_j.
  Vector d_sequence() const { return Vector::Constant(diag_sqrt.size(), gram_inverse_inf_norm).cwiseQuotient(diag_sqrt); }
};

/// Largest support size for which the exact (2,1) operator norm is computed
/// by sign enumeration.
inline constexpr std::size_t kMaxExact21NormSize = 24;

/// ||A||_{2,1} = max over sign vectors s of ||A^T s||_2 (exact, exponential in rows).
inline double operator_norm_2_to_1(const Matrix& a) {
  const Index m = a.rows();
  if (m == 0) return 0.0;
  if (static_cast<std::size_t>(m) > kMaxExact21NormSize) {
    throw std::domain_error("operator_norm_2_to_1: too many rows for exact sign enumeration");
  }
  // s and -s give the same value, so fix s_0 = +1.
  const std::uint64_t patterns = std::uint64_t{1} << (m - 1);
  Vector acc(a.cols());
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    acc = a.row(0).transpose();
    for (Index i = 1; i < m; ++i) {
      if ((mask >> (i - 1)) & 1U) {
        acc -= a.row(i).transpose();
      } else {
        acc += a.row(i).transpose();
      }
    }
    best = std::max(best, acc.norm());
  }
  return best;
}

/// Gram and pseudo-inverse diagnostics of X_J; requires full column rank.
inline GramDiagnostics gram_diagnostics(const DesignMatrix& x, const SupportSet& support) {
  if (support.empty()) throw std::invalid_argument("gram_diagnostics: empty support");
  const Matrix block = x.columns(support);
  const detail::RankedSvd svd(block);
  const Index k = block.cols();
  if (svd.rank < k) {
    throw RankDeficientError("gram_diagnostics: X_J is rank deficient (rank " +
                             std::to_string(svd.rank) + " < " + std::to_string(k) + ")");
  }
  const Vector inv_s = svd.s.cwiseInverse();
  const Matrix gram_inv = svd.v * inv_s.cwiseAbs2().asDiagonal() * svd.v.transpose();
  const Matrix pinv = svd.v * inv_s.asDiagonal() * svd.u.transpose();

  GramDiagnostics out;
  out.gram_inverse_inf_norm = gram_inv.cwiseAbs().rowwise().sum().maxCoeff();
  out.diag_sqrt = gram_inv.diagonal().cwiseMax(0.0).cwiseSqrt();
  out.min_eigenvalue = svd.s(k - 1) * svd.s(k - 1);
  out.pseudo_inverse_21_norm = operator_norm_2_to_1(pinv);
  out.pseudo_inverse_22_norm = inv_s(k - 1);
  return out;
}

}  // namespace snr_sentry
