#pragma once

// Subset-selection procedures. Every solver returns a RecoveryResult whose
// support is supp(estimate) under a relative tolerance.
//
//   solve_l0                 min_J ||(I - P_J) y||^2 + sigma^2 Gamma0 |J|  (enumeration)
//   oracle_known_k           min_{|J| = k} ||(I - P_J) y||^2
//   solve_l1_penalty         min_b 1/2 ||y - Xb||^2 + sigma Gamma1 ||b||_1  (cyclic CD)
//   solve_l1_error           min_b ||b||_1  s.t. ||y - Xb||_2 <= sigma Gamma2  (bisection on the penalty path)
//   solve_dantzig_orthonormal  closed form soft threshold for X^T X = I
//   omp                      orthogonal matching pursuit with known-k, RPSC or RCSC stopping

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "snr_sentry/combinatorics.hpp"
#include "snr_sentry/linalg.hpp"
#include "snr_sentry/tuning.hpp"

namespace snr_sentry {

inline constexpr double kSupportTol = 1e-8;

struct OmpStep {
  Index index = 0;
  double residual_norm = 0.0;
};

struct RecoveryResult {
  Vector estimate;
  SupportSet support;
  double objective = 0.0;
  std::size_t iterations = 0;
  std::vector<OmpStep> trace;             // OMP only
  std::vector<double> objective_history;  // l1-penalty, when requested
  std::string diagnostic;                 // non-fatal stop reason, empty otherwise
};

/// { j : |b_j| > tol * max(1, ||b||_inf) }, ascending.
inline SupportSet support_of(const Vector& estimate, double tol = kSupportTol) {
  const double scale = std::max(1.0, estimate.size() ? estimate.cwiseAbs().maxCoeff() : 0.0);
  SupportSet s;
  for (Index j = 0; j < estimate.size(); ++j) {
    if (std::abs(estimate(j)) > tol * scale) s.push_back(j);
  }
  return s;
}

inline double soft_threshold(double z, double t) {
  const double m = std::abs(z) - t;
  return m > 0.0 ? std::copysign(m, z) : 0.0;
}

/// Thrown when an iterative solver exhausts its budget; carries the best iterate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, RecoveryResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const RecoveryResult& best_iterate() const { return best_; }

 private:
  RecoveryResult best_;
};

// --------------------------------------------------------------------------
// Subset enumeration (l0 penalty and known-k oracle)
// --------------------------------------------------------------------------

inline constexpr std::uint64_t kDefaultSubsetGuard = 10'000'000;

namespace detail {

/// Exhaustive search over supports with min_card <= |J| <= max_card of
/// ||(I - P_J) y||^2 + penalty[|J|].
///
/// Subtrees whose penalty alone exceeds the incumbent are skipped.
/// Supports are grown depth first while an incremental Cholesky factor of the
/// Gram matrix yields ||P_J y||^2 in O(|J|^2) per node. A column whose
/// distance to the current span falls under 1e-3 of its norm sends that whole
/// subtree to the SVD-based projection, so rank-deficient supports use the
/// shared rank rule.
///
/// Ties within a few ulps of ||y||^2 go to the smaller cardinality, then to
/// the lexicographically smaller sorted index list.
class SubsetSearch {
 public:
  SubsetSearch(const DesignMatrix& x, const Vector& y, Index min_card, Index max_card, std::vector<double> penalty)
      : x_(x),
        y_(y),
        p_(x.cols()),
        min_card_(min_card),
        max_card_(max_card),
        penalty_(std::move(penalty)),
        gram_(x.entries().transpose() * x.entries()),
        z_(x.entries().transpose() * y),
        yy_(y.squaredNorm()),
        chol_(Matrix::Zero(std::max<Index>(max_card, 1), std::max<Index>(max_card, 1))),
        w_(Vector::Zero(std::max<Index>(max_card, 1))),
        proj_(static_cast<std::size_t>(max_card) + 1, 0.0) {
    tie_tol_ = 64.0 * std::numeric_limits<double>::epsilon() * yy_;
    // Residuals are nonnegative, so no support deeper than d can score below
    // min_{m >= d} penalty[m].
    floor_.assign(penalty_.size() + 1, std::numeric_limits<double>::infinity());
    for (std::size_t m = penalty_.size(); m-- > 0;) floor_[m] = std::min(floor_[m + 1], penalty_[m]);
  }

  struct Outcome {
    std::vector<Index> indices;  // ascending
    double objective = std::numeric_limits<double>::infinity();
    std::uint64_t evaluated = 0;
  };

  Outcome run() {
    idx_.clear();
    if (min_card_ == 0) consider(yy_);
    seed_greedy();
    if (max_card_ > 0) dfs(0, 0);
    return best_;
  }

 private:
  static constexpr double kPivotFloor = 1e-6;  // squared relative distance

  /// Scores the greedy nested supports first so the penalty bound prunes
  /// early. The enumeration still visits every support, so the result is
  /// unchanged.
  void seed_greedy() {
    SupportSet chosen;
    Vector r = y_;
    for (Index m = 1; m <= max_card_; ++m) {
      const Vector corr = x_.entries().transpose() * r;
      Index pick = -1;
      double best = -1.0;
      for (Index t = 0; t < p_; ++t) {
        if (!chosen.contains(t) && std::abs(corr(t)) > best) {
          best = std::abs(corr(t));
          pick = t;
        }
      }
      if (pick < 0) break;
      chosen.push_back(pick);
      ProjectionResult pr = projection_residual(x_, chosen, y_);
      if (pr.rank < m) break;
      r = std::move(pr.residual);
      if (m >= min_card_) {
        idx_ = chosen.sorted();
        consider(pr.residual_sq);
      }
    }
    idx_.clear();
  }

  void consider(double residual_sq) {
    ++best_.evaluated;
    const Index card = static_cast<Index>(idx_.size());
    const double value = std::max(residual_sq, 0.0) + penalty_[static_cast<std::size_t>(card)];
    if (best_.indices.empty() && !std::isfinite(best_.objective)) {
      take(value);
      return;
    }
    if (value < best_.objective - tie_tol_) {
      take(value);
    } else if (value <= best_.objective + tie_tol_) {
      const Index best_card = static_cast<Index>(best_.indices.size());
      if (card < best_card || (card == best_card && idx_ < best_.indices)) take(value);
    }
  }

  void take(double value) {
    best_.objective = value;
    best_.indices = idx_;
  }

  bool room_for_min(Index depth_after, Index j) const {
    return depth_after + (p_ - 1 - j) >= min_card_;
  }

  bool pruned(Index depth_after) const {
    return floor_[static_cast<std::size_t>(depth_after)] > best_.objective + tie_tol_;
  }

  void dfs(Index depth, Index start) {
    if (pruned(depth + 1)) return;
    for (Index j = start; j < p_; ++j) {
      if (!room_for_min(depth + 1, j)) break;
      // Forward substitution L l = G(J, j).
      double lsq = 0.0;
      double wdot = 0.0;
      for (Index i = 0; i < depth; ++i) {
        double s = gram_(idx_[static_cast<std::size_t>(i)], j);
        for (Index m = 0; m < i; ++m) s -= chol_(i, m) * chol_(depth, m);
        const double li = s / chol_(i, i);
        chol_(depth, i) = li;
        lsq += li * li;
        wdot += li * w_(i);
      }
      const double gjj = gram_(j, j);
      const double piv2 = gjj - lsq;
      idx_.push_back(j);
      if (!(piv2 > kPivotFloor * gjj)) {
        exact_subtree(j + 1);
      } else {
        const double piv = std::sqrt(piv2);
        chol_(depth, depth) = piv;
        w_(depth) = (z_(j) - wdot) / piv;
        proj_[static_cast<std::size_t>(depth) + 1] = proj_[static_cast<std::size_t>(depth)] + w_(depth) * w_(depth);
        if (depth + 1 >= min_card_) consider(yy_ - proj_[static_cast<std::size_t>(depth) + 1]);
        if (depth + 1 < max_card_) dfs(depth + 1, j + 1);
      }
      idx_.pop_back();
    }
  }

  void exact_subtree(Index start) {
    const Index depth = static_cast<Index>(idx_.size());
    if (depth >= min_card_) {
      consider(projection_residual(x_, SupportSet(idx_), y_).residual_sq);
    }
    if (depth >= max_card_ || pruned(depth + 1)) return;
    for (Index j = start; j < p_; ++j) {
      if (!room_for_min(depth + 1, j)) break;
      idx_.push_back(j);
      exact_subtree(j + 1);
      idx_.pop_back();
    }
  }

  const DesignMatrix& x_;
  const Vector& y_;
  Index p_;
  Index min_card_;
  Index max_card_;
  std::vector<double> penalty_;
  std::vector<double> floor_;
  Matrix gram_;
  Vector z_;
  double yy_;
  double tie_tol_ = 0.0;
  Matrix chol_;
  Vector w_;
  std::vector<double> proj_;
  std::vector<Index> idx_;
  Outcome best_;
};

inline RecoveryResult finish_subset_result(const DesignMatrix& x, const Vector& y,
                                           const SubsetSearch::Outcome& found) {
  RecoveryResult out;
  out.estimate = Vector::Zero(x.cols());
  out.objective = found.objective;
  out.iterations = static_cast<std::size_t>(found.evaluated);
  if (!found.indices.empty()) {
    const SupportSet chosen(found.indices);
    const LeastSquaresResult ls = least_squares_min_norm(x, chosen, y);
    for (std::size_t i = 0; i < chosen.size(); ++i) out.estimate(chosen[i]) = ls.coefficients(static_cast<Index>(i));
  }
  out.support = support_of(out.estimate);
  return out;
}

inline void check_enumeration(const DesignMatrix& x, Index max_card, std::uint64_t guard, const char* who) {
  const Index limit = std::min(x.rows(), x.cols());
  if (max_card < 0 || max_card > limit) {
    throw std::invalid_argument(std::string(who) + ": cardinality must lie in [0, min(n, p)] = [0, " +
                                std::to_string(limit) + "]");
  }
  const std::uint64_t count = count_subsets_up_to(x.cols(), max_card);
  if (count > guard) {
    throw EnumerationGuardError(std::string(who) + ": " + std::to_string(count) + " subsets exceed the guard of " +
                                std::to_string(guard));
  }
}

}  // namespace detail

struct L0Options {
  std::uint64_t subset_guard = kDefaultSubsetGuard;
  GammaOptions gamma;
};

/// Penalty sigma^2 Gamma0(k) k for k = 0..max_card; Gamma0 is evaluated per
/// cardinality because EBIC depends on it.
inline std::vector<double> l0_penalties(const TuningRule& rule, Index n, Index p, Index max_card, double sigma_sq,
                                        const GammaOptions& gopts = {}) {
  std::vector<double> pen(static_cast<std::size_t>(max_card) + 1, 0.0);
  for (Index k = 1; k <= max_card; ++k) {
    pen[static_cast<std::size_t>(k)] = sigma_sq * gamma_value(rule, n, p, k, sigma_sq, gopts) * static_cast<double>(k);
  }
  return pen;
}

inline RecoveryResult solve_l0(const DesignMatrix& x, const Vector& y, double sigma_sq, const TuningRule& rule,
                               Index max_card, const L0Options& opts = {}) {
  x.check_observation(y);
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) throw std::invalid_argument("solve_l0: sigma^2 must be positive");
  if (rule.target != Target::kL0) throw std::invalid_argument("solve_l0: rule target must be L0");
  detail::check_enumeration(x, max_card, opts.subset_guard, "solve_l0");
  detail::SubsetSearch search(x, y, 0, max_card, l0_penalties(rule, x.rows(), x.cols(), max_card, sigma_sq, opts.gamma));
  return detail::finish_subset_result(x, y, search.run());
}

inline RecoveryResult oracle_known_k(const DesignMatrix& x, const Vector& y, Index k_star,
                                     std::uint64_t subset_guard = kDefaultSubsetGuard) {
  x.check_observation(y);
  if (k_star < 1) throw std::invalid_argument("oracle_known_k: k* must be >= 1");
  detail::check_enumeration(x, k_star, subset_guard, "oracle_known_k");
  detail::SubsetSearch search(x, y, k_star, k_star, std::vector<double>(static_cast<std::size_t>(k_star) + 1, 0.0));
  return detail::finish_subset_result(x, y, search.run());
}

// --------------------------------------------------------------------------
// l1 penalty (LASSO / BPDN) by cyclic coordinate descent
// --------------------------------------------------------------------------

/// Largest violation of the l1-penalty stationarity conditions at b:
/// |g_j - lambda sign(b_j)| for b_j != 0 and (|g_j| - lambda)_+ for b_j = 0,
/// with g = X^T (y - X b).
inline double l1_kkt_residual(const Matrix& x, const Vector& y, const Vector& b, double lambda) {
  const Vector g = x.transpose() * (y - x * b);
  double worst = 0.0;
  for (Index j = 0; j < b.size(); ++j) {
    const double v = b(j) != 0.0 ? std::abs(g(j) - std::copysign(lambda, b(j))) : std::max(0.0, std::abs(g(j)) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

struct L1PenaltyOptions {
  double tol_kkt = 1e-9;
  std::size_t max_sweeps = 100'000;
  bool record_objective = false;
  std::optional<Vector> warm_start;
};

inline RecoveryResult solve_l1_penalty_lambda(const DesignMatrix& x, const Vector& y, double lambda,
                                              const L1PenaltyOptions& opts = {}) {
  x.check_observation(y);
  x.require_unit_norm("solve_l1_penalty");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("solve_l1_penalty: sigma * Gamma1 must be positive");
  const Matrix& a = x.entries();
  const Index p = a.cols();

  Vector b = Vector::Zero(p);
  if (opts.warm_start) {
    if (opts.warm_start->size() != p) throw DimensionError("solve_l1_penalty: warm start has wrong length");
    b = *opts.warm_start;
  }
  Vector r = y - a * b;
  const auto objective = [&] { return 0.5 * r.squaredNorm() + lambda * b.lpNorm<1>(); };

  RecoveryResult out;
  if (opts.record_objective) out.objective_history.push_back(objective());

  // One pass over the given coordinates; returns the largest coefficient change.
  const auto sweep = [&](auto&& coords) {
    double max_delta = 0.0;
    for (Index j : coords) {
      const double old = b(j);
      const double nb = soft_threshold(a.col(j).dot(r) + old, lambda);
      if (nb != old) {
        r.noalias() -= (nb - old) * a.col(j);
        b(j) = nb;
        max_delta = std::max(max_delta, std::abs(nb - old));
      }
    }
    return max_delta;
  };

  std::vector<Index> all(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) all[static_cast<std::size_t>(j)] = j;
  std::vector<Index> active;

  double best_kkt = std::numeric_limits<double>::infinity();
  Vector best_b = b;
  std::size_t sweeps = 0;
  while (sweeps < opts.max_sweeps) {
    sweep(all);
    ++sweeps;
    if (opts.record_objective) out.objective_history.push_back(objective());
    r = y - a * b;  // refresh against drift before certifying
    const double kkt = l1_kkt_residual(a, y, b, lambda);
    if (kkt < best_kkt) {
      best_kkt = kkt;
      best_b = b;
    }
    if (kkt <= opts.tol_kkt) break;

    active.clear();
    for (Index j = 0; j < p; ++j) {
      if (b(j) != 0.0) active.push_back(j);
    }
    // Converge on the active set before the next full pass.
    const double inner_tol = std::max(opts.tol_kkt * 1e-2, 1e-300);
    for (int inner = 0; inner < 1000 && sweeps < opts.max_sweeps && !active.empty(); ++inner) {
      const double delta = sweep(active);
      ++sweeps;
      if (opts.record_objective) out.objective_history.push_back(objective());
      if (delta <= inner_tol) break;
    }
  }

  const bool converged = best_kkt <= opts.tol_kkt;
  out.estimate = best_b;
  r = y - a * best_b;
  out.objective = 0.5 * r.squaredNorm() + lambda * best_b.lpNorm<1>();
  out.iterations = sweeps;
  out.support = support_of(out.estimate);
  if (!converged) {
    out.diagnostic = "max_sweeps exhausted with KKT residual " + std::to_string(best_kkt);
    throw ConvergenceError("solve_l1_penalty: " + out.diagnostic, std::move(out));
  }
  return out;
}

inline RecoveryResult solve_l1_penalty(const DesignMatrix& x, const Vector& y, double sigma, double gamma1,
                                       const L1PenaltyOptions& opts = {}) {
  if (!(sigma > 0.0) || !(gamma1 > 0.0)) throw std::invalid_argument("solve_l1_penalty: sigma and Gamma1 must be positive");
  return solve_l1_penalty_lambda(x, y, sigma * gamma1, opts);
}

// --------------------------------------------------------------------------
// l1 error (constrained basis pursuit denoising)
// --------------------------------------------------------------------------

struct L1ErrorOptions {
  double tol_res = 1e-6;
  std::size_t max_bisections = 200;
  double tol_kkt = 1e-9;
  std::size_t max_sweeps = 100'000;
};

/// Walks the penalized path: the residual norm of the l1-penalty solution is
/// nondecreasing in lambda, so bisection on log(lambda) finds the point whose
/// residual lies in [sigma Gamma2 (1 - tol_res), sigma Gamma2].
inline RecoveryResult solve_l1_error(const DesignMatrix& x, const Vector& y, double sigma, double gamma2,
                                     const L1ErrorOptions& opts = {}) {
  x.check_observation(y);
  x.require_unit_norm("solve_l1_error");
  if (!(sigma > 0.0) || !(gamma2 > 0.0)) throw std::invalid_argument("solve_l1_error: sigma and Gamma2 must be positive");
  const Matrix& a = x.entries();
  const double target = sigma * gamma2;
  const double ynorm = y.norm();

  RecoveryResult out;
  if (ynorm <= target) {
    out.estimate = Vector::Zero(a.cols());
    out.objective = 0.0;
    return out;
  }

  const double lambda_max = (a.transpose() * y).cwiseAbs().maxCoeff();
  const double lower_target = target * (1.0 - opts.tol_res);
  L1PenaltyOptions inner;
  inner.max_sweeps = opts.max_sweeps;
  inner.tol_kkt = std::max(std::min(opts.tol_kkt, 1e-2 * opts.tol_res * target), 1e-14 * std::max(1.0, lambda_max));

  std::size_t evaluations = 0;
  const auto solve_at = [&](double lambda) {
    ++evaluations;
    RecoveryResult r = solve_l1_penalty_lambda(x, y, lambda, inner);
    inner.warm_start = r.estimate;
    const double res = (y - a * r.estimate).norm();
    return std::pair<RecoveryResult, double>(std::move(r), res);
  };

  // Bracket: hi is infeasible (at lambda_max the solution is zero), lo feasible.
  double hi = lambda_max;
  double lo = lambda_max;
  std::optional<RecoveryResult> feasible;
  double feasible_res = 0.0;
  while (true) {
    lo *= 1e-3;
    if (lo < lambda_max * 1e-16) {
      throw std::runtime_error("solve_l1_error: constraint ||y - Xb|| <= sigma Gamma2 appears infeasible");
    }
    auto [r, res] = solve_at(lo);
    if (res <= target) {
      feasible = std::move(r);
      feasible_res = res;
      break;
    }
    hi = lo;
  }

  std::size_t iter = 0;
  while (feasible_res < lower_target) {
    if (iter++ >= opts.max_bisections) {
      throw ConvergenceError("solve_l1_error: bisection cap reached", *feasible);
    }
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;  // bracket exhausted at machine precision
    auto [r, res] = solve_at(mid);
    if (res <= target) {
      lo = mid;
      feasible = std::move(r);
      feasible_res = res;
    } else {
      hi = mid;
    }
  }

  out.estimate = feasible->estimate;
  out.support = support_of(out.estimate);
  out.objective = out.estimate.lpNorm<1>();
  out.iterations = evaluations;
  if (feasible_res < lower_target) out.diagnostic = "lambda bracket exhausted before reaching the residual band";
  return out;
}

// --------------------------------------------------------------------------
// Dantzig selector, orthonormal design only
// --------------------------------------------------------------------------

inline constexpr double kOrthonormalTol = 1e-8;

inline RecoveryResult solve_dantzig_orthonormal(const DesignMatrix& x, const Vector& y, double sigma, double gamma3) {
  x.check_observation(y);
  if (!(sigma > 0.0) || !(gamma3 > 0.0)) throw std::invalid_argument("solve_dantzig_orthonormal: sigma and Gamma3 must be positive");
  const Matrix& a = x.entries();
  const Matrix gram = a.transpose() * a;
  const double dev = (gram - Matrix::Identity(a.cols(), a.cols())).cwiseAbs().maxCoeff();
  if (dev > kOrthonormalTol) {
    throw PreconditionError("solve_dantzig_orthonormal: X^T X deviates from I by " + std::to_string(dev));
  }
  const double t = sigma * gamma3;
  const Vector z = a.transpose() * y;
  RecoveryResult out;
  out.estimate = z.unaryExpr([t](double v) { return soft_threshold(v, t); });
  out.support = support_of(out.estimate);
  out.objective = out.estimate.lpNorm<1>();
  return out;
}

// --------------------------------------------------------------------------
// Orthogonal matching pursuit
// --------------------------------------------------------------------------

struct StopRule {
  enum class Kind { kKnownK, kRpsc, kRcsc };
  Kind kind = Kind::kKnownK;
  Index k = 0;         // known k
  double gamma = 0.0;  // Gamma4 (RPSC) or Gamma5 (RCSC)
  Index max_iterations = 0;  // 0 means n

  static StopRule known_k(Index k, Index max_iterations = 0) { return {Kind::kKnownK, k, 0.0, max_iterations}; }
  static StopRule rpsc(double gamma4, Index max_iterations = 0) { return {Kind::kRpsc, 0, gamma4, max_iterations}; }
  static StopRule rcsc(double gamma5, Index max_iterations = 0) { return {Kind::kRcsc, 0, gamma5, max_iterations}; }
};

/// Greedy selection t_i = argmax_t |X_t^T r^{i-1}| (smallest index on ties)
/// with r^i = (I - P_{J^i}) y. Stop conditions are also checked on r^0 = y.
inline RecoveryResult omp(const DesignMatrix& x, const Vector& y, double sigma, const StopRule& stop) {
  x.check_observation(y);
  x.require_unit_norm("omp");
  const Matrix& a = x.entries();
  const Index n = a.rows();
  const Index p = a.cols();
  const Index max_iter = stop.max_iterations == 0 ? std::min(n, p) : stop.max_iterations;
  if (max_iter < 1 || max_iter > n) throw std::invalid_argument("omp: max_iterations must lie in [1, n]");
  if (stop.kind == StopRule::Kind::kKnownK && (stop.k < 0 || stop.k > max_iter || stop.k > p)) {
    throw std::invalid_argument("omp: known k must lie in [0, max_iterations]");
  }
  if (stop.kind != StopRule::Kind::kKnownK && (!(sigma > 0.0) || !(stop.gamma > 0.0))) {
    throw std::invalid_argument("omp: sigma and the stopping parameter must be positive");
  }
  const double threshold = sigma * stop.gamma;

  const auto should_stop = [&](Index iteration, const Vector& r) {
    switch (stop.kind) {
      case StopRule::Kind::kKnownK: return iteration >= stop.k;
      case StopRule::Kind::kRpsc: return r.norm() < threshold;
      case StopRule::Kind::kRcsc: return (a.transpose() * r).cwiseAbs().maxCoeff() < threshold;
    }
    return true;
  };

  RecoveryResult out;
  SupportSet chosen;
  Vector r = y;
  Index it = 0;
  bool stopped = should_stop(0, r);
  while (!stopped && it < max_iter) {
    const Vector corr = a.transpose() * r;
    Index pick = -1;
    double best = -1.0;
    for (Index t = 0; t < p; ++t) {
      if (chosen.contains(t)) continue;
      const double c = std::abs(corr(t));
      if (c > best) {
        best = c;
        pick = t;
      }
    }
    if (pick < 0) {
      out.diagnostic = "every column selected";
      break;
    }
    chosen.push_back(pick);
    ProjectionResult pr = projection_residual(x, chosen, y);
    if (pr.rank < static_cast<Index>(chosen.size())) {
      out.diagnostic = "column " + std::to_string(pick) + " is linearly dependent on the selected columns";
      SupportSet trimmed;
      for (std::size_t i = 0; i + 1 < chosen.size(); ++i) trimmed.push_back(chosen[i]);
      chosen = trimmed;
      break;
    }
    r = std::move(pr.residual);
    ++it;
    out.trace.push_back({pick, r.norm()});
    stopped = should_stop(it, r);
  }
  if (!stopped && out.diagnostic.empty()) out.diagnostic = "max_iterations reached before the stopping condition";

  out.estimate = Vector::Zero(p);
  if (!chosen.empty()) {
    const LeastSquaresResult ls = least_squares_min_norm(x, chosen, y);
    for (std::size_t i = 0; i < chosen.size(); ++i) out.estimate(chosen[i]) = ls.coefficients(static_cast<Index>(i));
    r = y - x.columns(chosen) * ls.coefficients;
  }
  out.support = support_of(out.estimate);
  out.objective = r.squaredNorm();
  out.iterations = static_cast<std::size_t>(it);
  return out;
}

}  // namespace snr_sentry
