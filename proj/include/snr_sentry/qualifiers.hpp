#pragma once

// Regularity qualifiers of a design matrix: mutual coherence, the sparsity
// limit implied by the mutual incoherence condition, the exact recovery
// coefficient of a support, and spark by exhaustive enumeration.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "snr_sentry/combinatorics.hpp"
#include "snr_sentry/linalg.hpp"

namespace snr_sentry {

/// max_{i != j} |X_i^T X_j|.
inline double mutual_coherence(const DesignMatrix& x) {
  if (x.cols() < 2) throw std::invalid_argument("mutual_coherence: needs p >= 2");
  x.require_unit_norm("mutual_coherence");
  const Matrix gram = x.entries().transpose() * x.entries();
  double mu = 0.0;
  for (Index j = 0; j < gram.cols(); ++j) {
    for (Index i = 0; i < j; ++i) mu = std::max(mu, std::abs(gram(i, j)));
  }
  return std::min(mu, 1.0);
}

/// Largest k with mu < 1/(2k-1). mu = 0 imposes no limit.
struct MicSparsity {
  bool unbounded = false;
  Index k = 0;

  friend bool operator==(const MicSparsity&, const MicSparsity&) = default;
};

inline MicSparsity mic_max_sparsity(double mu) {
  if (!(mu >= 0.0)) throw std::invalid_argument("mic_max_sparsity: mu must be nonnegative");
  if (mu == 0.0) return {true, 0};
  if (mu >= 1.0) return {false, 0};
  const auto holds = [mu](Index k) { return mu < 1.0 / static_cast<double>(2 * k - 1); };
  // k < (1 + 1/mu)/2; start from the closed form and settle rounding by direct checks.
  Index k = static_cast<Index>(std::ceil((1.0 + 1.0 / mu) / 2.0)) - 1;
  k = std::max<Index>(k, 0);
  while (holds(k + 1)) ++k;
  while (k >= 1 && !holds(k)) --k;
  return {false, k};
}

/// erc(X, J) = max_{j not in J} ||X_J^+ X_j||_1.
inline double erc_coefficient(const DesignMatrix& x, const SupportSet& support) {
  if (support.empty()) throw std::invalid_argument("erc_coefficient: empty support");
  support.check_bounds(x.cols());
  if (static_cast<Index>(support.size()) >= x.cols()) {
    throw std::invalid_argument("erc_coefficient: support covers every column");
  }
  const Matrix block = x.columns(support);
  const detail::RankedSvd svd(block);
  if (svd.rank < block.cols()) throw RankDeficientError("erc_coefficient: X_J is rank deficient");
  const Matrix pinv = svd.v * svd.s.cwiseInverse().asDiagonal() * svd.u.transpose();
  double erc = 0.0;
  for (Index j = 0; j < x.cols(); ++j) {
    if (support.contains(j)) continue;
    erc = std::max(erc, (pinv * x.col(j)).lpNorm<1>());
  }
  return erc;
}

/// Outcome of a bounded spark search.
///
/// exact: spark(X) == value.
/// otherwise: spark(X) > value (no dependent subset of size <= value exists).
/// all_columns_independent: every subset of all p columns was checked and is
/// independent; by convention the spark is reported as p + 1.
struct SparkResult {
  Index value = 0;
  bool exact = false;
  bool all_columns_independent = false;
  Index p = 0;

  Index conventional_value() const { return all_columns_independent ? p + 1 : value; }
  std::string describe() const {
    if (exact) return std::to_string(value);
    std::string s = "> " + std::to_string(value);
    if (all_columns_independent) s += " (all columns independent; reported as p+1 = " + std::to_string(p + 1) + ")";
    return s;
  }
};

inline constexpr std::uint64_t kDefaultSparkBudget = 200'000;

/// Largest cardinality up to min(n+1, p, 12) whose subset count fits the budget.
inline Index default_spark_cardinality(const DesignMatrix& x, std::uint64_t budget = kDefaultSparkBudget) {
  const Index cap = std::min<Index>({x.rows() + 1, Index{12}, x.cols()});
  Index card = 1;
  while (card < cap && count_subsets_up_to(x.cols(), card + 1) <= budget) ++card;
  return card;
}

/// Smallest dependent column subset, searched by increasing cardinality up to
/// max_cardinality. Dependence uses the shared rank rule.
inline SparkResult spark_exhaustive(const DesignMatrix& x, Index max_cardinality) {
  if (max_cardinality < 1) throw std::invalid_argument("spark_exhaustive: max_cardinality must be >= 1");
  const Index limit = std::min(x.rows() + 1, x.cols());
  if (max_cardinality > limit) {
    throw std::invalid_argument("spark_exhaustive: max_cardinality exceeds min(n+1, p) = " + std::to_string(limit));
  }
  const Matrix& e = x.entries();
  for (Index k = 1; k <= max_cardinality; ++k) {
    bool dependent = false;
    for_each_combination(x.cols(), k, [&](const std::vector<Index>& idx) {
      Matrix sub(x.rows(), k);
      for (Index i = 0; i < k; ++i) sub.col(i) = e.col(idx[static_cast<std::size_t>(i)]);
      if (detail::RankedSvd(sub).rank < k) {
        dependent = true;
        return false;
      }
      return true;
    });
    if (dependent) return SparkResult{k, true, false, x.cols()};
  }
  SparkResult out{max_cardinality, false, false, x.cols()};
  out.all_columns_independent = (max_cardinality == x.cols());
  return out;
}

/// True iff the spark evidence certifies spark(X) > 2 k*.
inline bool spark_condition_holds(const SparkResult& spark, Index k_star) {
  if (k_star < 0) throw std::invalid_argument("spark_condition_holds: k* must be >= 0");
  if (spark.all_columns_independent) return true;
  if (spark.exact) return spark.value > 2 * k_star;
  return spark.value >= 2 * k_star;
}

struct QualifierReport {
  double mutual_coherence = 0.0;
  MicSparsity mic_max_sparsity;
  SparkResult spark;
  std::optional<double> erc_coefficient;
  bool erc_holds = false;
};

inline QualifierReport qualify(const DesignMatrix& x, const std::optional<SupportSet>& support,
                               std::optional<Index> spark_cardinality = std::nullopt) {
  QualifierReport r;
  r.mutual_coherence = mutual_coherence(x);
  r.mic_max_sparsity = mic_max_sparsity(r.mutual_coherence);
  r.spark = spark_exhaustive(x, spark_cardinality.value_or(default_spark_cardinality(x)));
  if (support) {
    r.erc_coefficient = erc_coefficient(x, *support);
    r.erc_holds = *r.erc_coefficient < 1.0;
  }
  return r;
}

}  // namespace snr_sentry
