#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "snr_sentry/linalg.hpp"

namespace snr_sentry {

/// log C(p, k) via log-gamma.
inline double log_binomial(Index p, Index k) {
  if (k < 0 || k > p) return -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(p) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(p - k) + 1.0);
}

/// sum_{k <= max_k} C(p, k), saturating at uint64 max.
inline std::uint64_t count_subsets_up_to(Index p, Index max_k) {
  std::uint64_t total = 0;
  long double c = 1.0L;  // C(p, 0)
  for (Index k = 0; k <= max_k && k <= p; ++k) {
    if (k > 0) c = c * static_cast<long double>(p - k + 1) / static_cast<long double>(k);
    const long double next = static_cast<long double>(total) + c;
    if (next >= static_cast<long double>(std::numeric_limits<std::uint64_t>::max())) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    total = static_cast<std::uint64_t>(next + 0.5L);
  }
  return total;
}

/// Visits every k-subset of [0, p) in lexicographic order. The visitor gets a
/// const std::vector<Index>& and returns false to stop early.
template <class Visitor>
bool for_each_combination(Index p, Index k, Visitor&& visit) {
  if (k < 0 || k > p) return true;
  std::vector<Index> idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    if (!visit(static_cast<const std::vector<Index>&>(idx))) return false;
    Index i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == p - k + i) --i;
    if (i < 0) return true;
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace snr_sentry
