#pragma once

// Named recovery procedures paired with their tuning rules, plus a single
// entry point that evaluates the rule at sigma^2 and runs the solver.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "snr_sentry/rule_syntax.hpp"
#include "snr_sentry/solvers.hpp"
#include "snr_sentry/tuning.hpp"

namespace snr_sentry {

enum class Algorithm { kL0, kOracle, kL1Penalty, kL1Error, kDantzig, kOmpKnownK, kOmpRpsc, kOmpRcsc };

inline constexpr std::array<Algorithm, 8> kAllAlgorithms = {
    Algorithm::kL0,      Algorithm::kOracle,     Algorithm::kL1Penalty, Algorithm::kL1Error,
    Algorithm::kDantzig, Algorithm::kOmpKnownK, Algorithm::kOmpRpsc,   Algorithm::kOmpRcsc};

inline const char* algorithm_tag(Algorithm a) {
  switch (a) {
    case Algorithm::kL0: return "l0";
    case Algorithm::kOracle: return "oracle";
    case Algorithm::kL1Penalty: return "l1_penalty";
    case Algorithm::kL1Error: return "l1_error";
    case Algorithm::kDantzig: return "dantzig";
    case Algorithm::kOmpKnownK: return "omp_k";
    case Algorithm::kOmpRpsc: return "omp_rpsc";
    case Algorithm::kOmpRcsc: return "omp_rcsc";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view tag) {
  for (Algorithm a : kAllAlgorithms) {
    if (tag == algorithm_tag(a)) return a;
  }
  std::string known;
  for (Algorithm a : kAllAlgorithms) known += std::string(known.empty() ? "" : ", ") + algorithm_tag(a);
  throw std::invalid_argument("unknown algorithm '" + std::string(tag) + "' (expected one of " + known + ")");
}

/// The known-k procedures take k* instead of a tuning rule.
inline bool algorithm_uses_rule(Algorithm a) { return a != Algorithm::kOracle && a != Algorithm::kOmpKnownK; }

inline std::optional<Target> algorithm_target(Algorithm a) {
  switch (a) {
    case Algorithm::kL0: return Target::kL0;
    case Algorithm::kL1Penalty: return Target::kL1Penalty;
    case Algorithm::kL1Error: return Target::kL1Error;
    case Algorithm::kDantzig: return Target::kDantzig;
    case Algorithm::kOmpRpsc: return Target::kOmpRpsc;
    case Algorithm::kOmpRcsc: return Target::kOmpRcsc;
    default: return std::nullopt;
  }
}

struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::kL0;
  std::optional<TuningRule> rule;

  std::string rule_string() const { return rule ? format_rule(*rule) : std::string("none"); }
  std::string label() const { return std::string(algorithm_tag(algorithm)) + " " + rule_string(); }
};

/// Validates the pairing and retargets the rule to the algorithm.
inline AlgorithmSpec make_algorithm_spec(Algorithm a, std::optional<TuningRule> rule) {
  AlgorithmSpec spec{a, std::nullopt};
  if (!algorithm_uses_rule(a)) {
    if (rule) throw std::invalid_argument(std::string(algorithm_tag(a)) + " takes no tuning rule");
    return spec;
  }
  if (!rule) throw std::invalid_argument(std::string(algorithm_tag(a)) + " needs a tuning rule");
  if (rule->base == BaseKind::kEbic && a != Algorithm::kL0) {
    throw std::invalid_argument("EBIC depends on the candidate cardinality and only applies to l0");
  }
  spec.rule = rule->for_target(*algorithm_target(a));
  return spec;
}

inline AlgorithmSpec parse_algorithm_spec(std::string_view tag, std::string_view rule_text) {
  const Algorithm a = parse_algorithm(tag);
  const std::string r = detail::trim_lower(rule_text);
  if (r.empty() || r == "none") return make_algorithm_spec(a, std::nullopt);
  return make_algorithm_spec(a, parse_rule(r));
}

struct SolverSettings {
  std::optional<Index> l0_max_card;  // default min(n, p, k* + 1)
  std::uint64_t subset_guard = kDefaultSubsetGuard;
  L1PenaltyOptions l1_penalty;
  L1ErrorOptions l1_error;
};

inline Index default_l0_max_card(Index n, Index p, Index k_star) {
  return std::min({n, p, std::max<Index>(k_star, 0) + 1});
}

/// Runs one procedure on (X, y). k_star is only read by the known-k
/// procedures and by the l0 cardinality default.
inline RecoveryResult run_algorithm(const DesignMatrix& x, const Vector& y, double sigma_sq, const AlgorithmSpec& spec,
                                    Index k_star, const SolverSettings& settings = {}) {
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) throw std::invalid_argument("sigma^2 must be positive");
  const Index n = x.rows();
  const Index p = x.cols();
  const double sigma = std::sqrt(sigma_sq);
  const auto gamma = [&] { return gamma_value(*spec.rule, n, p, 0, sigma_sq); };
  switch (spec.algorithm) {
    case Algorithm::kL0: {
      L0Options o;
      o.subset_guard = settings.subset_guard;
      return solve_l0(x, y, sigma_sq, *spec.rule, settings.l0_max_card.value_or(default_l0_max_card(n, p, k_star)), o);
    }
    case Algorithm::kOracle: return oracle_known_k(x, y, k_star, settings.subset_guard);
    case Algorithm::kL1Penalty: return solve_l1_penalty(x, y, sigma, gamma(), settings.l1_penalty);
    case Algorithm::kL1Error: return solve_l1_error(x, y, sigma, gamma(), settings.l1_error);
    case Algorithm::kDantzig: return solve_dantzig_orthonormal(x, y, sigma, gamma());
    case Algorithm::kOmpKnownK: return omp(x, y, sigma, StopRule::known_k(k_star));
    case Algorithm::kOmpRpsc: return omp(x, y, sigma, StopRule::rpsc(gamma()));
    case Algorithm::kOmpRcsc: return omp(x, y, sigma, StopRule::rcsc(gamma()));
  }
  throw std::logic_error("unknown algorithm");
}

}  // namespace snr_sentry
