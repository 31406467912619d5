#pragma once

// Tuning-parameter families. A rule is a base value (an information
// criterion or a literature constant) optionally multiplied by an SNR
// adaptation f(sigma^2) in {1, ln(1/sigma^2), sigma^{-alpha}}.

#include <cmath>
#include <stdexcept>
#include <string>

#include "snr_sentry/combinatorics.hpp"

namespace snr_sentry {

enum class BaseKind {
  kFixed,          // user value
  kAic,            // 2
  kBic,            // ln n
  kRicFg,          // 2 ln p
  kRicZs,          // 2 ln p + 2 ln ln p
  kEbic,           // ln n + (2 gamma / k) ln C(p, k)
  kL1Candes,       // 2 sqrt(2 ln p)
  kL1ErrorCandes,  // sqrt(n + 2 sqrt(2n))
  kRpscDefault,    // sqrt(n + 2 sqrt(n ln n))
  kRcscDefault,    // sqrt(c ln p)
};

enum class AdaptKind { kNone, kLogInvSigma2, kPowerAlpha };

/// Which procedure the rule tunes; fixes the decay exponent used by
/// classify_consistency (sigma^2 Gamma for l0, sigma Gamma otherwise).
enum class Target { kL0, kL1Penalty, kL1Error, kDantzig, kOmpRpsc, kOmpRcsc };

inline constexpr double kDefaultRcscConstant = 4.0;
inline constexpr double kDefaultEbicGamma = 1.0;

struct TuningRule {
  BaseKind base = BaseKind::kAic;
  double param = 0.0;  // fixed value, EBIC gamma or the RCSC constant c
  AdaptKind adapt = AdaptKind::kNone;
  double alpha = 0.0;
  Target target = Target::kL0;

  static TuningRule fixed(double value, Target t = Target::kL0) {
    if (!(value > 0.0) || !std::isfinite(value)) throw std::invalid_argument("fixed rule value must be positive");
    return {BaseKind::kFixed, value, AdaptKind::kNone, 0.0, t};
  }
  static TuningRule aic() { return {BaseKind::kAic, 0.0, AdaptKind::kNone, 0.0, Target::kL0}; }
  static TuningRule bic() { return {BaseKind::kBic, 0.0, AdaptKind::kNone, 0.0, Target::kL0}; }
  static TuningRule ric_fg() { return {BaseKind::kRicFg, 0.0, AdaptKind::kNone, 0.0, Target::kL0}; }
  static TuningRule ric_zs() { return {BaseKind::kRicZs, 0.0, AdaptKind::kNone, 0.0, Target::kL0}; }
  static TuningRule ebic(double gamma = kDefaultEbicGamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("EBIC gamma must be nonnegative");
    return {BaseKind::kEbic, gamma, AdaptKind::kNone, 0.0, Target::kL0};
  }
  static TuningRule l1_candes() { return {BaseKind::kL1Candes, 0.0, AdaptKind::kNone, 0.0, Target::kL1Penalty}; }
  static TuningRule l1_error_candes() {
    return {BaseKind::kL1ErrorCandes, 0.0, AdaptKind::kNone, 0.0, Target::kL1Error};
  }
  static TuningRule rpsc_default() { return {BaseKind::kRpscDefault, 0.0, AdaptKind::kNone, 0.0, Target::kOmpRpsc}; }
  static TuningRule rcsc_default(double c = kDefaultRcscConstant) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("RCSC constant must be positive");
    return {BaseKind::kRcscDefault, c, AdaptKind::kNone, 0.0, Target::kOmpRcsc};
  }
  /// sqrt(2 (1 + eta) ln p) form of the RCSC constant.
  static TuningRule rcsc_eta(double eta) {
    if (!(eta > -1.0)) throw std::invalid_argument("RCSC eta must exceed -1");
    return rcsc_default(2.0 * (1.0 + eta));
  }

  TuningRule with_power(double a) const {
    if (!std::isfinite(a)) throw std::invalid_argument("adaptation exponent must be finite");
    TuningRule r = *this;
    r.adapt = AdaptKind::kPowerAlpha;
    r.alpha = a;
    return r;
  }
  TuningRule with_log_inv() const {
    TuningRule r = *this;
    r.adapt = AdaptKind::kLogInvSigma2;
    r.alpha = 0.0;
    return r;
  }
  TuningRule for_target(Target t) const {
    TuningRule r = *this;
    r.target = t;
    return r;
  }

  friend bool operator==(const TuningRule&, const TuningRule&) = default;
};

/// Target a base family is usually paired with.
inline Target default_target(BaseKind base) {
  switch (base) {
    case BaseKind::kL1Candes: return Target::kL1Penalty;
    case BaseKind::kL1ErrorCandes: return Target::kL1Error;
    case BaseKind::kRpscDefault: return Target::kOmpRpsc;
    case BaseKind::kRcscDefault: return Target::kOmpRcsc;
    default: return Target::kL0;
  }
}

struct GammaOptions {
  /// Lower clamp for ln(1/sigma^2), which is nonpositive once sigma^2 >= 1.
  double log_inv_floor = 1e-6;
};

struct GammaEvaluation {
  double value = 0.0;
  double base = 0.0;
  double factor = 1.0;
  bool clamped = false;  // the ln(1/sigma^2) factor hit its floor
};

/// Base value of the rule. k is the candidate cardinality (needed by EBIC).
inline double base_value(const TuningRule& rule, Index n, Index p, Index k) {
  const double ln_n = std::log(static_cast<double>(n));
  const double ln_p = std::log(static_cast<double>(p));
  const double nn = static_cast<double>(n);
  switch (rule.base) {
    case BaseKind::kFixed: return rule.param;
    case BaseKind::kAic: return 2.0;
    case BaseKind::kBic: return ln_n;
    case BaseKind::kRicFg: return 2.0 * ln_p;
    case BaseKind::kRicZs: return 2.0 * ln_p + 2.0 * std::log(ln_p);
    case BaseKind::kEbic:
      if (k < 1) throw std::invalid_argument("EBIC is undefined for cardinality 0");
      return ln_n + 2.0 * rule.param / static_cast<double>(k) * log_binomial(p, k);
    case BaseKind::kL1Candes: return 2.0 * std::sqrt(2.0 * ln_p);
    case BaseKind::kL1ErrorCandes: return std::sqrt(nn + 2.0 * std::sqrt(2.0 * nn));
    case BaseKind::kRpscDefault: return std::sqrt(nn + 2.0 * std::sqrt(nn * ln_n));
    case BaseKind::kRcscDefault: return std::sqrt(rule.param * ln_p);
  }
  throw std::logic_error("unknown base kind");
}

inline GammaEvaluation evaluate_gamma(const TuningRule& rule, Index n, Index p, Index k, double sigma_sq,
                                      const GammaOptions& opts = {}) {
  if (n < 1 || p < 1) throw std::invalid_argument("gamma_value: n and p must be >= 1");
  if (k < 0 || k > p) throw std::invalid_argument("gamma_value: k must lie in [0, p]");
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) throw std::invalid_argument("gamma_value: sigma^2 must be positive");
  GammaEvaluation out;
  out.base = base_value(rule, n, p, k);
  if (!(out.base > 0.0) || !std::isfinite(out.base)) {
    throw std::domain_error("gamma_value: base value is not positive for n = " + std::to_string(n) +
                            ", p = " + std::to_string(p));
  }
  switch (rule.adapt) {
    case AdaptKind::kNone: out.factor = 1.0; break;
    case AdaptKind::kLogInvSigma2: {
      const double f = -std::log(sigma_sq);
      out.clamped = f < opts.log_inv_floor;
      out.factor = out.clamped ? opts.log_inv_floor : f;
      break;
    }
    case AdaptKind::kPowerAlpha: out.factor = std::pow(sigma_sq, -0.5 * rule.alpha); break;
  }
  out.value = out.base * out.factor;
  return out;
}

inline double gamma_value(const TuningRule& rule, Index n, Index p, Index k, double sigma_sq,
                          const GammaOptions& opts = {}) {
  return evaluate_gamma(rule, n, p, k, sigma_sq, opts).value;
}

enum class Verdict { kConsistentSufficient, kViolatesGrowth, kViolatesDecay, kViolatesBoth };

struct ConsistencyVerdict {
  bool growth_ok = false;  // Gamma -> infinity as sigma^2 -> 0
  bool decay_ok = false;   // sigma^d Gamma -> 0, d = 2 for l0 and 1 otherwise
  Verdict verdict = Verdict::kViolatesBoth;
};

inline int decay_exponent(Target t) { return t == Target::kL0 ? 2 : 1; }

/// Limit analysis of the adaptation as sigma^2 -> 0. Every base is constant
/// in sigma^2, so only the adaptation factor matters.
inline ConsistencyVerdict classify_consistency(const TuningRule& rule) {
  ConsistencyVerdict v;
  const double d = decay_exponent(rule.target);
  switch (rule.adapt) {
    case AdaptKind::kNone:
      v.growth_ok = false;
      v.decay_ok = true;
      break;
    case AdaptKind::kLogInvSigma2:
      v.growth_ok = true;
      v.decay_ok = true;
      break;
    case AdaptKind::kPowerAlpha:
      v.growth_ok = rule.alpha > 0.0;
      v.decay_ok = rule.alpha < d;
      break;
  }
  if (v.growth_ok && v.decay_ok) {
    v.verdict = Verdict::kConsistentSufficient;
  } else if (v.decay_ok) {
    v.verdict = Verdict::kViolatesGrowth;
  } else if (v.growth_ok) {
    v.verdict = Verdict::kViolatesDecay;
  } else {
    v.verdict = Verdict::kViolatesBoth;
  }
  return v;
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kConsistentSufficient: return "CONSISTENT_SUFFICIENT";
    case Verdict::kViolatesGrowth: return "VIOLATES_GROWTH";
    case Verdict::kViolatesDecay: return "VIOLATES_DECAY";
    case Verdict::kViolatesBoth: return "VIOLATES_BOTH";
  }
  return "?";
}

inline const char* to_string(Target t) {
  switch (t) {
    case Target::kL0: return "L0";
    case Target::kL1Penalty: return "L1_PENALTY";
    case Target::kL1Error: return "L1_ERROR";
    case Target::kDantzig: return "DANTZIG";
    case Target::kOmpRpsc: return "OMP_RPSC";
    case Target::kOmpRcsc: return "OMP_RCSC";
  }
  return "?";
}

}  // namespace snr_sentry
