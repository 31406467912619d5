#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "snr_sentry/linalg.hpp"
#include "snr_sentry/qualifiers.hpp"

namespace snr_sentry {

/// Standard normal upper tail, 0.5 erfc(x / sqrt 2).
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// PE floor 2 Q(sqrt(Gamma0)) for a sigma-independent l0 penalty.
inline double l0_pe_lower_bound(double gamma0) {
  if (!(gamma0 > 0.0)) throw std::invalid_argument("l0_pe_lower_bound: Gamma0 must be positive");
  return std::erfc(std::sqrt(gamma0 / 2.0));
}

/// Upper bound on P(chi^2_k > a^2), valid for a^2 > k:
/// e^{k/2} k^{-k/2} exp(-(a^2 - k ln a^2) / 2).
inline double chi2_tail_bound(int k, double a_sq) {
  if (k < 1) throw std::invalid_argument("chi2_tail_bound: k must be >= 1");
  const double kd = k;
  if (!(a_sq > kd)) throw std::domain_error("chi2_tail_bound: requires a^2 > k");
  const double log_bound = 0.5 * kd - 0.5 * kd * std::log(kd) - 0.5 * (a_sq - kd * std::log(a_sq));
  return std::exp(log_bound);
}

struct RateBoundInputs {
  Index n = 0;
  Index k_star = 0;
  double erc = 0.0;
  double gamma1 = 0.0;
  double sigma = 0.0;
  Vector beta_support;  // nonzero coefficients, in support order
  Vector c_seq;
  Vector d_seq;

  void validate() const {
    if (n < 1 || k_star < 1 || k_star >= n) throw std::invalid_argument("RateBoundInputs: need 1 <= k* < n");
    if (!(erc >= 0.0 && erc < 1.0)) throw std::invalid_argument("RateBoundInputs: erc must lie in [0, 1)");
    if (!(gamma1 > 0.0) || !(sigma > 0.0)) throw std::invalid_argument("RateBoundInputs: Gamma1 and sigma must be positive");
    const auto k = static_cast<Index>(k_star);
    if (beta_support.size() != k || c_seq.size() != k || d_seq.size() != k) {
      throw DimensionError("RateBoundInputs: beta, c and d must all have length k*");
    }
    if (!(c_seq.minCoeff() > 0.0) || !(d_seq.minCoeff() > 0.0)) {
      throw std::invalid_argument("RateBoundInputs: c_j and d_j must be positive");
    }
  }
};

/// Collects the rate-bound inputs of support I from the design: erc, c_j and
/// d_j = ||Gram^{-1}||_{inf,inf} / c_j.
inline RateBoundInputs rate_bound_inputs(const DesignMatrix& x, const SupportSet& support, const Vector& beta,
                                         double gamma1, double sigma) {
  if (beta.size() != x.cols()) throw DimensionError("rate_bound_inputs: beta must have length p");
  const GramDiagnostics g = gram_diagnostics(x, support);
  RateBoundInputs in;
  in.n = x.rows();
  in.k_star = static_cast<Index>(support.size());
  in.erc = erc_coefficient(x, support);
  in.gamma1 = gamma1;
  in.sigma = sigma;
  in.beta_support.resize(in.k_star);
  for (std::size_t i = 0; i < support.size(); ++i) in.beta_support(static_cast<Index>(i)) = beta(support[i]);
  in.c_seq = g.diag_sqrt;
  in.d_seq = g.d_sequence();
  return in;
}

struct BoundValue {
  double value = 0.0;  // clamped to [0, 1]
  double raw = 0.0;
};

/// Lower bound on P(||X^T (I - P_I) w||_inf < sigma Gamma1 (1 - erc)), i.e.
/// 1 - chi2_tail_bound(n - k*, Gamma1^2 b1^2).
inline BoundValue e1_rate_bound(const RateBoundInputs& in) {
  in.validate();
  const double b1 = 1.0 - in.erc;
  const double s = in.gamma1 * in.gamma1 * b1 * b1;
  const auto m = static_cast<int>(in.n - in.k_star);
  if (!(s > m)) {
    throw std::domain_error("e1_rate_bound: requires Gamma1^2 (1 - erc)^2 > n - k*, got " + std::to_string(s) +
                            " <= " + std::to_string(m));
  }
  BoundValue out;
  out.raw = 1.0 - chi2_tail_bound(m, s);
  out.value = std::clamp(out.raw, 0.0, 1.0);
  return out;
}

struct E2Bound {
  BoundValue exact_q_form;
  std::optional<BoundValue> exp_form;  // empty when some argument is <= 2
};

/// Lower bound on P(|b^I_j| > sigma c_j Gamma1 d_j for all j), with
/// arguments x_j = |beta_j| / (sigma c_j) - Gamma1 d_j.
inline E2Bound e2_rate_bound(const RateBoundInputs& in) {
  in.validate();
  double q_sum = 0.0;
  double exp_sum = 0.0;
  bool exp_valid = true;
  for (Index j = 0; j < in.k_star; ++j) {
    const double x = std::abs(in.beta_support(j)) / (in.sigma * in.c_seq(j)) - in.gamma1 * in.d_seq(j);
    q_sum += q_function(x);
    exp_sum += std::exp(-0.5 * x * x);
    if (!(x > 2.0)) exp_valid = false;
  }
  E2Bound out;
  out.exact_q_form.raw = 1.0 - q_sum;
  out.exact_q_form.value = std::clamp(out.exact_q_form.raw, 0.0, 1.0);
  if (exp_valid) {
    BoundValue e;
    e.raw = 1.0 - 0.5 * exp_sum;
    e.value = std::clamp(e.raw, 0.0, 1.0);
    out.exp_form = e;
  }
  return out;
}

/// c_I beta_min with c_I = (1 - erc) lambda_min(X_I^T X_I) / (2 sqrt k*).
inline double omp_selection_margin(const DesignMatrix& x, const SupportSet& support, double beta_min) {
  if (!(beta_min > 0.0)) throw std::invalid_argument("omp_selection_margin: beta_min must be positive");
  const double erc = erc_coefficient(x, support);
  if (!(erc < 1.0)) throw PreconditionError("omp_selection_margin: ERC fails (erc = " + std::to_string(erc) + ")");
  const double lam = gram_diagnostics(x, support).min_eigenvalue;
  const double c = (1.0 - erc) * lam / (2.0 * std::sqrt(static_cast<double>(support.size())));
  return c * beta_min;
}

}  // namespace snr_sentry
