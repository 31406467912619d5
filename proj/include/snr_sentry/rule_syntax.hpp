#pragma once

// Text syntax for tuning rules: base[:param][*adapt]
//
//   base   fixed:<v> | aic | bic | ric_fg | ric_zs | ebic[:<gamma>] |
//          l1_candes | l1err_candes | rpsc | rcsc[:<c>] | rcsc_eta:<eta>
//   adapt  loginv | pow:<alpha>
//
// format_rule emits the canonical spelling, e.g. "ebic:1.0*pow:0.5" formats
// as "ebic:1*pow:0.5".

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include "snr_sentry/tuning.hpp"

namespace snr_sentry {

class RuleSyntaxError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string shortest_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_rule_number(std::string_view s, std::string_view what) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw RuleSyntaxError("malformed number '" + std::string(s) + "' for " + std::string(what));
  }
  return v;
}

inline std::string trim_lower(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string out = b == std::string_view::npos ? std::string{} : std::string(s.substr(b, e - b + 1));
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace detail

inline std::string format_rule(const TuningRule& rule) {
  std::string out;
  switch (rule.base) {
    case BaseKind::kFixed: out = "fixed:" + detail::shortest_real(rule.param); break;
    case BaseKind::kAic: out = "aic"; break;
    case BaseKind::kBic: out = "bic"; break;
    case BaseKind::kRicFg: out = "ric_fg"; break;
    case BaseKind::kRicZs: out = "ric_zs"; break;
    case BaseKind::kEbic: out = "ebic:" + detail::shortest_real(rule.param); break;
    case BaseKind::kL1Candes: out = "l1_candes"; break;
    case BaseKind::kL1ErrorCandes: out = "l1err_candes"; break;
    case BaseKind::kRpscDefault: out = "rpsc"; break;
    case BaseKind::kRcscDefault: out = "rcsc:" + detail::shortest_real(rule.param); break;
  }
  switch (rule.adapt) {
    case AdaptKind::kNone: break;
    case AdaptKind::kLogInvSigma2: out += "*loginv"; break;
    case AdaptKind::kPowerAlpha: out += "*pow:" + detail::shortest_real(rule.alpha); break;
  }
  return out;
}

/// Parses a rule string. The target defaults to the family's usual pairing.
inline TuningRule parse_rule(std::string_view text, std::optional<Target> target = std::nullopt) {
  const std::string s = detail::trim_lower(text);
  if (s.empty()) throw RuleSyntaxError("empty rule string");
  const auto star = s.find('*');
  const std::string base_part = s.substr(0, star);
  const std::string adapt_part = star == std::string::npos ? std::string{} : s.substr(star + 1);

  const auto colon = base_part.find(':');
  const std::string name = base_part.substr(0, colon);
  const std::optional<std::string> param =
      colon == std::string::npos ? std::nullopt : std::optional<std::string>(base_part.substr(colon + 1));
  const auto no_param = [&] {
    if (param) throw RuleSyntaxError("rule base '" + name + "' takes no parameter");
  };

  TuningRule rule;
  try {
    if (name == "fixed") {
      if (!param) throw RuleSyntaxError("fixed rule needs a value, e.g. fixed:3");
      const double v = detail::parse_rule_number(*param, "fixed");
      if (!(v > 0.0)) throw RuleSyntaxError("fixed rule value must be positive, got " + *param);
      rule = TuningRule::fixed(v);
    } else if (name == "aic") {
      no_param();
      rule = TuningRule::aic();
    } else if (name == "bic") {
      no_param();
      rule = TuningRule::bic();
    } else if (name == "ric_fg") {
      no_param();
      rule = TuningRule::ric_fg();
    } else if (name == "ric_zs") {
      no_param();
      rule = TuningRule::ric_zs();
    } else if (name == "ebic") {
      const double g = param ? detail::parse_rule_number(*param, "ebic") : kDefaultEbicGamma;
      if (!(g >= 0.0)) throw RuleSyntaxError("EBIC gamma must be nonnegative");
      rule = TuningRule::ebic(g);
    } else if (name == "l1_candes") {
      no_param();
      rule = TuningRule::l1_candes();
    } else if (name == "l1err_candes" || name == "l1_error_candes") {
      no_param();
      rule = TuningRule::l1_error_candes();
    } else if (name == "rpsc" || name == "rpsc_default") {
      no_param();
      rule = TuningRule::rpsc_default();
    } else if (name == "rcsc" || name == "rcsc_default") {
      const double c = param ? detail::parse_rule_number(*param, "rcsc") : kDefaultRcscConstant;
      if (!(c > 0.0)) throw RuleSyntaxError("RCSC constant must be positive");
      rule = TuningRule::rcsc_default(c);
    } else if (name == "rcsc_eta") {
      if (!param) throw RuleSyntaxError("rcsc_eta needs a value, e.g. rcsc_eta:0.5");
      const double eta = detail::parse_rule_number(*param, "rcsc_eta");
      if (!(eta > -1.0)) throw RuleSyntaxError("RCSC eta must exceed -1");
      rule = TuningRule::rcsc_eta(eta);
    } else {
      throw RuleSyntaxError("unknown rule base '" + name + "'");
    }
  } catch (const RuleSyntaxError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw RuleSyntaxError(e.what());
  }

  if (star != std::string::npos) {
    if (adapt_part == "loginv") {
      rule = rule.with_log_inv();
    } else if (adapt_part.rfind("pow:", 0) == 0) {
      rule = rule.with_power(detail::parse_rule_number(std::string_view(adapt_part).substr(4), "pow"));
    } else {
      throw RuleSyntaxError("unknown adaptation '" + adapt_part + "' (expected loginv or pow:<alpha>)");
    }
  }
  rule.target = target.value_or(default_target(rule.base));
  return rule;
}

}  // namespace snr_sentry
