#pragma once

// Experiment configuration files.
//
// Key-value grammar, one entry per line, '#' starts a comment:
//
//   matrix          = erc:32 | rand:<n>x<p> | file:<path>
//   fresh_per_trial = true | false          (random designs, default true)
//   k_star          = 3
//   beta_magnitude  = 1
//   sigma_sq_grid   = 1e-2, 1e-4, 1e-6     (strictly decreasing)
//   algo            = <tag> [<rule>]        (repeatable, in output order)
//   trials          = 10000
//   seed            = 42
//   threads         = 0                     (0 = all cores)
//   l0_max_card     = 4
//   diagnostics     = false
//
// JSON files carry the same keys; "algo" is an array of "<tag> <rule>"
// strings or {"algorithm": ..., "rule": ...} objects.

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "snr_sentry/experiment.hpp"

namespace snr_sentry {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the config path cannot be opened.
class ConfigNotFound : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct LoadedConfig {
  ExperimentConfig experiment;
  bool matrix_given = false;
  bool seed_given = false;
  std::optional<unsigned> threads;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  std::string item;
  std::istringstream is{std::string(text)};
  while (std::getline(is, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) throw ConfigError("empty entry in list '" + std::string(text) + "'");
    out.push_back(parse_real(t, "list entry"));
  }
  return out;
}

template <class T>
T parse_count(std::string_view text, std::string_view key) {
  const std::string t = trim(text);
  T v{};
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc{} || r.ptr != t.data() + t.size()) {
    throw ConfigError("'" + std::string(key) + "' expects a nonnegative integer, got '" + t + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view text, std::string_view key) {
  const std::string t = trim_lower(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError("'" + std::string(key) + "' expects true or false, got '" + t + "'");
}

inline AlgorithmSpec parse_algo_entry(std::string_view text) {
  const std::string t = trim(text);
  const auto sp = t.find_first_of(" \t");
  const std::string tag = t.substr(0, sp);
  const std::string rule = sp == std::string::npos ? std::string{} : trim(std::string_view(t).substr(sp));
  return parse_algorithm_spec(tag, rule);
}

class ConfigBuilder {
 public:
  void set(const std::string& key, const std::string& value) {
    try {
      apply(key, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }

  /// Validation is left to the caller so command-line flags can still fill gaps.
  LoadedConfig finish() {
    if (matrix_) {
      if (fresh_) matrix_->fresh_per_trial = *fresh_;
      out_.experiment.matrix = *matrix_;
      out_.matrix_given = true;
    }
    return out_;
  }

 private:
  void apply(const std::string& key, const std::string& value) {
    ExperimentConfig& c = out_.experiment;
    if (key == "matrix") {
      matrix_ = MatrixSpec::parse(trim(value));
    } else if (key == "fresh_per_trial") {
      fresh_ = parse_bool(value, key);
    } else if (key == "k_star" || key == "k") {
      c.k_star = parse_count<Index>(value, key);
    } else if (key == "beta_magnitude" || key == "beta_mag") {
      c.beta_magnitude = parse_real(trim(value), key);
    } else if (key == "sigma_sq_grid" || key == "sigma_grid") {
      c.sigma_sq_grid = parse_real_list(value);
    } else if (key == "algo" || key == "algorithm") {
      c.algorithms.push_back(parse_algo_entry(value));
    } else if (key == "trials") {
      c.trials = parse_count<std::size_t>(value, key);
    } else if (key == "seed") {
      c.master_seed = parse_count<std::uint64_t>(value, key);
      out_.seed_given = true;
    } else if (key == "threads") {
      out_.threads = parse_count<unsigned>(value, key);
    } else if (key == "l0_max_card") {
      c.solver.l0_max_card = parse_count<Index>(value, key);
    } else if (key == "diagnostics") {
      c.diagnostics = parse_bool(value, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  LoadedConfig out_;
  std::optional<MatrixSpec> matrix_;
  std::optional<bool> fresh_;
};

inline std::string json_scalar_text(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return format_real(v.get<double>());
  throw ConfigError("config key '" + key + "' has an unsupported JSON type");
}

}  // namespace detail

inline LoadedConfig parse_config_text(std::string_view text) {
  detail::ConfigBuilder b;
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim_lower(std::string_view(t).substr(0, eq));
    try {
      b.set(key, detail::trim(std::string_view(t).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return b.finish();
}

inline LoadedConfig parse_config_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("JSON config must be an object");
  detail::ConfigBuilder b;
  for (const auto& [key, value] : doc.items()) {
    if (key == "algo" || key == "algorithms") {
      if (!value.is_array()) throw ConfigError("'" + key + "' must be an array");
      for (const auto& entry : value) {
        if (entry.is_string()) {
          b.set("algo", entry.get<std::string>());
        } else if (entry.is_object() && entry.contains("algorithm")) {
          std::string s = entry.at("algorithm").get<std::string>();
          if (entry.contains("rule")) s += " " + entry.at("rule").get<std::string>();
          b.set("algo", s);
        } else {
          throw ConfigError("algorithm entries must be strings or {\"algorithm\", \"rule\"} objects");
        }
      }
    } else if (key == "sigma_sq_grid" && value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + detail::json_scalar_text(v, key);
      b.set(key, joined);
    } else {
      b.set(key, detail::json_scalar_text(value, key));
    }
  }
  return b.finish();
}

/// Dispatches on content: a leading '{' selects JSON.
inline LoadedConfig parse_config(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return parse_config_json(text);
  return parse_config_text(text);
}

inline LoadedConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigNotFound("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace snr_sentry
