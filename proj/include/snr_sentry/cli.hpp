#pragma once

// Command-line front end: qualify, solve, sweep and bounds.
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snr_sentry/bounds.hpp"
#include "snr_sentry/config.hpp"
#include "snr_sentry/experiment.hpp"
#include "snr_sentry/matrix_io.hpp"
#include "snr_sentry/qualifiers.hpp"

namespace snr_sentry::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr const char* kSeedEnv = "SNR_SENTRY_SEED";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes text to path via a sibling temp file and rename, or to `fallback`
/// when no path is given.
inline void emit(const std::string& text, const std::optional<std::string>& path, std::ostream& fallback) {
  if (!path) {
    fallback << text;
    fallback.flush();
    return;
  }
  const std::filesystem::path target(*path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    f << text;
    f.flush();
    if (!f) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move output into '" + target.string() + "': " + ec.message());
  }
}

inline std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = detail::trim(item);
    Index v = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || r.ec != std::errc{} || r.ptr != t.data() + t.size() || v < 0) {
      throw UsageError("bad index '" + t + "' in list '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

inline std::vector<double> parse_list(const std::string& text) {
  try {
    return detail::parse_real_list(text);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

/// --seed, then SNR_SENTRY_SEED, then `fallback`.
inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
    const std::string s = detail::trim(env);
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
      throw UsageError(std::string(kSeedEnv) + " must be an unsigned integer, got '" + s + "'");
    }
    return v;
  }
  return fallback;
}

inline MatrixSpec parse_matrix_flag(const std::string& text) {
  try {
    return MatrixSpec::parse(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

inline nlohmann::json spark_json(const SparkResult& s) {
  return {{"value", s.value},
          {"exact", s.exact},
          {"all_columns_independent", s.all_columns_independent},
          {"conventional_value", s.conventional_value()},
          {"description", s.describe()}};
}

inline nlohmann::json result_json(const AlgorithmSpec& spec, const RecoveryResult& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const OmpStep& s : r.trace) trace.push_back({{"index", s.index}, {"residual_norm", s.residual_norm}});
  return {{"algorithm", algorithm_tag(spec.algorithm)},
          {"rule", spec.rule_string()},
          {"estimate", std::vector<double>(r.estimate.data(), r.estimate.data() + r.estimate.size())},
          {"support", r.support.indices()},
          {"objective", r.objective},
          {"iterations", r.iterations},
          {"trace", trace},
          {"diagnostic", r.diagnostic}};
}

struct Options {
  // shared
  std::string matrix;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  // qualify
  std::string support;
  std::optional<Index> max_card;
  std::string format = "json";
  // solve / sweep
  std::string y_path;
  std::vector<std::string> algos;
  std::vector<std::string> rules;
  std::optional<double> sigma_sq;
  std::optional<Index> k;
  std::optional<Index> l0_max_card;
  std::optional<std::string> config;
  std::optional<double> beta_mag;
  std::optional<std::string> sigma_grid;
  std::optional<std::size_t> trials;
  std::optional<unsigned> threads;
  bool diagnostics = false;
  // bounds
  bool l0_floor = false, q = false, chi2 = false, e1 = false, e2 = false, omp_margin = false;
  std::optional<double> gamma0, x, a_sq, gamma1, sigma, beta_min;
  std::string beta;
};

inline int run_qualify(const Options& o, std::ostream& out) {
  const MatrixSpec spec = parse_matrix_flag(o.matrix);
  const DesignMatrix x = materialize_matrix(spec, resolve_seed(o.seed, 0));
  std::optional<SupportSet> support;
  if (!o.support.empty()) support = SupportSet(parse_index_list(o.support));
  const QualifierReport r = qualify(x, support, o.max_card);

  std::ostringstream os;
  if (o.format == "text") {
    os << "matrix            " << spec.describe() << " (" << x.rows() << " x " << x.cols() << ")\n";
    os << "mutual_coherence  " << detail::shortest_real(r.mutual_coherence) << '\n';
    os << "mic_max_sparsity  "
       << (r.mic_max_sparsity.unbounded ? std::string("unbounded") : std::to_string(r.mic_max_sparsity.k)) << '\n';
    os << "spark             " << r.spark.describe() << '\n';
    if (r.erc_coefficient) {
      os << "erc_coefficient   " << detail::shortest_real(*r.erc_coefficient) << '\n';
      os << "erc_holds         " << (r.erc_holds ? "true" : "false") << '\n';
    }
  } else {
    nlohmann::json j = {{"matrix", spec.describe()},
                        {"n", x.rows()},
                        {"p", x.cols()},
                        {"mutual_coherence", r.mutual_coherence},
                        {"spark", spark_json(r.spark)}};
    j["mic_max_sparsity"] = r.mic_max_sparsity.unbounded ? nlohmann::json("unbounded") : nlohmann::json(r.mic_max_sparsity.k);
    if (r.erc_coefficient) {
      j["support"] = support->indices();
      j["erc_coefficient"] = *r.erc_coefficient;
      j["erc_holds"] = r.erc_holds;
    }
    os << j.dump(2) << '\n';
  }
  emit(os.str(), o.out, out);
  return kExitOk;
}

inline AlgorithmSpec single_algorithm(const Options& o) {
  if (o.algos.size() != 1) throw UsageError("solve takes exactly one --algo");
  if (o.rules.size() > 1) throw UsageError("solve takes at most one --rule");
  try {
    return parse_algorithm_spec(o.algos.front(), o.rules.empty() ? std::string{} : o.rules.front());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

inline int run_solve(const Options& o, std::ostream& out) {
  const AlgorithmSpec spec = single_algorithm(o);
  if (!algorithm_uses_rule(spec.algorithm) && !o.k) throw UsageError(std::string(algorithm_tag(spec.algorithm)) + " needs --k");
  const DesignMatrix x = materialize_matrix(parse_matrix_flag(o.matrix), resolve_seed(o.seed, 0));
  const Vector y = load_vector_file(o.y_path);
  SolverSettings settings;
  settings.l0_max_card = o.l0_max_card;
  const Index k = o.k.value_or(0);
  if (spec.algorithm == Algorithm::kL0 && !o.l0_max_card) settings.l0_max_card = std::min(x.rows(), x.cols());
  const RecoveryResult r = run_algorithm(x, y, *o.sigma_sq, spec, k, settings);
  emit(result_json(spec, r).dump(2) + "\n", o.out, out);
  return kExitOk;
}

/// Pairs --algo and --rule: one rule applies to every rule-taking algorithm,
/// otherwise rules are consumed in order by the rule-taking algorithms.
inline std::vector<AlgorithmSpec> pair_algorithms(const std::vector<std::string>& algos,
                                                  const std::vector<std::string>& rules) {
  std::vector<Algorithm> parsed;
  std::size_t needing = 0;
  for (const auto& a : algos) {
    try {
      parsed.push_back(parse_algorithm(a));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (algorithm_uses_rule(parsed.back())) ++needing;
  }
  if (!(rules.size() == needing || (rules.size() == 1 && needing > 1))) {
    throw UsageError("got " + std::to_string(rules.size()) + " --rule values for " + std::to_string(needing) +
                     " rule-taking algorithms");
  }
  std::vector<AlgorithmSpec> out;
  std::size_t next = 0;
  for (Algorithm a : parsed) {
    std::optional<TuningRule> rule;
    if (algorithm_uses_rule(a)) {
      const std::string& text = rules.size() == 1 ? rules.front() : rules[next++];
      try {
        rule = parse_rule(text);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
    try {
      out.push_back(make_algorithm_spec(a, rule));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

inline int run_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  LoadedConfig loaded;
  if (o.config) {
    try {
      loaded = load_config_file(*o.config);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }
  ExperimentConfig& cfg = loaded.experiment;
  if (!o.matrix.empty()) {
    cfg.matrix = parse_matrix_flag(o.matrix);
    loaded.matrix_given = true;
  }
  if (!loaded.matrix_given) throw UsageError("sweep needs --matrix or a config file naming one");
  if (o.k) cfg.k_star = *o.k;
  if (o.beta_mag) cfg.beta_magnitude = *o.beta_mag;
  if (o.sigma_grid) cfg.sigma_sq_grid = parse_list(*o.sigma_grid);
  if (!o.algos.empty()) {
    cfg.algorithms = pair_algorithms(o.algos, o.rules);
  } else if (!o.rules.empty()) {
    throw UsageError("--rule given without --algo");
  }
  if (o.trials) cfg.trials = *o.trials;
  if (o.l0_max_card) cfg.solver.l0_max_card = *o.l0_max_card;
  if (o.diagnostics) cfg.diagnostics = true;
  cfg.master_seed = loaded.seed_given && !o.seed ? cfg.master_seed : resolve_seed(o.seed, cfg.master_seed);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const unsigned threads = o.threads.value_or(loaded.threads.value_or(0));

  const SweepResult result = sweep(cfg, threads);
  std::ostringstream os;
  write_csv(os, result, cfg.diagnostics);
  emit(os.str(), o.out, out);
  if (result.errored_trials > 0) {
    err << "error: " << result.errored_trials << " trial(s) failed with an exception\n";
    for (const auto& s : result.error_samples) err << "  " << s << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

inline int run_bounds(const Options& o, std::ostream& out) {
  const int modes = o.l0_floor + o.q + o.chi2 + o.e1 + o.e2 + o.omp_margin;
  if (modes != 1) throw UsageError("choose exactly one of --l0-floor, --q, --chi2-tail, --e1, --e2, --omp-margin");
  const auto need = [](const auto& opt, const char* flag) {
    if (!opt) throw UsageError(std::string("missing ") + flag);
    return *opt;
  };
  nlohmann::json j;
  if (o.l0_floor) {
    const double g = need(o.gamma0, "--gamma0");
    j = {{"bound", "l0_pe_lower_bound"}, {"gamma0", g}, {"value", l0_pe_lower_bound(g)}};
  } else if (o.q) {
    const double x = need(o.x, "--x");
    j = {{"bound", "q_function"}, {"x", x}, {"value", q_function(x)}};
  } else if (o.chi2) {
    const Index k = need(o.k, "--k");
    const double a = need(o.a_sq, "--a-sq");
    j = {{"bound", "chi2_tail_bound"}, {"k", k}, {"a_sq", a}, {"value", chi2_tail_bound(static_cast<int>(k), a)}};
  } else {
    if (o.matrix.empty()) throw UsageError("missing --matrix");
    if (o.support.empty()) throw UsageError("missing --support");
    const DesignMatrix x = materialize_matrix(parse_matrix_flag(o.matrix), resolve_seed(o.seed, 0));
    const SupportSet support(parse_index_list(o.support));
    support.check_bounds(x.cols());
    if (o.omp_margin) {
      const double b = need(o.beta_min, "--beta-min");
      j = {{"bound", "omp_selection_margin"}, {"beta_min", b}, {"value", omp_selection_margin(x, support, b)}};
    } else {
      if (o.beta.empty()) throw UsageError("missing --beta (coefficients on the support, in support order)");
      const std::vector<double> vals = parse_list(o.beta);
      if (vals.size() != support.size()) throw UsageError("--beta needs one value per support index");
      Vector beta = Vector::Zero(x.cols());
      for (std::size_t i = 0; i < vals.size(); ++i) beta(support[i]) = vals[i];
      const RateBoundInputs in = rate_bound_inputs(x, support, beta, need(o.gamma1, "--gamma1"), need(o.sigma, "--sigma"));
      if (o.e1) {
        const BoundValue b = e1_rate_bound(in);
        j = {{"bound", "e1_rate_bound"}, {"value", b.value}, {"raw", b.raw}};
      } else {
        const E2Bound b = e2_rate_bound(in);
        j = {{"bound", "e2_rate_bound"},
             {"exact_q_form", {{"value", b.exact_q_form.value}, {"raw", b.exact_q_form.raw}}}};
        j["exp_form"] = b.exp_form ? nlohmann::json{{"value", b.exp_form->value}, {"raw", b.exp_form->raw}}
                                   : nlohmann::json("invalid");
      }
      j["erc"] = in.erc;
    }
  }
  emit(j.dump(2) + "\n", o.out, out);
  return kExitOk;
}

inline int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                              std::ostream& err = std::cerr) {
  CLI::App app{"Sparse support recovery toolkit: design qualifiers, solvers, Monte Carlo PE sweeps and bounds",
               "snr_sentry"};
  app.require_subcommand(1);
  Options o;

  const auto add_seed = [&](CLI::App* s) {
    s->add_option("--seed", o.seed, "Master seed (falls back to $SNR_SENTRY_SEED, then 0)");
  };

  CLI::App* qualify_cmd = app.add_subcommand("qualify", "Mutual coherence, MIC sparsity, spark and ERC of a design");
  qualify_cmd->add_option("--matrix", o.matrix, "erc:<n> | rand:<n>x<p> | file:<path>")->required();
  qualify_cmd->add_option("--support", o.support, "Comma-separated support for the ERC coefficient");
  qualify_cmd->add_option("--max-card", o.max_card, "Largest subset size checked for spark");
  qualify_cmd->add_option("--format", o.format, "json or text")->check(CLI::IsMember({"json", "text"}));
  qualify_cmd->add_option("--out", o.out, "Output path (default stdout)");
  add_seed(qualify_cmd);

  CLI::App* solve_cmd = app.add_subcommand("solve", "Run one recovery procedure on (X, y)");
  solve_cmd->add_option("--matrix", o.matrix, "erc:<n> | rand:<n>x<p> | file:<path>")->required();
  solve_cmd->add_option("--y", o.y_path, "Observation vector file, one value per line")->required();
  solve_cmd->add_option("--algo", o.algos, "Algorithm tag")->required();
  solve_cmd->add_option("--rule", o.rules, "Tuning rule, e.g. ebic:1*pow:0.5");
  solve_cmd->add_option("--sigma-sq", o.sigma_sq, "Noise variance")->required();
  solve_cmd->add_option("--k", o.k, "Known sparsity for oracle and omp_k");
  solve_cmd->add_option("--l0-max-card", o.l0_max_card, "Largest support enumerated by l0 (default min(n, p))");
  solve_cmd->add_option("--out", o.out, "Output path (default stdout)");
  add_seed(solve_cmd);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo PE curves, CSV output");
  sweep_cmd->add_option("--config", o.config, "Key-value or JSON experiment config");
  sweep_cmd->add_option("--matrix", o.matrix, "erc:<n> | rand:<n>x<p> | file:<path>");
  sweep_cmd->add_option("--k", o.k, "True sparsity k*");
  sweep_cmd->add_option("--beta-mag", o.beta_mag, "Magnitude of the nonzero coefficients");
  sweep_cmd->add_option("--sigma-grid", o.sigma_grid, "Comma-separated, strictly decreasing noise variances");
  sweep_cmd->add_option("--algo", o.algos, "Algorithm tag (repeatable)");
  sweep_cmd->add_option("--rule", o.rules, "Tuning rule (repeatable, paired with rule-taking algorithms)");
  sweep_cmd->add_option("--trials", o.trials, "Trials per grid point");
  sweep_cmd->add_option("--threads", o.threads, "Worker threads, 0 = all cores");
  sweep_cmd->add_option("--l0-max-card", o.l0_max_card, "Largest support enumerated by l0 (default k* + 1)");
  sweep_cmd->add_flag("--diagnostics", o.diagnostics, "Append partial-credit columns");
  sweep_cmd->add_option("--out", o.out, "Output path (default stdout)");
  add_seed(sweep_cmd);

  CLI::App* bounds_cmd = app.add_subcommand("bounds", "Evaluate an analytic bound, JSON output");
  bounds_cmd->add_flag("--l0-floor", o.l0_floor, "2 Q(sqrt(Gamma0)); needs --gamma0");
  bounds_cmd->add_flag("--q", o.q, "Gaussian tail Q(x); needs --x");
  bounds_cmd->add_flag("--chi2-tail", o.chi2, "Chi-square tail bound; needs --k --a-sq");
  bounds_cmd->add_flag("--e1", o.e1, "No-false-discovery rate bound; needs --matrix --support --beta --gamma1 --sigma");
  bounds_cmd->add_flag("--e2", o.e2, "No-missed-discovery rate bound; same inputs as --e1");
  bounds_cmd->add_flag("--omp-margin", o.omp_margin, "OMP selection margin; needs --matrix --support --beta-min");
  bounds_cmd->add_option("--gamma0", o.gamma0);
  bounds_cmd->add_option("--x", o.x);
  bounds_cmd->add_option("--k", o.k);
  bounds_cmd->add_option("--a-sq", o.a_sq);
  bounds_cmd->add_option("--matrix", o.matrix, "erc:<n> | rand:<n>x<p> | file:<path>");
  bounds_cmd->add_option("--support", o.support, "Comma-separated support");
  bounds_cmd->add_option("--beta", o.beta, "Comma-separated coefficients on the support");
  bounds_cmd->add_option("--gamma1", o.gamma1);
  bounds_cmd->add_option("--sigma", o.sigma);
  bounds_cmd->add_option("--beta-min", o.beta_min);
  bounds_cmd->add_option("--out", o.out, "Output path (default stdout)");
  add_seed(bounds_cmd);

  std::vector<const char*> argv{"snr_sentry"};
  for (const auto& a : args) argv.push_back(a.c_str());

  CLI::App* active = &app;
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    for (CLI::App* s : {qualify_cmd, solve_cmd, sweep_cmd, bounds_cmd}) {
      if (s->parsed()) active = s;
    }
    if (active == qualify_cmd) return run_qualify(o, out);
    if (active == solve_cmd) return run_solve(o, out);
    if (active == sweep_cmd) return run_sweep(o, out, err);
    return run_bounds(o, out);
  } catch (const CLI::CallForHelp&) {
    out << (active == &app ? app.help() : active->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    for (CLI::App* s : {qualify_cmd, solve_cmd, sweep_cmd, bounds_cmd}) {
      if (s->parsed()) active = s;
    }
    err << "error: " << e.what() << '\n' << active->help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << active->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

inline int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                              std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_and_dispatch(args, out, err);
}

}  // namespace snr_sentry::cli
