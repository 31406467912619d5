#pragma once

// Monte Carlo estimation of the support-recovery error probability.
//
// Every trial owns a generator seeded from (master seed, grid index,
// algorithm index, trial index) and draws, in order: the matrix (random
// designs with fresh_per_trial only), the signal, then the noise. Results land
// in per-trial slots and are reduced in trial order, so output is identical
// for any worker count.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "snr_sentry/algorithms.hpp"
#include "snr_sentry/linalg.hpp"
#include "snr_sentry/matrix_io.hpp"

namespace snr_sentry {

// --------------------------------------------------------------------------
// Seeding
// --------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Order-sensitive 64-bit mix of a key tuple.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6A09E667F3BCC909ULL;
  for (std::uint64_t v : parts) h = splitmix64(h ^ splitmix64(v));
  return h;
}

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kMatrixStreamTag = 0x4D41545249584D58ULL;

// --------------------------------------------------------------------------
// Generators
// --------------------------------------------------------------------------

inline bool is_power_of_two(Index n) { return n >= 1 && (n & (n - 1)) == 0; }

/// Sylvester Hadamard matrix of order n (entries +-1).
inline Matrix sylvester_hadamard(Index n) {
  if (!is_power_of_two(n)) throw std::invalid_argument("Hadamard order must be a power of two, got " + std::to_string(n));
  Matrix h = Matrix::Ones(1, 1);
  while (h.rows() < n) {
    const Index m = h.rows();
    Matrix next(2 * m, 2 * m);
    next << h, h, h, -h;
    h = std::move(next);
  }
  return h;
}

/// [I_n | H_n / sqrt(n)].
inline DesignMatrix gen_erc_matrix(Index n) {
  const Matrix h = sylvester_hadamard(n);
  Matrix x(n, 2 * n);
  x << Matrix::Identity(n, n), h / std::sqrt(static_cast<double>(n));
  return DesignMatrix(std::move(x));
}

inline DesignMatrix gen_random_matrix(Index n, Index p, Rng& rng) {
  if (n < 1 || p < 1) throw std::invalid_argument("gen_random_matrix: n and p must be >= 1");
  std::normal_distribution<double> normal;
  Matrix x(n, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = normal(rng);
  }
  for (Index j = 0; j < p; ++j) {
    const double norm = x.col(j).norm();
    if (norm == 0.0) throw std::runtime_error("gen_random_matrix: drew a zero column");
    x.col(j) /= norm;
  }
  return DesignMatrix(std::move(x));
}

struct Signal {
  Vector beta;
  SupportSet support;  // ascending
};

/// Uniform k-subset of [p] with independent +-magnitude signs.
inline Signal gen_signal(Index p, Index k_star, double magnitude, Rng& rng) {
  if (k_star < 0 || k_star > p) throw std::invalid_argument("gen_signal: k* must lie in [0, p]");
  std::vector<Index> pool(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) pool[static_cast<std::size_t>(j)] = j;
  for (Index i = 0; i < k_star; ++i) {
    std::uniform_int_distribution<Index> pick(i, p - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<Index> chosen(pool.begin(), pool.begin() + k_star);
  std::sort(chosen.begin(), chosen.end());
  Signal s;
  s.beta = Vector::Zero(p);
  for (Index j : chosen) s.beta(j) = (rng() >> 63) ? -magnitude : magnitude;
  s.support = SupportSet(chosen);
  return s;
}

inline Vector gen_noise(Index n, double sigma, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector w(n);
  for (Index i = 0; i < n; ++i) w(i) = sigma * normal(rng);
  return w;
}

// --------------------------------------------------------------------------
// Configuration
// --------------------------------------------------------------------------

struct MatrixSpec {
  enum class Kind { kErcHadamard, kRandomGaussian, kFile };
  Kind kind = Kind::kErcHadamard;
  Index n = 0;
  Index p = 0;
  bool fresh_per_trial = true;  // random designs only
  std::string path;

  static MatrixSpec erc(Index n) { return {Kind::kErcHadamard, n, 2 * n, false, {}}; }
  static MatrixSpec random(Index n, Index p, bool fresh = true) { return {Kind::kRandomGaussian, n, p, fresh, {}}; }
  static MatrixSpec file(std::string path) { return {Kind::kFile, 0, 0, false, std::move(path)}; }

  /// erc:<n> | rand:<n>x<p> | file:<path>
  static MatrixSpec parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("matrix spec '" + std::string(text) + "' lacks a kind prefix");
    const std::string_view kind = text.substr(0, colon);
    const std::string_view rest = text.substr(colon + 1);
    const auto parse_dim = [&](std::string_view s) {
      Index v = 0;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size() || v < 1) {
        throw std::invalid_argument("bad dimension '" + std::string(s) + "' in matrix spec '" + std::string(text) + "'");
      }
      return v;
    };
    if (kind == "erc") {
      const Index n = parse_dim(rest);
      if (!is_power_of_two(n)) throw std::invalid_argument("erc matrix order must be a power of two");
      return erc(n);
    }
    if (kind == "rand") {
      const auto x = rest.find('x');
      if (x == std::string_view::npos) throw std::invalid_argument("random matrix spec must look like rand:<n>x<p>");
      return random(parse_dim(rest.substr(0, x)), parse_dim(rest.substr(x + 1)));
    }
    if (kind == "file") {
      if (rest.empty()) throw std::invalid_argument("file matrix spec needs a path");
      return file(std::string(rest));
    }
    throw std::invalid_argument("unknown matrix kind '" + std::string(kind) + "' (expected erc, rand or file)");
  }

  std::string describe() const {
    switch (kind) {
      case Kind::kErcHadamard: return "erc:" + std::to_string(n);
      case Kind::kRandomGaussian: return "rand:" + std::to_string(n) + "x" + std::to_string(p);
      case Kind::kFile: return "file:" + path;
    }
    return "?";
  }

  bool varies_per_trial() const { return kind == Kind::kRandomGaussian && fresh_per_trial; }
};

/// Materializes a matrix that does not vary per trial. Random designs use a
/// stream derived from the master seed alone.
inline DesignMatrix materialize_matrix(const MatrixSpec& spec, std::uint64_t master_seed) {
  switch (spec.kind) {
    case MatrixSpec::Kind::kErcHadamard: return gen_erc_matrix(spec.n);
    case MatrixSpec::Kind::kRandomGaussian: {
      Rng rng(mix_seed({master_seed, kMatrixStreamTag}));
      return gen_random_matrix(spec.n, spec.p, rng);
    }
    case MatrixSpec::Kind::kFile: return DesignMatrix(load_matrix_file(spec.path));
  }
  throw std::logic_error("unknown matrix kind");
}

inline constexpr std::size_t kDefaultTrials = 10'000;

struct ExperimentConfig {
  MatrixSpec matrix = MatrixSpec::erc(32);
  Index k_star = 3;
  double beta_magnitude = 1.0;
  std::vector<double> sigma_sq_grid;
  std::vector<AlgorithmSpec> algorithms;
  std::size_t trials = kDefaultTrials;
  std::uint64_t master_seed = 0;
  SolverSettings solver;
  bool diagnostics = false;  // append partial-credit columns to the CSV

  void validate() const {
    if (k_star < 0) throw std::invalid_argument("config: k_star must be >= 0");
    if (matrix.kind != MatrixSpec::Kind::kFile && k_star > matrix.n) {
      throw std::invalid_argument("config: k_star exceeds n");
    }
    if (!(beta_magnitude > 0.0) || !std::isfinite(beta_magnitude)) {
      throw std::invalid_argument("config: beta_magnitude must be positive");
    }
    if (sigma_sq_grid.empty()) throw std::invalid_argument("config: sigma_sq_grid is empty");
    for (std::size_t i = 0; i < sigma_sq_grid.size(); ++i) {
      if (!(sigma_sq_grid[i] > 0.0) || !std::isfinite(sigma_sq_grid[i])) {
        throw std::invalid_argument("config: sigma_sq_grid entries must be positive");
      }
      if (i > 0 && !(sigma_sq_grid[i] < sigma_sq_grid[i - 1])) {
        throw std::invalid_argument("config: sigma_sq_grid must be strictly decreasing");
      }
    }
    if (algorithms.empty()) throw std::invalid_argument("config: no algorithms given");
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  }
};

// --------------------------------------------------------------------------
// Trials
// --------------------------------------------------------------------------

struct TrialOutcome {
  bool success = false;
  bool errored = false;
  Index false_discoveries = 0;
  Index missed = 0;
  std::string error;
};

/// Holds the per-sweep state shared by all trials (the fixed matrix).
class TrialRunner {
 public:
  explicit TrialRunner(const ExperimentConfig& config) : config_(config) {
    config_.validate();
    if (!config_.matrix.varies_per_trial()) {
      fixed_ = materialize_matrix(config_.matrix, config_.master_seed);
      if (config_.k_star > fixed_->rows()) throw std::invalid_argument("config: k_star exceeds n");
    }
  }

  const ExperimentConfig& config() const { return config_; }

  Index rows() const { return fixed_ ? fixed_->rows() : config_.matrix.n; }

  std::uint64_t trial_seed(std::size_t grid, std::size_t algo, std::size_t trial) const {
    return mix_seed({config_.master_seed, grid, algo, trial});
  }

  TrialOutcome run(std::size_t grid, std::size_t algo, std::size_t trial) const {
    TrialOutcome out;
    try {
      Rng rng(trial_seed(grid, algo, trial));
      std::optional<DesignMatrix> fresh;
      if (!fixed_) fresh = gen_random_matrix(config_.matrix.n, config_.matrix.p, rng);
      const DesignMatrix& x = fixed_ ? *fixed_ : *fresh;
      const Signal sig = gen_signal(x.cols(), config_.k_star, config_.beta_magnitude, rng);
      const double sigma_sq = config_.sigma_sq_grid.at(grid);
      const Vector y = x.entries() * sig.beta + gen_noise(x.rows(), std::sqrt(sigma_sq), rng);
      const RecoveryResult r = run_algorithm(x, y, sigma_sq, config_.algorithms.at(algo), config_.k_star, config_.solver);
      out.success = same_set(r.support, sig.support);
      for (Index j : r.support) {
        if (!sig.support.contains(j)) ++out.false_discoveries;
      }
      for (Index j : sig.support) {
        if (!r.support.contains(j)) ++out.missed;
      }
    } catch (const std::exception& e) {
      out.errored = true;
      out.error = e.what();
    }
    return out;
  }

 private:
  ExperimentConfig config_;
  std::optional<DesignMatrix> fixed_;
};

inline TrialOutcome run_trial(const ExperimentConfig& config, std::size_t grid, std::size_t algo, std::size_t trial) {
  return TrialRunner(config).run(grid, algo, trial);
}

// --------------------------------------------------------------------------
// Worker pool
// --------------------------------------------------------------------------

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1U : hw;
}

/// Calls body(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any body is rethrown after all workers join.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1U, std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// --------------------------------------------------------------------------
// PE estimation
// --------------------------------------------------------------------------

struct PERow {
  double sigma_sq = 0.0;
  double snr_db = 0.0;
  std::string algorithm;
  std::string rule;
  double pe_hat = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double stderr_ = 0.0;
  // diagnostics
  std::size_t errors = 0;
  double mean_false_discoveries = 0.0;
  double mean_missed = 0.0;
};

struct SweepResult {
  std::vector<PERow> rows;
  std::size_t errored_trials = 0;
  std::vector<std::string> error_samples;  // first few messages with trial metadata
};

/// 10 log10(k* |beta|^2 / (n sigma^2)).
inline double snr_db(Index k_star, double magnitude, Index n, double sigma_sq) {
  return 10.0 * std::log10(static_cast<double>(k_star) * magnitude * magnitude / (static_cast<double>(n) * sigma_sq));
}

inline double binomial_stderr(double pe, std::size_t trials) {
  return std::sqrt(pe * (1.0 - pe) / static_cast<double>(trials));
}

inline constexpr std::size_t kMaxErrorSamples = 5;

/// Runs the selected (grid, algorithm) cells; cells are emitted grid-major.
inline SweepResult run_cells(const TrialRunner& runner, const std::vector<std::pair<std::size_t, std::size_t>>& cells,
                             unsigned threads) {
  const ExperimentConfig& cfg = runner.config();
  const std::size_t t = cfg.trials;
  std::vector<TrialOutcome> slots(cells.size() * t);
  parallel_for(slots.size(), threads, [&](std::size_t i) {
    const auto& [g, a] = cells[i / t];
    slots[i] = runner.run(g, a, i % t);
  });

  SweepResult out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& [g, a] = cells[c];
    PERow row;
    row.sigma_sq = cfg.sigma_sq_grid[g];
    row.snr_db = snr_db(cfg.k_star, cfg.beta_magnitude, runner.rows(), row.sigma_sq);
    row.algorithm = algorithm_tag(cfg.algorithms[a].algorithm);
    row.rule = cfg.algorithms[a].rule_string();
    row.trials = t;
    double fd = 0.0;
    double ms = 0.0;
    for (std::size_t k = 0; k < t; ++k) {
      const TrialOutcome& o = slots[c * t + k];
      if (!o.success) ++row.failures;
      if (o.errored) {
        ++row.errors;
        if (out.error_samples.size() < kMaxErrorSamples) {
          out.error_samples.push_back("sigma_sq=" + std::to_string(row.sigma_sq) + " algorithm=" + row.algorithm +
                                      " rule=" + row.rule + " trial=" + std::to_string(k) + ": " + o.error);
        }
      }
      fd += static_cast<double>(o.false_discoveries);
      ms += static_cast<double>(o.missed);
    }
    row.pe_hat = static_cast<double>(row.failures) / static_cast<double>(t);
    row.stderr_ = binomial_stderr(row.pe_hat, t);
    row.mean_false_discoveries = fd / static_cast<double>(t);
    row.mean_missed = ms / static_cast<double>(t);
    out.errored_trials += row.errors;
    out.rows.push_back(std::move(row));
  }
  return out;
}

inline PERow estimate_pe(const TrialRunner& runner, std::size_t grid, std::size_t algo, unsigned threads = 1) {
  return run_cells(runner, {{grid, algo}}, threads).rows.front();
}

inline SweepResult sweep(const ExperimentConfig& config, unsigned threads = 1) {
  const TrialRunner runner(config);
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t g = 0; g < config.sigma_sq_grid.size(); ++g) {
    for (std::size_t a = 0; a < config.algorithms.size(); ++a) cells.emplace_back(g, a);
  }
  return run_cells(runner, cells, threads);
}

// --------------------------------------------------------------------------
// CSV
// --------------------------------------------------------------------------

inline constexpr const char* kCsvHeader = "sigma_sq,snr_db,algorithm,rule,pe_hat,trials,failures,stderr";
inline constexpr const char* kCsvDiagnosticHeader = ",errors,mean_false_discoveries,mean_missed";

inline void write_csv(std::ostream& os, const SweepResult& result, bool diagnostics) {
  const auto num = [](double v) { return detail::shortest_real(v); };
  os << kCsvHeader << (diagnostics ? kCsvDiagnosticHeader : "") << '\n';
  for (const PERow& r : result.rows) {
    os << num(r.sigma_sq) << ',' << num(r.snr_db) << ',' << r.algorithm << ',' << r.rule << ',' << num(r.pe_hat) << ','
       << r.trials << ',' << r.failures << ',' << num(r.stderr_);
    if (diagnostics) os << ',' << r.errors << ',' << num(r.mean_false_discoveries) << ',' << num(r.mean_missed);
    os << '\n';
  }
}

}  // namespace snr_sentry
