// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "snr_sentry/bounds.hpp"
#include "snr_sentry/cli.hpp"
#include "snr_sentry/experiment.hpp"
#include "snr_sentry/qualifiers.hpp"
#include "snr_sentry/solvers.hpp"

using namespace snr_sentry;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vector noisy(const DesignMatrix& x, const Signal& s, double sigma, std::mt19937_64& rng) {
  return x.entries() * s.beta + sigma * oracle::gaussian(x.rows(), 1, rng).col(0);
}

// Rows of one algorithm in grid order.
std::vector<PERow> curve(const SweepResult& r, const AlgorithmSpec& a) {
  std::vector<PERow> out;
  for (const PERow& row : r.rows) {
    if (row.algorithm == algorithm_tag(a.algorithm) && row.rule == a.rule_string()) out.push_back(row);
  }
  return out;
}

double pooled_se(const PERow& a, const PERow& b) { return std::hypot(a.stderr_, b.stderr_); }

unsigned threads() { return resolve_threads(0); }

Outcome c1_thresholds() {
  Outcome v;
  const auto floor_at = [](int p) { return l0_pe_lower_bound(2.0 * std::log(static_cast<double>(p))); };
  int first_below_1pct = -1;
  int first_below_01pct = -1;
  for (int p = 2; p <= 5000; ++p) {
    const double b = floor_at(p);
    if (first_below_1pct < 0 && b < 0.01) first_below_1pct = p;
    if (first_below_01pct < 0 && b <= 0.001) first_below_01pct = p;
    if (first_below_1pct > 0) v.require(b < 0.01, fmt("bound >= 0.01 at p=%d", p));
    if (first_below_01pct > 0) v.require(b <= 0.001, fmt("bound > 0.001 at p=%d", p));
  }
  v.require(first_below_1pct == 28, fmt("first p with bound < 0.01 is %d", first_below_1pct));
  v.require(first_below_01pct == 225, fmt("first p with bound <= 0.001 is %d", first_below_01pct));
  v.detail = fmt("p*(0.01)=%d p*(0.001)=%d", first_below_1pct, first_below_01pct) + (v.pass ? "" : "; " + v.detail);
  return v;
}

Outcome c2_erc_geometry() {
  Outcome v;
  const DesignMatrix x = gen_erc_matrix(32);
  const double mu = mutual_coherence(x);
  const Index k = mic_max_sparsity(mu).k;
  v.require(std::abs(mu - 1.0 / std::sqrt(32.0)) <= 1e-12, fmt("mu=%.17g", mu));
  v.require(k == 3, fmt("mic k=%ld", static_cast<long>(k)));
  if (v.pass) v.detail = fmt("mu=%.15f mic=%ld", mu, static_cast<long>(k));
  return v;
}

Outcome c3_l0_brute_force() {
  Outcome v;
  std::mt19937_64 rng(3003);
  int mismatches = 0;
  int checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const DesignMatrix x(oracle::unit_columns(oracle::gaussian(4, 8, rng)));
    const Signal s = gen_signal(8, 2, 1.0, rng);
    for (double sigma_sq : {1e-2, 1e-4}) {
      const Vector y = noisy(x, s, std::sqrt(sigma_sq), rng);
      for (const TuningRule& rule : {TuningRule::ebic(1.0), TuningRule::ebic(1.0).with_power(0.5)}) {
        const auto pen = [&](Index k) {
          return sigma_sq * gamma_value(rule, 4, 8, k, sigma_sq) * static_cast<double>(k);
        };
        const oracle::SubsetChoice want = oracle::brute_force_l0(x.entries(), y, 0, 4, pen);
        const RecoveryResult got = solve_l0(x, y, sigma_sq, rule, 4);
        mismatches += got.support.sorted() != want.support;
        ++checked;
      }
    }
  }
  v.require(mismatches == 0, fmt("%d mismatches", mismatches));
  v.detail = fmt("%d/%d supports match", checked - mismatches, checked) + (v.pass ? "" : "; " + v.detail);
  return v;
}

Outcome c4_triple_agreement() {
  Outcome v;
  std::mt19937_64 rng(4004);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix q = oracle::random_orthonormal(8, rng);
    const DesignMatrix x(q);
    const Vector y = oracle::gaussian(8, 1, rng).col(0);
    const double sigma = 0.1 + 0.4 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double gamma = 0.5 + 3.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Vector pen = solve_l1_penalty(x, y, sigma, gamma).estimate;
    const Vector ds = solve_dantzig_orthonormal(x, y, sigma, gamma).estimate;
    const Vector z = q.transpose() * y;
    for (Index j = 0; j < 8; ++j) {
      const double want = oracle::interval_projection(z(j), sigma * gamma);
      worst = std::max({worst, std::abs(pen(j) - want), std::abs(ds(j) - want), std::abs(pen(j) - ds(j))});
    }
  }
  v.require(worst <= 1e-8, fmt("max deviation %.3g", worst));
  if (v.pass) v.detail = fmt("max deviation %.3g", worst);
  return v;
}

Outcome c5_kkt() {
  Outcome v;
  std::mt19937_64 rng(5005);
  const DesignMatrix x = gen_erc_matrix(32);
  const std::vector<double> grid{1e-2, 1e-4, 1e-6, 1e-8};
  const std::vector<TuningRule> rules{TuningRule::l1_candes(), TuningRule::l1_candes().with_power(0.3)};
  double worst = 0.0;
  int bad = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const double sigma_sq = grid[static_cast<std::size_t>(rep) % grid.size()];
    const TuningRule& rule = rules[static_cast<std::size_t>(rep / 4) % rules.size()];
    const double sigma = std::sqrt(sigma_sq);
    const Signal s = gen_signal(64, 3, 1.0, rng);
    const Vector y = noisy(x, s, sigma, rng);
    const double gamma1 = gamma_value(rule, 32, 64, 0, sigma_sq);
    const RecoveryResult r = solve_l1_penalty(x, y, sigma, gamma1);
    const double viol = oracle::kkt_violation(x.entries(), y, r.estimate, sigma * gamma1);
    worst = std::max(worst, viol);
    bad += !(viol <= 1e-8);
  }
  v.require(bad == 0, fmt("%d of 500 fail, worst %.3g", bad, worst));
  if (v.pass) v.detail = fmt("500/500 certified, worst violation %.3g", worst);
  return v;
}

Outcome c6_noiseless() {
  Outcome v;
  std::mt19937_64 rng(6006);
  const DesignMatrix x = gen_erc_matrix(32);
  const double sigma_sq = 1e-12;
  const TuningRule rule = TuningRule::ebic(1.0).with_power(0.5);
  int omp_miss = 0;
  int l0_miss = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Signal s = gen_signal(64, 3, 1.0, rng);
    const Vector y = noisy(x, s, std::sqrt(sigma_sq), rng);
    omp_miss += !(omp(x, y, std::sqrt(sigma_sq), StopRule::known_k(3)).support == s.support);
    l0_miss += !(solve_l0(x, y, sigma_sq, rule, 4).support == s.support);
  }
  v.require(omp_miss == 0, fmt("OMP missed %d", omp_miss));
  v.require(l0_miss == 0, fmt("l0 missed %d", l0_miss));
  if (v.pass) v.detail = "OMP 1000/1000, l0 1000/1000";
  return v;
}

Outcome c7_flooring() {
  Outcome v;
  ExperimentConfig aic;
  aic.matrix = MatrixSpec::random(5, 10);
  aic.k_star = 2;
  aic.sigma_sq_grid = {1e-6};
  aic.algorithms = {parse_algorithm_spec("l0", "aic")};
  aic.trials = 10000;
  aic.master_seed = 7007;
  const PERow a = sweep(aic, threads()).rows.at(0);
  v.require(a.pe_hat >= 0.10, fmt("AIC pe=%.4f < 0.10", a.pe_hat));

  ExperimentConfig l1;
  l1.matrix = MatrixSpec::erc(32);
  l1.k_star = 3;
  l1.sigma_sq_grid = {1e-6, 1e-8};
  l1.algorithms = {parse_algorithm_spec("l1_penalty", "l1_candes")};
  l1.trials = 10000;
  l1.master_seed = 7008;
  const std::vector<PERow> c = curve(sweep(l1, threads()), l1.algorithms[0]);
  const double diff = std::abs(c.at(1).pe_hat - c.at(0).pe_hat);
  const double tol = 3.0 * pooled_se(c[0], c[1]);
  v.require(diff <= tol, fmt("l1 |pe(1e-8)-pe(1e-6)|=%.4f > %.4f", diff, tol));
  const std::string values = fmt("AIC pe(1e-6)=%.4f (floor %.4f); l1 fixed pe(1e-6)=%.4f pe(1e-8)=%.4f", a.pe_hat,
                                 l0_pe_lower_bound(2.0), c[0].pe_hat, c[1].pe_hat);
  v.detail = values + (v.pass ? "" : "; " + v.detail);
  return v;
}

Outcome c8_consistency() {
  Outcome v;
  ExperimentConfig cfg;
  cfg.matrix = MatrixSpec::erc(32);
  cfg.k_star = 3;
  cfg.sigma_sq_grid = {1e-2, 1e-4, 1e-6, 1e-8};
  cfg.algorithms = {parse_algorithm_spec("l0", "ebic:1*pow:0.5"), parse_algorithm_spec("l1_penalty", "l1_candes*pow:0.3"),
                    parse_algorithm_spec("l1_error", "l1err_candes*pow:0.3"),
                    parse_algorithm_spec("omp_rpsc", "rpsc*pow:0.3"), parse_algorithm_spec("omp_rcsc", "rcsc*pow:0.3")};
  cfg.trials = 10000;
  cfg.master_seed = 8008;
  const SweepResult r = sweep(cfg, threads());
  std::string values;
  for (const AlgorithmSpec& a : cfg.algorithms) {
    const std::vector<PERow> c = curve(r, a);
    values += (values.empty() ? "" : " | ") + a.label() + ":";
    for (const PERow& row : c) values += fmt(" %.4f", row.pe_hat);
    for (std::size_t i = 1; i < c.size(); ++i) {
      v.require(c[i].pe_hat <= c[i - 1].pe_hat + 2.0 * pooled_se(c[i - 1], c[i]),
                fmt("%s rises at sigma^2=%g", a.label().c_str(), c[i].sigma_sq));
    }
    v.require(c.back().pe_hat < 1e-2, fmt("%s pe(1e-8)=%.4f", a.label().c_str(), c.back().pe_hat));
  }
  v.require(r.errored_trials == 0, fmt("%zu errored trials", r.errored_trials));
  v.detail = values + (v.pass ? "" : "; " + v.detail);
  return v;
}

Outcome c9_bounds() {
  Outcome v;
  std::mt19937_64 rng(9009);
  std::string values;
  for (const auto& [k, a_sq] : std::vector<std::pair<int, double>>{{1, 4.0}, {5, 30.0}, {29, 60.0}}) {
    const int draws = 100000;
    const double freq = oracle::chi2_tail_frequency(k, a_sq, draws, rng);
    const double bound = chi2_tail_bound(k, a_sq);
    v.require(freq <= bound + 3.0 * oracle::binomial_se(freq, draws), fmt("chi2(%d,%g) freq %.5f > bound %.5f", k, a_sq, freq, bound));
    values += fmt("chi2(%d,%g) %.5f<=%.5f ", k, a_sq, freq, bound);
  }

  const DesignMatrix x = gen_erc_matrix(32);
  const SupportSet support{5, 33, 50};
  Vector beta = Vector::Zero(64);
  beta(5) = 1.0;
  beta(33) = -1.0;
  beta(50) = 1.0;
  const Matrix xi = oracle::pick_columns(x.entries(), support.sorted());
  const Matrix gram_inv = (xi.transpose() * xi).inverse();
  const Matrix proj = Matrix::Identity(32, 32) - xi * gram_inv * xi.transpose();
  double erc = 0.0;
  for (Index c = 0; c < 64; ++c) {
    if (!support.contains(c)) erc = std::max(erc, (gram_inv * xi.transpose() * x.col(c)).lpNorm<1>());
  }
  const double b1 = 1.0 - erc;
  const int draws = 10000;

  // E1: sup-norm of the projected noise correlations stays below sigma Gamma1 b1.
  {
    const double sigma = 0.2;
    const double gamma1 = std::sqrt(1.1 * 29.0) / b1;
    const BoundValue b = e1_rate_bound(rate_bound_inputs(x, support, beta, gamma1, sigma));
    int fail = 0;
    for (int d = 0; d < draws; ++d) {
      const Vector w = sigma * oracle::gaussian(32, 1, rng).col(0);
      fail += (x.entries().transpose() * (proj * w)).cwiseAbs().maxCoeff() >= sigma * gamma1 * b1;
    }
    const double freq = static_cast<double>(fail) / draws;
    v.require(freq <= 1.0 - b.raw + 3.0 * oracle::binomial_se(freq, draws),
              fmt("E1 failure freq %.4f > 1 - bound %.4f", freq, 1.0 - b.raw));
    values += fmt("| e1 %.4f<=%.4f ", 1.0 - freq, b.raw);
  }

  // E2: every least-squares coefficient on the support clears sigma c_j Gamma1 d_j.
  {
    const double sigma = 0.4;
    const double inf_norm = gram_inv.cwiseAbs().rowwise().sum().maxCoeff();
    for (double gamma1 : {0.25, 0.5, 1.0}) {
      const E2Bound b = e2_rate_bound(rate_bound_inputs(x, support, beta, gamma1, sigma));
      int hits = 0;
      for (int d = 0; d < draws; ++d) {
        const Vector y = x.entries() * beta + sigma * oracle::gaussian(32, 1, rng).col(0);
        const Vector b_ls = gram_inv * (xi.transpose() * y);
        bool all = true;
        for (Index j = 0; j < 3; ++j) {
          const double c = std::sqrt(gram_inv(j, j));
          all = all && std::abs(b_ls(j)) > sigma * c * gamma1 * (inf_norm / c);
        }
        hits += all;
      }
      const double freq = static_cast<double>(hits) / draws;
      v.require(b.exact_q_form.raw <= freq + 3.0 * oracle::binomial_se(freq, draws),
                fmt("E2 bound %.4f > freq %.4f at Gamma1=%g", b.exact_q_form.raw, freq, gamma1));
      values += fmt("| e2(%g) %.4f<=%.4f ", gamma1, b.exact_q_form.raw, freq);
    }
  }
  v.detail = values + (v.pass ? "" : "; " + v.detail);
  return v;
}

Outcome c10_determinism() {
  Outcome v;
  const auto run = [](const char* t) {
    std::ostringstream out;
    std::ostringstream err;
    const int rc = cli::parse_and_dispatch(
        {"sweep", "--matrix", "erc:32", "--k", "3", "--sigma-grid", "1e-2,1e-4,1e-6,1e-8", "--algo", "l0", "--rule",
         "ebic:1*pow:0.5", "--algo", "l1_penalty", "--rule", "l1_candes*pow:0.3", "--algo", "l1_error", "--rule",
         "l1err_candes*pow:0.3", "--algo", "omp_rpsc", "--rule", "rpsc*pow:0.3", "--algo", "omp_rcsc", "--rule",
         "rcsc*pow:0.3", "--algo", "omp_k", "--trials", "500", "--seed", "10010", "--diagnostics", "--threads", t},
        out, err);
    return std::make_pair(rc, out.str());
  };
  const auto one = run("1");
  const auto eight = run("8");
  v.require(one.first == 0 && eight.first == 0, fmt("exit codes %d/%d", one.first, eight.first));
  v.require(one.second == eight.second, "CSV differs between 1 and 8 threads");
  if (v.pass) v.detail = fmt("%zu bytes identical", one.second.size());
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"l0 floor sparsity thresholds", c1_thresholds},
      {"ERC matrix geometry", c2_erc_geometry},
      {"l0 brute-force equivalence", c3_l0_brute_force},
      {"orthonormal soft-threshold agreement", c4_triple_agreement},
      {"l1 penalty KKT certification", c5_kkt},
      {"noiseless exact recovery", c6_noiseless},
      {"fixed-rule flooring", c7_flooring},
      {"adapted-rule consistency", c8_consistency},
      {"bound domination", c9_bounds},
      {"thread-count determinism", c10_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %zu (%s) [%.1fs]: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs,
                v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
