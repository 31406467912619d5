#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "snr_sentry/bounds.hpp"
#include "snr_sentry/experiment.hpp"
#include "snr_sentry/qualifiers.hpp"

using namespace snr_sentry;

namespace {

ExperimentConfig erc_config(std::vector<double> grid, std::vector<AlgorithmSpec> algos, std::size_t trials,
                            Index n = 32, Index k = 3) {
  ExperimentConfig c;
  c.matrix = MatrixSpec::erc(n);
  c.k_star = k;
  c.sigma_sq_grid = std::move(grid);
  c.algorithms = std::move(algos);
  c.trials = trials;
  c.master_seed = 12345;
  return c;
}

AlgorithmSpec spec(const char* tag, const char* rule) { return parse_algorithm_spec(tag, rule); }

std::string csv(const SweepResult& r, bool diag = false) {
  std::ostringstream os;
  write_csv(os, r, diag);
  return os.str();
}

}  // namespace

TEST(ErcMatrix, OrderTwoColumns) {
  const DesignMatrix x = gen_erc_matrix(2);
  const double h = 1.0 / std::sqrt(2.0);
  Matrix want(2, 4);
  want << 1, 0, h, h, 0, 1, h, -h;
  EXPECT_LT((x.entries() - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ErcMatrix, CoherenceAndOrthonormalHalves) {
  for (Index n : {1, 4, 16, 32, 64}) {
    const DesignMatrix x = gen_erc_matrix(n);
    ASSERT_EQ(x.cols(), 2 * n);
    const Matrix g = x.entries().transpose() * x.entries();
    EXPECT_LT((g.topLeftCorner(n, n) - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((g.bottomRightCorner(n, n) - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
    if (n > 1) EXPECT_NEAR(mutual_coherence(x), 1.0 / std::sqrt(static_cast<double>(n)), 1e-12);
  }
  EXPECT_NEAR(mutual_coherence(gen_erc_matrix(32)), 1.0 / std::sqrt(32.0), 1e-12);
  EXPECT_THROW(gen_erc_matrix(12), std::invalid_argument);
  EXPECT_THROW(gen_erc_matrix(0), std::invalid_argument);
}

TEST(RandomMatrix, UnitColumnsAndReplay) {
  Rng a(99);
  Rng b(99);
  const DesignMatrix x = gen_random_matrix(75, 100, a);
  const DesignMatrix y = gen_random_matrix(75, 100, b);
  EXPECT_EQ(x.rows(), 75);
  EXPECT_EQ(x.cols(), 100);
  for (Index j = 0; j < 100; ++j) EXPECT_NEAR(x.col(j).norm(), 1.0, 1e-12);
  EXPECT_TRUE(x.entries() == y.entries());
  const DesignMatrix z = gen_random_matrix(75, 100, a);
  EXPECT_FALSE(x.entries() == z.entries());
}

TEST(Signal, DegenerateAndConstruction) {
  Rng rng(3);
  const Signal zero = gen_signal(10, 0, 1.0, rng);
  EXPECT_TRUE(zero.beta.isZero(0.0));
  EXPECT_TRUE(zero.support.empty());
  for (int rep = 0; rep < 200; ++rep) {
    const Signal s = gen_signal(64, 3, 2.5, rng);
    EXPECT_EQ(s.support.size(), 3u);
    EXPECT_EQ(support_of(s.beta).sorted(), s.support.sorted());
    for (Index j : s.support) EXPECT_EQ(std::abs(s.beta(j)), 2.5);
    EXPECT_TRUE(std::is_sorted(s.support.begin(), s.support.end()));
  }
  EXPECT_THROW(gen_signal(4, 5, 1.0, rng), std::invalid_argument);
}

TEST(Signal, UniformSupportAndFairSigns) {
  // Hypergeometric mean: each index is in the support with probability k/p = 0.2.
  Rng rng(4);
  const int draws = 10000;
  std::vector<int> hits(10, 0);
  int positive = 0;
  for (int d = 0; d < draws; ++d) {
    const Signal s = gen_signal(10, 2, 1.0, rng);
    for (Index j : s.support) {
      ++hits[static_cast<std::size_t>(j)];
      positive += s.beta(j) > 0;
    }
  }
  for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / draws, 0.2, 0.02);
  EXPECT_NEAR(static_cast<double>(positive) / (2 * draws), 0.5, 0.02);
}

TEST(MatrixSpec, ParseAndDescribe) {
  EXPECT_EQ(MatrixSpec::parse("erc:32").describe(), "erc:32");
  EXPECT_EQ(MatrixSpec::parse("erc:32").p, 64);
  const MatrixSpec r = MatrixSpec::parse("rand:5x10");
  EXPECT_EQ(r.n, 5);
  EXPECT_EQ(r.p, 10);
  EXPECT_TRUE(r.varies_per_trial());
  EXPECT_EQ(MatrixSpec::parse("file:m.txt").path, "m.txt");
  for (const char* bad : {"erc:12", "erc", "rand:5", "rand:0x3", "cube:3", "file:", "erc:-4", "rand:5x10x"}) {
    EXPECT_THROW(MatrixSpec::parse(bad), std::invalid_argument) << bad;
  }
}

TEST(Config, Validation) {
  ExperimentConfig c = erc_config({1e-2}, {spec("omp_k", "none")}, 10);
  EXPECT_NO_THROW(c.validate());
  ExperimentConfig bad = c;
  bad.sigma_sq_grid = {1e-4, 1e-2};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.sigma_sq_grid.clear();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.trials = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.k_star = 33;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.algorithms.clear();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Seeds, MixSeparatesComponents) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t g = 0; g < 4; ++g) {
    for (std::uint64_t a = 0; a < 4; ++a) {
      for (std::uint64_t t = 0; t < 50; ++t) seen.insert(mix_seed({7, g, a, t}));
    }
  }
  EXPECT_EQ(seen.size(), 4u * 4u * 50u);
  EXPECT_NE(mix_seed({1, 2}), mix_seed({2, 1}));
}

TEST(Trial, NearNoiselessOmpAlwaysSucceeds) {
  const ExperimentConfig c = erc_config({1e-12}, {spec("omp_k", "none")}, 300);
  const TrialRunner runner(c);
  for (std::size_t t = 0; t < c.trials; ++t) EXPECT_TRUE(runner.run(0, 0, t).success);
}

TEST(Trial, EmptySupportCountsAsSuccess) {
  const ExperimentConfig c = erc_config({1e-2}, {spec("omp_k", "none")}, 5, 8, 0);
  for (std::size_t t = 0; t < 5; ++t) EXPECT_TRUE(run_trial(c, 0, 0, t).success);
}

TEST(Trial, ReplayIsIdentical) {
  const ExperimentConfig c = erc_config({0.3}, {spec("l1_penalty", "l1_candes")}, 1);
  const TrialRunner runner(c);
  for (std::size_t t = 0; t < 30; ++t) {
    const TrialOutcome a = runner.run(0, 0, t);
    const TrialOutcome b = run_trial(c, 0, 0, t);
    EXPECT_EQ(a.success, b.success);
    EXPECT_EQ(a.false_discoveries, b.false_discoveries);
    EXPECT_EQ(a.missed, b.missed);
  }
}

TEST(Trial, SolverErrorsAreRecorded) {
  // The ERC design is not orthonormal, so every Dantzig trial errors.
  const ExperimentConfig c = erc_config({1e-2}, {spec("dantzig", "l1_candes")}, 7, 8, 2);
  const SweepResult r = sweep(c);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.errored_trials, 7u);
  EXPECT_EQ(r.rows[0].failures, 7u);
  EXPECT_EQ(r.rows[0].errors, 7u);
  ASSERT_FALSE(r.error_samples.empty());
  EXPECT_NE(r.error_samples[0].find("dantzig"), std::string::npos);
}

TEST(Trial, FreshRandomMatrixPerTrial) {
  ExperimentConfig c = erc_config({1e-2}, {spec("omp_k", "none")}, 1);
  c.matrix = MatrixSpec::random(5, 10, true);
  c.k_star = 2;
  ExperimentConfig fixed = c;
  fixed.matrix.fresh_per_trial = false;
  EXPECT_TRUE(c.matrix.varies_per_trial());
  EXPECT_FALSE(fixed.matrix.varies_per_trial());
  const DesignMatrix m1 = materialize_matrix(fixed.matrix, fixed.master_seed);
  const DesignMatrix m2 = materialize_matrix(fixed.matrix, fixed.master_seed);
  EXPECT_TRUE(m1.entries() == m2.entries());
}

TEST(EstimatePe, AllSuccessGivesZero) {
  const ExperimentConfig c = erc_config({1e-12}, {spec("omp_k", "none")}, 100);
  const PERow row = estimate_pe(TrialRunner(c), 0, 0);
  EXPECT_EQ(row.pe_hat, 0.0);
  EXPECT_EQ(row.stderr_, 0.0);
  EXPECT_EQ(row.failures, 0u);
  EXPECT_EQ(row.algorithm, "omp_k");
  EXPECT_EQ(row.rule, "none");
}

TEST(EstimatePe, BinomialCoherenceAndSnr) {
  const ExperimentConfig c = erc_config({1.0, 0.1, 1e-2}, {spec("l0", "ric_fg"), spec("omp_rpsc", "rpsc")}, 100);
  const SweepResult r = sweep(c);
  ASSERT_EQ(r.rows.size(), 6u);
  for (const PERow& row : r.rows) {
    EXPECT_GE(row.pe_hat, 0.0);
    EXPECT_LE(row.pe_hat, 1.0);
    EXPECT_NEAR(row.pe_hat * static_cast<double>(row.trials), static_cast<double>(row.failures), 1e-9);
    EXPECT_DOUBLE_EQ(row.stderr_, std::sqrt(row.pe_hat * (1 - row.pe_hat) / static_cast<double>(row.trials)));
    EXPECT_NEAR(row.snr_db, 10 * std::log10(3.0 / (32.0 * row.sigma_sq)), 1e-12);
  }
  // Grid-major order.
  EXPECT_EQ(r.rows[0].algorithm, "l0");
  EXPECT_EQ(r.rows[1].algorithm, "omp_rpsc");
  EXPECT_EQ(r.rows[2].sigma_sq, 0.1);
}

TEST(Sweep, SingleCellGivesOneRow) {
  EXPECT_EQ(sweep(erc_config({1e-3}, {spec("omp_k", "none")}, 5)).rows.size(), 1u);
}

TEST(Sweep, IndependentOfThreadCount) {
  const ExperimentConfig c =
      erc_config({1e-1, 1e-2}, {spec("l0", "bic"), spec("l1_penalty", "l1_candes*pow:0.3"), spec("omp_rcsc", "rcsc")}, 150);
  const std::string one = csv(sweep(c, 1), true);
  EXPECT_EQ(one, csv(sweep(c, 3), true));
  EXPECT_EQ(one, csv(sweep(c, 8), true));
  ExperimentConfig other = c;
  other.master_seed = 54321;
  EXPECT_NE(one, csv(sweep(other, 1), true));
}

TEST(Sweep, NoiselessSanityOfConsistentRules) {
  const ExperimentConfig c = erc_config({1e-16},
                                        {spec("l0", "ebic*pow:0.5"), spec("l1_penalty", "l1_candes*pow:0.3"),
                                         spec("omp_rpsc", "rpsc*pow:0.3"), spec("omp_rcsc", "rcsc*pow:0.3")},
                                        1000);
  for (const PERow& row : sweep(c).rows) EXPECT_EQ(row.failures, 0u) << row.algorithm;
}

TEST(Sweep, FixedL0RuleRespectsAnalyticFloor) {
  // Small fixed penalties prune little, so keep the trial count modest.
  const ExperimentConfig c = erc_config({1e-4, 1e-8}, {spec("l0", "aic"), spec("l0", "ric_fg")}, 300);
  const SweepResult r = sweep(c);
  for (std::size_t a = 0; a < 2; ++a) {
    const double gamma0 = gamma_value(*c.algorithms[a].rule, 32, 64, 1, 1.0);
    double best = 1.0;
    for (const PERow& row : r.rows) {
      if (row.rule == c.algorithms[a].rule_string()) best = std::min(best, row.pe_hat + 3 * row.stderr_);
    }
    EXPECT_GE(best, l0_pe_lower_bound(gamma0)) << c.algorithms[a].label();
  }
}

TEST(Csv, Format) {
  SweepResult r;
  PERow row;
  row.sigma_sq = 1e-4;
  row.snr_db = 19.718;
  row.algorithm = "l0";
  row.rule = "ebic:1*pow:0.5";
  row.trials = 40;
  row.failures = 1;
  row.pe_hat = 0.025;
  row.stderr_ = binomial_stderr(0.025, 40);
  row.mean_missed = 0.5;
  r.rows.push_back(row);
  const std::string plain = csv(r);
  EXPECT_EQ(plain.substr(0, plain.find('\n')), "sigma_sq,snr_db,algorithm,rule,pe_hat,trials,failures,stderr");
  EXPECT_NE(plain.find("\n1e-04,19.718,l0,ebic:1*pow:0.5,0.025,40,1,0.0246"), std::string::npos);
  const std::string diag = csv(r, true);
  EXPECT_NE(diag.find("stderr,errors,mean_false_discoveries,mean_missed\n"), std::string::npos);
  EXPECT_NE(diag.find(",0,0,0.5\n"), std::string::npos);
}

TEST(ParallelFor, VisitsEveryIndexOnceAndPropagatesErrors) {
  std::vector<int> seen(1000, 0);
  parallel_for(1000, 4, [&](std::size_t i) { ++seen[i]; });
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 37) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  EXPECT_EQ(resolve_threads(3), 3u);
  EXPECT_GE(resolve_threads(0), 1u);
}
