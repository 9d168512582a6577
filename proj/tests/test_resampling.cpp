#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "dhsic/resampling.hpp"

using namespace dhsic;

namespace {

Dataset random_dataset(int n, int d, std::uint64_t seed) {
  Stream rng(seed);
  Eigen::MatrixXd v(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) v(i, j) = rng.normal();
  return make_univariate_dataset(v);
}

}  // namespace

TEST_CASE("resample_apply reindexes each variable independently") {
  Eigen::MatrixXd v(3, 2);
  v << 1, 10, 2, 20, 3, 30;
  Dataset ds = make_univariate_dataset(v);

  ResampleMap id;
  id.kind = ResampleKind::Permutation;
  id.rows = {{0, 1, 2}, {0, 1, 2}};
  CHECK(resample_apply(ds, id).values == v);

  ResampleMap swap;
  swap.kind = ResampleKind::Permutation;
  swap.rows = {{0, 1, 2}, {1, 0, 2}};
  const Dataset swapped = resample_apply(ds, swap);
  Eigen::MatrixXd expect(3, 2);
  expect << 1, 20, 2, 10, 3, 30;
  CHECK(swapped.values == expect);

  ResampleMap boot;
  boot.kind = ResampleKind::Bootstrap;
  boot.rows = {{1, 1, 1}, {0, 0, 0}};
  const Dataset booted = resample_apply(ds, boot);
  Eigen::MatrixXd expect2(3, 2);
  expect2 << 2, 10, 2, 10, 2, 10;
  CHECK(booted.values == expect2);
}

TEST_CASE("gram reindexing equals recomputation with frozen kernels") {
  Dataset ds = random_dataset(9, 3, 41);
  const auto specs = resolve_specs(ds, default_specs(ds));
  const GramStack base = gram_stack(ds, specs);

  Stream rng(42);
  for (ResampleKind kind : {ResampleKind::Permutation, ResampleKind::Bootstrap}) {
    for (int rep = 0; rep < 5; ++rep) {
      const ResampleMap map = draw_resample_map(ds.n(), ds.d(), kind, rng);
      const GramStack viaGram = resample_apply(base, map);
      const GramStack viaData = gram_stack(resample_apply(ds, map), specs);
      for (int j = 0; j < 3; ++j)
        CHECK((viaGram.matrices[j] - viaData.matrices[j]).cwiseAbs().maxCoeff() ==
              0.0);
    }
  }
}

TEST_CASE("draw_resample_map basic shape") {
  Stream rng(1);
  const ResampleMap one = draw_resample_map(1, 4, ResampleKind::Permutation, rng);
  REQUIRE(one.rows.size() == 4);
  for (const auto& r : one.rows) {
    REQUIRE(r.size() == 1);
    CHECK(r[0] == 0);
  }

  const ResampleMap m = draw_resample_map(6, 2, ResampleKind::Permutation, rng);
  for (const auto& r : m.rows) {
    std::vector<int> sorted = r;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 6; ++i) CHECK(sorted[i] == i);
  }

  const ResampleMap b = draw_resample_map(6, 2, ResampleKind::Bootstrap, rng);
  for (const auto& r : b.rows)
    for (int x : r) {
      CHECK(x >= 0);
      CHECK(x < 6);
    }
}

TEST_CASE("permutations of three items are uniform") {
  Stream rng(77);
  std::map<std::vector<int>, int> counts;
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) {
    const ResampleMap m = draw_resample_map(3, 1, ResampleKind::Permutation, rng);
    counts[m.rows[0]]++;
  }
  REQUIRE(counts.size() == 6);
  for (const auto& [perm, c] : counts)
    CHECK(std::abs(c / static_cast<double>(draws) - 1.0 / 6.0) <= 0.01);
}

TEST_CASE("bootstrap draws are marginally uniform") {
  Stream rng(78);
  const int n = 5, draws = 20000;
  std::vector<int> counts(n, 0);
  for (int i = 0; i < draws; ++i) {
    const ResampleMap m = draw_resample_map(n, 1, ResampleKind::Bootstrap, rng);
    for (int x : m.rows[0]) counts[x]++;
  }
  const double total = static_cast<double>(draws) * n;
  const double p = 1.0 / n;
  const double sd = std::sqrt(p * (1 - p) / total);
  for (int c : counts) CHECK(std::abs(c / total - p) <= 3 * sd + 1e-12);
}

TEST_CASE("p-value matches its published formula") {
  Dataset ds = random_dataset(12, 2, 55);
  const auto specs = default_specs(ds);
  for (ResampleKind kind : {ResampleKind::Permutation, ResampleKind::Bootstrap}) {
    const TestOutcome out = mc_pvalue(ds, specs, kind, 37, 123, 0.05);
    REQUIRE(out.resampled_stats.size() == 37);
    int ge = 0;
    for (double t : out.resampled_stats)
      if (t >= out.statistic) ++ge;
    CHECK(out.p_value == (1.0 + ge) / 38.0);
    CHECK(out.p_value >= 1.0 / 38.0);
    CHECK(out.B == 37);
    CHECK(out.seed == 123);
    CHECK(out.alpha == 0.05);
    REQUIRE(out.bandwidths.size() == 2);
    CHECK(out.bandwidths[0] > 0.0);
  }
}

TEST_CASE("identical rows are never rejected") {
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(8, 2, 1.0);
  Dataset ds = make_univariate_dataset(v, VarKind::Discrete);
  std::vector<KernelSpec> specs(2, KernelSpec::discrete());
  const TestOutcome out =
      mc_pvalue(ds, specs, ResampleKind::Permutation, 50, 7, 0.05);
  CHECK(out.statistic == 0.0);
  CHECK(out.p_value == 1.0);
  CHECK_FALSE(out.reject);
}

TEST_CASE("critical value picks the prescribed order statistic") {
  Dataset ds = random_dataset(10, 2, 60);
  const auto specs = default_specs(ds);

  // B = 9, alpha = 0.5: ind = ceil(10 * 0.5) = 5 (+ties), the 5th smallest
  TestOutcome half = mc_critval(ds, specs, ResampleKind::Permutation, 9, 0.5, 3);
  std::vector<double> sorted = half.resampled_stats;
  std::sort(sorted.begin(), sorted.end());
  int tmp = 0;
  for (double t : half.resampled_stats)
    if (t == half.statistic) ++tmp;
  const int ind = 5 + tmp;
  REQUIRE(ind <= 9);
  CHECK(half.crit_value == sorted[ind - 1]);
  CHECK(half.reject == (half.statistic >= half.crit_value));

  // B = 9, alpha = 0.05: ind = ceil(10 * 0.95) = 10 > B, crit = +inf
  TestOutcome strict =
      mc_critval(ds, specs, ResampleKind::Permutation, 9, 0.05, 3);
  CHECK(std::isinf(strict.crit_value));
  CHECK_FALSE(strict.reject);
  CHECK(strict.p_value >= 0.1);
}

TEST_CASE("p-value and critical value always agree on the decision") {
  Dataset ds = random_dataset(10, 2, 61);
  const auto specs = default_specs(ds);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const TestOutcome p =
        mc_pvalue(ds, specs, ResampleKind::Permutation, 19, seed, 0.1);
    const TestOutcome c =
        mc_critval(ds, specs, ResampleKind::Permutation, 19, 0.1, seed);
    CHECK(p.reject == c.reject);
    CHECK(p.reject == (p.p_value <= 0.1));
    CHECK(c.reject == (c.statistic >= c.crit_value));
    CHECK(p.p_value == c.p_value);
    CHECK(p.crit_value == c.crit_value);
  }
}

TEST_CASE("exact distribution enumerates every map") {
  Dataset ds = random_dataset(4, 2, 70);
  const auto specs = resolve_specs(ds, default_specs(ds));

  const ExactDistribution perm =
      exact_resampling_distribution(ds, specs, ResampleKind::Permutation);
  CHECK(perm.values.size() == 576);  // (4!)^2
  CHECK(std::is_sorted(perm.values.begin(), perm.values.end()));
  CHECK(perm.values.back() > 0.0);
  CHECK(perm.cdf(perm.values.front() - 1.0) == 0.0);
  CHECK(perm.cdf(perm.values.back()) == 1.0);
  CHECK(perm.quantile(1e-9) == perm.values.front());
  CHECK(perm.quantile(1.0) == perm.values.back());
  // a mid quantile must satisfy the generalized inverse property
  const double q = perm.quantile(0.5);
  CHECK(perm.cdf(q) >= 0.5);

  // bootstrap enumeration only fits the budget in the degenerate n < 2d
  // regime, where every map scores zero
  Dataset tiny = random_dataset(2, 2, 170);
  const auto tiny_specs = resolve_specs(tiny, default_specs(tiny));
  const ExactDistribution boot =
      exact_resampling_distribution(tiny, tiny_specs, ResampleKind::Bootstrap);
  CHECK(boot.values.size() == 16);  // 2^(2*2)
  for (double t : boot.values) CHECK(t == 0.0);
}

TEST_CASE("monte carlo distribution converges to the exact one") {
  Dataset ds = random_dataset(4, 2, 71);
  const auto specs = resolve_specs(ds, default_specs(ds));
  const ExactDistribution exact =
      exact_resampling_distribution(ds, specs, ResampleKind::Permutation);

  const TestOutcome mc =
      mc_pvalue(ds, specs, ResampleKind::Permutation, 10000, 5, 0.05);
  std::vector<double> draws = mc.resampled_stats;
  std::sort(draws.begin(), draws.end());
  double sup = 0.0;
  for (double t : exact.values) {
    const double emp =
        (std::upper_bound(draws.begin(), draws.end(), t) - draws.begin()) /
        static_cast<double>(draws.size());
    sup = std::max(sup, std::abs(emp - exact.cdf(t)));
  }
  CHECK(sup <= 0.02);
}

TEST_CASE("permuting the data permutes the exact distribution multiset") {
  Dataset ds = random_dataset(4, 2, 72);
  const auto specs = resolve_specs(ds, default_specs(ds));
  const ExactDistribution base =
      exact_resampling_distribution(ds, specs, ResampleKind::Permutation);

  ResampleMap map;
  map.kind = ResampleKind::Permutation;
  map.rows = {{2, 0, 3, 1}, {0, 1, 2, 3}};
  const Dataset moved = resample_apply(ds, map);
  const ExactDistribution after =
      exact_resampling_distribution(moved, specs, ResampleKind::Permutation);

  REQUIRE(base.values.size() == after.values.size());
  for (std::size_t i = 0; i < base.values.size(); ++i)
    CHECK(std::abs(base.values[i] - after.values[i]) <= 1e-13);
}

TEST_CASE("exact enumeration respects its budget") {
  CHECK_THROWS_AS(exact_resampling_distribution(random_dataset(4, 3, 73),
                                                {KernelSpec::gaussian(1.0),
                                                 KernelSpec::gaussian(1.0),
                                                 KernelSpec::gaussian(1.0)},
                                                ResampleKind::Permutation),
                  TooLarge);  // (4!)^3 = 13824
  CHECK_THROWS_AS(exact_resampling_distribution(random_dataset(4, 2, 74),
                                                {KernelSpec::gaussian(1.0),
                                                 KernelSpec::gaussian(1.0)},
                                                ResampleKind::Bootstrap),
                  TooLarge);  // 4^8 = 65536
}

TEST_CASE("worker count never changes the outcome") {
  Dataset ds = random_dataset(14, 3, 75);
  const auto specs = default_specs(ds);
  const TestOutcome one =
      mc_pvalue(ds, specs, ResampleKind::Bootstrap, 64, 17, 0.05, 1);
  for (int workers : {2, 3, 5, 8}) {
    const TestOutcome many =
        mc_pvalue(ds, specs, ResampleKind::Bootstrap, 64, 17, 0.05, workers);
    CHECK(many.p_value == one.p_value);
    CHECK(many.crit_value == one.crit_value);
    CHECK(many.statistic == one.statistic);
    REQUIRE(many.resampled_stats.size() == one.resampled_stats.size());
    for (std::size_t i = 0; i < one.resampled_stats.size(); ++i)
      CHECK(many.resampled_stats[i] == one.resampled_stats[i]);
  }
}

TEST_CASE("invalid resampling parameters are rejected") {
  Dataset ds = random_dataset(8, 2, 76);
  const auto specs = default_specs(ds);
  CHECK_THROWS_AS(mc_pvalue(ds, specs, ResampleKind::Permutation, 0, 1, 0.05),
                  Error);
  CHECK_THROWS_AS(mc_pvalue(ds, specs, ResampleKind::Permutation, 10, 1, 0.0),
                  Error);
  CHECK_THROWS_AS(mc_pvalue(ds, specs, ResampleKind::Permutation, 10, 1, 1.5),
                  Error);
}

TEST_CASE("finalize recomputes the tail fields consistently") {
  TestOutcome out;
  out.statistic = 2.0;
  out.resampled_stats = {1.0, 2.0, 3.0, 0.5, 2.0};
  out.B = 5;
  out.alpha = 0.5;
  finalize_resampling_outcome(out);
  // >= count is 3 (two ties plus 3.0), p = 4/6
  CHECK(out.p_value == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
  // ind = ceil(6 * 0.5) + 2 ties = 5, the 5th smallest of {0.5,1,2,2,3} = 3
  CHECK(out.crit_value == 3.0);
  CHECK(out.reject == (out.p_value <= out.alpha));
  CHECK_FALSE(out.reject);
}
