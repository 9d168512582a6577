#include "dhsic/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace dhsic {

ResampleMap draw_resample_map(int n, int d, ResampleKind kind, Stream& stream) {
  ResampleMap map;
  map.kind = kind;
  map.rows.resize(static_cast<std::size_t>(d));
  for (auto& r : map.rows) {
    r.resize(static_cast<std::size_t>(n));
    if (kind == ResampleKind::Permutation) {
      std::iota(r.begin(), r.end(), 0);
      stream.shuffle(r);
    } else {
      for (auto& v : r) v = static_cast<int>(stream.below(static_cast<std::uint64_t>(n)));
    }
  }
  return map;
}

namespace {

void check_map(int n, int d, const ResampleMap& map) {
  if (static_cast<int>(map.rows.size()) != d)
    throw DimensionMismatch("resample map must have one index array per variable");
  for (const auto& r : map.rows) {
    if (static_cast<int>(r.size()) != n)
      throw DimensionMismatch("resample map arrays must have length n");
    for (int v : r)
      if (v < 0 || v >= n) throw IndexOutOfRange("resample map entry outside {0..n-1}");
  }
}

}  // namespace

Dataset resample_apply(const Dataset& ds, const ResampleMap& map) {
  const int n = ds.n();
  const int d = ds.d();
  check_map(n, d, map);
  Dataset out = ds;
  for (int j = 0; j < d; ++j) {
    const auto& cols = ds.groups[static_cast<std::size_t>(j)];
    const auto& rows = map.rows[static_cast<std::size_t>(j)];
    for (int i = 0; i < n; ++i)
      for (int c : cols) out.values(i, c) = ds.values(rows[static_cast<std::size_t>(i)], c);
  }
  return out;
}

GramStack resample_apply(const GramStack& grams, const ResampleMap& map) {
  check_map(grams.n, grams.d, map);
  GramStack out;
  out.n = grams.n;
  out.d = grams.d;
  out.matrices.resize(static_cast<std::size_t>(grams.d));
  for (int j = 0; j < grams.d; ++j) {
    const auto& K = grams.matrices[static_cast<std::size_t>(j)];
    const auto& rows = map.rows[static_cast<std::size_t>(j)];
    Eigen::MatrixXd R(grams.n, grams.n);
    for (int b = 0; b < grams.n; ++b)
      for (int a = 0; a < grams.n; ++a)
        R(a, b) = K(rows[static_cast<std::size_t>(a)], rows[static_cast<std::size_t>(b)]);
    out.matrices[static_cast<std::size_t>(j)] = std::move(R);
  }
  return out;
}

namespace {

TestOutcome mc_engine(const Dataset& ds, const std::vector<KernelSpec>& specs,
                      ResampleKind kind, int B, double alpha, std::uint64_t seed,
                      int workers) {
  if (B < 1) throw Error("B must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must be in (0, 1)");
  const std::vector<KernelSpec> resolved = resolve_specs(ds, specs);
  const GramStack grams = gram_stack(ds, resolved);
  const int n = ds.n();
  const int d = ds.d();

  TestOutcome out;
  out.method = (kind == ResampleKind::Permutation) ? "permutation" : "bootstrap";
  out.alpha = alpha;
  out.B = B;
  out.seed = seed;
  out.bandwidths = spec_bandwidths(resolved);
  out.statistic = dhsic_statistic(grams).scaled;
  out.resampled_stats.assign(static_cast<std::size_t>(B), 0.0);

  const int W = std::max(1, workers);
  auto run_stripe = [&](int w) {
    for (int i = w; i < B; i += W) {
      Stream stream(seed, static_cast<std::uint64_t>(i));
      const ResampleMap map = draw_resample_map(n, d, kind, stream);
      const GramStack rg = resample_apply(grams, map);
      out.resampled_stats[static_cast<std::size_t>(i)] = dhsic_statistic(rg).scaled;
    }
  };
  if (W == 1) {
    run_stripe(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(W));
    for (int w = 0; w < W; ++w) pool.emplace_back(run_stripe, w);
    for (auto& t : pool) t.join();
  }

  finalize_resampling_outcome(out);
  return out;
}

}  // namespace

void finalize_resampling_outcome(TestOutcome& out) {
  const int B = out.B;
  const double T = out.statistic;
  int exceed = 0;
  int ties = 0;
  for (double s : out.resampled_stats) {
    if (s >= T) ++exceed;
    if (s == T) ++ties;
  }
  out.p_value = (1.0 + exceed) / (1.0 + B);

  std::vector<double> sorted = out.resampled_stats;
  std::sort(sorted.begin(), sorted.end());
  const int ind =
      static_cast<int>(std::ceil((B + 1) * (1.0 - out.alpha) - 1e-9)) + ties;
  out.crit_value = (ind <= B) ? sorted[static_cast<std::size_t>(ind - 1)]
                              : std::numeric_limits<double>::infinity();
  out.reject = out.p_value <= out.alpha;
}

TestOutcome mc_pvalue(const Dataset& ds, const std::vector<KernelSpec>& specs,
                      ResampleKind kind, int B, std::uint64_t seed, double alpha,
                      int workers) {
  return mc_engine(ds, specs, kind, B, alpha, seed, workers);
}

TestOutcome mc_critval(const Dataset& ds, const std::vector<KernelSpec>& specs,
                       ResampleKind kind, int B, double alpha, std::uint64_t seed,
                       int workers) {
  return mc_engine(ds, specs, kind, B, alpha, seed, workers);
}

double ExactDistribution::cdf(double t) const {
  const auto it = std::upper_bound(values.begin(), values.end(), t);
  return static_cast<double>(it - values.begin()) /
         static_cast<double>(values.size());
}

double ExactDistribution::quantile(double q) const {
  const auto N = static_cast<double>(values.size());
  auto idx = static_cast<std::ptrdiff_t>(std::ceil(q * N - 1e-9));
  if (idx < 1) idx = 1;
  if (idx > static_cast<std::ptrdiff_t>(values.size()))
    idx = static_cast<std::ptrdiff_t>(values.size());
  return values[static_cast<std::size_t>(idx - 1)];
}

ExactDistribution exact_resampling_distribution(const Dataset& ds,
                                                const std::vector<KernelSpec>& specs,
                                                ResampleKind kind) {
  const std::vector<KernelSpec> resolved = resolve_specs(ds, specs);
  const GramStack grams = gram_stack(ds, resolved);
  const int n = ds.n();
  const int d = ds.d();
  constexpr double kBudget = 10000.0;

  ExactDistribution dist;
  if (kind == ResampleKind::Permutation) {
    double nfact = 1.0;
    for (int k = 2; k <= n; ++k) nfact *= k;
    if (std::pow(nfact, d) > kBudget)
      throw TooLarge("exact permutation distribution needs (n!)^d <= 10000");

    std::vector<std::vector<int>> perms;
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    do {
      perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));

    const auto P = perms.size();
    std::vector<std::size_t> slot(static_cast<std::size_t>(d), 0);
    ResampleMap map;
    map.kind = kind;
    map.rows.resize(static_cast<std::size_t>(d));
    for (;;) {
      for (int j = 0; j < d; ++j)
        map.rows[static_cast<std::size_t>(j)] = perms[slot[static_cast<std::size_t>(j)]];
      dist.values.push_back(dhsic_statistic(resample_apply(grams, map)).scaled);
      int pos = d - 1;
      while (pos >= 0 && slot[static_cast<std::size_t>(pos)] == P - 1) {
        slot[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
      ++slot[static_cast<std::size_t>(pos)];
    }
  } else {
    if (std::pow(static_cast<double>(n), n * d) > kBudget)
      throw TooLarge("exact bootstrap distribution needs n^(nd) <= 10000");
    const int q = n * d;
    std::vector<int> idx(static_cast<std::size_t>(q), 0);
    ResampleMap map;
    map.kind = kind;
    map.rows.assign(static_cast<std::size_t>(d), std::vector<int>(static_cast<std::size_t>(n), 0));
    for (;;) {
      for (int j = 0; j < d; ++j)
        for (int i = 0; i < n; ++i)
          map.rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
              idx[static_cast<std::size_t>(j * n + i)];
      dist.values.push_back(dhsic_statistic(resample_apply(grams, map)).scaled);
      int pos = q - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - 1) {
        idx[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
      ++idx[static_cast<std::size_t>(pos)];
    }
  }
  std::sort(dist.values.begin(), dist.values.end());
  return dist;
}

}  // namespace dhsic
