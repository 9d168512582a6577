#pragma once

#include <string>
#include <vector>

#include "dhsic/estimator.hpp"
#include "dhsic/kernels.hpp"
#include "dhsic/rng.hpp"

namespace dhsic {

enum class ResampleKind { Permutation, Bootstrap };

// One resample: per variable, an index array mapping new row -> source row.
// Permutation arrays are bijections of {0..n-1}; bootstrap arrays draw with
// replacement.
struct ResampleMap {
  ResampleKind kind = ResampleKind::Permutation;
  std::vector<std::vector<int>> rows;  // d arrays of length n
};

struct TestOutcome {
  std::string method;
  double statistic = 0.0;  // n * dHSIC at the observed data
  double p_value = 1.0;
  double crit_value = 0.0;  // +inf when the index overflows B
  bool reject = false;
  double alpha = 0.05;
  int B = 0;
  std::uint64_t seed = 0;
  std::vector<double> resampled_stats;  // n * dHSIC per resample; empty for gamma
  std::vector<double> bandwidths;       // resolved per variable (0 = discrete)
  bool degenerate = false;              // gamma moment degeneracy
  std::string note;
};

ResampleMap draw_resample_map(int n, int d, ResampleKind kind, Stream& stream);

// Coordinate j of output row i is x^j_{map_j(i)}: each variable's column
// block is row-reindexed independently.
Dataset resample_apply(const Dataset& ds, const ResampleMap& map);

// Same reindexing applied to precomputed Gram matrices:
// K'_j[a][b] = K_j[map_j(a)][map_j(b)]. Bit-exact equal to recomputing the
// Gram of resample_apply(ds, map) with frozen bandwidths, without the kernel
// re-evaluation cost.
GramStack resample_apply(const GramStack& grams, const ResampleMap& map);

// Monte Carlo resampling test: one pass draws B maps
// (replicate i uses Stream(seed, i)), evaluates n * dHSIC on each, and fills
// both the conservative p-value p = (1 + #{T_i* >= T}) / (1 + B) (ties count
// via >=) and the critical value: with tmp = #{T_i* == T},
// ind = ceil((B+1)(1-alpha)) + tmp, crit = ind-th smallest resampled
// statistic if ind <= B else +inf. Reject iff p <= alpha, equivalently
// T >= crit. Evaluations run striped over `workers` threads; the outcome is
// byte-identical for any worker count.
TestOutcome mc_pvalue(const Dataset& ds, const std::vector<KernelSpec>& specs,
                      ResampleKind kind, int B, std::uint64_t seed,
                      double alpha = 0.05, int workers = 1);
TestOutcome mc_critval(const Dataset& ds, const std::vector<KernelSpec>& specs,
                       ResampleKind kind, int B, double alpha,
                       std::uint64_t seed, int workers = 1);

// Fills p_value, crit_value and reject from statistic, resampled_stats, B and
// alpha (the tail step shared by every Monte Carlo resampling test).
void finalize_resampling_outcome(TestOutcome& out);

// Empirical resampling distribution over every map: all (n!)^d permutation
// tuples or n^(nd) bootstrap tuples. Throws TooLarge beyond 10000 maps.
struct ExactDistribution {
  std::vector<double> values;  // n * dHSIC per map, sorted ascending
  double cdf(double t) const;       // fraction of maps with value <= t
  double quantile(double q) const;  // inf{t : cdf(t) >= q}
};

ExactDistribution exact_resampling_distribution(const Dataset& ds,
                                                const std::vector<KernelSpec>& specs,
                                                ResampleKind kind);

}  // namespace dhsic
