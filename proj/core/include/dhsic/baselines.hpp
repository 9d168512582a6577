#pragma once

#include "dhsic/gamma_approx.hpp"
#include "dhsic/resampling.hpp"

namespace dhsic {

enum class TestMethod { Permutation, Bootstrap, Gamma, Bmr, Pairwise };

std::string method_name(TestMethod m);

struct BmrConfig {
  int C = 0;  // evaluation point count; 0 means default C = n
  double alpha = 0.05;
  int B = 100;
  std::uint64_t seed = 0;
  int workers = 1;
};

// Sup over the eval points (rows of a C x d matrix) of
// |empirical joint CDF - product of empirical marginal CDFs|, CDFs with <=.
// Defined for univariate continuous variables only.
double bmr_statistic(const Dataset& ds, const Eigen::MatrixXd& eval_points);

// Bootstrap test of bmr_statistic. Eval points are drawn once, iid from a
// Gaussian with the MLE mean and full 1/n covariance of the original data,
// and frozen across resamples.
TestOutcome bmr_test(const Dataset& ds, const BmrConfig& cfg);

struct PairwiseConfig {
  double alpha = 0.05;
  int B = 100;
  TestMethod method = TestMethod::Permutation;  // permutation, bootstrap or gamma
  std::uint64_t seed = 0;
  int workers = 1;
};

// Bonferroni sequence of d-1 two-group dHSIC tests: variable k against the
// concatenation of variables 1..k-1 for k = d down to 2, Gaussian median
// kernel on both sides, each at level alpha/(d-1). Sub-test i (i = 0 tests
// the top variable) runs with seed derive(seed, i). Rejects if any sub-test
// rejects; reported p-value is min(1, (d-1) * min_i p_i).
TestOutcome pairwise_hsic_test(const Dataset& ds, const PairwiseConfig& cfg);

// Dispatcher over the five test methods, shared by the CLI and the
// simulation harness. C applies to BMR only.
struct MethodConfig {
  TestMethod method = TestMethod::Permutation;
  double alpha = 0.05;
  int B = 100;
  int C = 0;
  std::uint64_t seed = 0;
  int workers = 1;
};

TestOutcome run_test_method(const Dataset& ds, const std::vector<KernelSpec>& specs,
                            const MethodConfig& cfg);

}  // namespace dhsic
