#pragma once

#include <Eigen/Dense>

#include <vector>

#include "dhsic/dataset.hpp"
#include "dhsic/kernels.hpp"

namespace dhsic {

struct DhsicValue {
  double dhsic = 0.0;   // clamped to 0 when within -1e-12 of 0
  double scaled = 0.0;  // n * dhsic
  int n = 0;
};

// The dHSIC V-estimator in O(d n^2):
//   term1/n^2 + term2 - term3
// with term1 the total sum of the entrywise product of all d Gram matrices,
// term2 = prod_j Sum(K^j)/n^2 and term3 = (2/n^{d+1}) sum_i prod_j rowsum_i(K^j).
// Returns 0 exactly when n < 2d. Accumulation is row-major and sequential so
// the result is bit-stable across runs and thread counts.
DhsicValue dhsic_statistic(const GramStack& grams);

// Brute-force V-statistic of the degree-2d core function: sums the three-term
// bracket over all n^{2d} index maps (summing over all maps makes the inner
// (2d)! permutation average redundant; the bracket is evaluated once per map).
// Enforced budget n <= 8, d <= 3 and n >= 2d; throws TooLarge otherwise.
// This is the independent oracle for dhsic_statistic.
double core_h_vstat(const Dataset& ds, const std::vector<KernelSpec>& specs);

// Classical biased two-variable HSIC, (1/n^2) trace(K H L H) with the
// centering matrix H = I - (1/n) 1 1^T. Cross-check for the d = 2 reduction.
double hsic2_trace_form(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L);

}  // namespace dhsic
