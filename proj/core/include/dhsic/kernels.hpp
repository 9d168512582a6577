#pragma once

#include <Eigen/Dense>

#include <vector>

#include "dhsic/dataset.hpp"

namespace dhsic {

enum class KernelKind { Gaussian, Discrete };

// Per-variable kernel choice. Gaussian kernels carry either a fixed bandwidth
// sigma > 0 or the median heuristic (median pairwise squared distance equals
// 2 sigma^2), optionally scaled by median_scale at resolution time. The
// discrete kernel k(x, y) = 1{x = y} carries no bandwidth.
struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  bool use_median = true;
  double sigma = 0.0;
  double median_scale = 1.0;

  static KernelSpec gaussian_median(double scale = 1.0) {
    KernelSpec s;
    s.kind = KernelKind::Gaussian;
    s.use_median = true;
    s.median_scale = scale;
    return s;
  }
  static KernelSpec gaussian(double sigma) {
    KernelSpec s;
    s.kind = KernelKind::Gaussian;
    s.use_median = false;
    s.sigma = sigma;
    return s;
  }
  static KernelSpec discrete() {
    KernelSpec s;
    s.kind = KernelKind::Discrete;
    s.use_median = false;
    return s;
  }
};

// The d Gram matrices of one dataset, all n x n and exactly symmetric.
struct GramStack {
  std::vector<Eigen::MatrixXd> matrices;
  int n = 0;
  int d = 0;
};

// Median-heuristic bandwidth of a point set (rows of `points`):
// sigma = sqrt(median{ |x_i - x_j|^2 : i < j } / 2), even counts averaging
// the middle pair. Throws DegenerateSample when the median distance is 0.
double median_bandwidth(const Eigen::MatrixXd& points);

// Gram matrix of one variable block under `spec`. The median heuristic is
// resolved on `block` itself; use resolve_specs to freeze bandwidths first
// when the same kernel must be reused across resampled datasets.
Eigen::MatrixXd gram(const Eigen::MatrixXd& block, const KernelSpec& spec);

// Resolve every median-heuristic spec to a fixed sigma computed from the
// given dataset, leaving fixed and discrete specs untouched.
std::vector<KernelSpec> resolve_specs(const Dataset& ds,
                                      const std::vector<KernelSpec>& specs);

// Default specs for a dataset: Gaussian median heuristic for continuous
// groups, the indicator kernel for discrete ones.
std::vector<KernelSpec> default_specs(const Dataset& ds);

GramStack gram_stack(const Dataset& ds, const std::vector<KernelSpec>& specs);

// Resolved sigma per variable (0 for discrete kernels); used for reporting.
std::vector<double> spec_bandwidths(const std::vector<KernelSpec>& resolved);

}  // namespace dhsic
