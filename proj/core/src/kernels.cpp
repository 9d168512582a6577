#include "dhsic/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace dhsic {

double median_bandwidth(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw DegenerateSample("median heuristic needs at least 2 points");
  std::vector<double> sq;
  sq.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      sq.push_back((points.row(i) - points.row(j)).squaredNorm());
    }
  }
  const std::size_t m = sq.size();
  double median;
  if (m % 2 == 1) {
    auto mid = sq.begin() + static_cast<std::ptrdiff_t>(m / 2);
    std::nth_element(sq.begin(), mid, sq.end());
    median = *mid;
  } else {
    auto hi = sq.begin() + static_cast<std::ptrdiff_t>(m / 2);
    std::nth_element(sq.begin(), hi, sq.end());
    const double upper = *hi;
    const double lower = *std::max_element(sq.begin(), hi);
    median = 0.5 * (lower + upper);
  }
  if (median <= 0.0)
    throw DegenerateSample("median pairwise distance is 0; bandwidth undefined");
  return std::sqrt(median / 2.0);
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& block, const KernelSpec& spec) {
  const Eigen::Index n = block.rows();
  if (n < 1) throw DimensionMismatch("empty block");
  Eigen::MatrixXd K(n, n);
  if (spec.kind == KernelKind::Discrete) {
    for (Eigen::Index i = 0; i < n; ++i) {
      K(i, i) = 1.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double v =
            (block.row(i).array() == block.row(j).array()).all() ? 1.0 : 0.0;
        K(i, j) = v;
        K(j, i) = v;
      }
    }
    return K;
  }
  double sigma = spec.sigma;
  if (spec.use_median) sigma = spec.median_scale * median_bandwidth(block);
  if (!(sigma > 0.0)) throw DegenerateSample("Gaussian bandwidth must be positive");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::exp(-(block.row(i) - block.row(j)).squaredNorm() * inv);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

std::vector<KernelSpec> resolve_specs(const Dataset& ds,
                                      const std::vector<KernelSpec>& specs) {
  if (static_cast<int>(specs.size()) != ds.d())
    throw DimensionMismatch("one kernel spec per variable required");
  std::vector<KernelSpec> out = specs;
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (out[j].kind == KernelKind::Gaussian && out[j].use_median) {
      out[j].sigma =
          out[j].median_scale * median_bandwidth(ds.group_block(static_cast<int>(j)));
      out[j].use_median = false;
    }
  }
  return out;
}

std::vector<KernelSpec> default_specs(const Dataset& ds) {
  std::vector<KernelSpec> specs;
  specs.reserve(ds.kinds.size());
  for (VarKind k : ds.kinds) {
    specs.push_back(k == VarKind::Discrete ? KernelSpec::discrete()
                                           : KernelSpec::gaussian_median());
  }
  return specs;
}

GramStack gram_stack(const Dataset& ds, const std::vector<KernelSpec>& specs) {
  ds.validate();
  if (static_cast<int>(specs.size()) != ds.d())
    throw DimensionMismatch("one kernel spec per variable required");
  GramStack stack;
  stack.n = ds.n();
  stack.d = ds.d();
  stack.matrices.reserve(specs.size());
  for (int j = 0; j < ds.d(); ++j) {
    stack.matrices.push_back(gram(ds.group_block(j), specs[static_cast<std::size_t>(j)]));
  }
  return stack;
}

std::vector<double> spec_bandwidths(const std::vector<KernelSpec>& resolved) {
  std::vector<double> bw;
  bw.reserve(resolved.size());
  for (const auto& s : resolved) {
    bw.push_back(s.kind == KernelKind::Gaussian ? s.sigma : 0.0);
  }
  return bw;
}

}  // namespace dhsic
