#include "dhsic/estimator.hpp"

#include <cmath>

namespace dhsic {

DhsicValue dhsic_statistic(const GramStack& grams) {
  const int n = grams.n;
  const int d = grams.d;
  if (d < 2) throw DimensionMismatch("dhsic_statistic needs d >= 2");
  for (const auto& K : grams.matrices) {
    if (K.rows() != n || K.cols() != n)
      throw DimensionMismatch("Gram matrices must all be n x n");
  }
  DhsicValue out;
  out.n = n;
  if (n < 2 * d) return out;

  const double nd = static_cast<double>(n);
  double term1 = 0.0;
  double term2 = 1.0;
  double term3 = 0.0;

  // Grams are bitwise symmetric, so K(b, a) reads the same value as K(a, b)
  // while walking the column-major storage contiguously. The summation order
  // itself stays fixed.
  std::vector<Eigen::VectorXd> rowsums;
  rowsums.reserve(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const auto& K = grams.matrices[static_cast<std::size_t>(j)];
    double total = 0.0;
    Eigen::VectorXd rs(n);
    for (int a = 0; a < n; ++a) {
      double r = 0.0;
      for (int b = 0; b < n; ++b) r += K(b, a);
      rs(a) = r;
      total += r;
    }
    rowsums.push_back(std::move(rs));
    term2 *= total / (nd * nd);
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double prod = 1.0;
      for (int j = 0; j < d; ++j) prod *= grams.matrices[static_cast<std::size_t>(j)](b, a);
      term1 += prod;
    }
  }
  for (int a = 0; a < n; ++a) {
    double prod = 2.0 / nd;
    for (int j = 0; j < d; ++j)
      prod *= rowsums[static_cast<std::size_t>(j)](a) / nd;
    term3 += prod;
  }

  double v = term1 / (nd * nd) + term2 - term3;
  if (v < 0.0 && v > -1e-12) v = 0.0;
  out.dhsic = v;
  out.scaled = nd * v;
  return out;
}

double core_h_vstat(const Dataset& ds, const std::vector<KernelSpec>& specs) {
  ds.validate();
  const int n = ds.n();
  const int d = ds.d();
  if (n < 2 * d || n > 8 || d > 3)
    throw TooLarge("core_h_vstat requires 2d <= n <= 8 and d <= 3");

  const GramStack grams = gram_stack(ds, resolve_specs(ds, specs));
  const int q = 2 * d;

  // Odometer over all n^{2d} index maps; per map, the three-term bracket of
  // the core function with the identity position assignment.
  std::vector<int> idx(static_cast<std::size_t>(q), 0);
  double sum = 0.0;
  for (;;) {
    double t1 = 1.0, t2 = 1.0, t3 = 1.0;
    for (int j = 0; j < d; ++j) {
      const auto& K = grams.matrices[static_cast<std::size_t>(j)];
      t1 *= K(idx[0], idx[1]);
      t2 *= K(idx[static_cast<std::size_t>(2 * j)], idx[static_cast<std::size_t>(2 * j + 1)]);
      t3 *= K(idx[0], idx[static_cast<std::size_t>(j + 1)]);
    }
    sum += t1 + t2 - 2.0 * t3;

    int pos = q - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - 1) {
      idx[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
  }
  return sum / std::pow(static_cast<double>(n), q);
}

double hsic2_trace_form(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n || L.rows() != n || L.cols() != n)
    throw DimensionMismatch("hsic2_trace_form needs same-size square matrices");
  const Eigen::MatrixXd H =
      Eigen::MatrixXd::Identity(n, n) -
      Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  return (K * H * L * H).trace() / static_cast<double>(n * n);
}

}  // namespace dhsic
