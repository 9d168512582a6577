#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dhsic/estimator.hpp"
#include "dhsic/kernels.hpp"
#include "dhsic/rng.hpp"

using namespace dhsic;

namespace {

Dataset random_dataset(int n, int d, std::uint64_t seed) {
  Stream rng(seed);
  Eigen::MatrixXd v(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) v(i, j) = rng.normal();
  return make_univariate_dataset(v);
}

double dhsic_of(const Dataset& ds, const std::vector<KernelSpec>& specs) {
  return dhsic_statistic(gram_stack(ds, specs)).dhsic;
}

// Fully symmetrized core function averaged over all (2d)! argument orders,
// d = 2 only. Used to confirm that summing the unsymmetrized bracket over all
// index maps (what core_h_vstat does) computes the same V-statistic.
double symmetrized_vstat_d2(const Eigen::MatrixXd& K1,
                            const Eigen::MatrixXd& K2) {
  const int n = static_cast<int>(K1.rows());
  std::vector<int> perm = {0, 1, 2, 3};
  double total = 0.0;
  int a[4];
  for (a[0] = 0; a[0] < n; ++a[0])
    for (a[1] = 0; a[1] < n; ++a[1])
      for (a[2] = 0; a[2] < n; ++a[2])
        for (a[3] = 0; a[3] < n; ++a[3]) {
          std::vector<int> p = perm;
          double h = 0.0;
          do {
            const int z1 = a[p[0]], z2 = a[p[1]], z3 = a[p[2]], z4 = a[p[3]];
            h += K1(z1, z2) * K2(z1, z2);
            h += K1(z1, z2) * K2(z3, z4);
            h -= 2.0 * K1(z1, z2) * K2(z1, z3);
          } while (std::next_permutation(p.begin(), p.end()));
          total += h / 24.0;
        }
  return total / std::pow(static_cast<double>(n), 4);
}

}  // namespace

TEST_CASE("identical rows give zero") {
  // All-ones Grams cancel analytically; the fixed accumulation order leaves
  // at most one ulp of residue in the 2/n * (1/3)-type sums.
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(6, 3, 2.0);
  Dataset ds = make_univariate_dataset(v);
  std::vector<KernelSpec> specs(3, KernelSpec::gaussian(1.0));
  const DhsicValue out = dhsic_statistic(gram_stack(ds, specs));
  CHECK(std::abs(out.dhsic) <= 1e-15);
  CHECK(std::abs(out.scaled) <= 1e-14);
  CHECK(out.n == 6);
}

TEST_CASE("undersized samples return zero by definition") {
  for (int d = 2; d <= 4; ++d) {
    Dataset ds = random_dataset(2 * d - 1, d, 31 + d);
    const DhsicValue out = dhsic_statistic(gram_stack(ds, default_specs(ds)));
    CHECK(out.dhsic == 0.0);
    CHECK(out.scaled == 0.0);
  }
}

TEST_CASE("balanced perfectly dependent binary pair hits 1/4") {
  Eigen::MatrixXd v(4, 2);
  v << 0, 0, 1, 1, 0, 0, 1, 1;
  Dataset ds = make_univariate_dataset(v, VarKind::Discrete);
  std::vector<KernelSpec> specs(2, KernelSpec::discrete());
  CHECK(dhsic_of(ds, specs) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("product grid data scores zero for a gaussian kernel") {
  // empirical distribution factorizes exactly, so the estimate vanishes
  Eigen::MatrixXd v(4, 2);
  v << 0, 0, 0, 1, 1, 0, 1, 1;
  Dataset ds = make_univariate_dataset(v);
  std::vector<KernelSpec> specs(2, KernelSpec::gaussian(1.0));
  CHECK(std::abs(dhsic_of(ds, specs)) <= 1e-14);
}

TEST_CASE("matches the brute force core V-statistic") {
  int cases = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    for (int d : {2, 3}) {
      const int n = 2 * d + static_cast<int>(seed % 3);
      Dataset ds = random_dataset(n, d, 1000 * seed + d);
      std::vector<KernelSpec> specs;
      for (int j = 0; j < d; ++j)
        specs.push_back(j % 2 == 0 ? KernelSpec::gaussian(0.7 + 0.2 * j)
                                   : KernelSpec::gaussian_median());
      const double fast = dhsic_of(ds, specs);
      const double slow = core_h_vstat(ds, specs);
      CHECK(std::abs(fast - slow) <= 1e-10);
      ++cases;
    }
  }
  CHECK(cases == 24);
}

TEST_CASE("summing over all maps replaces the permutation average") {
  Dataset ds = random_dataset(4, 2, 99);
  std::vector<KernelSpec> specs = {KernelSpec::gaussian(1.3),
                                   KernelSpec::gaussian(0.6)};
  const GramStack gs = gram_stack(ds, resolve_specs(ds, specs));
  const double sym = symmetrized_vstat_d2(gs.matrices[0], gs.matrices[1]);
  const double fast = core_h_vstat(ds, specs);
  CHECK(std::abs(sym - fast) <= 1e-12);
  CHECK(std::abs(sym - dhsic_of(ds, specs)) <= 1e-12);
}

TEST_CASE("brute force oracle enforces its budget") {
  CHECK_THROWS_AS(core_h_vstat(random_dataset(9, 2, 7), {}), TooLarge);
  CHECK_THROWS_AS(core_h_vstat(random_dataset(8, 4, 7), {}), TooLarge);
  CHECK_THROWS_AS(core_h_vstat(random_dataset(5, 3, 7), {}), TooLarge);
}

TEST_CASE("estimator rejects malformed gram stacks") {
  GramStack gs;
  gs.n = 4;
  gs.d = 1;
  gs.matrices = {Eigen::MatrixXd::Ones(4, 4)};
  CHECK_THROWS_AS(dhsic_statistic(gs), DimensionMismatch);

  GramStack bad;
  bad.n = 4;
  bad.d = 2;
  bad.matrices = {Eigen::MatrixXd::Ones(4, 4), Eigen::MatrixXd::Ones(3, 3)};
  CHECK_THROWS_AS(dhsic_statistic(bad), DimensionMismatch);
}

TEST_CASE("two-variable case reduces to the trace form") {
  for (std::uint64_t seed : {3u, 5u, 8u}) {
    Dataset ds = random_dataset(10, 2, seed);
    const auto specs = resolve_specs(ds, default_specs(ds));
    const GramStack gs = gram_stack(ds, specs);
    const double tr = hsic2_trace_form(gs.matrices[0], gs.matrices[1]);
    CHECK(std::abs(tr - dhsic_statistic(gs).dhsic) <= 1e-10);
  }
}

TEST_CASE("trace form basics") {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(7, 7);
  CHECK(std::abs(hsic2_trace_form(ones, ones)) <= 1e-14);

  Dataset ds = random_dataset(9, 2, 21);
  const GramStack gs = gram_stack(ds, resolve_specs(ds, default_specs(ds)));
  const double a = hsic2_trace_form(gs.matrices[0], gs.matrices[1]);
  const double b = hsic2_trace_form(gs.matrices[1], gs.matrices[0]);
  CHECK(std::abs(a - b) <= 1e-12);
}

TEST_CASE("common row permutation leaves the value essentially unchanged") {
  // mandated row-major accumulation reorders the float sums, so the match is
  // near machine precision rather than bitwise
  for (std::uint64_t seed : {2u, 4u, 6u}) {
    const int n = 15, d = 3;
    Dataset ds = random_dataset(n, d, seed);
    std::vector<KernelSpec> specs(d, KernelSpec::gaussian(1.1));
    const double base = dhsic_of(ds, specs);

    Stream rng(seed + 100);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Dataset permuted = ds;
    for (int i = 0; i < n; ++i) permuted.values.row(i) = ds.values.row(perm[i]);
    CHECK(std::abs(dhsic_of(permuted, specs) - base) <= 1e-14);
  }
}

TEST_CASE("statistic is nonnegative across random draws") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const int d = 2 + static_cast<int>(seed % 3);
    Dataset ds = random_dataset(12, d, 5000 + seed);
    const DhsicValue out = dhsic_statistic(gram_stack(ds, default_specs(ds)));
    CHECK(out.dhsic >= 0.0);
    CHECK(out.scaled == doctest::Approx(12.0 * out.dhsic).epsilon(1e-15));
  }
}

TEST_CASE("perturbation bound for fixed bandwidth gaussian kernels") {
  // |T(x) - T(y)|^2 <= (16 C^{2(d-1)} Lmax^2 / n) sum_i |x_i - y_i|^2 with
  // C = sup k = 1 and L_j = exp(-1/2)/sigma_j the kernel Lipschitz constant
  const int n = 20, d = 3;
  const std::vector<double> sigmas = {0.8, 1.0, 1.5};
  std::vector<KernelSpec> specs;
  for (double s : sigmas) specs.push_back(KernelSpec::gaussian(s));
  double lmax = 0.0;
  for (double s : sigmas) lmax = std::max(lmax, std::exp(-0.5) / s);
  const double bound_const = 16.0 * lmax * lmax;  // C = 1

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Dataset x = random_dataset(n, d, 7000 + seed);
    Stream rng(8000 + seed);
    Dataset y = x;
    const double eps = 0.05 * rng.uniform01();
    double sq_shift = 0.0;
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j < d; ++j) {
        const double delta = eps * rng.normal();
        y.values(i, j) += delta;
        row += delta * delta;
      }
      sq_shift += row;
    }
    const double diff = dhsic_of(x, specs) - dhsic_of(y, specs);
    CHECK(diff * diff <= bound_const * sq_shift / n + 1e-15);
  }
}
