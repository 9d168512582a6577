#include "dhsic/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace dhsic {

std::string method_name(TestMethod m) {
  switch (m) {
    case TestMethod::Permutation: return "permutation";
    case TestMethod::Bootstrap: return "bootstrap";
    case TestMethod::Gamma: return "gamma";
    case TestMethod::Bmr: return "bmr";
    case TestMethod::Pairwise: return "pairwise";
  }
  throw Error("unknown test method");
}

namespace {

void require_univariate_continuous(const Dataset& ds) {
  for (std::size_t j = 0; j < ds.groups.size(); ++j) {
    if (ds.groups[j].size() != 1)
      throw UnsupportedData("BMR needs one column per variable");
    if (ds.kinds[j] != VarKind::Continuous)
      throw UnsupportedData("BMR needs continuous variables");
  }
}

// Stream id reserved for the eval-point draw so it cannot collide with the
// bootstrap replicate ids 0..B-1.
constexpr std::uint64_t kEvalPointStream = 1ULL << 62;

Eigen::MatrixXd draw_eval_points(const Dataset& ds, int C, std::uint64_t seed) {
  const int n = ds.n();
  const int d = ds.d();
  const double nd = static_cast<double>(n);

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < d; ++j) mu(j) = ds.values.col(j).mean();
  Eigen::MatrixXd centered = ds.values;
  centered.rowwise() -= mu.transpose();
  Eigen::MatrixXd sigma = (centered.transpose() * centered) / nd;

  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    const double scale = std::max(1.0, sigma.trace() / static_cast<double>(d));
    double jitter = 1e-12 * scale;
    while (jitter <= 1e-2 * scale) {
      llt.compute(sigma + jitter * Eigen::MatrixXd::Identity(d, d));
      if (llt.info() == Eigen::Success) break;
      jitter *= 10.0;
    }
    if (llt.info() != Eigen::Success)
      throw CholeskyFailure("MLE covariance is not factorizable");
  }
  const Eigen::MatrixXd L = llt.matrixL();

  Stream stream(seed, kEvalPointStream);
  Eigen::MatrixXd points(C, d);
  Eigen::VectorXd z(d);
  for (int c = 0; c < C; ++c) {
    for (int j = 0; j < d; ++j) z(j) = stream.normal();
    points.row(c) = (mu + L * z).transpose();
  }
  return points;
}

}  // namespace

double bmr_statistic(const Dataset& ds, const Eigen::MatrixXd& eval_points) {
  ds.validate();
  require_univariate_continuous(ds);
  const int n = ds.n();
  const int d = ds.d();
  if (eval_points.cols() != d)
    throw DimensionMismatch("eval points must have one coordinate per variable");

  const double nd = static_cast<double>(n);
  double sup = 0.0;
  for (Eigen::Index c = 0; c < eval_points.rows(); ++c) {
    double prod = 1.0;
    int joint = 0;
    for (int j = 0; j < d; ++j) {
      const double a = eval_points(c, j);
      int cnt = 0;
      for (int i = 0; i < n; ++i)
        if (ds.values(i, j) <= a) ++cnt;
      prod *= cnt / nd;
    }
    for (int i = 0; i < n; ++i) {
      bool all = true;
      for (int j = 0; j < d; ++j)
        if (!(ds.values(i, j) <= eval_points(c, j))) {
          all = false;
          break;
        }
      if (all) ++joint;
    }
    sup = std::max(sup, std::abs(joint / nd - prod));
  }
  return sup;
}

TestOutcome bmr_test(const Dataset& ds, const BmrConfig& cfg) {
  ds.validate();
  require_univariate_continuous(ds);
  if (cfg.B < 1) throw Error("B must be >= 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error("alpha must be in (0, 1)");
  const int n = ds.n();
  const int d = ds.d();
  const int C = (cfg.C > 0) ? cfg.C : n;

  const Eigen::MatrixXd points = draw_eval_points(ds, C, cfg.seed);

  TestOutcome out;
  out.method = "bmr";
  out.alpha = cfg.alpha;
  out.B = cfg.B;
  out.seed = cfg.seed;
  out.statistic = bmr_statistic(ds, points);
  out.resampled_stats.assign(static_cast<std::size_t>(cfg.B), 0.0);

  const int W = std::max(1, cfg.workers);
  auto run_stripe = [&](int w) {
    for (int i = w; i < cfg.B; i += W) {
      Stream stream(cfg.seed, static_cast<std::uint64_t>(i));
      const ResampleMap map = draw_resample_map(n, d, ResampleKind::Bootstrap, stream);
      out.resampled_stats[static_cast<std::size_t>(i)] =
          bmr_statistic(resample_apply(ds, map), points);
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

TestOutcome pairwise_hsic_test(const Dataset& ds, const PairwiseConfig& cfg) {
  ds.validate();
  if (cfg.method != TestMethod::Permutation && cfg.method != TestMethod::Bootstrap &&
      cfg.method != TestMethod::Gamma)
    throw UnsupportedData("pairwise sub-tests support permutation, bootstrap or gamma");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error("alpha must be in (0, 1)");
  const int d = ds.d();
  const double alpha_sub = cfg.alpha / (d - 1);

  TestOutcome best;
  double min_p = 2.0;
  bool any_reject = false;

  for (int i = 0; i <= d - 2; ++i) {
    const int top = d - 1 - i;  // variable tested against everything below it
    std::vector<int> src_cols = ds.groups[static_cast<std::size_t>(top)];
    const int top_width = static_cast<int>(src_cols.size());
    for (int g = 0; g < top; ++g)
      src_cols.insert(src_cols.end(), ds.groups[static_cast<std::size_t>(g)].begin(),
                      ds.groups[static_cast<std::size_t>(g)].end());

    Dataset sub;
    sub.values.resize(ds.n(), static_cast<Eigen::Index>(src_cols.size()));
    for (std::size_t c = 0; c < src_cols.size(); ++c)
      sub.values.col(static_cast<Eigen::Index>(c)) = ds.values.col(src_cols[c]);
    std::vector<int> first(static_cast<std::size_t>(top_width));
    std::vector<int> second(src_cols.size() - static_cast<std::size_t>(top_width));
    std::iota(first.begin(), first.end(), 0);
    std::iota(second.begin(), second.end(), top_width);
    sub.groups = {std::move(first), std::move(second)};
    sub.kinds = {VarKind::Continuous, VarKind::Continuous};

    const std::vector<KernelSpec> specs(2, KernelSpec::gaussian_median());
    const std::uint64_t sub_seed = derive(cfg.seed, static_cast<std::uint64_t>(i));
    TestOutcome sub_out;
    if (cfg.method == TestMethod::Gamma) {
      sub_out = gamma_test(sub, specs, alpha_sub);
    } else {
      const ResampleKind kind = (cfg.method == TestMethod::Permutation)
                                    ? ResampleKind::Permutation
                                    : ResampleKind::Bootstrap;
      sub_out = mc_pvalue(sub, specs, kind, cfg.B, sub_seed, alpha_sub, cfg.workers);
    }
    any_reject = any_reject || sub_out.reject;
    if (sub_out.p_value < min_p) {
      min_p = sub_out.p_value;
      best = sub_out;
    }
  }

  TestOutcome out = best;
  out.method = "pairwise";
  out.alpha = cfg.alpha;
  out.B = (cfg.method == TestMethod::Gamma) ? 0 : cfg.B;
  out.seed = cfg.seed;
  out.p_value = std::min(1.0, (d - 1) * min_p);
  out.reject = any_reject;
  out.note = "Bonferroni over " + std::to_string(d - 1) +
             " sub-tests; statistic, crit_value and bandwidths from the smallest-p sub-test";
  return out;
}

TestOutcome run_test_method(const Dataset& ds, const std::vector<KernelSpec>& specs,
                            const MethodConfig& cfg) {
  switch (cfg.method) {
    case TestMethod::Permutation:
      return mc_pvalue(ds, specs, ResampleKind::Permutation, cfg.B, cfg.seed,
                       cfg.alpha, cfg.workers);
    case TestMethod::Bootstrap:
      return mc_pvalue(ds, specs, ResampleKind::Bootstrap, cfg.B, cfg.seed,
                       cfg.alpha, cfg.workers);
    case TestMethod::Gamma:
      return gamma_test(ds, specs, cfg.alpha);
    case TestMethod::Bmr: {
      BmrConfig bc;
      bc.C = cfg.C;
      bc.alpha = cfg.alpha;
      bc.B = cfg.B;
      bc.seed = cfg.seed;
      bc.workers = cfg.workers;
      return bmr_test(ds, bc);
    }
    case TestMethod::Pairwise: {
      PairwiseConfig pc;
      pc.alpha = cfg.alpha;
      pc.B = cfg.B;
      pc.seed = cfg.seed;
      pc.workers = cfg.workers;
      return pairwise_hsic_test(ds, pc);
    }
  }
  throw Error("unknown test method");
}

}  // namespace dhsic
