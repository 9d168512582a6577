#include "dhsic/simlab.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

namespace dhsic {

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Sim1: return "sim1";
    case Scenario::Sim2: return "sim2";
    case Scenario::Sim3: return "sim3";
    case Scenario::Sim4: return "sim4";
    case Scenario::Sim5Dense: return "sim5dense";
    case Scenario::Sim5Sparse: return "sim5sparse";
    case Scenario::Sim6Pairwise: return "sim6pairwise";
    case Scenario::Sim6Sem: return "sim6sem";
    case Scenario::Sim6Density: return "sim6density";
  }
  throw Error("unknown scenario");
}

Scenario parse_scenario(const std::string& name) {
  for (Scenario s : {Scenario::Sim1, Scenario::Sim2, Scenario::Sim3, Scenario::Sim4,
                     Scenario::Sim5Dense, Scenario::Sim5Sparse, Scenario::Sim6Pairwise,
                     Scenario::Sim6Sem, Scenario::Sim6Density})
    if (scenario_name(s) == name) return s;
  throw ParseError("unknown scenario: " + name);
}

int scenario_dimension(const ScenarioConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::Sim1: return cfg.d;
    case Scenario::Sim2: return 2;
    case Scenario::Sim3: return 4;
    case Scenario::Sim4: return 4;
    case Scenario::Sim5Dense: return cfg.d;
    case Scenario::Sim5Sparse: return cfg.d;
    case Scenario::Sim6Pairwise: return 4;
    case Scenario::Sim6Sem: return 4;
    case Scenario::Sim6Density: return 3;
  }
  throw Error("unknown scenario");
}

Dataset gen_iid_normals(int n, int d, Stream& rng) {
  Eigen::MatrixXd values(n, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < n; ++i) values(i, j) = rng.normal();
  return make_univariate_dataset(values);
}

Dataset gen_mixed(int n, Stream& rng) {
  Eigen::MatrixXd values(n, 2);
  for (int i = 0; i < n; ++i) values(i, 0) = rng.normal();
  for (int i = 0; i < n; ++i)
    values(i, 1) = static_cast<double>(rng.binomial(20, 0.2));
  Dataset ds = make_univariate_dataset(values);
  ds.kinds[1] = VarKind::Discrete;
  return ds;
}

namespace {

constexpr double kRoot2 = 1.4142135623730951;

}  // namespace

Eigen::VectorXd gp_function_draw(const Eigen::MatrixXd& points, Stream& rng) {
  const Eigen::Index n = points.rows();
  const Eigen::MatrixXd K = gram(points, KernelSpec::gaussian(1.0));
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 1e-8;
  for (; jitter <= 1e-5 * 1.0000001; jitter *= 10.0) {
    llt.compute(K + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) break;
  }
  if (llt.info() != Eigen::Success)
    throw CholeskyFailure("GP Gram not factorizable after jitter escalation");
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  return Eigen::MatrixXd(llt.matrixL()) * z;
}

Dataset gen_anm_gp(int n, const DagSpec& dag, Stream& rng) {
  dag.validate();
  const int d = dag.d;
  Eigen::MatrixXd values(n, d);
  for (int node : dag.topological_order()) {
    const auto& ps = dag.parents[static_cast<std::size_t>(node)];
    if (ps.empty()) {
      const double sd = rng.uniform(5.0 * kRoot2, 10.0);
      for (int i = 0; i < n; ++i) values(i, node) = sd * rng.normal();
    } else {
      const double sd = rng.uniform(kRoot2, 2.0);
      Eigen::MatrixXd block(n, static_cast<Eigen::Index>(ps.size()));
      for (std::size_t c = 0; c < ps.size(); ++c)
        block.col(static_cast<Eigen::Index>(c)) = values.col(ps[c]);
      const Eigen::VectorXd f = gp_function_draw(block, rng);
      for (int i = 0; i < n; ++i) values(i, node) = f(i) + sd * rng.normal();
    }
  }
  return make_univariate_dataset(values);
}

DagSpec random_full_dag(int d, Stream& rng) {
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  DagSpec dag;
  dag.d = d;
  dag.parents.assign(static_cast<std::size_t>(d), {});
  for (int k = 1; k < d; ++k)
    for (int a = 0; a < k; ++a)
      dag.parents[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])].push_back(
          order[static_cast<std::size_t>(a)]);
  return dag;
}

Dataset gen_confounder(int n, int d, double c, bool dense, Stream& rng) {
  if (d < 2) throw GroupSpecError("confounder scenario needs d >= 2");
  Eigen::VectorXd h(n);
  for (int i = 0; i < n; ++i) h(i) = rng.normal();
  Eigen::MatrixXd values(n, d);
  for (int j = 0; j < d; ++j) {
    const bool confounded = dense || j < 2;
    for (int i = 0; i < n; ++i) {
      const double eps = rng.normal();
      values(i, j) = confounded ? h(i) * h(i) + c * eps : eps;
    }
  }
  return make_univariate_dataset(values);
}

Dataset gen_pairwise_confounder(int n, Stream& rng) {
  Eigen::VectorXd h(n);
  for (int i = 0; i < n; ++i) h(i) = 2.0 * rng.normal();
  Eigen::MatrixXd values(n, 4);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < n; ++i) values(i, j) = h(i) + 2.0 * rng.normal();
  return make_univariate_dataset(values);
}

Dataset gen_pairwise_independent(int n, Stream& rng) {
  static constexpr int kSigns[4][3] = {
      {+1, +1, +1}, {+1, -1, -1}, {-1, +1, -1}, {-1, -1, +1}};
  Eigen::MatrixXd values(n, 3);
  for (int i = 0; i < n; ++i) {
    double z[3];
    for (double& v : z) v = std::abs(rng.normal());
    const auto pattern = static_cast<std::size_t>(rng.below(4));
    for (int j = 0; j < 3; ++j) values(i, j) = kSigns[pattern][j] * z[j];
  }
  return make_univariate_dataset(values);
}

Dataset generate_scenario_data(const ScenarioConfig& cfg, Stream& rng) {
  switch (cfg.scenario) {
    case Scenario::Sim1:
      return gen_iid_normals(cfg.n, cfg.d, rng);
    case Scenario::Sim2:
      return gen_mixed(cfg.n, rng);
    case Scenario::Sim3: {
      DagSpec dag;
      dag.d = 4;
      dag.parents = {{}, {0}, {}, {}};
      return gen_anm_gp(cfg.n, dag, rng);
    }
    case Scenario::Sim4:
    case Scenario::Sim6Sem:
      return gen_anm_gp(cfg.n, random_full_dag(4, rng), rng);
    case Scenario::Sim5Dense:
      return gen_confounder(cfg.n, cfg.d, cfg.c, true, rng);
    case Scenario::Sim5Sparse:
      return gen_confounder(cfg.n, cfg.d, cfg.c, false, rng);
    case Scenario::Sim6Pairwise:
      return gen_pairwise_confounder(cfg.n, rng);
    case Scenario::Sim6Density:
      return gen_pairwise_independent(cfg.n, rng);
  }
  throw Error("unknown scenario");
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  if (cfg.m < 1) throw Error("m must be >= 1");
  const auto start = std::chrono::steady_clock::now();

  std::vector<char> rejects(static_cast<std::size_t>(cfg.m), 0);
  const int W = std::max(1, cfg.workers);
  auto run_stripe = [&](int w) {
    for (int i = w; i < cfg.m; i += W) {
      Stream gen(cfg.seed, 2 * static_cast<std::uint64_t>(i));
      const Dataset ds = generate_scenario_data(cfg, gen);

      std::vector<KernelSpec> specs = default_specs(ds);
      for (auto& s : specs)
        if (s.kind == KernelKind::Gaussian) s.median_scale = cfg.bandwidth_factor;

      MethodConfig mc;
      mc.method = cfg.method;
      mc.alpha = cfg.alpha;
      mc.B = cfg.B;
      mc.C = cfg.C;
      mc.seed = derive(cfg.seed, 2 * static_cast<std::uint64_t>(i) + 1);
      mc.workers = 1;
      rejects[static_cast<std::size_t>(i)] =
          run_test_method(ds, specs, mc).reject ? 1 : 0;
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

  int count = 0;
  for (char r : rejects) count += r;
  const double rate = static_cast<double>(count) / cfg.m;
  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();

  ScenarioResult res;
  res.rejection_rate = rate;
  res.m = cfg.m;
  res.se = std::sqrt(rate * (1.0 - rate) / cfg.m);
  res.seconds_per_test = elapsed / cfg.m;
  res.n = cfg.n;
  res.d = scenario_dimension(cfg);
  return res;
}

}  // namespace dhsic
