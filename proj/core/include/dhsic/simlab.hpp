#pragma once

#include <string>

#include "dhsic/causal.hpp"

namespace dhsic {

enum class Scenario {
  Sim1,          // d iid standard normals (level study)
  Sim2,          // standard normal + Binomial(20, 0.2), mixed kernels
  Sim3,          // 4-node ANM, single edge 1 -> 2, GP functions
  Sim4,          // 4-node ANM on a random full DAG
  Sim5Dense,     // X^j = H^2 + c * eps_j for every j
  Sim5Sparse,    // X^1, X^2 = H^2 + c * eps; X^3..X^d iid N(0,1)
  Sim6Pairwise,  // X^j = H + eps_j, j = 1..4, sd 2 each
  Sim6Sem,       // same generator as Sim4
  Sim6Density,   // pairwise independent, jointly dependent 3-tuple
};

std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);

struct ScenarioConfig {
  Scenario scenario = Scenario::Sim1;
  int n = 100;
  int d = 3;  // honored by Sim1 and Sim5; other scenarios fix their own d
  int m = 300;
  TestMethod method = TestMethod::Permutation;
  double alpha = 0.05;
  int B = 100;
  int C = 0;  // BMR eval points (0 = n)
  std::uint64_t seed = 0;
  double c = 1.0;                 // Sim5 noise scale
  double bandwidth_factor = 1.0;  // scales the median bandwidth of Gaussian kernels
  int workers = 1;
};

struct ScenarioResult {
  double rejection_rate = 0.0;
  int m = 0;
  double se = 0.0;  // binomial standard error sqrt(r(1-r)/m)
  double seconds_per_test = 0.0;
  int n = 0;
  int d = 0;
};

// Effective variable count for the scenario (fixed for all but Sim1/Sim5).
int scenario_dimension(const ScenarioConfig& cfg);

Dataset gen_iid_normals(int n, int d, Stream& rng);
Dataset gen_mixed(int n, Stream& rng);

// Additive noise model along the DAG, nodes in deterministic topological
// order. Roots are N(0, sd^2) with sd ~ U(5 sqrt 2, 10); a child's function
// values are one joint draw from a zero-mean GP (unit-bandwidth Gaussian
// kernel at the realized parent vectors, Cholesky with 1e-8 diagonal jitter,
// escalated to 1e-5 before CholeskyFailure), plus noise with
// sd ~ U(sqrt 2, 2).
Dataset gen_anm_gp(int n, const DagSpec& dag, Stream& rng);

// One joint GP draw at the given points: L z with L the Cholesky factor of
// the unit-bandwidth Gaussian Gram plus escalating jitter (1e-8 up to 1e-5,
// then CholeskyFailure). Used for every ANM child node.
Eigen::VectorXd gp_function_draw(const Eigen::MatrixXd& points, Stream& rng);

// Random topological order; every forward edge present.
DagSpec random_full_dag(int d, Stream& rng);

Dataset gen_confounder(int n, int d, double c, bool dense, Stream& rng);
Dataset gen_pairwise_confounder(int n, Stream& rng);

// |Z| triple with a sign pattern drawn uniformly from
// (+,+,+), (+,-,-), (-,+,-), (-,-,+): marginals standard normal, pairs
// independent, triple dependent.
Dataset gen_pairwise_independent(int n, Stream& rng);

// Replicate i draws its dataset from Stream(seed, 2i) and tests with seed
// derive(seed, 2i+1), so the rate is reproducible for any worker count.
Dataset generate_scenario_data(const ScenarioConfig& cfg, Stream& rng);
ScenarioResult run_scenario(const ScenarioConfig& cfg);

}  // namespace dhsic
