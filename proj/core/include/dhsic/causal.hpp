#pragma once

#include <string>
#include <vector>

#include "dhsic/baselines.hpp"

namespace dhsic {

struct DagSpec {
  int d = 0;
  std::vector<std::vector<int>> parents;  // 0-based parent sets, one per node

  // Throws GroupSpecError on bad indices, self-loops or cycles.
  void validate() const;
  // Deterministic (smallest index first) topological order.
  std::vector<int> topological_order() const;
  int edge_count() const;
};

// Kernel ridge regression with a Gaussian median-heuristic kernel on the
// inputs. The ridge penalty is picked from {1e-6 .. 1e1} * n by exact
// leave-one-out cross-validation through the eigendecomposition of the Gram.
struct RidgeConfig {
  std::vector<double> lambda_grid = {1e-6, 1e-5, 1e-4, 1e-3,
                                     1e-2, 1e-1, 1.0,  1e1};  // scaled by n
};

struct KernelRidgeFit {
  bool mean_only = false;      // empty input block: predict the training mean
  double mean = 0.0;
  Eigen::MatrixXd train_inputs;
  Eigen::VectorXd weights;     // dual coefficients
  double sigma = 0.0;          // frozen bandwidth
  double lambda = 0.0;         // chosen absolute penalty
  double loo_mse = 0.0;

  Eigen::VectorXd predict(const Eigen::MatrixXd& inputs) const;
};

KernelRidgeFit fit_kernel_ridge(const Eigen::MatrixXd& inputs,
                                const Eigen::VectorXd& targets,
                                const RidgeConfig& cfg = {});

// Residuals of node regressed on its parents over all rows; empty parent set
// yields the centered column.
Eigen::VectorXd regress_node(const Dataset& ds, int node,
                             const std::vector<int>& parents,
                             const RidgeConfig& cfg = {});

struct CausalConfig {
  TestMethod method = TestMethod::Permutation;  // permutation, bootstrap or gamma
  double alpha = 0.05;
  int B = 100;
  std::uint64_t seed = 0;
  int workers = 1;
  RidgeConfig ridge;
};

struct DagReport {
  DagSpec dag;
  int index = 0;  // position in the candidate list
  double p_value = 1.0;
  std::vector<double> residual_variance;  // per node
  TestOutcome outcome;
  bool split = false;
  bool ranking_only = false;  // true when split is off: p-values order DAGs
                              // but carry no level guarantee
};

// Regress every node on its DAG parents and test the residual matrix for
// joint independence. With split on, regressions are fitted on rows
// [0, n/2) and residuals are taken on rows [n/2, n), restoring iid residuals
// for a valid test level; each half must hold at least 4 rows.
DagReport dag_verify(const Dataset& ds, const DagSpec& dag,
                     const CausalConfig& cfg, bool split);

// Reports for every candidate, sorted by descending p-value; ties break by
// candidate index. Every candidate is verified with the same config seed.
std::vector<DagReport> dag_rank(const Dataset& ds, const std::vector<DagSpec>& dags,
                                const CausalConfig& cfg, bool split);

// All DAGs on d labeled nodes (1, 3, 25, 543 for d = 1..4); d <= 4 only.
std::vector<DagSpec> enumerate_dags(int d);

// Edge-list text: one "parent child" pair per line, 1-based; blank lines
// separate DAGs; '#' starts a comment. A section holding only comments is an
// explicit empty DAG.
std::vector<DagSpec> parse_dag_file(const std::string& path, int d);
std::vector<DagSpec> parse_dag_text(const std::string& text, int d);

}  // namespace dhsic
