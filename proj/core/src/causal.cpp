#include "dhsic/causal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace dhsic {

void DagSpec::validate() const {
  if (d < 1) throw GroupSpecError("DAG needs at least one node");
  if (static_cast<int>(parents.size()) != d)
    throw GroupSpecError("DAG needs one parent set per node");
  for (int j = 0; j < d; ++j)
    for (int p : parents[static_cast<std::size_t>(j)]) {
      if (p < 0 || p >= d) throw GroupSpecError("parent index outside node range");
      if (p == j) throw GroupSpecError("self-loop in DAG");
    }
  topological_order();  // throws on cycles
}

std::vector<int> DagSpec::topological_order() const {
  std::vector<int> indegree(static_cast<std::size_t>(d), 0);
  for (int j = 0; j < d; ++j)
    indegree[static_cast<std::size_t>(j)] =
        static_cast<int>(parents[static_cast<std::size_t>(j)].size());
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(d));
  std::vector<bool> placed(static_cast<std::size_t>(d), false);
  for (int step = 0; step < d; ++step) {
    int next = -1;
    for (int j = 0; j < d; ++j)
      if (!placed[static_cast<std::size_t>(j)] && indegree[static_cast<std::size_t>(j)] == 0) {
        next = j;
        break;
      }
    if (next < 0) throw GroupSpecError("graph has a cycle");
    placed[static_cast<std::size_t>(next)] = true;
    order.push_back(next);
    for (int j = 0; j < d; ++j) {
      if (placed[static_cast<std::size_t>(j)]) continue;
      for (int p : parents[static_cast<std::size_t>(j)])
        if (p == next) --indegree[static_cast<std::size_t>(j)];
    }
  }
  return order;
}

int DagSpec::edge_count() const {
  int e = 0;
  for (const auto& ps : parents) e += static_cast<int>(ps.size());
  return e;
}

Eigen::VectorXd KernelRidgeFit::predict(const Eigen::MatrixXd& inputs) const {
  if (mean_only)
    return Eigen::VectorXd::Constant(inputs.rows(), mean);
  if (inputs.cols() != train_inputs.cols())
    throw DimensionMismatch("prediction inputs have wrong width");
  const Eigen::Index m = inputs.rows();
  const Eigen::Index n = train_inputs.rows();
  const double inv = 1.0 / (2.0 * sigma * sigma);
  Eigen::VectorXd out(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    double acc = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) {
      const double sq = (inputs.row(a) - train_inputs.row(b)).squaredNorm();
      acc += std::exp(-sq * inv) * weights(b);
    }
    out(a) = acc;
  }
  return out;
}

KernelRidgeFit fit_kernel_ridge(const Eigen::MatrixXd& inputs,
                                const Eigen::VectorXd& targets,
                                const RidgeConfig& cfg) {
  const Eigen::Index n = targets.size();
  KernelRidgeFit fit;
  if (inputs.cols() == 0) {
    fit.mean_only = true;
    fit.mean = (n > 0) ? targets.mean() : 0.0;
    return fit;
  }
  if (inputs.rows() != n)
    throw DimensionMismatch("inputs and targets disagree on n");
  if (!inputs.allFinite() || !targets.allFinite())
    throw SingularSystem("non-finite values in regression data");
  if (cfg.lambda_grid.empty()) throw SingularSystem("empty ridge grid");

  fit.train_inputs = inputs;
  fit.sigma = median_bandwidth(inputs);
  const KernelSpec spec = KernelSpec::gaussian(fit.sigma);
  const Eigen::MatrixXd K = gram(inputs, spec);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  if (eig.info() != Eigen::Success)
    throw SingularSystem("Gram eigendecomposition failed");
  const Eigen::MatrixXd& Q = eig.eigenvectors();
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const Eigen::VectorXd Qty = Q.transpose() * targets;
  const Eigen::MatrixXd Q2 = Q.array().square();  // Q2(i,k) = Q(i,k)^2

  double best_mse = std::numeric_limits<double>::infinity();
  double best_lambda = 0.0;
  for (double base : cfg.lambda_grid) {
    const double ridge = base * static_cast<double>(n);
    // hat matrix H = Q diag(lam/(lam+ridge)) Q^T; exact LOO residual
    // e_i = (y_i - yhat_i) / (1 - H_ii)
    Eigen::VectorXd shrink(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double lk = std::max(lam(k), 0.0);
      shrink(k) = lk / (lk + ridge);
    }
    const Eigen::VectorXd yhat = Q * shrink.cwiseProduct(Qty).eval();
    const Eigen::VectorXd hdiag = Q2 * shrink;
    double mse = 0.0;
    bool ok = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double denom = 1.0 - hdiag(i);
      if (!(denom > 1e-12) || !std::isfinite(yhat(i))) {
        ok = false;
        break;
      }
      const double e = (targets(i) - yhat(i)) / denom;
      mse += e * e;
    }
    if (ok && mse < best_mse) {
      best_mse = mse;
      best_lambda = ridge;
    }
  }
  if (!std::isfinite(best_mse))
    throw SingularSystem("regularized Gram solve failed at every grid lambda");

  fit.lambda = best_lambda;
  fit.loo_mse = best_mse / static_cast<double>(n);
  Eigen::VectorXd scale(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lk = std::max(lam(k), 0.0);
    scale(k) = 1.0 / (lk + best_lambda);
  }
  fit.weights = Q * scale.cwiseProduct(Qty).eval();
  return fit;
}

Eigen::VectorXd regress_node(const Dataset& ds, int node,
                             const std::vector<int>& parents,
                             const RidgeConfig& cfg) {
  if (node < 0 || node >= ds.p()) throw IndexOutOfRange("node column out of range");
  for (int p : parents)
    if (p < 0 || p >= ds.p()) throw IndexOutOfRange("parent column out of range");

  const Eigen::VectorXd y = ds.values.col(node);
  Eigen::MatrixXd X(ds.n(), static_cast<Eigen::Index>(parents.size()));
  for (std::size_t c = 0; c < parents.size(); ++c)
    X.col(static_cast<Eigen::Index>(c)) = ds.values.col(parents[c]);
  const KernelRidgeFit fit = fit_kernel_ridge(X, y, cfg);
  return y - fit.predict(X);
}

namespace {

Dataset residual_dataset(const Eigen::MatrixXd& residuals) {
  return make_univariate_dataset(residuals, VarKind::Continuous);
}

}  // namespace

DagReport dag_verify(const Dataset& ds, const DagSpec& dag,
                     const CausalConfig& cfg, bool split) {
  ds.validate();
  dag.validate();
  if (cfg.method != TestMethod::Permutation && cfg.method != TestMethod::Bootstrap &&
      cfg.method != TestMethod::Gamma)
    throw UnsupportedData("residual tests support permutation, bootstrap or gamma");
  const int d = ds.d();
  if (dag.d != d) throw DimensionMismatch("DAG node count must match dataset d");
  for (std::size_t j = 0; j < ds.groups.size(); ++j) {
    if (ds.groups[j].size() != 1 || ds.kinds[j] != VarKind::Continuous)
      throw UnsupportedData("DAG verification needs univariate continuous variables");
  }
  const int n = ds.n();
  const int n_fit = split ? n / 2 : n;
  const int n_res = split ? n - n_fit : n;
  if (split && (n_fit < 4 || n_res < 4))
    throw SampleTooSmall("sample splitting needs at least 4 rows per half");

  // Node j occupies the single column of group j.
  auto col_of = [&](int j) { return ds.groups[static_cast<std::size_t>(j)][0]; };

  Eigen::MatrixXd residuals(n_res, d);
  std::vector<double> variances(static_cast<std::size_t>(d), 0.0);
  for (int j = 0; j < d; ++j) {
    const auto& ps = dag.parents[static_cast<std::size_t>(j)];
    Eigen::MatrixXd X_fit(n_fit, static_cast<Eigen::Index>(ps.size()));
    Eigen::MatrixXd X_res(n_res, static_cast<Eigen::Index>(ps.size()));
    for (std::size_t c = 0; c < ps.size(); ++c) {
      const Eigen::VectorXd col = ds.values.col(col_of(ps[c]));
      X_fit.col(static_cast<Eigen::Index>(c)) = col.head(n_fit);
      X_res.col(static_cast<Eigen::Index>(c)) = col.tail(n_res);
    }
    const Eigen::VectorXd y = ds.values.col(col_of(j));
    const KernelRidgeFit fit = fit_kernel_ridge(X_fit, y.head(n_fit), cfg.ridge);
    const Eigen::VectorXd r = y.tail(n_res) - fit.predict(X_res);
    residuals.col(j) = r;
    const double mean = r.mean();
    variances[static_cast<std::size_t>(j)] =
        (r.array() - mean).square().sum() / static_cast<double>(n_res);
  }

  MethodConfig mc;
  mc.method = cfg.method;
  mc.alpha = cfg.alpha;
  mc.B = cfg.B;
  mc.seed = cfg.seed;
  mc.workers = cfg.workers;
  const Dataset rds = residual_dataset(residuals);
  const TestOutcome outcome =
      run_test_method(rds, default_specs(rds), mc);

  DagReport report;
  report.dag = dag;
  report.p_value = outcome.p_value;
  report.residual_variance = std::move(variances);
  report.outcome = outcome;
  report.split = split;
  report.ranking_only = !split;
  return report;
}

std::vector<DagReport> dag_rank(const Dataset& ds, const std::vector<DagSpec>& dags,
                                const CausalConfig& cfg, bool split) {
  if (dags.empty()) throw GroupSpecError("candidate DAG list is empty");
  std::vector<DagReport> reports;
  reports.reserve(dags.size());
  for (std::size_t i = 0; i < dags.size(); ++i) {
    DagReport r = dag_verify(ds, dags[i], cfg, split);
    r.index = static_cast<int>(i);
    reports.push_back(std::move(r));
  }
  std::stable_sort(reports.begin(), reports.end(),
                   [](const DagReport& a, const DagReport& b) {
                     if (a.p_value != b.p_value) return a.p_value > b.p_value;
                     return a.index < b.index;
                   });
  return reports;
}

std::vector<DagSpec> enumerate_dags(int d) {
  if (d < 1) throw GroupSpecError("need at least one node");
  if (d > 4) throw TooLarge("full DAG enumeration is capped at d = 4");
  // All off-diagonal adjacency patterns, filtered to acyclic ones.
  std::vector<std::pair<int, int>> slots;  // (parent, child)
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (a != b) slots.emplace_back(a, b);

  std::vector<DagSpec> dags;
  const std::size_t total = 1ULL << slots.size();
  for (std::size_t mask = 0; mask < total; ++mask) {
    DagSpec dag;
    dag.d = d;
    dag.parents.assign(static_cast<std::size_t>(d), {});
    for (std::size_t s = 0; s < slots.size(); ++s)
      if (mask & (1ULL << s))
        dag.parents[static_cast<std::size_t>(slots[s].second)].push_back(slots[s].first);
    try {
      dag.topological_order();
    } catch (const GroupSpecError&) {
      continue;
    }
    dags.push_back(std::move(dag));
  }
  return dags;
}

std::vector<DagSpec> parse_dag_text(const std::string& text, int d) {
  if (d < 1) throw GroupSpecError("need at least one node");
  std::vector<DagSpec> dags;
  std::istringstream in(text);
  std::string line;
  bool in_section = false;
  DagSpec current;
  int lineno = 0;

  auto flush = [&]() {
    if (!in_section) return;
    for (auto& ps : current.parents) {
      std::sort(ps.begin(), ps.end());
      ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    }
    current.validate();
    dags.push_back(current);
    in_section = false;
  };

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    std::string body = (hash == std::string::npos) ? line : line.substr(0, hash);
    const bool has_comment = hash != std::string::npos;
    std::istringstream ls(body);
    std::string tok_a, tok_b, extra;
    const bool has_tokens = static_cast<bool>(ls >> tok_a);

    if (!has_tokens && !has_comment) {  // true blank line: section boundary
      flush();
      continue;
    }
    if (!in_section) {
      in_section = true;
      current = DagSpec{};
      current.d = d;
      current.parents.assign(static_cast<std::size_t>(d), {});
    }
    if (!has_tokens) continue;  // comment-only line keeps the section open

    if (!(ls >> tok_b) || (ls >> extra))
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected 'parent child'");
    int parent = 0, child = 0;
    try {
      std::size_t pos_a = 0, pos_b = 0;
      parent = std::stoi(tok_a, &pos_a);
      child = std::stoi(tok_b, &pos_b);
      if (pos_a != tok_a.size() || pos_b != tok_b.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(lineno) + ": node indices must be integers");
    }
    if (parent < 1 || parent > d || child < 1 || child > d)
      throw IndexOutOfRange("line " + std::to_string(lineno) +
                            ": node index outside 1.." + std::to_string(d));
    current.parents[static_cast<std::size_t>(child - 1)].push_back(parent - 1);
  }
  flush();
  return dags;
}

std::vector<DagSpec> parse_dag_file(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open DAG file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dag_text(buf.str(), d);
}

}  // namespace dhsic
