// dhsic: joint independence testing from the command line.
//
// Subcommands: test (one hypothesis test on a CSV), simulate (rejection-rate
// experiments), causal (DAG verification / ranking), plotdata (JSONL -> TSV).
// Exit codes: 0 success, 2 input error, 3 numeric error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dhsic/baselines.hpp"
#include "dhsic/causal.hpp"
#include "dhsic/simlab.hpp"

using nlohmann::ordered_json;

namespace dhsic {

Dataset parse_csv(const std::string& path, const std::string& group_spec);

namespace {

std::string num_str(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return ordered_json(v).dump();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// "1-2;3:d" -> groups {0,1} continuous and {2} discrete (1-based inclusive
// ranges, ':d' marks a discrete variable).
void apply_group_spec(Dataset& ds, const std::string& spec) {
  ds.groups.clear();
  ds.kinds.clear();
  if (trim(spec).empty()) {
    for (int c = 0; c < ds.p(); ++c) {
      ds.groups.push_back({c});
      ds.kinds.push_back(VarKind::Continuous);
    }
    return;
  }
  for (const std::string& raw : split(spec, ';')) {
    std::string part = trim(raw);
    if (part.empty()) throw GroupSpecError("empty group in spec '" + spec + "'");
    VarKind kind = VarKind::Continuous;
    const auto colon = part.find(':');
    if (colon != std::string::npos) {
      const std::string suffix = part.substr(colon + 1);
      if (suffix != "d")
        throw GroupSpecError("unknown group suffix ':" + suffix + "'");
      kind = VarKind::Discrete;
      part = trim(part.substr(0, colon));
    }
    int lo = 0, hi = 0;
    const auto dash = part.find('-');
    try {
      std::size_t pos = 0;
      if (dash == std::string::npos) {
        lo = hi = std::stoi(part, &pos);
        if (pos != part.size()) throw std::invalid_argument("");
      } else {
        std::size_t pos2 = 0;
        const std::string a = trim(part.substr(0, dash));
        const std::string b = trim(part.substr(dash + 1));
        lo = std::stoi(a, &pos);
        hi = std::stoi(b, &pos2);
        if (pos != a.size() || pos2 != b.size()) throw std::invalid_argument("");
      }
    } catch (const std::exception&) {
      throw GroupSpecError("cannot parse group '" + raw + "'");
    }
    if (lo < 1 || hi > ds.p() || lo > hi)
      throw GroupSpecError("group '" + raw + "' outside columns 1.." +
                           std::to_string(ds.p()));
    std::vector<int> cols;
    for (int c = lo; c <= hi; ++c) cols.push_back(c - 1);
    ds.groups.push_back(std::move(cols));
    ds.kinds.push_back(kind);
  }
  ds.validate();
}

}  // namespace

Dataset parse_csv(const std::string& path, const std::string& group_spec) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open input file: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  std::size_t width = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (!header_seen) {  // first row is the header
      header_seen = true;
      width = cells.size();
      continue;
    }
    if (cells.size() != width)
      throw ParseError("row " + std::to_string(lineno) + ": expected " +
                       std::to_string(width) + " columns, got " +
                       std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(lineno) + " col " +
                         std::to_string(c + 1) + ": not a number: '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError("empty input file: " + path);
  if (rows.empty()) throw ParseError("no data rows in: " + path);

  Dataset ds;
  ds.values.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < width; ++c)
      ds.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          rows[i][c];
  apply_group_spec(ds, group_spec);
  return ds;
}

namespace {

struct CommonOpts {
  std::string input;
  std::string groups;
  std::string kernel = "auto";
  std::string bandwidth = "median";
  std::string method = "permutation";
  double alpha = 0.05;
  int B = 100;
  int C = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string format = "json";
};

TestMethod parse_method(const std::string& name) {
  if (name == "permutation") return TestMethod::Permutation;
  if (name == "bootstrap") return TestMethod::Bootstrap;
  if (name == "gamma") return TestMethod::Gamma;
  if (name == "bmr") return TestMethod::Bmr;
  if (name == "pairwise") return TestMethod::Pairwise;
  throw ParseError("unknown method: " + name);
}

std::vector<KernelSpec> build_specs(const Dataset& ds, const std::string& kernel,
                                    const std::string& bandwidth) {
  std::vector<KernelSpec> specs;
  if (kernel == "auto") {
    specs = default_specs(ds);
  } else if (kernel == "gaussian") {
    specs.assign(static_cast<std::size_t>(ds.d()), KernelSpec::gaussian_median());
  } else if (kernel == "discrete") {
    specs.assign(static_cast<std::size_t>(ds.d()), KernelSpec::discrete());
  } else {
    throw ParseError("unknown kernel: " + kernel);
  }
  if (bandwidth != "median") {
    double sigma = 0.0;
    try {
      std::size_t pos = 0;
      sigma = std::stod(bandwidth, &pos);
      if (pos != bandwidth.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ParseError("--bandwidth must be 'median' or a number");
    }
    if (!(sigma > 0.0)) throw ParseError("--bandwidth must be positive");
    for (auto& s : specs)
      if (s.kind == KernelKind::Gaussian) s = KernelSpec::gaussian(sigma);
  }
  return specs;
}

ordered_json outcome_json(const TestOutcome& out, int n, int d) {
  ordered_json j;
  j["method"] = out.method;
  j["n"] = n;
  j["d"] = d;
  j["statistic"] = out.statistic;
  j["p_value"] = out.p_value;
  j["crit_value"] = out.crit_value;  // +inf serializes as null
  j["reject"] = out.reject;
  j["alpha"] = out.alpha;
  j["B"] = out.B;
  j["seed"] = out.seed;
  j["bandwidths"] = out.bandwidths;
  return j;
}

int cmd_test(const CommonOpts& opt) {
  const Dataset ds = parse_csv(opt.input, opt.groups);
  const std::vector<KernelSpec> specs = build_specs(ds, opt.kernel, opt.bandwidth);

  MethodConfig mc;
  mc.method = parse_method(opt.method);
  mc.alpha = opt.alpha;
  mc.B = opt.B;
  mc.C = opt.C;
  mc.seed = opt.seed;
  mc.workers = opt.workers;
  const TestOutcome out = run_test_method(ds, specs, mc);

  if (out.degenerate) {
    std::cerr << "error: DegenerateMoments: " << out.note << "\n";
    return 3;
  }
  if (!out.note.empty()) std::cerr << "note: " << out.note << "\n";

  if (opt.format == "tsv") {
    std::string bw;
    for (std::size_t i = 0; i < out.bandwidths.size(); ++i)
      bw += (i ? ";" : "") + num_str(out.bandwidths[i]);
    std::cout << "method\tn\td\tstatistic\tp_value\tcrit_value\treject\talpha\tB\tseed\tbandwidths\n"
              << out.method << '\t' << ds.n() << '\t' << ds.d() << '\t'
              << num_str(out.statistic) << '\t' << num_str(out.p_value) << '\t'
              << num_str(out.crit_value) << '\t' << (out.reject ? "true" : "false")
              << '\t' << num_str(out.alpha) << '\t' << out.B << '\t' << out.seed
              << '\t' << bw << '\n';
  } else {
    std::cout << outcome_json(out, ds.n(), ds.d()).dump() << "\n";
  }
  return 0;
}

int cmd_simulate(const CommonOpts& opt, const std::string& scenario_name_arg,
                 const std::vector<int>& n_list, int d, int m, double c,
                 double bandwidth_factor) {
  ScenarioConfig cfg;
  cfg.scenario = parse_scenario(scenario_name_arg);
  cfg.d = d;
  cfg.m = m;
  cfg.method = parse_method(opt.method);
  cfg.alpha = opt.alpha;
  cfg.B = opt.B;
  cfg.C = opt.C;
  cfg.seed = opt.seed;
  cfg.c = c;
  cfg.bandwidth_factor = bandwidth_factor;
  cfg.workers = opt.workers;

  const bool tsv = opt.format == "tsv";
  if (tsv)
    std::cout << "scenario\tmethod\tn\td\tm\tB\talpha\treject_rate\tse\tseed\n";
  for (int n : n_list) {
    cfg.n = n;
    const ScenarioResult res = run_scenario(cfg);
    if (tsv) {
      std::cout << scenario_name(cfg.scenario) << '\t' << opt.method << '\t'
                << res.n << '\t' << res.d << '\t' << res.m << '\t' << cfg.B
                << '\t' << num_str(cfg.alpha) << '\t'
                << num_str(res.rejection_rate) << '\t' << num_str(res.se)
                << '\t' << cfg.seed << '\n';
    } else {
      ordered_json j;
      j["scenario"] = scenario_name(cfg.scenario);
      j["method"] = opt.method;
      j["n"] = res.n;
      j["d"] = res.d;
      j["m"] = res.m;
      j["B"] = cfg.B;
      j["alpha"] = cfg.alpha;
      j["reject_rate"] = res.rejection_rate;
      j["se"] = res.se;
      j["seed"] = cfg.seed;
      std::cout << j.dump() << "\n";
    }
  }
  return 0;
}

ordered_json report_json(const DagReport& r, int rank) {
  ordered_json edges = ordered_json::array();
  for (int child = 0; child < r.dag.d; ++child)
    for (int parent : r.dag.parents[static_cast<std::size_t>(child)])
      edges.push_back({parent + 1, child + 1});
  ordered_json j;
  j["rank"] = rank;
  j["dag_index"] = r.index;
  j["p_value"] = r.p_value;
  j["statistic"] = r.outcome.statistic;
  j["edges"] = edges;
  j["residual_variance"] = r.residual_variance;
  j["ranking_only"] = r.ranking_only;
  return j;
}

int cmd_causal(const CommonOpts& opt, const std::string& dags_arg, bool split) {
  const Dataset ds = parse_csv(opt.input, opt.groups);

  std::vector<DagSpec> dags;
  if (dags_arg == "all")
    dags = enumerate_dags(ds.d());
  else
    dags = parse_dag_file(dags_arg, ds.d());
  if (dags.empty()) throw ParseError("no DAGs found in: " + dags_arg);

  CausalConfig cfg;
  cfg.method = parse_method(opt.method);
  cfg.alpha = opt.alpha;
  cfg.B = opt.B;
  cfg.seed = opt.seed;
  cfg.workers = opt.workers;

  if (!split)
    std::cerr << "note: without --split the p-values rank candidate DAGs but "
                 "carry no level guarantee\n";
  const std::vector<DagReport> reports = dag_rank(ds, dags, cfg, split);

  if (opt.format == "tsv") {
    std::cout << "rank\tdag_index\tp_value\tstatistic\tedges\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const DagReport& r = reports[i];
      std::string edges;
      for (int child = 0; child < r.dag.d; ++child)
        for (int parent : r.dag.parents[static_cast<std::size_t>(child)]) {
          if (!edges.empty()) edges += ";";
          edges += std::to_string(parent + 1) + ">" + std::to_string(child + 1);
        }
      std::cout << (i + 1) << '\t' << r.index << '\t' << num_str(r.p_value)
                << '\t' << num_str(r.outcome.statistic) << '\t' << edges << '\n';
    }
  } else {
    ordered_json j;
    j["method"] = method_name(cfg.method);
    j["n"] = ds.n();
    j["d"] = ds.d();
    j["alpha"] = cfg.alpha;
    j["B"] = cfg.B;
    j["seed"] = cfg.seed;
    j["split"] = split;
    j["reports"] = ordered_json::array();
    for (std::size_t i = 0; i < reports.size(); ++i)
      j["reports"].push_back(report_json(reports[i], static_cast<int>(i + 1)));
    std::cout << j.dump() << "\n";
  }
  return 0;
}

int cmd_plotdata(const std::string& input) {
  std::istream* in = &std::cin;
  std::ifstream file;
  if (!input.empty() && input != "-") {
    file.open(input);
    if (!file) throw ParseError("cannot open input file: " + input);
    in = &file;
  }
  std::cout << "scenario\tmethod\tn\trate\tse\n";
  std::string line;
  int lineno = 0;
  while (std::getline(*in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
    for (const char* key : {"scenario", "method", "n", "reject_rate", "se"})
      if (!j.contains(key))
        throw ParseError("line " + std::to_string(lineno) + ": missing field '" +
                         std::string(key) + "'");
    std::cout << j["scenario"].get<std::string>() << '\t'
              << j["method"].get<std::string>() << '\t' << j["n"].get<long long>()
              << '\t' << num_str(j["reject_rate"].get<double>()) << '\t'
              << num_str(j["se"].get<double>()) << '\n';
  }
  return 0;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DegenerateMoments*>(&e) ||
      dynamic_cast<const NonConvergence*>(&e) ||
      dynamic_cast<const SingularSystem*>(&e) ||
      dynamic_cast<const CholeskyFailure*>(&e))
    return 3;
  return 2;
}

}  // namespace
}  // namespace dhsic

int main(int argc, char** argv) {
  using namespace dhsic;

  CLI::App app{"dhsic: kernel-based joint independence testing"};
  app.require_subcommand(1);

  CommonOpts opt;
  std::string scenario_arg;
  std::vector<int> n_list;
  int sim_d = 3;
  int sim_m = 300;
  double sim_c = 1.0;
  double bandwidth_factor = 1.0;
  std::string dags_arg = "all";
  bool split = false;
  std::string plot_input;

  auto add_common = [&](CLI::App* cmd, bool with_data) {
    if (with_data) {
      cmd->add_option("--input", opt.input, "CSV file, first row header")->required();
      cmd->add_option("--groups", opt.groups,
                      "column groups, e.g. '1-2;3:d' (default: each column "
                      "its own continuous variable)");
    }
    cmd->add_option("--alpha", opt.alpha, "test level")->check(CLI::Range(1e-9, 1.0));
    cmd->add_option("--B", opt.B, "resampling replicates");
    cmd->add_option("--seed", opt.seed, "RNG seed");
    cmd->add_option("--workers", opt.workers, "worker threads")
        ->check(CLI::Range(1, 256));
    cmd->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"json", "tsv"}));
  };

  CLI::App* test = app.add_subcommand("test", "run one joint independence test");
  add_common(test, true);
  test->add_option("--kernel", opt.kernel, "kernel family")
      ->check(CLI::IsMember({"gaussian", "discrete", "auto"}));
  test->add_option("--bandwidth", opt.bandwidth, "'median' or a fixed sigma");
  test->add_option("--method", opt.method, "test method")
      ->check(CLI::IsMember({"permutation", "bootstrap", "gamma", "bmr", "pairwise"}));
  test->add_option("--C", opt.C, "BMR evaluation points (default n)");

  CLI::App* sim = app.add_subcommand("simulate", "rejection-rate experiment");
  add_common(sim, false);
  sim->add_option("--scenario", scenario_arg, "sim1..sim6density")->required();
  sim->add_option("--n", n_list, "sample sizes (repeatable)");
  sim->add_option("--d", sim_d, "variable count (sim1, sim5)");
  sim->add_option("--m", sim_m, "replications");
  sim->add_option("--c", sim_c, "sim5 noise scale");
  sim->add_option("--bandwidth-factor", bandwidth_factor,
                  "multiplies the median bandwidth");
  sim->add_option("--method", opt.method, "test method")
      ->check(CLI::IsMember({"permutation", "bootstrap", "gamma", "bmr", "pairwise"}));
  sim->add_option("--C", opt.C, "BMR evaluation points (default n)");

  CLI::App* causal = app.add_subcommand("causal", "verify / rank candidate DAGs");
  add_common(causal, true);
  causal->add_option("--dags", dags_arg, "'all' (d <= 4) or an edge-list file");
  causal->add_option("--method", opt.method, "residual test")
      ->check(CLI::IsMember({"permutation", "bootstrap", "gamma"}));
  causal->add_flag("--split", split, "sample splitting (valid level)");

  CLI::App* plot = app.add_subcommand("plotdata", "JSONL scenario results -> TSV");
  plot->add_option("--input", plot_input, "JSONL file ('-' or empty: stdin)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int r = app.exit(e);
    return r == 0 ? 0 : 2;
  }

  try {
    if (test->parsed()) return cmd_test(opt);
    if (sim->parsed()) {
      if (n_list.empty()) n_list.push_back(100);
      return cmd_simulate(opt, scenario_arg, n_list, sim_d, sim_m, sim_c,
                          bandwidth_factor);
    }
    if (causal->parsed()) return cmd_causal(opt, dags_arg, split);
    if (plot->parsed()) return cmd_plotdata(plot_input);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
