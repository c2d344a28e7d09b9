#include "slblr/cli.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "slblr/bench_data.hpp"
#include "slblr/engine.hpp"
#include "slblr/gap.hpp"
#include "slblr/repair.hpp"
#include "slblr/solvers.hpp"
#include "slblr/trace_io.hpp"
#include "slblr/verify.hpp"

namespace slblr::cli {

namespace {

namespace fs = std::filesystem;

struct ResolvedInstance {
  std::string label;
  bool is_example1 = false;
  GapInstance gap;                        // valid when !is_example1
  SeparableProblem problem;               // relaxation-ready form
  std::optional<Vector> reference;        // known optimal multipliers

  ResolvedInstance() : problem(make_example1().to_separable()) {}
};

ResolvedInstance resolve_instance(const std::string& spec) {
  ResolvedInstance resolved;
  if (spec == "example1") {
    resolved.label = "example1";
    resolved.is_example1 = true;
    resolved.reference = example1_reference_multipliers();
    return resolved;
  }

  std::string file_part = spec;
  int index = 1;
  if (spec.rfind("gap:", 0) == 0) {
    const std::string rest = spec.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) {
      file_part = rest;
    } else {
      file_part = rest.substr(0, colon);
      index = std::stoi(rest.substr(colon + 1));
    }
  }

  fs::path file(file_part);
  if (!fs::exists(file)) {
    const fs::path data_dir = default_data_dir();
    if (known_benchmark(file_part)) {
      file = ensure_benchmark_instance(file_part, data_dir);
    } else if (fs::exists(data_dir / file_part)) {
      file = data_dir / file_part;
    } else if (fs::exists(data_dir / (file_part + ".txt"))) {
      file = data_dir / (file_part + ".txt");
    } else {
      throw ValidationError("cannot resolve instance: " + spec);
    }
  }
  resolved.label = file_part;
  resolved.gap = load_gap_instance(file, index);
  resolved.problem = gap_to_separable(resolved.gap);
  return resolved;
}

struct CommonOptions {
  std::string instance = "example1";
  double gamma = 0.0;  // 0 = 1 / subproblem count
  double zeta = 1.0 / 1.5;
  double q_star = 0.0;
  double s0 = 0.5;
  std::string init = "101";
  int max_iters = 1000;
  double floor = 1e-10;
  std::string mode = "interleaved";
  std::string detector = "linear";
  double nu = 2.0;
  std::string level_form = "inversion";
  int cadence = 0;
  std::uint64_t seed = 0;
  double slr_big_m = 40.0;
  double slr_rate = 0.05;
  double level_path_budget = 60.0;
  double level_delta0 = 100.0;
  int repair_rounds = 6;
  std::int64_t node_cap = 1'000'000;
  std::string out_dir = ".";
  int jobs = 1;
};

void add_common_flags(CLI::App* cmd, CommonOptions* opt) {
  cmd->add_option("instance", opt->instance,
                  "Instance: example1 | gap:<file>:<index> | file or benchmark name");
  cmd->add_option("--gamma", opt->gamma, "Polyak fraction (default 1/subproblems)");
  cmd->add_option("--zeta", opt->zeta, "Level damping factor in (0, 1]");
  cmd->add_option("--qstar", opt->q_star, "Optimal dual value for the polyak policies");
  cmd->add_option("--s0", opt->s0, "Initial stepsize");
  cmd->add_option("--init", opt->init, "Initial multipliers: <value> | rand:<lo>:<hi>");
  cmd->add_option("--max-iters", opt->max_iters, "Iteration budget");
  cmd->add_option("--floor", opt->floor, "Stepsize floor");
  cmd->add_option("--mode", opt->mode, "interleaved | full-pass | incremental");
  cmd->add_option("--detector", opt->detector, "linear | ball | off");
  cmd->add_option("--nu", opt->nu, "Ball acceleration parameter");
  cmd->add_option("--level-form", opt->level_form, "inversion | as-printed (comparison only)");
  cmd->add_option("--cadence", opt->cadence, "Exact dual evaluation every N iterations");
  cmd->add_option("--seed", opt->seed, "Seed for random initialization");
  cmd->add_option("--slr-M", opt->slr_big_m, "Contraction policy M");
  cmd->add_option("--slr-r", opt->slr_rate, "Contraction policy r");
  cmd->add_option("--level-R", opt->level_path_budget, "Subgradient-level path budget R");
  cmd->add_option("--level-delta0", opt->level_delta0, "Subgradient-level initial delta");
  cmd->add_option("--repair-budget", opt->repair_rounds, "Repair eviction rounds");
  cmd->add_option("--node-cap", opt->node_cap, "Residual branch-and-bound node cap");
  cmd->add_option("--out", opt->out_dir, "Output directory");
  cmd->add_option("--jobs", opt->jobs, "Parallel runs for compare/repeat");
  cmd->set_config("--config");
}

PolicyKind parse_policy(const std::string& name) {
  static const std::map<std::string, PolicyKind> names = {
      {"nonsummable", PolicyKind::NonSummable},
      {"polyak", PolicyKind::PolyakKnown},
      {"surrogate-polyak", PolicyKind::SurrogatePolyak},
      {"subgradient-level", PolicyKind::SubgradientLevel},
      {"slr", PolicyKind::SlrContraction},
      {"slblr", PolicyKind::Slblr},
  };
  const auto it = names.find(name);
  if (it == names.end()) throw ValidationError("unknown policy: " + name);
  return it->second;
}

EngineConfig build_config(const CommonOptions& opt, const std::string& policy_name) {
  EngineConfig config;
  if (opt.init.rfind("rand:", 0) == 0) {
    const std::string rest = opt.init.substr(5);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw ValidationError("--init rand needs rand:<lo>:<hi>");
    config.init = UniformRandomInit{std::stod(rest.substr(0, colon)), std::stod(rest.substr(colon + 1))};
  } else {
    config.init = ConstantInit{std::stod(opt.init)};
  }
  config.initial_stepsize = opt.s0;
  config.max_iterations = opt.max_iters;
  config.stepsize_floor = opt.floor;
  config.seed = opt.seed;
  config.exact_eval_cadence = opt.cadence;

  if (opt.mode == "interleaved")
    config.mode = UpdateMode::Interleaved;
  else if (opt.mode == "full-pass")
    config.mode = UpdateMode::FullPass;
  else if (opt.mode == "incremental")
    config.mode = UpdateMode::Incremental;
  else
    throw ValidationError("unknown mode: " + opt.mode);

  config.policy.kind = parse_policy(policy_name);
  config.policy.gamma = opt.gamma;
  config.policy.zeta = opt.zeta;
  config.policy.q_star = opt.q_star;
  config.policy.slr_big_m = opt.slr_big_m;
  config.policy.slr_rate = opt.slr_rate;
  config.policy.level_path_budget = opt.level_path_budget;
  config.policy.level_delta0 = opt.level_delta0;

  if (opt.detector == "linear")
    config.detector.variant = DetectorVariant::Linear;
  else if (opt.detector == "ball")
    config.detector.variant = DetectorVariant::Ball;
  else if (opt.detector == "off")
    config.detector.variant = DetectorVariant::Off;
  else
    throw ValidationError("unknown detector variant: " + opt.detector);
  config.detector.nu = opt.nu;
  if (opt.level_form == "inversion")
    config.detector.level_form = LevelForm::Inversion;
  else if (opt.level_form == "as-printed")
    config.detector.level_form = LevelForm::AsPrinted;
  else
    throw ValidationError("unknown level form: " + opt.level_form);

  // The detector serves the level-based policy; other policies run without
  // it unless a variant was explicitly requested.
  if (config.policy.kind != PolicyKind::Slblr && opt.detector == "linear" &&
      policy_name != "slblr")
    config.detector.variant = DetectorVariant::Off;
  return config;
}

int cmd_solve(const CommonOptions& opt, const std::string& policy_name) {
  const ResolvedInstance inst = resolve_instance(opt.instance);
  EngineConfig config = build_config(opt, policy_name);
  if (inst.is_example1 &&
      (config.policy.kind == PolicyKind::PolyakKnown ||
       config.policy.kind == PolicyKind::SurrogatePolyak) &&
      config.policy.q_star == 0.0)
    config.policy.q_star = example1_grid_optimal_dual();

  const RunTrace trace = run_engine(inst.problem, config);

  RepairReport repair;
  if (inst.is_example1) {
    repair = repair_small_milp(make_example1(), trace.final_composite.assemble(inst.problem));
  } else {
    RepairBudget budget;
    budget.eviction_rounds = opt.repair_rounds;
    budget.node_cap = opt.node_cap;
    repair = repair_gap(inst.gap, trace.final_composite, budget);
  }
  if (repair.feasible && trace.best_exact_dual) {
    repair.lower_bound = trace.best_exact_dual;
    repair.relative_gap = gap_metrics(repair.upper_bound, trace);
  }

  fs::create_directories(opt.out_dir);
  {
    std::ofstream csv(fs::path(opt.out_dir) / "trace.csv", std::ios::binary);
    write_trace_csv(csv, trace, inst.reference);
  }
  {
    std::ofstream json(fs::path(opt.out_dir) / "summary.json", std::ios::binary);
    json << summarize_run(inst.label, policy_name, trace, &repair);
  }

  std::cout << inst.label << ": " << to_string(trace.termination) << " after "
            << (trace.records.empty() ? 0 : trace.records.back().k) << " iterations";
  if (trace.best_exact_dual) std::cout << ", dual bound " << format_double(*trace.best_exact_dual);
  if (repair.feasible) {
    std::cout << ", feasible cost " << format_double(repair.upper_bound);
    if (repair.relative_gap) {
      std::ostringstream gap;
      gap.setf(std::ios::fixed);
      gap.precision(4);
      gap << (*repair.relative_gap * 100.0);
      std::cout << ", gap " << gap.str() << "%";
    }
  } else {
    std::cout << ", repair failed";
  }
  std::cout << "\n";
  return repair.feasible ? 0 : 2;
}

int cmd_compare(const CommonOptions& opt, const std::vector<std::string>& policy_names) {
  if (policy_names.size() < 2) {
    std::cerr << "compare needs at least two policies\n";
    return 1;
  }
  const ResolvedInstance inst = resolve_instance(opt.instance);

  CommonOptions shared = opt;
  if (shared.cadence == 0)
    shared.cadence = static_cast<int>(inst.problem.subproblem_count());

  std::vector<EngineConfig> configs;
  for (const auto& name : policy_names) configs.push_back(build_config(shared, name));

  std::vector<RunTrace> traces(configs.size());
  if (opt.jobs > 1) {
    std::vector<std::future<RunTrace>> futures;
    futures.reserve(configs.size());
    for (const auto& config : configs)
      futures.push_back(std::async(std::launch::async,
                                   [&inst, config]() { return run_engine(inst.problem, config); }));
    for (std::size_t i = 0; i < futures.size(); ++i) traces[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < configs.size(); ++i)
      traces[i] = run_engine(inst.problem, configs[i]);
  }

  // Unique column labels even with repeated policies.
  std::vector<std::string> labels(policy_names.size());
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < policy_names.size(); ++i) {
    const int n = ++seen[policy_names[i]];
    labels[i] = n == 1 ? policy_names[i] : policy_names[i] + "#" + std::to_string(n);
  }

  fs::create_directories(opt.out_dir);
  std::ofstream csv(fs::path(opt.out_dir) / "compare.csv", std::ios::binary);
  csv << "k";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    csv << ',' << labels[i] << "_dual";
    if (policy_names[i] == "slblr") csv << ',' << labels[i] << "_level";
  }
  csv << '\n';

  // Aligned rows at iterations where every run carries an exact dual value.
  std::vector<std::map<int, const IterateRecord*>> exact_at(traces.size());
  int last_common = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (const auto& record : traces[i].records)
      if (record.exact_dual) exact_at[i][record.k] = &record;
    last_common = std::min(last_common, traces[i].records.back().k);
  }
  for (const auto& [k, record] : exact_at[0]) {
    if (k > last_common) break;
    bool everywhere = true;
    for (std::size_t i = 1; i < traces.size(); ++i)
      if (!exact_at[i].count(k)) everywhere = false;
    if (!everywhere) continue;
    csv << k;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const IterateRecord* r = exact_at[i][k];
      csv << ',' << format_double(*r->exact_dual);
      if (policy_names[i] == "slblr") {
        csv << ',';
        if (r->level_in_force) csv << format_double(*r->level_in_force);
      }
    }
    csv << '\n';
  }
  return 0;
}

int cmd_verify(const std::string& suite_name) {
  const auto suite = run_verify_suite(suite_name);
  if (!suite) {
    std::cerr << "unknown suite: " << suite_name << "\nknown suites:";
    for (const auto& name : verify_suite_names()) std::cerr << ' ' << name;
    std::cerr << "\n";
    return 1;
  }
  for (const auto& property : suite->properties)
    std::cout << (property.passed ? "PASS" : "FAIL") << "  " << property.name << "  ("
              << property.detail << ")\n";
  return suite->all_passed() ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Decomposition solver for separable integer programs with "
               "level-based surrogate multiplier coordination"};
  app.require_subcommand(1);

  CommonOptions solve_opt;
  std::string solve_policy = "slblr";
  CLI::App* solve = app.add_subcommand("solve", "Run one policy on one instance");
  add_common_flags(solve, &solve_opt);
  solve->add_option("--policy", solve_policy,
                    "nonsummable | polyak | surrogate-polyak | subgradient-level | slr | slblr");

  CommonOptions compare_opt;
  std::vector<std::string> compare_policies;
  CLI::App* compare = app.add_subcommand("compare", "Run several policies under one initialization");
  add_common_flags(compare, &compare_opt);
  compare->add_option("--policies", compare_policies, "Comma-separated policy list")
      ->delimiter(',');

  std::string suite_name;
  CLI::App* verify = app.add_subcommand("verify", "Run a named property suite");
  verify->add_option("suite", suite_name, "theorem1 | detector-equivalence | level-overestimate | oracle-parity")
      ->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_opt, solve_policy);
    if (compare->parsed()) return cmd_compare(compare_opt, compare_policies);
    if (verify->parsed()) return cmd_verify(suite_name);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace slblr::cli
