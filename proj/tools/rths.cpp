// Command-line front end: map generation, single-space tools and the
// corpus benchmark pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rths/experiment.hpp"
#include "rths/ingest.hpp"

using namespace rths;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRunFailure = 3;

struct ConfigOptions {
  std::string file;
  std::vector<std::string> sets;

  void add(CLI::App* app) {
    app->add_option("-c,--config", file, "key = value config file");
    app->add_option("--set", sets, "override one config key (key=value), repeatable");
  }

  ExperimentConfig load() const {
    ExperimentConfig cfg;
    if (!file.empty()) cfg.load_file(file);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
  }
};

struct SpaceOptions {
  std::string map;
  std::size_t size = 0;
  std::uint64_t subspace_seed = 0;

  void add(CLI::App* app) {
    app->add_option("-m,--map", map, "map spec, e.g. maze:101:101:1:7 or movingai:FILE")->required();
    app->add_option("--size", size, "bounded-BFS sub-space size (0: whole map)");
    app->add_option("--subspace-seed", subspace_seed, "sub-space origin seed");
  }

  SearchSpace load() const {
    auto space = load_map(map);
    if (size == 0 || size >= space.size()) return space;
    return sample_subspace(space, {size, subspace_seed});
  }
};

std::ostream& output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw ParseError("cannot write " + path);
  return file;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

int cmd_gen_maze(int width, int height, int corridor, std::uint64_t seed, const std::string& out) {
  std::ofstream file;
  output(out, file) << emit_movingai(generate_maze(width, height, corridor, seed));
  return kExitOk;
}

int cmd_sample(const SpaceOptions& so, const std::string& out) {
  const auto space = so.load();
  std::ofstream file;
  auto& os = output(out, file);
  os << "state,x,y,degree\n";
  for (StateId s = 0; s < space.size(); ++s) {
    os << s << ',' << format_number(space.coord(s).x) << ',' << format_number(space.coord(s).y)
       << ',' << space.degree(s) << '\n';
  }
  std::cerr << space.size() << " states, " << space.edge_count() << " edges, fingerprint "
            << hex(space.fingerprint()) << '\n';
  return kExitOk;
}

int cmd_profile(const SpaceOptions& so, const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.stability.validate();
  ExperimentRow row;
  row.map = so.map;
  const auto space = so.load();
  row.states = space.size();
  ProfileConfig pc;
  pc.stability = cfg.stability;
  pc.hc_bound = cfg.params.hc_bound;
  pc.lrta = cfg.params.lss();
  row.profile = profile(space, pc, seed);
  std::cout << profiles_csv({row});
  return kExitOk;
}

int cmd_build_db(const SpaceOptions& so, const ExperimentConfig& cfg, Algorithm a,
                 std::uint64_t seed, const std::string& out) {
  if (!uses_database(a)) throw UsageError(std::string(algorithm_name(a)) + " has no database");
  const auto space = so.load();
  Databases dbs;
  const double secs = build_database(space, a, cfg.params, seed, dbs);
  std::ofstream file(out, std::ios::binary);
  if (!file) throw ParseError("cannot write " + out);
  save_database(file, space, a, cfg.params, seed, dbs);
  std::cerr << algorithm_name(a) << " database built in " << format_number(secs) << " s\n";
  if (dbs.hcdps) {
    if (const auto bad = check_hcdps_certificate(space, *dbs.hcdps)) {
      std::cerr << "certificate failed at state " << *bad << '\n';
      return kExitRunFailure;
    }
    std::cerr << dbs.hcdps->region_count() << " regions, certificate ok\n";
  }
  if (dbs.knn) {
    if (const auto bad = check_knn_certificate(space, *dbs.knn)) {
      std::cerr << "certificate failed at record " << *bad << '\n';
      return kExitRunFailure;
    }
    std::cerr << dbs.knn->records.size() << " records, certificate ok\n";
  }
  return kExitOk;
}

struct SolveOptions {
  std::string db;
  std::optional<StateId> start;
  std::optional<StateId> goal;
  std::size_t problems = 10;
  std::uint64_t seed = 1;
  bool print_path = false;
};

int cmd_solve(const SpaceOptions& so, const ExperimentConfig& cfg, Algorithm a,
              const SolveOptions& opt) {
  const auto space = so.load();
  Databases dbs;
  if (uses_database(a)) {
    if (opt.db.empty()) {
      build_database(space, a, cfg.params, opt.seed, dbs);
    } else {
      std::ifstream in(opt.db);
      if (!in) throw ParseError("cannot read " + opt.db);
      if (load_database(in, space, dbs) != a) {
        throw UsageError(opt.db + " does not hold a " + algorithm_name(a) + " database");
      }
    }
  }
  std::vector<GeneratedProblem> problems;
  if (opt.start || opt.goal) {
    if (!opt.start || !opt.goal) throw UsageError("--start and --goal go together");
    const auto p = Problem::make(space, *opt.start, *opt.goal);
    problems.push_back({p, optimal_cost(space, p)});
  } else {
    problems = gen_problems(space, opt.problems, cfg.min_optimal_cost, opt.seed);
  }
  bool failed = false;
  std::cout << "problem,start,goal,optimal_cost,cost,suboptimality,solved,expansions,moves,path_hash"
            << (opt.print_path ? ",path" : "") << '\n';
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const auto& gp = problems[i];
    const auto sol = run_algorithm(space, a, cfg.params, dbs, gp.problem);
    failed = failed || !sol.solved;
    std::cout << i << ',' << gp.problem.start << ',' << gp.problem.goal << ','
              << format_number(gp.optimal_cost) << ',';
    if (sol.solved && gp.optimal_cost > 0 && gp.optimal_cost < kInfinity) {
      std::cout << format_number(sol.cost) << ','
                << format_number(suboptimality(sol.cost, gp.optimal_cost));
    } else {
      std::cout << "NA,NA";
    }
    std::cout << ',' << (sol.solved ? "true" : "false") << ',' << sol.expansions << ','
              << sol.moves() << ',' << hex(path_hash(sol.path));
    if (opt.print_path) {
      std::cout << ',';
      for (std::size_t k = 0; k < sol.path.size(); ++k) std::cout << (k ? ";" : "") << sol.path[k];
    }
    std::cout << '\n';
  }
  return failed ? kExitRunFailure : kExitOk;
}

int cmd_bench(ExperimentConfig cfg) {
  const auto rows = run_experiment(cfg);
  write_outputs(cfg, rows);
  std::size_t failures = 0;
  for (const auto& r : rows) {
    if (!r.has_failure()) continue;
    ++failures;
    std::cerr << r.key.id() << ':';
    if (!r.error.empty()) std::cerr << ' ' << r.error;
    for (const auto& [a, o] : r.outcomes) {
      if (!o.error.empty()) std::cerr << ' ' << algorithm_name(a) << " build failed (" << o.error << ')';
      if (o.unsolved) std::cerr << ' ' << algorithm_name(a) << ' ' << o.unsolved << " unsolved";
    }
    std::cerr << '\n';
  }
  std::cerr << rows.size() << " sub-spaces written to " << cfg.output << '\n';
  return failures == 0 ? kExitOk : kExitRunFailure;
}

std::vector<NamedSeries> load_series(const std::string& dir) {
  const std::filesystem::path d(dir);
  return series_from_csv(read_csv((d / "profiles.csv").string()),
                         read_csv((d / "performance.csv").string()));
}

int cmd_correlate(const std::string& dir, bool text) {
  const auto series = load_series(dir);
  const auto cells = correlation_table(series, series);
  std::cout << (text ? correlation_text_table(cells) : correlations_csv(cells));
  return kExitOk;
}

int cmd_predict(const std::string& dir, const std::vector<std::string>& targets, const CvConfig& cv,
                bool coefficients) {
  const auto series = load_series(dir);
  std::vector<EvalReport> reports;
  for (const auto& t : targets) {
    const auto data = measure_dataset(series, t);
    for (ModelKind k : {ModelKind::ZeroR, ModelKind::Linear}) {
      auto r = cross_validate(data, k, cv);
      r.model = t + ":" + r.model;
      reports.push_back(std::move(r));
    }
    if (coefficients) std::cerr << "# " << t << '\n' << ols_regression(data).dump(data.feature_names);
  }
  std::cout << eval_reports_csv(reports);
  return kExitOk;
}

int cmd_predict_db_size(const ExperimentConfig& cfg, const std::vector<std::size_t>& sizes,
                        const CvConfig& cv, bool coefficients) {
  const auto data = db_size_dataset(cfg, sizes);
  const auto pred = predict_db_size(data, cv);
  std::cout << eval_reports_csv({pred.zero_r, pred.linear});
  if (coefficients) std::cerr << pred.model.dump(data.feature_names);
  return kExitOk;
}

int cmd_replay(const ExperimentConfig& cfg, const std::string& space_id, std::size_t index,
               Algorithm a, const std::string& results) {
  cfg.validate();
  const auto key = parse_space_id(space_id);
  if (key.map >= cfg.corpus.size() || key.sub >= cfg.subspaces_per_map) {
    throw UsageError(space_id + " is outside the configured corpus");
  }
  const auto prepared = prepare_space(cfg, load_map(cfg.corpus[key.map]), key);
  if (index >= prepared.problems.size()) throw UsageError("problem index out of range");
  Databases dbs;
  if (uses_database(a)) {
    build_database(prepared.space, a, cfg.params,
                   derive_seed(space_seeds(cfg.seed, key).database, static_cast<std::uint64_t>(a)),
                   dbs);
  }
  const auto& gp = prepared.problems[index];
  const auto sol = run_algorithm(prepared.space, a, cfg.params, dbs, gp.problem);
  const std::string hash = hex(path_hash(sol.path));
  std::cout << "space " << space_id << "\nproblem " << index << "\nalgorithm " << algorithm_name(a)
            << "\nstart " << gp.problem.start << "\ngoal " << gp.problem.goal << "\noptimal_cost "
            << format_number(gp.optimal_cost) << "\nsolved " << (sol.solved ? "true" : "false")
            << "\ncost " << format_number(sol.cost) << "\nmoves " << sol.moves()
            << "\nexpansions " << sol.expansions << "\npath_hash " << hash << "\npath";
  for (StateId s : sol.path) std::cout << ' ' << s;
  std::cout << '\n';
  if (results.empty()) return kExitOk;

  const auto table = read_csv((std::filesystem::path(results) / "problems.csv").string());
  const auto c_id = table.column("space_id");
  const auto c_problem = table.column("problem");
  const auto c_algo = table.column("algorithm");
  const auto c_hash = table.column("path_hash");
  for (const auto& row : table.rows) {
    if (row[c_id] != space_id || row[c_problem] != std::to_string(index) ||
        row[c_algo] != algorithm_name(a)) {
      continue;
    }
    if (row[c_hash] == hash) {
      std::cout << "match\n";
      return kExitOk;
    }
    std::cout << "mismatch: recorded " << row[c_hash] << '\n';
    return kExitRunFailure;
  }
  throw ParseError("no recorded row for " + space_id + " problem " + std::to_string(index) + " " +
                   algorithm_name(a));
}

Algorithm algorithm_option(const std::string& name) { return parse_algorithm(name); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time heuristic search benchmark and complexity profiler"};
  app.require_subcommand(1);
  std::function<int()> run;

  // gen-maze
  auto* gen = app.add_subcommand("gen-maze", "write a MovingAI-format maze");
  int width = 0, height = 0, corridor = 1;
  std::uint64_t maze_seed = 1;
  std::string gen_out;
  gen->add_option("--width", width, "odd multiple of the corridor width")->required();
  gen->add_option("--height", height, "odd multiple of the corridor width")->required();
  gen->add_option("--corridor", corridor, "corridor width");
  gen->add_option("--seed", maze_seed);
  gen->add_option("-o,--out", gen_out, "output file (default stdout)");
  gen->callback([&] { run = [&] { return cmd_gen_maze(width, height, corridor, maze_seed, gen_out); }; });

  // sample
  auto* sample = app.add_subcommand("sample", "list the states of a sub-space as CSV");
  SpaceOptions sample_space;
  std::string sample_out;
  sample_space.add(sample);
  sample->add_option("-o,--out", sample_out, "output file (default stdout)");
  sample->callback([&] { run = [&] { return cmd_sample(sample_space, sample_out); }; });

  // profile
  auto* prof = app.add_subcommand("profile", "compute the eight complexity measures");
  SpaceOptions prof_space;
  ConfigOptions prof_cfg;
  std::uint64_t prof_seed = 1;
  prof_space.add(prof);
  prof_cfg.add(prof);
  prof->add_option("--seed", prof_seed, "sampling seed");
  prof->callback([&] { run = [&] { return cmd_profile(prof_space, prof_cfg.load(), prof_seed); }; });

  // build-db
  auto* build = app.add_subcommand("build-db", "build and save a subgoal database");
  SpaceOptions build_space;
  ConfigOptions build_cfg;
  std::string build_algo, build_out;
  std::uint64_t build_seed = 1;
  build_space.add(build);
  build_cfg.add(build);
  build->add_option("-a,--algorithm", build_algo, "dlrta, knn or hcdps")->required();
  build->add_option("--seed", build_seed, "database seed");
  build->add_option("-o,--out", build_out, "database file")->required();
  build->callback([&] {
    run = [&] {
      return cmd_build_db(build_space, build_cfg.load(), algorithm_option(build_algo), build_seed,
                          build_out);
    };
  });

  // solve
  auto* solve = app.add_subcommand("solve", "run one algorithm on one space");
  SpaceOptions solve_space;
  ConfigOptions solve_cfg;
  SolveOptions solve_opt;
  std::string solve_algo;
  StateId start = 0, goal = 0;
  solve_space.add(solve);
  solve_cfg.add(solve);
  solve->add_option("-a,--algorithm", solve_algo, "lrta, dlrta, knn, hcdps or tba")->required();
  solve->add_option("--db", solve_opt.db, "database file (built on the fly when absent)");
  auto* start_opt = solve->add_option("--start", start, "start state id");
  auto* goal_opt = solve->add_option("--goal", goal, "goal state id");
  solve->add_option("-n,--problems", solve_opt.problems, "random problems when no start/goal");
  solve->add_option("--seed", solve_opt.seed, "problem and database seed");
  solve->add_flag("--path", solve_opt.print_path, "print the full path");
  solve->callback([&] {
    run = [&] {
      if (start_opt->count()) solve_opt.start = start;
      if (goal_opt->count()) solve_opt.goal = goal;
      return cmd_solve(solve_space, solve_cfg.load(), algorithm_option(solve_algo), solve_opt);
    };
  });

  // bench
  auto* bench = app.add_subcommand("bench", "run the corpus experiment and write CSVs");
  ConfigOptions bench_cfg;
  std::size_t bench_workers = 0;
  std::string bench_out;
  bool no_timing = false;
  bench_cfg.add(bench);
  bench->add_option("-j,--workers", bench_workers, "worker threads");
  bench->add_option("-o,--output", bench_out, "output directory");
  bench->add_flag("--no-timing", no_timing, "write build times as NA (byte-identical reruns)");
  bench->callback([&] {
    run = [&] {
      auto cfg = bench_cfg.load();
      if (bench_workers) cfg.workers = bench_workers;
      if (!bench_out.empty()) cfg.output = bench_out;
      if (no_timing) cfg.timing = false;
      return cmd_bench(cfg);
    };
  });

  // correlate
  auto* corr = app.add_subcommand("correlate", "Spearman table from a bench output directory");
  std::string corr_dir;
  bool corr_text = false;
  corr->add_option("results", corr_dir, "bench output directory")->required();
  corr->add_flag("--text", corr_text, "banded text table instead of CSV");
  corr->callback([&] { run = [&] { return cmd_correlate(corr_dir, corr_text); }; });

  // predict
  auto* pred = app.add_subcommand("predict", "cross-validated ZeroR and linear regression");
  std::string pred_dir;
  std::vector<std::string> pred_targets;
  CvConfig cv;
  bool pred_coef = false, db_size = false;
  ConfigOptions pred_cfg;
  std::vector<std::size_t> sizes(kDbSizeGrid.begin(), kDbSizeGrid.end());
  pred->add_option("-r,--results", pred_dir, "bench output directory");
  pred->add_option("-t,--target", pred_targets, "target series, e.g. lrta_mean (repeatable)");
  pred->add_option("--folds", cv.folds);
  pred->add_option("--bins", cv.bins);
  pred->add_option("--seed", cv.seed, "fold shuffle seed");
  pred->add_flag("--coefficients", pred_coef, "dump fitted coefficients to stderr");
  pred->add_flag("--db-size", db_size, "predict the kNN database size (runs the size grid)");
  pred->add_option("--sizes", sizes, "kNN record counts for --db-size");
  pred_cfg.add(pred);
  pred->callback([&] {
    run = [&] {
      if (db_size) {
        if (cv.bins == 10 && !pred->count("--bins")) cv.bins = sizes.size();
        return cmd_predict_db_size(pred_cfg.load(), sizes, cv, pred_coef);
      }
      if (pred_dir.empty() || pred_targets.empty()) {
        throw UsageError("predict needs --results and at least one --target");
      }
      return cmd_predict(pred_dir, pred_targets, cv, pred_coef);
    };
  });

  // replay
  auto* replay = app.add_subcommand("replay", "re-run one problem of a bench configuration");
  ConfigOptions replay_cfg;
  std::string replay_space, replay_algo, replay_results;
  std::size_t replay_problem = 0;
  replay_cfg.add(replay);
  replay->add_option("-s,--space", replay_space, "space id, e.g. m0-s3")->required();
  replay->add_option("-p,--problem", replay_problem, "problem index")->required();
  replay->add_option("-a,--algorithm", replay_algo)->required();
  replay->add_option("-r,--results", replay_results, "compare against this bench output");
  replay->callback([&] {
    run = [&] {
      return cmd_replay(replay_cfg.load(), replay_space, replay_problem,
                        algorithm_option(replay_algo), replay_results);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    return run();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const BuildError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRunFailure;
  } catch (const std::exception& e) {
    // parse, sampling and degenerate-data errors
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}
