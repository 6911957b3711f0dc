#include "rths/experiment.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "rths/ingest.hpp"
#include "rths/rng.hpp"

namespace rths {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    throw UsageError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  if (used != v.size()) throw UsageError(key + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const auto x = to_uint(key, v);
  if (x > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    throw UsageError(key + ": value too large");
  }
  return static_cast<int>(x);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw UsageError(key + ": expected a number, got '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(x)) {
    throw UsageError(key + ": expected a number, got '" + v + "'");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw UsageError(key + ": expected true or false, got '" + v + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
  if (!out) throw ParseError("write failed for " + path.string());
}

std::string na_or(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

}  // namespace

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Lrta:
      return "lrta";
    case Algorithm::Dlrta:
      return "dlrta";
    case Algorithm::Knn:
      return "knn";
    case Algorithm::Hcdps:
      return "hcdps";
    case Algorithm::Tba:
      return "tba";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : kAllAlgorithms) {
    if (name == algorithm_name(a)) return a;
  }
  throw UsageError("unknown algorithm '" + name + "' (lrta, dlrta, knn, hcdps, tba)");
}

bool uses_database(Algorithm a) {
  return a == Algorithm::Dlrta || a == Algorithm::Knn || a == Algorithm::Hcdps;
}

SearchSpace load_map(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.empty()) throw UsageError("empty map spec");
  const auto& kind = parts[0];
  auto need = [&](std::size_t n) {
    if (parts.size() != n) {
      throw UsageError("map spec '" + spec + "' needs " + std::to_string(n - 1) + " fields");
    }
  };
  if (kind == "open") {
    need(3);
    return generate_open(to_int("width", parts[1]), to_int("height", parts[2])).to_space();
  }
  if (kind == "maze") {
    need(5);
    return generate_maze(to_int("width", parts[1]), to_int("height", parts[2]),
                         to_int("corridor", parts[3]), to_uint("seed", parts[4]))
        .to_space();
  }
  if (kind == "rooms") {
    need(7);
    return generate_rooms(to_int("width", parts[1]), to_int("height", parts[2]),
                          to_int("room", parts[3]), to_int("door", parts[4]),
                          to_double("removed", parts[5]), to_uint("seed", parts[6]))
        .to_space();
  }
  if (kind == "scatter") {
    need(6);
    return generate_scatter(to_int("width", parts[1]), to_int("height", parts[2]),
                            to_double("density", parts[3]), to_int("max_block", parts[4]),
                            to_uint("seed", parts[5]))
        .to_space();
  }
  if (kind == "movingai") {
    need(2);
    return parse_movingai(read_file(parts[1])).to_space();
  }
  if (kind == "dimacs") {
    if (parts.size() == 4 && parts[3] == "scaled") {
      return parse_dimacs(read_file(parts[1]), read_file(parts[2])).to_space(true);
    }
    need(3);
    return parse_dimacs(read_file(parts[1]), read_file(parts[2])).to_space();
  }
  throw UsageError("unknown map kind '" + kind + "'");
}

void ExperimentConfig::apply(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "corpus") {
    for (const auto& s : split(value, ',')) {
      if (!trim(s).empty()) corpus.push_back(trim(s));
    }
  } else if (key == "subspaces_per_map") {
    subspaces_per_map = to_uint(key, value);
  } else if (key == "subspace_size") {
    subspace_size = to_uint(key, value);
  } else if (key == "problems") {
    problems = to_uint(key, value);
  } else if (key == "min_optimal_cost") {
    min_optimal_cost = to_double(key, value);
  } else if (key == "seed") {
    seed = to_uint(key, value);
  } else if (key == "algorithms") {
    algorithms.clear();
    for (const auto& s : split(value, ',')) {
      const Algorithm a = parse_algorithm(trim(s));
      if (std::find(algorithms.begin(), algorithms.end(), a) == algorithms.end()) {
        algorithms.push_back(a);
      }
    }
  } else if (key == "lookahead" || key == "d") {
    params.lookahead = to_int(key, value);
  } else if (key == "levels" || key == "l") {
    params.levels = to_int(key, value);
  } else if (key == "knn_records" || key == "N") {
    params.knn_records = to_uint(key, value);
  } else if (key == "knn_candidates" || key == "M") {
    params.knn_candidates = to_uint(key, value);
  } else if (key == "hcdps_radius" || key == "r") {
    params.hcdps_radius = to_int(key, value);
  } else if (key == "hc_bound" || key == "b") {
    params.hc_bound = to_uint(key, value);
  } else if (key == "tba_expansions" || key == "R") {
    params.tba_expansions = to_uint(key, value);
  } else if (key == "step_cap") {
    params.step_cap = to_uint(key, value);
  } else if (key == "hcdps_max_regions") {
    params.hcdps_max_regions = to_uint(key, value);
  } else if (key == "hcdps_max_entries") {
    params.hcdps_max_entries = to_uint(key, value);
  } else if (key == "min_samples") {
    stability.min_samples = to_uint(key, value);
  } else if (key == "max_samples") {
    stability.max_samples = to_uint(key, value);
  } else if (key == "window") {
    stability.window = to_uint(key, value);
  } else if (key == "tolerance") {
    stability.tolerance = to_double(key, value);
  } else if (key == "workers") {
    workers = to_uint(key, value);
  } else if (key == "timing") {
    timing = to_bool(key, value);
  } else if (key == "profile") {
    profile = to_bool(key, value);
  } else if (key == "output") {
    output = value;
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
}

void ExperimentConfig::load(std::istream& in) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(number) + ": expected key = value");
    }
    apply(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config " + path);
  load(in);
}

void ExperimentConfig::validate() const {
  if (corpus.empty()) throw UsageError("corpus is empty");
  if (subspaces_per_map == 0 || subspace_size < 2 || problems == 0) {
    throw UsageError("sub-space and problem counts must be positive");
  }
  if (algorithms.empty()) throw UsageError("no algorithms selected");
  if (params.lookahead < 1 || params.levels < 1 || params.knn_records == 0 ||
      params.knn_candidates == 0 || params.hcdps_radius < 1 || params.hc_bound == 0 ||
      params.tba_expansions == 0 || params.hcdps_max_regions == 0 ||
      params.hcdps_max_entries == 0) {
    throw UsageError("algorithm parameters must be positive");
  }
  if (workers == 0) throw UsageError("workers must be at least 1");
  if (min_optimal_cost < 0) throw UsageError("min_optimal_cost must be non-negative");
  stability.validate();
}

std::string ExperimentConfig::dump() const {
  std::ostringstream os;
  for (const auto& c : corpus) os << "corpus = " << c << '\n';
  os << "subspaces_per_map = " << subspaces_per_map << '\n'
     << "subspace_size = " << subspace_size << '\n'
     << "problems = " << problems << '\n'
     << "min_optimal_cost = " << format_number(min_optimal_cost) << '\n'
     << "seed = " << seed << '\n'
     << "algorithms = ";
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    os << (i ? "," : "") << algorithm_name(algorithms[i]);
  }
  os << '\n'
     << "lookahead = " << params.lookahead << '\n'
     << "levels = " << params.levels << '\n'
     << "knn_records = " << params.knn_records << '\n'
     << "knn_candidates = " << params.knn_candidates << '\n'
     << "hcdps_radius = " << params.hcdps_radius << '\n'
     << "hc_bound = " << params.hc_bound << '\n'
     << "tba_expansions = " << params.tba_expansions << '\n'
     << "step_cap = " << params.step_cap << '\n'
     << "hcdps_max_regions = " << params.hcdps_max_regions << '\n'
     << "hcdps_max_entries = " << params.hcdps_max_entries << '\n'
     << "min_samples = " << stability.min_samples << '\n'
     << "max_samples = " << stability.max_samples << '\n'
     << "window = " << stability.window << '\n'
     << "tolerance = " << format_number(stability.tolerance) << '\n'
     << "timing = " << (timing ? "true" : "false") << '\n'
     << "profile = " << (profile ? "true" : "false") << '\n';
  return os.str();
}

double optimal_cost(const SearchSpace& space, const Problem& problem) {
  if (space.heuristic_kind() == HeuristicKind::kOctile) {
    const auto sol = astar(space, problem).first;
    return sol.solved ? sol.cost : kInfinity;
  }
  return dijkstra_from(space, problem.goal)[problem.start];
}

std::vector<GeneratedProblem> gen_problems(const SearchSpace& space, std::size_t count,
                                           double min_optimal_cost, std::uint64_t seed) {
  const auto comp = components(space);
  Rng rng(seed);
  std::vector<GeneratedProblem> out;
  out.reserve(count);
  const std::uint64_t limit = 1000 * static_cast<std::uint64_t>(std::max<std::size_t>(count, 1));
  std::uint64_t failures = 0;
  while (out.size() < count) {
    const Problem p = random_solvable_problem(space, comp, rng);
    const double cost = optimal_cost(space, p);
    if (cost < min_optimal_cost - kCostEpsilon) {
      if (++failures > limit) {
        throw SamplingError("could not find " + std::to_string(count) +
                            " problems with optimal cost >= " + format_number(min_optimal_cost));
      }
      continue;
    }
    out.push_back({p, cost});
  }
  return out;
}

std::string SpaceKey::id() const { return "m" + std::to_string(map) + "-s" + std::to_string(sub); }

SpaceKey parse_space_id(const std::string& id) {
  const auto dash = id.find("-s");
  if (id.size() < 4 || id[0] != 'm' || dash == std::string::npos) {
    throw UsageError("space id '" + id + "' is not of the form m<map>-s<sub>");
  }
  return {to_uint("space id", id.substr(1, dash - 1)), to_uint("space id", id.substr(dash + 2))};
}

SpaceSeeds space_seeds(std::uint64_t base, const SpaceKey& key) {
  return {derive_seed(base, key.map, key.sub, 1), derive_seed(base, key.map, key.sub, 2),
          derive_seed(base, key.map, key.sub, 3), derive_seed(base, key.map, key.sub, 4)};
}

double build_database(const SearchSpace& space, Algorithm a, const AlgorithmParams& p,
                      std::uint64_t seed, Databases& dbs) {
  const auto t0 = std::chrono::steady_clock::now();
  switch (a) {
    case Algorithm::Dlrta:
      dbs.dlrta = build_dlrta_db(space, p.levels, seed);
      break;
    case Algorithm::Knn:
      dbs.knn = build_knn_db(space, p.knn_records, p.hc_bound, seed);
      break;
    case Algorithm::Hcdps:
      dbs.hcdps = build_hcdps_db(space, p.hcdps_radius, p.hc_bound, seed, p.hcdps_max_regions,
                                 p.hcdps_max_entries);
      break;
    case Algorithm::Lrta:
    case Algorithm::Tba:
      break;
  }
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Solution run_algorithm(const SearchSpace& space, Algorithm a, const AlgorithmParams& p,
                       const Databases& dbs, const Problem& problem) {
  auto need = [&](bool present) {
    if (!present) throw UsageError(std::string(algorithm_name(a)) + " needs a database");
  };
  switch (a) {
    case Algorithm::Lrta:
      return lrta_star(space, problem, p.lss());
    case Algorithm::Dlrta:
      need(dbs.dlrta.has_value());
      return solve_dlrta(space, *dbs.dlrta, problem, p.lss());
    case Algorithm::Knn:
      need(dbs.knn.has_value());
      return solve_knn(space, *dbs.knn, problem, p.knn_candidates, p.hc_bound, p.lss());
    case Algorithm::Hcdps:
      need(dbs.hcdps.has_value());
      return solve_hcdps(space, *dbs.hcdps, problem, p.hc_bound, p.lss());
    case Algorithm::Tba:
      return tba_star(space, problem, p.tba_expansions, p.step_cap);
  }
  throw UsageError("unknown algorithm");
}

std::uint64_t path_hash(const std::vector<StateId>& path) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (StateId s : path) {
    for (int i = 0; i < 4; ++i) {
      h ^= (s >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

bool ExperimentRow::has_failure() const {
  if (!error.empty()) return true;
  for (const auto& [a, o] : outcomes) {
    if (!o.error.empty() || o.unsolved > 0) return true;
  }
  return false;
}

PreparedSpace prepare_space(const ExperimentConfig& cfg, const SearchSpace& map, const SpaceKey& key) {
  const auto seeds = space_seeds(cfg.seed, key);
  PreparedSpace out;
  out.space = sample_subspace(map, {cfg.subspace_size, seeds.subspace});
  out.problems = gen_problems(out.space, cfg.problems, cfg.min_optimal_cost, seeds.problems);
  return out;
}

ExperimentRow run_space(const ExperimentConfig& cfg, const SearchSpace& map, const SpaceKey& key) {
  ExperimentRow row;
  row.key = key;
  row.map = cfg.corpus.at(key.map);
  PreparedSpace prepared;
  try {
    prepared = prepare_space(cfg, map, key);
  } catch (const std::exception& e) {
    row.error = e.what();
    return row;
  }
  const auto& space = prepared.space;
  const auto seeds = space_seeds(cfg.seed, key);
  row.states = space.size();
  if (cfg.profile) {
    ProfileConfig pc;
    pc.stability = cfg.stability;
    pc.hc_bound = cfg.params.hc_bound;
    pc.lrta = cfg.params.lss();
    row.profile = profile(space, pc, seeds.profile);
  }
  for (Algorithm a : cfg.algorithms) {
    AlgorithmOutcome& outcome = row.outcomes[a];
    Databases dbs;
    if (uses_database(a)) {
      try {
        const double secs = build_database(space, a, cfg.params, derive_seed(seeds.database, static_cast<std::uint64_t>(a)), dbs);
        if (cfg.timing) outcome.build_seconds = secs;
      } catch (const std::exception& e) {
        outcome.error = e.what();
        continue;
      }
    }
    std::vector<double> subs;
    for (std::size_t i = 0; i < prepared.problems.size(); ++i) {
      const auto& gp = prepared.problems[i];
      const Solution sol = run_algorithm(space, a, cfg.params, dbs, gp.problem);
      ProblemResult r;
      r.index = i;
      r.algorithm = a;
      r.start = gp.problem.start;
      r.goal = gp.problem.goal;
      r.optimal_cost = gp.optimal_cost;
      r.cost = sol.cost;
      r.solved = sol.solved;
      r.guarantee_violation = sol.guarantee_violation;
      r.expansions = sol.expansions;
      r.moves = sol.moves();
      r.hash = path_hash(sol.path);
      if (sol.solved) {
        subs.push_back(suboptimality(sol.cost, gp.optimal_cost));
      } else {
        ++outcome.unsolved;
      }
      if (sol.guarantee_violation) ++outcome.guarantee_violations;
      row.problems.push_back(r);
    }
    if (!subs.empty()) {
      outcome.aggregate = aggregate(subs, prepared.problems.size());
      outcome.aggregate->mean_build_seconds = outcome.build_seconds;
    }
  }
  return row;
}

namespace {

// Runs body(i) for i in [0, n) on `workers` threads; the first exception wins.
template <typename Body>
void parallel_for(std::size_t n, std::size_t workers, Body body) {
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(workers, std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<SpaceKey> all_keys(const ExperimentConfig& cfg) {
  std::vector<SpaceKey> keys;
  for (std::size_t m = 0; m < cfg.corpus.size(); ++m) {
    for (std::size_t s = 0; s < cfg.subspaces_per_map; ++s) keys.push_back({m, s});
  }
  return keys;
}

std::vector<SearchSpace> load_corpus(const ExperimentConfig& cfg) {
  std::vector<SearchSpace> maps;
  maps.reserve(cfg.corpus.size());
  for (const auto& spec : cfg.corpus) maps.push_back(load_map(spec));
  return maps;
}

}  // namespace

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto maps = load_corpus(cfg);
  const auto keys = all_keys(cfg);
  std::vector<ExperimentRow> rows(keys.size());
  parallel_for(keys.size(), cfg.workers,
               [&](std::size_t i) { rows[i] = run_space(cfg, maps[keys[i].map], keys[i]); });
  return rows;
}

Dataset db_size_dataset(const ExperimentConfig& cfg, std::span<const std::size_t> sizes) {
  cfg.validate();
  if (sizes.empty()) throw UsageError("no database sizes given");
  const auto maps = load_corpus(cfg);
  const auto keys = all_keys(cfg);
  std::vector<std::vector<std::pair<std::vector<double>, double>>> rows(keys.size());
  parallel_for(keys.size(), cfg.workers, [&](std::size_t i) {
    PreparedSpace prepared;
    try {
      prepared = prepare_space(cfg, maps[keys[i].map], keys[i]);
    } catch (const SamplingError&) {
      return;
    }
    const auto seeds = space_seeds(cfg.seed, keys[i]);
    ProfileConfig pc;
    pc.stability = cfg.stability;
    pc.hc_bound = cfg.params.hc_bound;
    pc.lrta = cfg.params.lss();
    const auto prof = profile(prepared.space, pc, seeds.profile);
    for (std::size_t n : sizes) {
      AlgorithmParams params = cfg.params;
      params.knn_records = n;
      Databases dbs;
      build_database(prepared.space, Algorithm::Knn, params,
                     derive_seed(seeds.database, static_cast<std::uint64_t>(Algorithm::Knn)), dbs);
      double total = 0;
      std::size_t solved = 0;
      for (const auto& gp : prepared.problems) {
        const auto sol = run_algorithm(prepared.space, Algorithm::Knn, params, dbs, gp.problem);
        if (!sol.solved) continue;
        total += suboptimality(sol.cost, gp.optimal_cost);
        ++solved;
      }
      if (solved == 0) continue;
      std::vector<double> features(prof.value.begin(), prof.value.end());
      features.push_back(total / static_cast<double>(solved));
      rows[i].emplace_back(std::move(features), static_cast<double>(n));
    }
  });
  Dataset d;
  for (Measure m : kAllMeasures) d.feature_names.emplace_back(measure_name(m));
  d.feature_names.emplace_back("knn_mean");
  for (auto& per_space : rows) {
    for (auto& [features, target] : per_space) d.add(std::move(features), target);
  }
  return d;
}

std::string profiles_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream os;
  os << "space_id,map,states,seed";
  for (Measure m : kAllMeasures) os << ',' << measure_name(m);
  for (Measure m : kAllMeasures) os << ',' << measure_name(m) << "_samples";
  os << ",unstable\n";
  for (const auto& r : rows) {
    if (!r.profile) continue;
    const auto& p = *r.profile;
    os << r.key.id() << ',' << r.map << ',' << r.states << ',' << p.seed;
    for (Measure m : kAllMeasures) os << ',' << format_number(p[m]);
    for (std::size_t i = 0; i < kMeasureCount; ++i) os << ',' << p.samples[i];
    os << ',';
    bool first = true;
    for (Measure m : kAllMeasures) {
      if (!p.unstable[static_cast<std::size_t>(m)]) continue;
      os << (first ? "" : ";") << measure_name(m);
      first = false;
    }
    os << '\n';
  }
  return os.str();
}

std::string performance_csv(const std::vector<ExperimentRow>& rows, bool timing) {
  std::ostringstream os;
  os << "space_id,algorithm,mean,median,solve_rate,build_seconds,solved,attempted,"
        "guarantee_violations,error\n";
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      os << r.key.id() << ",all,NA,NA,NA,NA,0,0,0," << r.error << '\n';
      continue;
    }
    for (const auto& [a, o] : r.outcomes) {
      os << r.key.id() << ',' << algorithm_name(a) << ',';
      if (o.aggregate) {
        os << format_number(o.aggregate->mean) << ',' << format_number(o.aggregate->median) << ','
           << format_number(o.aggregate->solve_rate);
      } else {
        os << "NA,NA," << (o.error.empty() ? "0" : "NA");
      }
      os << ',' << (timing && uses_database(a) ? na_or(o.build_seconds) : "NA") << ','
         << (o.aggregate ? o.aggregate->solved : 0) << ','
         << (o.aggregate ? o.aggregate->attempted : (o.error.empty() ? o.unsolved : 0)) << ','
         << o.guarantee_violations << ',';
      std::string err = o.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      os << err << '\n';
    }
  }
  return os.str();
}

std::string problems_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream os;
  os << "space_id,problem,algorithm,start,goal,optimal_cost,cost,suboptimality,solved,"
        "expansions,moves,path_hash\n";
  for (const auto& r : rows) {
    for (const auto& p : r.problems) {
      os << r.key.id() << ',' << p.index << ',' << algorithm_name(p.algorithm) << ',' << p.start
         << ',' << p.goal << ',' << format_number(p.optimal_cost) << ',';
      if (p.solved) {
        os << format_number(p.cost) << ',' << format_number(suboptimality(p.cost, p.optimal_cost));
      } else {
        os << "NA,NA";
      }
      char hash[17];
      std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(p.hash));
      os << ',' << (p.solved ? "true" : (p.guarantee_violation ? "violation" : "false")) << ','
         << p.expansions << ',' << p.moves << ',' << hash << '\n';
    }
  }
  return os.str();
}

std::vector<NamedSeries> experiment_series(const std::vector<ExperimentRow>& rows) {
  const double na = std::numeric_limits<double>::quiet_NaN();
  std::vector<NamedSeries> series;
  for (Measure m : kAllMeasures) {
    NamedSeries s{std::string(measure_name(m)), {}};
    for (const auto& r : rows) s.values.push_back(r.profile ? (*r.profile)[m] : na);
    series.push_back(std::move(s));
  }
  std::vector<Algorithm> present;
  for (Algorithm a : kAllAlgorithms) {
    for (const auto& r : rows) {
      if (r.outcomes.count(a)) {
        present.push_back(a);
        break;
      }
    }
  }
  for (Algorithm a : present) {
    NamedSeries mean{std::string(algorithm_name(a)) + "_mean", {}};
    NamedSeries median{std::string(algorithm_name(a)) + "_median", {}};
    NamedSeries build{std::string(algorithm_name(a)) + "_build", {}};
    for (const auto& r : rows) {
      const auto it = r.outcomes.find(a);
      const AlgorithmOutcome* o = it == r.outcomes.end() ? nullptr : &it->second;
      mean.values.push_back(o && o->aggregate ? o->aggregate->mean : na);
      median.values.push_back(o && o->aggregate ? o->aggregate->median : na);
      build.values.push_back(o && o->build_seconds ? *o->build_seconds : na);
    }
    series.push_back(std::move(mean));
    series.push_back(std::move(median));
    if (uses_database(a)) series.push_back(std::move(build));
  }
  return series;
}

void write_outputs(const ExperimentConfig& cfg, const std::vector<ExperimentRow>& rows) {
  const std::filesystem::path dir(cfg.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ParseError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "profiles.csv", profiles_csv(rows));
  write_file(dir / "performance.csv", performance_csv(rows, cfg.timing));
  write_file(dir / "problems.csv", problems_csv(rows));
  const auto series = experiment_series(rows);
  const auto cells = correlation_table(series, series);
  write_file(dir / "correlations.csv", correlations_csv(cells));
  write_file(dir / "correlations.txt", correlation_text_table(cells));
  write_file(dir / "config.txt", cfg.dump());

  char host[256] = "unknown";
  gethostname(host, sizeof host - 1);
  std::ostringstream meta;
  meta << "host " << host << '\n'
       << "hardware_threads " << std::thread::hardware_concurrency() << '\n'
       << "workers " << cfg.workers << '\n'
       << "timing " << (cfg.timing ? "on" : "off") << '\n'
       << "rows " << rows.size() << '\n';
  write_file(dir / "run.txt", meta.str());
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParseError("missing CSV column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + " is empty");
  t.header = split(line, ',');
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != t.header.size()) {
      throw ParseError(path + " line " + std::to_string(number) + ": expected " +
                       std::to_string(t.header.size()) + " fields");
    }
    t.rows.push_back(std::move(fields));
  }
  return t;
}

namespace {

double csv_number(const std::string& s) {
  if (s == "NA" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("not a number: '" + s + "'");
}

}  // namespace

std::vector<NamedSeries> series_from_csv(const CsvTable& profiles, const CsvTable& performance) {
  const double na = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> index;
  const auto pid = profiles.column("space_id");
  for (const auto& r : profiles.rows) {
    index.emplace(r[pid], ids.size());
    ids.push_back(r[pid]);
  }
  const auto perf_id = performance.column("space_id");
  for (const auto& r : performance.rows) {
    if (index.emplace(r[perf_id], ids.size()).second) ids.push_back(r[perf_id]);
  }
  std::vector<NamedSeries> series;
  for (Measure m : kAllMeasures) {
    NamedSeries s{std::string(measure_name(m)), std::vector<double>(ids.size(), na)};
    const auto col = profiles.column(std::string(measure_name(m)));
    for (const auto& r : profiles.rows) s.values[index[r[pid]]] = csv_number(r[col]);
    series.push_back(std::move(s));
  }
  const auto algo = performance.column("algorithm");
  const auto mean = performance.column("mean");
  const auto median = performance.column("median");
  const auto build = performance.column("build_seconds");
  for (Algorithm a : kAllAlgorithms) {
    const std::string name = algorithm_name(a);
    NamedSeries ms{name + "_mean", std::vector<double>(ids.size(), na)};
    NamedSeries md{name + "_median", std::vector<double>(ids.size(), na)};
    NamedSeries bs{name + "_build", std::vector<double>(ids.size(), na)};
    bool seen = false;
    for (const auto& r : performance.rows) {
      if (r[algo] != name) continue;
      seen = true;
      const auto i = index[r[perf_id]];
      ms.values[i] = csv_number(r[mean]);
      md.values[i] = csv_number(r[median]);
      bs.values[i] = csv_number(r[build]);
    }
    if (!seen) continue;
    series.push_back(std::move(ms));
    series.push_back(std::move(md));
    if (uses_database(a)) series.push_back(std::move(bs));
  }
  return series;
}

Dataset measure_dataset(const std::vector<NamedSeries>& series, const std::string& target) {
  const NamedSeries* y = nullptr;
  for (const auto& s : series) {
    if (s.name == target) y = &s;
  }
  if (!y) throw UsageError("no series named '" + target + "'");
  Dataset d;
  std::vector<const NamedSeries*> features;
  for (Measure m : kAllMeasures) {
    for (const auto& s : series) {
      if (s.name == measure_name(m)) features.push_back(&s);
    }
    d.feature_names.emplace_back(measure_name(m));
  }
  if (features.size() != kMeasureCount) throw UsageError("series lack the eight measures");
  for (std::size_t i = 0; i < y->values.size(); ++i) {
    std::vector<double> row;
    bool complete = std::isfinite(y->values[i]);
    for (const auto* f : features) {
      row.push_back(f->values[i]);
      complete = complete && std::isfinite(f->values[i]);
    }
    if (complete) d.add(std::move(row), y->values[i]);
  }
  return d;
}

namespace {

void write_ids(std::ostream& out, const std::vector<StateId>& ids) {
  out << ids.size();
  for (StateId s : ids) {
    out << ' ';
    if (s == kNoState) {
      out << '-';
    } else {
      out << s;
    }
  }
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw ParseError("database file ends early");
    return w;
  }
  void expect(const std::string& w) {
    const auto got = word();
    if (got != w) throw ParseError("database file: expected '" + w + "', found '" + got + "'");
  }
  std::uint64_t number() {
    const auto w = word();
    try {
      std::size_t used = 0;
      const auto v = std::stoull(w, &used);
      if (used == w.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError("database file: bad number '" + w + "'");
  }
  StateId state(std::size_t limit) {
    const auto w = word();
    if (w == "-") return kNoState;
    std::uint64_t v = 0;
    try {
      std::size_t used = 0;
      v = std::stoull(w, &used);
      if (used != w.size()) throw ParseError("");
    } catch (const std::exception&) {
      throw ParseError("database file: bad state '" + w + "'");
    }
    if (v >= limit) throw ParseError("database file: state " + w + " out of range");
    return static_cast<StateId>(v);
  }
  std::vector<StateId> ids(std::size_t limit) {
    const auto n = number();
    if (n > 100000000ULL) throw ParseError("database file: implausible list length");
    std::vector<StateId> v(n);
    for (auto& s : v) s = state(limit);
    return v;
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_database(std::ostream& out, const SearchSpace& space, Algorithm a,
                   const AlgorithmParams& p, std::uint64_t seed, const Databases& dbs) {
  out << "rths-db " << kDatabaseFormatVersion << '\n'
      << "kind " << algorithm_name(a) << '\n'
      << "space " << space.fingerprint() << ' ' << space.size() << '\n'
      << "seed " << seed << '\n';
  switch (a) {
    case Algorithm::Dlrta: {
      if (!dbs.dlrta) throw UsageError("no D LRTA* database to save");
      const auto& db = *dbs.dlrta;
      out << "levels " << db.levels << '\n' << "partition ";
      write_ids(out, {db.partition.begin(), db.partition.end()});
      out << "representatives ";
      write_ids(out, db.representative);
      out << "subgoals ";
      write_ids(out, db.subgoal);
      break;
    }
    case Algorithm::Knn: {
      if (!dbs.knn) throw UsageError("no kNN database to save");
      const auto& db = *dbs.knn;
      out << "hc_bound " << db.hc_bound << '\n' << "records " << db.records.size() << '\n';
      for (const auto& r : db.records) {
        out << r.start << ' ' << r.goal << ' ';
        write_ids(out, r.chain);
      }
      break;
    }
    case Algorithm::Hcdps: {
      if (!dbs.hcdps) throw UsageError("no HCDPS database to save");
      const auto& db = *dbs.hcdps;
      out << "radius " << db.radius << '\n'
          << "hc_bound " << db.hc_bound << '\n'
          << "region_of ";
      write_ids(out, {db.regions.region.begin(), db.regions.region.end()});
      out << "seeds ";
      write_ids(out, db.regions.seed);
      out << "adjacency " << db.adjacency.size() << '\n';
      for (const auto& adj : db.adjacency) write_ids(out, {adj.begin(), adj.end()});
      out << "records " << db.records.size() << '\n';
      for (std::size_t i = 0; i < db.records.size(); ++i) {
        out << (db.has_record[i] ? 1 : 0) << ' ';
        write_ids(out, db.records[i]);
      }
      break;
    }
    case Algorithm::Lrta:
    case Algorithm::Tba:
      throw UsageError(std::string(algorithm_name(a)) + " has no database");
  }
  out << "end\n";
  (void)p;
}

Algorithm load_database(std::istream& in, const SearchSpace& space, Databases& dbs) {
  Reader r(in);
  r.expect("rths-db");
  const auto version = r.number();
  if (version != static_cast<std::uint64_t>(kDatabaseFormatVersion)) {
    throw ParseError("database format version " + std::to_string(version) + " is not supported");
  }
  r.expect("kind");
  const auto kind = r.word();
  Algorithm a;
  try {
    a = parse_algorithm(kind);
  } catch (const UsageError&) {
    throw ParseError("database file: unknown kind '" + kind + "'");
  }
  r.expect("space");
  const auto fp = r.number();
  const auto states = r.number();
  if (fp != space.fingerprint() || states != space.size()) {
    throw ParseError("database was built for a different space (stale database)");
  }
  r.expect("seed");
  const auto seed = r.number();
  const std::size_t n = space.size();
  switch (a) {
    case Algorithm::Dlrta: {
      DlrtaDatabase db;
      db.seed = seed;
      r.expect("levels");
      db.levels = static_cast<int>(r.number());
      r.expect("partition");
      const auto part = r.ids(std::numeric_limits<StateId>::max());
      db.partition.assign(part.begin(), part.end());
      r.expect("representatives");
      db.representative = r.ids(n);
      r.expect("subgoals");
      db.subgoal = r.ids(n);
      if (db.partition.size() != n ||
          db.subgoal.size() != db.representative.size() * db.representative.size()) {
        throw ParseError("database file: D LRTA* tables have inconsistent sizes");
      }
      for (auto p : db.partition) {
        if (p >= db.representative.size()) throw ParseError("database file: bad partition id");
      }
      dbs.dlrta = std::move(db);
      break;
    }
    case Algorithm::Knn: {
      KnnDatabase db;
      db.seed = seed;
      r.expect("hc_bound");
      db.hc_bound = r.number();
      r.expect("records");
      const auto count = r.number();
      db.records.resize(count);
      for (auto& rec : db.records) {
        rec.start = r.state(n);
        rec.goal = r.state(n);
        rec.chain = r.ids(n);
      }
      dbs.knn = std::move(db);
      break;
    }
    case Algorithm::Hcdps: {
      HcdpsDatabase db;
      db.seed = seed;
      r.expect("radius");
      db.radius = static_cast<int>(r.number());
      r.expect("hc_bound");
      db.hc_bound = r.number();
      r.expect("region_of");
      const auto region = r.ids(std::numeric_limits<StateId>::max());
      db.regions.region.assign(region.begin(), region.end());
      r.expect("seeds");
      db.regions.seed = r.ids(n);
      const std::size_t k = db.regions.seed.size();
      r.expect("adjacency");
      if (r.number() != k) throw ParseError("database file: adjacency size mismatch");
      db.adjacency.resize(k);
      for (auto& adj : db.adjacency) {
        const auto ids = r.ids(k);
        adj.assign(ids.begin(), ids.end());
      }
      r.expect("records");
      if (r.number() != k * k) throw ParseError("database file: record table size mismatch");
      db.records.resize(k * k);
      db.has_record.assign(k * k, false);
      for (std::size_t i = 0; i < k * k; ++i) {
        db.has_record[i] = r.number() != 0;
        db.records[i] = r.ids(n);
      }
      if (db.regions.region.size() != n) throw ParseError("database file: region table size mismatch");
      for (auto g : db.regions.region) {
        if (g >= k) throw ParseError("database file: bad region id");
      }
      dbs.hcdps = std::move(db);
      break;
    }
    case Algorithm::Lrta:
    case Algorithm::Tba:
      throw ParseError("database file: " + kind + " has no database");
  }
  r.expect("end");
  return a;
}

}  // namespace rths
