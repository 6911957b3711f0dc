#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rths/complexity.hpp"
#include "rths/core.hpp"
#include "rths/predict.hpp"
#include "rths/realtime.hpp"
#include "rths/stats.hpp"
#include "rths/subgoal.hpp"

namespace rths {

enum class Algorithm { Lrta, Dlrta, Knn, Hcdps, Tba };
inline constexpr std::size_t kAlgorithmCount = 5;
inline constexpr std::array<Algorithm, kAlgorithmCount> kAllAlgorithms = {
    Algorithm::Lrta, Algorithm::Dlrta, Algorithm::Knn, Algorithm::Hcdps, Algorithm::Tba};

const char* algorithm_name(Algorithm a);
/// Throws UsageError for an unknown name.
Algorithm parse_algorithm(const std::string& name);
bool uses_database(Algorithm a);

/// Map source. Forms:
///   open:W:H
///   maze:W:H:CORRIDOR:SEED
///   rooms:W:H:ROOM:DOOR:REMOVED:SEED
///   scatter:W:H:DENSITY:MAXBLOCK:SEED
///   movingai:PATH
///   dimacs:GR_PATH:CO_PATH[:scaled]   (scaled: admissible heuristic scaling)
/// Throws UsageError for a malformed spec, ParseError for unreadable files.
SearchSpace load_map(const std::string& spec);

struct AlgorithmParams {
  int lookahead = 1;             // d
  int levels = 5;                // l, D LRTA* abstraction levels
  std::size_t knn_records = 1000;  // N
  std::size_t knn_candidates = 10; // M
  int hcdps_radius = 1;          // r
  std::uint64_t hc_bound = 250;  // b
  std::uint64_t tba_expansions = 5;  // R
  std::uint64_t step_cap = 0;    // 0: 100 * |S|
  std::size_t hcdps_max_regions = kDefaultMaxRegions;
  std::size_t hcdps_max_entries = kDefaultMaxRecordEntries;  // HCDPS memory budget

  LssConfig lss() const { return {lookahead, step_cap}; }
};

struct ExperimentConfig {
  std::vector<std::string> corpus;
  std::size_t subspaces_per_map = 10;
  std::size_t subspace_size = 20000;
  std::size_t problems = 250;
  double min_optimal_cost = 10;
  std::uint64_t seed = 1;
  std::vector<Algorithm> algorithms{kAllAlgorithms.begin(), kAllAlgorithms.end()};
  AlgorithmParams params;
  StabilityConfig stability;
  std::size_t workers = 1;
  bool timing = true;  // off: build seconds are written as NA
  bool profile = true;
  std::string output = "results";

  /// Sets one key. `corpus` appends; list values are comma-separated.
  /// Throws UsageError for unknown keys or bad values.
  void apply(const std::string& key, const std::string& value);
  /// Reads `key = value` lines; '#' starts a comment.
  void load(std::istream& in);
  void load_file(const std::string& path);
  /// Throws UsageError when a count is zero or the corpus is empty.
  void validate() const;
  /// Canonical key = value listing, loadable by load().
  std::string dump() const;
};

/// Reference optimal cost: A* on octile spaces, Dijkstra on Euclidean ones
/// (whose raw heuristic may overestimate). kInfinity when unreachable.
double optimal_cost(const SearchSpace& space, const Problem& problem);

/// Uniform random solvable pairs with optimal_cost >= min_optimal_cost. Throws SamplingError after 1000 * count failed draws.
struct GeneratedProblem {
  Problem problem;
  double optimal_cost = 0;
};
std::vector<GeneratedProblem> gen_problems(const SearchSpace& space, std::size_t count,
                                           double min_optimal_cost, std::uint64_t seed);

/// Everything needed to rebuild sub-space `sub` of corpus map `map`.
struct SpaceKey {
  std::size_t map = 0;
  std::size_t sub = 0;
  std::string id() const;
};
/// Parses "m<map>-s<sub>". Throws UsageError.
SpaceKey parse_space_id(const std::string& id);

/// Deterministic seeds for one sub-space.
struct SpaceSeeds {
  std::uint64_t subspace;
  std::uint64_t problems;
  std::uint64_t profile;
  std::uint64_t database;
};
SpaceSeeds space_seeds(std::uint64_t base, const SpaceKey& key);

/// Databases for one space; absent entries were not requested or failed.
struct Databases {
  std::optional<DlrtaDatabase> dlrta;
  std::optional<KnnDatabase> knn;
  std::optional<HcdpsDatabase> hcdps;
};

/// Builds the database for `a` (no-op for database-free algorithms).
/// Returns wall seconds. Throws BuildError / SamplingError from the builders.
double build_database(const SearchSpace& space, Algorithm a, const AlgorithmParams& p,
                      std::uint64_t seed, Databases& dbs);

/// Runs one algorithm on one problem; the database must already exist.
Solution run_algorithm(const SearchSpace& space, Algorithm a, const AlgorithmParams& p,
                       const Databases& dbs, const Problem& problem);

std::uint64_t path_hash(const std::vector<StateId>& path);

struct ProblemResult {
  std::size_t index = 0;
  Algorithm algorithm = Algorithm::Lrta;
  StateId start = kNoState;
  StateId goal = kNoState;
  double optimal_cost = 0;
  double cost = 0;
  bool solved = false;
  bool guarantee_violation = false;
  std::uint64_t expansions = 0;
  std::size_t moves = 0;
  std::uint64_t hash = 0;  // path_hash of the full path
};

struct AlgorithmOutcome {
  std::optional<PerformanceAggregate> aggregate;  // empty: nothing solved
  std::optional<double> build_seconds;
  std::size_t unsolved = 0;
  std::size_t guarantee_violations = 0;
  std::string error;  // build failure message
};

struct ExperimentRow {
  SpaceKey key;
  std::string map;
  std::size_t states = 0;
  std::optional<ComplexityProfile> profile;
  std::map<Algorithm, AlgorithmOutcome> outcomes;
  std::vector<ProblemResult> problems;
  std::string error;  // sub-space could not be prepared

  bool has_failure() const;
};

/// A prepared sub-space: the space and its problem set.
struct PreparedSpace {
  SearchSpace space;
  std::vector<GeneratedProblem> problems;
};
PreparedSpace prepare_space(const ExperimentConfig& cfg, const SearchSpace& map, const SpaceKey& key);

ExperimentRow run_space(const ExperimentConfig& cfg, const SearchSpace& map, const SpaceKey& key);

/// Rows in (map, sub) order regardless of worker count.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg);

std::string profiles_csv(const std::vector<ExperimentRow>& rows);
std::string performance_csv(const std::vector<ExperimentRow>& rows, bool timing);
std::string problems_csv(const std::vector<ExperimentRow>& rows);

/// Series used for correlation: the eight measures, then per algorithm
/// "<name>_mean", "<name>_median" and, for database algorithms,
/// "<name>_build". Missing values are NaN.
std::vector<NamedSeries> experiment_series(const std::vector<ExperimentRow>& rows);

/// Writes profiles.csv, performance.csv, problems.csv, correlations.csv,
/// correlations.txt and config.txt into cfg.output, plus run.txt metadata.
void write_outputs(const ExperimentConfig& cfg, const std::vector<ExperimentRow>& rows);

/// Minimal CSV reader for the files written above (no quoting).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;  // throws ParseError
};
CsvTable read_csv(const std::string& path);

/// Rebuilds the series from profiles.csv and performance.csv.
std::vector<NamedSeries> series_from_csv(const CsvTable& profiles, const CsvTable& performance);

/// Dataset of the eight measures against one named target series.
Dataset measure_dataset(const std::vector<NamedSeries>& series, const std::string& target);

/// Database-size grid: every sub-space is profiled once, then kNN LRTA* is
/// built with each record count in `sizes` and run on the problem set. One
/// row per (sub-space, size): the eight measures plus "knn_mean" against the
/// record count. Sizes that solve nothing are skipped.
inline constexpr std::array<std::size_t, 6> kDbSizeGrid = {500, 1000, 2500, 5000, 10000, 20000};
Dataset db_size_dataset(const ExperimentConfig& cfg, std::span<const std::size_t> sizes);

/// Database files: "rths-db <version>", kind, space fingerprint and size,
/// build parameters, then the payload. Loading against a different space
/// throws ParseError.
inline constexpr int kDatabaseFormatVersion = 1;
void save_database(std::ostream& out, const SearchSpace& space, Algorithm a,
                   const AlgorithmParams& p, std::uint64_t seed, const Databases& dbs);
/// Returns the algorithm stored in the file.
Algorithm load_database(std::istream& in, const SearchSpace& space, Databases& dbs);

}  // namespace rths
