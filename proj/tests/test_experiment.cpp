#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rths/experiment.hpp"
#include "rths/rng.hpp"
#include "support.hpp"

using namespace rths;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.corpus = {"scatter:40:40:0.2:3:5", "rooms:41:41:8:2:0.3:7"};
  cfg.subspaces_per_map = 2;
  cfg.subspace_size = 400;
  cfg.problems = 10;
  cfg.min_optimal_cost = 5;
  cfg.seed = 11;
  cfg.params.knn_records = 40;
  cfg.params.levels = 3;
  cfg.stability = {20, 60, 10, 0.05};
  cfg.timing = false;
  return cfg;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("rths_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, ParsesKeysAndAliases) {
  ExperimentConfig cfg;
  std::istringstream in(
      "# comment\n"
      "corpus = open:10:10, maze:11:11:1:3\n"
      "d = 3\n"
      "N=77   # trailing\n"
      "algorithms = lrta,tba\n"
      "timing = off\n");
  cfg.load(in);
  EXPECT_EQ(cfg.corpus, (std::vector<std::string>{"open:10:10", "maze:11:11:1:3"}));
  EXPECT_EQ(cfg.params.lookahead, 3);
  EXPECT_EQ(cfg.params.knn_records, 77u);
  EXPECT_EQ(cfg.algorithms, (std::vector<Algorithm>{Algorithm::Lrta, Algorithm::Tba}));
  EXPECT_FALSE(cfg.timing);
}

TEST(Config, DumpRoundTrips) {
  auto cfg = small_config();
  cfg.algorithms = {Algorithm::Knn, Algorithm::Lrta};
  std::istringstream in(cfg.dump());
  ExperimentConfig back;
  back.load(in);
  EXPECT_EQ(back.dump(), cfg.dump());
}

TEST(Config, RejectsBadInput) {
  ExperimentConfig cfg;
  EXPECT_THROW(cfg.apply("nonsense", "1"), UsageError);
  EXPECT_THROW(cfg.apply("problems", "-3"), UsageError);
  EXPECT_THROW(cfg.apply("problems", "3x"), UsageError);
  EXPECT_THROW(cfg.apply("algorithms", "astar"), UsageError);
  EXPECT_THROW(cfg.apply("timing", "maybe"), UsageError);
  std::istringstream in("no equals sign\n");
  EXPECT_THROW(cfg.load(in), UsageError);
  EXPECT_THROW(cfg.validate(), UsageError);  // empty corpus
}

TEST(LoadMap, Specs) {
  EXPECT_EQ(load_map("open:7:5").size(), 35u);
  EXPECT_GT(load_map("maze:21:21:1:4").size(), 0u);
  EXPECT_THROW(load_map("open:7"), UsageError);
  EXPECT_THROW(load_map("hexes:3:3"), UsageError);
  EXPECT_THROW(load_map("movingai:/nonexistent/file.map"), ParseError);
}

TEST(LoadMap, MovingAiFile) {
  const auto dir = temp_dir("movingai");
  std::filesystem::create_directories(dir);
  const auto path = dir / "m.map";
  std::ofstream(path) << emit_movingai(generate_open(6, 4));
  EXPECT_EQ(load_map("movingai:" + path.string()).size(), 24u);
}

TEST(SpaceId, RoundTrip) {
  const SpaceKey k{3, 12};
  EXPECT_EQ(k.id(), "m3-s12");
  const auto back = parse_space_id(k.id());
  EXPECT_EQ(back.map, 3u);
  EXPECT_EQ(back.sub, 12u);
  EXPECT_THROW(parse_space_id("x3-s1"), UsageError);
  EXPECT_THROW(parse_space_id("m3"), UsageError);
}

TEST(GenProblems, MinimumCostHonoured) {
  const auto space = load_map("scatter:30:30:0.2:2:3");
  const auto probs = gen_problems(space, 50, 12, 9);
  ASSERT_EQ(probs.size(), 50u);
  for (const auto& gp : probs) {
    EXPECT_GE(gp.optimal_cost, 12 - kCostEpsilon);
    EXPECT_NEAR(gp.optimal_cost, astar(space, gp.problem).first.cost, 1e-9);
  }
}

TEST(GenProblems, ZeroMinimumAcceptsAnyPair) {
  const auto f = test::grid({"..", ".."});
  const auto probs = gen_problems(f.space, 20, 0, 2);
  EXPECT_EQ(probs.size(), 20u);
}

TEST(GenProblems, ImpossibleMinimumThrows) {
  const auto f = test::grid({"..", ".."});
  EXPECT_THROW(gen_problems(f.space, 5, 10, 2), SamplingError);
}

TEST(GenProblems, Deterministic) {
  const auto space = load_map("open:20:20");
  const auto a = gen_problems(space, 15, 4, 5);
  const auto b = gen_problems(space, 15, 4, 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].problem.start, b[i].problem.start);
    EXPECT_EQ(a[i].problem.goal, b[i].problem.goal);
  }
}

TEST(PathHash, SensitiveToOrder) {
  EXPECT_EQ(path_hash({1, 2, 3}), path_hash({1, 2, 3}));
  EXPECT_NE(path_hash({1, 2, 3}), path_hash({3, 2, 1}));
  EXPECT_NE(path_hash({}), path_hash({0}));
}

TEST(Experiment, SmokeRun) {
  const auto cfg = small_config();
  const auto rows = run_experiment(cfg);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].key.id(), "m0-s0");
  EXPECT_EQ(rows[3].key.id(), "m1-s1");
  for (const auto& r : rows) {
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_EQ(r.states, 400u);
    ASSERT_TRUE(r.profile.has_value());
    EXPECT_EQ(r.outcomes.size(), kAlgorithmCount);
    EXPECT_EQ(r.problems.size(), kAlgorithmCount * cfg.problems);
    for (const auto& [a, o] : r.outcomes) {
      EXPECT_TRUE(o.error.empty()) << algorithm_name(a) << ": " << o.error;
      ASSERT_TRUE(o.aggregate.has_value()) << algorithm_name(a);
      EXPECT_GE(o.aggregate->mean, 1 - 1e-9);
      EXPECT_FALSE(o.build_seconds.has_value());  // timing off
    }
  }
}

TEST(Experiment, WorkerCountDoesNotChangeResults) {
  auto cfg = small_config();
  cfg.algorithms = {Algorithm::Lrta, Algorithm::Knn, Algorithm::Tba};
  const auto one = run_experiment(cfg);
  cfg.workers = 3;
  const auto three = run_experiment(cfg);
  EXPECT_EQ(profiles_csv(one), profiles_csv(three));
  EXPECT_EQ(performance_csv(one, false), performance_csv(three, false));
  EXPECT_EQ(problems_csv(one), problems_csv(three));
}

TEST(Experiment, ReplayReproducesPathHash) {
  auto cfg = small_config();
  cfg.corpus.resize(1);
  cfg.subspaces_per_map = 1;
  cfg.algorithms = {Algorithm::Hcdps};
  cfg.profile = false;
  const auto rows = run_experiment(cfg);
  ASSERT_EQ(rows.size(), 1u);
  const auto prepared = prepare_space(cfg, load_map(cfg.corpus[0]), rows[0].key);
  Databases dbs;
  build_database(prepared.space, Algorithm::Hcdps, cfg.params,
                 derive_seed(space_seeds(cfg.seed, rows[0].key).database,
                             static_cast<std::uint64_t>(Algorithm::Hcdps)),
                 dbs);
  for (const auto& pr : rows[0].problems) {
    const auto sol = run_algorithm(prepared.space, Algorithm::Hcdps, cfg.params, dbs,
                                   prepared.problems[pr.index].problem);
    EXPECT_EQ(path_hash(sol.path), pr.hash);
  }
}

TEST(Experiment, WritesOutputs) {
  auto cfg = small_config();
  cfg.subspaces_per_map = 1;
  cfg.algorithms = {Algorithm::Lrta, Algorithm::Dlrta};
  cfg.timing = true;
  cfg.output = temp_dir("outputs").string();
  const auto rows = run_experiment(cfg);
  write_outputs(cfg, rows);
  for (const char* f : {"profiles.csv", "performance.csv", "problems.csv", "correlations.csv",
                        "correlations.txt", "config.txt", "run.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(cfg.output) / f)) << f;
  }
  const auto perf = read_csv(cfg.output + "/performance.csv");
  ASSERT_EQ(perf.rows.size(), 4u);
  const auto build = perf.column("build_seconds");
  const auto algo = perf.column("algorithm");
  for (const auto& r : perf.rows) {
    if (r[algo] == "lrta") EXPECT_EQ(r[build], "NA");
    if (r[algo] == "dlrta") EXPECT_NE(r[build], "NA");
  }
  const auto series = series_from_csv(read_csv(cfg.output + "/profiles.csv"), perf);
  const auto direct = experiment_series(rows);
  ASSERT_EQ(series.size(), direct.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    EXPECT_EQ(series[i].name, direct[i].name);
    for (std::size_t j = 0; j < series[i].values.size(); ++j) {
      const double a = series[i].values[j];
      const double b = direct[i].values[j];
      if (std::isnan(b)) {
        EXPECT_TRUE(std::isnan(a));
      } else {
        EXPECT_NEAR(a, b, 1e-8 * std::max(1.0, std::abs(b)));
      }
    }
  }
  const auto data = measure_dataset(series, "lrta_mean");
  EXPECT_EQ(data.size(), 2u);
  EXPECT_EQ(data.arity(), kMeasureCount);
}

TEST(Experiment, SeriesLayout) {
  auto cfg = small_config();
  cfg.subspaces_per_map = 1;
  cfg.corpus.resize(1);
  cfg.algorithms = {Algorithm::Tba, Algorithm::Knn};
  cfg.profile = false;
  const auto series = experiment_series(run_experiment(cfg));
  std::vector<std::string> names;
  for (const auto& s : series) names.push_back(s.name);
  ASSERT_EQ(names.size(), kMeasureCount + 5);
  EXPECT_EQ(names[kMeasureCount], "knn_mean");
  EXPECT_EQ(names[kMeasureCount + 2], "knn_build");
  EXPECT_EQ(names[kMeasureCount + 3], "tba_mean");
  EXPECT_TRUE(std::isnan(series[0].values[0]));  // profiling off
}

TEST(ReadCsv, RejectsRaggedRows) {
  const auto dir = temp_dir("csv");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3\n";
  EXPECT_THROW(read_csv((dir / "bad.csv").string()), ParseError);
  EXPECT_THROW(read_csv((dir / "missing.csv").string()), ParseError);
}

class DatabaseFile : public ::testing::TestWithParam<Algorithm> {};

TEST_P(DatabaseFile, RoundTripSolvesIdentically) {
  const Algorithm a = GetParam();
  const auto space = sample_subspace(load_map("scatter:40:40:0.2:3:5"), {500, 3});
  AlgorithmParams params;
  params.knn_records = 30;
  params.levels = 3;
  Databases dbs;
  build_database(space, a, params, 17, dbs);
  std::stringstream file;
  save_database(file, space, a, params, 17, dbs);
  Databases loaded;
  EXPECT_EQ(load_database(file, space, loaded), a);
  const auto probs = gen_problems(space, 15, 0, 4);
  for (const auto& gp : probs) {
    const auto x = run_algorithm(space, a, params, dbs, gp.problem);
    const auto y = run_algorithm(space, a, params, loaded, gp.problem);
    EXPECT_EQ(x.path, y.path);
  }
}

TEST_P(DatabaseFile, StaleSpaceRejected) {
  const Algorithm a = GetParam();
  const auto map = load_map("scatter:40:40:0.2:3:5");
  const auto space = sample_subspace(map, {500, 3});
  const auto other = sample_subspace(map, {500, 4});
  AlgorithmParams params;
  params.knn_records = 30;
  params.levels = 3;
  Databases dbs;
  build_database(space, a, params, 17, dbs);
  std::stringstream file;
  save_database(file, space, a, params, 17, dbs);
  Databases loaded;
  EXPECT_THROW(load_database(file, other, loaded), ParseError);
}

INSTANTIATE_TEST_SUITE_P(All, DatabaseFile,
                         ::testing::Values(Algorithm::Dlrta, Algorithm::Knn, Algorithm::Hcdps),
                         [](const auto& info) { return std::string(algorithm_name(info.param)); });

TEST(DatabaseFileFormat, RejectsCorruption) {
  const auto space = load_map("open:8:8");
  Databases dbs;
  for (const std::string text :
       {"", "rths-db 2\n", "rths-db 1\nkind astar\n", "rths-db 1\nkind lrta\nspace 1 1\n",
        "garbage"}) {
    std::istringstream in(text);
    EXPECT_THROW(load_database(in, space, dbs), ParseError) << text;
  }
  AlgorithmParams params;
  params.knn_records = 5;
  build_database(space, Algorithm::Knn, params, 1, dbs);
  std::stringstream file;
  save_database(file, space, Algorithm::Knn, params, 1, dbs);
  std::string text = file.str();
  text.resize(text.size() / 2);
  std::istringstream cut(text);
  Databases loaded;
  EXPECT_THROW(load_database(cut, space, loaded), ParseError);
}

TEST(DbSizeGrid, OneRowPerSpaceAndSize) {
  auto cfg = small_config();
  cfg.corpus.resize(1);
  const std::vector<std::size_t> sizes = {5, 20, 60};
  const auto data = db_size_dataset(cfg, sizes);
  EXPECT_EQ(data.arity(), kMeasureCount + 1);
  EXPECT_EQ(data.feature_names.back(), "knn_mean");
  ASSERT_EQ(data.size(), cfg.subspaces_per_map * sizes.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(data.targets[i], static_cast<double>(sizes[i % sizes.size()]));
    EXPECT_GE(data.features[i].back(), 1 - 1e-9);
  }
  EXPECT_THROW(db_size_dataset(cfg, {}), UsageError);
}
