#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "rths/core.hpp"
#include "rths/realtime.hpp"

namespace rths {

/// Heuristic depressions toward one goal.
///
/// A depression is a connected state set whose heuristic values are all <= the
/// values of every state immediately surrounding it; it is locally maximal
/// when no single surrounding state can be added without breaking that. A
/// state is depressed when it lies in some locally maximal depression that
/// has a non-empty surround and does not contain the goal. Its depth is the
/// largest (lowest surrounding h) - h(state) over such depressions.
struct DepressionAnalysis {
  StateId goal = kNoState;
  std::vector<bool> depressed;
  std::vector<double> depth;
  /// Connected components of the depressed states, each sorted by id.
  std::vector<std::vector<StateId>> basins;

  std::size_t width() const;
  double capacity() const;
};

DepressionAnalysis find_depressions(const SearchSpace& space, StateId goal);

/// Same analysis for arbitrary per-state heuristic values `h` (one per state).
/// Values are compared after rounding to the cost tolerance.
DepressionAnalysis find_depressions(const SearchSpace& space, std::span<const double> h,
                                    StateId goal);

struct StabilityConfig {
  std::size_t min_samples = 100;
  std::size_t max_samples = 1000;
  std::size_t window = 50;
  double tolerance = 0.02;

  /// Throws UsageError if the fields are inconsistent.
  void validate() const;
};

struct SampledMean {
  double mean = 0;
  std::size_t samples = 0;
  bool unstable = false;
};

/// Draws samples 0, 1, 2, ... until the running mean has moved by at most
/// tolerance * |mean| over the last `window` samples (and at least
/// min_samples were drawn), or max_samples is hit (flagged unstable).
SampledMean sample_until_stable(const StabilityConfig& cfg,
                                const std::function<double(std::size_t)>& sample);

enum class Measure {
  kHcRegionSize,
  kHcProbability,
  kScrubbing,
  kPathCompressibility,
  kAstarDifficulty,
  kHeuristicError,
  kDepressionWidth,
  kDepressionCapacity,
};

inline constexpr std::size_t kMeasureCount = 8;
inline constexpr std::array<Measure, kMeasureCount> kAllMeasures = {
    Measure::kHcRegionSize,       Measure::kHcProbability,   Measure::kScrubbing,
    Measure::kPathCompressibility, Measure::kAstarDifficulty, Measure::kHeuristicError,
    Measure::kDepressionWidth,    Measure::kDepressionCapacity};

std::string_view measure_name(Measure m);

struct ComplexityProfile {
  std::array<double, kMeasureCount> value{};
  std::array<std::size_t, kMeasureCount> samples{};
  std::array<bool, kMeasureCount> unstable{};
  std::uint64_t seed = 0;

  double operator[](Measure m) const { return value[static_cast<std::size_t>(m)]; }
};

/// |S| / number of HC regions.
double measure_hc_region_size(const SearchSpace& space, std::uint64_t b, std::uint64_t seed);

/// Fraction of random ordered pairs of distinct states with hc_reachable.
double measure_hc_probability(const SearchSpace& space, std::size_t n_pairs, std::uint64_t b,
                              std::uint64_t seed);

/// Mean over random solvable problems of LRTA* (total visits / distinct
/// visited states).
double measure_scrubbing(const SearchSpace& space, std::size_t n_problems, const LssConfig& cfg,
                         std::uint64_t seed);

/// Mean subgoal count of compressed optimal paths.
double measure_path_compressibility(const SearchSpace& space, std::size_t n_problems,
                                    std::uint64_t b, std::uint64_t seed);

/// Mean A* closed-list size divided by the number of states on the solution.
double measure_astar_difficulty(const SearchSpace& space, std::size_t n_problems,
                                std::uint64_t seed);

/// Mean over random goals of sum over reachable states of h*(s) - h0(s).
double measure_heuristic_error(const SearchSpace& space, std::size_t n_goals, std::uint64_t seed);

double measure_depression_width(const SearchSpace& space, std::size_t n_goals,
                                std::uint64_t seed);
double measure_depression_capacity(const SearchSpace& space, std::size_t n_goals,
                                   std::uint64_t seed);

struct ProfileConfig {
  StabilityConfig stability;
  std::uint64_t hc_bound = 250;
  LssConfig lrta;
};

/// All eight measures. Sample i of every measure is a pure function of
/// (space, seed, i), so the profile is reproducible.
ComplexityProfile profile(const SearchSpace& space, const ProfileConfig& cfg, std::uint64_t seed);

/// Single samples, as used by profile and the fixed-count measure_* functions.
double hc_probability_sample(const SearchSpace& space, const std::vector<std::uint32_t>& comp,
                             std::uint64_t b, std::uint64_t seed);
double scrubbing_sample(const SearchSpace& space, const std::vector<std::uint32_t>& comp,
                        const LssConfig& cfg, std::uint64_t seed);
double compressibility_sample(const SearchSpace& space, const std::vector<std::uint32_t>& comp,
                              std::uint64_t b, std::uint64_t seed);
double astar_difficulty_sample(const SearchSpace& space, const std::vector<std::uint32_t>& comp,
                               std::uint64_t seed);
double heuristic_error_sample(const SearchSpace& space, std::uint64_t seed);

}  // namespace rths
