#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rths/core.hpp"
#include "rths/realtime.hpp"

namespace rths {

inline constexpr std::uint64_t kDefaultHcBound = 250;

/// Partition of ground states after `levels` rounds of clique merging.
/// Each round scans abstract nodes in ascending id and groups each
/// unassigned node with the largest clique (at most 4 nodes) of unassigned
/// neighbours, lexicographically smallest on ties. Stops early when a round
/// merges nothing. Partition ids are dense.
std::vector<std::uint32_t> clique_abstraction(const SearchSpace& space, int levels);

struct DlrtaDatabase {
  int levels = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> partition;
  std::vector<StateId> representative;
  /// subgoal[a * count + b]: first state outside partition a on an optimal
  /// rep(a) -> rep(b) path; kNoState on the diagonal and for unreachable pairs.
  std::vector<StateId> subgoal;

  std::size_t partition_count() const noexcept { return representative.size(); }
  StateId subgoal_for(std::uint32_t a, std::uint32_t b) const {
    return subgoal[static_cast<std::size_t>(a) * partition_count() + b];
  }
  std::size_t entry_count() const;
};

DlrtaDatabase build_dlrta_db(const SearchSpace& space, int levels, std::uint64_t seed);

/// LRTA* toward s_AB for current partition A and goal partition B (the goal
/// itself once A == B). Retargets on every partition change and resets the
/// learned heuristic whenever the target changes. Re-entering a partition the
/// agent already left ends subgoaling: the rest is LRTA* toward the goal.
Solution solve_dlrta(const SearchSpace& space, const DlrtaDatabase& db, const Problem& problem,
                     const LssConfig& cfg);

/// Greedy subgoal chain: from each anchor, advance along the path while the
/// next path state is HC-reachable from the anchor within `b` moves; the last
/// such state becomes the next subgoal. The chain ends with the path's end.
/// `certified` is cleared if some link was not HC-reachable even one step ahead.
std::vector<StateId> compress_path(const SearchSpace& space, std::span<const StateId> path,
                                   std::uint64_t b, bool* certified = nullptr);

struct KnnRecord {
  StateId start = kNoState;
  StateId goal = kNoState;
  std::vector<StateId> chain;
};

struct KnnDatabase {
  std::uint64_t hc_bound = kDefaultHcBound;
  std::uint64_t seed = 0;
  std::vector<KnnRecord> records;
};

KnnDatabase build_knn_db(const SearchSpace& space, std::size_t n, std::uint64_t b,
                         std::uint64_t seed);

/// Index of the record solve_knn would use, or nullopt when it falls back to
/// plain LRTA*.
std::optional<std::size_t> select_knn_record(const SearchSpace& space, const KnnDatabase& db,
                                             const Problem& problem, std::size_t m,
                                             std::uint64_t b);

Solution solve_knn(const SearchSpace& space, const KnnDatabase& db, const Problem& problem,
                   std::size_t m, std::uint64_t b, const LssConfig& cfg);

/// HC regions: every member is mutually HC-reachable (within b) with its seed.
struct HcRegions {
  std::vector<std::uint32_t> region;
  std::vector<StateId> seed;

  std::size_t count() const noexcept { return seed.size(); }
};

/// Grows regions breadth-first from seeds drawn in seeded-random order.
/// Throws BuildError when the region count exceeds `max_regions`.
HcRegions hc_regions(const SearchSpace& space, std::uint64_t b, std::uint64_t seed,
                     std::size_t max_regions = std::numeric_limits<std::size_t>::max());

struct HcdpsDatabase {
  int radius = 1;
  std::uint64_t hc_bound = kDefaultHcBound;
  std::uint64_t seed = 0;
  HcRegions regions;
  std::vector<std::vector<std::uint32_t>> adjacency;
  /// records[a * count + b]: subgoal chain from seed(a) to seed(b), ending at
  /// seed(b). Empty on the diagonal and between disconnected regions.
  std::vector<std::vector<StateId>> records;
  std::vector<bool> has_record;

  std::size_t region_count() const noexcept { return regions.count(); }
  const std::vector<StateId>& record(std::uint32_t a, std::uint32_t b) const {
    return records[static_cast<std::size_t>(a) * region_count() + b];
  }
  std::size_t record_count() const;
};

inline constexpr std::size_t kDefaultMaxRegions = 6000;
/// Total subgoals stored across all records (about 4 bytes each).
inline constexpr std::size_t kDefaultMaxRecordEntries = 150'000'000;

/// HCDPS database: HC regions, optimal base paths between seeds of regions
/// within `r` region hops, all-pairs chaining over the region graph, and a
/// compressed chain per ordered pair.
/// Throws BuildError, reporting the region count, when the regions or the
/// stored subgoals exceed their budgets.
HcdpsDatabase build_hcdps_db(const SearchSpace& space, int r, std::uint64_t b,
                             std::uint64_t seed, std::size_t max_regions = kDefaultMaxRegions,
                             std::size_t max_record_entries = kDefaultMaxRecordEntries);

/// Pure hill-climbing through start -> seed(A) -> record chain -> goal.
/// Same-region problems try start -> goal directly first. A failing leg yields
/// an unsolved solution with guarantee_violation set.
Solution solve_hcdps(const SearchSpace& space, const HcdpsDatabase& db, const Problem& problem,
                     std::uint64_t b, const LssConfig& cfg);

/// Every state mutually HC-reachable with its region seed. Returns the first
/// offending state, if any.
std::optional<StateId> check_hcdps_certificate(const SearchSpace& space, const HcdpsDatabase& db);

/// Every record chain link is HC-reachable. Returns the first offending record
/// index, if any.
std::optional<std::size_t> check_knn_certificate(const SearchSpace& space, const KnnDatabase& db);

}  // namespace rths
