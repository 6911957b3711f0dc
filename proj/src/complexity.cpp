#include "rths/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "rths/ingest.hpp"
#include "rths/rng.hpp"
#include "rths/subgoal.hpp"

namespace rths {

std::size_t DepressionAnalysis::width() const {
  return static_cast<std::size_t>(std::count(depressed.begin(), depressed.end(), true));
}

double DepressionAnalysis::capacity() const {
  double total = 0;
  for (std::size_t s = 0; s < depth.size(); ++s) {
    if (depressed[s]) total += depth[s];
  }
  return total;
}

DepressionAnalysis find_depressions(const SearchSpace& space, StateId goal) {
  if (!space.valid(goal)) throw UsageError("goal state out of range");
  std::vector<double> h(space.size());
  for (StateId s = 0; s < space.size(); ++s) h[s] = space.h(s, goal);
  return find_depressions(space, h, goal);
}

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
constexpr std::int64_t kNoMark = std::numeric_limits<std::int64_t>::min();

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0U); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
};

bool subset(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

// Level-set sweep over distinct heuristic values m. At level m the
// components of {h < m} are "blocks"; states with h == m are plateau states
// and beta(x) is the set of blocks adjacent to plateau state x. A maximal
// depression whose lowest surrounding value is m is a component of
// blocks(Sigma) plus the plateau states with beta inside Sigma, where some
// plateau state adjacent to it has beta outside Sigma. The smallest such set
// containing a block B uses Sigma = {B}; for a plateau state x, Sigma =
// beta(x). Qualifying at level m means depth >= m - h, and the deepest level
// wins. Marks on blocks are pushed down an explicit merge tree.
DepressionAnalysis find_depressions(const SearchSpace& space, std::span<const double> h,
                                    StateId goal) {
  const std::size_t n = space.size();
  if (h.size() != n) throw UsageError("heuristic vector size differs from state count");
  if (!space.valid(goal)) throw UsageError("goal state out of range");

  std::vector<std::int64_t> key(n);
  for (std::size_t s = 0; s < n; ++s) key[s] = std::llround(h[s] / kCostEpsilon);
  std::vector<StateId> order(n);
  std::iota(order.begin(), order.end(), StateId{0});
  std::sort(order.begin(), order.end(), [&](StateId a, StateId b) {
    return key[a] != key[b] ? key[a] < key[b] : a < b;
  });

  UnionFind uf(n);
  std::vector<bool> processed(n, false);
  // merge tree: leaves 0..n-1 are states, later nodes are unions
  std::vector<std::uint32_t> node_parent(n, kNone);
  std::vector<std::int64_t> mark(n, kNoMark);
  std::vector<std::uint32_t> root_node(n);
  std::iota(root_node.begin(), root_node.end(), 0U);
  // block counts per union-find root, valid only when stamp == current level
  std::vector<std::uint32_t> count(n, 0);
  std::vector<std::size_t> stamp(n, std::numeric_limits<std::size_t>::max());

  std::vector<std::uint32_t> beta_off;
  std::vector<std::uint32_t> beta;
  std::vector<std::uint32_t> touched_blocks;
  std::vector<std::uint32_t> block_node(n, kNone);
  std::vector<bool> in_goal_free(n, false);

  std::size_t level = 0;
  for (std::size_t i = 0; i < n; ++level) {
    std::size_t j = i;
    while (j < n && key[order[j]] == key[order[i]]) ++j;
    const std::int64_t m = key[order[i]];
    const std::span<const StateId> plateau(order.data() + i, j - i);

    auto effective = [&](std::uint32_t r) { return stamp[r] == level ? count[r] : 1U; };

    // beta sets and the blocks they mention, before any plateau union
    beta_off.assign(1, 0);
    beta.clear();
    touched_blocks.clear();
    for (StateId x : plateau) {
      const std::size_t first = beta.size();
      for (const auto& e : space.neighbors(x)) {
        if (processed[e.to]) beta.push_back(uf.find(e.to));
      }
      std::sort(beta.begin() + static_cast<std::ptrdiff_t>(first), beta.end());
      beta.erase(std::unique(beta.begin() + static_cast<std::ptrdiff_t>(first), beta.end()),
                 beta.end());
      for (std::size_t k = first; k < beta.size(); ++k) {
        if (block_node[beta[k]] == kNone) {
          block_node[beta[k]] = root_node[beta[k]];
          touched_blocks.push_back(beta[k]);
        }
      }
      beta_off.push_back(static_cast<std::uint32_t>(beta.size()));
    }
    std::map<StateId, std::size_t> plateau_index;
    auto beta_of = [&](std::size_t k) {
      return std::span<const std::uint32_t>(beta.data() + beta_off[k],
                                            beta_off[k + 1] - beta_off[k]);
    };

    // goal membership test for the smallest depression over block set sigma
    std::uint32_t goal_block = kNone;
    std::size_t goal_k = kNone;
    std::vector<std::size_t> goal_free_rim;  // non-free plateau states next to F(goal)
    if (key[goal] < m) goal_block = uf.find(goal);
    if (key[goal] == m) {
      for (std::size_t k = 0; k < plateau.size(); ++k) plateau_index[plateau[k]] = k;
      goal_k = plateau_index[goal];
      if (beta_of(goal_k).empty()) {
        std::vector<StateId> queue{goal};
        in_goal_free[goal] = true;
        for (std::size_t q = 0; q < queue.size(); ++q) {
          for (const auto& e : space.neighbors(queue[q])) {
            if (key[e.to] != m || in_goal_free[e.to]) continue;
            const std::size_t k = plateau_index[e.to];
            if (beta_of(k).empty()) {
              in_goal_free[e.to] = true;
              queue.push_back(e.to);
            } else {
              goal_free_rim.push_back(k);
            }
          }
        }
      }
    }
    auto goal_in = [&](std::span<const std::uint32_t> sigma) {
      if (key[goal] < m) return std::binary_search(sigma.begin(), sigma.end(), goal_block);
      if (key[goal] > m) return false;
      if (!beta_of(goal_k).empty()) return subset(beta_of(goal_k), sigma);
      return std::any_of(goal_free_rim.begin(), goal_free_rim.end(),
                         [&](std::size_t k) { return subset(beta_of(k), sigma); });
    };

    // grow components of {h <= m}
    for (StateId x : plateau) {
      processed[x] = true;
      stamp[x] = level;
      count[x] = 0;
    }
    for (StateId x : plateau) {
      for (const auto& e : space.neighbors(x)) {
        if (!processed[e.to]) continue;
        const auto a = uf.find(x);
        const auto b = uf.find(e.to);
        if (a == b) continue;
        const auto total = effective(a) + effective(b);
        const auto node = static_cast<std::uint32_t>(node_parent.size());
        node_parent.push_back(kNone);
        mark.push_back(kNoMark);
        node_parent[root_node[a]] = node;
        node_parent[root_node[b]] = node;
        const auto r = std::min(a, b);
        uf.parent[std::max(a, b)] = r;
        root_node[r] = node;
        count[r] = total;
        stamp[r] = level;
      }
    }

    for (auto block : touched_blocks) {
      const std::uint32_t only[1] = {block};
      if (effective(uf.find(block)) >= 2 && !goal_in(only)) mark[block_node[block]] = m;
      block_node[block] = kNone;
    }
    for (std::size_t k = 0; k < plateau.size(); ++k) {
      const StateId x = plateau[k];
      const auto blocks = effective(uf.find(x));
      const auto bx = beta_of(k);
      const bool ok = bx.empty() ? blocks >= 1 && !in_goal_free[x]
                                 : blocks > bx.size() && !goal_in(bx);
      if (ok) mark[x] = m;
    }
    for (StateId x : plateau) in_goal_free[x] = false;
    i = j;
  }

  // push marks down: a mark on a node covers every state below it
  const std::size_t nodes = node_parent.size();
  std::vector<std::int64_t> best(nodes, kNoMark);
  for (std::size_t k = nodes; k-- > 0;) {
    best[k] = mark[k];
    if (node_parent[k] != kNone) best[k] = std::max(best[k], best[node_parent[k]]);
  }

  DepressionAnalysis out;
  out.goal = goal;
  out.depressed.assign(n, false);
  out.depth.assign(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    if (best[s] == kNoMark) continue;
    out.depressed[s] = true;
    out.depth[s] = static_cast<double>(best[s] - key[s]) * kCostEpsilon;
  }
  std::vector<bool> seen(n, false);
  for (StateId s = 0; s < n; ++s) {
    if (!out.depressed[s] || seen[s]) continue;
    std::vector<StateId> basin{s};
    seen[s] = true;
    for (std::size_t q = 0; q < basin.size(); ++q) {
      for (const auto& e : space.neighbors(basin[q])) {
        if (out.depressed[e.to] && !seen[e.to]) {
          seen[e.to] = true;
          basin.push_back(e.to);
        }
      }
    }
    std::sort(basin.begin(), basin.end());
    out.basins.push_back(std::move(basin));
  }
  return out;
}

void StabilityConfig::validate() const {
  if (min_samples < 1 || min_samples > max_samples) {
    throw UsageError("stability needs 1 <= min_samples <= max_samples");
  }
  if (window < 1) throw UsageError("stability window must be positive");
  if (!(tolerance > 0)) throw UsageError("stability tolerance must be positive");
}

SampledMean sample_until_stable(const StabilityConfig& cfg,
                                const std::function<double(std::size_t)>& sample) {
  cfg.validate();
  std::vector<double> running;  // running[k] = mean of the first k+1 samples
  running.reserve(cfg.max_samples);
  double sum = 0;
  for (std::size_t i = 0; i < cfg.max_samples; ++i) {
    sum += sample(i);
    const std::size_t n = i + 1;
    running.push_back(sum / static_cast<double>(n));
    if (n >= cfg.min_samples && n > cfg.window) {
      const double now = running.back();
      const double then = running[n - 1 - cfg.window];
      if (std::abs(now - then) <= cfg.tolerance * std::abs(now)) return {now, n, false};
    }
  }
  return {running.back(), cfg.max_samples, true};
}

std::string_view measure_name(Measure m) {
  switch (m) {
    case Measure::kHcRegionSize: return "hc_region_size";
    case Measure::kHcProbability: return "hc_probability";
    case Measure::kScrubbing: return "scrubbing_complexity";
    case Measure::kPathCompressibility: return "path_compressibility";
    case Measure::kAstarDifficulty: return "astar_difficulty";
    case Measure::kHeuristicError: return "heuristic_error";
    case Measure::kDepressionWidth: return "depression_width";
    case Measure::kDepressionCapacity: return "depression_capacity";
  }
  return "unknown";
}

double measure_hc_region_size(const SearchSpace& space, std::uint64_t b, std::uint64_t seed) {
  if (space.size() == 0) throw UsageError("empty search space");
  const auto regions = hc_regions(space, b, seed);
  return static_cast<double>(space.size()) / static_cast<double>(regions.count());
}

double hc_probability_sample(const SearchSpace& space, const std::vector<std::uint32_t>& comp,
                             std::uint64_t b, std::uint64_t seed) {
  if (space.size() < 2) throw UsageError("need at least two states");
  Rng rng(seed);
  const auto s = static_cast<StateId>(rng.below(space.size()));
  auto g = static_cast<StateId>(rng.below(space.size() - 1));
  if (g >= s) ++g;
  if (comp[s] != comp[g]) return 0.0;
  return hc_reachable(space, s, g, b) ? 1.0 : 0.0;
}

double scrubbing_sample(const SearchSpace& space, const std::vector<std::uint32_t>& comp,
                        const LssConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  const Problem p = random_solvable_problem(space, comp, rng);
  const Solution sol = lrta_star(space, p, cfg);
  std::uint64_t visits = 0;
  for (const auto& [s, c] : sol.visit_counts) visits += c;
  return static_cast<double>(visits) / static_cast<double>(sol.visit_counts.size());
}

double compressibility_sample(const SearchSpace& space, const std::vector<std::uint32_t>& comp,
                              std::uint64_t b, std::uint64_t seed) {
  Rng rng(seed);
  const Problem p = random_solvable_problem(space, comp, rng);
  const auto [sol, stats] = astar(space, p);
  return static_cast<double>(compress_path(space, sol.path, b).size());
}

double astar_difficulty_sample(const SearchSpace& space, const std::vector<std::uint32_t>& comp,
                               std::uint64_t seed) {
  Rng rng(seed);
  const Problem p = random_solvable_problem(space, comp, rng);
  const auto [sol, stats] = astar(space, p);
  return static_cast<double>(stats.closed) / static_cast<double>(sol.path.size());
}

double heuristic_error_sample(const SearchSpace& space, std::uint64_t seed) {
  if (space.size() == 0) throw UsageError("empty search space");
  Rng rng(seed);
  const auto goal = static_cast<StateId>(rng.below(space.size()));
  const auto dist = dijkstra_from(space, goal);
  double total = 0;
  for (StateId s = 0; s < space.size(); ++s) {
    if (dist[s] != kInfinity) total += dist[s] - space.h(s, goal);
  }
  return total;
}

namespace {

StateId random_goal(const SearchSpace& space, std::uint64_t seed) {
  if (space.size() == 0) throw UsageError("empty search space");
  Rng rng(seed);
  return static_cast<StateId>(rng.below(space.size()));
}

double fixed_mean(std::size_t n, const std::function<double(std::size_t)>& sample) {
  if (n == 0) throw UsageError("sample count must be positive");
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += sample(i);
  return sum / static_cast<double>(n);
}

std::uint64_t stream(std::uint64_t seed, Measure m, std::size_t i) {
  return derive_seed(seed, static_cast<std::uint64_t>(m), i);
}

}  // namespace

double measure_hc_probability(const SearchSpace& space, std::size_t n_pairs, std::uint64_t b,
                              std::uint64_t seed) {
  const auto comp = components(space);
  return fixed_mean(n_pairs, [&](std::size_t i) {
    return hc_probability_sample(space, comp, b, stream(seed, Measure::kHcProbability, i));
  });
}

double measure_scrubbing(const SearchSpace& space, std::size_t n_problems, const LssConfig& cfg,
                         std::uint64_t seed) {
  const auto comp = components(space);
  return fixed_mean(n_problems, [&](std::size_t i) {
    return scrubbing_sample(space, comp, cfg, stream(seed, Measure::kScrubbing, i));
  });
}

double measure_path_compressibility(const SearchSpace& space, std::size_t n_problems,
                                    std::uint64_t b, std::uint64_t seed) {
  const auto comp = components(space);
  return fixed_mean(n_problems, [&](std::size_t i) {
    return compressibility_sample(space, comp, b, stream(seed, Measure::kPathCompressibility, i));
  });
}

double measure_astar_difficulty(const SearchSpace& space, std::size_t n_problems,
                                std::uint64_t seed) {
  const auto comp = components(space);
  return fixed_mean(n_problems, [&](std::size_t i) {
    return astar_difficulty_sample(space, comp, stream(seed, Measure::kAstarDifficulty, i));
  });
}

double measure_heuristic_error(const SearchSpace& space, std::size_t n_goals, std::uint64_t seed) {
  return fixed_mean(n_goals, [&](std::size_t i) {
    return heuristic_error_sample(space, stream(seed, Measure::kHeuristicError, i));
  });
}

double measure_depression_width(const SearchSpace& space, std::size_t n_goals,
                                std::uint64_t seed) {
  return fixed_mean(n_goals, [&](std::size_t i) {
    const auto goal = random_goal(space, stream(seed, Measure::kDepressionWidth, i));
    return static_cast<double>(find_depressions(space, goal).width());
  });
}

double measure_depression_capacity(const SearchSpace& space, std::size_t n_goals,
                                   std::uint64_t seed) {
  return fixed_mean(n_goals, [&](std::size_t i) {
    const auto goal = random_goal(space, stream(seed, Measure::kDepressionWidth, i));
    return find_depressions(space, goal).capacity();
  });
}

ComplexityProfile profile(const SearchSpace& space, const ProfileConfig& cfg, std::uint64_t seed) {
  cfg.stability.validate();
  if (space.size() < 2) throw UsageError("profiling needs at least two states");
  ComplexityProfile out;
  out.seed = seed;
  const auto comp = components(space);
  auto put = [&](Measure m, const SampledMean& r) {
    const auto k = static_cast<std::size_t>(m);
    out.value[k] = r.mean;
    out.samples[k] = r.samples;
    out.unstable[k] = r.unstable;
  };

  {
    const auto regions = hc_regions(space, cfg.hc_bound, stream(seed, Measure::kHcRegionSize, 0));
    put(Measure::kHcRegionSize,
        {static_cast<double>(space.size()) / static_cast<double>(regions.count()),
         regions.count(), false});
  }
  put(Measure::kHcProbability, sample_until_stable(cfg.stability, [&](std::size_t i) {
        return hc_probability_sample(space, comp, cfg.hc_bound,
                                     stream(seed, Measure::kHcProbability, i));
      }));
  put(Measure::kScrubbing, sample_until_stable(cfg.stability, [&](std::size_t i) {
        return scrubbing_sample(space, comp, cfg.lrta, stream(seed, Measure::kScrubbing, i));
      }));
  put(Measure::kPathCompressibility, sample_until_stable(cfg.stability, [&](std::size_t i) {
        return compressibility_sample(space, comp, cfg.hc_bound,
                                      stream(seed, Measure::kPathCompressibility, i));
      }));
  put(Measure::kAstarDifficulty, sample_until_stable(cfg.stability, [&](std::size_t i) {
        return astar_difficulty_sample(space, comp, stream(seed, Measure::kAstarDifficulty, i));
      }));
  put(Measure::kHeuristicError, sample_until_stable(cfg.stability, [&](std::size_t i) {
        return heuristic_error_sample(space, stream(seed, Measure::kHeuristicError, i));
      }));

  // width and capacity share one goal stream
  std::vector<std::pair<double, double>> cache;
  auto depression = [&](std::size_t i) {
    while (cache.size() <= i) {
      const auto goal =
          random_goal(space, stream(seed, Measure::kDepressionWidth, cache.size()));
      const auto a = find_depressions(space, goal);
      cache.emplace_back(static_cast<double>(a.width()), a.capacity());
    }
    return cache[i];
  };
  put(Measure::kDepressionWidth, sample_until_stable(cfg.stability, [&](std::size_t i) {
        return depression(i).first;
      }));
  put(Measure::kDepressionCapacity, sample_until_stable(cfg.stability, [&](std::size_t i) {
        return depression(i).second;
      }));
  return out;
}

}  // namespace rths
