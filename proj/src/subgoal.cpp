#include "rths/subgoal.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include "rths/ingest.hpp"
#include "rths/rng.hpp"

namespace rths {

namespace {

using AbstractGraph = std::vector<std::vector<std::uint32_t>>;

bool adjacent(const AbstractGraph& g, std::uint32_t a, std::uint32_t b) {
  return std::binary_search(g[a].begin(), g[a].end(), b);
}

/// Largest clique (<= 4 nodes) containing v among its unassigned neighbours,
/// lexicographically smallest among equal sizes.
std::vector<std::uint32_t> best_clique(const AbstractGraph& g, std::uint32_t v,
                                       const std::vector<bool>& assigned) {
  std::vector<std::uint32_t> cand;
  for (auto n : g[v]) {
    if (!assigned[n]) cand.push_back(n);
  }
  const std::size_t k = cand.size();
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      if (!adjacent(g, cand[a], cand[b])) continue;
      for (std::size_t c = b + 1; c < k; ++c) {
        if (adjacent(g, cand[a], cand[c]) && adjacent(g, cand[b], cand[c])) {
          return {v, cand[a], cand[b], cand[c]};
        }
      }
    }
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      if (adjacent(g, cand[a], cand[b])) return {v, cand[a], cand[b]};
    }
  }
  if (k > 0) return {v, cand[0]};
  return {v};
}

}  // namespace

std::vector<std::uint32_t> clique_abstraction(const SearchSpace& space, int levels) {
  if (levels < 1) throw UsageError("abstraction needs at least one level");
  const std::size_t n = space.size();
  std::vector<std::uint32_t> ground(n);
  std::iota(ground.begin(), ground.end(), 0U);
  AbstractGraph graph(n);
  for (StateId s = 0; s < n; ++s) {
    for (const auto& e : space.neighbors(s)) graph[s].push_back(e.to);
  }

  for (int level = 0; level < levels; ++level) {
    const std::size_t m = graph.size();
    std::vector<bool> assigned(m, false);
    std::vector<std::uint32_t> parent(m, 0);
    std::uint32_t next = 0;
    bool merged = false;
    for (std::uint32_t v = 0; v < m; ++v) {
      if (assigned[v]) continue;
      const auto clique = best_clique(graph, v, assigned);
      merged = merged || clique.size() > 1;
      for (auto u : clique) {
        assigned[u] = true;
        parent[u] = next;
      }
      ++next;
    }
    if (!merged) break;
    AbstractGraph up(next);
    for (std::uint32_t v = 0; v < m; ++v) {
      for (auto u : graph[v]) {
        if (parent[u] != parent[v]) up[parent[v]].push_back(parent[u]);
      }
    }
    for (auto& list : up) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    for (auto& g : ground) g = parent[g];
    graph = std::move(up);
  }
  return ground;
}

std::size_t DlrtaDatabase::entry_count() const {
  return static_cast<std::size_t>(
      std::count_if(subgoal.begin(), subgoal.end(), [](StateId s) { return s != kNoState; }));
}

DlrtaDatabase build_dlrta_db(const SearchSpace& space, int levels, std::uint64_t seed) {
  DlrtaDatabase db;
  db.levels = levels;
  db.seed = seed;
  db.partition = clique_abstraction(space, levels);
  const std::size_t count =
      db.partition.empty() ? 0 : *std::max_element(db.partition.begin(), db.partition.end()) + 1;
  std::vector<std::vector<StateId>> members(count);
  for (StateId s = 0; s < space.size(); ++s) members[db.partition[s]].push_back(s);
  Rng rng(seed);
  db.representative.resize(count);
  for (std::size_t p = 0; p < count; ++p) {
    db.representative[p] = members[p][rng.below(members[p].size())];
  }
  db.subgoal.assign(count * count, kNoState);
  // one shortest-path tree per source representative serves every target
  for (std::size_t a = 0; a < count; ++a) {
    const auto tree = dijkstra_tree(space, db.representative[a]);
    for (std::size_t b = 0; b < count; ++b) {
      if (a == b) continue;
      const auto path = tree.path_to(db.representative[b]);
      for (StateId s : path) {
        if (db.partition[s] != a) {
          db.subgoal[a * count + b] = s;
          break;
        }
      }
    }
  }
  return db;
}

Solution solve_dlrta(const SearchSpace& space, const DlrtaDatabase& db, const Problem& problem,
                     const LssConfig& cfg) {
  if (db.partition.size() != space.size()) throw UsageError("database built for another space");
  Solution sol;
  sol.path = {problem.start};
  std::uint64_t budget = cfg.cap_for(space);
  const std::uint32_t goal_part = db.partition[problem.goal];
  // subgoals come from representative-to-representative paths, so
  // neighbouring partitions can hand the agent back and forth; re-entering a
  // partition already left switches to plain LRTA* toward the global goal
  std::vector<bool> left(db.partition_count(), false);
  bool global = false;
  auto target_for = [&](StateId s) {
    const std::uint32_t here = db.partition[s];
    if (global || here == goal_part) return problem.goal;
    const StateId sub = db.subgoal_for(here, goal_part);
    return sub == kNoState ? problem.goal : sub;
  };
  HeuristicOverlay overlay(space, target_for(problem.start));
  while (sol.path.back() != problem.goal) {
    const StateId s = sol.path.back();
    const StateId target = target_for(s);
    if (target != overlay.target()) overlay.reset(target);
    const std::uint32_t part = db.partition[s];
    lrta_leg(space, overlay, cfg.depth, budget, sol, [&](StateId now) {
      return !global && db.partition[now] != part;
    });
    if (budget == 0 && sol.path.back() != problem.goal) {
      sol.step_cap_hit = true;
      break;
    }
    if (sol.path.back() == s) break;  // stuck on an isolated state
    if (!global) {
      left[part] = true;
      if (left[db.partition[sol.path.back()]]) global = true;
    }
  }
  sol.solved = sol.path.back() == problem.goal;
  sol.tally_visits();
  return sol;
}

namespace {

/// Greedy compression over path[from..]; returns the chosen path indices.
std::vector<std::size_t> compress_indices(const SearchSpace& space, std::span<const StateId> path,
                                          std::size_t from, std::uint64_t b, bool* certified) {
  std::vector<std::size_t> picks;
  if (path.empty()) return picks;
  const std::size_t last = path.size() - 1;
  if (from >= last) {
    picks.push_back(last);
    return picks;
  }
  std::size_t anchor = from;
  while (anchor < last) {
    std::size_t j = anchor + 1;
    if (certified && !hc_reachable(space, path[anchor], path[j], b)) *certified = false;
    while (j < last && hc_reachable(space, path[anchor], path[j + 1], b)) ++j;
    picks.push_back(j);
    anchor = j;
  }
  return picks;
}

}  // namespace

std::vector<StateId> compress_path(const SearchSpace& space, std::span<const StateId> path,
                                   std::uint64_t b, bool* certified) {
  if (b < 1) throw UsageError("hill-climbing bound must be at least 1");
  if (certified) *certified = true;
  std::vector<StateId> chain;
  for (auto i : compress_indices(space, path, 0, b, certified)) chain.push_back(path[i]);
  return chain;
}

KnnDatabase build_knn_db(const SearchSpace& space, std::size_t n, std::uint64_t b,
                         std::uint64_t seed) {
  if (n < 1) throw UsageError("kNN database needs at least one record");
  if (space.size() < 2) throw BuildError("space too small for kNN records");
  KnnDatabase db;
  db.hc_bound = b;
  db.seed = seed;
  db.records.reserve(n);
  const auto comp = components(space);
  Rng rng(seed);
  while (db.records.size() < n) {
    Problem p;
    try {
      p = random_solvable_problem(space, comp, rng);
    } catch (const SamplingError&) {
      throw BuildError("no solvable problems to build kNN records from");
    }
    auto [sol, stats] = astar(space, p);
    if (!sol.solved) continue;
    KnnRecord rec;
    rec.start = p.start;
    rec.goal = p.goal;
    rec.chain = compress_path(space, sol.path, b);
    db.records.push_back(std::move(rec));
  }
  return db;
}

std::optional<std::size_t> select_knn_record(const SearchSpace& space, const KnnDatabase& db,
                                             const Problem& problem, std::size_t m,
                                             std::uint64_t b) {
  if (m == 0 || db.records.empty()) return std::nullopt;
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(db.records.size());
  for (std::size_t i = 0; i < db.records.size(); ++i) {
    const auto& r = db.records[i];
    ranked.emplace_back(space.h(problem.start, r.start) + space.h(problem.goal, r.goal), i);
  }
  const std::size_t k = std::min(m, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end());
  for (std::size_t i = 0; i < k; ++i) {
    const auto& r = db.records[ranked[i].second];
    if (hc_reachable(space, problem.start, r.start, b) &&
        hc_reachable(space, r.goal, problem.goal, b)) {
      return ranked[i].second;
    }
  }
  return std::nullopt;
}

Solution solve_knn(const SearchSpace& space, const KnnDatabase& db, const Problem& problem,
                   std::size_t m, std::uint64_t b, const LssConfig& cfg) {
  const auto pick = select_knn_record(space, db, problem, m, b);
  if (!pick) return lrta_star(space, problem, cfg);

  const auto& rec = db.records[*pick];
  Solution sol;
  sol.path = {problem.start};
  std::uint64_t budget = cfg.cap_for(space);
  append_hill_climb(space, rec.start, b, sol);
  HeuristicOverlay overlay(space, rec.start);
  bool ok = true;
  for (StateId sub : rec.chain) {
    overlay.reset(sub);
    if (!lrta_leg(space, overlay, cfg.depth, budget, sol)) {
      ok = false;
      sol.step_cap_hit = budget == 0;
      break;
    }
  }
  if (ok) ok = append_hill_climb(space, problem.goal, b, sol);
  sol.solved = ok && sol.path.back() == problem.goal;
  sol.tally_visits();
  return sol;
}

HcRegions hc_regions(const SearchSpace& space, std::uint64_t b, std::uint64_t seed,
                     std::size_t max_regions) {
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  HcRegions out;
  out.region.assign(space.size(), kUnset);
  std::vector<StateId> order(space.size());
  std::iota(order.begin(), order.end(), StateId{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  // rejected[s] == r: s already failed the mutual test against region r's seed
  std::vector<std::uint32_t> rejected(space.size(), kUnset);
  std::vector<StateId> queue;
  for (StateId seed_state : order) {
    if (out.region[seed_state] != kUnset) continue;
    const auto r = static_cast<std::uint32_t>(out.seed.size());
    if (out.seed.size() >= max_regions) {
      throw BuildError("HC region count exceeds the budget of " + std::to_string(max_regions));
    }
    out.seed.push_back(seed_state);
    out.region[seed_state] = r;
    queue.assign(1, seed_state);
    for (std::size_t i = 0; i < queue.size(); ++i) {
      for (const auto& e : space.neighbors(queue[i])) {
        const StateId n = e.to;
        if (out.region[n] != kUnset || rejected[n] == r) continue;
        if (hc_reachable(space, n, seed_state, b) && hc_reachable(space, seed_state, n, b)) {
          out.region[n] = r;
          queue.push_back(n);
        } else {
          rejected[n] = r;
        }
      }
    }
  }
  return out;
}

std::size_t HcdpsDatabase::record_count() const {
  return static_cast<std::size_t>(std::count(has_record.begin(), has_record.end(), true));
}

HcdpsDatabase build_hcdps_db(const SearchSpace& space, int r, std::uint64_t b,
                             std::uint64_t seed, std::size_t max_regions,
                             std::size_t max_record_entries) {
  if (r < 1) throw UsageError("HCDPS neighbourhood radius must be at least 1");
  HcdpsDatabase db;
  db.radius = r;
  db.hc_bound = b;
  db.seed = seed;
  db.regions = hc_regions(space, b, seed, max_regions);
  const std::size_t count = db.regions.count();

  db.adjacency.assign(count, {});
  for (StateId s = 0; s < space.size(); ++s) {
    for (const auto& e : space.neighbors(s)) {
      const auto a = db.regions.region[s];
      const auto c = db.regions.region[e.to];
      if (a != c) db.adjacency[a].push_back(c);
    }
  }
  for (auto& list : db.adjacency) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  // base paths between seeds of regions within r hops
  struct BasePath {
    std::uint32_t to;
    double cost;
    std::vector<StateId> path;
  };
  std::vector<std::vector<BasePath>> base(count);
  std::vector<int> hops(count, -1);
  std::vector<std::uint32_t> touched;
  for (std::uint32_t a = 0; a < count; ++a) {
    touched.assign(1, a);
    hops[a] = 0;
    for (std::size_t i = 0; i < touched.size(); ++i) {
      const auto u = touched[i];
      if (hops[u] == r) continue;
      for (auto v : db.adjacency[u]) {
        if (hops[v] < 0) {
          hops[v] = hops[u] + 1;
          touched.push_back(v);
        }
      }
    }
    std::vector<std::uint32_t> near(touched.begin() + 1, touched.end());
    std::sort(near.begin(), near.end());
    for (auto c : near) {
      if (c < a) continue;
      auto [sol, stats] = astar(space, {db.regions.seed[a], db.regions.seed[c]});
      if (!sol.solved) continue;
      base[a].push_back({c, sol.cost, sol.path});
      std::vector<StateId> back(sol.path.rbegin(), sol.path.rend());
      base[c].push_back({a, sol.cost, std::move(back)});
    }
    for (auto u : touched) hops[u] = -1;
  }
  for (auto& list : base) {
    std::sort(list.begin(), list.end(),
              [](const BasePath& x, const BasePath& y) { return x.to < y.to; });
  }

  // all-pairs chaining: shortest-path tree over the region graph per source,
  // with each record's chain extended from its tree parent's chain
  db.records.assign(count * count, {});
  db.has_record.assign(count * count, false);
  std::vector<double> dist(count);
  std::vector<std::uint32_t> pred(count);
  std::vector<const BasePath*> via(count);
  std::vector<std::vector<StateId>> assembled(count);
  std::vector<std::size_t> resume(count);  // path index of the penultimate anchor
  std::vector<std::uint32_t> settled;
  std::size_t entries = 0;
  for (std::uint32_t a = 0; a < count; ++a) {
    std::fill(dist.begin(), dist.end(), kInfinity);
    std::fill(pred.begin(), pred.end(), std::numeric_limits<std::uint32_t>::max());
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[a] = 0;
    pq.push({0, a});
    settled.clear();
    std::vector<bool> done(count, false);
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (done[u]) continue;
      done[u] = true;
      settled.push_back(u);
      for (const auto& bp : base[u]) {
        const double nd = d + bp.cost;
        if (nd < dist[bp.to] - kCostEpsilon ||
            (std::abs(nd - dist[bp.to]) <= kCostEpsilon && !done[bp.to] && u < pred[bp.to])) {
          dist[bp.to] = nd;
          pred[bp.to] = u;
          via[bp.to] = &bp;
          pq.push({nd, bp.to});
        }
      }
    }
    // settled order is a topological order of the tree
    assembled[a] = {db.regions.seed[a]};
    resume[a] = 0;
    for (std::size_t k = 1; k < settled.size(); ++k) {
      const auto c = settled[k];
      const auto p = pred[c];
      auto& path = assembled[c];
      path = assembled[p];
      path.insert(path.end(), via[c]->path.begin() + 1, via[c]->path.end());
      const auto& parent_chain = db.records[static_cast<std::size_t>(a) * count + p];
      // anchors before the parent's last subgoal are unaffected by extending
      // the path, so compression resumes from the parent's penultimate anchor
      std::vector<StateId> chain;
      std::size_t from = 0;
      if (parent_chain.size() >= 2) {
        chain.assign(parent_chain.begin(), parent_chain.end() - 1);
        from = resume[p];
      }
      const auto picks = compress_indices(space, path, from, b, nullptr);
      resume[c] = picks.size() >= 2 ? picks[picks.size() - 2] : from;
      for (auto i : picks) chain.push_back(path[i]);
      entries += chain.size();
      if (entries > max_record_entries) {
        throw BuildError("HCDPS records exceed the memory budget of " +
                         std::to_string(max_record_entries) + " subgoals (" +
                         std::to_string(count) + " HC regions)");
      }
      db.records[static_cast<std::size_t>(a) * count + c] = std::move(chain);
      db.has_record[static_cast<std::size_t>(a) * count + c] = true;
    }
    for (auto u : settled) assembled[u].clear();
  }
  return db;
}

Solution solve_hcdps(const SearchSpace& space, const HcdpsDatabase& db, const Problem& problem,
                     std::uint64_t b, const LssConfig& cfg) {
  if (db.regions.region.size() != space.size()) throw UsageError("database built for another space");
  Solution sol;
  sol.path = {problem.start};
  const auto ra = db.regions.region[problem.start];
  const auto rb = db.regions.region[problem.goal];
  auto fail = [&]() {
    sol.solved = false;
    sol.guarantee_violation = true;
    sol.tally_visits();
    return sol;
  };
  if (ra == rb) {
    if (!append_hill_climb(space, problem.goal, b, sol)) {
      if (!append_hill_climb(space, db.regions.seed[ra], b, sol)) return fail();
      if (!append_hill_climb(space, problem.goal, b, sol)) return fail();
    }
  } else {
    if (!db.has_record[static_cast<std::size_t>(ra) * db.region_count() + rb]) return fail();
    if (!append_hill_climb(space, db.regions.seed[ra], b, sol)) return fail();
    for (StateId sub : db.record(ra, rb)) {
      if (!append_hill_climb(space, sub, b, sol)) return fail();
    }
    if (!append_hill_climb(space, problem.goal, b, sol)) return fail();
  }
  if (sol.moves() > cfg.cap_for(space)) {
    sol.step_cap_hit = true;
    sol.tally_visits();
    return sol;
  }
  sol.solved = true;
  sol.tally_visits();
  return sol;
}

std::optional<StateId> check_hcdps_certificate(const SearchSpace& space, const HcdpsDatabase& db) {
  for (StateId s = 0; s < space.size(); ++s) {
    const StateId seed = db.regions.seed[db.regions.region[s]];
    if (!hc_reachable(space, s, seed, db.hc_bound) || !hc_reachable(space, seed, s, db.hc_bound)) {
      return s;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> check_knn_certificate(const SearchSpace& space, const KnnDatabase& db) {
  for (std::size_t i = 0; i < db.records.size(); ++i) {
    const auto& r = db.records[i];
    if (r.chain.empty() || r.chain.back() != r.goal) return i;
    StateId prev = r.start;
    for (StateId sub : r.chain) {
      if (!hc_reachable(space, prev, sub, db.hc_bound)) return i;
      prev = sub;
    }
  }
  return std::nullopt;
}

}  // namespace rths
