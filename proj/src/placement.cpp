#include "leocp/placement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace leocp {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

void check_shapes(FieldSet fields) {
  if (fields.empty()) throw std::invalid_argument("no distance fields");
  for (const auto& f : fields)
    if (f.n_sats != fields[0].n_sats || f.n_stations != fields[0].n_stations)
      throw std::invalid_argument("distance fields have inconsistent shapes");
}

void check_ids(std::span<const int> ids, FieldSet fields) {
  for (int g : ids)
    if (g < 0 || static_cast<std::size_t>(g) >= fields[0].n_stations)
      throw std::out_of_range("station id " + std::to_string(g) + " outside distance field");
}

std::vector<int> sorted_unique(std::span<const int> ids) {
  std::vector<int> v(ids.begin(), ids.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Per (snapshot, satellite) best and second-best distance among the current
// selection, so single additions and swaps are scored in one pass.
class CoverCache {
 public:
  CoverCache(FieldSet fields, std::span<const int> selected) : fields_(fields) {
    std::size_t rows = 0;
    for (const auto& f : fields_) rows += f.n_sats;
    best_.assign(rows, kInfinity);
    second_.assign(rows, kInfinity);
    owner_.assign(rows, -1);
    for (int g : selected) add(g);
  }

  void add(int g) {
    std::size_t r = 0;
    for (const auto& f : fields_) {
      for (std::size_t s = 0; s < f.n_sats; ++s, ++r) {
        const double v = f.at(s, static_cast<std::size_t>(g));
        if (v < best_[r] || owner_[r] < 0) {
          second_[r] = best_[r];
          best_[r] = v;
          owner_[r] = g;
        } else if (v < second_[r]) {
          second_[r] = v;
        }
      }
    }
  }

  double score_with(int g) const {
    double worst = 0.0;
    std::size_t r = 0;
    for (const auto& f : fields_)
      for (std::size_t s = 0; s < f.n_sats; ++s, ++r)
        worst = std::max(worst, std::min(best_[r], f.at(s, static_cast<std::size_t>(g))));
    return worst;
  }

  double score_swap(int out, int in) const {
    double worst = 0.0;
    std::size_t r = 0;
    for (const auto& f : fields_) {
      for (std::size_t s = 0; s < f.n_sats; ++s, ++r) {
        const double kept = owner_[r] == out ? second_[r] : best_[r];
        worst = std::max(worst, std::min(kept, f.at(s, static_cast<std::size_t>(in))));
      }
    }
    return worst;
  }

 private:
  FieldSet fields_;
  std::vector<double> best_;
  std::vector<double> second_;
  std::vector<int> owner_;
};

PlacementSolution make_solution(std::vector<int> selected, FieldSet fields, std::string method, std::uint64_t seed) {
  PlacementSolution sol;
  std::sort(selected.begin(), selected.end());
  sol.selected = std::move(selected);
  sol.objective_km = evaluate(sol.selected, fields);
  sol.objective_ms = distance_to_latency_ms(sol.objective_km);
  sol.method = std::move(method);
  sol.seed = seed;
  return sol;
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

void PlacementProblem::validate() const {
  if (fields.empty()) throw std::invalid_argument("placement needs at least one snapshot");
  if (candidates.empty()) throw std::invalid_argument("placement needs candidates");
  if (k < 1 || static_cast<std::size_t>(k) > candidates.size())
    throw std::invalid_argument("placement k must be in [1, |candidates|]");
  if (clusters < 1 || static_cast<std::size_t>(clusters) > fields.size())
    throw std::invalid_argument("placement clusters must be in [1, |snapshots|]");
  if (max_passes < 0) throw std::invalid_argument("placement max_passes must be >= 0");
}

double evaluate(std::span<const int> selected, FieldSet fields) {
  if (selected.empty()) throw EmptySelection();
  check_shapes(fields);
  check_ids(selected, fields);
  double worst = 0.0;
  for (const auto& f : fields) {
    for (std::size_t s = 0; s < f.n_sats; ++s) {
      double nearest = kInfinity;
      for (int g : selected) nearest = std::min(nearest, f.at(s, static_cast<std::size_t>(g)));
      worst = std::max(worst, nearest);
    }
  }
  return worst;
}

std::vector<std::size_t> select_representatives(FieldSet fields, int clusters, std::uint64_t seed) {
  check_shapes(fields);
  const std::size_t n = fields.size();
  if (clusters < 1 || static_cast<std::size_t>(clusters) > n)
    throw std::invalid_argument("cluster count must be in [1, |snapshots|]");
  const std::size_t dim = fields[0].d.size();

  // Unreachable entries are capped so standardisation stays finite.
  double max_finite = 0.0;
  for (const auto& f : fields)
    for (double v : f.d)
      if (std::isfinite(v)) max_finite = std::max(max_finite, v);
  const double cap = max_finite > 0.0 ? 2.0 * max_finite : 1.0;

  std::vector<double> x(n * dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = fields[i].d[j];
      x[i * dim + j] = std::isfinite(v) ? v : cap;
    }
  for (std::size_t j = 0; j < dim; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i * dim + j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (x[i * dim + j] - mean) * (x[i * dim + j] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    if (sd > 0.0)
      for (std::size_t i = 0; i < n; ++i) x[i * dim + j] = (x[i * dim + j] - mean) / sd;
  }
  auto point = [&](std::size_t i) { return std::span<const double>(x.data() + i * dim, dim); };

  // k-means++ seeding.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> centroids;
  {
    const std::size_t first = uniform_index(rng, n);
    centroids.emplace_back(point(first).begin(), point(first).end());
    std::vector<double> d2(n);
    while (centroids.size() < static_cast<std::size_t>(clusters)) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double best = kInfinity;
        for (const auto& c : centroids) best = std::min(best, sq_dist(point(i), c));
        d2[i] = best;
        total += best;
      }
      if (!(total > 0.0)) break;
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      std::size_t pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
      centroids.emplace_back(point(pick).begin(), point(pick).end());
    }
  }

  const std::size_t k = centroids.size();
  std::vector<std::size_t> label(n, 0);
  auto assign = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      double best = kInfinity;
      for (std::size_t c = 0; c < k; ++c) {
        const double dd = sq_dist(point(i), centroids[c]);
        if (dd < best) {
          best = dd;
          label[i] = c;
        }
      }
    }
  };

  constexpr int kMaxIterations = 100;
  constexpr double kTolerance = 1e-6;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    assign();
    double moved = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> sum(dim, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != c) continue;
        ++count;
        for (std::size_t j = 0; j < dim; ++j) sum[j] += x[i * dim + j];
      }
      if (count == 0) continue;
      for (double& v : sum) v /= static_cast<double>(count);
      moved = std::max(moved, std::sqrt(sq_dist(sum, centroids[c])));
      centroids[c] = std::move(sum);
    }
    if (moved < kTolerance) break;
  }
  assign();

  std::vector<std::size_t> reps;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t best_i = n;
    double best = kInfinity;
    for (std::size_t i = 0; i < n; ++i) {
      if (label[i] != c) continue;
      const double dd = sq_dist(point(i), centroids[c]);
      if (dd < best) {
        best = dd;
        best_i = i;
      }
    }
    if (best_i < n) reps.push_back(best_i);
  }
  std::sort(reps.begin(), reps.end());
  reps.erase(std::unique(reps.begin(), reps.end()), reps.end());
  return reps;
}

std::vector<int> greedy_select(FieldSet fields, std::span<const int> candidates, int k) {
  check_shapes(fields);
  const std::vector<int> pool = sorted_unique(candidates);
  check_ids(pool, fields);
  if (k < 1 || static_cast<std::size_t>(k) > pool.size())
    throw std::invalid_argument("greedy k must be in [1, |candidates|]");

  std::vector<int> selected;
  CoverCache cache(fields, selected);
  double objective = kInfinity;
  for (int round = 0; round < k; ++round) {
    int pick = -1;
    double pick_score = kInfinity;
    for (int g : pool) {
      if (std::find(selected.begin(), selected.end(), g) != selected.end()) continue;
      const double score = cache.score_with(g);
      if (pick < 0 || score < pick_score) {
        pick = g;
        pick_score = score;
      }
    }
    selected.push_back(pick);
    cache.add(pick);
    objective = pick_score;
  }
  if (!std::isfinite(objective))
    throw InfeasibleInstance("greedy selection leaves some satellite unreachable from every selected station");
  std::sort(selected.begin(), selected.end());
  return selected;
}

std::vector<int> local_search(std::span<const int> selected, FieldSet fields, std::span<const int> candidates,
                              int max_passes) {
  check_shapes(fields);
  std::vector<int> current = sorted_unique(selected);
  if (current.empty()) throw EmptySelection();
  const std::vector<int> pool = sorted_unique(candidates);
  check_ids(current, fields);
  check_ids(pool, fields);

  double objective = evaluate(current, fields);
  for (int pass = 0; pass < max_passes; ++pass) {
    CoverCache cache(fields, current);
    bool improved = false;
    for (std::size_t slot = 0; slot < current.size() && !improved; ++slot) {
      const int out = current[slot];
      for (int in : pool) {
        if (std::binary_search(current.begin(), current.end(), in)) continue;
        const double score = cache.score_swap(out, in);
        if (score < objective) {
          current[slot] = in;
          std::sort(current.begin(), current.end());
          objective = score;
          improved = true;
          break;
        }
      }
    }
    if (!improved) break;
  }
  return current;
}

PlacementSolution cnpa(const PlacementProblem& problem) {
  problem.validate();
  const FieldSet all(problem.fields);
  const auto reps = select_representatives(all, problem.clusters, problem.seed);
  std::vector<DistanceField> rep_fields;
  rep_fields.reserve(reps.size());
  for (std::size_t i : reps) rep_fields.push_back(problem.fields[i]);

  const FieldSet greedy_set = problem.greedy_eval == GreedyEval::Representatives ? FieldSet(rep_fields) : all;
  std::vector<int> selected = greedy_select(greedy_set, problem.candidates, problem.k);
  selected = local_search(selected, rep_fields, problem.candidates, problem.max_passes);
  return make_solution(std::move(selected), all, "cnpa", problem.seed);
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

PlacementSolution exhaustive_optimal(FieldSet fields, std::span<const int> candidates, int k, double budget) {
  check_shapes(fields);
  const std::vector<int> pool = sorted_unique(candidates);
  check_ids(pool, fields);
  if (k < 1 || static_cast<std::size_t>(k) > pool.size())
    throw std::invalid_argument("exhaustive k must be in [1, |candidates|]");
  const double combos = binomial(pool.size(), static_cast<std::size_t>(k));
  if (combos > budget)
    throw BudgetExceeded("C(" + std::to_string(pool.size()) + ", " + std::to_string(k) + ") exceeds exhaustive budget");

  std::vector<std::size_t> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<int> current(static_cast<std::size_t>(k));
  std::vector<int> best;
  double best_score = kInfinity;
  const std::size_t m = pool.size();
  for (;;) {
    for (std::size_t i = 0; i < idx.size(); ++i) current[i] = pool[idx[i]];
    const double score = evaluate(current, fields);
    if (best.empty() || score < best_score) {
      best = current;
      best_score = score;
    }
    // Next combination in lexicographic order.
    std::size_t i = idx.size();
    while (i > 0 && idx[i - 1] == m - idx.size() + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < idx.size(); ++j) idx[j] = idx[j - 1] + 1;
  }
  return make_solution(std::move(best), fields, "exhaustive", 0);
}

PlacementSolution random_select(FieldSet fields, std::span<const int> candidates, int k, std::uint64_t seed) {
  check_shapes(fields);
  std::vector<int> pool = sorted_unique(candidates);
  check_ids(pool, fields);
  if (k < 1 || static_cast<std::size_t>(k) > pool.size())
    throw std::invalid_argument("random k must be in [1, |candidates|]");
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
    const std::size_t j = i + uniform_index(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return make_solution(std::move(pool), fields, "random", seed);
}

PlacementSolution single_best(FieldSet fields, std::span<const int> candidates) {
  auto sol = exhaustive_optimal(fields, candidates, 1);
  sol.method = "single";
  return sol;
}

nlohmann::json to_json(const PlacementSolution& solution) {
  nlohmann::json j;
  j["selected_ids"] = solution.selected;
  j["objective_km"] = std::isfinite(solution.objective_km) ? nlohmann::json(solution.objective_km) : nlohmann::json();
  j["objective_ms"] = std::isfinite(solution.objective_ms) ? nlohmann::json(solution.objective_ms) : nlohmann::json();
  j["method"] = solution.method;
  j["seed"] = solution.seed;
  return j;
}

}  // namespace leocp
