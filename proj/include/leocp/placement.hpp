#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "leocp/topology.hpp"

namespace leocp {

struct EmptySelection : std::invalid_argument {
  EmptySelection() : std::invalid_argument("placement selection is empty") {}
};

struct InfeasibleInstance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Which snapshot set the greedy rounds score against.
enum class GreedyEval { Representatives, AllSnapshots };

struct PlacementProblem {
  std::vector<DistanceField> fields;
  std::vector<int> candidates;
  int k = 1;
  int clusters = 1;
  std::uint64_t seed = 0;
  GreedyEval greedy_eval = GreedyEval::Representatives;
  int max_passes = 50;

  void validate() const;
};

struct PlacementSolution {
  std::vector<int> selected;  // ascending gs ids
  double objective_km = kInfinity;
  double objective_ms = kInfinity;
  std::string method;
  std::uint64_t seed = 0;
};

using FieldSet = std::span<const DistanceField>;

/// Worst case over snapshots and satellites of the distance to the nearest
/// selected station; +inf when some satellite cannot reach any of them.
double evaluate(std::span<const int> selected, FieldSet fields);

/// Indices into `fields` of the cluster representatives, ascending.
std::vector<std::size_t> select_representatives(FieldSet fields, int clusters, std::uint64_t seed);

std::vector<int> greedy_select(FieldSet fields, std::span<const int> candidates, int k);

std::vector<int> local_search(std::span<const int> selected, FieldSet fields, std::span<const int> candidates,
                              int max_passes = 50);

PlacementSolution cnpa(const PlacementProblem& problem);

inline constexpr double kDefaultExhaustiveBudget = 2e6;

PlacementSolution exhaustive_optimal(FieldSet fields, std::span<const int> candidates, int k,
                                     double budget = kDefaultExhaustiveBudget);

PlacementSolution random_select(FieldSet fields, std::span<const int> candidates, int k, std::uint64_t seed);

/// Best single station (exhaustive over singletons).
PlacementSolution single_best(FieldSet fields, std::span<const int> candidates);

double binomial(std::size_t n, std::size_t k);

nlohmann::json to_json(const PlacementSolution& solution);

}  // namespace leocp
