#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "convscale/analyzer.hpp"
#include "convscale/ir.hpp"
#include "convscale/scaling.hpp"

namespace convscale {

struct GridRange {
  double lo = 1.0;
  double hi = 1.0;
  double step = 0.05;

  bool operator==(const GridRange&) const = default;
};

struct SearchSpec {
  GridRange alpha_range{1.0, 2.0, 0.05};
  GridRange beta_range{1.0, 1.5, 0.05};
  GridRange gamma_range{1.0, 1.5, 0.05};
  double constraint_tolerance = 0.05;  // on |alpha * beta^2 * gamma^2 - 2|
  std::optional<std::int64_t> target_flops;
  std::optional<std::int64_t> target_memory_bytes;
  double phi_for_eval = 1.0;
  RoundingPolicy policy{};
};

// Deterministic score over valid specs; higher is better. Must be safe to
// invoke concurrently.
using Evaluator = std::function<double(const NetworkSpec&)>;

struct ScoredCandidate {
  CompoundConfig config;
  double score = 0.0;
  std::int64_t flops = 0;
};

struct SearchResult {
  std::optional<CompoundConfig> best;  // empty: no feasible candidate
  double best_score = 0.0;
  std::int64_t candidates_evaluated = 0;  // grid points passing constraint and budgets
  std::vector<ScoredCandidate> pareto;    // non-dominated in (score, -flops)
};

enum class ExecutionMode { kParallel, kSerial };

// Enumerates the grid, keeps constrained triples, scales the base at
// phi_for_eval, drops candidates over the flops/memory budgets, scores the
// survivors and returns the argmax (ties: lexicographically smallest
// (alpha, beta, gamma)). Results are identical in both execution modes.
SearchResult grid_search(const NetworkSpec& base, const SearchSpec& spec,
                         const Evaluator& evaluate,
                         ExecutionMode mode = ExecutionMode::kParallel);

// score * (flops / target)^exponent. Throws std::invalid_argument on
// non-positive flops or target.
double pareto_objective(double score, std::int64_t flops,
                        std::int64_t target_flops = 400'000'000,
                        double exponent = -0.07);

struct SweepRow {
  std::string method;  // baseline | depth | width | resolution | compound
  ScaleTriple triple;
  std::int64_t params = 0;
  std::int64_t flops = 0;
  std::optional<double> score;
};

// Cost table for the base, the three single-dimension families at each target
// FLOPS ratio (d = ratio, w = sqrt(ratio), r = sqrt(ratio)) and one row per
// compound config.
std::vector<SweepRow> sweep_families(const NetworkSpec& base,
                                     const std::vector<CompoundConfig>& configs,
                                     const std::vector<double>& flops_ratios = {4.0},
                                     const RoundingPolicy& policy = {},
                                     const Evaluator* evaluate = nullptr);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::string search_result_to_text(const SearchResult& result);
std::string search_result_to_csv(const SearchResult& result);

// Named evaluators for the CLI and tests.
Evaluator make_constant_evaluator(double value = 1.0);
Evaluator make_neg_flops_evaluator();
Evaluator make_flops_objective_evaluator(std::int64_t target_flops = 400'000'000,
                                         double exponent = -0.07);
// Peaks exactly on specs equal to apply_scale(base, triple(target, phi)).
Evaluator make_synthetic_peak_evaluator(const NetworkSpec& base, const CompoundConfig& target,
                                        double phi, const RoundingPolicy& policy = {});

}  // namespace convscale
