#include "convscale/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace convscale {

namespace {

std::vector<double> grid_points(const GridRange& r) {
  std::vector<double> points;
  const int n = static_cast<int>(std::floor((r.hi - r.lo) / r.step + 1e-9));
  for (int i = 0; i <= n; ++i) points.push_back(r.lo + i * r.step);
  return points;
}

struct CandidateState {
  CompoundConfig config;
  bool within_budget = false;
  double score = 0.0;
  std::int64_t flops = 0;
};

}  // namespace

SearchResult grid_search(const NetworkSpec& base, const SearchSpec& spec,
                         const Evaluator& evaluate, ExecutionMode mode) {
  const std::vector<double> alphas = grid_points(spec.alpha_range);
  const std::vector<double> betas = grid_points(spec.beta_range);
  const std::vector<double> gammas = grid_points(spec.gamma_range);

  // constraint filtering runs up front; the parallel loop only sees
  // candidates that need profiling
  std::vector<CandidateState> candidates;
  for (double a : alphas) {
    for (double b : betas) {
      for (double g : gammas) {
        CompoundConfig cfg{a, b, g, spec.phi_for_eval, spec.constraint_tolerance};
        if (satisfies_constraint(cfg)) candidates.push_back({cfg});
      }
    }
  }

  const int n = static_cast<int>(candidates.size());
  auto evaluate_candidate = [&](CandidateState& c) {
    const NetworkSpec scaled = apply_scale(base, triple_from_compound(c.config), spec.policy);
    const CostReport report = profile_serial(scaled);
    c.flops = report.total_flops;
    if (spec.target_flops && report.total_flops > *spec.target_flops) return;
    if (spec.target_memory_bytes && report.memory_estimate_bytes > *spec.target_memory_bytes)
      return;
    c.within_budget = true;
    c.score = evaluate(scaled);
  };

  if (mode == ExecutionMode::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) evaluate_candidate(candidates[i]);
  } else {
    for (int i = 0; i < n; ++i) evaluate_candidate(candidates[i]);
  }

  // serial reduction in grid order: the argmax keeps the first (and therefore
  // lexicographically smallest) triple among ties
  SearchResult result;
  for (const CandidateState& c : candidates) {
    if (!c.within_budget) continue;
    ++result.candidates_evaluated;
    if (!result.best || c.score > result.best_score) {
      result.best = c.config;
      result.best_score = c.score;
    }
  }

  std::vector<ScoredCandidate> scored;
  for (const CandidateState& c : candidates)
    if (c.within_budget) scored.push_back({c.config, c.score, c.flops});
  std::sort(scored.begin(), scored.end(), [](const ScoredCandidate& x, const ScoredCandidate& y) {
    if (x.flops != y.flops) return x.flops < y.flops;
    return x.score > y.score;
  });
  double best_score_so_far = -std::numeric_limits<double>::infinity();
  std::int64_t last_kept_flops = -1;
  for (const ScoredCandidate& c : scored) {
    if (c.score > best_score_so_far) {
      result.pareto.push_back(c);
      best_score_so_far = c.score;
      last_kept_flops = c.flops;
    } else if (c.score == best_score_so_far && c.flops == last_kept_flops) {
      result.pareto.push_back(c);  // mutually non-dominated tie
    }
  }
  return result;
}

double pareto_objective(double score, std::int64_t flops, std::int64_t target_flops,
                        double exponent) {
  if (flops <= 0 || target_flops <= 0)
    throw std::invalid_argument("pareto_objective: flops and target must be positive");
  return score * std::pow(static_cast<double>(flops) / static_cast<double>(target_flops),
                          exponent);
}

std::vector<SweepRow> sweep_families(const NetworkSpec& base,
                                     const std::vector<CompoundConfig>& configs,
                                     const std::vector<double>& flops_ratios,
                                     const RoundingPolicy& policy, const Evaluator* evaluate) {
  std::vector<std::pair<std::string, ScaleTriple>> plan;
  plan.emplace_back("baseline", ScaleTriple{1.0, 1.0, 1.0});
  for (double ratio : flops_ratios) {
    const double sq = std::sqrt(ratio);
    plan.emplace_back("depth", ScaleTriple{ratio, 1.0, 1.0});
    plan.emplace_back("width", ScaleTriple{1.0, sq, 1.0});
    plan.emplace_back("resolution", ScaleTriple{1.0, 1.0, sq});
  }
  for (const CompoundConfig& cfg : configs)
    plan.emplace_back("compound", triple_from_compound(cfg));

  std::vector<SweepRow> rows(plan.size());
  const int n = static_cast<int>(plan.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const NetworkSpec scaled = apply_scale(base, plan[i].second, policy);
    const CostReport report = profile_serial(scaled);
    rows[i] = {plan[i].first, plan[i].second, report.total_params, report.total_flops,
               evaluate ? std::optional<double>((*evaluate)(scaled)) : std::nullopt};
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "method,d,w,r,params,flops,score\n";
  out.setf(std::ios::fixed);
  out.precision(6);
  for (const SweepRow& row : rows) {
    out << row.method << ',' << row.triple.d << ',' << row.triple.w << ',' << row.triple.r
        << ',' << row.params << ',' << row.flops << ',';
    if (row.score) out << *row.score;
    out << '\n';
  }
  return out.str();
}

std::string search_result_to_text(const SearchResult& result) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  if (!result.best) {
    out << "no feasible candidate\n";
    out << "candidates evaluated: " << result.candidates_evaluated << '\n';
    return out.str();
  }
  out << "best: alpha=" << result.best->alpha << " beta=" << result.best->beta
      << " gamma=" << result.best->gamma << '\n';
  out << "best score: " << result.best_score << '\n';
  out << "candidates evaluated: " << result.candidates_evaluated << '\n';
  out << "pareto size: " << result.pareto.size() << '\n';
  return out.str();
}

std::string search_result_to_csv(const SearchResult& result) {
  std::ostringstream out;
  out << "alpha,beta,gamma,score,flops\n";
  out.setf(std::ios::fixed);
  out.precision(6);
  for (const ScoredCandidate& c : result.pareto) {
    out << c.config.alpha << ',' << c.config.beta << ',' << c.config.gamma << ',' << c.score
        << ',' << c.flops << '\n';
  }
  return out.str();
}

Evaluator make_constant_evaluator(double value) {
  return [value](const NetworkSpec&) { return value; };
}

Evaluator make_neg_flops_evaluator() {
  return [](const NetworkSpec& spec) {
    return -static_cast<double>(profile_serial(spec).total_flops);
  };
}

Evaluator make_flops_objective_evaluator(std::int64_t target_flops, double exponent) {
  return [target_flops, exponent](const NetworkSpec& spec) {
    return pareto_objective(1.0, profile_serial(spec).total_flops, target_flops, exponent);
  };
}

Evaluator make_synthetic_peak_evaluator(const NetworkSpec& base, const CompoundConfig& target,
                                        double phi, const RoundingPolicy& policy) {
  CompoundConfig cfg = target;
  cfg.phi = phi;
  const NetworkSpec golden = apply_scale(base, triple_from_compound(cfg), policy);
  const CostReport golden_report = profile_serial(golden);
  return [golden, golden_report](const NetworkSpec& spec) {
    if (spec == golden) return 1.0;
    const CostReport report = profile_serial(spec);
    const double df = std::abs(static_cast<double>(report.total_flops) -
                               static_cast<double>(golden_report.total_flops)) /
                      static_cast<double>(golden_report.total_flops);
    const double dp = std::abs(static_cast<double>(report.total_params) -
                               static_cast<double>(golden_report.total_params)) /
                      static_cast<double>(golden_report.total_params);
    return -(df + dp);
  };
}

}  // namespace convscale
