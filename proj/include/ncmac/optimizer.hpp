#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ncmac/cost.hpp"
#include "ncmac/manifolds.hpp"
#include "ncmac/types.hpp"

namespace ncmac {

struct OptimizerConfig {
  double step0 = 0.1;            // initial (and maximal) step length
  double shrink = 0.5;           // backtracking factor
  int max_iters = 2000;
  int max_trials = 30;           // backtracking attempts per iteration
  double rel_improvement = 1e-9; // stop when an accepted step improves less
  double step_floor = 1e-12;     // stop when the trial step shrinks below
};

enum class StopReason {
  MaxIterations,
  SmallImprovement,
  StepUnderflow,
  LineSearchExhausted,
  ZeroGradient,
};

std::string to_string(StopReason reason);

// One accepted iteration (row 0 is the starting point: step 0, its gradient
// norm, and its constraint residual).
struct TraceRow {
  int iteration = 0;
  double cost = 0.0;
  double step = 0.0;       // accepted step length
  double grad_norm = 0.0;  // Riemannian (projected) gradient norm at the row's point
  double residual = 0.0;   // manifold constraint residual at the row's point
};

struct DescentResult {
  JointConstellation constellation;
  double final_cost = 0.0;
  StopReason stop = StopReason::MaxIterations;
  int iterations = 0;  // accepted steps
  std::vector<TraceRow> trace;
};

// Riemannian steepest descent with normalized direction and backtracking:
// project the ambient gradient to the tangent space, walk -h grad/|grad|,
// retract, accept when the trial strictly improves the value reported by the
// iterate's gradient evaluation (shrinking h otherwise), and let an accepted
// step grow the carry-over step back toward step0.  Trace rows record the
// objective at each accepted iterate: strictly decreasing for the smooth
// criteria; the worst-pair criterion re-selects its dominant term per
// iteration, so its rows may rise when dominance switches even though every
// accepted step improved the term it descended.
DescentResult descend(const Manifold& manifold, const CostFunction& cost,
                      const JointConstellation& start, const OptimizerConfig& config);

struct DesignResult {
  DescentResult best;
  int best_restart = 0;
  std::vector<double> restart_costs;  // final cost of every restart, in order
};

// Multi-restart descent from seeded random starting points (restart r draws
// from substream(seed, r, 0)).  Best final cost wins; ties keep the earliest
// restart.
DesignResult design(const Manifold& manifold, const CostFunction& cost, int T, int M,
                    const std::vector<int>& sizes, int restarts, std::uint64_t seed,
                    const OptimizerConfig& config);

}  // namespace ncmac
