#include "ncmac/optimizer.hpp"

#include <cmath>
#include <limits>

#include "ncmac/rng.hpp"

namespace ncmac {

namespace {

void check_config(const OptimizerConfig& cfg) {
  if (!(cfg.step0 > 0.0)) throw DimensionError("step0 must be positive");
  if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0))
    throw DimensionError("shrink must lie strictly between 0 and 1");
  if (cfg.max_iters < 1) throw DimensionError("max_iters must be >= 1");
  if (cfg.max_trials < 1) throw DimensionError("max_trials must be >= 1");
  if (!(cfg.step_floor > 0.0)) throw DimensionError("step_floor must be positive");
}

}  // namespace

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::SmallImprovement: return "small_improvement";
    case StopReason::StepUnderflow: return "step_underflow";
    case StopReason::LineSearchExhausted: return "line_search_exhausted";
    case StopReason::ZeroGradient: return "zero_gradient";
  }
  return "unknown";
}

DescentResult descend(const Manifold& manifold, const CostFunction& cost,
                      const JointConstellation& start, const OptimizerConfig& config) {
  check_config(config);
  start.validate();

  DescentResult out;
  out.constellation = start;
  double h = config.step0;

  // One gradient evaluation per visited point, shared by the trace row at
  // that point and the step taken from it.  Each iteration's line search is
  // judged against the objective value reported alongside that gradient, so
  // criteria that re-select an active term per gradient call (the worst-pair
  // criterion) are always descending the surface their gradient belongs to.
  CostEvaluation eval = cost.value_and_gradient(out.constellation);
  double f_cur = eval.value;
  TangentDirection dir = project_tangent(manifold, out.constellation, eval.gradient);
  double gn = std::sqrt(dir.squared_norm());
  out.trace.push_back({0, f_cur, 0.0, gn, constraint_residual(manifold, out.constellation)});

  for (int iter = 0; iter < config.max_iters; ++iter) {
    if (gn < 1e-300) {
      out.stop = StopReason::ZeroGradient;
      break;
    }

    // Backtracking on the normalized direction.
    bool accepted = false;
    bool underflow = false;
    for (int trial = 0; trial < config.max_trials; ++trial) {
      if (h < config.step_floor) {
        underflow = true;
        break;
      }
      double f_trial = std::numeric_limits<double>::infinity();
      JointConstellation candidate;
      try {
        TangentDirection step = dir;
        step *= -h / gn;
        candidate = retract(manifold, out.constellation, step);
        f_trial = cost.value(candidate);
      } catch (const NumericalError&) {
        // Degenerate retraction or a coincident-codeword trial point: treat
        // the trial as non-improving and keep shrinking.
      }
      if (f_trial < f_cur) {
        const double rel = (f_cur - f_trial) / std::max(std::abs(f_cur), 1e-30);
        out.constellation = std::move(candidate);
        ++out.iterations;
        eval = cost.value_and_gradient(out.constellation);
        f_cur = eval.value;
        dir = project_tangent(manifold, out.constellation, eval.gradient);
        gn = std::sqrt(dir.squared_norm());
        out.trace.push_back({out.iterations, f_cur, h, gn,
                             constraint_residual(manifold, out.constellation)});
        h = std::min(2.0 * h, config.step0);
        accepted = true;
        if (rel < config.rel_improvement) out.stop = StopReason::SmallImprovement;
        break;
      }
      h *= config.shrink;
    }

    if (underflow) {
      out.stop = StopReason::StepUnderflow;
      break;
    }
    if (!accepted) {
      out.stop = StopReason::LineSearchExhausted;
      break;
    }
    if (out.stop == StopReason::SmallImprovement) break;
  }

  out.final_cost = f_cur;
  return out;
}

DesignResult design(const Manifold& manifold, const CostFunction& cost, int T, int M,
                    const std::vector<int>& sizes, int restarts, std::uint64_t seed,
                    const OptimizerConfig& config) {
  if (restarts < 1) throw DimensionError("need at least one restart");
  DesignResult out;
  for (int r = 0; r < restarts; ++r) {
    Rng rng = substream(seed, static_cast<std::uint64_t>(r), 0);
    const JointConstellation start = random_constellation(manifold, T, M, sizes, rng);
    DescentResult res = descend(manifold, cost, start, config);
    out.restart_costs.push_back(res.final_cost);
    if (r == 0 || res.final_cost < out.best.final_cost) {
      out.best = std::move(res);
      out.best_restart = r;
    }
  }
  return out;
}

}  // namespace ncmac
