#pragma once

#include <memory>
#include <string>

#include "ncmac/proxy_cost.hpp"
#include "ncmac/types.hpp"

namespace ncmac {

// The four design criteria exposed to the optimizer and the CLI.
enum class CostKind { PepUb, MinMaxPep, BetaUb, DeltaUb };

std::string to_string(CostKind kind);
CostKind cost_from_string(const std::string& name);

struct CostEvaluation {
  double value = 0.0;
  AmbientGradient gradient;
};

// A design criterion: scalar value plus ambient (unconstrained) gradient in
// the entrywise d/dRe + i d/dIm convention.  For the smooth criteria value()
// and the value returned by value_and_gradient() agree bit for bit.  The
// worst-pair criterion re-selects its dominant pair on every
// value_and_gradient() call and value() then evaluates that pair's term until
// the next re-selection, so a line search between gradient calls descends a
// smooth surface; at the point where the selection was made the returned
// value still equals the full objective.
class CostFunction {
 public:
  virtual ~CostFunction() = default;
  virtual std::string name() const = 0;
  virtual double value(const JointConstellation& c) const = 0;
  virtual CostEvaluation value_and_gradient(const JointConstellation& c) const = 0;
  // Degenerate-spectrum counters accumulated by gradient evaluations;
  // non-eigenvalue criteria return nullptr.
  virtual const ProxyDiagnostics* diagnostics() const { return nullptr; }
};

// epsilon is the |log lambda|^(1+epsilon) smoothing exponent of the beta_ub
// kind; the other kinds ignore it.
std::unique_ptr<CostFunction> make_cost(CostKind kind, int N, double epsilon = 1e-3);

}  // namespace ncmac
