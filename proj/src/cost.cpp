#include "ncmac/cost.hpp"

#include <optional>

#include "ncmac/pep_cost.hpp"

namespace ncmac {

namespace {

class PepUbCost final : public CostFunction {
 public:
  explicit PepUbCost(int N) : n_(N) {}
  std::string name() const override { return "pep_ub"; }
  double value(const JointConstellation& c) const override { return pep_ub_cost(c, n_); }
  CostEvaluation value_and_gradient(const JointConstellation& c) const override {
    CostEvaluation out;
    out.gradient = pep_ub_gradient(c, n_, &out.value);
    return out;
  }

 private:
  int n_;
};

// value_and_gradient() selects the dominant pair and keeps it selected until
// the next call, so the line-search evaluations between two gradient calls
// descend that pair's smooth term rather than the kinked max.  Because the
// selection always happens at the current iterate, the returned value is
// still the true worst-pair objective there.
class MinMaxPepCost final : public CostFunction {
 public:
  explicit MinMaxPepCost(int N) : n_(N) {}
  std::string name() const override { return "minmax_pep"; }
  double value(const JointConstellation& c) const override {
    if (selected_) return pep_term(c, *selected_, n_);
    return minmax_pep_objective(c, n_).value;
  }
  CostEvaluation value_and_gradient(const JointConstellation& c) const override {
    CostEvaluation out;
    MinMaxResult res;
    out.gradient = minmax_pep_gradient(c, n_, &res);
    out.value = res.value;
    selected_ = res.pair;
    return out;
  }

 private:
  int n_;
  mutable std::optional<ErrorPair> selected_;
};

class ProxyCost final : public CostFunction {
 public:
  ProxyCost(ProxyKind kind, int N, double epsilon)
      : kind_(kind), n_(N), epsilon_(kind == ProxyKind::Beta ? epsilon : 0.0) {}
  std::string name() const override {
    return kind_ == ProxyKind::Beta ? "beta_ub" : "delta_ub";
  }
  double value(const JointConstellation& c) const override {
    return proxy_ub_cost(c, n_, kind_, epsilon_);
  }
  CostEvaluation value_and_gradient(const JointConstellation& c) const override {
    CostEvaluation out;
    out.gradient = proxy_ub_gradient(c, n_, kind_, epsilon_, &out.value, &diag_);
    return out;
  }
  const ProxyDiagnostics* diagnostics() const override { return &diag_; }

 private:
  ProxyKind kind_;
  int n_;
  double epsilon_;
  mutable ProxyDiagnostics diag_;
};

}  // namespace

std::string to_string(CostKind kind) {
  switch (kind) {
    case CostKind::PepUb: return "pep_ub";
    case CostKind::MinMaxPep: return "minmax_pep";
    case CostKind::BetaUb: return "beta_ub";
    case CostKind::DeltaUb: return "delta_ub";
  }
  return "unknown";
}

CostKind cost_from_string(const std::string& name) {
  if (name == "pep_ub") return CostKind::PepUb;
  if (name == "minmax_pep") return CostKind::MinMaxPep;
  if (name == "beta_ub") return CostKind::BetaUb;
  if (name == "delta_ub") return CostKind::DeltaUb;
  throw UsageError("unknown cost '" + name +
                   "' (expected pep_ub, minmax_pep, beta_ub, or delta_ub)");
}

std::unique_ptr<CostFunction> make_cost(CostKind kind, int N, double epsilon) {
  switch (kind) {
    case CostKind::PepUb: return std::make_unique<PepUbCost>(N);
    case CostKind::MinMaxPep: return std::make_unique<MinMaxPepCost>(N);
    case CostKind::BetaUb: return std::make_unique<ProxyCost>(ProxyKind::Beta, N, epsilon);
    case CostKind::DeltaUb: return std::make_unique<ProxyCost>(ProxyKind::Delta, N, epsilon);
  }
  throw UsageError("unknown cost kind");
}

}  // namespace ncmac
