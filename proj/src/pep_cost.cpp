#include "ncmac/pep_cost.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

namespace ncmac {

namespace {

// exp() of this and above would overflow a double.
constexpr double kExpOverflow = 709.0;
// log det below this is treated as a coincident pair (det under ~1e-300).
constexpr double kLogDetFloor = -690.7;

void check_full_diversity(const JointConstellation& c, int N) {
  c.validate();
  if (N < 1) throw DimensionError("the receive-antenna exponent N must be >= 1");
  const int K = c.num_users();
  if (c.T() < (K + 1) * c.M())
    throw DimensionError("full-diversity cost needs T >= (K+1)M, got T=" +
                         std::to_string(c.T()) + ", K=" + std::to_string(K) +
                         ", M=" + std::to_string(c.M()));
}

// Per-joint-codeword data reused across pairs: the stacked codeword F, and
// pinv = (F^H F)^{-1} F^H so that the complement projector is
// P = I - F * pinv.
struct JointTables {
  std::vector<CMatrix> F;
  std::vector<CMatrix> pinv;
};

JointTables build_tables(const JointConstellation& c) {
  JointTables t;
  const std::int64_t n = c.joint_count();
  t.F.reserve(n);
  t.pinv.reserve(n);
  for (std::int64_t flat = 0; flat < n; ++flat) {
    const CMatrix f = c.joint_codeword(c.unflatten(flat));
    const CMatrix gram = f.adjoint() * f;
    Eigen::LLT<CMatrix> llt(gram);
    if (llt.info() != Eigen::Success)
      throw NumericalError("joint codeword " + std::to_string(flat) +
                           " is rank deficient (Gram matrix not positive definite)");
    t.F.push_back(f);
    t.pinv.push_back(llt.solve(f.adjoint()));
  }
  return t;
}

struct PairEval {
  double term = 0.0;      // det(G)^{-N}
  CMatrix proj_fe;        // P_perp F_e, T x M
  CMatrix pf;             // pinv_j * F_e, KM x M
  Eigen::LLT<CMatrix> llt_g;
};

PairEval eval_pair(const JointConstellation& c, const JointTables& t, const ErrorPair& pair,
                   int N) {
  PairEval out;
  const CMatrix& fe = c.users[pair.user].codewords[pair.tx[pair.user]];
  const std::int64_t j = c.flatten(pair.rx);
  out.pf = t.pinv[j] * fe;
  out.proj_fe = fe - t.F[j] * out.pf;
  const CMatrix g = fe.adjoint() * out.proj_fe;
  out.llt_g.compute(g);
  const auto pair_name = [&] {
    return "pair (user " + std::to_string(pair.user) + ", tx " +
           std::to_string(pair.tx[pair.user]) + " -> rx " + std::to_string(pair.rx[pair.user]) +
           ")";
  };
  if (out.llt_g.info() != Eigen::Success)
    throw NumericalError("coincident codewords: error term is singular for " + pair_name());
  double logdet = 0.0;
  for (Eigen::Index d = 0; d < g.rows(); ++d)
    logdet += 2.0 * std::log(out.llt_g.matrixLLT()(d, d).real());
  if (logdet < kLogDetFloor || -static_cast<double>(N) * logdet > kExpOverflow)
    throw NumericalError("coincident codewords: error term overflows for " + pair_name());
  out.term = std::exp(-static_cast<double>(N) * logdet);
  return out;
}

// Adds this pair's gradient contribution.  The erroneous transmitted block
// receives -2N * term * [P_perp F_e G^{-1}]; every block of the detected
// joint codeword receives +2N * term * [P_perp F_e G^{-1} F_e^H F_j Mj^{-1}]
// restricted to its column range.
void accumulate_pair_gradient(const JointConstellation& c, const ErrorPair& pair, int N,
                              const PairEval& ev, AmbientGradient& grad) {
  const int M = c.M();
  const double scale = 2.0 * static_cast<double>(N) * ev.term;
  const CMatrix q1 = ev.llt_g.solve(ev.proj_fe.adjoint()).adjoint();  // P_perp F_e G^{-1}
  grad.blocks[pair.user][pair.tx[pair.user]] -= scale * q1;
  const CMatrix cmat = q1 * ev.pf.adjoint();  // T x KM
  for (int u = 0; u < c.num_users(); ++u)
    grad.blocks[u][pair.rx[u]] += scale * cmat.middleCols(static_cast<Eigen::Index>(u) * M, M);
}

}  // namespace

std::vector<ErrorPair> enumerate_error_pairs(const std::vector<int>& sizes) {
  if (sizes.empty()) throw DimensionError("constellation needs at least one user");
  const int K = static_cast<int>(sizes.size());
  std::vector<ErrorPair> pairs;
  for (int k = 0; k < K; ++k) {
    // Iterate the common multi-index (users != k) lexicographically.
    MultiIndex common(K, 0);
    bool done = false;
    while (!done) {
      for (int tx = 0; tx < sizes[k]; ++tx) {
        for (int rx = 0; rx < sizes[k]; ++rx) {
          if (rx == tx) continue;
          ErrorPair p;
          p.user = k;
          p.tx = common;
          p.rx = common;
          p.tx[k] = tx;
          p.rx[k] = rx;
          pairs.push_back(std::move(p));
        }
      }
      done = true;
      for (int u = K - 1; u >= 0; --u) {
        if (u == k) continue;
        if (++common[u] < sizes[u]) {
          done = false;
          break;
        }
        common[u] = 0;
      }
    }
  }
  return pairs;
}

double pep_term(const JointConstellation& c, const ErrorPair& pair, int N) {
  check_full_diversity(c, N);
  const JointTables t = build_tables(c);
  return eval_pair(c, t, pair, N).term;
}

double pep_ub_cost(const JointConstellation& c, int N) {
  check_full_diversity(c, N);
  const JointTables t = build_tables(c);
  double cost = 0.0;
  for (const ErrorPair& pair : enumerate_error_pairs(c.sizes()))
    cost += eval_pair(c, t, pair, N).term;
  return cost;
}

AmbientGradient pep_ub_gradient(const JointConstellation& c, int N, double* cost_out) {
  check_full_diversity(c, N);
  const JointTables t = build_tables(c);
  AmbientGradient grad = AmbientGradient::zero_like(c);
  double cost = 0.0;
  for (const ErrorPair& pair : enumerate_error_pairs(c.sizes())) {
    const PairEval ev = eval_pair(c, t, pair, N);
    cost += ev.term;
    accumulate_pair_gradient(c, pair, N, ev, grad);
  }
  if (cost_out) *cost_out = cost;
  return grad;
}

MinMaxResult minmax_pep_objective(const JointConstellation& c, int N) {
  check_full_diversity(c, N);
  const JointTables t = build_tables(c);
  const std::vector<ErrorPair> pairs = enumerate_error_pairs(c.sizes());
  MinMaxResult best;
  bool first = true;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double term = eval_pair(c, t, pairs[p], N).term;
    if (first || term > best.value) {
      best.value = term;
      best.pair_index = p;
      best.pair = pairs[p];
      first = false;
    }
  }
  return best;
}

AmbientGradient minmax_pep_gradient(const JointConstellation& c, int N, MinMaxResult* result_out) {
  const MinMaxResult best = minmax_pep_objective(c, N);
  const JointTables t = build_tables(c);
  AmbientGradient grad = AmbientGradient::zero_like(c);
  const PairEval ev = eval_pair(c, t, best.pair, N);
  accumulate_pair_gradient(c, best.pair, N, ev, grad);
  if (result_out) *result_out = best;
  return grad;
}

}  // namespace ncmac
