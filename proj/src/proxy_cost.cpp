#include "ncmac/proxy_cost.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace ncmac {

namespace {

constexpr double kDegenerateGapRel = 1e-10;
constexpr double kJitter = 1e-12;
constexpr double kCoincidentDelta = 1e-14;
// Ordered pairs whose log-weight falls below this cannot move a double
// precision gradient sum; they are skipped (deterministically).
constexpr double kNegligibleLogWeight = -45.0;

// Per joint codeword: A = I + F F^H, its Cholesky factor, and A^{-1}.
struct CodewordOps {
  CMatrix A;
  CMatrix L;
  CMatrix W;
};

CodewordOps make_ops(const CMatrix& f) {
  const Eigen::Index t = f.rows();
  CodewordOps ops;
  ops.A = CMatrix::Identity(t, t);
  ops.A.noalias() += f * f.adjoint();
  Eigen::LLT<CMatrix> llt(ops.A);
  if (llt.info() != Eigen::Success)
    throw NumericalError("received-covariance factorization failed (non-finite codeword?)");
  ops.L = llt.matrixL();
  ops.W = llt.solve(CMatrix::Identity(t, t));
  return ops;
}

// S = L_j^{-1} (A_i + jitter I) L_j^{-H}: Hermitian positive definite and
// similar to Gamma = (A_i + jitter I) B_j^{-1}.
CMatrix similar_hermitian(const CodewordOps& i_ops, const CodewordOps& j_ops, double jitter) {
  const Eigen::Index t = i_ops.A.rows();
  CMatrix a = i_ops.A;
  if (jitter != 0.0) a += jitter * CMatrix::Identity(t, t);
  const CMatrix y = j_ops.L.triangularView<Eigen::Lower>().solve(a);
  return j_ops.L.triangularView<Eigen::Lower>().solve(y.adjoint()).adjoint();
}

void check_spectrum(const Eigen::VectorXd& mu_ascending) {
  if (!(mu_ascending(0) > 0.0))
    throw NumericalError("likelihood-ratio spectrum is not positive");
}

// Eigenvalues this close to 1 (in log) contribute nothing to any gradient.
constexpr double kUnityLogTol = 1e-9;

bool has_degenerate_gap(const Eigen::VectorXd& mu_ascending) {
  const Eigen::Index t = mu_ascending.size();
  const double scale = mu_ascending(t - 1);  // largest eigenvalue, positive
  for (Eigen::Index l = 0; l + 1 < t; ++l) {
    if (mu_ascending(l + 1) - mu_ascending(l) >= kDegenerateGapRel * scale) continue;
    // A cluster pinned at exactly 1 is structural, not accidental: whenever
    // two joint codewords share a column block, the shared subspace leaves
    // T - 2M unit eigenvalues.  Those terms carry log lambda = 0 and so no
    // gradient weight; only clusters away from 1 need the jitter remedy.
    if (std::abs(std::log(mu_ascending(l))) > kUnityLogTol ||
        std::abs(std::log(mu_ascending(l + 1))) > kUnityLogTol)
      return true;
  }
  return false;
}

GammaSystem build_system(const CodewordOps& i_ops, const CodewordOps& j_ops, double jitter) {
  const Eigen::Index t = i_ops.A.rows();
  GammaSystem gs;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(similar_hermitian(i_ops, j_ops, jitter));
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  check_spectrum(es.eigenvalues());
  gs.degenerate = has_degenerate_gap(es.eigenvalues());
  gs.lambda = es.eigenvalues().reverse();
  const CMatrix q = es.eigenvectors().rowwise().reverse();
  gs.V.noalias() = j_ops.L.triangularView<Eigen::Lower>() * q;
  gs.U_h = j_ops.L.adjoint().triangularView<Eigen::Upper>().solve(q).adjoint();
  gs.W = j_ops.W;
  if (jitter != 0.0)
    gs.gamma.noalias() = (i_ops.A + jitter * CMatrix::Identity(t, t)) * j_ops.W;
  else
    gs.gamma.noalias() = i_ops.A * j_ops.W;
  return gs;
}

double pair_value(const Eigen::VectorXd& mu, ProxyKind kind, double epsilon) {
  double out = 0.0;
  if (kind == ProxyKind::Delta) {
    for (Eigen::Index l = 0; l < mu.size(); ++l) {
      const double lg = std::log(mu(l));
      out += lg * lg;
    }
    return std::sqrt(out);
  }
  for (Eigen::Index l = 0; l < mu.size(); ++l) {
    const double a = std::abs(std::log(mu(l)));
    out += epsilon == 0.0 ? a : std::pow(a, 1.0 + epsilon);
  }
  return out;
}

void check_args(const JointConstellation& c, int N, double epsilon) {
  c.validate();
  if (N < 1) throw DimensionError("the receive-antenna exponent N must be >= 1");
  if (!(epsilon >= 0.0)) throw DimensionError("epsilon must be non-negative");
  if (c.joint_count() < 2) throw DimensionError("need at least two joint codewords");
}

struct Workspace {
  std::int64_t n = 0;
  std::vector<MultiIndex> idx;
  std::vector<CodewordOps> ops;
};

Workspace build_workspace(const JointConstellation& c) {
  Workspace w;
  w.n = c.joint_count();
  w.idx.reserve(w.n);
  w.ops.reserve(w.n);
  for (std::int64_t flat = 0; flat < w.n; ++flat) {
    w.idx.push_back(c.unflatten(flat));
    w.ops.push_back(make_ops(c.joint_codeword(w.idx.back())));
  }
  return w;
}

// Gradient contribution of the ordered pair (a, b), i.e. Gamma = A_a B_b^{-1},
// whose eigensystem is given by (lam, lg = log lam, V, U_h) and WV = W_b V.
// chain_scale carries -N * exp(-N pv - cost); pair_sep is the pair's
// separation value (used as the 1/delta factor for the Delta kind).
void accumulate_order(const JointConstellation& c, const Workspace& w, std::int64_t a,
                      std::int64_t b, const Eigen::VectorXd& lam, const Eigen::VectorXd& lg,
                      const CMatrix& V, const CMatrix& U_h, const CMatrix& WV,
                      double chain_scale, ProxyKind kind, double epsilon, double pair_sep,
                      AmbientGradient& grad) {
  const int T = c.T();
  const int M = c.M();
  const int K = c.num_users();
  Eigen::Matrix<Complex, 1, Eigen::Dynamic> row1(1, M), row2(1, M);
  for (int l = 0; l < T; ++l) {
    double coef;
    if (kind == ProxyKind::Delta) {
      coef = lg(l) / (lam(l) * pair_sep);
    } else {
      const double mag = std::abs(lg(l));
      const double base = epsilon == 0.0 ? 1.0 : (1.0 + epsilon) * std::pow(mag, epsilon);
      coef = (lg(l) > 0.0 ? base : lg(l) < 0.0 ? -base : 0.0) / lam(l);
    }
    if (coef == 0.0) continue;
    const Complex d = U_h.row(l) * V.col(l);  // u_l^H v_l, == 1 up to roundoff
    const CVector u_col = U_h.row(l).adjoint();
    const auto wv = WV.col(l);
    for (int user = 0; user < K; ++user) {
      const int ia = w.idx[a][user];
      const int ib = w.idx[b][user];
      // (case scalar, target codeword): the differing block of F_a enters the
      // derivative directly, the differing block of F_b through -Gamma, and a
      // shared block through (I - Gamma); Gamma collapses to lambda_l against
      // the left eigenvector.
      const int n_cases = ia == ib ? 1 : 2;
      for (int cs = 0; cs < n_cases; ++cs) {
        double case_scalar;
        int target;
        if (ia == ib) {
          case_scalar = 1.0 - lam(l);
          target = ia;
        } else if (cs == 0) {
          case_scalar = 1.0;
          target = ia;
        } else {
          case_scalar = -lam(l);
          target = ib;
        }
        const CMatrix& x = c.users[user].codewords[target];
        row1.noalias() = wv.adjoint() * x;
        row2.noalias() = U_h.row(l) * x;
        const Complex c1 = chain_scale * coef * case_scalar / std::conj(d);
        const Complex c2 = chain_scale * coef * case_scalar / d;
        CMatrix& g = grad.blocks[user][target];
        g.noalias() += c1 * (u_col * row1);
        g.noalias() += c2 * (wv * row2);
      }
    }
  }
}

}  // namespace

GammaSystem gamma_system(const CMatrix& fi, const CMatrix& fj) {
  if (fi.rows() < 1 || fi.rows() != fj.rows())
    throw DimensionError("codewords must share the same number of rows");
  return build_system(make_ops(fi), make_ops(fj), 0.0);
}

Eigen::VectorXd gamma_eigenvalues(const CMatrix& fi, const CMatrix& fj) {
  if (fi.rows() < 1 || fi.rows() != fj.rows())
    throw DimensionError("codewords must share the same number of rows");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(similar_hermitian(make_ops(fi), make_ops(fj), 0.0),
                                            Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  check_spectrum(es.eigenvalues());
  return es.eigenvalues().reverse();
}

double beta_pair(const GammaSystem& gs) {
  double out = 0.0;
  for (Eigen::Index l = 0; l < gs.lambda.size(); ++l) out += std::abs(std::log(gs.lambda(l)));
  return out;
}

double delta_pair(const GammaSystem& gs) {
  double out = 0.0;
  for (Eigen::Index l = 0; l < gs.lambda.size(); ++l) {
    const double lg = std::log(gs.lambda(l));
    out += lg * lg;
  }
  return std::sqrt(out);
}

double j_half_pair(const CMatrix& fi, const CMatrix& fj) {
  if (fi.rows() < 1 || fi.rows() != fj.rows())
    throw DimensionError("codewords must share the same number of rows");
  const Eigen::Index t = fi.rows();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(similar_hermitian(make_ops(fi), make_ops(fj), 0.0),
                                            Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  check_spectrum(es.eigenvalues());
  double out = 0.0;
  for (Eigen::Index l = 0; l < t; ++l) {
    const double mu = es.eigenvalues()(l);
    out += std::log(2.0 + mu + 1.0 / mu);
  }
  return 0.5 * out - static_cast<double>(t) * std::log(2.0);
}

CMatrix dgamma_dir(const GammaSystem& gs, DGammaCase which, const CMatrix& x,
                   const CMatrix& dir) {
  if (x.rows() != gs.gamma.rows() || dir.rows() != x.rows() || dir.cols() != x.cols())
    throw DimensionError("direction must match the codeword block dimensions");
  CMatrix core = dir * x.adjoint();
  core += x * dir.adjoint();
  const CMatrix base = core * gs.W;
  switch (which) {
    case DGammaCase::ErrorInFi: return base;
    case DGammaCase::ErrorInFj: return -(gs.gamma * base);
    case DGammaCase::Common: return base - gs.gamma * base;
  }
  throw DimensionError("unreachable derivative case");
}

CMatrix dgamma_block(const GammaSystem& gs, DGammaCase which, const CMatrix& x, int m, int n) {
  if (m < 0 || m >= x.rows() || n < 0 || n >= x.cols())
    throw DimensionError("entry index out of range");
  CMatrix dir = CMatrix::Zero(x.rows(), x.cols());
  dir(m, n) = 1.0;
  return dgamma_dir(gs, which, x, dir);
}

double proxy_ub_cost(const JointConstellation& c, int N, ProxyKind kind, double epsilon) {
  check_args(c, N, epsilon);
  const Workspace w = build_workspace(c);
  const double nd = static_cast<double>(N);
  std::vector<double> pv;
  pv.reserve(static_cast<std::size_t>(w.n) * (w.n - 1) / 2);
  Eigen::SelfAdjointEigenSolver<CMatrix> es;
  for (std::int64_t p = 0; p < w.n; ++p) {
    for (std::int64_t q = p + 1; q < w.n; ++q) {
      es.compute(similar_hermitian(w.ops[p], w.ops[q], 0.0), Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
      check_spectrum(es.eigenvalues());
      pv.push_back(pair_value(es.eigenvalues(), kind, epsilon));
    }
  }
  double min_pv = pv[0];
  for (const double v : pv) min_pv = std::min(min_pv, v);
  const double shift = -nd * min_pv;
  double sum = 0.0;
  for (const double v : pv) sum += std::exp(-nd * v - shift);
  // Every unordered pair appears twice in the ordered sum.
  return shift + std::log(2.0 * sum);
}

AmbientGradient proxy_ub_gradient(const JointConstellation& c, int N, ProxyKind kind,
                                  double epsilon, double* cost_out, ProxyDiagnostics* diag) {
  check_args(c, N, epsilon);
  const Workspace w = build_workspace(c);
  const int T = c.T();
  const double nd = static_cast<double>(N);
  const std::size_t npairs = static_cast<std::size_t>(w.n) * (w.n - 1) / 2;

  // Pass 1: one Hermitian eigendecomposition per unordered pair.
  std::vector<Eigen::VectorXd> mus(npairs);
  std::vector<CMatrix> qmats(npairs);
  std::vector<double> pv(npairs);
  {
    Eigen::SelfAdjointEigenSolver<CMatrix> es;
    std::size_t i = 0;
    for (std::int64_t p = 0; p < w.n; ++p) {
      for (std::int64_t q = p + 1; q < w.n; ++q, ++i) {
        es.compute(similar_hermitian(w.ops[p], w.ops[q], 0.0));
        if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
        check_spectrum(es.eigenvalues());
        mus[i] = es.eigenvalues();
        qmats[i] = es.eigenvectors();
        pv[i] = pair_value(es.eigenvalues(), kind, epsilon);
      }
    }
  }

  double min_pv = pv[0];
  for (const double v : pv) min_pv = std::min(min_pv, v);
  const double shift = -nd * min_pv;
  double sum = 0.0;
  for (const double v : pv) sum += std::exp(-nd * v - shift);
  const double cost = shift + std::log(2.0 * sum);
  if (cost_out) *cost_out = cost;

  // Pass 2: chain-rule assembly; the mirrored ordered pair reuses the same
  // eigenvectors with the reciprocal spectrum (Gamma_qp = Gamma_pq^{-1}).
  AmbientGradient grad = AmbientGradient::zero_like(c);
  Eigen::SelfAdjointEigenSolver<CMatrix> es;
  Eigen::VectorXd lam(T), lg(T), lam_m(T), lg_m(T);
  std::size_t i = 0;
  for (std::int64_t p = 0; p < w.n; ++p) {
    for (std::int64_t q = p + 1; q < w.n; ++q, ++i) {
      const double log_weight = -nd * pv[i] - cost;
      if (log_weight < kNegligibleLogWeight) continue;
      if (kind == ProxyKind::Delta && pv[i] < kCoincidentDelta)
        throw NumericalError("coincident joint codewords " + std::to_string(p) + " and " +
                             std::to_string(q) + " (zero separation)");
      const double chain_scale = -nd * std::exp(log_weight);

      const Eigen::VectorXd* mu = &mus[i];
      const CMatrix* qmat = &qmats[i];
      Eigen::VectorXd mu_j;
      CMatrix q_j;
      if (has_degenerate_gap(*mu)) {
        // Re-solve with a jittered spectrum so the eigenvector basis is
        // numerically well defined inside the degenerate cluster.
        es.compute(similar_hermitian(w.ops[p], w.ops[q], kJitter));
        if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
        check_spectrum(es.eigenvalues());
        mu_j = es.eigenvalues();
        q_j = es.eigenvectors();
        mu = &mu_j;
        qmat = &q_j;
        if (diag) ++diag->degenerate_pairs;
      }

      for (int l = 0; l < T; ++l) {
        lam(l) = (*mu)(T - 1 - l);  // descending
        lg(l) = std::log(lam(l));
        lam_m(l) = 1.0 / lam(l);
        lg_m(l) = -lg(l);
      }
      const CMatrix qd = qmat->rowwise().reverse();
      CMatrix v(T, T);
      v.noalias() = w.ops[q].L.triangularView<Eigen::Lower>() * qd;
      const CMatrix u_h = w.ops[q].L.adjoint().triangularView<Eigen::Upper>().solve(qd).adjoint();
      CMatrix wv(T, T), wv_m(T, T);
      wv.noalias() = w.ops[q].W * v;
      wv_m.noalias() = w.ops[p].W * v;

      accumulate_order(c, w, p, q, lam, lg, v, u_h, wv, chain_scale, kind, epsilon, pv[i], grad);
      accumulate_order(c, w, q, p, lam_m, lg_m, v, u_h, wv_m, chain_scale, kind, epsilon, pv[i],
                       grad);
    }
  }
  return grad;
}

}  // namespace ncmac
