#pragma once

#include <cstdint>
#include <vector>

#include "ncmac/types.hpp"

namespace ncmac {

// Which pairwise separation measure drives the smooth proxy bound:
//   Beta  — sum_l |log lambda_l|          (ε-smoothed to |log lambda|^(1+ε)),
//   Delta — sqrt(sum_l log^2 lambda_l)    (affine-invariant distance between
//                                          the two received covariances).
enum class ProxyKind { Beta, Delta };

// Eigensystem of the likelihood-ratio matrix Gamma = A B^{-1} with
// A = I + F_i F_i^H and B = I + F_j F_j^H.  Gamma is similar to the Hermitian
// positive definite S = L^{-1} A L^{-H} (B = L L^H), so its spectrum is real
// positive; right eigenvectors are V = L Q and the left rows U_h = Q^H L^{-1}
// equal V^{-1}, giving u_l^H v_l = 1.
struct GammaSystem {
  CMatrix gamma;           // A B^{-1}
  Eigen::VectorXd lambda;  // descending, real positive
  CMatrix V;               // right eigenvectors (columns)
  CMatrix U_h;             // rows are u_l^H (adjoint left eigenvectors), == V^{-1}
  CMatrix W;               // B^{-1}
  // A consecutive eigenvalue gap fell below 1e-10 relative, away from the
  // structural unit cluster (shared column blocks always pin T - 2M
  // eigenvalues at exactly 1; those carry no gradient weight).
  bool degenerate = false;
};

GammaSystem gamma_system(const CMatrix& fi, const CMatrix& fj);

// Spectrum of Gamma only (descending), via the same Hermitian similarity.
Eigen::VectorXd gamma_eigenvalues(const CMatrix& fi, const CMatrix& fj);

// Pairwise separation measures evaluated on a GammaSystem's spectrum.
double beta_pair(const GammaSystem& gs);   // sum |log lambda_l|, no smoothing
double delta_pair(const GammaSystem& gs);  // sqrt(sum log^2 lambda_l)

// Symmetrized half-order divergence between the two received covariances:
// (1/2) log det( 2I + B^{-1}A + A^{-1}B ) - T log 2.  Zero iff A == B.
double j_half_pair(const CMatrix& fi, const CMatrix& fj);

// Where the perturbed codeword block X lives relative to the pair (F_i, F_j):
// only in F_i (the differing block of the first argument), only in F_j, or in
// both (a block the two joint codewords share).
enum class DGammaCase { ErrorInFi, ErrorInFj, Common };

// Directional derivative of Gamma for a perturbation of X along `dir`
// (a T x M direction; E_mn and i E_mn recover the coordinate derivatives):
//   ErrorInFi:        (D X^H + X D^H) W
//   ErrorInFj:  -Gamma (D X^H + X D^H) W
//   Common:  (I-Gamma) (D X^H + X D^H) W
CMatrix dgamma_dir(const GammaSystem& gs, DGammaCase which, const CMatrix& x, const CMatrix& dir);

// Same for the unit coordinate direction E_mn.
CMatrix dgamma_block(const GammaSystem& gs, DGammaCase which, const CMatrix& x, int m, int n);

struct ProxyDiagnostics {
  std::int64_t degenerate_pairs = 0;  // pairs re-solved with a jittered spectrum
};

// log sum_{F_i != F_j} exp(-N * pairvalue(F_i, F_j)) over ordered pairs of
// joint codewords, evaluated with a max-shifted log-sum-exp.  For Beta with
// epsilon > 0 the pair value is the smoothed sum |log lambda|^(1+eps).
double proxy_ub_cost(const JointConstellation& c, int N, ProxyKind kind, double epsilon = 0.0);

// Ambient gradient of proxy_ub_cost via the eigenvalue chain rule
//   d pairvalue = sum_l coef_l * u_l^H dGamma v_l / (u_l^H v_l),
// assembled in rank-one outer-product form.  Each unordered pair is
// eigendecomposed once; the mirrored ordered pair reuses the same
// eigenvectors with the reciprocal spectrum.
AmbientGradient proxy_ub_gradient(const JointConstellation& c, int N, ProxyKind kind,
                                  double epsilon = 0.0, double* cost_out = nullptr,
                                  ProxyDiagnostics* diag = nullptr);

}  // namespace ncmac
