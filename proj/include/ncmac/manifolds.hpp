#pragma once

#include <string>
#include <vector>

#include "ncmac/rng.hpp"
#include "ncmac/types.hpp"

namespace ncmac {

// Feasible sets for the transmit power constraint:
//   Grassmann — every codeword is unitary, X^H X = I_M;
//   Oblique   — every codeword sits on the sphere ||X||_F^2 = M;
//   Trace     — each user's codebook satisfies (1/L_k) sum_i ||X_{k,i}||_F^2 = M.
enum class ManifoldKind { Grassmann, Oblique, Trace };

struct Manifold {
  ManifoldKind kind = ManifoldKind::Grassmann;
  // Opt-in variant of the trace projector: removes from each codeword's
  // direction the component along the codebook sum sum_i X_{k,i} instead of
  // the component along the flattened codebook itself.
  bool trace_sum_projector = false;
};

std::string to_string(ManifoldKind kind);
ManifoldKind manifold_from_string(const std::string& name);

// One feasible codeword.  Grassmann draws are Haar-distributed (QR of a
// Gaussian matrix with the R diagonal rotated positive); sphere draws are
// Gaussian matrices rescaled to Frobenius norm sqrt(M).  For the trace kind
// the per-codeword draw is the sphere draw; the codebook-level average-power
// normalization happens in random_constellation.
CMatrix random_codeword(ManifoldKind kind, int T, int M, Rng& rng);

JointConstellation random_constellation(const Manifold& manifold, int T, int M,
                                        const std::vector<int>& sizes, Rng& rng);

// Orthogonal projection of an ambient direction onto the tangent space at
// `base`, applied per codeword (Grassmann, oblique) or per user codebook
// (trace).
TangentDirection project_tangent(const Manifold& manifold, const JointConstellation& base,
                                 const AmbientGradient& ambient);

// First-order retraction of base + step back onto the manifold: QR with a
// positive-real R diagonal for Grassmann, norm rescaling for the sphere
// kinds.  Throws NumericalError when the update is rank deficient (Grassmann)
// or identically zero (sphere kinds).
JointConstellation retract(const Manifold& manifold, const JointConstellation& base,
                           const TangentDirection& step);

// Worst constraint violation over the constellation: max ||X^H X - I||_F for
// Grassmann, max | ||X||_F^2 - M | for oblique, max per-user
// | (1/L_k) sum_i ||X_{k,i}||_F^2 - M | for trace.
double constraint_residual(const Manifold& manifold, const JointConstellation& c);

// Thin QR factor with every R diagonal entry rotated to the positive real
// axis, which makes the factor unique and the retraction continuous.
CMatrix qr_positive(const CMatrix& a);

}  // namespace ncmac
