#pragma once

#include <cstdint>
#include <vector>

#include "ncmac/types.hpp"

namespace ncmac {

// One single-user error event: user `user` transmitted codeword tx[user] but
// the detector resolves rx[user], while every other user's codeword (the
// common multi-index) is detected correctly.  tx and rx are full multi-indices
// that differ exactly at `user`.
struct ErrorPair {
  int user = 0;
  MultiIndex tx;
  MultiIndex rx;
};

// All single-error pairs in deterministic order: user-major, then the common
// multi-index lexicographically, then tx index, then rx index.  Count is
// sum_k (prod_{u != k} L_u) * L_k (L_k - 1).
std::vector<ErrorPair> enumerate_error_pairs(const std::vector<int>& sizes);

// Dominant high-SNR error term of one pair:
//   det( F_e^H (I - F_j (F_j^H F_j)^{-1} F_j^H) F_e )^{-N}
// where F_e is the erroneous transmitted codeword block and F_j the detected
// joint codeword.  Requires T >= (K+1)M so the determinant is generically
// nonzero.  Throws NumericalError when the pair is (numerically) coincident.
double pep_term(const JointConstellation& c, const ErrorPair& pair, int N);

// Sum of pep_term over every single-error pair, in enumeration order.
double pep_ub_cost(const JointConstellation& c, int N);

// Ambient gradient of pep_ub_cost; optionally returns the cost evaluated from
// the same pass.
AmbientGradient pep_ub_gradient(const JointConstellation& c, int N, double* cost_out = nullptr);

struct MinMaxResult {
  double value = 0.0;        // largest pair term
  std::size_t pair_index = 0;  // position in enumeration order (first maximum)
  ErrorPair pair;
};

// Largest pair term and its pair; ties resolve to the first pair in
// enumeration order.
MinMaxResult minmax_pep_objective(const JointConstellation& c, int N);

// Ambient gradient of the single dominant term found by minmax_pep_objective.
AmbientGradient minmax_pep_gradient(const JointConstellation& c, int N,
                                    MinMaxResult* result_out = nullptr);

}  // namespace ncmac
