#pragma once

#include <functional>
#include <string>

#include "ncmac/manifolds.hpp"
#include "ncmac/types.hpp"

namespace ncmac {

using CostValueFn = std::function<double(const JointConstellation&)>;

// Central finite-difference gradient of a scalar cost in the ambient space.
// Entry (a,b) of each block receives
//   [f(X + s E_ab) - f(X - s E_ab)] / 2s  +  i [f(X + i s E_ab) - f(X - i s E_ab)] / 2s
// with a per-entry step s = max(h |x_ab|, h/10).  Perturbed points are NOT
// re-normalized onto any manifold.  Entries whose evaluation throws are
// marked NaN.
AmbientGradient fd_gradient(const CostValueFn& f, const JointConstellation& c, double h = 1e-6);

// Worst coordinate of a comparison, for diagnostics.
struct WorstCoordinate {
  int user = -1;
  int codeword = -1;
  int row = -1;
  int col = -1;
  bool imaginary = false;  // whether the worst deviation is in the imaginary part
  double analytic = 0.0;
  double numeric = 0.0;
};

struct FdReport {
  // Largest |analytic - numeric| over entries, raw and after projecting both
  // gradients onto the tangent space at the base point.
  double max_abs_ambient = 0.0;
  double max_abs_tangent = 0.0;
  // The absolute deviations divided by max(||numeric||_inf, 1e-12), where the
  // infinity norm is over every entry of the corresponding gradient set.
  double max_rel_ambient = 0.0;
  double max_rel_tangent = 0.0;
  double denom_ambient = 0.0;
  double denom_tangent = 0.0;
  // Per-codeword peak absolute deviation (tangent), same layout as the grids.
  std::vector<std::vector<double>> codeword_max_abs;
  WorstCoordinate worst;        // worst tangent coordinate
  int invalid_entries = 0;      // NaN-marked finite-difference entries, skipped
};

// Compares an analytic ambient gradient against a finite-difference one, both
// raw and projected onto the tangent space of `manifold` at `base`.
FdReport compare(const Manifold& manifold, const JointConstellation& base,
                 const AmbientGradient& analytic, const AmbientGradient& numeric);

std::string format_report(const FdReport& report);

}  // namespace ncmac
