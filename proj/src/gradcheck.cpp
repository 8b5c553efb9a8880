#include "ncmac/gradcheck.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ncmac {

namespace {

// Evaluates f at c with one entry shifted by delta; NaN when f throws.
double shifted_eval(const CostValueFn& f, JointConstellation c, int k, int i, int r, int col,
                    Complex delta) {
  c.users[k].codewords[i](r, col) += delta;
  try {
    return f(c);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

AmbientGradient fd_gradient(const CostValueFn& f, const JointConstellation& c, double h) {
  c.validate();
  if (!(h > 0.0)) throw DimensionError("finite-difference step must be positive");
  AmbientGradient g = AmbientGradient::zero_like(c);
  for (int k = 0; k < c.num_users(); ++k) {
    for (int i = 0; i < c.users[k].size(); ++i) {
      for (int r = 0; r < c.T(); ++r) {
        for (int col = 0; col < c.M(); ++col) {
          const double mag = std::abs(c.users[k].codewords[i](r, col));
          const double s = std::max(h * mag, 0.1 * h);
          const double fp = shifted_eval(f, c, k, i, r, col, Complex(s, 0.0));
          const double fm = shifted_eval(f, c, k, i, r, col, Complex(-s, 0.0));
          const double gp = shifted_eval(f, c, k, i, r, col, Complex(0.0, s));
          const double gm = shifted_eval(f, c, k, i, r, col, Complex(0.0, -s));
          g.blocks[k][i](r, col) = Complex((fp - fm) / (2.0 * s), (gp - gm) / (2.0 * s));
        }
      }
    }
  }
  return g;
}

namespace {

struct ScanResult {
  double max_abs = 0.0;
  double denom = 0.0;
  int invalid = 0;
  WorstCoordinate worst;
  std::vector<std::vector<double>> per_codeword;
};

ScanResult scan(const MatrixGrid& analytic, const MatrixGrid& numeric) {
  ScanResult out;
  out.per_codeword.resize(analytic.blocks.size());
  for (std::size_t k = 0; k < analytic.blocks.size(); ++k) {
    out.per_codeword[k].assign(analytic.blocks[k].size(), 0.0);
    for (std::size_t i = 0; i < analytic.blocks[k].size(); ++i) {
      const CMatrix& a = analytic.blocks[k][i];
      const CMatrix& n = numeric.blocks[k][i];
      for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
          const double parts_a[2] = {a(r, c).real(), a(r, c).imag()};
          const double parts_n[2] = {n(r, c).real(), n(r, c).imag()};
          for (int p = 0; p < 2; ++p) {
            if (std::isnan(parts_n[p])) {
              ++out.invalid;
              continue;
            }
            out.denom = std::max(out.denom, std::abs(parts_n[p]));
            const double dev = std::abs(parts_a[p] - parts_n[p]);
            out.per_codeword[k][i] = std::max(out.per_codeword[k][i], dev);
            if (dev > out.max_abs) {
              out.max_abs = dev;
              out.worst = {static_cast<int>(k), static_cast<int>(i), static_cast<int>(r),
                           static_cast<int>(c), p == 1, parts_a[p], parts_n[p]};
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

FdReport compare(const Manifold& manifold, const JointConstellation& base,
                 const AmbientGradient& analytic, const AmbientGradient& numeric) {
  const ScanResult ambient = scan(analytic, numeric);

  // NaN-marked entries must not poison the tangent projection: replace them
  // with the analytic value so their projected deviation is zero.
  AmbientGradient cleaned = numeric;
  for (std::size_t k = 0; k < cleaned.blocks.size(); ++k)
    for (std::size_t i = 0; i < cleaned.blocks[k].size(); ++i)
      for (Eigen::Index r = 0; r < cleaned.blocks[k][i].rows(); ++r)
        for (Eigen::Index c = 0; c < cleaned.blocks[k][i].cols(); ++c) {
          Complex& v = cleaned.blocks[k][i](r, c);
          const Complex a = analytic.blocks[k][i](r, c);
          if (std::isnan(v.real())) v.real(a.real());
          if (std::isnan(v.imag())) v.imag(a.imag());
        }

  const TangentDirection a_tan = project_tangent(manifold, base, analytic);
  const TangentDirection n_tan = project_tangent(manifold, base, cleaned);
  const ScanResult tangent = scan(a_tan, n_tan);

  FdReport report;
  report.max_abs_ambient = ambient.max_abs;
  report.max_abs_tangent = tangent.max_abs;
  report.denom_ambient = std::max(ambient.denom, 1e-12);
  report.denom_tangent = std::max(tangent.denom, 1e-12);
  report.max_rel_ambient = ambient.max_abs / report.denom_ambient;
  report.max_rel_tangent = tangent.max_abs / report.denom_tangent;
  report.codeword_max_abs = tangent.per_codeword;
  report.worst = tangent.worst;
  report.invalid_entries = ambient.invalid;
  return report;
}

std::string format_report(const FdReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << std::scientific;
  os << "ambient: max_abs=" << r.max_abs_ambient << " max_rel=" << r.max_rel_ambient
     << " (denom=" << r.denom_ambient << ")\n";
  os << "tangent: max_abs=" << r.max_abs_tangent << " max_rel=" << r.max_rel_tangent
     << " (denom=" << r.denom_tangent << ")\n";
  for (std::size_t k = 0; k < r.codeword_max_abs.size(); ++k)
    for (std::size_t i = 0; i < r.codeword_max_abs[k].size(); ++i)
      os << "user " << k << " codeword " << i << " max_abs=" << r.codeword_max_abs[k][i]
         << "\n";
  os << "worst: user " << r.worst.user << " codeword " << r.worst.codeword << " entry ("
     << r.worst.row << "," << r.worst.col << (r.worst.imaginary ? ") imag" : ") real")
     << " analytic=" << r.worst.analytic << " numeric=" << r.worst.numeric << "\n";
  if (r.invalid_entries > 0) os << "invalid finite-difference entries: " << r.invalid_entries << "\n";
  return os.str();
}

}  // namespace ncmac
