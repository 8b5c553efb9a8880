#include "ncmac/manifolds.hpp"

#include <cmath>

namespace ncmac {

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::Grassmann: return "grassmann";
    case ManifoldKind::Oblique: return "oblique";
    case ManifoldKind::Trace: return "trace";
  }
  return "unknown";
}

ManifoldKind manifold_from_string(const std::string& name) {
  if (name == "grassmann") return ManifoldKind::Grassmann;
  if (name == "oblique") return ManifoldKind::Oblique;
  if (name == "trace") return ManifoldKind::Trace;
  throw UsageError("unknown manifold '" + name + "' (expected grassmann|oblique|trace)");
}

CMatrix qr_positive(const CMatrix& a) {
  const Eigen::Index t = a.rows();
  const Eigen::Index m = a.cols();
  Eigen::HouseholderQR<CMatrix> qr(a);
  CMatrix q = qr.householderQ() * CMatrix::Identity(t, m);
  const CMatrix& qrmat = qr.matrixQR();

  double max_diag = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) max_diag = std::max(max_diag, std::abs(qrmat(j, j)));
  for (Eigen::Index j = 0; j < m; ++j) {
    const double r = std::abs(qrmat(j, j));
    if (r <= 1e-12 * std::max(1.0, max_diag))
      throw NumericalError("rank-deficient retraction update (QR diagonal entry ~ 0)");
    q.col(j) *= qrmat(j, j) / r;  // a = (Q diag(phi)) (diag(phi)^-1 R), R diagonal now positive
  }
  return q;
}

CMatrix random_codeword(ManifoldKind kind, int T, int M, Rng& rng) {
  if (T < 1 || M < 1) throw DimensionError("codeword dimensions must be positive");
  if (kind == ManifoldKind::Grassmann && T < M)
    throw DimensionError("unitary codewords need T >= M");
  CMatrix g = random_cgaussian(T, M, rng);
  switch (kind) {
    case ManifoldKind::Grassmann:
      return qr_positive(g);
    case ManifoldKind::Oblique:
    case ManifoldKind::Trace: {
      const double n = g.norm();
      if (n == 0.0) throw NumericalError("zero draw cannot be normalized");
      return g * (std::sqrt(static_cast<double>(M)) / n);
    }
  }
  throw DimensionError("unreachable manifold kind");
}

JointConstellation random_constellation(const Manifold& manifold, int T, int M,
                                        const std::vector<int>& sizes, Rng& rng) {
  if (sizes.empty()) throw DimensionError("constellation needs at least one user");
  JointConstellation c;
  c.users.resize(sizes.size());
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] < 1) throw DimensionError("codebook sizes must be positive");
    c.users[k].codewords.reserve(sizes[k]);
    for (int i = 0; i < sizes[k]; ++i)
      c.users[k].codewords.push_back(random_codeword(manifold.kind, T, M, rng));
    if (manifold.kind == ManifoldKind::Trace) {
      // Rescale the whole codebook once so the average power is exactly M.
      double total = 0.0;
      for (const auto& x : c.users[k].codewords) total += x.squaredNorm();
      const double s = std::sqrt(static_cast<double>(M) * sizes[k] / total);
      for (auto& x : c.users[k].codewords) x *= s;
    }
  }
  c.validate();
  return c;
}

namespace {

void check_grid_shape(const JointConstellation& base, const MatrixGrid& grid) {
  if (grid.blocks.size() != base.users.size())
    throw DimensionError("matrix grid does not match the constellation layout");
  for (std::size_t k = 0; k < grid.blocks.size(); ++k) {
    if (grid.blocks[k].size() != base.users[k].codewords.size())
      throw DimensionError("matrix grid does not match the constellation layout");
    for (const auto& b : grid.blocks[k])
      if (b.rows() != base.T() || b.cols() != base.M())
        throw DimensionError("matrix grid block dimensions differ from the codewords");
  }
}

}  // namespace

TangentDirection project_tangent(const Manifold& manifold, const JointConstellation& base,
                                 const AmbientGradient& ambient) {
  base.validate();
  check_grid_shape(base, ambient);
  TangentDirection out = ambient;
  const int K = base.num_users();
  switch (manifold.kind) {
    case ManifoldKind::Grassmann:
      for (int k = 0; k < K; ++k)
        for (std::size_t i = 0; i < out.blocks[k].size(); ++i) {
          const CMatrix& x = base.users[k].codewords[i];
          CMatrix& z = out.blocks[k][i];
          z -= x * (x.adjoint() * z);  // (I - X X^H) Z
        }
      break;
    case ManifoldKind::Oblique:
      for (int k = 0; k < K; ++k)
        for (std::size_t i = 0; i < out.blocks[k].size(); ++i) {
          const CMatrix& x = base.users[k].codewords[i];
          CMatrix& z = out.blocks[k][i];
          const double coeff =
              (x.conjugate().cwiseProduct(z)).sum().real() / x.squaredNorm();
          z -= coeff * x;  // sphere tangent in the flattened T*M space
        }
      break;
    case ManifoldKind::Trace:
      for (int k = 0; k < K; ++k) {
        if (manifold.trace_sum_projector) {
          CMatrix xc = CMatrix::Zero(base.T(), base.M());
          for (const auto& x : base.users[k].codewords) xc += x;
          const double denom = xc.squaredNorm();
          if (denom < 1e-30) continue;  // sum direction vanishes, nothing to remove
          for (std::size_t i = 0; i < out.blocks[k].size(); ++i) {
            CMatrix& z = out.blocks[k][i];
            const double coeff = (xc.conjugate().cwiseProduct(z)).sum().real() / denom;
            z -= coeff * xc;
          }
        } else {
          // Sphere tangent in the flattened T*M*L_k space of the whole codebook.
          double inner = 0.0;
          double denom = 0.0;
          for (std::size_t i = 0; i < out.blocks[k].size(); ++i) {
            const CMatrix& x = base.users[k].codewords[i];
            inner += (x.conjugate().cwiseProduct(out.blocks[k][i])).sum().real();
            denom += x.squaredNorm();
          }
          const double coeff = inner / denom;
          for (std::size_t i = 0; i < out.blocks[k].size(); ++i)
            out.blocks[k][i] -= coeff * base.users[k].codewords[i];
        }
      }
      break;
  }
  return out;
}

JointConstellation retract(const Manifold& manifold, const JointConstellation& base,
                           const TangentDirection& step) {
  base.validate();
  check_grid_shape(base, step);
  JointConstellation out = base;
  const int K = base.num_users();
  const double m = static_cast<double>(base.M());
  switch (manifold.kind) {
    case ManifoldKind::Grassmann:
      for (int k = 0; k < K; ++k)
        for (std::size_t i = 0; i < out.users[k].codewords.size(); ++i)
          out.users[k].codewords[i] =
              qr_positive(base.users[k].codewords[i] + step.blocks[k][i]);
      break;
    case ManifoldKind::Oblique:
      for (int k = 0; k < K; ++k)
        for (std::size_t i = 0; i < out.users[k].codewords.size(); ++i) {
          CMatrix y = base.users[k].codewords[i] + step.blocks[k][i];
          const double n = y.norm();
          if (n < 1e-300) throw NumericalError("retraction update vanished");
          out.users[k].codewords[i] = y * (std::sqrt(m) / n);
        }
      break;
    case ManifoldKind::Trace:
      for (int k = 0; k < K; ++k) {
        double total = 0.0;
        for (std::size_t i = 0; i < out.users[k].codewords.size(); ++i) {
          out.users[k].codewords[i] = base.users[k].codewords[i] + step.blocks[k][i];
          total += out.users[k].codewords[i].squaredNorm();
        }
        if (total < 1e-300) throw NumericalError("retraction update vanished");
        const double s = std::sqrt(m * out.users[k].codewords.size() / total);
        for (auto& x : out.users[k].codewords) x *= s;
      }
      break;
  }
  return out;
}

double constraint_residual(const Manifold& manifold, const JointConstellation& c) {
  c.validate();
  const double m = static_cast<double>(c.M());
  double worst = 0.0;
  switch (manifold.kind) {
    case ManifoldKind::Grassmann:
      for (const auto& user : c.users)
        for (const auto& x : user.codewords) {
          const CMatrix gram = x.adjoint() * x;
          worst = std::max(worst, (gram - CMatrix::Identity(c.M(), c.M())).norm());
        }
      break;
    case ManifoldKind::Oblique:
      for (const auto& user : c.users)
        for (const auto& x : user.codewords)
          worst = std::max(worst, std::abs(x.squaredNorm() - m));
      break;
    case ManifoldKind::Trace:
      for (const auto& user : c.users) {
        double total = 0.0;
        for (const auto& x : user.codewords) total += x.squaredNorm();
        worst = std::max(worst, std::abs(total / user.codewords.size() - m));
      }
      break;
  }
  return worst;
}

}  // namespace ncmac
