// Acceptance gate: ten end-to-end checks covering gradients, bounds,
// optimizer feasibility, simulated error-rate orderings, and reproducibility.
// Prints one [PASS]/[FAIL] line per criterion; exit 0 iff every criterion
// that ran passed.  Optional arguments select criteria by number.

#include <array>
#include <chrono>
#include <cstdarg>
#include <fcntl.h>
#include <unistd.h>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ncmac/cli.hpp"
#include "ncmac/cost.hpp"
#include "ncmac/gradcheck.hpp"
#include "ncmac/manifolds.hpp"
#include "ncmac/optimizer.hpp"
#include "ncmac/pep_cost.hpp"
#include "ncmac/proxy_cost.hpp"
#include "ncmac/rng.hpp"
#include "ncmac/sim.hpp"
#include "ncmac/types.hpp"

using namespace ncmac;

namespace {

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: analytic gradients vs central finite differences.

bool criterion_1(std::string& detail) {
  struct Scen {
    int t, m, l;
  };
  const std::array<Scen, 5> scens = {{{4, 1, 2}, {5, 1, 3}, {6, 2, 2}, {5, 1, 4}, {6, 1, 4}}};
  const std::array<ManifoldKind, 3> kinds = {ManifoldKind::Grassmann,
                                             ManifoldKind::Oblique,
                                             ManifoldKind::Trace};
  const std::array<CostKind, 3> costs = {CostKind::PepUb, CostKind::BetaUb,
                                         CostKind::DeltaUb};
  double worst_strict = 0.0;  // pep_ub and delta_ub, tolerance 1e-4
  double worst_beta = 0.0;    // beta_ub, tolerance 1e-3 near smoothed kinks
  bool ok = true;
  for (size_t ci = 0; ci < costs.size(); ++ci) {
    const auto cost = make_cost(costs[ci], 2, 1e-3);
    for (size_t mi = 0; mi < kinds.size(); ++mi) {
      const Manifold manifold{kinds[mi]};
      for (size_t si = 0; si < scens.size(); ++si) {
        Rng rng = substream(11 + si, mi, ci);
        const JointConstellation c = random_constellation(
            manifold, scens[si].t, scens[si].m, {scens[si].l, scens[si].l}, rng);
        const CostEvaluation eval = cost->value_and_gradient(c);
        const AmbientGradient numeric = fd_gradient(
            [&](const JointConstellation& x) { return cost->value(x); }, c);
        const FdReport rep = compare(manifold, c, eval.gradient, numeric);
        if (rep.invalid_entries != 0) ok = false;
        double& worst = costs[ci] == CostKind::BetaUb ? worst_beta : worst_strict;
        worst = std::max(worst, rep.max_rel_tangent);
      }
    }
  }
  ok = ok && worst_strict <= 1e-4 && worst_beta <= 1e-3;
  detail = fmt("projected FD agreement: worst rel %.2e (pep/delta), %.2e (beta)",
               worst_strict, worst_beta);
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 2: eigenvalue directional derivatives on simple spectra.

bool criterion_2(std::string& detail) {
  const int trials = 100;
  const double h = 1e-5;
  double worst = 0.0;
  int used = 0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = substream(2000, trial, 0);
    const CMatrix fi = random_cgaussian(4, 2, rng);
    const CMatrix fj = random_cgaussian(4, 2, rng);
    const CMatrix dir = random_cgaussian(4, 2, rng);
    const GammaSystem gs = gamma_system(fi, fj);
    if (gs.degenerate) continue;  // draws are full rank almost surely
    ++used;

    const bool perturb_i = trial % 2 == 0;
    const CMatrix dgamma = dgamma_dir(
        gs, perturb_i ? DGammaCase::ErrorInFi : DGammaCase::ErrorInFj,
        perturb_i ? fi : fj, dir);

    Eigen::VectorXd analytic(gs.lambda.size());
    for (int l = 0; l < gs.lambda.size(); ++l)
      analytic(l) = (gs.U_h.row(l) * dgamma * gs.V.col(l)).value().real();

    const CMatrix fi_p = perturb_i ? CMatrix(fi + h * dir) : fi;
    const CMatrix fi_m = perturb_i ? CMatrix(fi - h * dir) : fi;
    const CMatrix fj_p = perturb_i ? fj : CMatrix(fj + h * dir);
    const CMatrix fj_m = perturb_i ? fj : CMatrix(fj - h * dir);
    const Eigen::VectorXd fd =
        (gamma_eigenvalues(fi_p, fj_p) - gamma_eigenvalues(fi_m, fj_m)) / (2.0 * h);

    const double scale = std::max(fd.cwiseAbs().maxCoeff(), 1e-12);
    worst = std::max(worst, (analytic - fd).cwiseAbs().maxCoeff() / scale);
  }
  detail = fmt("spectral directional derivatives: %d trials, worst rel %.2e", used,
               worst);
  return used >= 95 && worst <= 1e-6;
}

// ---------------------------------------------------------------------------
// Criterion 3: pairwise separation bounds and the SPD distance oracle.

bool criterion_3(std::string& detail) {
  double worst_slack = 0.0;
  double worst_dist = 0.0;
  bool ok = true;
  for (int i = 0; i < 1000; ++i) {
    Rng rng = substream(3000, i, 0);
    const int t = 4 + i % 5;
    const int cols = 1 + i % 3;
    const CMatrix fi = random_cgaussian(t, cols, rng);
    const CMatrix fj = random_cgaussian(t, cols, rng);
    const Eigen::VectorXd mu = gamma_eigenvalues(fi, fj);
    double beta = 0.0, delta2 = 0.0;
    for (int l = 0; l < mu.size(); ++l) {
      const double lg = std::log(mu(l));
      beta += std::abs(lg);
      delta2 += lg * lg;
    }
    const double delta = std::sqrt(delta2);
    worst_slack = std::max(worst_slack, delta - beta);
    worst_slack = std::max(worst_slack, beta - std::sqrt(double(t)) * delta);
    if (delta > beta + 1e-12) ok = false;
    if (beta > std::sqrt(double(t)) * delta + 1e-12) ok = false;

    // Affine-invariant distance between A = I + fi fi^H and B = I + fj fj^H.
    const CMatrix a = CMatrix::Identity(t, t) + fi * fi.adjoint();
    const CMatrix b = CMatrix::Identity(t, t) + fj * fj.adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es_b(b);
    const CMatrix b_mhalf =
        es_b.eigenvectors() *
        es_b.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        es_b.eigenvectors().adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es_s(CMatrix(b_mhalf * a * b_mhalf));
    const double dist = es_s.eigenvalues().array().log().square().sum();
    const double err =
        std::abs(delta - std::sqrt(dist)) / std::max(1.0, std::sqrt(dist));
    worst_dist = std::max(worst_dist, err);
    if (err > 1e-8) ok = false;
  }
  detail = fmt("1000 pairs: bound slack %.2e, SPD-distance dev %.2e", worst_slack,
               worst_dist);
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 4: single-user reduction of the pairwise union bound.

bool criterion_4(std::string& detail) {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Rng rng = substream(4000, i, 0);
    int t = 3 + i % 4;
    int m = 1 + i % 2;
    if (t < 2 * m) m = 1;
    const int l = 2 + i % 3;
    const int n = 1 + i % 3;
    Manifold grass;
    const JointConstellation c = random_constellation(grass, t, m, {l}, rng);

    const double impl = pep_ub_cost(c, n);
    double oracle = 0.0;
    for (int a = 0; a < l; ++a)
      for (int b = 0; b < l; ++b) {
        if (a == b) continue;
        const CMatrix& xa = c.users[0].codewords[a];
        const CMatrix& xb = c.users[0].codewords[b];
        const CMatrix g =
            CMatrix::Identity(m, m) - xa.adjoint() * xb * xb.adjoint() * xa;
        oracle += std::pow(g.determinant().real(), -n);
      }
    worst = std::max(worst, std::abs(impl - oracle) / oracle);
  }
  detail = fmt("100 single-user codebooks: worst rel deviation %.2e", worst);
  return worst <= 1e-12;
}

// ---------------------------------------------------------------------------
// Criterion 5: every accepted step is feasible and strictly improves the
// objective its line search descended.  For the smooth criteria that is the
// trace itself (strictly decreasing rows); the worst-pair criterion
// re-selects its dominant term per iteration, so its acceptances are checked
// against the recorded evaluation sequence and its rows may legitimately
// rise when dominance switches, while the run must still lower the true
// objective overall.

// Forwards to an inner criterion while logging every evaluation the descent
// loop makes, in call order.
class RecordingCost final : public CostFunction {
 public:
  struct Call {
    bool with_gradient;
    double value;
  };
  explicit RecordingCost(const CostFunction& inner) : inner_(inner) {}
  std::string name() const override { return inner_.name(); }
  double value(const JointConstellation& c) const override {
    const double v = inner_.value(c);
    calls.push_back({false, v});
    return v;
  }
  CostEvaluation value_and_gradient(const JointConstellation& c) const override {
    CostEvaluation out = inner_.value_and_gradient(c);
    calls.push_back({true, out.value});
    return out;
  }

  mutable std::vector<Call> calls;

 private:
  const CostFunction& inner_;
};

bool criterion_5(std::string& detail) {
  const std::array<CostKind, 4> costs = {CostKind::PepUb, CostKind::MinMaxPep,
                                         CostKind::BetaUb, CostKind::DeltaUb};
  const std::array<ManifoldKind, 3> kinds = {ManifoldKind::Grassmann,
                                             ManifoldKind::Oblique,
                                             ManifoldKind::Trace};
  OptimizerConfig cfg;
  cfg.max_iters = 150;
  double worst_residual = 0.0;
  int total_iters = 0;
  bool ok = true;
  int combo = 0;
  for (CostKind kind : costs)
    for (ManifoldKind mk : kinds) {
      const auto inner = make_cost(kind, 2, 1e-3);
      const RecordingCost cost(*inner);
      const DesignResult dr =
          design(Manifold{mk}, cost, 4, 1, {4, 4}, 1, 500 + combo++, cfg);
      total_iters += dr.best.iterations;
      for (size_t r = 0; r < dr.best.trace.size(); ++r) {
        worst_residual = std::max(worst_residual, dr.best.trace[r].residual);
        if (dr.best.trace[r].residual > 1e-10) ok = false;
        if (kind != CostKind::MinMaxPep && r > 0 &&
            !(dr.best.trace[r].cost < dr.best.trace[r - 1].cost))
          ok = false;
      }
      if (dr.best.iterations < 1) ok = false;  // at least one accepted step
      // Replay the evaluation log: between consecutive gradient evaluations
      // the last value-only call is the accepted trial, and it must improve
      // on the value the earlier gradient evaluation reported.
      int accepted = 0;
      size_t anchor = 0;
      if (cost.calls.empty() || !cost.calls[0].with_gradient) ok = false;
      for (size_t i = 1; i < cost.calls.size(); ++i) {
        if (!cost.calls[i].with_gradient) continue;
        if (i - anchor < 2 || !(cost.calls[i - 1].value < cost.calls[anchor].value))
          ok = false;
        anchor = i;
        ++accepted;
      }
      if (accepted != dr.best.iterations) ok = false;
      if (kind == CostKind::MinMaxPep &&
          !(dr.best.final_cost < dr.best.trace.front().cost))
        ok = false;  // net drop in the true worst-pair objective
    }
  detail = fmt("12 cost/manifold runs, %d accepted steps, max residual %.2e",
               total_iters, worst_residual);
  return ok;
}

// ---------------------------------------------------------------------------
// Shared large-scenario designs (T=5, M=2, N=3, L=16 per user, two users).

struct DesignedCurve {
  JointConstellation constellation;
  double final_cost = 0.0;
  SerCurve curve;  // {12, 16} dB, 2e5 blocks, seed 777
};

// Block count sized so the designed constellations' 16 dB error rates
// (~5e-5 for the two best designs) rest on hundreds of thousands of
// decisions: orderings between close designs would be coin flips at ten
// times fewer blocks.
SerCurve simulate_big(const JointConstellation& c) {
  SimConfig cfg;
  cfg.snr_db = {12.0, 16.0};
  cfg.N = 3;
  cfg.blocks = 200000;
  cfg.seed = 777;
  return run_ser(c, cfg);
}

DesignedCurve design_big(CostKind kind, ManifoldKind mk, std::uint64_t seed) {
  const auto cost = make_cost(kind, 3, 1e-3);
  OptimizerConfig cfg;
  cfg.max_iters = 200;
  const DesignResult dr = design(Manifold{mk}, *cost, 5, 2, {16, 16}, 3, seed, cfg);
  DesignedCurve out;
  out.constellation = dr.best.constellation;
  out.final_cost = dr.best.final_cost;
  out.curve = simulate_big(out.constellation);
  return out;
}

// Lazily built; index 0 Grassmann, 1 oblique, 2 trace.
const DesignedCurve& big_delta_design(int index) {
  static std::array<std::unique_ptr<DesignedCurve>, 3> cache;
  if (!cache[index]) {
    const std::array<ManifoldKind, 3> kinds = {ManifoldKind::Grassmann,
                                               ManifoldKind::Oblique,
                                               ManifoldKind::Trace};
    cache[index] = std::make_unique<DesignedCurve>(
        design_big(CostKind::DeltaUb, kinds[index], 101 + index));
  }
  return *cache[index];
}

double ser_standard_error(double p, std::int64_t blocks, int users) {
  const double n = static_cast<double>(blocks) * users;
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
}

// Criterion 6: delta designs across manifolds, error-rate ordering at 16 dB.

bool criterion_6(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const DesignedCurve& grass = big_delta_design(0);
  const DesignedCurve& oblique = big_delta_design(1);
  const DesignedCurve& trace = big_delta_design(2);

  const SnrResult& pg = grass.curve.points[1];
  const SnrResult& po = oblique.curve.points[1];
  const SnrResult& pt = trace.curve.points[1];
  const double se = std::sqrt(
      std::pow(ser_standard_error(pg.avg_ser, pg.blocks, 2), 2) +
      std::pow(ser_standard_error(pt.avg_ser, pt.blocks, 2), 2));

  const bool ordered = pt.avg_ser < po.avg_ser && po.avg_ser < pg.avg_ser;
  const bool separated = pg.avg_ser - pt.avg_ser >= 3.0 * se;
  detail = fmt(
      "16 dB avg SER trace %.2e < oblique %.2e < grassmann %.2e, gap %.1f se, %.0f s",
      pt.avg_ser, po.avg_ser, pg.avg_ser, se > 0 ? (pg.avg_ser - pt.avg_ser) / se : 0.0,
      elapsed_s(start));
  return ordered && separated;
}

// Criterion 7: pairwise-bound designs vs the max-term design vs random.

bool criterion_7(std::string& detail) {
  // The worst-pair criterion improves one term per iteration, so it needs a
  // far larger iteration budget than the aggregate criteria to converge; at
  // this scenario size an iteration costs a few milliseconds.
  OptimizerConfig cfg;
  cfg.max_iters = 3000;
  const auto pep_cost = make_cost(CostKind::PepUb, 3);
  const auto mm_cost = make_cost(CostKind::MinMaxPep, 3);
  Manifold grass;
  const DesignResult pep_dr = design(grass, *pep_cost, 3, 1, {16, 16}, 3, 201, cfg);
  const DesignResult mm_dr = design(grass, *mm_cost, 3, 1, {16, 16}, 3, 202, cfg);
  Rng rng = substream(203, 0, 0);
  const JointConstellation random_c = random_constellation(grass, 3, 1, {16, 16}, rng);

  SimConfig scfg;
  scfg.snr_db = {16.0};
  scfg.N = 3;
  scfg.blocks = 50000;
  scfg.seed = 888;
  const double ser_pep = run_ser(pep_dr.best.constellation, scfg).points[0].avg_ser;
  const double ser_mm = run_ser(mm_dr.best.constellation, scfg).points[0].avg_ser;
  const double ser_rand = run_ser(random_c, scfg).points[0].avg_ser;

  detail = fmt("16 dB avg SER pep_ub %.2e < minmax %.2e < random %.2e", ser_pep,
               ser_mm, ser_rand);
  return ser_pep < ser_mm && ser_mm < ser_rand;
}

// Criterion 8: delta vs beta designs on the trace manifold.

bool criterion_8(std::string& detail) {
  const DesignedCurve& delta = big_delta_design(2);
  const DesignedCurve beta = design_big(CostKind::BetaUb, ManifoldKind::Trace, 104);

  const SnrResult& pd = delta.curve.points[1];
  const SnrResult& pb = beta.curve.points[1];
  const double se = std::sqrt(
      std::pow(ser_standard_error(pd.avg_ser, pd.blocks, 2), 2) +
      std::pow(ser_standard_error(pb.avg_ser, pb.blocks, 2), 2));
  detail = fmt("16 dB avg SER delta %.2e vs beta %.2e (se %.1e)", pd.avg_ser,
               pb.avg_ser, se);
  // Fail only if the beta design is better by more than 3 standard errors.
  return pd.avg_ser <= pb.avg_ser + 3.0 * se;
}

// Criterion 9: noiseless detection on a designed constellation.

bool criterion_9(std::string& detail) {
  const DesignedCurve& trace = big_delta_design(2);
  SimConfig cfg;
  cfg.snr_db = {120.0};
  cfg.N = 3;
  cfg.blocks = 1000;
  cfg.seed = 555;
  const SerCurve curve = run_ser(trace.constellation, cfg);
  std::int64_t total_errors = 0;
  for (std::int64_t e : curve.points[0].errors) total_errors += e;
  detail = fmt("120 dB, 1000 blocks: %lld symbol errors",
               static_cast<long long>(total_errors));
  return total_errors == 0 && curve.points[0].avg_ser == 0.0;
}

// Criterion 10: byte-identical artifacts from repeated seeded runs.

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<unreadable: " + path + ">";
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Runs a CLI invocation with stdout parked on /dev/null so the acceptance
// output stays one line per criterion.
int run_quiet(const std::vector<std::string>& args) {
  std::fflush(stdout);
  const int saved = dup(1);
  const int null_fd = open("/dev/null", O_WRONLY);
  dup2(null_fd, 1);
  const int code = cli::run(args);
  std::fflush(stdout);
  dup2(saved, 1);
  close(null_fd);
  close(saved);
  return code;
}

bool criterion_10(std::string& detail) {
  const std::string dir = "/tmp/ncmac_acceptance";
  const std::string c1 = dir + "_c1.txt", c2 = dir + "_c2.txt";
  const std::string s1 = dir + "_s1.csv", s2 = dir + "_s2.csv";

  auto design_args = [&](const std::string& out) {
    return std::vector<std::string>{
        "design", "--T", "4",     "--M",        "1",        "--N",    "2",
        "--K",    "2",   "--L",   "4",          "--manifold", "trace",
        "--cost", "delta_ub",     "--seed",     "42",       "--max-iter", "60",
        "--out",  out};
  };
  auto sim_args = [&](const std::string& out) {
    return std::vector<std::string>{"simulate", "--in", c1,   "--N",      "2",
                                    "--snr",    "0,10", "--blocks", "2000",
                                    "--seed",   "5",    "--out",    out};
  };

  bool ok = run_quiet(design_args(c1)) == 0;
  ok = ok && run_quiet(design_args(c2)) == 0;
  ok = ok && run_quiet(sim_args(s1)) == 0;
  ok = ok && run_quiet(sim_args(s2)) == 0;

  const bool files_equal = slurp(c1) == slurp(c2) &&
                           slurp(c1 + ".trace.csv") == slurp(c2 + ".trace.csv");
  const bool csv_equal = slurp(s1) == slurp(s2);
  for (const std::string& p :
       {c1, c2, c1 + ".trace.csv", c2 + ".trace.csv", s1, s2})
    std::remove(p.c_str());

  detail = fmt("repeat runs: design files %s, SER CSVs %s",
               files_equal ? "identical" : "DIFFER", csv_equal ? "identical" : "DIFFER");
  return ok && files_equal && csv_equal;
}

using Criterion = bool (*)(std::string&);

struct Entry {
  int number;
  const char* name;
  Criterion fn;
};

const std::array<Entry, 10> kCriteria = {{
    {1, "cost gradients match finite differences", criterion_1},
    {2, "eigenvalue directional derivatives", criterion_2},
    {3, "pairwise separation bounds and distance oracle", criterion_3},
    {4, "single-user union-bound reduction", criterion_4},
    {5, "feasible strictly improving accepted steps", criterion_5},
    {6, "delta designs ordered across manifolds at 16 dB", criterion_6},
    {7, "union-bound design beats max-term and random at 16 dB", criterion_7},
    {8, "delta design not worse than beta design", criterion_8},
    {9, "noiseless detection is exact", criterion_9},
    {10, "seeded runs reproduce artifacts byte-exactly", criterion_10},
}};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  bool all_ok = true;
  for (const Entry& entry : kCriteria) {
    if (!wanted.empty() && !wanted.count(entry.number)) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = entry.fn(detail);
    } catch (const std::exception& e) {
      detail = fmt("exception: %s", e.what());
    }
    std::printf("[%s] %2d %s — %s\n", ok ? "PASS" : "FAIL", entry.number, entry.name,
                detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
