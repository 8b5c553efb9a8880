#include "ncmac/sim.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

namespace ncmac {

namespace {

void check_sim_config(const JointConstellation& c, const SimConfig& cfg) {
  c.validate();
  if (cfg.N < 1) throw DimensionError("sim: N must be >= 1");
  if (cfg.snr_db.empty()) throw DimensionError("sim: SNR grid is empty");
  if (!cfg.beta.empty()) {
    if (static_cast<int>(cfg.beta.size()) != c.num_users())
      throw DimensionError("sim: beta size must match the number of users");
    if (cfg.beta[0] != 1.0)
      throw DimensionError("sim: beta[0] must be 1 (first user is the reference)");
    for (double b : cfg.beta)
      if (!(b > 0.0)) throw DimensionError("sim: beta entries must be positive");
  }
  if (cfg.early_stop_errors < 0)
    throw DimensionError("sim: early_stop_errors must be >= 0");
  if (cfg.threads < 1) throw DimensionError("sim: threads must be >= 1");
}

}  // namespace

DetectorTables build_detector_tables(const JointConstellation& c, const SimConfig& cfg) {
  check_sim_config(c, cfg);
  const int k_users = c.num_users();
  const int t = c.T();
  const std::int64_t n_joint = c.joint_count();

  DetectorTables tables;
  tables.N = cfg.N;
  tables.snr_db = cfg.snr_db;
  tables.sqrt_beta.resize(k_users, 1.0);
  for (int k = 0; k < k_users && !cfg.beta.empty(); ++k)
    tables.sqrt_beta[k] = std::sqrt(cfg.beta[k]);

  const int n_snr = static_cast<int>(cfg.snr_db.size());
  tables.chol.assign(n_snr, {});
  tables.penalty.assign(n_snr, {});
  for (int s = 0; s < n_snr; ++s) {
    const double rho = std::pow(10.0, cfg.snr_db[s] / 10.0);
    const double sigma2 = static_cast<double>(c.M()) / (static_cast<double>(t) * rho);
    tables.chol[s].reserve(n_joint);
    tables.penalty[s].reserve(n_joint);
    for (std::int64_t flat = 0; flat < n_joint; ++flat) {
      const MultiIndex idx = c.unflatten(flat);
      CMatrix r = sigma2 * CMatrix::Identity(t, t);
      for (int k = 0; k < k_users; ++k) {
        const CMatrix& x = c.users[k].codewords[idx[k]];
        const double beta = tables.sqrt_beta[k] * tables.sqrt_beta[k];
        r.noalias() += beta * (x * x.adjoint());
      }
      Eigen::LLT<CMatrix> llt(r);
      if (llt.info() != Eigen::Success)
        throw NumericalError("sim: covariance Cholesky failed");
      CMatrix l = llt.matrixL();
      double logdet = 0.0;
      for (int i = 0; i < t; ++i) logdet += 2.0 * std::log(l(i, i).real());
      tables.chol[s].push_back(std::move(l));
      tables.penalty[s].push_back(static_cast<double>(cfg.N) * logdet);
    }
  }
  return tables;
}

double detector_metric(const DetectorTables& tables, int snr_index, std::int64_t flat,
                       const CMatrix& y) {
  const CMatrix& l = tables.chol[snr_index][flat];
  const CMatrix z = l.triangularView<Eigen::Lower>().solve(y);
  return z.squaredNorm() + tables.penalty[snr_index][flat];
}

std::int64_t detect(const DetectorTables& tables, int snr_index, const CMatrix& y) {
  const std::int64_t n_joint = static_cast<std::int64_t>(tables.chol[snr_index].size());
  std::int64_t best = 0;
  double best_metric = detector_metric(tables, snr_index, 0, y);
  for (std::int64_t flat = 1; flat < n_joint; ++flat) {
    const double m = detector_metric(tables, snr_index, flat, y);
    if (m < best_metric) {
      best_metric = m;
      best = flat;
    }
  }
  return best;
}

BlockOutcome simulate_block(const JointConstellation& c, const DetectorTables& tables,
                            int snr_index, Rng& rng) {
  const int k_users = c.num_users();
  const int t = c.T();
  const int m = c.M();
  const int n = tables.N;

  BlockOutcome out;
  out.transmitted.resize(k_users);
  for (int k = 0; k < k_users; ++k) {
    const auto size = static_cast<std::uint64_t>(c.users[k].size());
    out.transmitted[k] = static_cast<std::int64_t>(rng() % size);
  }

  const double rho = std::pow(10.0, tables.snr_db[snr_index] / 10.0);
  const double noise_scale =
      std::sqrt(static_cast<double>(m) / (static_cast<double>(t) * rho));

  CMatrix y = CMatrix::Zero(t, n);
  for (int k = 0; k < k_users; ++k) {
    const CMatrix h = random_cgaussian(m, n, rng);
    const CMatrix& x = c.users[k].codewords[out.transmitted[k]];
    y.noalias() += tables.sqrt_beta[k] * (x * h);
  }
  y.noalias() += noise_scale * random_cgaussian(t, n, rng);

  out.detected = c.unflatten(detect(tables, snr_index, y));
  return out;
}

SerCurve run_ser(const JointConstellation& c, const SimConfig& cfg) {
  check_sim_config(c, cfg);
  if (cfg.blocks < 1) throw DimensionError("sim: blocks must be >= 1");

  const DetectorTables tables = build_detector_tables(c, cfg);
  const int k_users = c.num_users();

  SerCurve curve;
  curve.points.reserve(cfg.snr_db.size());
  for (int s = 0; s < static_cast<int>(cfg.snr_db.size()); ++s) {
    SnrResult res;
    res.snr_db = cfg.snr_db[s];
    res.errors.assign(k_users, 0);

    std::int64_t done = 0;
    for (std::int64_t b = 0; b < cfg.blocks; ++b) {
      Rng rng = substream(cfg.seed, static_cast<std::uint64_t>(s),
                          static_cast<std::uint64_t>(b));
      const BlockOutcome outcome = simulate_block(c, tables, s, rng);
      for (int k = 0; k < k_users; ++k)
        if (outcome.detected[k] != outcome.transmitted[k]) ++res.errors[k];
      ++done;
      if (cfg.early_stop_errors > 0) {
        bool all_reached = true;
        for (int k = 0; k < k_users; ++k)
          if (res.errors[k] < cfg.early_stop_errors) all_reached = false;
        if (all_reached) break;
      }
    }

    res.blocks = done;
    res.ser.resize(k_users);
    for (int k = 0; k < k_users; ++k)
      res.ser[k] = static_cast<double>(res.errors[k]) / static_cast<double>(done);
    res.avg_ser = std::accumulate(res.ser.begin(), res.ser.end(), 0.0) /
                  static_cast<double>(k_users);
    curve.points.push_back(std::move(res));
  }
  return curve;
}

}  // namespace ncmac
