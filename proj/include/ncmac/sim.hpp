#pragma once

#include <cstdint>
#include <vector>

#include "ncmac/rng.hpp"
#include "ncmac/types.hpp"

namespace ncmac {

struct SimConfig {
  std::vector<double> snr_db;        // SNR grid, dB (rho = 10^(dB/10))
  std::vector<double> beta;          // per-user SNR factors; empty = all ones;
                                     // the first user is the reference (beta[0] == 1)
  int N = 1;                         // receive antennas
  std::int64_t blocks = 1000;        // coherence blocks per SNR point
  std::uint64_t seed = 0;
  std::int64_t early_stop_errors = 0;  // stop a point once every user has this
                                       // many errors; 0 disables
  int threads = 1;  // accepted for interface compatibility; simulation runs
                    // serially (block substreams make any schedule identical)
};

// Per (SNR point, joint codeword): Cholesky factor of
// R_i = sum_k beta_k X_{k,i_k} X_{k,i_k}^H + (M/(T rho)) I and the ML penalty
// N log det R_i.
struct DetectorTables {
  int N = 1;
  std::vector<double> sqrt_beta;                // per user
  std::vector<double> snr_db;
  std::vector<std::vector<CMatrix>> chol;       // [snr][flat]
  std::vector<std::vector<double>> penalty;     // [snr][flat]
};

DetectorTables build_detector_tables(const JointConstellation& c, const SimConfig& cfg);

// ML decision metric tr(Y^H R_i^{-1} Y) + N log det R_i via the precomputed
// Cholesky factor.
double detector_metric(const DetectorTables& tables, int snr_index, std::int64_t flat,
                       const CMatrix& y);

// Flat index minimizing the metric; exact ties resolve to the lowest index.
std::int64_t detect(const DetectorTables& tables, int snr_index, const CMatrix& y);

struct BlockOutcome {
  MultiIndex transmitted;
  MultiIndex detected;
};

// One coherence block: uniform transmitted indices (user order), per-user
// i.i.d. CN(0,1) channels (row-major, user order), CN(0,1) noise (row-major),
// then ML detection.
BlockOutcome simulate_block(const JointConstellation& c, const DetectorTables& tables,
                            int snr_index, Rng& rng);

struct SnrResult {
  double snr_db = 0.0;
  std::int64_t blocks = 0;              // blocks actually simulated
  std::vector<std::int64_t> errors;     // per user
  std::vector<double> ser;              // per user
  double avg_ser = 0.0;                 // mean of the per-user rates
};

struct SerCurve {
  std::vector<SnrResult> points;
};

// Monte Carlo symbol error rates over the SNR grid.  Block b of SNR point s
// draws from substream(seed, s, b), so results are independent of any
// execution schedule and bit-reproducible for a fixed seed.
SerCurve run_ser(const JointConstellation& c, const SimConfig& cfg);

}  // namespace ncmac
