#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ncmac/cost.hpp"
#include "ncmac/manifolds.hpp"
#include "ncmac/optimizer.hpp"
#include "ncmac/sim.hpp"
#include "ncmac/types.hpp"

namespace ncmac {

// Text container for a designed constellation.  Doubles are stored as C99
// hex-floats, so load(save(c)) reproduces every entry bit for bit.
struct ConstellationFile {
  int format_version = 1;
  JointConstellation constellation;
  ManifoldKind manifold = ManifoldKind::Grassmann;
  CostKind cost = CostKind::DeltaUb;
  std::uint64_t seed = 0;
  double final_cost = 0.0;
};

// Exact textual encoding of a double (C99 %a) and its inverse.
std::string format_double(double x);
double parse_double(const std::string& text);

void save_constellation(const std::string& path, const ConstellationFile& file);
ConstellationFile load_constellation(const std::string& path);

// CSV columns: iteration,cost,step,grad_norm,residual
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

// CSV columns: snr_db,blocks,errors_user1..K,ser_user1..K,avg_ser
void write_ser_csv(const std::string& path, const SerCurve& curve);

// One two-column (snr_db,ser) CSV per user plus one for the average,
// written as <stem>_user<k>.csv and <stem>_avg.csv.
void write_plot_data(const std::string& stem, const SerCurve& curve);

}  // namespace ncmac
