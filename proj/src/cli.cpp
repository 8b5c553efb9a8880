#include "ncmac/cli.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "ncmac/cost.hpp"
#include "ncmac/gradcheck.hpp"
#include "ncmac/io.hpp"
#include "ncmac/manifolds.hpp"
#include "ncmac/optimizer.hpp"
#include "ncmac/pep_cost.hpp"
#include "ncmac/proxy_cost.hpp"
#include "ncmac/rng.hpp"
#include "ncmac/sim.hpp"

namespace ncmac::cli {

namespace {

const std::set<std::string> kValueFlags = {
    "--T",    "--M",     "--N",      "--K",     "--L",        "--bits",
    "--manifold", "--cost", "--seed", "--snr",  "--blocks",   "--out",
    "--in",   "--step0", "--max-iter", "--restarts", "--epsilon"};
const std::set<std::string> kBoolFlags = {"--emit-plot-data"};

class Args {
 public:
  explicit Args(const std::vector<std::string>& argv) {
    for (size_t i = 1; i < argv.size(); ++i) {
      const std::string& arg = argv[i];
      if (kBoolFlags.count(arg)) {
        bools_.insert(arg);
        continue;
      }
      if (!kValueFlags.count(arg)) throw UsageError("unknown flag: " + arg);
      if (i + 1 >= argv.size()) throw UsageError("missing value for " + arg);
      if (!values_.emplace(arg, argv[++i]).second)
        throw UsageError("duplicate flag: " + arg);
    }
  }

  bool flag(const std::string& name) const { return bools_.count(name) > 0; }
  bool has(const std::string& name) const { return values_.count(name) > 0; }

  std::string require(const std::string& name) const {
    const auto it = values_.find(name);
    if (it == values_.end()) throw UsageError("missing required flag " + name);
    return it->second;
  }

  std::string get(const std::string& name, const std::string& fallback) const {
    const auto it = values_.find(name);
    return it == values_.end() ? fallback : it->second;
  }

  std::int64_t get_int(const std::string& name, std::int64_t fallback) const {
    if (!has(name)) return fallback;
    return to_int(require(name), name);
  }

  double get_double(const std::string& name, double fallback) const {
    if (!has(name)) return fallback;
    const std::string text = require(name);
    try {
      size_t pos = 0;
      const double v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw UsageError("bad number for " + name + ": '" + text + "'");
    }
  }

  static std::int64_t to_int(const std::string& text, const std::string& field) {
    try {
      size_t pos = 0;
      const std::int64_t v = std::stoll(text, &pos);
      if (pos != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw UsageError("bad integer for " + field + ": '" + text + "'");
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> bools_;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

struct Scenario {
  int T = 0;
  int M = 1;
  int N = 1;
  int K = 1;
  std::vector<int> sizes;
};

Scenario resolve_scenario(const Args& a) {
  Scenario sc;
  sc.T = static_cast<int>(Args::to_int(a.require("--T"), "--T"));
  sc.M = static_cast<int>(a.get_int("--M", 1));
  sc.N = static_cast<int>(a.get_int("--N", 1));
  if (sc.T < 1) throw UsageError("--T must be >= 1");
  if (sc.M < 1) throw UsageError("--M must be >= 1");
  if (sc.N < 1) throw UsageError("--N must be >= 1");
  if (sc.T <= sc.M)
    throw UsageError("--T must exceed --M (codewords need more rows than columns)");

  if (a.has("--L") && a.has("--bits"))
    throw UsageError("--L and --bits are mutually exclusive");
  if (!a.has("--L") && !a.has("--bits"))
    throw UsageError("missing required flag --L (or --bits)");

  if (a.has("--L")) {
    for (const std::string& tok : split(a.require("--L"), ',')) {
      const std::int64_t l = Args::to_int(tok, "--L");
      if (l < 1) throw UsageError("--L entries must be >= 1");
      sc.sizes.push_back(static_cast<int>(l));
    }
  } else {
    for (const std::string& tok : split(a.require("--bits"), ',')) {
      const std::int64_t b = Args::to_int(tok, "--bits");
      if (b < 0 || b > 24) throw UsageError("--bits entries must be in [0, 24]");
      sc.sizes.push_back(1 << b);
    }
  }
  if (sc.sizes.empty()) throw UsageError("empty codebook size list");

  if (a.has("--K")) {
    sc.K = static_cast<int>(a.get_int("--K", 1));
    if (sc.K < 1) throw UsageError("--K must be >= 1");
    if (sc.sizes.size() == 1 && sc.K > 1)
      sc.sizes.assign(sc.K, sc.sizes[0]);
    else if (static_cast<int>(sc.sizes.size()) != sc.K)
      throw UsageError("--K disagrees with the number of --L/--bits entries");
  } else {
    sc.K = static_cast<int>(sc.sizes.size());
  }
  return sc;
}

std::vector<double> parse_snr(const std::string& spec) {
  std::vector<double> grid;
  if (spec.find(':') != std::string::npos) {
    const std::vector<std::string> parts = split(spec, ':');
    if (parts.size() != 3)
      throw UsageError("--snr range must be start:step:stop, got '" + spec + "'");
    double vals[3];
    for (int i = 0; i < 3; ++i) {
      try {
        size_t pos = 0;
        vals[i] = std::stod(parts[i], &pos);
        if (pos != parts[i].size()) throw std::invalid_argument(parts[i]);
      } catch (const std::exception&) {
        throw UsageError("bad --snr range component: '" + parts[i] + "'");
      }
    }
    if (vals[1] <= 0.0) throw UsageError("--snr step must be positive");
    for (double v = vals[0]; v <= vals[2] + 1e-9; v += vals[1]) grid.push_back(v);
  } else {
    for (const std::string& tok : split(spec, ',')) {
      try {
        size_t pos = 0;
        grid.push_back(std::stod(tok, &pos));
        if (pos != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw UsageError("bad --snr value: '" + tok + "'");
      }
    }
  }
  if (grid.empty()) throw UsageError("--snr produced an empty grid");
  return grid;
}

int env_threads() {
  const char* env = std::getenv("NCMAC_THREADS");
  if (!env || *env == '\0') return 1;
  const std::int64_t v = Args::to_int(env, "NCMAC_THREADS");
  if (v < 1) throw UsageError("NCMAC_THREADS must be >= 1");
  return static_cast<int>(v);
}

std::string join_sizes(const std::vector<int>& sizes) {
  std::string out;
  for (size_t i = 0; i < sizes.size(); ++i)
    out += (i ? "," : "") + std::to_string(sizes[i]);
  return out;
}

std::string plot_stem(const std::string& out) {
  if (out.size() > 4 && out.substr(out.size() - 4) == ".csv")
    return out.substr(0, out.size() - 4);
  return out;
}

void warn_below_full_diversity(CostKind kind, const Scenario& sc) {
  if ((kind == CostKind::PepUb || kind == CostKind::MinMaxPep) &&
      sc.T < (sc.K + 1) * sc.M)
    std::fprintf(stderr,
                 "warning: %s assumes T >= (K+1)*M for full diversity "
                 "(T=%d, K=%d, M=%d)\n",
                 to_string(kind).c_str(), sc.T, sc.K, sc.M);
}

int cmd_design(const Args& a) {
  const Scenario sc = resolve_scenario(a);
  const Manifold manifold{manifold_from_string(a.get("--manifold", "grassmann"))};
  const CostKind kind = cost_from_string(a.get("--cost", "delta_ub"));
  const double epsilon = a.get_double("--epsilon", 1e-3);
  const auto seed = static_cast<std::uint64_t>(a.get_int("--seed", 0));
  const int restarts = static_cast<int>(a.get_int("--restarts", 1));
  const std::string out = a.require("--out");

  OptimizerConfig cfg;
  cfg.step0 = a.get_double("--step0", cfg.step0);
  cfg.max_iters = static_cast<int>(a.get_int("--max-iter", cfg.max_iters));

  warn_below_full_diversity(kind, sc);

  const auto cost = make_cost(kind, sc.N, epsilon);
  const DesignResult result =
      design(manifold, *cost, sc.T, sc.M, sc.sizes, restarts, seed, cfg);

  ConstellationFile file;
  file.constellation = result.best.constellation;
  file.manifold = manifold.kind;
  file.cost = kind;
  file.seed = seed;
  file.final_cost = result.best.final_cost;
  save_constellation(out, file);
  write_trace_csv(out + ".trace.csv", result.best.trace);

  std::printf("design: cost %s manifold %s T %d M %d N %d K %d L %s seed %" PRIu64 "\n",
              to_string(kind).c_str(), to_string(manifold.kind).c_str(), sc.T, sc.M,
              sc.N, sc.K, join_sizes(sc.sizes).c_str(), seed);
  std::printf("restarts %d best %d iterations %d stop %s\n", restarts,
              result.best_restart, result.best.iterations,
              to_string(result.best.stop).c_str());
  std::printf("final_cost %.17g\n", result.best.final_cost);
  std::printf("residual %.3e\n",
              constraint_residual(manifold, result.best.constellation));
  std::printf("wrote %s\nwrote %s.trace.csv\n", out.c_str(), out.c_str());
  return 0;
}

int cmd_simulate(const Args& a) {
  const std::string in = a.require("--in");
  const std::string out = a.require("--out");
  const ConstellationFile file = load_constellation(in);

  SimConfig cfg;
  cfg.snr_db = parse_snr(a.get("--snr", "0:2:20"));
  cfg.blocks = a.get_int("--blocks", 1000);
  cfg.N = static_cast<int>(a.get_int("--N", 1));
  cfg.seed = static_cast<std::uint64_t>(a.get_int("--seed", 0));
  cfg.threads = env_threads();

  const SerCurve curve = run_ser(file.constellation, cfg);
  write_ser_csv(out, curve);

  std::printf("simulate: %s (T %d M %d K %d L %s) N %d blocks %" PRId64
              " seed %" PRIu64 "\n",
              in.c_str(), file.constellation.T(), file.constellation.M(),
              file.constellation.num_users(),
              join_sizes(file.constellation.sizes()).c_str(), cfg.N, cfg.blocks,
              cfg.seed);
  for (const SnrResult& p : curve.points)
    std::printf("snr %.6g dB blocks %" PRId64 " avg_ser %.17g\n", p.snr_db, p.blocks,
                p.avg_ser);
  std::printf("wrote %s\n", out.c_str());
  if (a.flag("--emit-plot-data")) {
    write_plot_data(plot_stem(out), curve);
    std::printf("wrote %s_user*.csv and %s_avg.csv\n", plot_stem(out).c_str(),
                plot_stem(out).c_str());
  }
  return 0;
}

int cmd_info(const Args& a) {
  const ConstellationFile file = load_constellation(a.require("--in"));
  const int n = static_cast<int>(a.get_int("--N", 1));
  const double epsilon = a.get_double("--epsilon", 1e-3);
  if (n < 1) throw UsageError("--N must be >= 1");
  const JointConstellation& c = file.constellation;
  const int t = c.T();
  const int k_users = c.num_users();

  std::printf("info: T %d M %d K %d L %s manifold %s cost %s seed %" PRIu64 "\n", t,
              c.M(), k_users, join_sizes(c.sizes()).c_str(),
              to_string(file.manifold).c_str(), to_string(file.cost).c_str(),
              file.seed);
  std::printf("file final_cost %.17g\n", file.final_cost);
  std::printf("residual %.3e (manifold %s)\n",
              constraint_residual(Manifold{file.manifold}, c),
              to_string(file.manifold).c_str());

  if (c.joint_count() < 2) {
    std::printf("metrics skipped (fewer than two joint codewords)\n");
    return 0;
  }

  const bool full_diversity = t >= (k_users + 1) * c.M();
  if (full_diversity) {
    std::printf("pep_ub (N %d) %.17g\n", n, pep_ub_cost(c, n));
    const MinMaxResult mm = minmax_pep_objective(c, n);
    std::printf("minmax_pep (N %d) %.17g (user %d tx %" PRId64 " rx %" PRId64 ")\n", n,
                mm.value, mm.pair.user, c.flatten(mm.pair.tx), c.flatten(mm.pair.rx));
  } else {
    std::printf("pep_ub skipped (requires T >= (K+1)*M)\n");
    std::printf("minmax_pep skipped (requires T >= (K+1)*M)\n");
  }
  std::printf("beta_ub (N %d epsilon %.3g) %.17g\n", n, epsilon,
              proxy_ub_cost(c, n, ProxyKind::Beta, epsilon));
  std::printf("delta_ub (N %d) %.17g\n", n, proxy_ub_cost(c, n, ProxyKind::Delta));

  double j_min = std::numeric_limits<double>::infinity();
  double delta_min = std::numeric_limits<double>::infinity();
  double beta_min = std::numeric_limits<double>::infinity();
  std::int64_t j_p = 0, j_q = 0;
  for (std::int64_t p = 0; p + 1 < c.joint_count(); ++p) {
    const CMatrix fp = c.joint_codeword(c.unflatten(p));
    for (std::int64_t q = p + 1; q < c.joint_count(); ++q) {
      const CMatrix fq = c.joint_codeword(c.unflatten(q));
      const double j = j_half_pair(fp, fq);
      if (j < j_min) {
        j_min = j;
        j_p = p;
        j_q = q;
      }
      const Eigen::VectorXd mu = gamma_eigenvalues(fp, fq);
      double d2 = 0.0, b = 0.0;
      for (int l = 0; l < mu.size(); ++l) {
        const double lg = std::log(mu(l));
        d2 += lg * lg;
        b += std::abs(lg);
      }
      delta_min = std::min(delta_min, std::sqrt(d2));
      beta_min = std::min(beta_min, b);
    }
  }
  std::printf("j_half_min %.17g (pair %" PRId64 " %" PRId64 ")\n", j_min, j_p, j_q);
  std::printf("delta_min %.17g beta_min %.17g\n", delta_min, beta_min);
  std::printf("pair bound check sqrt(T)*delta_min >= beta_min: %s\n",
              std::sqrt(static_cast<double>(t)) * delta_min >= beta_min - 1e-12
                  ? "OK"
                  : "VIOLATION");
  return 0;
}

int cmd_gradcheck(const Args& a) {
  const Scenario sc = resolve_scenario(a);
  const Manifold manifold{manifold_from_string(a.get("--manifold", "grassmann"))};
  const CostKind kind = cost_from_string(a.get("--cost", "delta_ub"));
  const double epsilon = a.get_double("--epsilon", 1e-3);
  const auto seed = static_cast<std::uint64_t>(a.get_int("--seed", 0));

  warn_below_full_diversity(kind, sc);

  Rng rng = substream(seed, 0, 0);
  const JointConstellation c =
      random_constellation(manifold, sc.T, sc.M, sc.sizes, rng);
  const auto cost = make_cost(kind, sc.N, epsilon);

  const CostEvaluation eval = cost->value_and_gradient(c);
  const AmbientGradient numeric =
      fd_gradient([&](const JointConstellation& x) { return cost->value(x); }, c);
  const FdReport report = compare(manifold, c, eval.gradient, numeric);

  std::printf("gradcheck: cost %s manifold %s T %d M %d N %d K %d L %s seed %" PRIu64
              "\n",
              to_string(kind).c_str(), to_string(manifold.kind).c_str(), sc.T, sc.M,
              sc.N, sc.K, join_sizes(sc.sizes).c_str(), seed);
  std::printf("cost_value %.17g\n", eval.value);
  std::printf("%s", format_report(report).c_str());
  for (size_t k = 0; k < report.codeword_max_abs.size(); ++k)
    for (size_t i = 0; i < report.codeword_max_abs[k].size(); ++i)
      std::printf("row user %zu codeword %zu max_abs %.3e\n", k, i,
                  report.codeword_max_abs[k][i]);
  return 0;
}

}  // namespace

std::string usage() {
  return R"(ncmac - constellation design and simulation for the noncoherent MIMO
multiple access channel

usage: ncmac <command> [flags]

commands:
  design     optimize a constellation and write it to --out (+ <out>.trace.csv)
  simulate   Monte Carlo symbol error rates for a saved constellation
  gradcheck  compare an analytic cost gradient against finite differences
  info       report metrics and constraint residuals for a saved constellation

scenario flags (design, gradcheck):
  --T <int>        symbol periods per coherence block (required)
  --M <int>        transmit antennas per user (default 1)
  --N <int>        receive antennas (default 1; also used by simulate, info)
  --K <int>        number of users (default: length of the --L/--bits list)
  --L <list>       codebook sizes, comma separated; one value applies to all users
  --bits <list>    codebook sizes as exponents, L_k = 2^bits_k (alternative to --L)
  --manifold <s>   grassmann | oblique | trace (default grassmann)
  --cost <s>       pep_ub | minmax_pep | beta_ub | delta_ub (default delta_ub)
  --seed <int>     RNG seed (default 0)

optimizer flags (design):
  --step0 <x>      initial step size (default 0.1)
  --max-iter <n>   iteration cap (default 2000)
  --restarts <n>   independent random restarts, best design kept (default 1)
  --epsilon <x>    beta_ub smoothing exponent (default 1e-3; also gradcheck, info)

simulation flags (simulate):
  --snr <spec>     dB grid, "start:step:stop" or a comma list (default 0:2:20)
  --blocks <n>     coherence blocks per SNR point (default 1000)
  --emit-plot-data also write per-user and average (snr_db,ser) CSVs

io flags:
  --out <path>     output path (design: constellation file; simulate: SER CSV)
  --in <path>      input constellation file (simulate, info)

environment:
  NCMAC_THREADS    worker thread budget; results are schedule independent

file schemas:
  constellation    text header (T, M, K, L, manifold, cost, seed, final_cost)
                   plus hex-float codeword entries; round-trips bit-exactly
  trace CSV        iteration,cost,step,grad_norm,residual
  SER CSV          snr_db,blocks,errors_user1..K,ser_user1..K,avg_ser

exit codes: 0 success, 2 usage or configuration error, 3 numerical failure
)";
}

int run(const std::vector<std::string>& args) {
  try {
    if (args.empty()) {
      std::fputs(usage().c_str(), stderr);
      return 2;
    }
    const std::string& cmd = args[0];
    if (cmd == "help" || cmd == "--help" || cmd == "-h") {
      std::fputs(usage().c_str(), stdout);
      return 0;
    }
    const Args a(args);
    if (cmd == "design") return cmd_design(a);
    if (cmd == "simulate") return cmd_simulate(a);
    if (cmd == "gradcheck") return cmd_gradcheck(a);
    if (cmd == "info") return cmd_info(a);
    throw UsageError("unknown command: " + cmd);
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace ncmac::cli
