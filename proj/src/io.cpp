#include "ncmac/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

namespace ncmac {

namespace {

constexpr const char* kMagic = "ncmac-constellation";

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_for_write(const std::string& path) {
  File f(std::fopen(path.c_str(), "w"));
  if (!f) throw UsageError("cannot open for writing: " + path);
  return f;
}

// Pulls the next whitespace-separated token; empty result means EOF.
std::string next_token(std::istream& in) {
  std::string tok;
  in >> tok;
  return tok;
}

std::string expect_key(std::istream& in, const std::string& key) {
  const std::string tok = next_token(in);
  if (tok != key)
    throw UsageError("constellation file: expected '" + key + "', got '" + tok + "'");
  return tok;
}

std::int64_t parse_int(const std::string& tok, const std::string& field) {
  try {
    size_t pos = 0;
    const std::int64_t v = std::stoll(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw UsageError("constellation file: bad integer for " + field + ": '" + tok + "'");
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", x);
  return buf;
}

double parse_double(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw UsageError("bad floating-point literal: '" + text + "'");
  return v;
}

void save_constellation(const std::string& path, const ConstellationFile& file) {
  file.constellation.validate();
  File f = open_for_write(path);
  const JointConstellation& c = file.constellation;
  std::fprintf(f.get(), "%s %d\n", kMagic, file.format_version);
  std::fprintf(f.get(), "T %d\nM %d\nK %d\nL", c.T(), c.M(), c.num_users());
  for (int size : c.sizes()) std::fprintf(f.get(), " %d", size);
  std::fprintf(f.get(), "\nmanifold %s\ncost %s\nseed %" PRIu64 "\nfinal_cost %s\n",
               to_string(file.manifold).c_str(), to_string(file.cost).c_str(),
               file.seed, format_double(file.final_cost).c_str());
  for (int k = 0; k < c.num_users(); ++k) {
    for (int i = 0; i < c.users[k].size(); ++i) {
      std::fprintf(f.get(), "codeword %d %d\n", k, i);
      const CMatrix& x = c.users[k].codewords[i];
      for (int r = 0; r < x.rows(); ++r) {
        for (int col = 0; col < x.cols(); ++col) {
          const Complex z = x(r, col);
          std::fprintf(f.get(), "%s%s %s", col == 0 ? "" : " ",
                       format_double(z.real()).c_str(),
                       format_double(z.imag()).c_str());
        }
        std::fprintf(f.get(), "\n");
      }
    }
  }
}

ConstellationFile load_constellation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open constellation file: " + path);

  ConstellationFile file;
  expect_key(in, kMagic);
  file.format_version = static_cast<int>(parse_int(next_token(in), "format version"));
  if (file.format_version != 1)
    throw UsageError("constellation file: unsupported format version");

  expect_key(in, "T");
  const int t = static_cast<int>(parse_int(next_token(in), "T"));
  expect_key(in, "M");
  const int m = static_cast<int>(parse_int(next_token(in), "M"));
  expect_key(in, "K");
  const int k_users = static_cast<int>(parse_int(next_token(in), "K"));
  if (t < 1 || m < 1 || k_users < 1)
    throw UsageError("constellation file: T, M, K must be positive");

  expect_key(in, "L");
  std::vector<int> sizes(k_users);
  for (int k = 0; k < k_users; ++k)
    sizes[k] = static_cast<int>(parse_int(next_token(in), "L"));

  expect_key(in, "manifold");
  file.manifold = manifold_from_string(next_token(in));
  expect_key(in, "cost");
  file.cost = cost_from_string(next_token(in));
  expect_key(in, "seed");
  file.seed = static_cast<std::uint64_t>(parse_int(next_token(in), "seed"));
  expect_key(in, "final_cost");
  file.final_cost = parse_double(next_token(in));

  JointConstellation& c = file.constellation;
  for (int k = 0; k < k_users; ++k) {
    UserCodebook book;
    for (int i = 0; i < sizes[k]; ++i) {
      expect_key(in, "codeword");
      if (parse_int(next_token(in), "codeword user") != k ||
          parse_int(next_token(in), "codeword index") != i)
        throw UsageError("constellation file: codeword sections out of order");
      CMatrix x(t, m);
      for (int r = 0; r < t; ++r)
        for (int col = 0; col < m; ++col) {
          const std::string re = next_token(in);
          const std::string im = next_token(in);
          if (re.empty() || im.empty())
            throw UsageError("constellation file: truncated codeword data");
          x(r, col) = Complex(parse_double(re), parse_double(im));
        }
      book.codewords.push_back(std::move(x));
    }
    c.users.push_back(std::move(book));
  }
  if (!next_token(in).empty())
    throw UsageError("constellation file: trailing content");
  c.validate();
  return file;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  File f = open_for_write(path);
  std::fprintf(f.get(), "iteration,cost,step,grad_norm,residual\n");
  for (const TraceRow& row : trace)
    std::fprintf(f.get(), "%d,%.17g,%.17g,%.17g,%.17g\n", row.iteration, row.cost,
                 row.step, row.grad_norm, row.residual);
}

void write_ser_csv(const std::string& path, const SerCurve& curve) {
  File f = open_for_write(path);
  const int k_users =
      curve.points.empty() ? 0 : static_cast<int>(curve.points[0].ser.size());
  std::fprintf(f.get(), "snr_db,blocks");
  for (int k = 0; k < k_users; ++k) std::fprintf(f.get(), ",errors_user%d", k + 1);
  for (int k = 0; k < k_users; ++k) std::fprintf(f.get(), ",ser_user%d", k + 1);
  std::fprintf(f.get(), ",avg_ser\n");
  for (const SnrResult& p : curve.points) {
    std::fprintf(f.get(), "%.17g,%" PRId64, p.snr_db, p.blocks);
    for (std::int64_t e : p.errors) std::fprintf(f.get(), ",%" PRId64, e);
    for (double s : p.ser) std::fprintf(f.get(), ",%.17g", s);
    std::fprintf(f.get(), ",%.17g\n", p.avg_ser);
  }
}

void write_plot_data(const std::string& stem, const SerCurve& curve) {
  const int k_users =
      curve.points.empty() ? 0 : static_cast<int>(curve.points[0].ser.size());
  for (int k = 0; k <= k_users; ++k) {
    std::ostringstream name;
    if (k < k_users)
      name << stem << "_user" << (k + 1) << ".csv";
    else
      name << stem << "_avg.csv";
    File f = open_for_write(name.str());
    std::fprintf(f.get(), "snr_db,ser\n");
    for (const SnrResult& p : curve.points)
      std::fprintf(f.get(), "%.17g,%.17g\n", p.snr_db,
                   k < k_users ? p.ser[k] : p.avg_ser);
  }
}

}  // namespace ncmac
