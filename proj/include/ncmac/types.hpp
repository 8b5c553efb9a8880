#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ncmac {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Joint symbol of a K-user system: one codeword index per user.
using MultiIndex = std::vector<int>;

// Malformed dimensions or arguments, detected before any numerics run.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation left its numerical domain (singular Gram matrix, coincident
// codewords, rank-deficient retraction, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad command-line usage or a malformed input file.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Codebook of one user: L matrices of size T x M.
struct UserCodebook {
  std::vector<CMatrix> codewords;

  int size() const { return static_cast<int>(codewords.size()); }
};

// Per-user codebooks, all sharing the same block length T and antenna count M.
struct JointConstellation {
  std::vector<UserCodebook> users;

  int num_users() const { return static_cast<int>(users.size()); }

  int T() const {
    return users.empty() || users[0].codewords.empty()
               ? 0
               : static_cast<int>(users[0].codewords[0].rows());
  }

  int M() const {
    return users.empty() || users[0].codewords.empty()
               ? 0
               : static_cast<int>(users[0].codewords[0].cols());
  }

  std::vector<int> sizes() const {
    std::vector<int> out;
    out.reserve(users.size());
    for (const auto& u : users) out.push_back(u.size());
    return out;
  }

  // Number of joint codewords, prod_k L_k.
  std::int64_t joint_count() const {
    std::int64_t n = 1;
    for (const auto& u : users) n *= u.size();
    return n;
  }

  // Throws DimensionError unless every codeword is T x M with T, M, L_k >= 1.
  void validate() const;

  // Column concatenation [X_{1,i_1} | ... | X_{K,i_K}], a T x KM matrix.
  CMatrix joint_codeword(const MultiIndex& idx) const;

  // Lexicographic linearization of a multi-index (user 1 most significant).
  std::int64_t flatten(const MultiIndex& idx) const;
  MultiIndex unflatten(std::int64_t flat) const;
};

// One T x M matrix per codeword, mirroring the constellation layout.  Used
// for ambient gradients and tangent directions.
struct MatrixGrid {
  std::vector<std::vector<CMatrix>> blocks;  // [user][codeword]

  static MatrixGrid zero_like(const JointConstellation& c);

  MatrixGrid& operator+=(const MatrixGrid& other);
  MatrixGrid& operator*=(double s);

  double squared_norm() const;  // sum of squared Frobenius norms
};

using AmbientGradient = MatrixGrid;
using TangentDirection = MatrixGrid;

}  // namespace ncmac
