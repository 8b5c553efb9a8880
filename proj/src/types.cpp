#include "ncmac/types.hpp"

namespace ncmac {

void JointConstellation::validate() const {
  if (users.empty()) throw DimensionError("constellation has no users");
  const int t = T();
  const int m = M();
  if (t < 1 || m < 1) throw DimensionError("codewords must be at least 1 x 1");
  for (std::size_t k = 0; k < users.size(); ++k) {
    if (users[k].codewords.empty())
      throw DimensionError("user " + std::to_string(k) + " has an empty codebook");
    for (const auto& x : users[k].codewords) {
      if (x.rows() != t || x.cols() != m)
        throw DimensionError("codeword dimensions differ across the constellation");
    }
  }
}

CMatrix JointConstellation::joint_codeword(const MultiIndex& idx) const {
  const int k = num_users();
  if (static_cast<int>(idx.size()) != k)
    throw DimensionError("multi-index length does not match the user count");
  CMatrix f(T(), static_cast<Eigen::Index>(k) * M());
  for (int u = 0; u < k; ++u) {
    if (idx[u] < 0 || idx[u] >= users[u].size())
      throw DimensionError("multi-index entry out of range");
    f.middleCols(static_cast<Eigen::Index>(u) * M(), M()) = users[u].codewords[idx[u]];
  }
  return f;
}

std::int64_t JointConstellation::flatten(const MultiIndex& idx) const {
  std::int64_t flat = 0;
  for (int u = 0; u < num_users(); ++u) flat = flat * users[u].size() + idx[u];
  return flat;
}

MultiIndex JointConstellation::unflatten(std::int64_t flat) const {
  MultiIndex idx(num_users());
  for (int u = num_users() - 1; u >= 0; --u) {
    const int l = users[u].size();
    idx[u] = static_cast<int>(flat % l);
    flat /= l;
  }
  return idx;
}

MatrixGrid MatrixGrid::zero_like(const JointConstellation& c) {
  MatrixGrid g;
  g.blocks.resize(c.users.size());
  for (std::size_t k = 0; k < c.users.size(); ++k) {
    g.blocks[k].assign(c.users[k].codewords.size(), CMatrix::Zero(c.T(), c.M()));
  }
  return g;
}

MatrixGrid& MatrixGrid::operator+=(const MatrixGrid& other) {
  for (std::size_t k = 0; k < blocks.size(); ++k)
    for (std::size_t i = 0; i < blocks[k].size(); ++i) blocks[k][i] += other.blocks[k][i];
  return *this;
}

MatrixGrid& MatrixGrid::operator*=(double s) {
  for (auto& user : blocks)
    for (auto& b : user) b *= s;
  return *this;
}

double MatrixGrid::squared_norm() const {
  double out = 0.0;
  for (const auto& user : blocks)
    for (const auto& b : user) out += b.squaredNorm();
  return out;
}

}  // namespace ncmac
