#pragma once

#include <vector>

#include "mjls/numerics.hpp"

namespace mjls::detail {

// Indexes the upper-triangular entries of `count` symmetric n x n matrices as
// consecutive SDP variables starting at `offset`.
class SymVars {
 public:
  SymVars(int n, int count, int offset) : n_(n), count_(count), offset_(offset) {}

  int per_matrix() const { return n_ * (n_ + 1) / 2; }
  int size() const { return count_ * per_matrix(); }
  int end() const { return offset_ + size(); }
  int n() const { return n_; }

  template <typename F>
  void for_each(int mat, F&& f) const {
    int k = offset_ + mat * per_matrix();
    for (int r = 0; r < n_; ++r) {
      for (int c = r; c < n_; ++c) f(k++, r, c);
    }
  }

  // E_rc + E_cr (or E_rr on the diagonal).
  Matrix basis(int r, int c) const {
    Matrix e = Matrix::Zero(n_, n_);
    e(r, c) = 1.0;
    e(c, r) = 1.0;
    return e;
  }

  Matrix extract(const Vector& y, int mat) const {
    Matrix v(n_, n_);
    for_each(mat, [&](int k, int r, int c) {
      v(r, c) = y(k);
      v(c, r) = y(k);
    });
    return v;
  }

  void store(const Matrix& v, int mat, Vector& y) const {
    for_each(mat, [&](int k, int r, int c) { y(k) = 0.5 * (v(r, c) + v(c, r)); });
  }

 private:
  int n_;
  int count_;
  int offset_;
};

}  // namespace mjls::detail

#include "mjls/conic.hpp"
#include "mjls/model.hpp"

namespace mjls::detail {

// eps I <= V_i <= tau I for every mode.
inline void add_box_blocks(SdpProblem& p, const SymVars& vars, int modes, double eps, double tau) {
  const int n = vars.n();
  for (int i = 0; i < modes; ++i) {
    auto& lo = p.add_block(n);
    lo.f0 = eps * Matrix::Identity(n, n);
    vars.for_each(i, [&](int k, int r, int c) { lo.terms.push_back({k, vars.basis(r, c)}); });
    auto& hi = p.add_block(n);
    hi.f0 = -tau * Matrix::Identity(n, n);
    vars.for_each(i, [&](int k, int r, int c) { hi.terms.push_back({k, -vars.basis(r, c)}); });
  }
}

// V_j - sum_i p_ij A_i V_i A_i' - gamma I >= eps I for every j. Pass
// gamma_var < 0 to omit the slack.
inline void add_decrease_blocks(SdpProblem& p, const SymVars& vars, const Matrix& chain,
                                const SwitchedLinearSystem& sys, int gamma_var, double eps) {
  const int n = vars.n();
  const int modes = sys.num_modes();
  for (int j = 0; j < modes; ++j) {
    auto& blk = p.add_block(n);
    blk.f0 = eps * Matrix::Identity(n, n);
    for (int i = 0; i < modes; ++i) {
      const double pij = chain(i, j);
      if (pij == 0.0 && i != j) continue;
      vars.for_each(i, [&](int k, int r, int c) {
        const Matrix e = vars.basis(r, c);
        Matrix coeff = -pij * (sys.a[i] * e * sys.a[i].transpose());
        if (i == j) coeff += e;
        blk.terms.push_back({k, symmetrize(coeff)});
      });
    }
    if (gamma_var >= 0) blk.terms.push_back({gamma_var, -Matrix::Identity(n, n)});
  }
}

}  // namespace mjls::detail
