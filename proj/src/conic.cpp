#include "mjls/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>

#include "mjls/error.hpp"

namespace mjls {

Matrix LmiBlock::residual(const Vector& y) const {
  Matrix r = -f0;
  for (const auto& t : terms) r += y(t.var) * t.coeff;
  return r;
}

SdpProblem::SdpProblem(int vars)
    : num_vars(vars), objective(Vector::Zero(vars)), eq_matrix(0, vars), eq_rhs(0) {}

LmiBlock& SdpProblem::add_block(int size) {
  lmis.push_back(LmiBlock{Matrix::Zero(size, size), {}});
  return lmis.back();
}

void SdpProblem::add_equality(const Vector& row, double rhs) {
  eq_matrix.conservativeResize(eq_matrix.rows() + 1, num_vars);
  eq_matrix.row(eq_matrix.rows() - 1) = row.transpose();
  eq_rhs.conservativeResize(eq_rhs.size() + 1);
  eq_rhs(eq_rhs.size() - 1) = rhs;
}

void SdpProblem::set_lower(int var, double value) {
  if (lower.empty()) lower.resize(num_vars);
  lower.at(var) = value;
}

void SdpProblem::set_upper(int var, double value) {
  if (upper.empty()) upper.resize(num_vars);
  upper.at(var) = value;
}

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::feasible: return "feasible";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

void validate_problem(const SdpProblem& p) {
  if (p.num_vars < 0) throw InvalidInput("sdp: negative variable count");
  if (p.objective.size() != p.num_vars) throw InvalidInput("sdp: objective length differs from num_vars");
  if (p.eq_matrix.cols() != p.num_vars) throw InvalidInput("sdp: equality matrix needs num_vars columns");
  if (p.eq_matrix.rows() != p.eq_rhs.size()) throw InvalidInput("sdp: equality rhs length differs from row count");
  if (!p.lower.empty() && static_cast<int>(p.lower.size()) != p.num_vars) throw InvalidInput("sdp: lower bounds length");
  if (!p.upper.empty() && static_cast<int>(p.upper.size()) != p.num_vars) throw InvalidInput("sdp: upper bounds length");
  for (std::size_t b = 0; b < p.lmis.size(); ++b) {
    const auto& blk = p.lmis[b];
    const auto where = "sdp block " + std::to_string(b);
    if (blk.f0.rows() != blk.f0.cols()) throw InvalidInput(where + ": F_0 not square");
    if ((blk.f0 - blk.f0.transpose()).cwiseAbs().maxCoeff() > 1e-9) throw InvalidInput(where + ": F_0 not symmetric");
    for (const auto& t : blk.terms) {
      if (t.var < 0 || t.var >= p.num_vars) throw InvalidInput(where + ": variable index out of range");
      if (t.coeff.rows() != blk.size() || t.coeff.cols() != blk.size()) {
        throw InvalidInput(where + ": coefficient size differs from block size");
      }
      if (blk.size() > 0 && (t.coeff - t.coeff.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
        throw InvalidInput(where + ": coefficient matrix not symmetric");
      }
    }
  }
}

namespace {

// All LMI blocks plus one 1x1 block per finite bound.
std::vector<LmiBlock> expand_bounds(const SdpProblem& p) {
  std::vector<LmiBlock> blocks = p.lmis;
  for (int i = 0; i < static_cast<int>(p.lower.size()); ++i) {
    if (!p.lower[i]) continue;
    blocks.push_back(LmiBlock{Matrix::Constant(1, 1, *p.lower[i]), {LmiTerm{i, Matrix::Constant(1, 1, 1.0)}}});
  }
  for (int i = 0; i < static_cast<int>(p.upper.size()); ++i) {
    if (!p.upper[i]) continue;
    blocks.push_back(LmiBlock{Matrix::Constant(1, 1, -*p.upper[i]), {LmiTerm{i, Matrix::Constant(1, 1, -1.0)}}});
  }
  return blocks;
}

struct Triplet {
  int row;
  int col;
  double value;
};

// A coefficient matrix in solver form, with a sparse copy when it pays off.
struct StdTerm {
  int var = 0;
  Matrix dense;
  std::vector<Triplet> sparse;
  bool use_sparse = false;

  void finalize() {
    const int n = static_cast<int>(dense.rows());
    sparse.clear();
    for (int c = 0; c < n; ++c) {
      for (int r = 0; r < n; ++r) {
        if (dense(r, c) != 0.0) sparse.push_back({r, c, dense(r, c)});
      }
    }
    use_sparse = static_cast<int>(sparse.size()) <= 2 * n;
  }

  // tr(A * M) for symmetric A and arbitrary M.
  double trace_with(const Matrix& m) const {
    if (use_sparse) {
      double s = 0.0;
      for (const auto& t : sparse) s += t.value * m(t.col, t.row);
      return s;
    }
    return dense.cwiseProduct(m.transpose()).sum();
  }

  // X * A * Y
  Matrix sandwich(const Matrix& x, const Matrix& y) const {
    if (use_sparse) {
      Matrix out = Matrix::Zero(x.rows(), y.cols());
      for (const auto& t : sparse) out.noalias() += t.value * x.col(t.row) * y.row(t.col);
      return out;
    }
    return x * dense * y;
  }

  void add_scaled_to(Matrix& m, double s) const {
    if (s == 0.0) return;
    if (use_sparse) {
      for (const auto& t : sparse) m(t.row, t.col) += s * t.value;
    } else {
      m += s * dense;
    }
  }
};

struct StdBlock {
  Matrix c;
  double scale = 1.0;   // standard-form block = user block / scale
  int source = 0;       // index into the expanded user block list
  std::vector<StdTerm> terms;
  int dim() const { return static_cast<int>(c.rows()); }
};

// Conic pair in the form
//   (P) min <C,X>  s.t. <A_i,X> = b_i, X >= 0
//   (D) max b'y    s.t. C - sum y_i A_i = S >= 0
// obtained from the user problem by eliminating equalities (y = y0 + T z)
// and setting A_i = -G_i, C = -G_0, b = -T'c.
struct StandardForm {
  int m = 0;
  Vector b;
  std::vector<StdBlock> blocks;
  Vector y0;
  Matrix t;
  double obj_scale = 1.0;
  bool inconsistent_equalities = false;
};

StandardForm to_standard_form(const SdpProblem& p, const std::vector<LmiBlock>& blocks) {
  StandardForm sf;
  const int n = p.num_vars;
  sf.y0 = Vector::Zero(n);

  std::vector<int> eq_cols;
  for (int j = 0; j < n; ++j) {
    if (p.eq_matrix.rows() > 0 && p.eq_matrix.col(j).cwiseAbs().maxCoeff() > 0.0) eq_cols.push_back(j);
  }

  Matrix null_basis;
  if (p.eq_matrix.rows() > 0) {
    Matrix a_sub(p.eq_matrix.rows(), static_cast<Eigen::Index>(eq_cols.size()));
    for (std::size_t k = 0; k < eq_cols.size(); ++k) a_sub.col(k) = p.eq_matrix.col(eq_cols[k]);
    Eigen::JacobiSVD<Matrix> svd(a_sub, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      if (sv(k) > 1e-12 * std::max(1.0, smax)) ++rank;
    }
    svd.setThreshold(1e-12 * std::max(1.0, smax) / std::max(smax, 1e-300));
    const Vector y_sub = svd.solve(p.eq_rhs);
    const double resid = (a_sub * y_sub - p.eq_rhs).cwiseAbs().maxCoeff();
    const double scale = 1.0 + (p.eq_rhs.size() ? p.eq_rhs.cwiseAbs().maxCoeff() : 0.0);
    if (resid > 1e-9 * scale) sf.inconsistent_equalities = true;
    for (std::size_t k = 0; k < eq_cols.size(); ++k) sf.y0(eq_cols[k]) = y_sub(k);
    null_basis = svd.matrixV().rightCols(static_cast<Eigen::Index>(eq_cols.size()) - rank);
  }

  // Column map: free variables first, then the equality null-space coordinates.
  std::vector<int> eq_pos(n, -1);
  for (std::size_t k = 0; k < eq_cols.size(); ++k) eq_pos[eq_cols[k]] = static_cast<int>(k);
  std::vector<int> free_index(n, -1);
  int m = 0;
  for (int j = 0; j < n; ++j) {
    if (eq_pos[j] < 0) free_index[j] = m++;
  }
  const int null_offset = m;
  m += static_cast<int>(null_basis.cols());
  sf.m = m;
  sf.t = Matrix::Zero(n, m);
  for (int j = 0; j < n; ++j) {
    if (free_index[j] >= 0) {
      sf.t(j, free_index[j]) = 1.0;
    } else {
      sf.t.row(j).segment(null_offset, null_basis.cols()) = null_basis.row(eq_pos[j]);
    }
  }

  Vector c_red = sf.t.transpose() * p.objective;
  const double cmax = c_red.size() ? c_red.cwiseAbs().maxCoeff() : 0.0;
  sf.obj_scale = cmax > 0.0 ? 1.0 / cmax : 1.0;
  sf.b = -sf.obj_scale * c_red;

  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& blk = blocks[bi];
    if (blk.size() == 0) continue;
    Matrix g0 = blk.f0;
    std::map<int, Matrix> reduced;
    for (const auto& term : blk.terms) {
      if (sf.y0(term.var) != 0.0) g0 -= sf.y0(term.var) * term.coeff;
      for (int k = 0; k < m; ++k) {
        const double w = sf.t(term.var, k);
        if (std::abs(w) < 1e-15) continue;
        auto it = reduced.find(k);
        if (it == reduced.end()) {
          reduced.emplace(k, w * term.coeff);
        } else {
          it->second += w * term.coeff;
        }
      }
    }
    double scale = g0.cwiseAbs().maxCoeff();
    for (const auto& [k, mat] : reduced) scale = std::max(scale, mat.cwiseAbs().maxCoeff());
    const double inv = scale > 0.0 ? 1.0 / scale : 1.0;

    StdBlock sb;
    sb.scale = 1.0 / inv;
    sb.source = static_cast<int>(bi);
    sb.c = -inv * symmetrize(g0);
    for (auto& [k, mat] : reduced) {
      if (mat.cwiseAbs().maxCoeff() == 0.0) continue;
      StdTerm st;
      st.var = k;
      st.dense = -inv * symmetrize(mat);
      st.finalize();
      sb.terms.push_back(std::move(st));
    }
    sf.blocks.push_back(std::move(sb));
  }
  return sf;
}

double inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

struct Iterate {
  std::vector<Matrix> x;
  std::vector<Matrix> s;
  Vector y;
  double tau = 1.0;
  double kappa = 1.0;
};

struct Direction {
  std::vector<Matrix> dx;
  std::vector<Matrix> ds;
  Vector dy;
  double dtau = 0.0;
  double dkappa = 0.0;
};

class HsdSolver {
 public:
  HsdSolver(const StandardForm& sf, const SdpOptions& opts) : sf_(sf), opts_(opts) {
    for (const auto& b : sf_.blocks) nu_ += b.dim();
    c_norm_ = 0.0;
    for (const auto& b : sf_.blocks) c_norm_ += b.c.squaredNorm();
    c_norm_ = std::sqrt(c_norm_);
    b_norm_ = sf_.b.norm();
  }

  enum class Outcome { optimal, primal_infeasible, dual_infeasible, failure };

  Outcome run(const std::function<bool(const Vector&)>& accept_point) {
    const int nb = static_cast<int>(sf_.blocks.size());
    it_.x.resize(nb);
    it_.s.resize(nb);
    for (int k = 0; k < nb; ++k) {
      const int d = sf_.blocks[k].dim();
      it_.x[k] = Matrix::Identity(d, d);
      it_.s[k] = Matrix::Identity(d, d);
    }
    it_.y = Vector::Zero(sf_.m);
    it_.tau = 1.0;
    it_.kappa = 1.0;

    for (iterations_ = 0; iterations_ < opts_.max_iters; ++iterations_) {
      const Vector ax = a_op(it_.x);
      const Vector rp = ax - sf_.b * it_.tau;
      std::vector<Matrix> rd(nb);
      double rd_norm2 = 0.0;
      double cx = 0.0;
      for (int k = 0; k < nb; ++k) {
        rd[k] = sf_.blocks[k].c * it_.tau - a_adj(it_.y, k) - it_.s[k];
        rd_norm2 += rd[k].squaredNorm();
        cx += inner(sf_.blocks[k].c, it_.x[k]);
      }
      const double by = sf_.b.dot(it_.y);
      const double rg = by - cx - it_.kappa;
      double xs = it_.tau * it_.kappa;
      for (int k = 0; k < nb; ++k) xs += inner(it_.x[k], it_.s[k]);
      const double mu = xs / (nu_ + 1);

      // Convergence tests on the normalized point.
      const double pres = rp.norm() / (it_.tau * (1.0 + b_norm_));
      const double dres = std::sqrt(rd_norm2) / (it_.tau * (1.0 + c_norm_));
      const double pobj = cx / it_.tau;
      const double dobj = by / it_.tau;
      const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      if (pres <= opts_.tol && dres <= opts_.tol && gap <= opts_.tol) {
        if (accept_point(it_.y / it_.tau)) return Outcome::optimal;
      }
      if (cx < 0.0) {
        // X with A(X) ~ 0 and <C,X> < 0: the LMI side (D) is infeasible.
        double xnorm = 0.0;
        for (const auto& xk : it_.x) xnorm += xk.norm();
        if (ax.norm() / -cx <= opts_.tol && -cx / xnorm > opts_.tol) return Outcome::dual_infeasible;
      }
      if (by > 0.0) {
        double r = 0.0;
        for (int k = 0; k < nb; ++k) r += (a_adj(it_.y, k) + it_.s[k]).squaredNorm();
        if (std::sqrt(r) / by <= opts_.tol) return Outcome::primal_infeasible;
      }
      if (!std::isfinite(mu) || mu < 1e-300) return Outcome::failure;
      // tau collapsed without a certificate meeting the tolerance.
      if (it_.tau < 1e-14 * it_.kappa) return Outcome::failure;

      if (!factor(rd)) return Outcome::failure;

      // Predictor.
      Direction aff = direction(0.0, mu, rp, rd, rg, nullptr);
      const double a_aff = std::min(1.0, max_step(aff));
      double xs_aff = (it_.tau + a_aff * aff.dtau) * (it_.kappa + a_aff * aff.dkappa);
      for (int k = 0; k < nb; ++k) {
        xs_aff += inner(it_.x[k] + a_aff * aff.dx[k], it_.s[k] + a_aff * aff.ds[k]);
      }
      const double sigma = std::clamp(std::pow(std::max(xs_aff, 0.0) / xs, 3.0), 0.0, 1.0);

      // Corrector.
      Direction dir = direction(sigma, mu, rp, rd, rg, &aff);
      const double alpha = std::min(1.0, 0.97 * max_step(dir));
      if (!(alpha > 1e-12)) return Outcome::failure;
      for (int k = 0; k < nb; ++k) {
        it_.x[k] = symmetrize(it_.x[k] + alpha * dir.dx[k]);
        it_.s[k] = symmetrize(it_.s[k] + alpha * dir.ds[k]);
      }
      it_.y += alpha * dir.dy;
      it_.tau += alpha * dir.dtau;
      it_.kappa += alpha * dir.dkappa;
    }
    return Outcome::failure;
  }

  const Iterate& iterate() const { return it_; }
  int iterations() const { return iterations_; }

 private:
  Vector a_op(const std::vector<Matrix>& x) const {
    Vector out = Vector::Zero(sf_.m);
    for (std::size_t k = 0; k < sf_.blocks.size(); ++k) {
      for (const auto& t : sf_.blocks[k].terms) out(t.var) += t.trace_with(x[k]);
    }
    return out;
  }

  Matrix a_adj(const Vector& y, std::size_t k) const {
    const auto& blk = sf_.blocks[k];
    Matrix out = Matrix::Zero(blk.dim(), blk.dim());
    for (const auto& t : blk.terms) t.add_scaled_to(out, y(t.var));
    return out;
  }

  // Builds the Schur complement of the Newton system for the current iterate.
  bool factor(const std::vector<Matrix>& rd) {
    const int nb = static_cast<int>(sf_.blocks.size());
    const int m = sf_.m;
    s_inv_.assign(nb, Matrix());
    Matrix schur = Matrix::Zero(m, m);
    u_ = Vector::Zero(m);
    w_ = Vector::Zero(m);
    v_ = 0.0;
    q_ = 0.0;
    for (int k = 0; k < nb; ++k) {
      const auto& blk = sf_.blocks[k];
      const int d = blk.dim();
      Eigen::LLT<Matrix> llt(it_.s[k]);
      if (llt.info() != Eigen::Success) return false;
      s_inv_[k] = llt.solve(Matrix::Identity(d, d));
      const Matrix& x = it_.x[k];
      const Matrix pc = x * blk.c * s_inv_[k];
      const Matrix pr = x * rd[k] * s_inv_[k];
      v_ += blk.c.cwiseProduct(pc.transpose()).sum();
      q_ += blk.c.cwiseProduct(pr.transpose()).sum();
      for (const auto& tj : blk.terms) {
        const Matrix pj = tj.sandwich(x, s_inv_[k]);
        for (const auto& ti : blk.terms) schur(ti.var, tj.var) += ti.trace_with(pj);
        u_(tj.var) += tj.trace_with(pc);
        w_(tj.var) += tj.trace_with(pr);
      }
    }
    Matrix kkt(m + 1, m + 1);
    kkt.topLeftCorner(m, m) = schur;
    const double reg = 1e-14 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
    kkt.topLeftCorner(m, m).diagonal().array() += reg;
    kkt.topRightCorner(m, 1) = -(sf_.b + u_);
    kkt.bottomLeftCorner(1, m) = (sf_.b - u_).transpose();
    kkt(m, m) = v_ + it_.kappa / it_.tau;
    if (!kkt.allFinite()) return false;
    lu_.compute(kkt);
    return true;
  }

  Direction direction(double sigma, double mu, const Vector& rp, const std::vector<Matrix>& rd, double rg,
                      const Direction* corr) const {
    const int nb = static_cast<int>(sf_.blocks.size());
    const int m = sf_.m;
    const double eta = 1.0 - sigma;
    std::vector<Matrix> g(nb);
    Vector ag = Vector::Zero(m);
    double cg = 0.0;
    for (int k = 0; k < nb; ++k) {
      g[k] = sigma * mu * s_inv_[k] - it_.x[k];
      if (corr) g[k] -= corr->dx[k] * corr->ds[k] * s_inv_[k];
      for (const auto& t : sf_.blocks[k].terms) ag(t.var) += t.trace_with(g[k]);
      cg += sf_.blocks[k].c.cwiseProduct(g[k].transpose()).sum();
    }
    double gtk = sigma * mu - it_.tau * it_.kappa;
    if (corr) gtk -= corr->dtau * corr->dkappa;

    Vector rhs(m + 1);
    rhs.head(m) = -eta * rp - ag + eta * w_;
    rhs(m) = -eta * rg + cg - eta * q_ + gtk / it_.tau;
    const Vector sol = lu_.solve(rhs);

    Direction d;
    d.dy = sol.head(m);
    d.dtau = sol(m);
    d.dkappa = (gtk - it_.kappa * d.dtau) / it_.tau;
    d.dx.resize(nb);
    d.ds.resize(nb);
    for (int k = 0; k < nb; ++k) {
      d.ds[k] = -a_adj(d.dy, k) + sf_.blocks[k].c * d.dtau + eta * rd[k];
      d.dx[k] = symmetrize(g[k] - it_.x[k] * d.ds[k] * s_inv_[k]);
    }
    return d;
  }

  static double max_psd_step(const Matrix& x, const Matrix& dx) {
    Eigen::LLT<Matrix> llt(x);
    if (llt.info() != Eigen::Success) return 0.0;
    const Matrix linv = llt.matrixL().solve(Matrix::Identity(x.rows(), x.cols()));
    const Matrix w = symmetrize(linv * dx * linv.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(w, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
  }

  double max_step(const Direction& d) const {
    double a = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sf_.blocks.size(); ++k) {
      a = std::min(a, max_psd_step(it_.x[k], d.dx[k]));
      a = std::min(a, max_psd_step(it_.s[k], d.ds[k]));
    }
    if (d.dtau < 0.0) a = std::min(a, -it_.tau / d.dtau);
    if (d.dkappa < 0.0) a = std::min(a, -it_.kappa / d.dkappa);
    return a;
  }

  const StandardForm& sf_;
  SdpOptions opts_;
  int nu_ = 0;
  double c_norm_ = 0.0;
  double b_norm_ = 0.0;
  Iterate it_;
  int iterations_ = 0;

  std::vector<Matrix> s_inv_;
  Vector u_, w_;
  double v_ = 0.0, q_ = 0.0;
  Eigen::PartialPivLU<Matrix> lu_;
};

}  // namespace

LmiResidual lmi_residual(const SdpProblem& p, const Vector& y) {
  if (y.size() != p.num_vars) throw InvalidInput("lmi_residual: point length differs from num_vars");
  LmiResidual r;
  r.min_eig = std::numeric_limits<double>::infinity();
  for (const auto& blk : expand_bounds(p)) {
    if (blk.size() == 0) continue;
    r.min_eig = std::min(r.min_eig, min_eig_symmetric(blk.residual(y)));
  }
  if (p.eq_matrix.rows() > 0) r.eq_residual = (p.eq_matrix * y - p.eq_rhs).cwiseAbs().maxCoeff();
  return r;
}

SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& opts) {
  validate_problem(p);
  if (!(opts.tol > 0.0)) throw InvalidInput("sdp: tolerance must be positive");

  const auto blocks = expand_bounds(p);
  const StandardForm sf = to_standard_form(p, blocks);
  const bool has_objective = p.objective.size() > 0 && p.objective.cwiseAbs().maxCoeff() > 0.0;

  SdpSolution sol;
  if (sf.inconsistent_equalities) {
    sol.status = SdpStatus::infeasible;
    return sol;
  }

  auto finish_point = [&](const Vector& z) {
    sol.y = sf.y0 + sf.t * z;
    const auto res = lmi_residual(p, sol.y);
    sol.margin = std::isfinite(res.min_eig) ? res.min_eig : 0.0;
    sol.eq_residual = res.eq_residual;
    sol.objective_value = p.objective.dot(sol.y);
  };

  if (sf.m == 0 || sf.blocks.empty()) {
    // Nothing left to optimize: the point is fixed by the equalities, or no
    // LMI restricts it (then any objective direction is unbounded).
    finish_point(Vector::Zero(sf.m));
    if (sf.m > 0 && sf.b.cwiseAbs().maxCoeff() > 0.0) {
      sol.status = SdpStatus::unbounded;
    } else if (sol.margin >= -opts.tol) {
      sol.status = has_objective ? SdpStatus::optimal : SdpStatus::feasible;
    } else {
      sol.status = SdpStatus::infeasible;
      sol.y.resize(0);
    }
    return sol;
  }

  HsdSolver solver(sf, opts);
  const auto accept = [&](const Vector& z) {
    const Vector y = sf.y0 + sf.t * z;
    const auto res = lmi_residual(p, y);
    return res.min_eig >= -opts.tol && res.eq_residual <= opts.tol * (1.0 + p.eq_rhs.lpNorm<Eigen::Infinity>());
  };
  const auto outcome = solver.run(accept);
  sol.iterations = solver.iterations();
  const auto& it = solver.iterate();

  switch (outcome) {
    case HsdSolver::Outcome::optimal:
      finish_point(it.y / it.tau);
      sol.status = has_objective ? SdpStatus::optimal : SdpStatus::feasible;
      sol.dual.assign(p.lmis.size(), Matrix());
      for (std::size_t b = 0; b < sf.blocks.size(); ++b) {
        const auto& sb = sf.blocks[b];
        if (sb.source >= static_cast<int>(p.lmis.size())) continue;
        sol.dual[sb.source] = it.x[b] / (it.tau * sb.scale * sf.obj_scale);
      }
      break;
    case HsdSolver::Outcome::dual_infeasible: {
      sol.status = SdpStatus::infeasible;
      double scale = 0.0;
      for (const auto& x : it.x) scale += x.trace();
      for (const auto& x : it.x) sol.certificate.push_back(x / scale);
      break;
    }
    case HsdSolver::Outcome::primal_infeasible:
      finish_point(it.y / std::max(it.tau, 1e-300));
      sol.status = SdpStatus::unbounded;
      break;
    case HsdSolver::Outcome::failure:
      finish_point(it.y / std::max(it.tau, 1e-300));
      if (!sol.y.allFinite()) sol.y = Vector::Zero(p.num_vars);
      sol.status = SdpStatus::numerical_failure;
      break;
  }
  return sol;
}

void write_sparse_dump(const SdpProblem& p, std::ostream& out) {
  out << "# sdp dump: minimize c'y s.t. A y = b, sum_k y_k F_k >= F_0 per block\n";
  out << "# vars " << p.num_vars << " blocks " << p.lmis.size() << " equalities " << p.eq_matrix.rows() << "\n";
  out << "# block sizes";
  for (const auto& b : p.lmis) out << ' ' << b.size();
  out << "\n";
  out.precision(17);
  for (int i = 0; i < p.num_vars; ++i) {
    if (p.objective(i) != 0.0) out << "c " << i + 1 << ' ' << p.objective(i) << "\n";
  }
  for (Eigen::Index r = 0; r < p.eq_matrix.rows(); ++r) {
    for (int i = 0; i < p.num_vars; ++i) {
      if (p.eq_matrix(r, i) != 0.0) out << "eq " << r + 1 << ' ' << i + 1 << ' ' << p.eq_matrix(r, i) << "\n";
    }
    out << "eqb " << r + 1 << ' ' << p.eq_rhs(r) << "\n";
  }
  for (int i = 0; i < static_cast<int>(p.lower.size()); ++i) {
    if (p.lower[i]) out << "bound " << i + 1 << " lower " << *p.lower[i] << "\n";
  }
  for (int i = 0; i < static_cast<int>(p.upper.size()); ++i) {
    if (p.upper[i]) out << "bound " << i + 1 << " upper " << *p.upper[i] << "\n";
  }
  auto emit = [&](std::size_t block, int index, const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = r; c < m.cols(); ++c) {
        if (m(r, c) != 0.0) out << block + 1 << ' ' << index << ' ' << r + 1 << ' ' << c + 1 << ' ' << m(r, c) << "\n";
      }
    }
  };
  for (std::size_t b = 0; b < p.lmis.size(); ++b) {
    emit(b, 0, p.lmis[b].f0);
    for (const auto& t : p.lmis[b].terms) emit(b, t.var + 1, t.coeff);
  }
}

}  // namespace mjls
