#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mjls/numerics.hpp"

namespace mjls {

/// One variable's coefficient inside an LMI block.
struct LmiTerm {
  int var = 0;
  Matrix coeff;  ///< symmetric, block-sized
};

/// sum_i y_i F_i >= F_0 over one square block. Variables absent from `terms`
/// have F_i = 0 in this block.
struct LmiBlock {
  Matrix f0;
  std::vector<LmiTerm> terms;

  int size() const { return static_cast<int>(f0.rows()); }
  /// Residual sum_i y_i F_i - F_0.
  Matrix residual(const Vector& y) const;
};

/// minimize c'y  s.t.  A y = b,  every LMI block,  lower <= y <= upper.
struct SdpProblem {
  int num_vars = 0;
  Vector objective;        ///< length num_vars; zero for a pure feasibility problem
  Matrix eq_matrix;        ///< rows x num_vars (rows may be 0)
  Vector eq_rhs;
  std::vector<LmiBlock> lmis;
  std::vector<std::optional<double>> lower;  ///< empty or length num_vars
  std::vector<std::optional<double>> upper;

  explicit SdpProblem(int vars = 0);

  /// Appends an empty block of the given size with F_0 = 0 and returns it.
  LmiBlock& add_block(int size);
  void add_equality(const Vector& row, double rhs);
  void set_lower(int var, double value);
  void set_upper(int var, double value);
};

enum class SdpStatus { optimal, feasible, infeasible, unbounded, numerical_failure };

std::string to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::numerical_failure;
  Vector y;                      ///< empty when infeasible
  double objective_value = 0.0;
  double margin = 0.0;           ///< smallest eigenvalue over all LMI residuals (incl. bounds)
  double eq_residual = 0.0;
  int iterations = 0;
  /// For status infeasible: block-diagonal dual certificate X >= 0 with
  /// <F_i, X> = 0 and <F_0, X> > 0 (equality multipliers folded in).
  std::vector<Matrix> certificate;
  /// For optimal/feasible: multiplier Z_k >= 0 of each entry of `lmis`, so
  /// that c = sum_k A_k*(Z_k) + (bound and equality terms) at the optimum.
  std::vector<Matrix> dual;
};

struct SdpOptions {
  double tol = 1e-7;
  int max_iters = 150;
};

/// Throws InvalidInput on malformed problems. Solver trouble is reported
/// through the status, never thrown.
SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& opts = {});

struct LmiResidual {
  double min_eig = 0.0;     ///< min over blocks (and bounds) of lambda_min(sum y_i F_i - F_0)
  double eq_residual = 0.0; ///< ||A y - b||_inf
};

/// Solver-independent re-check of a candidate point.
LmiResidual lmi_residual(const SdpProblem& p, const Vector& y);

/// Throws InvalidInput describing the first invariant violation.
void validate_problem(const SdpProblem& p);

/// Sparse text dump. Header lines start with '#'. Then:
///   "c <var> <value>"                       objective entries
///   "eq <row> <var> <value>" / "eqb <row> <value>"
///   "bound <var> lower|upper <value>"
///   "<block> <matrix> <row> <col> <value>"   one line per upper-triangular
/// nonzero, matrix 0 being F_0 and matrix k being F_k (1-based variable).
void write_sparse_dump(const SdpProblem& p, std::ostream& out);

}  // namespace mjls
