#ifndef XNLG_SDP_HPP
#define XNLG_SDP_HPP

#include <vector>

#include "xnlg/linalg.hpp"
#include "xnlg/matrix.hpp"

namespace xnlg::sdp {

// One entry of a Hermitian coefficient matrix in a block-diagonal problem.
// Entries are normalized to the upper triangle (row <= col); the mirrored
// entry is implied by Hermiticity.
struct SparseEntry {
  int block;
  int row;
  int col;
  complexd value;
};

struct SparseHerm {
  std::vector<SparseEntry> entries;

  // Accepts any (row, col); lower-triangle input is stored conjugated at the
  // mirrored position. Duplicate positions accumulate.
  void add(int block, int row, int col, complexd value) {
    if (row > col) {
      std::swap(row, col);
      value = std::conj(value);
    }
    entries.push_back({block, row, col, value});
  }
};

// Semidefinite program over a block-diagonal complex Hermitian variable Z:
//   maximize   <C, Z>
//   subject to <A_i, Z> = b_i for each constraint, Z >= 0,
// with <A, B> = Tr(A* B).
class SdpProblem {
 public:
  explicit SdpProblem(int dim) : block_dims_{dim} {}
  explicit SdpProblem(std::vector<int> block_dims) : block_dims_(std::move(block_dims)) {}

  const std::vector<int>& block_dims() const { return block_dims_; }
  int dim() const {
    int d = 0;
    for (int b : block_dims_) d += b;
    return d;
  }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }

  // Dense single-block convenience interface.
  void set_objective(const HermMatrix& c);
  void add_constraint(const HermMatrix& a, double b);

  // Sparse block interface.
  void set_objective(SparseHerm c) { objective_ = std::move(c); }
  void add_constraint(SparseHerm a, double b) {
    constraints_.push_back(std::move(a));
    rhs_.push_back(b);
  }

  const SparseHerm& objective() const { return objective_; }
  const std::vector<SparseHerm>& constraints() const { return constraints_; }
  const std::vector<double>& rhs() const { return rhs_; }

 private:
  std::vector<int> block_dims_;
  SparseHerm objective_;
  std::vector<SparseHerm> constraints_;
  std::vector<double> rhs_;
};

enum class SdpStatus { Optimal, MaxIterations, Infeasible, Unbounded };

const char* to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::MaxIterations;
  double value = 0.0;       // primal objective <C, Z>
  double dual_value = 0.0;  // dual objective b^T y
  std::vector<CMatrix> Z;   // primal blocks, PSD within tolerance
  std::vector<CMatrix> S;   // dual slack blocks, sum_i y_i A_i - C
  std::vector<double> y;    // dual multipliers in original constraint order
  double primal_residual = 0.0;  // max_i |<A_i, Z> - b_i|
  double dual_residual = 0.0;    // max-entry norm of sum_i y_i A_i - S - C
  double gap = 0.0;              // |value - dual_value|
  int iterations = 0;
};

struct SolveOptions {
  double tol = 1e-7;
  int max_iter = 200;
};

// Primal-dual interior-point solve (homogeneous self-dual embedding with
// Nesterov-Todd scaling and a Mehrotra predictor-corrector). Deterministic:
// identical inputs produce identical outputs.
SdpSolution solve(const SdpProblem& problem, const SolveOptions& options = {});
inline SdpSolution solve(const SdpProblem& problem, double tol, int max_iter = 200) {
  return solve(problem, SolveOptions{tol, max_iter});
}

// Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian
// matrix; its spectrum is that of H with every eigenvalue doubled in
// multiplicity.
CMatrix real_embed(const HermMatrix& h);

}  // namespace xnlg::sdp

#endif
