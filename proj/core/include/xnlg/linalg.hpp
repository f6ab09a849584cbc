#ifndef XNLG_LINALG_HPP
#define XNLG_LINALG_HPP

#include <vector>

#include "xnlg/matrix.hpp"

namespace xnlg {

// Eigenvalues in ascending order; column j of `vectors` is the unit
// eigenvector for `values[j]`.
struct EigResult {
  std::vector<double> values;
  CMatrix vectors;
};

// Full spectral decomposition by cyclic Jacobi rotations.
// Reconstruction satisfies ||H - V diag(values) V*||_max <= 1e-10 * max(1, ||H||_max)
// and V*V = I to the same tolerance.
EigResult herm_eig(const HermMatrix& h);

// Largest singular value. Hermitian inputs take the spectral fast path.
double op_norm(const CMatrix& m);

struct MaxEigResult {
  double value;
  std::vector<complexd> vector;
};

// Largest eigenvalue and a unit eigenvector. Small dimensions use the full
// Jacobi decomposition; large ones use Lanczos with full reorthogonalization,
// falling back to Jacobi if the residual check fails.
MaxEigResult max_eig(const HermMatrix& h);

// Positive semidefinite square root. Eigenvalues in [-neg_tol, 0) are clamped
// to zero; anything below -neg_tol (scaled by max(1, ||H||)) is an error.
HermMatrix psd_sqrt(const HermMatrix& h, double neg_tol = 1e-10);

CMatrix tensor(const CMatrix& a, const CMatrix& b);
CMatrix tensor(const std::vector<CMatrix>& factors);

// Partial trace over the factors NOT listed in `keep`. `dims` are the tensor
// factor dimensions (product = m.rows()); `keep` is a strictly increasing list
// of factor indices that survive. Factor order is preserved.
CMatrix partial_trace(const CMatrix& m, const std::vector<int>& dims,
                      const std::vector<int>& keep);

// Hilbert-Schmidt inner product Tr(a* b), conjugate-linear in `a`.
complexd hs_inner(const CMatrix& a, const CMatrix& b);

// Dense matrix-vector product.
std::vector<complexd> matvec(const CMatrix& m, const std::vector<complexd>& v);

double vec_norm(const std::vector<complexd>& v);

// <a, b> with conjugation on `a`.
complexd vec_dot(const std::vector<complexd>& a, const std::vector<complexd>& b);

}  // namespace xnlg

#endif
