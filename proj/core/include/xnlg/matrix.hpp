#ifndef XNLG_MATRIX_HPP
#define XNLG_MATRIX_HPP

#include <complex>
#include <initializer_list>
#include <vector>

#include "xnlg/errors.hpp"

namespace xnlg {

using complexd = std::complex<double>;

// Dense complex matrix, row-major storage.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols) {
    if (rows < 0 || cols < 0) throw DimensionError("matrix dimensions must be nonnegative");
  }
  CMatrix(std::initializer_list<std::initializer_list<complexd>> rows);

  static CMatrix zero(int rows, int cols) { return CMatrix(rows, cols); }
  static CMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  complexd& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const complexd& operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  complexd& at(int r, int c);
  const complexd& at(int r, int c) const;

  std::vector<complexd>& data() { return data_; }
  const std::vector<complexd>& data() const { return data_; }

  CMatrix& operator+=(const CMatrix& other);
  CMatrix& operator-=(const CMatrix& other);
  CMatrix& operator*=(complexd scalar);

  CMatrix adjoint() const;
  CMatrix transpose() const;
  CMatrix conjugate() const;
  complexd trace() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool is_hermitian(double tol) const;
  bool is_zero(double tol) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<complexd> data_;
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(const CMatrix& a, const CMatrix& b);
CMatrix operator*(complexd scalar, CMatrix a);
CMatrix operator*(CMatrix a, complexd scalar);

// Hermitian matrix: validated to equal its own conjugate transpose within
// `tol` at construction, then stored exactly symmetrized.
class HermMatrix {
 public:
  HermMatrix() = default;
  explicit HermMatrix(const CMatrix& m, double tol = 1e-12);

  static HermMatrix identity(int n) { return HermMatrix(CMatrix::identity(n)); }
  static HermMatrix zero(int n) { return HermMatrix(CMatrix::zero(n, n)); }

  int dim() const { return mat_.rows(); }
  const CMatrix& matrix() const { return mat_; }
  const complexd& operator()(int r, int c) const { return mat_(r, c); }

 private:
  CMatrix mat_;
};

}  // namespace xnlg

#endif
