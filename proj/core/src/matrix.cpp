#include "xnlg/matrix.hpp"

#include <cmath>

namespace xnlg {

CMatrix::CMatrix(std::initializer_list<std::initializer_list<complexd>> rows) {
  rows_ = static_cast<int>(rows.size());
  cols_ = rows_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  data_.reserve(static_cast<std::size_t>(rows_) * cols_);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != cols_)
      throw DimensionError("ragged initializer for CMatrix");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

CMatrix CMatrix::identity(int n) {
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

complexd& CMatrix::at(int r, int c) {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
    throw DimensionError("CMatrix index out of range");
  return (*this)(r, c);
}

const complexd& CMatrix::at(int r, int c) const {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
    throw DimensionError("CMatrix index out of range");
  return (*this)(r, c);
}

CMatrix& CMatrix::operator+=(const CMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw DimensionError("shape mismatch in matrix addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw DimensionError("shape mismatch in matrix subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

CMatrix& CMatrix::operator*=(complexd scalar) {
  for (auto& v : data_) v *= scalar;
  return *this;
}

CMatrix CMatrix::adjoint() const {
  CMatrix out(cols_, rows_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

CMatrix CMatrix::transpose() const {
  CMatrix out(cols_, rows_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

CMatrix CMatrix::conjugate() const {
  CMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = std::conj(data_[i]);
  return out;
}

complexd CMatrix::trace() const {
  if (rows_ != cols_) throw DimensionError("trace of a non-square matrix");
  complexd t = 0.0;
  for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double CMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

double CMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool CMatrix::is_hermitian(double tol) const {
  if (rows_ != cols_) return false;
  for (int r = 0; r < rows_; ++r)
    for (int c = r; c < cols_; ++c)
      if (std::abs((*this)(r, c) - std::conj((*this)(c, r))) > tol) return false;
  return true;
}

bool CMatrix::is_zero(double tol) const {
  for (const auto& v : data_)
    if (std::abs(v) > tol) return false;
  return true;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("shape mismatch in matrix product");
  CMatrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const complexd aik = a(i, k);
      if (aik == complexd(0.0)) continue;
      for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

CMatrix operator*(complexd scalar, CMatrix a) { return a *= scalar; }
CMatrix operator*(CMatrix a, complexd scalar) { return a *= scalar; }

HermMatrix::HermMatrix(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) throw DimensionError("HermMatrix requires a square matrix");
  if (!m.is_hermitian(tol)) throw DomainError("matrix is not Hermitian within tolerance");
  mat_ = CMatrix(m.rows(), m.cols());
  for (int r = 0; r < m.rows(); ++r) {
    mat_(r, r) = m(r, r).real();
    for (int c = r + 1; c < m.cols(); ++c) {
      const complexd v = 0.5 * (m(r, c) + std::conj(m(c, r)));
      mat_(r, c) = v;
      mat_(c, r) = std::conj(v);
    }
  }
}

}  // namespace xnlg
