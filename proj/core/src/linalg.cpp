#include "xnlg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xnlg/rng.hpp"

namespace xnlg {

namespace {

double off_diagonal_norm(const CMatrix& a) {
  double s = 0.0;
  for (int p = 0; p < a.rows(); ++p)
    for (int q = p + 1; q < a.cols(); ++q) s += std::norm(a(p, q));
  return std::sqrt(2.0 * s);
}

// One cyclic Jacobi pass over all index pairs of the Hermitian working
// matrix `a`, accumulating rotations into `v`.
void jacobi_sweep(CMatrix& a, CMatrix& v) {
  const int n = a.rows();
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      const complexd apq = a(p, q);
      const double g = std::abs(apq);
      if (g == 0.0) continue;
      const complexd phase = apq / g;
      const double app = a(p, p).real();
      const double aqq = a(q, q).real();
      const double tau = (aqq - app) / (2.0 * g);
      const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
      const double c = 1.0 / std::sqrt(1.0 + t * t);
      const double s = t * c;

      // Unitary differing from identity in the (p,q) block:
      //   U(p,p) = c*phase, U(p,q) = s*phase, U(q,p) = -s, U(q,q) = c.
      for (int k = 0; k < n; ++k) {
        if (k == p || k == q) continue;
        const complexd akp = a(k, p);
        const complexd akq = a(k, q);
        a(k, p) = c * phase * akp - s * akq;
        a(k, q) = s * phase * akp + c * akq;
        a(p, k) = std::conj(a(k, p));
        a(q, k) = std::conj(a(k, q));
      }
      a(p, p) = app - t * g;
      a(q, q) = aqq + t * g;
      a(p, q) = 0.0;
      a(q, p) = 0.0;
      for (int k = 0; k < n; ++k) {
        const complexd vkp = v(k, p);
        const complexd vkq = v(k, q);
        v(k, p) = c * phase * vkp - s * vkq;
        v(k, q) = s * phase * vkp + c * vkq;
      }
    }
  }
}

EigResult jacobi_eig(const CMatrix& h) {
  const int n = h.rows();
  CMatrix a = h;
  CMatrix v = CMatrix::identity(n);
  const double scale = std::max(1.0, a.frobenius_norm());
  const double target = 1e-12 * scale;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) break;
    jacobi_sweep(a, v);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });

  EigResult out;
  out.values.resize(n);
  out.vectors = CMatrix(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]).real();
    for (int k = 0; k < n; ++k) out.vectors(k, j) = v(k, order[j]);
  }
  return out;
}

std::vector<complexd> column(const CMatrix& m, int j) {
  std::vector<complexd> v(m.rows());
  for (int i = 0; i < m.rows(); ++i) v[i] = m(i, j);
  return v;
}

// Lanczos with full reorthogonalization for the largest eigenpair.
// Returns false if the residual check fails and the caller should fall back
// to the dense path.
bool lanczos_max_eig(const HermMatrix& h, MaxEigResult& out) {
  const CMatrix& a = h.matrix();
  const int n = h.dim();
  const int max_steps = std::min(n, 180);
  const int block = 24;
  const double scale = std::max(1.0, a.frobenius_norm());

  SplitMix64 rng(0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(n));
  std::vector<std::vector<complexd>> basis;
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples basis[j] and basis[j+1]

  {
    std::vector<complexd> v(n);
    for (auto& x : v) x = rng.complex_normal();
    const double nrm = vec_norm(v);
    if (nrm == 0.0) return false;
    for (auto& x : v) x /= nrm;
    basis.push_back(std::move(v));
  }

  // Largest Ritz pair of the current tridiagonal.
  auto tridiag_top = [&](double& theta, std::vector<double>& s) {
    const int m = static_cast<int>(alpha.size());
    CMatrix t(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) {
        t(i, i + 1) = beta[i];
        t(i + 1, i) = beta[i];
      }
    }
    EigResult e = jacobi_eig(t);
    theta = e.values[m - 1];
    s.resize(m);
    for (int i = 0; i < m; ++i) s[i] = e.vectors(i, m - 1).real();
  };

  // Assemble the Ritz vector, verify the true residual, fill `out`.
  auto finalize = [&](double theta, const std::vector<double>& s) {
    const int m = static_cast<int>(s.size());
    std::vector<complexd> vec(n, 0.0);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < n; ++i) vec[i] += s[j] * basis[j][i];
    const double nrm = vec_norm(vec);
    if (nrm < 0.5) return false;
    for (auto& x : vec) x /= nrm;
    std::vector<complexd> hv = matvec(a, vec);
    double res = 0.0;
    for (int i = 0; i < n; ++i) res += std::norm(hv[i] - theta * vec[i]);
    if (std::sqrt(res) > 1e-9 * scale) return false;
    out.value = theta;
    out.vector = std::move(vec);
    return true;
  };

  while (true) {
    const auto& v = basis.back();
    std::vector<complexd> w = matvec(a, v);
    alpha.push_back(vec_dot(v, w).real());
    // Two reorthogonalization passes keep the basis orthonormal.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        const complexd proj = vec_dot(b, w);
        for (int i = 0; i < n; ++i) w[i] -= proj * b[i];
      }
    }
    const double b_j = vec_norm(w);
    const int m = static_cast<int>(alpha.size());
    const bool invariant = b_j <= 1e-13 * scale;
    const bool exhausted = m == max_steps || m == n;

    if (invariant || exhausted || m % block == 0) {
      double theta;
      std::vector<double> s;
      tridiag_top(theta, s);
      // A random start vector overlaps the top eigenspace almost surely, so
      // an invariant subspace means the Ritz pair already converged.
      if (invariant || b_j * std::abs(s[m - 1]) <= 1e-11 * scale)
        return finalize(theta, s);
      if (exhausted) return false;
    }
    beta.push_back(b_j);
    for (auto& x : w) x /= b_j;
    basis.push_back(std::move(w));
  }
}

}  // namespace

EigResult herm_eig(const HermMatrix& h) {
  if (h.dim() == 0) throw DimensionError("herm_eig of an empty matrix");
  return jacobi_eig(h.matrix());
}

double op_norm(const CMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  if (m.rows() == m.cols() && m.is_hermitian(1e-13 * std::max(1.0, m.max_abs()))) {
    EigResult e = jacobi_eig(m);
    return std::max(std::abs(e.values.front()), std::abs(e.values.back()));
  }
  const CMatrix gram = m.adjoint() * m;
  EigResult e = jacobi_eig(gram);
  return std::sqrt(std::max(0.0, e.values.back()));
}

MaxEigResult max_eig(const HermMatrix& h) {
  if (h.dim() == 0) throw DimensionError("max_eig of an empty matrix");
  if (h.dim() > 96) {
    MaxEigResult out;
    if (lanczos_max_eig(h, out)) return out;
  }
  EigResult e = jacobi_eig(h.matrix());
  MaxEigResult out;
  out.value = e.values.back();
  out.vector = column(e.vectors, h.dim() - 1);
  return out;
}

HermMatrix psd_sqrt(const HermMatrix& h, double neg_tol) {
  EigResult e = herm_eig(h);
  const double scale = std::max(1.0, std::abs(e.values.back()));
  if (!e.values.empty() && e.values.front() < -neg_tol * scale)
    throw DomainError("psd_sqrt of a matrix with a significantly negative eigenvalue");
  const int n = h.dim();
  CMatrix out(n, n);
  // Roundoff-scale eigenvalues are flushed to zero; the square root would
  // otherwise amplify them from eps to sqrt(eps).
  const double flush = 1e-13 * scale;
  for (int j = 0; j < n; ++j) {
    const double lam = e.values[j] <= flush ? 0.0 : std::sqrt(e.values[j]);
    if (lam == 0.0) continue;
    for (int r = 0; r < n; ++r) {
      const complexd vr = e.vectors(r, j) * lam;
      out(r, r) += vr * std::conj(e.vectors(r, j));
      for (int c = r + 1; c < n; ++c) {
        out(r, c) += vr * std::conj(e.vectors(c, j));
      }
    }
  }
  for (int r = 0; r < n; ++r) {
    out(r, r) = out(r, r).real();
    for (int c = r + 1; c < n; ++c) out(c, r) = std::conj(out(r, c));
  }
  return HermMatrix(out, 1e-9);
}

CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const complexd aij = a(i, j);
      if (aij == complexd(0.0)) continue;
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

CMatrix tensor(const std::vector<CMatrix>& factors) {
  if (factors.empty()) return CMatrix::identity(1);
  CMatrix out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = tensor(out, factors[i]);
  return out;
}

CMatrix partial_trace(const CMatrix& m, const std::vector<int>& dims,
                      const std::vector<int>& keep) {
  const int nfac = static_cast<int>(dims.size());
  long long total = 1;
  for (int d : dims) {
    if (d <= 0) throw DimensionError("partial_trace factor dimensions must be positive");
    total *= d;
  }
  if (m.rows() != m.cols() || m.rows() != total)
    throw DimensionError("partial_trace dimension mismatch");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] < 0 || keep[i] >= nfac || (i > 0 && keep[i] <= keep[i - 1]))
      throw DimensionError("partial_trace keep list must be strictly increasing factor indices");
  }

  std::vector<bool> kept(nfac, false);
  for (int k : keep) kept[k] = true;
  int out_dim = 1;
  for (int k : keep) out_dim *= dims[k];

  // Strides of each factor in the full row index, and of kept factors in the
  // output index.
  std::vector<long long> stride(nfac, 1);
  for (int f = nfac - 2; f >= 0; --f) stride[f] = stride[f + 1] * dims[f + 1];
  std::vector<long long> out_stride(nfac, 0);
  long long s = 1;
  for (int i = static_cast<int>(keep.size()) - 1; i >= 0; --i) {
    out_stride[keep[i]] = s;
    s *= dims[keep[i]];
  }

  CMatrix out(out_dim, out_dim);
  std::vector<int> digits(nfac, 0);
  for (long long r = 0; r < total; ++r) {
    long long rem = r;
    long long kept_row = 0;
    long long traced_part = 0;
    for (int f = 0; f < nfac; ++f) {
      digits[f] = static_cast<int>(rem / stride[f]);
      rem %= stride[f];
      if (kept[f])
        kept_row += digits[f] * out_stride[f];
      else
        traced_part += digits[f] * stride[f];
    }
    // Columns sharing the traced digits enumerate over kept digit choices.
    for (int kc = 0; kc < out_dim; ++kc) {
      long long col = traced_part;
      long long rem_k = kc;
      for (int k : keep) {
        const long long digit = rem_k / out_stride[k];
        rem_k %= out_stride[k];
        col += digit * stride[k];
      }
      out(static_cast<int>(kept_row), kc) += m(static_cast<int>(r), static_cast<int>(col));
    }
  }
  return out;
}

complexd hs_inner(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("hs_inner shape mismatch");
  complexd s = 0.0;
  const auto& da = a.data();
  const auto& db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) s += std::conj(da[i]) * db[i];
  return s;
}

std::vector<complexd> matvec(const CMatrix& m, const std::vector<complexd>& v) {
  if (m.cols() != static_cast<int>(v.size())) throw DimensionError("matvec shape mismatch");
  std::vector<complexd> out(m.rows(), 0.0);
  for (int i = 0; i < m.rows(); ++i) {
    complexd s = 0.0;
    for (int j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

double vec_norm(const std::vector<complexd>& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

complexd vec_dot(const std::vector<complexd>& a, const std::vector<complexd>& b) {
  if (a.size() != b.size()) throw DimensionError("vec_dot length mismatch");
  complexd s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

}  // namespace xnlg
