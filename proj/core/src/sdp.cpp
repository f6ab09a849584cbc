#include "xnlg/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>

namespace xnlg::sdp {

namespace {

using Vec = std::vector<double>;

// ---------------------------------------------------------------------------
// Dense real kernels (row-major square matrices).
// ---------------------------------------------------------------------------

void mul(int n, const double* a, const double* b, double* c) {
  std::fill(c, c + static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * n;
    double* ci = c + static_cast<std::size_t>(i) * n;
    for (int k = 0; k < n; ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b + static_cast<std::size_t>(k) * n;
      for (int j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
}

void mul_at_b(int n, const double* a, const double* b, double* c) {
  std::fill(c, c + static_cast<std::size_t>(n) * n, 0.0);
  for (int k = 0; k < n; ++k) {
    const double* ak = a + static_cast<std::size_t>(k) * n;
    const double* bk = b + static_cast<std::size_t>(k) * n;
    for (int i = 0; i < n; ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      double* ci = c + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) ci[j] += aki * bk[j];
    }
  }
}

void mul_a_bt(int n, const double* a, const double* b, double* c) {
  for (int i = 0; i < n; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * n;
    double* ci = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<std::size_t>(j) * n;
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += ai[k] * bj[k];
      ci[j] = s;
    }
  }
}

void symmetrize(int n, double* a) {
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (a[static_cast<std::size_t>(i) * n + j] +
                              a[static_cast<std::size_t>(j) * n + i]);
      a[static_cast<std::size_t>(i) * n + j] = v;
      a[static_cast<std::size_t>(j) * n + i] = v;
    }
}

// In-place lower Cholesky; returns false if the matrix is not positive
// definite. Only the lower triangle of the result is meaningful.
bool chol_lower(int n, double* a) {
  for (int j = 0; j < n; ++j) {
    double d = a[static_cast<std::size_t>(j) * n + j];
    for (int k = 0; k < j; ++k) {
      const double l = a[static_cast<std::size_t>(j) * n + k];
      d -= l * l;
    }
    if (!(d > 0.0)) return false;
    const double dj = std::sqrt(d);
    a[static_cast<std::size_t>(j) * n + j] = dj;
    for (int i = j + 1; i < n; ++i) {
      double s = a[static_cast<std::size_t>(i) * n + j];
      const double* li = a + static_cast<std::size_t>(i) * n;
      const double* lj = a + static_cast<std::size_t>(j) * n;
      for (int k = 0; k < j; ++k) s -= li[k] * lj[k];
      a[static_cast<std::size_t>(i) * n + j] = s / dj;
    }
  }
  // Zero the strict upper triangle so the factor can be used as a matrix.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = 0.0;
  return true;
}

void solve_lower(int n, const double* l, double* x) {
  for (int i = 0; i < n; ++i) {
    double s = x[i];
    const double* li = l + static_cast<std::size_t>(i) * n;
    for (int k = 0; k < i; ++k) s -= li[k] * x[k];
    x[i] = s / li[i];
  }
}

void solve_lower_t(int n, const double* l, double* x) {
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = i + 1; k < n; ++k) s -= l[static_cast<std::size_t>(k) * n + i] * x[k];
    x[i] = s / l[static_cast<std::size_t>(i) * n + i];
  }
}

// One-sided Jacobi SVD: m = u diag(sigma) v^T with orthogonal u, v and
// sigma descending. Suited to the well-conditioned scaling matrices the
// interior-point iteration produces.
bool hestenes_svd(int n, Vec m, Vec& u, Vec& sigma, Vec& v) {
  v.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

  const int max_sweeps = 40;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_cos = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double aii = 0.0, ajj = 0.0, aij = 0.0;
        for (int k = 0; k < n; ++k) {
          const double ci = m[static_cast<std::size_t>(k) * n + i];
          const double cj = m[static_cast<std::size_t>(k) * n + j];
          aii += ci * ci;
          ajj += cj * cj;
          aij += ci * cj;
        }
        if (aii == 0.0 || ajj == 0.0) continue;
        const double cosine = std::abs(aij) / std::sqrt(aii * ajj);
        max_cos = std::max(max_cos, cosine);
        if (cosine <= 1e-14) continue;
        const double tau = (ajj - aii) / (2.0 * aij);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          double* mk = m.data() + static_cast<std::size_t>(k) * n;
          const double mi = mk[i], mj = mk[j];
          mk[i] = c * mi - s * mj;
          mk[j] = s * mi + c * mj;
          double* vk = v.data() + static_cast<std::size_t>(k) * n;
          const double vi = vk[i], vj = vk[j];
          vk[i] = c * vi - s * vj;
          vk[j] = s * vi + c * vj;
        }
      }
    }
    if (max_cos <= 1e-14) break;
  }

  sigma.assign(n, 0.0);
  u.assign(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> norms(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += m[static_cast<std::size_t>(k) * n + j] *
                                     m[static_cast<std::size_t>(k) * n + j];
    norms[j] = std::sqrt(s);
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) { return norms[a] > norms[b]; });
  for (int idx = 0; idx < n; ++idx) {
    const int j = order[idx];
    sigma[idx] = norms[j];
    if (norms[j] <= 0.0) return false;
    for (int k = 0; k < n; ++k)
      u[static_cast<std::size_t>(k) * n + idx] = m[static_cast<std::size_t>(k) * n + j] / norms[j];
    // Reorder v columns to match.
  }
  // v reorder in a second pass (columns permuted by `order`).
  Vec v2(static_cast<std::size_t>(n) * n);
  for (int idx = 0; idx < n; ++idx) {
    const int j = order[idx];
    for (int k = 0; k < n; ++k)
      v2[static_cast<std::size_t>(k) * n + idx] = v[static_cast<std::size_t>(k) * n + j];
  }
  v = std::move(v2);
  return true;
}

// ---------------------------------------------------------------------------
// Problem preprocessing: canonicalization, real embedding, deduplication,
// removal of linearly dependent constraint rows.
// ---------------------------------------------------------------------------

struct CanonEntry {
  int block, row, col;  // row <= col
  complexd value;
};

struct REntry {
  int r, c;
  double v;
};

struct PrepResult {
  // Canonical complex data (all original constraints), used for reporting.
  std::vector<std::vector<CanonEntry>> ccons;
  std::vector<CanonEntry> cobj;
  std::vector<double> cb;

  // Real embedded problem on the kept constraints.
  std::vector<int> rdims;
  std::vector<bool> complex_block;
  std::vector<std::vector<std::vector<REntry>>> acons;  // [kept][block] full expansion
  std::vector<std::vector<REntry>> cmat;                // objective of the MIN form (-C)
  Vec b;
  std::vector<int> kept;  // kept row -> original row

  bool infeasible_rows = false;  // inconsistent dependent rows found
  std::vector<double> farkas_y;  // certificate over original rows if so
};

std::vector<CanonEntry> canonicalize_entries(const SparseHerm& h,
                                             const std::vector<int>& dims) {
  std::vector<CanonEntry> out;
  out.reserve(h.entries.size());
  for (const auto& e : h.entries) {
    if (e.block < 0 || e.block >= static_cast<int>(dims.size()))
      throw DimensionError("sdp coefficient block index out of range");
    if (e.row < 0 || e.col < 0 || e.row >= dims[e.block] || e.col >= dims[e.block])
      throw DimensionError("sdp coefficient entry out of range");
    if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag()))
      throw DomainError("sdp coefficient entry is not finite");
    out.push_back({e.block, e.row, e.col, e.value});
  }
  std::sort(out.begin(), out.end(), [](const CanonEntry& a, const CanonEntry& b) {
    if (a.block != b.block) return a.block < b.block;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  });
  std::vector<CanonEntry> merged;
  for (const auto& e : out) {
    if (!merged.empty() && merged.back().block == e.block && merged.back().row == e.row &&
        merged.back().col == e.col) {
      merged.back().value += e.value;
    } else {
      merged.push_back(e);
    }
  }
  std::vector<CanonEntry> result;
  for (auto& e : merged) {
    if (e.row == e.col) {
      if (std::abs(e.value.imag()) > 1e-10 * (1.0 + std::abs(e.value.real())))
        throw DomainError("sdp coefficient has a non-real diagonal entry");
      e.value = complexd(e.value.real(), 0.0);
    }
    if (e.value != complexd(0.0)) result.push_back(e);
  }
  return result;
}

std::uint64_t hash_row(const std::vector<CanonEntry>& entries, double b) {
  auto mix = [](std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  };
  auto dbits = [](double d) {
    std::uint64_t u;
    static_assert(sizeof(u) == sizeof(d));
    std::memcpy(&u, &d, sizeof(u));
    return u;
  };
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (const auto& e : entries) {
    h = mix(h, static_cast<std::uint64_t>(e.block));
    h = mix(h, static_cast<std::uint64_t>(e.row) << 32 | static_cast<std::uint64_t>(e.col));
    h = mix(h, dbits(e.value.real()));
    h = mix(h, dbits(e.value.imag()));
  }
  return mix(h, dbits(b));
}

// Full-expansion real embedding of one canonical Hermitian coefficient list.
// Complex blocks double in dimension and the coefficients are halved so that
// <embedded A, W> = <A, Z> when Z is extracted from W.
std::vector<std::vector<REntry>> real_expand(const std::vector<CanonEntry>& entries,
                                             const std::vector<int>& cdims,
                                             const std::vector<bool>& complex_block,
                                             double sign) {
  std::vector<std::vector<REntry>> out(cdims.size());
  auto push = [&](int blk, int r, int c, double v) {
    if (v == 0.0) return;
    out[blk].push_back({r, c, v});
    if (r != c) out[blk].push_back({c, r, v});
  };
  for (const auto& e : entries) {
    const int d = cdims[e.block];
    const double re = sign * e.value.real();
    const double im = sign * e.value.imag();
    if (!complex_block[e.block]) {
      push(e.block, e.row, e.col, re);
      continue;
    }
    push(e.block, e.row, e.col, 0.5 * re);
    push(e.block, e.row + d, e.col + d, 0.5 * re);
    if (e.row == e.col) {
      // Hermitian diagonal is real; nothing off-diagonal to add.
      continue;
    }
    push(e.block, e.row, e.col + d, -0.5 * im);
    push(e.block, e.row + d, e.col, 0.5 * im);
  }
  return out;
}

double sparse_inner(const std::vector<std::vector<REntry>>& a,
                    const std::vector<std::vector<REntry>>& b) {
  // Entries within a block are generated in a deterministic order but not
  // sorted; use a sort-merge over copies.
  double total = 0.0;
  for (std::size_t blk = 0; blk < a.size(); ++blk) {
    if (a[blk].empty() || b[blk].empty()) continue;
    auto key = [](const REntry& e) { return std::pair<int, int>(e.r, e.c); };
    auto va = a[blk];
    auto vb = b[blk];
    auto cmp = [&](const REntry& x, const REntry& y) { return key(x) < key(y); };
    std::sort(va.begin(), va.end(), cmp);
    std::sort(vb.begin(), vb.end(), cmp);
    std::size_t i = 0, j = 0;
    while (i < va.size() && j < vb.size()) {
      if (key(va[i]) < key(vb[j]))
        ++i;
      else if (key(vb[j]) < key(va[i]))
        ++j;
      else {
        total += va[i].v * vb[j].v;
        ++i;
        ++j;
      }
    }
  }
  return total;
}

PrepResult preprocess(const SdpProblem& problem) {
  const auto& cdims = problem.block_dims();
  for (int d : cdims)
    if (d <= 0) throw DimensionError("sdp block dimensions must be positive");

  PrepResult prep;
  prep.cobj = canonicalize_entries(problem.objective(), cdims);
  const int p0 = problem.num_constraints();
  prep.ccons.reserve(p0);
  for (int i = 0; i < p0; ++i)
    prep.ccons.push_back(canonicalize_entries(problem.constraints()[i], cdims));
  prep.cb = problem.rhs();
  for (double v : prep.cb)
    if (!std::isfinite(v)) throw DomainError("sdp right-hand side is not finite");

  // A block goes through the real embedding only if some coefficient in it
  // has a nonzero imaginary part.
  prep.complex_block.assign(cdims.size(), false);
  auto scan = [&](const std::vector<CanonEntry>& es) {
    for (const auto& e : es)
      if (e.value.imag() != 0.0) prep.complex_block[e.block] = true;
  };
  scan(prep.cobj);
  for (const auto& es : prep.ccons) scan(es);

  prep.rdims.resize(cdims.size());
  for (std::size_t i = 0; i < cdims.size(); ++i)
    prep.rdims[i] = prep.complex_block[i] ? 2 * cdims[i] : cdims[i];

  prep.cmat = real_expand(prep.cobj, cdims, prep.complex_block, -1.0);

  // Exact-duplicate removal by canonical hashing of (A_i, b_i).
  std::vector<int> candidates;
  {
    std::vector<std::uint64_t> hashes(p0);
    for (int i = 0; i < p0; ++i) hashes[i] = hash_row(prep.ccons[i], prep.cb[i]);
    for (int i = 0; i < p0; ++i) {
      bool dup = false;
      for (int j : candidates) {
        if (hashes[j] != hashes[i]) continue;
        if (prep.cb[j] == prep.cb[i] && prep.ccons[j].size() == prep.ccons[i].size()) {
          bool same = true;
          for (std::size_t k = 0; k < prep.ccons[i].size(); ++k) {
            const auto& a = prep.ccons[j][k];
            const auto& b = prep.ccons[i][k];
            if (a.block != b.block || a.row != b.row || a.col != b.col || a.value != b.value) {
              same = false;
              break;
            }
          }
          if (same) {
            dup = true;
            break;
          }
        }
      }
      if (!dup) candidates.push_back(i);
    }
  }

  std::vector<std::vector<std::vector<REntry>>> expansions;
  expansions.reserve(candidates.size());
  for (int i : candidates)
    expansions.push_back(real_expand(prep.ccons[i], cdims, prep.complex_block, 1.0));

  // Rank-revealing removal of exactly dependent rows via pivoted Cholesky of
  // the constraint Gram matrix (its R factor matches the QR factor of the
  // stacked coefficient rows).
  const int q = static_cast<int>(candidates.size());
  Vec gram(static_cast<std::size_t>(q) * q, 0.0);
  for (int i = 0; i < q; ++i)
    for (int j = i; j < q; ++j) {
      const double v = sparse_inner(expansions[i], expansions[j]);
      gram[static_cast<std::size_t>(i) * q + j] = v;
      gram[static_cast<std::size_t>(j) * q + i] = v;
    }

  double max_diag = 1.0;
  for (int i = 0; i < q; ++i)
    max_diag = std::max(max_diag, gram[static_cast<std::size_t>(i) * q + i]);
  const double pivot_floor = 1e-10 * max_diag;

  std::vector<int> pivots;          // indices into candidates, pivot order
  std::vector<int> remaining(q);
  std::iota(remaining.begin(), remaining.end(), 0);
  Vec resid_diag(q);
  for (int i = 0; i < q; ++i) resid_diag[i] = gram[static_cast<std::size_t>(i) * q + i];
  // low[k][i]: Cholesky factor entries L(i, k) in pivot order.
  std::vector<Vec> low;
  std::vector<bool> pivoted(q, false);

  for (int step = 0; step < q; ++step) {
    int best = -1;
    double best_val = pivot_floor;
    for (int i = 0; i < q; ++i) {
      if (pivoted[i]) continue;
      if (resid_diag[i] > best_val) {
        best_val = resid_diag[i];
        best = i;
      }
    }
    if (best < 0) break;
    const double piv = std::sqrt(resid_diag[best]);
    Vec col(q, 0.0);
    for (int i = 0; i < q; ++i) {
      if (pivoted[i] || i == best) continue;
      double s = gram[static_cast<std::size_t>(i) * q + best];
      for (std::size_t k = 0; k < low.size(); ++k) s -= low[k][i] * low[k][best];
      col[i] = s / piv;
    }
    col[best] = piv;
    for (int i = 0; i < q; ++i) {
      if (pivoted[i] || i == best) continue;
      resid_diag[i] -= col[i] * col[i];
    }
    pivoted[best] = true;
    pivots.push_back(best);
    low.push_back(std::move(col));
  }

  const int rank = static_cast<int>(pivots.size());
  std::vector<int> dependent;
  for (int i = 0; i < q; ++i)
    if (!pivoted[i]) dependent.push_back(i);

  // Dependent rows must carry a consistent right-hand side; otherwise the
  // problem is infeasible and the dependence coefficients give a Farkas
  // certificate.
  for (int dep : dependent) {
    // Solve L L^T coeff = gram[pivots, dep] in pivot order.
    Vec rhsv(rank);
    for (int k = 0; k < rank; ++k)
      rhsv[k] = gram[static_cast<std::size_t>(pivots[k]) * q + dep];
    for (int k = 0; k < rank; ++k) {
      double s = rhsv[k];
      for (int j = 0; j < k; ++j) s -= low[j][pivots[k]] * rhsv[j];
      rhsv[k] = s / low[k][pivots[k]];
    }
    for (int k = rank - 1; k >= 0; --k) {
      double s = rhsv[k];
      for (int j = k + 1; j < rank; ++j) s -= low[k][pivots[j]] * rhsv[j];
      rhsv[k] = s / low[k][pivots[k]];
    }
    double combo_b = 0.0;
    for (int k = 0; k < rank; ++k) combo_b += rhsv[k] * prep.cb[candidates[pivots[k]]];
    const double bi = prep.cb[candidates[dep]];
    if (std::abs(bi - combo_b) > 1e-8 * (1.0 + std::abs(bi))) {
      prep.infeasible_rows = true;
      prep.farkas_y.assign(p0, 0.0);
      const double sgn = combo_b - bi > 0.0 ? 1.0 : -1.0;
      for (int k = 0; k < rank; ++k) prep.farkas_y[candidates[pivots[k]]] = sgn * rhsv[k];
      prep.farkas_y[candidates[dep]] = -sgn;
      return prep;
    }
  }

  std::vector<int> kept_sorted;
  for (int k = 0; k < rank; ++k) kept_sorted.push_back(pivots[k]);
  std::sort(kept_sorted.begin(), kept_sorted.end());
  for (int k : kept_sorted) {
    prep.kept.push_back(candidates[k]);
    prep.acons.push_back(expansions[k]);
    prep.b.push_back(prep.cb[candidates[k]]);
  }
  return prep;
}

// ---------------------------------------------------------------------------
// Homogeneous self-dual interior-point iteration.
// ---------------------------------------------------------------------------

struct Blocks {
  std::vector<Vec> m;  // dense per-block storage

  static Blocks zero(const std::vector<int>& dims) {
    Blocks b;
    b.m.resize(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i)
      b.m[i].assign(static_cast<std::size_t>(dims[i]) * dims[i], 0.0);
    return b;
  }
  static Blocks identity(const std::vector<int>& dims, double scale) {
    Blocks b = zero(dims);
    for (std::size_t i = 0; i < dims.size(); ++i)
      for (int k = 0; k < dims[i]; ++k) b.m[i][static_cast<std::size_t>(k) * dims[i] + k] = scale;
    return b;
  }
};

struct HsdWork {
  const PrepResult& prep;
  std::vector<int> dims;
  int p;
  int nu;
  Vec b;

  // Iterates (standard min form): X, S PSD blocks, v free, tau, kappa.
  Blocks X, S;
  Vec v;
  double tau = 1.0, kappa = 1.0;

  explicit HsdWork(const PrepResult& pr)
      : prep(pr), dims(pr.rdims), p(static_cast<int>(pr.b.size())), b(pr.b) {
    nu = 0;
    for (int d : dims) nu += d;
    X = Blocks::identity(dims, 1.0);
    S = Blocks::identity(dims, 1.0);
    v.assign(p, 0.0);
  }

  double inner(const Blocks& a, const Blocks& c) const {
    double s = 0.0;
    for (std::size_t blk = 0; blk < a.m.size(); ++blk) {
      const auto& x = a.m[blk];
      const auto& y = c.m[blk];
      for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
    }
    return s;
  }

  double eval_sparse(const std::vector<std::vector<REntry>>& sp, const Blocks& mblocks) const {
    double s = 0.0;
    for (std::size_t blk = 0; blk < sp.size(); ++blk) {
      const int n = dims[blk];
      const auto& m = mblocks.m[blk];
      for (const auto& e : sp[blk]) s += e.v * m[static_cast<std::size_t>(e.r) * n + e.c];
    }
    return s;
  }

  Vec opA(const Blocks& mb) const {
    Vec out(p);
    for (int i = 0; i < p; ++i) out[i] = eval_sparse(prep.acons[i], mb);
    return out;
  }

  void add_sparse(Blocks& mb, const std::vector<std::vector<REntry>>& sp, double w) const {
    if (w == 0.0) return;
    for (std::size_t blk = 0; blk < sp.size(); ++blk) {
      const int n = dims[blk];
      auto& m = mb.m[blk];
      for (const auto& e : sp[blk]) m[static_cast<std::size_t>(e.r) * n + e.c] += w * e.v;
    }
  }

  Blocks opAt(const Vec& y) const {
    Blocks out = Blocks::zero(dims);
    for (int i = 0; i < p; ++i) add_sparse(out, prep.acons[i], y[i]);
    return out;
  }

  Blocks cmat_blocks() const {
    Blocks out = Blocks::zero(dims);
    for (std::size_t blk = 0; blk < prep.cmat.size(); ++blk) {
      const int n = dims[blk];
      for (const auto& e : prep.cmat[blk])
        out.m[blk][static_cast<std::size_t>(e.r) * n + e.c] += e.v;
    }
    return out;
  }
};

// Largest step alpha in (0, cap] with M + alpha dM positive definite,
// resolved by Cholesky bisection.
double max_step_psd(const std::vector<int>& dims, const Blocks& m, const Blocks& dm, double cap) {
  Vec scratch;
  auto feasible = [&](double alpha) {
    for (std::size_t blk = 0; blk < m.m.size(); ++blk) {
      const int n = dims[blk];
      scratch.resize(static_cast<std::size_t>(n) * n);
      for (std::size_t k = 0; k < scratch.size(); ++k)
        scratch[k] = m.m[blk][k] + alpha * dm.m[blk][k];
      if (!chol_lower(n, scratch.data())) return false;
    }
    return true;
  };
  if (feasible(cap)) return cap;
  double lo = 0.0, hi = cap;
  for (int it = 0; it < 30; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

struct Scaling {
  // Per block: w = r r^T is the NT scaling, lambda the (diagonal) scaled point.
  std::vector<Vec> r, rinv, w;
  std::vector<Vec> lambda;  // diagonal entries
  bool ok = false;
};

Scaling compute_scaling(const HsdWork& h) {
  Scaling sc;
  const int nb = static_cast<int>(h.dims.size());
  sc.r.resize(nb);
  sc.rinv.resize(nb);
  sc.w.resize(nb);
  sc.lambda.resize(nb);
  for (int blk = 0; blk < nb; ++blk) {
    const int n = h.dims[blk];
    Vec lx = h.X.m[blk];
    Vec ls = h.S.m[blk];
    if (!chol_lower(n, lx.data()) || !chol_lower(n, ls.data())) return sc;
    Vec m(static_cast<std::size_t>(n) * n);
    mul_at_b(n, ls.data(), lx.data(), m.data());  // Ls^T Lx
    Vec u, sigma, vt;
    if (!hestenes_svd(n, std::move(m), u, sigma, vt)) return sc;
    // r = Lx v sigma^{-1/2}, rinv = sigma^{-1/2} u^T Ls^T.
    Vec r(static_cast<std::size_t>(n) * n), rinv(static_cast<std::size_t>(n) * n);
    mul(n, lx.data(), vt.data(), r.data());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r[static_cast<std::size_t>(i) * n + j] /= std::sqrt(sigma[j]);
    Vec uls(static_cast<std::size_t>(n) * n);
    // u^T Ls^T computed as (Ls u)^T.
    Vec lsu(static_cast<std::size_t>(n) * n);
    mul(n, ls.data(), u.data(), lsu.data());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        uls[static_cast<std::size_t>(i) * n + j] = lsu[static_cast<std::size_t>(j) * n + i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        uls[static_cast<std::size_t>(i) * n + j] /= std::sqrt(sigma[i]);
    Vec w(static_cast<std::size_t>(n) * n);
    mul_a_bt(n, r.data(), r.data(), w.data());
    symmetrize(n, w.data());
    sc.r[blk] = std::move(r);
    sc.rinv[blk] = std::move(uls);
    sc.w[blk] = std::move(w);
    sc.lambda[blk] = sigma;
  }
  sc.ok = true;
  return sc;
}

// W M W for symmetric M.
Blocks conjugate_w(const HsdWork& h, const Scaling& sc, const Blocks& m) {
  Blocks out = Blocks::zero(h.dims);
  Vec tmp;
  for (std::size_t blk = 0; blk < h.dims.size(); ++blk) {
    const int n = h.dims[blk];
    tmp.resize(static_cast<std::size_t>(n) * n);
    mul(n, sc.w[blk].data(), m.m[blk].data(), tmp.data());
    mul(n, tmp.data(), sc.w[blk].data(), out.m[blk].data());
    symmetrize(n, out.m[blk].data());
  }
  return out;
}

struct SchurFactor {
  int p = 0;
  Vec l;  // Cholesky factor of the Schur matrix
  bool ok = false;

  Vec solve(Vec rhs) const {
    solve_lower(p, l.data(), rhs.data());
    solve_lower_t(p, l.data(), rhs.data());
    return rhs;
  }
};

SchurFactor build_schur(const HsdWork& h, const Scaling& sc) {
  const int p = h.p;
  SchurFactor f;
  f.p = p;
  Vec s(static_cast<std::size_t>(p) * p, 0.0);

  // Per block, choose between a dense W A_j W pass and sparse pairwise
  // accumulation based on estimated cost.
  const int nb = static_cast<int>(h.dims.size());
  for (int blk = 0; blk < nb; ++blk) {
    const int n = h.dims[blk];
    const double* w = sc.w[blk].data();
    // Prefix sums of expansion sizes for the pairwise cost estimate.
    std::vector<const std::vector<REntry>*> ent(p);
    double total_nnz = 0.0;
    for (int j = 0; j < p; ++j) {
      ent[j] = &h.prep.acons[j][blk];
      total_nnz += static_cast<double>(ent[j]->size());
    }
    Vec dense_t;
    for (int j = 0; j < p; ++j) {
      const auto& ej = *ent[j];
      if (ej.empty()) continue;
      double pairwise_cost = 0.0;
      for (int i = 0; i <= j; ++i) pairwise_cost += static_cast<double>(ent[i]->size());
      pairwise_cost *= static_cast<double>(ej.size());
      const double dense_cost =
          static_cast<double>(n) * n * n + static_cast<double>(n) * ej.size();
      if (pairwise_cost <= dense_cost) {
        for (int i = 0; i <= j; ++i) {
          const auto& ei = *ent[i];
          if (ei.empty()) continue;
          double acc = 0.0;
          for (const auto& a : ei) {
            const double* w_ca = w + static_cast<std::size_t>(a.c) * n;
            double inner_sum = 0.0;
            for (const auto& bbb : ej)
              inner_sum += bbb.v * w_ca[bbb.r] * w[static_cast<std::size_t>(bbb.c) * n + a.r];
            acc += a.v * inner_sum;
          }
          s[static_cast<std::size_t>(i) * p + j] += acc;
        }
      } else {
        // T = W A_j W, then S_ij += <A_i, T>.
        Vec wa(static_cast<std::size_t>(n) * n, 0.0);
        for (const auto& e : ej) {
          const double* wcol = w + static_cast<std::size_t>(e.r) * n;  // row r of W
          double* out_row = wa.data();
          // wa(:, c) += W(:, r) * v  computed row-wise below.
          for (int i2 = 0; i2 < n; ++i2)
            out_row[static_cast<std::size_t>(i2) * n + e.c] += wcol[i2] * e.v;
        }
        dense_t.assign(static_cast<std::size_t>(n) * n, 0.0);
        mul(n, wa.data(), w, dense_t.data());
        for (int i = 0; i <= j; ++i) {
          const auto& ei = *ent[i];
          double acc = 0.0;
          for (const auto& a : ei) acc += a.v * dense_t[static_cast<std::size_t>(a.r) * n + a.c];
          s[static_cast<std::size_t>(i) * p + j] += acc;
        }
      }
    }
  }
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < i; ++j)
      s[static_cast<std::size_t>(i) * p + j] = s[static_cast<std::size_t>(j) * p + i];

  // Factor with an escalating ridge fallback.
  double ridge = 0.0;
  double max_diag = 0.0;
  for (int i = 0; i < p; ++i)
    max_diag = std::max(max_diag, s[static_cast<std::size_t>(i) * p + i]);
  for (int attempt = 0; attempt < 6; ++attempt) {
    f.l = s;
    if (ridge > 0.0)
      for (int i = 0; i < p; ++i) f.l[static_cast<std::size_t>(i) * p + i] += ridge;
    if (chol_lower(p, f.l.data())) {
      f.ok = true;
      return f;
    }
    ridge = ridge == 0.0 ? 1e-13 * std::max(1.0, max_diag) : ridge * 100.0;
  }
  return f;
}

struct Direction {
  Blocks dX, dS;
  Vec dv;
  double dtau = 0.0, dkappa = 0.0;
};

// One symmetric-product corrector term in scaled space:
// sym(rinv dX rinv^T * r^T dS r).
Blocks scaled_corrector(const HsdWork& h, const Scaling& sc, const Direction& aff) {
  Blocks out = Blocks::zero(h.dims);
  Vec t1, t2, xhat, shat;
  for (std::size_t blk = 0; blk < h.dims.size(); ++blk) {
    const int n = h.dims[blk];
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    t1.resize(nn);
    t2.resize(nn);
    xhat.resize(nn);
    shat.resize(nn);
    // xhat = rinv dX rinv^T
    mul(n, sc.rinv[blk].data(), aff.dX.m[blk].data(), t1.data());
    mul_a_bt(n, t1.data(), sc.rinv[blk].data(), xhat.data());
    // shat = r^T dS r
    mul_at_b(n, sc.r[blk].data(), aff.dS.m[blk].data(), t2.data());
    mul(n, t2.data(), sc.r[blk].data(), shat.data());
    mul(n, xhat.data(), shat.data(), t1.data());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.m[blk][static_cast<std::size_t>(i) * n + j] =
            0.5 * (t1[static_cast<std::size_t>(i) * n + j] +
                   t1[static_cast<std::size_t>(j) * n + i]);
  }
  return out;
}

}  // namespace

void SdpProblem::set_objective(const HermMatrix& c) {
  if (block_dims_.size() != 1)
    throw DimensionError("dense objective interface requires a single-block problem");
  if (c.dim() != block_dims_[0]) throw DimensionError("objective dimension mismatch");
  SparseHerm s;
  for (int r = 0; r < c.dim(); ++r)
    for (int col = r; col < c.dim(); ++col)
      if (c(r, col) != complexd(0.0)) s.add(0, r, col, c(r, col));
  objective_ = std::move(s);
}

void SdpProblem::add_constraint(const HermMatrix& a, double b) {
  if (block_dims_.size() != 1)
    throw DimensionError("dense constraint interface requires a single-block problem");
  if (a.dim() != block_dims_[0]) throw DimensionError("constraint dimension mismatch");
  SparseHerm s;
  for (int r = 0; r < a.dim(); ++r)
    for (int col = r; col < a.dim(); ++col)
      if (a(r, col) != complexd(0.0)) s.add(0, r, col, a(r, col));
  add_constraint(std::move(s), b);
}

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal:
      return "optimal";
    case SdpStatus::MaxIterations:
      return "max_iterations";
    case SdpStatus::Infeasible:
      return "infeasible";
    case SdpStatus::Unbounded:
      return "unbounded";
  }
  return "unknown";
}

CMatrix real_embed(const HermMatrix& h) {
  const int n = h.dim();
  CMatrix out(2 * n, 2 * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const complexd v = h(r, c);
      out(r, c) = v.real();
      out(r + n, c + n) = v.real();
      out(r, c + n) = -v.imag();
      out(r + n, c) = v.imag();
    }
  return out;
}

namespace {

// Shared extraction of the complex solution from real iterates.
struct Extraction {
  std::vector<CMatrix> Z, S;
  double value = 0.0, dual_value = 0.0;
  double primal_residual = 0.0, dual_residual = 0.0, gap = 0.0;
  std::vector<double> y;
};

CMatrix extract_block(const Vec& m, int rdim, bool complex_block, double scale) {
  if (!complex_block) {
    const int n = rdim;
    CMatrix out(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        out(r, c) = 0.5 * (m[static_cast<std::size_t>(r) * n + c] +
                           m[static_cast<std::size_t>(c) * n + r]) *
                    scale;
    return out;
  }
  const int d = rdim / 2;
  const int n = rdim;
  CMatrix out(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      const double re = 0.5 * (m[static_cast<std::size_t>(r) * n + c] +
                               m[static_cast<std::size_t>(r + d) * n + c + d]);
      const double im = 0.5 * (m[static_cast<std::size_t>(r + d) * n + c] -
                               m[static_cast<std::size_t>(r) * n + c + d]);
      out(r, c) = complexd(re, im) * scale;
    }
  // Hermitian cleanup.
  for (int r = 0; r < d; ++r) {
    out(r, r) = out(r, r).real();
    for (int c = r + 1; c < d; ++c) {
      const complexd v = 0.5 * (out(r, c) + std::conj(out(c, r)));
      out(r, c) = v;
      out(c, r) = std::conj(v);
    }
  }
  return out;
}

Extraction extract(const SdpProblem& problem, const PrepResult& prep, const HsdWork& h) {
  Extraction ex;
  const auto& cdims = problem.block_dims();
  const int nb = static_cast<int>(cdims.size());
  const double tau = h.tau;

  ex.Z.resize(nb);
  ex.S.resize(nb);
  for (int blk = 0; blk < nb; ++blk) {
    ex.Z[blk] = extract_block(h.X.m[blk], h.dims[blk], prep.complex_block[blk], 1.0 / tau);
    // Complex dual slack carries a factor 2 because embedded coefficients
    // were halved.
    const double s_scale = prep.complex_block[blk] ? 2.0 / tau : 1.0 / tau;
    ex.S[blk] = extract_block(h.S.m[blk], h.dims[blk], prep.complex_block[blk], s_scale);
  }

  const int p0 = problem.num_constraints();
  ex.y.assign(p0, 0.0);
  for (int k = 0; k < h.p; ++k) ex.y[prep.kept[k]] = -h.v[k] / tau;

  // Objective values and residuals from the canonical complex data.
  auto eval_complex = [&](const std::vector<CanonEntry>& es,
                          const std::vector<CMatrix>& blocks) {
    double s = 0.0;
    for (const auto& e : es) {
      const complexd z = blocks[e.block](e.row, e.col);
      // Hermitian pair contributes value*conj(z) + conj(value)*z off diagonal.
      if (e.row == e.col)
        s += e.value.real() * z.real();
      else
        s += 2.0 * (std::conj(e.value) * z).real();
    }
    return s;
  };

  ex.value = eval_complex(prep.cobj, ex.Z);
  ex.dual_value = 0.0;
  for (int i = 0; i < p0; ++i) ex.dual_value += ex.y[i] * prep.cb[i];

  ex.primal_residual = 0.0;
  for (int i = 0; i < p0; ++i) {
    const double vi = eval_complex(prep.ccons[i], ex.Z);
    ex.primal_residual = std::max(ex.primal_residual, std::abs(vi - prep.cb[i]));
  }

  // Dual residual: || sum_i y_i A_i - C - S ||_max over blocks.
  std::vector<CMatrix> resid(nb);
  for (int blk = 0; blk < nb; ++blk) resid[blk] = CMatrix::zero(cdims[blk], cdims[blk]);
  auto add_herm = [&](const std::vector<CanonEntry>& es, double w) {
    for (const auto& e : es) {
      resid[e.block](e.row, e.col) += w * e.value;
      if (e.row != e.col) resid[e.block](e.col, e.row) += w * std::conj(e.value);
    }
  };
  for (int i = 0; i < p0; ++i)
    if (ex.y[i] != 0.0) add_herm(prep.ccons[i], ex.y[i]);
  add_herm(prep.cobj, -1.0);
  ex.dual_residual = 0.0;
  for (int blk = 0; blk < nb; ++blk) {
    resid[blk] -= ex.S[blk];
    ex.dual_residual = std::max(ex.dual_residual, resid[blk].max_abs());
  }
  ex.gap = std::abs(ex.value - ex.dual_value);
  return ex;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SolveOptions& options) {
  if (problem.block_dims().empty()) throw DimensionError("sdp problem has no blocks");
  if (problem.rhs().size() != problem.constraints().size())
    throw DimensionError("sdp constraint/rhs count mismatch");

  PrepResult prep = preprocess(problem);
  SdpSolution sol;

  if (prep.infeasible_rows) {
    sol.status = SdpStatus::Infeasible;
    sol.y = prep.farkas_y;
    const auto& cdims = problem.block_dims();
    for (int d : cdims) {
      sol.Z.push_back(CMatrix::zero(d, d));
      sol.S.push_back(CMatrix::zero(d, d));
    }
    return sol;
  }

  // With no (independent) constraints the problem separates: value 0 at Z = 0
  // when C is negative semidefinite, otherwise unbounded above.
  if (prep.b.empty()) {
    const auto& cdims = problem.block_dims();
    std::vector<CMatrix> cblocks(cdims.size());
    for (std::size_t i = 0; i < cdims.size(); ++i)
      cblocks[i] = CMatrix::zero(cdims[i], cdims[i]);
    for (const auto& e : prep.cobj) {
      cblocks[e.block](e.row, e.col) += e.value;
      if (e.row != e.col) cblocks[e.block](e.col, e.row) += std::conj(e.value);
    }
    double lam_max = 0.0;
    for (const auto& cb : cblocks) {
      if (cb.rows() == 0) continue;
      EigResult e = herm_eig(HermMatrix(cb, 1e-9));
      lam_max = std::max(lam_max, e.values.back());
    }
    sol.y.assign(problem.num_constraints(), 0.0);
    for (std::size_t i = 0; i < cdims.size(); ++i) {
      sol.Z.push_back(CMatrix::zero(cdims[i], cdims[i]));
      sol.S.push_back(complexd(-1.0) * cblocks[i]);
    }
    sol.status = lam_max > 1e-9 ? SdpStatus::Unbounded : SdpStatus::Optimal;
    return sol;
  }

  HsdWork h(prep);
  const int p = h.p;
  const Blocks cmat = h.cmat_blocks();
  const double bnorm = [&] {
    double m = 0.0;
    for (double x : h.b) m = std::max(m, std::abs(x));
    return m;
  }();
  double cnorm = 0.0;
  for (const auto& es : prep.cobj) cnorm = std::max(cnorm, std::abs(es.value));

  const double tol = options.tol;
  auto current_quality = [&](const Extraction& ex) {
    const double pq = ex.primal_residual / std::max(1.0, bnorm);
    const double dq = ex.dual_residual / std::max(1.0, cnorm);
    const double gq = ex.gap / std::max(1.0, std::abs(ex.value) + std::abs(ex.dual_value));
    return std::max({pq, dq, gq});
  };

  Extraction best = extract(problem, prep, h);
  double best_quality = current_quality(best);
  int iterations = 0;
  SdpStatus status = SdpStatus::MaxIterations;

  double mu0 = (h.inner(h.X, h.S) + h.tau * h.kappa) / (h.nu + 1);
  int stall_count = 0;
  double prev_mu = mu0;

  for (int iter = 0; iter < options.max_iter; ++iter) {
    iterations = iter;
    // Convergence check on the de-homogenized complex solution.
    Extraction ex = extract(problem, prep, h);
    const double q = current_quality(ex);
    if (q < best_quality) {
      best = ex;
      best_quality = q;
    }
    if (ex.primal_residual <= tol * std::max(1.0, bnorm) &&
        ex.dual_residual <= tol * std::max(1.0, cnorm) &&
        ex.gap <= tol * std::max(1.0, std::abs(ex.value) + std::abs(ex.dual_value))) {
      status = SdpStatus::Optimal;
      best = ex;
      break;
    }

    const double mu = (h.inner(h.X, h.S) + h.tau * h.kappa) / (h.nu + 1);
    // Infeasibility / unboundedness detection as tau collapses.
    if (h.tau <= 1e-10 * std::max(1.0, h.kappa) || mu <= 1e-16 * std::max(1.0, mu0)) {
      const double btv = std::inner_product(h.b.begin(), h.b.end(), h.v.begin(), 0.0);
      const double cx = h.inner(cmat, h.X);
      if (btv > 1e-10 && btv >= 10.0 * std::max(0.0, -cx)) {
        status = SdpStatus::Infeasible;
        best = ex;
        for (int k = 0; k < p; ++k) best.y[prep.kept[k]] = -h.v[k];
      } else if (-cx > 1e-10 && -cx >= 10.0 * std::max(0.0, btv)) {
        status = SdpStatus::Unbounded;
        best = ex;
      }
      break;
    }
    if (mu > 0.9999 * prev_mu) {
      if (++stall_count >= 8) break;
    } else {
      stall_count = 0;
    }
    prev_mu = mu;

    Scaling sc = compute_scaling(h);
    if (!sc.ok) break;
    SchurFactor schur = build_schur(h, sc);
    if (!schur.ok) break;

    // Residuals.
    Vec ax = h.opA(h.X);
    Vec rp(p);
    for (int i = 0; i < p; ++i) rp[i] = ax[i] - h.tau * h.b[i];
    Blocks atv = h.opAt(h.v);
    Blocks rd = Blocks::zero(h.dims);
    for (std::size_t blk = 0; blk < rd.m.size(); ++blk)
      for (std::size_t k = 0; k < rd.m[blk].size(); ++k)
        rd.m[blk][k] = h.tau * cmat.m[blk][k] - atv.m[blk][k] - h.S.m[blk][k];
    const double btv = std::inner_product(h.b.begin(), h.b.end(), h.v.begin(), 0.0);
    const double cx = h.inner(cmat, h.X);
    const double rg = btv - cx - h.kappa;

    // Shared per-iteration quantities.
    const Blocks wcw = conjugate_w(h, sc, cmat);
    Vec u = h.opA(wcw);
    const double cbar = h.inner(cmat, wcw);
    const Blocks wrdw = conjugate_w(h, sc, rd);
    Vec a_wrdw = h.opA(wrdw);
    const double c_wrdw = h.inner(cmat, wrdw);

    Vec bu(p), bmu(p);
    for (int i = 0; i < p; ++i) {
      bu[i] = h.b[i] + u[i];
      bmu[i] = h.b[i] - u[i];
    }
    const Vec g1 = schur.solve(bu);
    const double denom0 = std::inner_product(bmu.begin(), bmu.end(), g1.begin(), 0.0) + cbar +
                          h.kappa / h.tau;

    auto solve_direction = [&](const Blocks& rc, double rtk) {
      Direction d;
      Vec q1(p);
      Vec arc = h.opA(rc);
      for (int i = 0; i < p; ++i) q1[i] = rp[i] + arc[i] - a_wrdw[i];
      const Vec g2 = schur.solve(q1);
      const double c_rc = h.inner(cmat, rc);
      const double rhs2 = rtk / h.tau - rg + (c_rc - c_wrdw);
      const double denom = std::abs(denom0) > 1e-300 ? denom0 : 1e-300;
      d.dtau = (rhs2 + std::inner_product(bmu.begin(), bmu.end(), g2.begin(), 0.0)) / denom;
      d.dv.resize(p);
      for (int i = 0; i < p; ++i) d.dv[i] = g1[i] * d.dtau - g2[i];
      // dS = -A*(dv) + c dtau + rd
      d.dS = h.opAt(d.dv);
      for (std::size_t blk = 0; blk < d.dS.m.size(); ++blk)
        for (std::size_t k = 0; k < d.dS.m[blk].size(); ++k)
          d.dS.m[blk][k] = -d.dS.m[blk][k] + d.dtau * cmat.m[blk][k] + rd.m[blk][k];
      // dX = rc - W dS W
      const Blocks wdsw = conjugate_w(h, sc, d.dS);
      d.dX = rc;
      for (std::size_t blk = 0; blk < d.dX.m.size(); ++blk) {
        for (std::size_t k = 0; k < d.dX.m[blk].size(); ++k) d.dX.m[blk][k] -= wdsw.m[blk][k];
        symmetrize(h.dims[blk], d.dX.m[blk].data());
      }
      d.dkappa = rtk / h.tau - (h.kappa / h.tau) * d.dtau;
      return d;
    };

    auto step_bound = [&](const Direction& d) {
      double alpha = max_step_psd(h.dims, h.X, d.dX, 1.0);
      alpha = std::min(alpha, max_step_psd(h.dims, h.S, d.dS, alpha));
      if (d.dtau < 0.0) alpha = std::min(alpha, -h.tau / d.dtau);
      if (d.dkappa < 0.0) alpha = std::min(alpha, -h.kappa / d.dkappa);
      return alpha;
    };

    // Predictor (affine scaling) direction: rc = -X, rtk = -tau*kappa.
    Blocks rc_aff = h.X;
    for (auto& blkv : rc_aff.m)
      for (auto& x : blkv) x = -x;
    Direction aff = solve_direction(rc_aff, -h.tau * h.kappa);
    const double alpha_aff = step_bound(aff);

    // Mehrotra centering parameter.
    double inner_aff = 0.0;
    for (std::size_t blk = 0; blk < h.dims.size(); ++blk) {
      const auto& x = h.X.m[blk];
      const auto& s = h.S.m[blk];
      const auto& dx = aff.dX.m[blk];
      const auto& ds = aff.dS.m[blk];
      for (std::size_t k = 0; k < x.size(); ++k)
        inner_aff += (x[k] + alpha_aff * dx[k]) * (s[k] + alpha_aff * ds[k]);
    }
    const double mu_aff = (inner_aff + (h.tau + alpha_aff * aff.dtau) *
                                           (h.kappa + alpha_aff * aff.dkappa)) /
                          (h.nu + 1);
    double sigma = mu_aff / mu;
    sigma = std::clamp(sigma * sigma * sigma, 1e-6, 1.0);

    // Combined direction with the second-order corrector.
    Blocks hcorr = scaled_corrector(h, sc, aff);
    Blocks rc = Blocks::zero(h.dims);
    Vec tmp;
    for (std::size_t blk = 0; blk < h.dims.size(); ++blk) {
      const int n = h.dims[blk];
      const auto& lam = sc.lambda[blk];
      Vec rchat(static_cast<std::size_t>(n) * n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double val = -hcorr.m[blk][static_cast<std::size_t>(i) * n + j];
          if (i == j) val += sigma * mu - lam[i] * lam[i];
          rchat[static_cast<std::size_t>(i) * n + j] = 2.0 * val / (lam[i] + lam[j]);
        }
      tmp.resize(static_cast<std::size_t>(n) * n);
      mul(n, sc.r[blk].data(), rchat.data(), tmp.data());
      mul_a_bt(n, tmp.data(), sc.r[blk].data(), rc.m[blk].data());
      symmetrize(n, rc.m[blk].data());
    }
    const double rtk = sigma * mu - h.tau * h.kappa - aff.dtau * aff.dkappa;
    Direction dir = solve_direction(rc, rtk);
    double alpha = 0.99 * step_bound(dir);
    alpha = std::min(alpha, 1.0);
    if (alpha < 1e-9) break;

    for (std::size_t blk = 0; blk < h.dims.size(); ++blk) {
      for (std::size_t k = 0; k < h.X.m[blk].size(); ++k) {
        h.X.m[blk][k] += alpha * dir.dX.m[blk][k];
        h.S.m[blk][k] += alpha * dir.dS.m[blk][k];
      }
      symmetrize(h.dims[blk], h.X.m[blk].data());
      symmetrize(h.dims[blk], h.S.m[blk].data());
    }
    for (int i = 0; i < p; ++i) h.v[i] += alpha * dir.dv[i];
    h.tau += alpha * dir.dtau;
    h.kappa += alpha * dir.dkappa;
  }

  sol.status = status;
  sol.value = best.value;
  sol.dual_value = best.dual_value;
  sol.Z = std::move(best.Z);
  sol.S = std::move(best.S);
  sol.y = std::move(best.y);
  sol.primal_residual = best.primal_residual;
  sol.dual_residual = best.dual_residual;
  sol.gap = best.gap;
  sol.iterations = iterations + 1;
  return sol;
}

}  // namespace xnlg::sdp
