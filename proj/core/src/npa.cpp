#include "xnlg/npa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>

#include "xnlg/errors.hpp"
#include "xnlg/linalg.hpp"

namespace xnlg::npa {

namespace {

constexpr double kCoeffEps = 1e-11;

// Affine expression over free real degrees of freedom, terms sorted by index.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;
};

// Equivalence class of moment-matrix entries: the value phi_{i,j}(w), merged
// with its Hermitian partner phi_{j,i}(w reversed).
struct ClassKey {
  int i = 0;
  int j = 0;
  CanonicalWord w;

  bool operator==(const ClassKey&) const = default;
  bool operator<(const ClassKey& o) const {
    if (i != o.i) return i < o.i;
    if (j != o.j) return j < o.j;
    return w < o.w;
  }
};

std::vector<Letter> concat_letters(const std::vector<Letter>& a, const std::vector<Letter>& b) {
  std::vector<Letter> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

CanonicalWord CanonicalWord::reversed() const {
  if (null_) return *this;
  CanonicalWord out;
  out.alice_.assign(alice_.rbegin(), alice_.rend());
  out.bob_.assign(bob_.rbegin(), bob_.rend());
  return out;
}

std::vector<Letter> CanonicalWord::letters() const {
  return concat_letters(alice_, bob_);
}

bool CanonicalWord::operator<(const CanonicalWord& other) const {
  if (null_ != other.null_) return !null_;
  if (null_) return false;
  if (length() != other.length()) return length() < other.length();
  if (alice_ != other.alice_) return alice_ < other.alice_;
  return bob_ < other.bob_;
}

CanonicalWord canonicalize(const std::vector<Letter>& word) {
  std::vector<Letter> alice;
  std::vector<Letter> bob;
  for (const Letter& l : word) {
    auto& part = l.party == Party::Alice ? alice : bob;
    if (!part.empty() && part.back().question == l.question) {
      if (part.back().answer == l.answer) continue;
      return CanonicalWord::null_word();
    }
    part.push_back(l);
  }
  return CanonicalWord(std::move(alice), std::move(bob));
}

namespace {

// All reduced single-party words of length <= k: adjacent questions differ.
std::vector<std::vector<Letter>> party_words(Party p, int k, int nq, int na) {
  std::vector<std::vector<Letter>> out = {{}};
  std::vector<std::vector<Letter>> frontier = {{}};
  for (int len = 1; len <= k; ++len) {
    std::vector<std::vector<Letter>> next;
    for (const auto& w : frontier) {
      for (int q = 0; q < nq; ++q) {
        if (!w.empty() && w.back().question == q) continue;
        for (int a = 0; a < na; ++a) {
          std::vector<Letter> ext = w;
          ext.push_back(Letter{p, q, a});
          next.push_back(std::move(ext));
        }
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

}  // namespace

std::vector<CanonicalWord> enumerate_words(int k, int nx, int ny, int na, int nb,
                                           std::uint64_t budget) {
  if (k < 0) throw DomainError("word length bound must be nonnegative");
  if (nx < 1 || ny < 1 || na < 1 || nb < 1)
    throw DomainError("alphabet sizes must be positive");
  auto alice = party_words(Party::Alice, k, nx, na);
  auto bob = party_words(Party::Bob, k, ny, nb);
  std::uint64_t count = 0;
  for (const auto& aw : alice)
    for (const auto& bw : bob)
      if (static_cast<int>(aw.size() + bw.size()) <= k && ++count > budget)
        throw BudgetError("word enumeration exceeds the budget of " + std::to_string(budget) +
                          " words");
  std::vector<CanonicalWord> out;
  out.reserve(count);
  for (const auto& aw : alice)
    for (const auto& bw : bob)
      if (static_cast<int>(aw.size() + bw.size()) <= k) out.emplace_back(aw, bw);
  std::sort(out.begin(), out.end());
  return out;
}

int MomentProblem::word_index(const CanonicalWord& w) const {
  auto it = std::lower_bound(words.begin(), words.end(), w);
  if (it == words.end() || !(*it == w)) return -1;
  return static_cast<int>(it - words.begin());
}

namespace {

// Sparse Gaussian elimination over the admissibility system. Pivot
// expressions always reference only dofs that are free at creation time;
// substituting each new pivot into its dependents eagerly keeps every stored
// expression fully resolved.
class Eliminator {
 public:
  explicit Eliminator(std::vector<int> dof_len) : dof_len_(std::move(dof_len)) {}

  void add_equation(const std::vector<std::pair<int, double>>& terms, double rhs) {
    std::map<int, double> acc;
    for (auto [d, cf] : terms) {
      auto it = pivots_.find(d);
      if (it == pivots_.end()) {
        acc[d] += cf;
      } else {
        for (auto [d2, c2] : it->second.terms) acc[d2] += cf * c2;
        rhs -= cf * it->second.constant;
      }
    }
    double max_abs = 0.0;
    for (auto& [d, cf] : acc) max_abs = std::max(max_abs, std::abs(cf));
    if (max_abs <= 1e-9) {
      if (std::abs(rhs) > 1e-8)
        throw Error("inconsistent moment constraints during elimination");
      return;
    }
    int p = -1;
    for (auto& [d, cf] : acc) {
      if (std::abs(cf) < std::max(kCoeffEps, 0.25 * max_abs)) continue;
      if (p < 0 || dof_len_[d] > dof_len_[p] || (dof_len_[d] == dof_len_[p] && d > p)) p = d;
    }
    double cp = acc[p];
    LinExpr ex;
    ex.constant = rhs / cp;
    for (auto& [d, cf] : acc) {
      if (d == p || std::abs(cf) <= kCoeffEps) continue;
      ex.terms.push_back({d, -cf / cp});
    }
    substitute_into_users(p, ex);
    for (auto& [d, cf] : ex.terms) users_[d].insert(p);
    pivots_[p] = std::move(ex);
  }

  bool pivoted(int dof) const { return pivots_.count(dof) != 0; }
  const LinExpr& expression(int dof) const { return pivots_.at(dof); }

 private:
  void substitute_into_users(int p, const LinExpr& ex) {
    auto uit = users_.find(p);
    if (uit == users_.end()) return;
    for (int q : uit->second) {
      LinExpr& eq = pivots_.at(q);
      auto pos = std::find_if(eq.terms.begin(), eq.terms.end(),
                              [&](const auto& t) { return t.first == p; });
      if (pos == eq.terms.end()) continue;  // stale dependency
      double alpha = pos->second;
      eq.terms.erase(pos);
      eq.constant += alpha * ex.constant;
      std::map<int, double> merged(eq.terms.begin(), eq.terms.end());
      for (auto& [d, cf] : ex.terms) {
        merged[d] += alpha * cf;
        users_[d].insert(q);
      }
      eq.terms.clear();
      for (auto& [d, cf] : merged)
        if (std::abs(cf) > kCoeffEps) eq.terms.push_back({d, cf});
    }
    users_.erase(p);
  }

  std::vector<int> dof_len_;
  std::unordered_map<int, LinExpr> pivots_;
  std::unordered_map<int, std::set<int>> users_;
};

}  // namespace

MomentProblem build_moment_problem(const games::ExtendedNonlocalGame& g, int k,
                                   int real_dim_budget) {
  if (k < 1) throw DomainError("relaxation level must be at least 1");
  auto issues = games::validate(g);
  if (!issues.empty())
    throw DomainError("malformed game: " + issues.front().field + ": " + issues.front().message);

  MomentProblem mp;
  mp.k = k;
  mp.m = g.m;
  mp.nx = g.nx;
  mp.ny = g.ny;
  mp.na = g.na;
  mp.nb = g.nb;
  mp.words = enumerate_words(k, g.nx, g.ny, g.na, g.nb);

  bool real_data = true;
  for (const CMatrix& v : g.V) {
    for (int r = 0; r < v.rows() && real_data; ++r)
      for (int c = 0; c < v.cols(); ++c)
        if (v(r, c).imag() != 0.0) {
          real_data = false;
          break;
        }
    if (!real_data) break;
  }
  mp.real_data = real_data;

  const int nw = static_cast<int>(mp.words.size());
  const int dim = g.m * nw;
  const std::int64_t real_dim = static_cast<std::int64_t>(real_data ? dim : 2 * dim);
  if (real_dim > real_dim_budget)
    throw BudgetError("level-" + std::to_string(k) + " moment matrix has real dimension " +
                      std::to_string(real_dim) + ", over the budget of " +
                      std::to_string(real_dim_budget));

  std::vector<std::vector<Letter>> fwd(nw), rev(nw);
  for (int s = 0; s < nw; ++s) {
    fwd[s] = mp.words[s].letters();
    rev[s] = mp.words[s].reversed().letters();
  }

  // Entry scan: discover slots and their Hermitian pairing.
  mp.entry_slot.assign(static_cast<std::size_t>(dim) * dim, -1);
  mp.entry_conj.assign(static_cast<std::size_t>(dim) * dim, 0);
  std::map<ClassKey, int> class_ids;
  std::vector<char> self_paired;
  std::vector<int> slot_len;
  for (int r = 0; r < dim; ++r) {
    const int s = r / g.m, i = r % g.m;
    for (int c = r; c < dim; ++c) {
      const int t = c / g.m, j = c % g.m;
      CanonicalWord w = canonicalize(concat_letters(rev[s], fwd[t]));
      if (w.is_null()) continue;
      ClassKey key{i, j, w};
      ClassKey alt{j, i, w.reversed()};
      const bool flip = alt < key;
      auto [it, inserted] = class_ids.try_emplace(flip ? alt : key, mp.num_slots);
      if (inserted) {
        ++mp.num_slots;
        self_paired.push_back(key == alt);
        slot_len.push_back(w.length());
        mp.slot_rep.push_back(flip ? std::make_pair(c, r) : std::make_pair(r, c));
      }
      const int cid = it->second;
      mp.entry_slot[static_cast<std::size_t>(r) * dim + c] = cid;
      mp.entry_conj[static_cast<std::size_t>(r) * dim + c] = flip ? 1 : 0;
      if (r != c) {
        mp.entry_slot[static_cast<std::size_t>(c) * dim + r] = cid;
        mp.entry_conj[static_cast<std::size_t>(c) * dim + r] = flip ? 0 : 1;
      }
    }
  }

  // Real degrees of freedom per slot; self-paired slots are real, and real
  // pay-off data admits a real optimal moment matrix by conjugation
  // symmetry, so imaginary dofs are dropped entirely in that case.
  std::vector<int> re_dof(mp.num_slots), im_dof(mp.num_slots, -1);
  std::vector<int> dof_len;
  for (int cid = 0; cid < mp.num_slots; ++cid) {
    re_dof[cid] = static_cast<int>(dof_len.size());
    dof_len.push_back(slot_len[cid]);
    if (!real_data && !self_paired[cid]) {
      im_dof[cid] = static_cast<int>(dof_len.size());
      dof_len.push_back(slot_len[cid]);
    }
  }
  const int ndof = static_cast<int>(dof_len.size());

  auto slot_of = [&](int i, int j, const CanonicalWord& w) -> std::pair<int, bool> {
    ClassKey key{i, j, w};
    ClassKey alt{j, i, w.reversed()};
    const bool flip = alt < key;
    auto it = class_ids.find(flip ? alt : key);
    if (it == class_ids.end())
      throw Error("moment slot lookup failed for a word within the level bound");
    return {it->second, flip};
  };

  // Admissibility sums over all canonical word pairs within the level bound,
  // for every inserted question of either party, deduplicated.
  std::set<std::vector<std::tuple<int, bool, double>>> seen_complex;
  std::set<std::pair<std::vector<std::pair<int, double>>, double>> seen_real;
  std::vector<std::pair<std::vector<std::pair<int, double>>, double>> real_eqs;

  auto push_real = [&](std::map<int, double>& acc, double rhs) {
    std::vector<std::pair<int, double>> terms;
    for (auto& [d, cf] : acc)
      if (std::abs(cf) > kCoeffEps) terms.push_back({d, cf});
    if (terms.empty()) return;
    if (terms.front().second < 0.0) {
      for (auto& t : terms) t.second = -t.second;
      rhs = -rhs;
    }
    if (seen_real.insert({terms, rhs}).second) real_eqs.push_back({std::move(terms), rhs});
  };

  auto push_complex = [&](const std::map<std::pair<int, bool>, double>& acc, double constant) {
    std::vector<std::tuple<int, bool, double>> sig;
    for (auto& [key, cf] : acc)
      if (std::abs(cf) > kCoeffEps) sig.push_back({key.first, key.second, cf});
    if (sig.empty()) return;
    if (!seen_complex.insert(sig).second) return;
    MomentProblem::Equation eq;
    eq.constant = constant;
    for (auto& [slot, cj, cf] : sig) eq.terms.push_back({slot, cj, cf});
    mp.equations.push_back(std::move(eq));
    std::map<int, double> re_acc, im_acc;
    for (auto& [slot, cj, cf] : sig) {
      re_acc[re_dof[slot]] += cf;
      if (im_dof[slot] >= 0) im_acc[im_dof[slot]] += cj ? -cf : cf;
    }
    push_real(re_acc, constant);
    push_real(im_acc, 0.0);
  };

  const auto low_words = enumerate_words(2 * k - 1, g.nx, g.ny, g.na, g.nb);
  std::vector<std::pair<Party, int>> questions;
  for (int x = 0; x < g.nx; ++x) questions.push_back({Party::Alice, x});
  for (int y = 0; y < g.ny; ++y) questions.push_back({Party::Bob, y});
  for (const CanonicalWord& u : low_words) {
    for (const CanonicalWord& v : low_words) {
      if (u.length() + v.length() > 2 * k - 1) continue;
      const auto ul = u.letters();
      const auto vl = v.letters();
      const CanonicalWord base = canonicalize(concat_letters(ul, vl));
      for (auto [party, z] : questions) {
        const int answers = party == Party::Alice ? g.na : g.nb;
        std::vector<CanonicalWord> extended;
        extended.reserve(answers);
        for (int cval = 0; cval < answers; ++cval) {
          std::vector<Letter> wl = ul;
          wl.push_back(Letter{party, z, cval});
          wl.insert(wl.end(), vl.begin(), vl.end());
          extended.push_back(canonicalize(wl));
        }
        for (int i = 0; i < g.m; ++i) {
          for (int j = i; j < g.m; ++j) {
            std::map<std::pair<int, bool>, double> acc;
            for (const CanonicalWord& w : extended)
              if (!w.is_null()) acc[slot_of(i, j, w)] += 1.0;
            if (!base.is_null()) acc[slot_of(i, j, base)] -= 1.0;
            push_complex(acc, 0.0);
          }
        }
      }
    }
  }

  // Normalization: the epsilon diagonal block has unit trace.
  {
    std::map<std::pair<int, bool>, double> acc;
    CanonicalWord eps;
    for (int i = 0; i < g.m; ++i) acc[slot_of(i, i, eps)] += 1.0;
    push_complex(acc, 1.0);
  }

  Eliminator elim(dof_len);
  for (auto& [terms, rhs] : real_eqs) elim.add_equation(terms, rhs);

  std::vector<int> engine_idx(ndof, -1);
  int nfree = 0;
  for (int d = 0; d < ndof; ++d)
    if (!elim.pivoted(d)) engine_idx[d] = nfree++;
  mp.free_dofs = nfree;

  auto resolve = [&](int d) -> LinExpr {
    LinExpr out;
    if (d < 0) return out;
    if (!elim.pivoted(d)) {
      out.terms.push_back({engine_idx[d], 1.0});
      return out;
    }
    const LinExpr& ex = elim.expression(d);
    out.constant = ex.constant;
    for (auto& [d2, cf] : ex.terms) out.terms.push_back({engine_idx[d2], cf});
    return out;
  };
  std::vector<LinExpr> slot_re(mp.num_slots), slot_im(mp.num_slots);
  for (int cid = 0; cid < mp.num_slots; ++cid) {
    slot_re[cid] = resolve(re_dof[cid]);
    slot_im[cid] = resolve(im_dof[cid]);
  }

  // LMI assembly: M(z) = F0 + sum_f z_f F_f. The engine receives the dual
  // form, maximize <-F0, Z> subject to <-F_f, Z> = d_f, whose dual optimum
  // b.y equals -(max_z d.z over M(z) >= 0).
  sdp::SdpProblem prob(dim);
  sdp::SparseHerm neg_f0;
  std::vector<sdp::SparseHerm> neg_f(nfree);
  for (int r = 0; r < dim; ++r) {
    for (int c = r; c < dim; ++c) {
      const int cid = mp.entry_slot[static_cast<std::size_t>(r) * dim + c];
      if (cid < 0) continue;
      const double sg = mp.entry_conj[static_cast<std::size_t>(r) * dim + c] ? -1.0 : 1.0;
      const complexd k0(slot_re[cid].constant, sg * slot_im[cid].constant);
      if (k0 != complexd(0.0, 0.0)) neg_f0.add(0, r, c, -k0);
      for (auto& [f, alpha] : slot_re[cid].terms) neg_f[f].add(0, r, c, complexd(-alpha, 0.0));
      for (auto& [f, beta] : slot_im[cid].terms)
        neg_f[f].add(0, r, c, complexd(0.0, -sg * beta));
    }
  }

  // Objective sum_{x,y} pi(x,y) <V(a,b|x,y), M((x,a),(y,b))>, as entry terms
  // and as affine data (d0, d) over the free dofs.
  std::vector<double> d(nfree, 0.0);
  double d0 = 0.0;
  for (int x = 0; x < g.nx; ++x) {
    for (int y = 0; y < g.ny; ++y) {
      const double p = g.prob(x, y);
      if (p == 0.0) continue;
      for (int a = 0; a < g.na; ++a) {
        const int sidx = mp.word_index(canonicalize({Letter{Party::Alice, x, a}}));
        for (int b = 0; b < g.nb; ++b) {
          const CMatrix& v = g.payoff(a, b, x, y);
          if (v.rows() == 0) continue;
          const int tidx = mp.word_index(canonicalize({Letter{Party::Bob, y, b}}));
          for (int i = 0; i < g.m; ++i) {
            for (int j = 0; j < g.m; ++j) {
              const complexd wt = p * std::conj(v(i, j));
              if (wt == complexd(0.0, 0.0)) continue;
              const int row = sidx * g.m + i;
              const int col = tidx * g.m + j;
              mp.objective_terms.push_back({row, col, wt});
              const int cid = mp.entry_slot[static_cast<std::size_t>(row) * dim + col];
              if (cid < 0) continue;
              const double sg =
                  mp.entry_conj[static_cast<std::size_t>(row) * dim + col] ? -1.0 : 1.0;
              d0 += wt.real() * slot_re[cid].constant - wt.imag() * sg * slot_im[cid].constant;
              for (auto& [f, alpha] : slot_re[cid].terms) d[f] += wt.real() * alpha;
              for (auto& [f, beta] : slot_im[cid].terms) d[f] -= wt.imag() * sg * beta;
            }
          }
        }
      }
    }
  }
  mp.objective_constant = d0;

  prob.set_objective(std::move(neg_f0));
  for (int f = 0; f < nfree; ++f) prob.add_constraint(std::move(neg_f[f]), d[f]);
  mp.sdp = std::move(prob);
  return mp;
}

NpaBound npa_upper_bound(const games::ExtendedNonlocalGame& g, int k, double tol, int max_iter,
                         int real_dim_budget) {
  MomentProblem mp = build_moment_problem(g, k, real_dim_budget);
  sdp::SdpSolution sol = sdp::solve(mp.sdp, sdp::SolveOptions{tol, max_iter});
  if (sol.status == sdp::SdpStatus::Infeasible || sol.status == sdp::SdpStatus::Unbounded)
    throw ConvergenceError(std::string("moment relaxation solve reported ") +
                           sdp::to_string(sol.status));

  NpaBound out;
  out.bound = mp.objective_constant - sol.dual_value;
  out.verified = sol.status == sdp::SdpStatus::Optimal;

  // The dual slack block is the optimal moment matrix; read the
  // pseudo-assemblage from its letter-word blocks.
  const CMatrix& moment = sol.S.at(0);
  PseudoAssemblage& pa = out.pseudo;
  pa.m = g.m;
  pa.nx = g.nx;
  pa.ny = g.ny;
  pa.na = g.na;
  pa.nb = g.nb;
  pa.K.assign(static_cast<std::size_t>(g.nx) * g.ny * g.na * g.nb, CMatrix());
  for (int x = 0; x < g.nx; ++x) {
    for (int a = 0; a < g.na; ++a) {
      const int sidx = mp.word_index(canonicalize({Letter{Party::Alice, x, a}}));
      for (int y = 0; y < g.ny; ++y) {
        for (int b = 0; b < g.nb; ++b) {
          const int tidx = mp.word_index(canonicalize({Letter{Party::Bob, y, b}}));
          CMatrix block(g.m, g.m);
          for (int i = 0; i < g.m; ++i)
            for (int j = 0; j < g.m; ++j) block(i, j) = moment(sidx * g.m + i, tidx * g.m + j);
          pa.K[pa.index(a, b, x, y)] = std::move(block);
        }
      }
    }
  }
  out.solution = std::move(sol);
  return out;
}

namespace {

void apply_letter(const strategies::Strategy& s, const Letter& l, const std::vector<complexd>& in,
                  std::vector<complexd>& out) {
  const int dA = s.dA, dB = s.dB;
  out.assign(in.size(), complexd(0.0, 0.0));
  if (l.party == Party::Alice) {
    const CMatrix& op = s.alice[l.question][l.answer];
    for (int r = 0; r < dA; ++r)
      for (int c = 0; c < dA; ++c) {
        const complexd v = op(r, c);
        if (v == complexd(0.0, 0.0)) continue;
        for (int t = 0; t < dB; ++t) out[r * dB + t] += v * in[c * dB + t];
      }
  } else {
    const CMatrix& op = s.bob[l.question][l.answer];
    for (int r = 0; r < dB; ++r)
      for (int c = 0; c < dB; ++c) {
        const complexd v = op(r, c);
        if (v == complexd(0.0, 0.0)) continue;
        for (int t = 0; t < dA; ++t) out[t * dB + r] += v * in[t * dB + c];
      }
  }
}

}  // namespace

StrategyMoments moment_matrix_from_strategy(const strategies::Strategy& s, int k) {
  if (k < 1) throw DomainError("relaxation level must be at least 1");
  const int nx = static_cast<int>(s.alice.size());
  const int ny = static_cast<int>(s.bob.size());
  if (nx == 0 || ny == 0) throw DomainError("strategy has no measurements");
  const int na = static_cast<int>(s.alice.front().size());
  const int nb = static_cast<int>(s.bob.front().size());
  for (const auto& povm : s.alice)
    for (const CMatrix& e : povm) {
      CMatrix sq = e * e;
      sq -= e;
      if (sq.max_abs() > 1e-10)
        throw DomainError("moment matrix extraction requires projective measurements");
    }
  for (const auto& povm : s.bob)
    for (const CMatrix& e : povm) {
      CMatrix sq = e * e;
      sq -= e;
      if (sq.max_abs() > 1e-10)
        throw DomainError("moment matrix extraction requires projective measurements");
    }

  const int n = s.total_dim();
  if (s.rho.rows() != n) throw DimensionError("strategy state has the wrong dimension");
  EigResult eig = herm_eig(HermMatrix(s.rho, 1e-9));
  const double top = eig.values.back();
  const double second = n > 1 ? eig.values[n - 2] : 0.0;
  if (second > 1e-10 * std::max(1.0, top))
    throw DomainError("moment matrix extraction requires a pure state");
  const double scale = std::sqrt(std::max(top, 0.0));
  std::vector<complexd> psi(n);
  for (int r = 0; r < n; ++r) psi[r] = scale * eig.vectors(r, n - 1);

  StrategyMoments out;
  out.words = enumerate_words(k, nx, ny, na, nb);
  const int nw = static_cast<int>(out.words.size());
  const int dim = s.m * nw;
  const int local = s.dA * s.dB;

  // Gram vectors v_{i,s} = Pi_s u_i with u_i the referee components of psi;
  // entries <v_{i,s}, v_{j,t}> realize phi_{i,j}(s^R t) exactly.
  std::vector<std::vector<complexd>> vecs(dim);
  std::vector<complexd> cur, next;
  for (int w = 0; w < nw; ++w) {
    const auto letters = out.words[w].letters();
    for (int i = 0; i < s.m; ++i) {
      cur.assign(psi.begin() + static_cast<std::size_t>(i) * local,
                 psi.begin() + static_cast<std::size_t>(i + 1) * local);
      for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
        apply_letter(s, *it, cur, next);
        cur.swap(next);
      }
      vecs[w * s.m + i] = cur;
    }
  }

  CMatrix mom(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = r; c < dim; ++c) {
      const complexd v = vec_dot(vecs[r], vecs[c]);
      mom(r, c) = v;
      if (c != r) mom(c, r) = std::conj(v);
    }
  }
  out.matrix = std::move(mom);
  return out;
}

MomentAudit audit_moment_matrix(const MomentProblem& mp, const CMatrix& m) {
  const int dim = mp.dim();
  if (m.rows() != dim || m.cols() != dim)
    throw DimensionError("moment matrix dimension does not match the problem");

  MomentAudit audit;
  std::vector<complexd> val(mp.num_slots);
  for (int cid = 0; cid < mp.num_slots; ++cid)
    val[cid] = m(mp.slot_rep[cid].first, mp.slot_rep[cid].second);

  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      audit.hermiticity_residual =
          std::max(audit.hermiticity_residual, std::abs(m(r, c) - std::conj(m(c, r))));
      const int cid = mp.entry_slot[static_cast<std::size_t>(r) * dim + c];
      if (cid < 0) {
        audit.null_residual = std::max(audit.null_residual, std::abs(m(r, c)));
        continue;
      }
      const complexd expected =
          mp.entry_conj[static_cast<std::size_t>(r) * dim + c] ? std::conj(val[cid]) : val[cid];
      audit.entry_residual = std::max(audit.entry_residual, std::abs(m(r, c) - expected));
    }
  }

  for (const auto& eq : mp.equations) {
    complexd sum(-eq.constant, 0.0);
    for (const auto& t : eq.terms) sum += t.coeff * (t.conj ? std::conj(val[t.slot]) : val[t.slot]);
    audit.equation_residual = std::max(audit.equation_residual, std::abs(sum));
  }

  for (const auto& t : mp.objective_terms)
    audit.objective += (t.weight * m(t.row, t.col)).real();
  return audit;
}

}  // namespace xnlg::npa
