#include "xnlg/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xnlg/linalg.hpp"
#include "xnlg/rng.hpp"
#include "xnlg/sdp.hpp"

namespace xnlg::strategies {

namespace {

void check_dims(const games::ExtendedNonlocalGame& g, const Strategy& s) {
  if (s.m != g.m) throw DimensionError("strategy referee dimension does not match the game");
  if (static_cast<int>(s.alice.size()) != g.nx ||
      static_cast<int>(s.bob.size()) != g.ny)
    throw DimensionError("strategy measurement tables do not match the question sets");
  for (const auto& povm : s.alice)
    if (static_cast<int>(povm.size()) != g.na)
      throw DimensionError("Alice POVM has the wrong number of outcomes");
  for (const auto& povm : s.bob)
    if (static_cast<int>(povm.size()) != g.nb)
      throw DimensionError("Bob POVM has the wrong number of outcomes");
  const int n = s.total_dim();
  if (s.rho.rows() != n || s.rho.cols() != n)
    throw DimensionError("strategy state has the wrong dimension");
}

// K(a,b|x,y)_{i,i'} = Tr((A ⊗ B) rho_block(i,i')) where rho_block(i,i') is
// the (i,i') m-block of rho over the A ⊗ B factors.
CMatrix referee_block(const Strategy& s, const CMatrix& ab) {
  const int dAB = s.dA * s.dB;
  CMatrix k(s.m, s.m);
  for (int i = 0; i < s.m; ++i)
    for (int i2 = 0; i2 < s.m; ++i2) {
      complexd sum = 0.0;
      for (int t = 0; t < dAB; ++t)
        for (int u = 0; u < dAB; ++u) sum += ab(u, t) * s.rho(i * dAB + t, i2 * dAB + u);
      k(i, i2) = sum;
    }
  return k;
}

struct SeesawState {
  std::vector<complexd> psi;                // pure state on R ⊗ A ⊗ B
  std::vector<std::vector<CMatrix>> alice;  // [x][a]
  std::vector<std::vector<CMatrix>> bob;    // [y][b]
};

// Pay-off linear form in Alice's POVM for question x:
// F^x_a(s',s) = <psi_s | G_a | psi_{s'}> with G_a = sum_{y,b} pi(x,y)
// V(a,b|x,y) ⊗ B^y_b acting on the (referee, Bob) factors.
std::vector<CMatrix> alice_payoff_operators(const games::ExtendedNonlocalGame& g,
                                            const SeesawState& st, int dA, int dB, int x) {
  const int mdB = g.m * dB;
  std::vector<CMatrix> fs(g.na);
  std::vector<std::vector<complexd>> slices(dA);
  for (int s = 0; s < dA; ++s) {
    slices[s].resize(mdB);
    for (int i = 0; i < g.m; ++i)
      for (int t = 0; t < dB; ++t)
        slices[s][i * dB + t] = st.psi[(static_cast<std::size_t>(i) * dA + s) * dB + t];
  }
  for (int a = 0; a < g.na; ++a) {
    CMatrix gmat = CMatrix::zero(mdB, mdB);
    for (int y = 0; y < g.ny; ++y) {
      const double p = g.prob(x, y);
      if (p == 0.0) continue;
      for (int b = 0; b < g.nb; ++b) {
        const CMatrix& v = g.payoff(a, b, x, y);
        if (v.rows() == 0) continue;
        gmat += complexd(p) * tensor(v, st.bob[y][b]);
      }
    }
    CMatrix f(dA, dA);
    std::vector<std::vector<complexd>> gslices(dA);
    for (int s2 = 0; s2 < dA; ++s2) gslices[s2] = matvec(gmat, slices[s2]);
    for (int s2 = 0; s2 < dA; ++s2)
      for (int s = 0; s < dA; ++s) f(s2, s) = vec_dot(slices[s], gslices[s2]);
    fs[a] = std::move(f);
  }
  return fs;
}

std::vector<CMatrix> bob_payoff_operators(const games::ExtendedNonlocalGame& g,
                                          const SeesawState& st, int dA, int dB, int y) {
  const int mdA = g.m * dA;
  std::vector<CMatrix> fs(g.nb);
  std::vector<std::vector<complexd>> slices(dB);
  for (int t = 0; t < dB; ++t) {
    slices[t].resize(mdA);
    for (int i = 0; i < g.m; ++i)
      for (int s = 0; s < dA; ++s)
        slices[t][i * dA + s] = st.psi[(static_cast<std::size_t>(i) * dA + s) * dB + t];
  }
  for (int b = 0; b < g.nb; ++b) {
    CMatrix gmat = CMatrix::zero(mdA, mdA);
    for (int x = 0; x < g.nx; ++x) {
      const double p = g.prob(x, y);
      if (p == 0.0) continue;
      for (int a = 0; a < g.na; ++a) {
        const CMatrix& v = g.payoff(a, b, x, y);
        if (v.rows() == 0) continue;
        gmat += complexd(p) * tensor(v, st.alice[x][a]);
      }
    }
    CMatrix f(dB, dB);
    std::vector<std::vector<complexd>> gslices(dB);
    for (int t2 = 0; t2 < dB; ++t2) gslices[t2] = matvec(gmat, slices[t2]);
    for (int t2 = 0; t2 < dB; ++t2)
      for (int t = 0; t < dB; ++t) f(t2, t) = vec_dot(slices[t], gslices[t2]);
    fs[b] = std::move(f);
  }
  return fs;
}

double payoff_of(const games::ExtendedNonlocalGame& g, const SeesawState& st, int dA,
                 int dB) {
  double total = 0.0;
  for (int x = 0; x < g.nx; ++x) {
    auto fs = alice_payoff_operators(g, st, dA, dB, x);
    for (int a = 0; a < g.na; ++a) {
      const CMatrix& f = fs[a];
      if (f.rows() == 0) continue;
      total += (st.alice[x][a] * f).trace().real();
    }
  }
  return total;
}

// Maximize sum_a <F_a, P_a> over POVMs {P_a}: block-diagonal SDP with one
// block per outcome and entrywise completeness rows.
bool povm_update(const std::vector<CMatrix>& fs, int d, std::vector<CMatrix>& povm,
                 std::string* diag) {
  const int outcomes = static_cast<int>(fs.size());
  sdp::SdpProblem prob(std::vector<int>(outcomes, d));
  sdp::SparseHerm obj;
  for (int a = 0; a < outcomes; ++a) {
    // Symmetrized numerically before assembly.
    const CMatrix& f = fs[a];
    for (int r = 0; r < d; ++r) {
      obj.add(a, r, r, complexd(f(r, r).real()));
      for (int c = r + 1; c < d; ++c) {
        const complexd v = 0.5 * (f(r, c) + std::conj(f(c, r)));
        if (v != complexd(0.0)) obj.add(a, r, c, v);
      }
    }
  }
  prob.set_objective(std::move(obj));
  for (int r = 0; r < d; ++r)
    for (int c = r; c < d; ++c) {
      sdp::SparseHerm row;
      for (int a = 0; a < outcomes; ++a) row.add(a, r, c, 1.0);
      prob.add_constraint(std::move(row), r == c ? 1.0 : 0.0);
      if (r != c) {
        sdp::SparseHerm imrow;
        for (int a = 0; a < outcomes; ++a) imrow.add(a, r, c, complexd(0.0, 1.0));
        prob.add_constraint(std::move(imrow), 0.0);
      }
    }
  sdp::SdpSolution sol = sdp::solve(prob, sdp::SolveOptions{1e-8, 100});
  if (sol.status != sdp::SdpStatus::Optimal) {
    if (diag) *diag = std::string("POVM update SDP returned ") + to_string(sol.status);
    return false;
  }
  for (int a = 0; a < outcomes; ++a) povm[a] = std::move(sol.Z[a]);
  return true;
}

std::vector<CMatrix> random_projective_povm(SplitMix64& rng, int d, int outcomes) {
  // Orthonormal columns of a Gaussian matrix, outcomes assigned by column
  // index round-robin. Outcomes beyond the dimension get the zero operator.
  CMatrix gauss(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) gauss(r, c) = rng.complex_normal();
  std::vector<std::vector<complexd>> cols(d, std::vector<complexd>(d));
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) cols[j][i] = gauss(i, j);
    for (int prev = 0; prev < j; ++prev) {
      const complexd proj = vec_dot(cols[prev], cols[j]);
      for (int i = 0; i < d; ++i) cols[j][i] -= proj * cols[prev][i];
    }
    const double nrm = vec_norm(cols[j]);
    for (int i = 0; i < d; ++i) cols[j][i] /= nrm;
  }
  std::vector<CMatrix> povm(outcomes, CMatrix::zero(d, d));
  for (int j = 0; j < d; ++j) {
    CMatrix& p = povm[j % outcomes];
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) p(r, c) += cols[j][r] * std::conj(cols[j][c]);
  }
  return povm;
}

}  // namespace

Assemblage assemblage(const Strategy& s) {
  Assemblage out;
  out.m = s.m;
  out.nx = static_cast<int>(s.alice.size());
  out.ny = static_cast<int>(s.bob.size());
  out.na = out.nx > 0 ? static_cast<int>(s.alice[0].size()) : 0;
  out.nb = out.ny > 0 ? static_cast<int>(s.bob[0].size()) : 0;
  out.K.resize(static_cast<std::size_t>(out.nx) * out.ny * out.na * out.nb);
  for (int x = 0; x < out.nx; ++x)
    for (int y = 0; y < out.ny; ++y)
      for (int a = 0; a < out.na; ++a)
        for (int b = 0; b < out.nb; ++b) {
          CMatrix ab = tensor(s.alice[x][a], s.bob[y][b]);
          out.K[out.index(a, b, x, y)] = referee_block(s, ab);
        }
  return out;
}

double expected_payoff(const games::ExtendedNonlocalGame& g, const Strategy& s) {
  check_dims(g, s);
  const int dAB = s.dA * s.dB;
  double total = 0.0;
  for (int x = 0; x < g.nx; ++x)
    for (int y = 0; y < g.ny; ++y) {
      const double p = g.prob(x, y);
      if (p == 0.0) continue;
      for (int a = 0; a < g.na; ++a)
        for (int b = 0; b < g.nb; ++b) {
          const CMatrix& v = g.payoff(a, b, x, y);
          if (v.rows() == 0) continue;
          CMatrix ab = tensor(s.alice[x][a], s.bob[y][b]);
          // <V, K> with K the referee block; fold the two contractions.
          complexd sum = 0.0;
          for (int i = 0; i < g.m; ++i)
            for (int i2 = 0; i2 < g.m; ++i2) {
              complexd block = 0.0;
              for (int t = 0; t < dAB; ++t)
                for (int u = 0; u < dAB; ++u)
                  block += ab(u, t) * s.rho(i * dAB + t, i2 * dAB + u);
              sum += std::conj(v(i, i2)) * block;
            }
          total += p * sum.real();
        }
    }
  return total;
}

double expected_payoff_direct(const games::ExtendedNonlocalGame& g, const Strategy& s) {
  check_dims(g, s);
  double total = 0.0;
  for (int x = 0; x < g.nx; ++x)
    for (int y = 0; y < g.ny; ++y) {
      const double p = g.prob(x, y);
      if (p == 0.0) continue;
      for (int a = 0; a < g.na; ++a)
        for (int b = 0; b < g.nb; ++b) {
          const CMatrix& v = g.payoff(a, b, x, y);
          if (v.rows() == 0) continue;
          CMatrix op = tensor(tensor(v, s.alice[x][a]), s.bob[y][b]);
          total += p * hs_inner(op, s.rho).real();
        }
    }
  return total;
}

Strategy embed_deterministic(const games::ExtendedNonlocalGame& g,
                             const games::DeterministicStrategy& d) {
  if (static_cast<int>(d.f.size()) != g.nx || static_cast<int>(d.g.size()) != g.ny)
    throw DimensionError("witness answer functions do not match the question sets");
  if (static_cast<int>(d.referee_state.size()) != g.m)
    throw DimensionError("witness referee state has the wrong dimension");
  Strategy s;
  s.m = g.m;
  s.dA = 1;
  s.dB = 1;
  s.rho = CMatrix(g.m, g.m);
  for (int i = 0; i < g.m; ++i)
    for (int j = 0; j < g.m; ++j)
      s.rho(i, j) = d.referee_state[i] * std::conj(d.referee_state[j]);
  s.alice.resize(g.nx);
  for (int x = 0; x < g.nx; ++x) {
    s.alice[x].assign(g.na, CMatrix::zero(1, 1));
    s.alice[x][d.f[x]](0, 0) = 1.0;
  }
  s.bob.resize(g.ny);
  for (int y = 0; y < g.ny; ++y) {
    s.bob[y].assign(g.nb, CMatrix::zero(1, 1));
    s.bob[y][d.g[y]](0, 0) = 1.0;
  }
  return s;
}

SeesawResult seesaw(const games::ExtendedNonlocalGame& g, int dA, int dB, int restarts,
                    int iters, std::uint64_t seed, double tol) {
  if (dA < 1 || dB < 1) throw DimensionError("local dimensions must be at least 1");
  if (restarts < 1) throw DomainError("at least one restart is required");

  const int n = g.m * dA * dB;
  SeesawResult result;
  result.lower_bound = -std::numeric_limits<double>::infinity();

  // Witness-based deterministic initialization for restart 0; random
  // projective initialization when enumeration is out of budget.
  bool have_witness = false;
  games::DeterministicStrategy witness;
  try {
    witness = games::unentangled_value(g).witness;
    have_witness = true;
  } catch (const BudgetError&) {
  }

  for (int restart = 0; restart < restarts; ++restart) {
    SeesawState st;
    st.alice.resize(g.nx);
    st.bob.resize(g.ny);
    st.psi.assign(n, complexd(0.0));

    if (restart == 0 && have_witness) {
      for (int x = 0; x < g.nx; ++x) {
        st.alice[x].assign(g.na, CMatrix::zero(dA, dA));
        st.alice[x][witness.f[x]] = CMatrix::identity(dA);
      }
      for (int y = 0; y < g.ny; ++y) {
        st.bob[y].assign(g.nb, CMatrix::zero(dB, dB));
        st.bob[y][witness.g[y]] = CMatrix::identity(dB);
      }
      // psi = witness state ⊗ e_0 ⊗ e_0.
      for (int i = 0; i < g.m; ++i)
        st.psi[static_cast<std::size_t>(i) * dA * dB] = witness.referee_state[i];
    } else {
      SplitMix64 rng(SplitMix64::stream(seed, static_cast<std::uint64_t>(restart)));
      for (int x = 0; x < g.nx; ++x) st.alice[x] = random_projective_povm(rng, dA, g.na);
      for (int y = 0; y < g.ny; ++y) st.bob[y] = random_projective_povm(rng, dB, g.nb);
      std::vector<complexd> raw(n);
      for (auto& v : raw) v = rng.complex_normal();
      const double nrm = vec_norm(raw);
      for (int i = 0; i < n; ++i) st.psi[i] = raw[i] / nrm;
    }

    std::vector<double> trace;
    double current = payoff_of(g, st, dA, dB);
    trace.push_back(current);
    bool aborted = false;

    for (int iter = 0; iter < iters; ++iter) {
      // (i) State update: top eigenvector of the pay-off operator.
      CMatrix t = CMatrix::zero(n, n);
      for (int x = 0; x < g.nx; ++x)
        for (int y = 0; y < g.ny; ++y) {
          const double p = g.prob(x, y);
          if (p == 0.0) continue;
          for (int a = 0; a < g.na; ++a)
            for (int b = 0; b < g.nb; ++b) {
              const CMatrix& v = g.payoff(a, b, x, y);
              if (v.rows() == 0) continue;
              t += complexd(p) * tensor(tensor(v, st.alice[x][a]), st.bob[y][b]);
            }
        }
      MaxEigResult me = max_eig(HermMatrix(t, 1e-9 * std::max(1.0, t.max_abs())));
      st.psi = me.vector;

      // (ii) Alice updates, one SDP per question.
      std::string diag;
      for (int x = 0; x < g.nx && !aborted; ++x) {
        auto fs = alice_payoff_operators(g, st, dA, dB, x);
        if (!povm_update(fs, dA, st.alice[x], &diag)) {
          result.diagnostics.push_back("restart " + std::to_string(restart) +
                                       ", iteration " + std::to_string(iter) +
                                       ", Alice question " + std::to_string(x) + ": " +
                                       diag);
          aborted = true;
        }
      }
      // (iii) Bob updates.
      for (int y = 0; y < g.ny && !aborted; ++y) {
        auto fs = bob_payoff_operators(g, st, dA, dB, y);
        if (!povm_update(fs, dB, st.bob[y], &diag)) {
          result.diagnostics.push_back("restart " + std::to_string(restart) +
                                       ", iteration " + std::to_string(iter) +
                                       ", Bob question " + std::to_string(y) + ": " + diag);
          aborted = true;
        }
      }
      if (aborted) break;

      const double updated = payoff_of(g, st, dA, dB);
      trace.push_back(updated);
      const double improvement = updated - current;
      current = updated;
      if (improvement < tol) break;
    }

    result.traces.push_back(std::move(trace));
    if (aborted) continue;

    if (current > result.lower_bound) {
      result.lower_bound = current;
      result.best_restart = restart;
      result.best.m = g.m;
      result.best.dA = dA;
      result.best.dB = dB;
      result.best.alice = st.alice;
      result.best.bob = st.bob;
      result.best.rho = CMatrix(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          result.best.rho(i, j) = st.psi[i] * std::conj(st.psi[j]);
    }
  }

  if (result.best_restart < 0)
    throw ConvergenceError("all see-saw restarts aborted on POVM update failures");

  // Certify the reported bound by re-evaluating the stored strategy.
  result.lower_bound = expected_payoff(g, result.best);
  return result;
}

}  // namespace xnlg::strategies
