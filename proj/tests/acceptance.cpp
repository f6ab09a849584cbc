// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria with runtime budgets also time themselves.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "xnlg/games.hpp"
#include "xnlg/linalg.hpp"
#include "xnlg/matrix.hpp"
#include "xnlg/npa.hpp"
#include "xnlg/rng.hpp"
#include "xnlg/sdp.hpp"
#include "xnlg/strategies.hpp"

using namespace xnlg;
using npa::canonicalize;
using npa::CanonicalWord;
using npa::Letter;
using npa::Party;

namespace {

int failures = 0;

double now_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(int id, const char* name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name,
              detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

Letter alice_letter(int q, int a) { return Letter{Party::Alice, q, a}; }
Letter bob_letter(int q, int a) { return Letter{Party::Bob, q, a}; }

games::MonogamyGame random_two_question_game(SplitMix64& rng, int m, int na) {
  games::MonogamyGame g(m, 2, na);
  g.pi = {0.5, 0.5};
  for (int x = 0; x < 2; ++x) {
    std::vector<CMatrix> povm = test::random_projective_povm(rng, m, na);
    for (int a = 0; a < na; ++a) g.set_effect(a, x, povm[a]);
  }
  return g;
}

games::ExtendedNonlocalGame random_extended_game(SplitMix64& rng, int m) {
  games::ExtendedNonlocalGame g(m, 2, 2, 2, 2);
  for (double& p : g.pi) p = 0.25;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          CMatrix v = test::random_psd(rng, m).matrix();
          double top = 0.0;
          for (int r = 0; r < m; ++r) top = std::max(top, v(r, r).real());
          g.set_payoff(a, b, x, y, (1.0 / std::max(top, 1.0)) * v);
        }
  return g;
}

strategies::Strategy random_projective_strategy(SplitMix64& rng, int m, int dA, int dB) {
  strategies::Strategy s;
  s.m = m;
  s.dA = dA;
  s.dB = dB;
  const int n = s.total_dim();
  std::vector<complexd> psi(n);
  for (auto& z : psi) z = rng.complex_normal();
  double nrm = vec_norm(psi);
  CMatrix rho(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) rho(r, c) = psi[r] * std::conj(psi[c]) / (nrm * nrm);
  s.rho = rho;
  s.alice.assign(2, {});
  s.bob.assign(2, {});
  for (int q = 0; q < 2; ++q) {
    s.alice[q] = test::random_projective_povm(rng, dA, 2);
    s.bob[q] = test::random_projective_povm(rng, dB, 2);
  }
  return s;
}

void criterion_1() {
  auto start = std::chrono::steady_clock::now();
  double value = games::unentangled_value(games::monogamy_to_extended(games::bb84_game())).value;
  double secs = now_seconds(start);
  bool pass = std::abs(value - 0.8535533906) <= 1e-9 && secs < 1.0;
  report(1, "bb84 unentangled value", pass, fmt("value=%.12f, %.3fs", value, secs));
}

void criterion_2() {
  auto start = std::chrono::steady_clock::now();
  double value = games::unentangled_value(games::monogamy_to_extended(games::mub_game())).value;
  double secs = now_seconds(start);
  bool pass = std::abs(value - 0.6545084972) <= 1e-9 && secs < 5.0;
  report(2, "mub43 unentangled value", pass, fmt("value=%.12f, %.3fs", value, secs));
}

void criterion_3() {
  auto start = std::chrono::steady_clock::now();
  npa::NpaBound res = npa::npa_upper_bound(games::monogamy_to_extended(games::mub_game()), 1);
  double secs = now_seconds(start);
  bool pass = res.bound >= 0.666667 - 1e-4 && res.bound <= 0.666667 + 1e-4 &&
              res.verified && secs < 120.0;
  report(3, "mub43 level-1 moment bound", pass,
         fmt("bound=%.9f, verified=%d, %.1fs", res.bound, res.verified ? 1 : 0, secs));
}

void criterion_4() {
  auto start = std::chrono::steady_clock::now();
  games::ExtendedNonlocalGame g = games::monogamy_to_extended(games::mub_game());
  double best = 0.0;
  int best_dim = 0;
  int restarts_used = 0;
  const std::vector<std::pair<int, int>> plan = {{3, 40}, {6, 30}, {9, 30}};
  for (const auto& [dim, restarts] : plan) {
    if (best >= 0.6609) break;
    if (now_seconds(start) > 25.0 * 60.0) break;
    strategies::SeesawResult res = strategies::seesaw(g, dim, dim, restarts, 100, 0, 1e-7);
    restarts_used += restarts;
    if (res.lower_bound > best) {
      best = res.lower_bound;
      best_dim = dim;
    }
  }
  double secs = now_seconds(start);
  bool pass = best >= 0.6575 && secs <= 30.0 * 60.0;
  report(4, "mub43 see-saw lower bound", pass,
         fmt("best=%.9f at dim %d, target %s, restarts=%d, %.1fs", best, best_dim,
             best >= 0.6609 ? "met" : "missed", restarts_used, secs));
}

void criterion_5() {
  SplitMix64 rng(501);
  const std::vector<std::pair<int, int>> shapes = {{2, 2}, {3, 2}, {3, 3}, {4, 2}, {4, 3}};
  double worst_gap = 0.0;
  double worst_seesaw = -1.0;
  bool pass = true;
  for (int trial = 0; trial < 20; ++trial) {
    auto [m, na] = shapes[trial % shapes.size()];
    games::MonogamyGame mg = random_two_question_game(rng, m, na);
    games::ExtendedNonlocalGame ext = games::monogamy_to_extended(mg);
    double tq = games::two_question_value(mg);
    double unent = games::unentangled_value(ext).value;
    worst_gap = std::max(worst_gap, std::abs(tq - unent));
    if (std::abs(tq - unent) > 1e-8) pass = false;
    strategies::SeesawResult ss = strategies::seesaw(ext, 4, 4, 10, 60, 501 + trial, 1e-7);
    double excess = ss.lower_bound - tq;
    worst_seesaw = std::max(worst_seesaw, excess);
    if (excess > 1e-5) pass = false;
  }
  report(5, "two-question games: exact value and see-saw ceiling", pass,
         fmt("max |tq-unent|=%.2e, max seesaw excess=%.2e over 20 games", worst_gap,
             worst_seesaw));
}

void criterion_6() {
  SplitMix64 rng(601);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    int n = 2 + static_cast<int>(rng.next() % 5);
    int r0 = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(n));
    int r1 = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(n));
    CMatrix p0 = test::random_projector(rng, n, r0).matrix();
    CMatrix p1 = test::random_projector(rng, n, r1).matrix();
    double lhs = op_norm(p0 + p1);
    double rhs = 1.0 + op_norm(p0 * p1);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  report(6, "projector-sum norm identity", worst <= 1e-9,
         fmt("max residual=%.2e over 100 pairs", worst));
}

void criterion_7() {
  games::MonogamyGame squared = games::parallel_repetition(games::bb84_game(), 2);
  double unent = games::unentangled_value(games::monogamy_to_extended(squared)).value;
  double closed = games::tfkw_bound(games::bb84_game(), 2);
  bool pass = std::abs(unent - 0.7285533906) <= 1e-8 && std::abs(unent - closed) <= 1e-8;
  report(7, "bb84 strong parallel repetition at n=2", pass,
         fmt("unentangled=%.12f, tfkw=%.12f", unent, closed));
}

void criterion_8() {
  games::ExtendedNonlocalGame bb84 = games::monogamy_to_extended(games::bb84_game());
  SplitMix64 rng(801);
  games::ExtendedNonlocalGame random_game = random_extended_game(rng, 2);

  double k1 = npa::npa_upper_bound(bb84, 1).bound;
  double k2 = npa::npa_upper_bound(bb84, 2).bound;
  double rk1 = npa::npa_upper_bound(random_game, 1).bound;
  double rk2 = npa::npa_upper_bound(random_game, 2).bound;
  double ss = strategies::seesaw(bb84, 2, 2, 5, 60, 0, 1e-7).lower_bound;
  double rss = strategies::seesaw(random_game, 2, 2, 5, 60, 0, 1e-7).lower_bound;

  bool monotone = k2 <= k1 + 1e-6 && rk2 <= rk1 + 1e-6;
  bool sandwich = k1 >= ss - 1e-6 && k2 >= ss - 1e-6 && rk1 >= rss - 1e-6 && rk2 >= rss - 1e-6;

  double worst_residual = 0.0;
  bool feasible = true;
  for (int k = 1; k <= 2; ++k) {
    npa::MomentProblem mp = npa::build_moment_problem(random_game, k);
    for (int trial = 0; trial < 10; ++trial) {
      strategies::Strategy s = random_projective_strategy(rng, 2, 2 + trial % 2, 2);
      npa::StrategyMoments sm = npa::moment_matrix_from_strategy(s, k);
      npa::MomentAudit audit = npa::audit_moment_matrix(mp, sm.matrix);
      double residual = std::max({audit.entry_residual, audit.null_residual,
                                  audit.equation_residual, audit.hermiticity_residual});
      worst_residual = std::max(worst_residual, residual);
      if (residual > 1e-9) feasible = false;
    }
  }
  bool pass = monotone && sandwich && feasible;
  report(8, "hierarchy monotonicity, sandwich, and strategy feasibility", pass,
         fmt("bb84 k1=%.9f k2=%.9f seesaw=%.9f; max strategy residual=%.2e", k1, k2, ss,
             worst_residual));
}

void criterion_9() {
  std::vector<Letter> alphabet;
  for (int q = 0; q < 2; ++q)
    for (int a = 0; a < 2; ++a) {
      alphabet.push_back(alice_letter(q, a));
      alphabet.push_back(bob_letter(q, a));
    }

  std::vector<std::vector<Letter>> words = {{}};
  std::size_t start = 0;
  for (int len = 1; len <= 4; ++len) {
    const std::size_t end = words.size();
    for (std::size_t i = start; i < end; ++i)
      for (const Letter& l : alphabet) {
        auto w = words[i];
        w.push_back(l);
        words.push_back(std::move(w));
      }
    start = end;
  }

  std::map<std::vector<Letter>, int> index;
  for (std::size_t i = 0; i < words.size(); ++i) index[words[i]] = static_cast<int>(i);

  std::vector<int> parent(words.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i];
    for (std::size_t p = 0; p + 1 < w.size(); ++p) {
      if (w[p].party != w[p + 1].party) {
        auto swapped = w;
        std::swap(swapped[p], swapped[p + 1]);
        unite(static_cast<int>(i), index.at(swapped));
      }
      if (w[p] == w[p + 1]) {
        auto shrunk = w;
        shrunk.erase(shrunk.begin() + static_cast<std::ptrdiff_t>(p));
        unite(static_cast<int>(i), index.at(shrunk));
      }
    }
  }

  struct Component {
    std::set<CanonicalWord> forms;
    bool conflict = false;
  };
  std::map<int, Component> comps;
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto& comp = comps[find(static_cast<int>(i))];
    comp.forms.insert(canonicalize(words[i]));
    const auto& w = words[i];
    for (std::size_t p = 0; p + 1 < w.size(); ++p)
      if (w[p].party == w[p + 1].party && w[p].question == w[p + 1].question &&
          w[p].answer != w[p + 1].answer)
        comp.conflict = true;
  }

  bool fibers_match = words.size() == 4681;
  std::set<CanonicalWord> seen_forms;
  int nonnull = 0;
  for (const auto& [root, comp] : comps) {
    if (comp.forms.size() != 1) fibers_match = false;
    const CanonicalWord& form = *comp.forms.begin();
    if (form.is_null() != comp.conflict) fibers_match = false;
    if (!form.is_null()) {
      if (!seen_forms.insert(form).second) fibers_match = false;
      ++nonnull;
    }
  }
  std::size_t count1 = npa::enumerate_words(1, 2, 2, 2, 2).size();
  std::size_t count2 = npa::enumerate_words(2, 2, 2, 2, 2).size();
  std::size_t closure4 = npa::enumerate_words(4, 2, 2, 2, 2).size();
  bool pass = fibers_match && count1 == 9 && count2 == 41 &&
              static_cast<std::size_t>(nonnull) == closure4;
  report(9, "rewrite closure matches canonicalize fibers", pass,
         fmt("components=%zu, non-null=%d, |W_1|=%zu, |W_2|=%zu", comps.size(), nonnull,
             count1, count2));
}

void criterion_10() {
  SplitMix64 rng(1001);
  double worst = 0.0;
  bool pass = true;
  for (int trial = 0; trial < 50; ++trial) {
    int n = 2 + static_cast<int>(rng.next() % 7);
    HermMatrix c = test::random_hermitian(rng, n);
    sdp::SdpProblem p(n);
    p.set_objective(c);
    HermMatrix eye(CMatrix::identity(n), 1e-12);
    p.add_constraint(eye, 1.0);
    sdp::SdpSolution sol = sdp::solve(p);
    if (sol.status != sdp::SdpStatus::Optimal) pass = false;
    EigResult eig = herm_eig(c);
    double lmax = *std::max_element(eig.values.begin(), eig.values.end());
    worst = std::max(worst, std::abs(sol.value - lmax));
    if (std::abs(sol.value - lmax) > 1e-6) pass = false;
  }

  sdp::SdpProblem bad(2);
  HermMatrix eye2(CMatrix::identity(2), 1e-12);
  bad.set_objective(eye2);
  bad.add_constraint(eye2, 1.0);
  bad.add_constraint(eye2, 2.0);
  sdp::SdpSolution sol = sdp::solve(bad);
  if (sol.status != sdp::SdpStatus::Infeasible) pass = false;
  report(10, "sdp engine against the eigensolver", pass,
         fmt("max |sdp - lambda_max|=%.2e over 50 programs, infeasible=%s", worst,
             sdp::to_string(sol.status)));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (failures == 0) {
    std::printf("all 10 acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria failed\n", failures);
  return 1;
}
