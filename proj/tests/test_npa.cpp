#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "xnlg/npa.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "xnlg/errors.hpp"
#include "xnlg/games.hpp"
#include "xnlg/linalg.hpp"
#include "xnlg/rng.hpp"
#include "xnlg/sdp.hpp"
#include "xnlg/strategies.hpp"

using namespace xnlg;
using npa::canonicalize;
using npa::CanonicalWord;
using npa::Letter;
using npa::Party;

namespace {

Letter alice_letter(int q, int a) { return Letter{Party::Alice, q, a}; }
Letter bob_letter(int q, int a) { return Letter{Party::Bob, q, a}; }

// CHSH as an m = 1 game: win when a xor b = x and y.
games::ExtendedNonlocalGame chsh_game() {
  games::ExtendedNonlocalGame g(1, 2, 2, 2, 2);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      g.prob(x, y) = 0.25;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          if ((a ^ b) == (x & y)) g.set_payoff(a, b, x, y, CMatrix{{1.0}});
    }
  return g;
}

games::ExtendedNonlocalGame random_game(SplitMix64& rng, int m, bool complex_payoffs) {
  games::ExtendedNonlocalGame g(m, 2, 2, 2, 2);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) g.prob(x, y) = 0.25;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          CMatrix v = test::random_psd(rng, m).matrix();
          double scale = 0.0;
          for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(v(i, i)));
          v *= complexd(1.0 / std::max(scale, 1e-6), 0.0);
          if (!complex_payoffs) {
            for (int i = 0; i < m; ++i)
              for (int j = 0; j < m; ++j) v(i, j) = complexd(v(i, j).real(), 0.0);
          }
          g.set_payoff(a, b, x, y, std::move(v));
        }
  return g;
}

std::vector<Letter> random_word(SplitMix64& rng, int len) {
  std::vector<Letter> w;
  for (int i = 0; i < len; ++i) {
    const bool alice = rng.next() % 2 == 0;
    const int q = static_cast<int>(rng.next() % 2);
    const int a = static_cast<int>(rng.next() % 2);
    w.push_back(alice ? alice_letter(q, a) : bob_letter(q, a));
  }
  return w;
}

strategies::Strategy random_projective_strategy(SplitMix64& rng,
                                                const games::ExtendedNonlocalGame& g, int dA,
                                                int dB) {
  strategies::Strategy s;
  s.m = g.m;
  s.dA = dA;
  s.dB = dB;
  const int n = s.total_dim();
  std::vector<complexd> psi(n);
  double norm = 0.0;
  for (auto& c : psi) {
    c = rng.complex_normal();
    norm += std::norm(c);
  }
  norm = std::sqrt(norm);
  s.rho = CMatrix(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) s.rho(r, c) = psi[r] * std::conj(psi[c]) / (norm * norm);
  for (int x = 0; x < g.nx; ++x) s.alice.push_back(test::random_projective_povm(rng, dA, g.na));
  for (int y = 0; y < g.ny; ++y) s.bob.push_back(test::random_projective_povm(rng, dB, g.nb));
  return s;
}

}  // namespace

TEST_CASE("canonicalize reduces words to party normal forms") {
  CHECK(canonicalize({}).length() == 0);
  CHECK_FALSE(canonicalize({}).is_null());

  auto w = canonicalize({alice_letter(0, 1)});
  CHECK(w.alice_part().size() == 1);
  CHECK(w.bob_part().empty());

  // Adjacent equal letters collapse, across party interleaving.
  auto collapsed = canonicalize(
      {alice_letter(0, 1), bob_letter(1, 0), alice_letter(0, 1), bob_letter(1, 0)});
  CHECK(collapsed.alice_part().size() == 1);
  CHECK(collapsed.bob_part().size() == 1);

  // Same question, different answers annihilate.
  CHECK(canonicalize({alice_letter(0, 0), alice_letter(0, 1)}).is_null());
  CHECK(canonicalize({alice_letter(0, 0), bob_letter(0, 0), alice_letter(0, 1)}).is_null());
  CHECK_FALSE(canonicalize({alice_letter(0, 0), bob_letter(0, 0), bob_letter(0, 0)}).is_null());

  // Interleavings with the same party subsequences agree.
  auto a = canonicalize({alice_letter(0, 0), bob_letter(1, 1), alice_letter(1, 0)});
  auto b = canonicalize({bob_letter(1, 1), alice_letter(0, 0), alice_letter(1, 0)});
  CHECK(a == b);

  auto rev = a.reversed();
  CHECK(rev.alice_part().front() == alice_letter(1, 0));
  CHECK(rev.reversed() == a);
}

TEST_CASE("single rewrite steps preserve the canonical form") {
  SplitMix64 rng(2026);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int len = 1 + static_cast<int>(rng.next() % 5);
    auto w = random_word(rng, len);
    const auto canon = canonicalize(w);

    std::vector<std::vector<Letter>> rewrites;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (w[i].party != w[i + 1].party) {
        auto swapped = w;
        std::swap(swapped[i], swapped[i + 1]);
        rewrites.push_back(std::move(swapped));
      }
      if (w[i] == w[i + 1]) {
        auto shrunk = w;
        shrunk.erase(shrunk.begin() + static_cast<std::ptrdiff_t>(i));
        rewrites.push_back(std::move(shrunk));
      }
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      auto grown = w;
      grown.insert(grown.begin() + static_cast<std::ptrdiff_t>(i), w[i]);
      rewrites.push_back(std::move(grown));
    }
    for (const auto& rw : rewrites) {
      CHECK(canonicalize(rw) == canon);
      ++checked;
    }
  }
  CHECK(checked > 2000);
}

TEST_CASE("canonicalize is idempotent and commutes with reversal") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    auto w = random_word(rng, static_cast<int>(rng.next() % 6));
    const auto canon = canonicalize(w);
    if (canon.is_null()) {
      auto rev = w;
      std::reverse(rev.begin(), rev.end());
      CHECK(canonicalize(rev).is_null());
      continue;
    }
    CHECK(canonicalize(canon.letters()) == canon);
    auto rev = w;
    std::reverse(rev.begin(), rev.end());
    CHECK(canonicalize(rev) == canon.reversed());
  }
}

TEST_CASE("rewrite closure partitions short words exactly as canonicalize") {
  // All words of length <= 4 over the 2x2x2x2 alphabet, connected by single
  // swap and collapse moves; components must match canonicalize fibers.
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
  REQUIRE(words.size() == 4681);

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

  std::set<CanonicalWord> seen_forms;
  int nonnull_components = 0;
  for (const auto& [root, comp] : comps) {
    REQUIRE(comp.forms.size() == 1);
    const CanonicalWord& form = *comp.forms.begin();
    CHECK(form.is_null() == comp.conflict);
    if (!form.is_null()) {
      CHECK(seen_forms.insert(form).second);
      ++nonnull_components;
    }
  }
  CHECK(nonnull_components == static_cast<int>(npa::enumerate_words(4, 2, 2, 2, 2).size()));
}

TEST_CASE("enumerate_words counts and ordering") {
  auto w1 = npa::enumerate_words(1, 2, 2, 2, 2);
  CHECK(w1.size() == 9);
  auto w2 = npa::enumerate_words(2, 2, 2, 2, 2);
  CHECK(w2.size() == 41);
  auto mub1 = npa::enumerate_words(1, 4, 4, 3, 3);
  CHECK(mub1.size() == 25);

  CHECK(std::is_sorted(w2.begin(), w2.end()));
  CHECK(std::adjacent_find(w2.begin(), w2.end()) == w2.end());
  CHECK(w2.front().length() == 0);
  for (const auto& w : w2) {
    CHECK(w.length() <= 2);
    CHECK_FALSE(w.is_null());
  }
  CHECK_THROWS_AS(npa::enumerate_words(3, 4, 4, 4, 4, 100), BudgetError);
}

TEST_CASE("moment problem structure for the builtin games") {
  auto bb84 = games::monogamy_to_extended(games::bb84_game());
  auto mp = npa::build_moment_problem(bb84, 1);
  CHECK(mp.dim() == 18);
  CHECK(mp.real_data);
  CHECK(mp.sdp.block_dims() == std::vector<int>{18});
  CHECK(mp.sdp.num_constraints() == mp.free_dofs);
  CHECK(mp.free_dofs > 0);
  CHECK(mp.num_slots > 0);
  int nulls = 0;
  for (int e : mp.entry_slot) nulls += e < 0 ? 1 : 0;
  CHECK(nulls > 0);

  auto mub = games::monogamy_to_extended(games::mub_game());
  auto mpm = npa::build_moment_problem(mub, 1);
  CHECK(mpm.dim() == 75);
  CHECK_FALSE(mpm.real_data);

  CHECK_THROWS_AS(npa::build_moment_problem(mub, 2), BudgetError);
}

TEST_CASE("level-1 bound reproduces the Tsirelson value for CHSH") {
  auto res = npa::npa_upper_bound(chsh_game(), 1);
  CHECK(res.verified);
  CHECK(res.bound == doctest::Approx(0.5 + 0.25 * std::sqrt(2.0)).epsilon(1e-4));
  CHECK(res.bound >= 0.5 + 0.25 * std::sqrt(2.0) - 1e-6);
}

TEST_CASE("bb84 level-1 bound and solution audit") {
  auto bb84 = games::monogamy_to_extended(games::bb84_game());
  auto mp = npa::build_moment_problem(bb84, 1);
  auto res = npa::npa_upper_bound(bb84, 1);
  const double omega = std::cos(M_PI / 8) * std::cos(M_PI / 8);
  CHECK(res.verified);
  CHECK(res.bound >= omega - 1e-6);
  CHECK(res.bound <= 1.0 + 1e-9);

  // The returned moment matrix satisfies the relaxation up to engine
  // tolerances and reproduces the bound as its objective.
  const CMatrix& moment = res.solution.S.at(0);
  auto audit = npa::audit_moment_matrix(mp, moment);
  CHECK(audit.hermiticity_residual <= 1e-9);
  CHECK(audit.entry_residual <= 1e-7);
  CHECK(audit.null_residual <= 1e-12);
  CHECK(audit.equation_residual <= 1e-6);
  CHECK(std::abs(audit.objective - res.bound) <= 1e-5);

  auto eig = herm_eig(HermMatrix(moment, 1e-8));
  CHECK(eig.values.front() >= -1e-8);

  // Pseudo-assemblage blocks sum to the epsilon block for every question
  // pair, with unit trace.
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      CMatrix sum(2, 2);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) sum += res.pseudo.k(a, b, x, y);
      CHECK(std::abs(sum.trace() - complexd(1.0, 0.0)) <= 1e-6);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          CHECK(std::abs(sum(i, j) - moment(i, j)) <= 1e-6);
    }

  // Determinism.
  auto res2 = npa::npa_upper_bound(bb84, 1);
  CHECK(res.bound == res2.bound);
}

TEST_CASE("levels are monotone and sandwich the other values") {
  auto bb84 = games::monogamy_to_extended(games::bb84_game());
  auto b1 = npa::npa_upper_bound(bb84, 1);
  auto b2 = npa::npa_upper_bound(bb84, 2);
  CHECK(b2.verified);
  CHECK(b2.bound <= b1.bound + 1e-6);
  CHECK(b2.bound >= std::cos(M_PI / 8) * std::cos(M_PI / 8) - 1e-6);

  SplitMix64 rng(31);
  for (int trial = 0; trial < 2; ++trial) {
    auto g = random_game(rng, 2, trial == 1);
    auto r1 = npa::npa_upper_bound(g, 1);
    auto r2 = npa::npa_upper_bound(g, 2);
    CHECK(r1.verified);
    CHECK(r2.verified);
    CHECK(r2.bound <= r1.bound + 1e-6);

    const double unent = games::unentangled_value(g).value;
    CHECK(unent <= r1.bound + 1e-7);

    auto ss = strategies::seesaw(g, 2, 2, 2, 30, 5);
    CHECK(ss.lower_bound <= r1.bound + 1e-5);
    CHECK(ss.lower_bound <= r2.bound + 1e-5);
  }
}

TEST_CASE("strategy moment matrices satisfy the relaxation exactly") {
  auto bb84 = games::monogamy_to_extended(games::bb84_game());
  SplitMix64 rng(55);
  for (int k = 1; k <= 2; ++k) {
    auto mp = npa::build_moment_problem(bb84, k);
    for (int trial = 0; trial < 3; ++trial) {
      auto s = random_projective_strategy(rng, bb84, 2 + trial % 2, 2);
      auto sm = npa::moment_matrix_from_strategy(s, k);
      REQUIRE(sm.matrix.rows() == mp.dim());
      REQUIRE(sm.words == mp.words);

      auto audit = npa::audit_moment_matrix(mp, sm.matrix);
      CHECK(audit.hermiticity_residual <= 1e-9);
      CHECK(audit.entry_residual <= 1e-9);
      CHECK(audit.null_residual <= 1e-9);
      CHECK(audit.equation_residual <= 1e-9);
      CHECK(std::abs(audit.objective - strategies::expected_payoff(bb84, s)) <= 1e-9);

      auto eig = herm_eig(HermMatrix(sm.matrix, 1e-8));
      CHECK(eig.values.front() >= -1e-9);
    }
  }
}

TEST_CASE("moment matrix extraction rejects invalid strategies") {
  auto bb84 = games::monogamy_to_extended(games::bb84_game());
  SplitMix64 rng(77);
  auto s = random_projective_strategy(rng, bb84, 2, 2);

  auto mixed = s;
  mixed.rho = CMatrix::identity(s.total_dim());
  mixed.rho *= complexd(1.0 / s.total_dim(), 0.0);
  CHECK_THROWS_AS(npa::moment_matrix_from_strategy(mixed, 1), DomainError);

  auto fuzzy = s;
  CMatrix half = CMatrix::identity(2);
  half *= complexd(0.5, 0.0);
  fuzzy.alice[0] = {half, half};
  CHECK_THROWS_AS(npa::moment_matrix_from_strategy(fuzzy, 1), DomainError);
}
