#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "xnlg/games.hpp"
#include "xnlg/linalg.hpp"
#include "xnlg/strategies.hpp"

using namespace xnlg;
using namespace xnlg::games;
using namespace xnlg::strategies;

namespace {

const double kBb84Value = std::cos(std::numbers::pi / 8) * std::cos(std::numbers::pi / 8);

Strategy random_strategy(SplitMix64& rng, int m, int dA, int dB, int nx, int ny, int na,
                         int nb) {
  Strategy s;
  s.m = m;
  s.dA = dA;
  s.dB = dB;
  s.rho = test::random_density(rng, m * dA * dB);
  s.alice.resize(nx);
  for (int x = 0; x < nx; ++x) s.alice[x] = test::random_projective_povm(rng, dA, na);
  s.bob.resize(ny);
  for (int y = 0; y < ny; ++y) s.bob[y] = test::random_projective_povm(rng, dB, nb);
  return s;
}

ExtendedNonlocalGame random_game(SplitMix64& rng, int m, int nx, int ny, int na, int nb) {
  ExtendedNonlocalGame g(m, nx, ny, na, nb);
  double total = 0.0;
  for (auto& p : g.pi) {
    p = rng.uniform() + 0.05;
    total += p;
  }
  for (auto& p : g.pi) p /= total;
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y)
      for (int a = 0; a < na; ++a)
        for (int b = 0; b < nb; ++b)
          g.set_payoff(a, b, x, y, test::random_hermitian(rng, m).matrix());
  return g;
}

MonogamyGame random_projective_monogamy(SplitMix64& rng, int m, int na) {
  MonogamyGame g(m, 2, na);
  g.pi = {0.5, 0.5};
  for (int x = 0; x < 2; ++x) {
    auto povm = test::random_projective_povm(rng, m, na);
    for (int a = 0; a < na; ++a) g.set_effect(a, x, std::move(povm[a]));
  }
  return g;
}

}  // namespace

TEST_CASE("assemblage of a product strategy factorizes") {
  SplitMix64 rng(1);
  const int m = 2, dA = 2, dB = 2;
  CMatrix rho_r = test::random_density(rng, m);
  CMatrix rho_a = test::random_density(rng, dA);
  CMatrix rho_b = test::random_density(rng, dB);
  Strategy s;
  s.m = m;
  s.dA = dA;
  s.dB = dB;
  s.rho = tensor(tensor(rho_r, rho_a), rho_b);
  s.alice = {test::random_projective_povm(rng, dA, 2)};
  s.bob = {test::random_projective_povm(rng, dB, 2)};

  Assemblage k = assemblage(s);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const complexd pa = (s.alice[0][a] * rho_a).trace();
      const complexd pb = (s.bob[0][b] * rho_b).trace();
      CMatrix expected = (pa * pb) * rho_r;
      CHECK((k.k(a, b, 0, 0) - expected).max_abs() <= 1e-12);
    }
}

TEST_CASE("trivial POVMs leave the reduced referee state") {
  SplitMix64 rng(2);
  const int m = 3, dA = 2, dB = 2;
  Strategy s;
  s.m = m;
  s.dA = dA;
  s.dB = dB;
  s.rho = test::random_density(rng, m * dA * dB);
  s.alice = {{CMatrix::identity(dA)}};
  s.bob = {{CMatrix::identity(dB)}};
  Assemblage k = assemblage(s);
  CMatrix reduced = partial_trace(s.rho, {m, dA, dB}, {0});
  CHECK((k.k(0, 0, 0, 0) - reduced).max_abs() <= 1e-12);
}

TEST_CASE("assemblage marginal consistency on random strategies") {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + static_cast<int>(rng.next() % 2);
    Strategy s = random_strategy(rng, m, 2, 2, 2, 2, 2, 2);
    Assemblage k = assemblage(s);
    // The summed assemblage is the same reduced state for every (x,y), with
    // unit trace.
    CMatrix reference = CMatrix::zero(m, m);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) reference += k.k(a, b, 0, 0);
    CHECK(std::abs(reference.trace().real() - 1.0) <= 1e-9);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        CMatrix total = CMatrix::zero(m, m);
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) total += k.k(a, b, x, y);
        CHECK((total - reference).max_abs() <= 1e-9);
      }
    // Each block is PSD within tolerance.
    for (const auto& block : k.K) {
      EigResult e = herm_eig(HermMatrix(block, 1e-8));
      CHECK(e.values.front() >= -1e-9);
    }
  }
}

TEST_CASE("expected pay-off evaluation paths agree") {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng.next() % 3);
    ExtendedNonlocalGame g = random_game(rng, m, 2, 2, 2, 2);
    Strategy s = random_strategy(rng, m, 2, 2, 2, 2, 2, 2);
    const double via_assemblage = expected_payoff(g, s);
    const double direct = expected_payoff_direct(g, s);
    CHECK(std::abs(via_assemblage - direct) <= 1e-10);
  }
}

TEST_CASE("assemblage-form pay-off equals the inner-product sum") {
  SplitMix64 rng(5);
  ExtendedNonlocalGame g = random_game(rng, 2, 2, 2, 2, 2);
  Strategy s = random_strategy(rng, 2, 2, 2, 2, 2, 2, 2);
  Assemblage k = assemblage(s);
  double from_assemblage = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          from_assemblage +=
              g.prob(x, y) * hs_inner(g.payoff(a, b, x, y), k.k(a, b, x, y)).real();
  CHECK(std::abs(from_assemblage - expected_payoff(g, s)) <= 1e-10);
}

TEST_CASE("deterministic embedding reproduces witness values") {
  ExtendedNonlocalGame bb84 = monogamy_to_extended(bb84_game());
  UnentangledResult res = unentangled_value(bb84);
  Strategy s = embed_deterministic(bb84, res.witness);
  CHECK(s.dA == 1);
  CHECK(s.dB == 1);
  CHECK(std::abs(expected_payoff(bb84, s) - kBb84Value) <= 1e-10);
  CHECK(std::abs(expected_payoff_direct(bb84, s) - kBb84Value) <= 1e-10);
  // POVM completeness of the indicators.
  for (int x = 0; x < bb84.nx; ++x) {
    complexd total = 0.0;
    for (int a = 0; a < bb84.na; ++a) total += s.alice[x][a](0, 0);
    CHECK(total == complexd(1.0));
  }
}

TEST_CASE("zero pay-off game evaluates to zero") {
  ExtendedNonlocalGame g(2, 2, 2, 2, 2);
  for (auto& p : g.pi) p = 0.25;
  SplitMix64 rng(6);
  Strategy s = random_strategy(rng, 2, 2, 2, 2, 2, 2, 2);
  CHECK(expected_payoff(g, s) == 0.0);
}

TEST_CASE("seesaw passthrough with zero iterations returns the witness value") {
  ExtendedNonlocalGame bb84 = monogamy_to_extended(bb84_game());
  SeesawResult res = seesaw(bb84, 2, 2, 1, 0, 7, 1e-7);
  CHECK(std::abs(res.lower_bound - kBb84Value) <= 1e-10);
  CHECK(res.best_restart == 0);
  REQUIRE(res.traces.size() == 1);
  CHECK(res.traces[0].size() == 1);
}

TEST_CASE("seesaw recovers the bb84 value") {
  ExtendedNonlocalGame bb84 = monogamy_to_extended(bb84_game());
  SeesawResult res = seesaw(bb84, 2, 2, 5, 50, 11, 1e-9);
  CHECK(res.lower_bound >= kBb84Value - 1e-4);
  CHECK(res.lower_bound <= kBb84Value + 1e-6);
  // Monotone traces within solver noise.
  for (const auto& trace : res.traces)
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1] - 1e-9);
}

TEST_CASE("seesaw stays below the two-question value") {
  SplitMix64 rng(8);
  for (int trial = 0; trial < 3; ++trial) {
    MonogamyGame mg = random_projective_monogamy(rng, 3, 2);
    const double closed = two_question_value(mg);
    SeesawResult res = seesaw(monogamy_to_extended(mg), 4, 4, 3, 30, 13 + trial, 1e-8);
    CHECK(res.lower_bound <= closed + 1e-5);
    // The see-saw should also come close to the optimum from below.
    CHECK(res.lower_bound >= closed - 5e-2);
  }
}

TEST_CASE("seesaw is deterministic for a fixed seed") {
  ExtendedNonlocalGame bb84 = monogamy_to_extended(bb84_game());
  SeesawResult a = seesaw(bb84, 2, 2, 3, 10, 42, 1e-8);
  SeesawResult b = seesaw(bb84, 2, 2, 3, 10, 42, 1e-8);
  CHECK(a.lower_bound == b.lower_bound);
  CHECK(a.best_restart == b.best_restart);
  REQUIRE(a.traces.size() == b.traces.size());
  for (std::size_t r = 0; r < a.traces.size(); ++r) CHECK(a.traces[r] == b.traces[r]);
}

TEST_CASE("dimension mismatches are rejected") {
  ExtendedNonlocalGame bb84 = monogamy_to_extended(bb84_game());
  SplitMix64 rng(9);
  Strategy s = random_strategy(rng, 3, 2, 2, 2, 2, 2, 2);  // wrong referee dim
  CHECK_THROWS_AS(expected_payoff(bb84, s), DimensionError);
}
