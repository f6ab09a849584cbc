#ifndef XNLG_GAMES_HPP
#define XNLG_GAMES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "xnlg/matrix.hpp"

namespace xnlg::games {

inline constexpr std::uint64_t kDefaultBudget = 10000000;

// Extended nonlocal game (pi, V): the referee measures a shared register of
// dimension m with the Hermitian pay-off observable V(a,b|x,y) after
// receiving answers (a, b) to questions (x, y) drawn from pi.
struct ExtendedNonlocalGame {
  int m = 0;
  int nx = 0, ny = 0;
  int na = 0, nb = 0;
  std::vector<double> pi;  // (x, y) -> pi[x * ny + y]
  // (a, b, x, y) indexed by payoff_index; an empty matrix is the zero pay-off.
  std::vector<CMatrix> V;

  ExtendedNonlocalGame() = default;
  ExtendedNonlocalGame(int m_, int nx_, int ny_, int na_, int nb_);

  int payoff_index(int a, int b, int x, int y) const {
    return ((x * ny + y) * na + a) * nb + b;
  }
  double prob(int x, int y) const { return pi[x * ny + y]; }
  double& prob(int x, int y) { return pi[x * ny + y]; }
  const CMatrix& payoff(int a, int b, int x, int y) const {
    return V[payoff_index(a, b, x, y)];
  }
  void set_payoff(int a, int b, int x, int y, CMatrix v);
};

// Monogamy-of-entanglement game (pi, R): one question x to both players, who
// win iff both answers match the outcome of the referee's measurement
// {R(a|x)}_a on the shared register.
struct MonogamyGame {
  int m = 0;
  int nx = 0;
  int na = 0;
  std::vector<double> pi;  // question distribution over X
  std::vector<CMatrix> R;  // (a, x) -> R[x * na + a]

  MonogamyGame() = default;
  MonogamyGame(int m_, int nx_, int na_);

  const CMatrix& effect(int a, int x) const { return R[x * na + a]; }
  void set_effect(int a, int x, CMatrix r);
};

struct DeterministicStrategy {
  std::vector<int> f;  // X -> A
  std::vector<int> g;  // Y -> B
  std::vector<complexd> referee_state;  // unit vector in C^m
};

struct ValidationIssue {
  std::string field;
  std::string message;
};

std::vector<ValidationIssue> validate(const ExtendedNonlocalGame& g);
std::vector<ValidationIssue> validate(const MonogamyGame& g);

struct UnentangledResult {
  double value = 0.0;
  DeterministicStrategy witness;
};

// Exact unentangled value: maximum over all deterministic answer functions
// (f, g) of the largest eigenvalue of sum_{x,y} pi(x,y) V(f(x), g(y)|x,y),
// with the witness attaining it. Refuses (BudgetError) when na^nx * nb^ny
// exceeds the enumeration budget.
UnentangledResult unentangled_value(const ExtendedNonlocalGame& g,
                                    std::uint64_t budget = kDefaultBudget);

// Compilation of a monogamy game: questions on the diagonal, pay-off
// V(a,a|x,x) = R(a|x), zero elsewhere.
ExtendedNonlocalGame monogamy_to_extended(const MonogamyGame& mg);

// Qubit game with computational and Hadamard basis measurements, uniform pi.
MonogamyGame bb84_game();

// Qutrit game over the four standard mutually unbiased bases, uniform pi.
MonogamyGame mub_game();

// n-fold parallel repetition: question and answer tuples, product
// distribution, tensor-product measurements on an m^n dimensional register.
MonogamyGame parallel_repetition(const MonogamyGame& mg, int n,
                                 std::uint64_t budget = kDefaultBudget);

// Maximal squared cross-question overlap
//   c(G) = max_{x != y} max_{a,b} || sqrt(R(a|x)) sqrt(R(b|y)) ||^2.
double overlap_constant(const MonogamyGame& mg);

// Closed-form upper bound on the quantum value of the n-fold repetition for
// uniform-pi games: (1/nx + (nx-1)/nx * sqrt(c(G)))^n.
double tfkw_bound(const MonogamyGame& mg, int n);

// Exact value of a two-question projective monogamy game with uniform pi:
//   1/2 + 1/2 * max_{a,b} || R(a|0) R(b|1) ||,
// which equals both the unentangled and the quantum value.
double two_question_value(const MonogamyGame& mg);

}  // namespace xnlg::games

#endif
