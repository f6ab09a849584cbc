#ifndef XNLG_STRATEGIES_HPP
#define XNLG_STRATEGIES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "xnlg/games.hpp"
#include "xnlg/matrix.hpp"

namespace xnlg::strategies {

// Explicit finite-dimensional strategy: a shared state on R ⊗ A ⊗ B (referee
// register first) and local POVMs for both players.
struct Strategy {
  int m = 0;   // referee dimension
  int dA = 0;  // Alice's local dimension
  int dB = 0;  // Bob's local dimension
  CMatrix rho;                              // density matrix on C^{m*dA*dB}
  std::vector<std::vector<CMatrix>> alice;  // alice[x][a], dA x dA
  std::vector<std::vector<CMatrix>> bob;    // bob[y][b], dB x dB

  int total_dim() const { return m * dA * dB; }
};

// The referee-side leftovers K(a,b|x,y) = Tr_{A,B}((1_R ⊗ A^x_a ⊗ B^y_b) rho).
struct Assemblage {
  int m = 0;
  int nx = 0, ny = 0;
  int na = 0, nb = 0;
  std::vector<CMatrix> K;  // same (a, b, x, y) layout as game pay-offs

  int index(int a, int b, int x, int y) const { return ((x * ny + y) * na + a) * nb + b; }
  const CMatrix& k(int a, int b, int x, int y) const { return K[index(a, b, x, y)]; }
};

Assemblage assemblage(const Strategy& s);

// Expected pay-off sum_{x,y} pi(x,y) sum_{a,b} <V(a,b|x,y), K(a,b|x,y)>,
// evaluated through the assemblage.
double expected_payoff(const games::ExtendedNonlocalGame& g, const Strategy& s);

// Reference evaluation that builds each V ⊗ A ⊗ B tensor explicitly and
// pairs it with rho. Exponentially sized intermediates; intended for
// cross-checking expected_payoff on small instances.
double expected_payoff_direct(const games::ExtendedNonlocalGame& g, const Strategy& s);

// Pure product embedding of a deterministic strategy: dA = dB = 1, indicator
// pay-off selection, referee state from the witness.
Strategy embed_deterministic(const games::ExtendedNonlocalGame& g,
                             const games::DeterministicStrategy& d);

struct SeesawResult {
  double lower_bound = 0.0;
  Strategy best;
  int best_restart = -1;
  // Pay-off recorded at initialization and after every full iteration, one
  // trace per restart; nondecreasing within solver noise.
  std::vector<std::vector<double>> traces;
  std::vector<std::string> diagnostics;  // aborted restarts, solver issues
};

// Alternating optimization over (state, Alice POVMs, Bob POVMs). Restart 0
// starts from the unentangled witness (when the enumeration budget allows);
// later restarts use random projective POVMs drawn from per-restart seed
// streams. Returns the best certified pay-off found: a valid quantum-value
// lower bound up to the reported residuals.
SeesawResult seesaw(const games::ExtendedNonlocalGame& g, int dA, int dB,
                    int restarts = 20, int iters = 200, std::uint64_t seed = 0,
                    double tol = 1e-7);

}  // namespace xnlg::strategies

#endif
