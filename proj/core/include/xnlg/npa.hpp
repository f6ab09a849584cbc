#ifndef XNLG_NPA_HPP
#define XNLG_NPA_HPP

#include <compare>
#include <cstdint>
#include <vector>

#include "xnlg/games.hpp"
#include "xnlg/matrix.hpp"
#include "xnlg/sdp.hpp"
#include "xnlg/strategies.hpp"

namespace xnlg::npa {

enum class Party { Alice, Bob };

// One measurement symbol (z, c) from the disjoint union of Alice's and Bob's
// question-answer alphabets.
struct Letter {
  Party party = Party::Alice;
  int question = 0;
  int answer = 0;

  friend bool operator==(const Letter&, const Letter&) = default;
  friend auto operator<=>(const Letter&, const Letter&) = default;
};

// Normal form of a word under the moment-matrix equivalences: letters of
// different parties commute, adjacent equal letters collapse, and adjacent
// same-question different-answer letters annihilate the word (Null). The
// pair (reduced Alice subsequence, reduced Bob subsequence) is a complete
// invariant of the relation.
class CanonicalWord {
 public:
  CanonicalWord() = default;  // the empty word
  CanonicalWord(std::vector<Letter> alice, std::vector<Letter> bob)
      : alice_(std::move(alice)), bob_(std::move(bob)) {}
  static CanonicalWord null_word() {
    CanonicalWord w;
    w.null_ = true;
    return w;
  }

  bool is_null() const { return null_; }
  const std::vector<Letter>& alice_part() const { return alice_; }
  const std::vector<Letter>& bob_part() const { return bob_; }
  int length() const { return static_cast<int>(alice_.size() + bob_.size()); }

  // Letter-reversal of both parts; equals the adjoint word.
  CanonicalWord reversed() const;

  // Flattened representative sequence: Alice part then Bob part.
  std::vector<Letter> letters() const;

  friend bool operator==(const CanonicalWord&, const CanonicalWord&) = default;
  // Total order: non-null before null, then length, then parts
  // lexicographically.
  bool operator<(const CanonicalWord& other) const;

 private:
  bool null_ = false;
  std::vector<Letter> alice_;
  std::vector<Letter> bob_;
};

CanonicalWord canonicalize(const std::vector<Letter>& word);

// All non-Null canonical words of length at most k over the game alphabet,
// deduplicated, in the order defined by CanonicalWord::operator<.
std::vector<CanonicalWord> enumerate_words(int k, int nx, int ny, int na, int nb,
                                           std::uint64_t budget = 200000);

// The level-k moment relaxation of a game, assembled for the SDP engine in
// LMI form: entries of the m|W|-dimensional moment matrix are affine in the
// free parameters that remain after the admissibility equalities are
// eliminated. The engine problem's dual optimum then gives the bound as
// objective_constant - dual value.
struct MomentProblem {
  int k = 0;
  int m = 0;
  int nx = 0, ny = 0, na = 0, nb = 0;
  bool real_data = false;  // real pay-offs admit a real moment matrix
  std::vector<CanonicalWord> words;
  sdp::SdpProblem sdp{1};
  double objective_constant = 0.0;
  int free_dofs = 0;

  // Entry audit structure: complex entry (r, c) shares the slot
  // entry_slot[r * dim + c]; entry_conj marks conjugated occurrences; -1
  // slots are fixed to zero (Null words).
  std::vector<int> entry_slot;
  std::vector<char> entry_conj;
  int num_slots = 0;
  std::vector<std::pair<int, int>> slot_rep;  // unconjugated representative

  struct EquationTerm {
    int slot = 0;
    bool conj = false;
    double coeff = 0.0;
  };
  // sum_t coeff_t * value(slot_t) = constant; admissibility sums plus the
  // single normalization row.
  struct Equation {
    std::vector<EquationTerm> terms;
    double constant = 0.0;
  };
  std::vector<Equation> equations;

  struct ObjectiveTerm {
    int row = 0;
    int col = 0;
    complexd weight;
  };
  std::vector<ObjectiveTerm> objective_terms;

  int dim() const { return m * static_cast<int>(words.size()); }
  int word_index(const CanonicalWord& w) const;
};

// Budget bounds the real dimension of the embedded moment matrix.
MomentProblem build_moment_problem(const games::ExtendedNonlocalGame& g, int k,
                                   int real_dim_budget = 1200);

struct PseudoAssemblage {
  int m = 0;
  int nx = 0, ny = 0;
  int na = 0, nb = 0;
  std::vector<CMatrix> K;  // same (a, b, x, y) layout as game pay-offs

  int index(int a, int b, int x, int y) const { return ((x * ny + y) * na + a) * nb + b; }
  const CMatrix& k(int a, int b, int x, int y) const { return K[index(a, b, x, y)]; }
};

struct NpaBound {
  double bound = 0.0;
  bool verified = false;  // engine reached its optimality tolerances
  PseudoAssemblage pseudo;
  sdp::SdpSolution solution;
};

NpaBound npa_upper_bound(const games::ExtendedNonlocalGame& g, int k, double tol = 1e-7,
                         int max_iter = 200, int real_dim_budget = 1200);

struct StrategyMoments {
  std::vector<CanonicalWord> words;
  CMatrix matrix;
};

// Exact level-k moment matrix of a pure-state projective strategy, as the
// Gram matrix of the word-action vectors. Satisfies every MomentProblem
// constraint up to roundoff by construction.
StrategyMoments moment_matrix_from_strategy(const strategies::Strategy& s, int k);

struct MomentAudit {
  double entry_residual = 0.0;     // shared-slot consistency
  double null_residual = 0.0;      // entries pinned to zero
  double equation_residual = 0.0;  // admissibility + normalization
  double hermiticity_residual = 0.0;
  double objective = 0.0;
};

MomentAudit audit_moment_matrix(const MomentProblem& mp, const CMatrix& m);

}  // namespace xnlg::npa

#endif
