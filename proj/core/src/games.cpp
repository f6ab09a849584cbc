#include "xnlg/games.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "xnlg/linalg.hpp"

namespace xnlg::games {

namespace {

// a^b with saturation slightly above the budget range.
std::uint64_t pow_saturating(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  const std::uint64_t cap = UINT64_C(1) << 62;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > cap / base) return cap;
    r *= base;
  }
  return r;
}

bool increment_mixed_radix(std::vector<int>& digits, int radix) {
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (++digits[i] < radix) return true;
    digits[i] = 0;
  }
  return false;
}

void check_distribution(const std::vector<double>& p, const char* field,
                        std::vector<ValidationIssue>& issues) {
  double sum = 0.0;
  bool negative = false;
  for (double v : p) {
    if (v < 0.0) negative = true;
    sum += v;
  }
  if (negative)
    issues.push_back({field, "question distribution has negative probabilities"});
  if (std::abs(sum - 1.0) > 1e-12)
    issues.push_back({field, "question distribution sums to " + std::to_string(sum) +
                                 ", expected 1"});
}

}  // namespace

ExtendedNonlocalGame::ExtendedNonlocalGame(int m_, int nx_, int ny_, int na_, int nb_)
    : m(m_), nx(nx_), ny(ny_), na(na_), nb(nb_) {
  if (m <= 0 || nx <= 0 || ny <= 0 || na <= 0 || nb <= 0)
    throw DimensionError("game dimensions must be positive");
  pi.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  V.resize(static_cast<std::size_t>(nx) * ny * na * nb);
}

void ExtendedNonlocalGame::set_payoff(int a, int b, int x, int y, CMatrix v) {
  if (a < 0 || a >= na || b < 0 || b >= nb || x < 0 || x >= nx || y < 0 || y >= ny)
    throw DimensionError("pay-off index out of range");
  if (v.rows() != 0 && (v.rows() != m || v.cols() != m))
    throw DimensionError("pay-off observable has wrong dimension");
  V[payoff_index(a, b, x, y)] = std::move(v);
}

MonogamyGame::MonogamyGame(int m_, int nx_, int na_) : m(m_), nx(nx_), na(na_) {
  if (m <= 0 || nx <= 0 || na <= 0)
    throw DimensionError("game dimensions must be positive");
  pi.assign(nx, 0.0);
  R.assign(static_cast<std::size_t>(nx) * na, CMatrix::zero(m, m));
}

void MonogamyGame::set_effect(int a, int x, CMatrix r) {
  if (a < 0 || a >= na || x < 0 || x >= nx)
    throw DimensionError("measurement index out of range");
  if (r.rows() != m || r.cols() != m)
    throw DimensionError("measurement operator has wrong dimension");
  R[x * na + a] = std::move(r);
}

std::vector<ValidationIssue> validate(const ExtendedNonlocalGame& g) {
  std::vector<ValidationIssue> issues;
  if (g.m <= 0) issues.push_back({"m", "referee dimension must be positive"});
  if (g.nx <= 0 || g.ny <= 0 || g.na <= 0 || g.nb <= 0)
    issues.push_back({"nx", "question and answer set sizes must be positive"});
  if (!issues.empty()) return issues;

  if (g.pi.size() != static_cast<std::size_t>(g.nx) * g.ny)
    issues.push_back({"pi", "question distribution table has the wrong size"});
  else
    check_distribution(g.pi, "pi", issues);

  if (g.V.size() != static_cast<std::size_t>(g.nx) * g.ny * g.na * g.nb) {
    issues.push_back({"V", "pay-off table has the wrong size"});
    return issues;
  }
  for (int x = 0; x < g.nx; ++x)
    for (int y = 0; y < g.ny; ++y)
      for (int a = 0; a < g.na; ++a)
        for (int b = 0; b < g.nb; ++b) {
          const CMatrix& v = g.payoff(a, b, x, y);
          if (v.rows() == 0) continue;
          const std::string where = "V(" + std::to_string(a) + "," + std::to_string(b) +
                                    "|" + std::to_string(x) + "," + std::to_string(y) + ")";
          if (v.rows() != g.m || v.cols() != g.m) {
            issues.push_back({"V", "pay-off observable " + where + " has wrong dimension"});
            continue;
          }
          if (!v.is_hermitian(1e-12 * std::max(1.0, v.max_abs())))
            issues.push_back({"V", "pay-off observable " + where + " is not Hermitian"});
        }
  return issues;
}

std::vector<ValidationIssue> validate(const MonogamyGame& g) {
  std::vector<ValidationIssue> issues;
  if (g.m <= 0) issues.push_back({"m", "referee dimension must be positive"});
  if (g.nx <= 0 || g.na <= 0)
    issues.push_back({"nx", "question and answer set sizes must be positive"});
  if (!issues.empty()) return issues;

  if (g.pi.size() != static_cast<std::size_t>(g.nx))
    issues.push_back({"pi", "question distribution has the wrong size"});
  else
    check_distribution(g.pi, "pi", issues);

  if (g.R.size() != static_cast<std::size_t>(g.nx) * g.na) {
    issues.push_back({"R", "measurement table has the wrong size"});
    return issues;
  }
  for (int x = 0; x < g.nx; ++x) {
    CMatrix total = CMatrix::zero(g.m, g.m);
    bool shape_ok = true;
    for (int a = 0; a < g.na; ++a) {
      const CMatrix& r = g.effect(a, x);
      const std::string where =
          "R(" + std::to_string(a) + "|" + std::to_string(x) + ")";
      if (r.rows() != g.m || r.cols() != g.m) {
        issues.push_back({"R", "measurement operator " + where + " has wrong dimension"});
        shape_ok = false;
        continue;
      }
      const double scale = std::max(1.0, r.max_abs());
      if (!r.is_hermitian(1e-12 * scale)) {
        issues.push_back({"R", "measurement operator " + where + " is not Hermitian"});
        shape_ok = false;
        continue;
      }
      EigResult e = herm_eig(HermMatrix(r, 1e-11 * scale));
      if (e.values.front() < -1e-10 * std::max(1.0, std::abs(e.values.back())))
        issues.push_back(
            {"R", "measurement operator " + where + " is not positive semidefinite"});
      total += r;
    }
    if (!shape_ok) continue;
    CMatrix dev = total - CMatrix::identity(g.m);
    if (dev.max_abs() > 1e-10)
      issues.push_back({"R", "measurements for question " + std::to_string(x) +
                                 " do not sum to the identity (deviation " +
                                 std::to_string(dev.max_abs()) + ")"});
  }
  return issues;
}

UnentangledResult unentangled_value(const ExtendedNonlocalGame& g, std::uint64_t budget) {
  const std::uint64_t fa = pow_saturating(g.na, g.nx);
  const std::uint64_t gb = pow_saturating(g.nb, g.ny);
  if (fa > budget || gb > budget || fa > budget / gb)
    throw BudgetError("unentangled value enumeration needs " + std::to_string(fa) + " x " +
                      std::to_string(gb) + " strategy pairs, over the budget of " +
                      std::to_string(budget));

  UnentangledResult best;
  best.value = -std::numeric_limits<double>::infinity();

  std::vector<int> f(g.nx, 0);
  std::vector<int> gfun(g.ny, 0);
  // Partial sums for a fixed f: T[y][b] = sum_x pi(x,y) V(f(x), b|x,y).
  std::vector<CMatrix> partial(static_cast<std::size_t>(g.ny) * g.nb);

  do {
    for (auto& t : partial) t = CMatrix();
    for (int y = 0; y < g.ny; ++y)
      for (int b = 0; b < g.nb; ++b) {
        CMatrix& t = partial[static_cast<std::size_t>(y) * g.nb + b];
        for (int x = 0; x < g.nx; ++x) {
          const double p = g.prob(x, y);
          if (p == 0.0) continue;
          const CMatrix& v = g.payoff(f[x], b, x, y);
          if (v.rows() == 0) continue;
          if (t.rows() == 0) t = CMatrix::zero(g.m, g.m);
          t += complexd(p) * v;
        }
      }

    std::fill(gfun.begin(), gfun.end(), 0);
    do {
      CMatrix w = CMatrix::zero(g.m, g.m);
      for (int y = 0; y < g.ny; ++y) {
        const CMatrix& t = partial[static_cast<std::size_t>(y) * g.nb + gfun[y]];
        if (t.rows() != 0) w += t;
      }
      MaxEigResult me = max_eig(HermMatrix(w, 1e-9 * std::max(1.0, w.max_abs())));
      if (me.value > best.value) {
        best.value = me.value;
        best.witness.f = f;
        best.witness.g = gfun;
        best.witness.referee_state = me.vector;
      }
    } while (increment_mixed_radix(gfun, g.nb));
  } while (increment_mixed_radix(f, g.na));

  return best;
}

ExtendedNonlocalGame monogamy_to_extended(const MonogamyGame& mg) {
  ExtendedNonlocalGame g(mg.m, mg.nx, mg.nx, mg.na, mg.na);
  for (int x = 0; x < mg.nx; ++x) {
    g.prob(x, x) = mg.pi[x];
    for (int a = 0; a < mg.na; ++a) g.set_payoff(a, a, x, x, mg.effect(a, x));
  }
  return g;
}

MonogamyGame bb84_game() {
  MonogamyGame g(2, 2, 2);
  g.pi = {0.5, 0.5};
  g.set_effect(0, 0, CMatrix{{1.0, 0.0}, {0.0, 0.0}});
  g.set_effect(1, 0, CMatrix{{0.0, 0.0}, {0.0, 1.0}});
  g.set_effect(0, 1, CMatrix{{0.5, 0.5}, {0.5, 0.5}});
  g.set_effect(1, 1, CMatrix{{0.5, -0.5}, {-0.5, 0.5}});
  return g;
}

MonogamyGame mub_game() {
  const complexd zeta = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
  const complexd zeta2 = std::polar(1.0, 4.0 * std::numbers::pi / 3.0);
  const double s = 1.0 / std::sqrt(3.0);
  const complexd one(1.0);

  // Four mutually unbiased bases of C^3; rows are the basis vectors.
  const std::vector<std::vector<std::vector<complexd>>> bases = {
      {{one, 0.0, 0.0}, {0.0, one, 0.0}, {0.0, 0.0, one}},
      {{s * one, s * one, s * one},
       {s * one, s * zeta2, s * zeta},
       {s * one, s * zeta, s * zeta2}},
      {{s * one, s * one, s * zeta},
       {s * one, s * zeta2, s * zeta2},
       {s * one, s * zeta, s * one}},
      {{s * one, s * one, s * zeta2},
       {s * one, s * zeta2, s * one},
       {s * one, s * zeta, s * zeta}}};

  MonogamyGame g(3, 4, 3);
  g.pi = {0.25, 0.25, 0.25, 0.25};
  for (int x = 0; x < 4; ++x)
    for (int a = 0; a < 3; ++a) {
      const auto& v = bases[x][a];
      CMatrix proj(3, 3);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) proj(r, c) = v[r] * std::conj(v[c]);
      g.set_effect(a, x, std::move(proj));
    }
  return g;
}

MonogamyGame parallel_repetition(const MonogamyGame& mg, int n, std::uint64_t budget) {
  if (n < 1) throw DomainError("parallel repetition count must be at least 1");
  if (n == 1) return mg;

  const std::uint64_t pairs = pow_saturating(
      static_cast<std::uint64_t>(mg.nx) * static_cast<std::uint64_t>(mg.na), n);
  const std::uint64_t dim = pow_saturating(mg.m, n);
  // Both the table size and the total stored entries must stay in budget.
  if (pairs > budget || dim > budget || dim * dim > budget ||
      pairs > budget / (dim * dim))
    throw BudgetError("parallel repetition of " + std::to_string(n) +
                      " rounds exceeds the construction budget");

  const int nxn = static_cast<int>(pow_saturating(mg.nx, n));
  const int nan = static_cast<int>(pow_saturating(mg.na, n));
  const int mn = static_cast<int>(dim);

  MonogamyGame out(mn, nxn, nan);

  // Tuple index: digit 0 is the most significant, matching the tensor factor
  // order R(a_0|x_0) ⊗ R(a_1|x_1) ⊗ ...
  std::vector<int> xs(n), as(n);
  for (int xi = 0; xi < nxn; ++xi) {
    int rem = xi;
    for (int i = n - 1; i >= 0; --i) {
      xs[i] = rem % mg.nx;
      rem /= mg.nx;
    }
    double p = 1.0;
    for (int i = 0; i < n; ++i) p *= mg.pi[xs[i]];
    out.pi[xi] = p;

    for (int ai = 0; ai < nan; ++ai) {
      rem = ai;
      for (int i = n - 1; i >= 0; --i) {
        as[i] = rem % mg.na;
        rem /= mg.na;
      }
      std::vector<CMatrix> factors;
      factors.reserve(n);
      for (int i = 0; i < n; ++i) factors.push_back(mg.effect(as[i], xs[i]));
      out.set_effect(ai, xi, tensor(factors));
    }
  }
  return out;
}

double overlap_constant(const MonogamyGame& mg) {
  if (mg.nx < 2)
    throw DomainError("overlap constant requires at least two questions");
  std::vector<CMatrix> roots;
  roots.reserve(mg.R.size());
  for (const auto& r : mg.R)
    roots.push_back(psd_sqrt(HermMatrix(r, 1e-10 * std::max(1.0, r.max_abs()))).matrix());

  double c = 0.0;
  for (int x = 0; x < mg.nx; ++x)
    for (int y = 0; y < mg.nx; ++y) {
      if (x == y) continue;
      for (int a = 0; a < mg.na; ++a)
        for (int b = 0; b < mg.na; ++b) {
          const double norm = op_norm(roots[x * mg.na + a] * roots[y * mg.na + b]);
          c = std::max(c, norm * norm);
        }
    }
  return c;
}

double tfkw_bound(const MonogamyGame& mg, int n) {
  if (n < 1) throw DomainError("repetition count must be at least 1");
  for (double p : mg.pi)
    if (std::abs(p - 1.0 / mg.nx) > 1e-12)
      throw DomainError(
          "the parallel repetition bound assumes a uniform question distribution");
  const double c = overlap_constant(mg);
  const double base =
      1.0 / mg.nx + (static_cast<double>(mg.nx - 1) / mg.nx) * std::sqrt(c);
  return std::pow(base, n);
}

double two_question_value(const MonogamyGame& mg) {
  if (mg.nx != 2)
    throw DomainError("two-question value requires exactly two questions");
  for (double p : mg.pi)
    if (std::abs(p - 0.5) > 1e-12)
      throw DomainError("two-question value requires a uniform question distribution");
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < mg.na; ++a) {
      const CMatrix& r = mg.effect(a, x);
      CMatrix dev = r * r - r;
      if (dev.max_abs() > 1e-10)
        throw DomainError("measurement R(" + std::to_string(a) + "|" + std::to_string(x) +
                          ") is not a projector");
    }

  double best = 0.0;
  for (int a = 0; a < mg.na; ++a)
    for (int b = 0; b < mg.na; ++b)
      best = std::max(best, op_norm(mg.effect(a, 0) * mg.effect(b, 1)));
  return 0.5 + 0.5 * best;
}

}  // namespace xnlg::games
