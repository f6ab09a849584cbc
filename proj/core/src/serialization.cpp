#include "xnlg/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "xnlg/errors.hpp"

namespace xnlg::serialization {

using nlohmann::json;

std::string format_double(double v) {
  if (!std::isfinite(v)) throw DomainError("cannot serialize a non-finite number");
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

constexpr unsigned long long kMaxTableNumbers = 10000000;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw DomainError(path + ": " + message);
}

void check_table_budget(std::initializer_list<int> factors) {
  unsigned long long acc = 1;
  for (int f : factors) {
    acc *= static_cast<unsigned long long>(f);
    if (acc > kMaxTableNumbers)
      throw BudgetError("game table is over the budget of " +
                        std::to_string(kMaxTableNumbers) + " numbers");
  }
}

bool matrix_is_zero(const CMatrix& v) {
  if (v.rows() == 0) return true;
  return v.max_abs() == 0.0;
}

void append_matrix_part(std::string& out, const CMatrix& v, int dim, bool imag) {
  out += '[';
  for (int r = 0; r < dim; ++r) {
    if (r) out += ", ";
    out += '[';
    for (int c = 0; c < dim; ++c) {
      if (c) out += ", ";
      double x = v.rows() == 0 ? 0.0 : (imag ? v(r, c).imag() : v(r, c).real());
      out += format_double(x);
    }
    out += ']';
  }
  out += ']';
}

void append_matrix_fields(std::string& out, const CMatrix& v, int dim) {
  out += "\"re\": ";
  append_matrix_part(out, v, dim, false);
  out += ", \"im\": ";
  append_matrix_part(out, v, dim, true);
}

void append_int_field(std::string& out, const char* key, int v, bool comma = true) {
  out += "  \"";
  out += key;
  out += "\": ";
  out += std::to_string(v);
  out += comma ? ",\n" : "\n";
}

void require_square(const CMatrix& v, int dim, const std::string& what) {
  if (v.rows() == 0) return;
  if (v.rows() != dim || v.cols() != dim)
    throw DimensionError(what + " is not " + std::to_string(dim) + " by " +
                         std::to_string(dim));
}

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(key, "missing");
  return *it;
}

const json& require_in(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing");
  return *it;
}

int get_int(const json& j, const std::string& path, long long lo, long long hi) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  long long v = j.get<long long>();
  if (v < lo || v > hi)
    fail(path, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

double get_num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

void fill_matrix_part(const json& j, const std::string& path, int dim, bool imag,
                      CMatrix& out) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    fail(path, "expected " + std::to_string(dim) + " rows");
  for (int r = 0; r < dim; ++r) {
    const json& row = j[r];
    const std::string rpath = path + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      fail(rpath, "expected " + std::to_string(dim) + " numbers");
    for (int c = 0; c < dim; ++c) {
      double v = get_num(row[c], rpath + "[" + std::to_string(c) + "]");
      complexd& z = out(r, c);
      z = imag ? complexd(z.real(), v) : complexd(v, z.imag());
    }
  }
}

CMatrix read_matrix(const json& entry, const std::string& path, int dim) {
  CMatrix out = CMatrix::zero(dim, dim);
  auto re = entry.find("re");
  if (re == entry.end()) fail(path + ".re", "missing");
  fill_matrix_part(*re, path + ".re", dim, false, out);
  if (auto im = entry.find("im"); im != entry.end())
    fill_matrix_part(*im, path + ".im", dim, true, out);
  return out;
}

const json& entry_object(const json& arr, int i, const std::string& name) {
  const json& e = arr[i];
  if (!e.is_object()) fail(name + "[" + std::to_string(i) + "]", "expected an object");
  return e;
}

games::ExtendedNonlocalGame parse_extended(const json& root) {
  int m = get_int(require(root, "m"), "m", 1, 1000000);
  int nx = get_int(require(root, "nx"), "nx", 1, 1000000);
  int ny = get_int(require(root, "ny"), "ny", 1, 1000000);
  int na = get_int(require(root, "na"), "na", 1, 1000000);
  int nb = get_int(require(root, "nb"), "nb", 1, 1000000);
  check_table_budget({2, m, m, nx, ny, na, nb});

  games::ExtendedNonlocalGame g(m, nx, ny, na, nb);

  const json& pi = require(root, "pi");
  if (!pi.is_array()) fail("pi", "expected an array");
  std::vector<char> seen_pi(static_cast<std::size_t>(nx) * ny, 0);
  for (int i = 0; i < static_cast<int>(pi.size()); ++i) {
    const std::string path = "pi[" + std::to_string(i) + "]";
    const json& e = entry_object(pi, i, "pi");
    int x = get_int(require_in(e, "x", path), path + ".x", 0, nx - 1);
    int y = get_int(require_in(e, "y", path), path + ".y", 0, ny - 1);
    if (seen_pi[static_cast<std::size_t>(x) * ny + y]) fail(path, "duplicate entry");
    seen_pi[static_cast<std::size_t>(x) * ny + y] = 1;
    g.prob(x, y) = get_num(require_in(e, "p", path), path + ".p");
  }

  if (auto vt = root.find("V"); vt != root.end()) {
    if (!vt->is_array()) fail("V", "expected an array");
    std::vector<char> seen_v(g.V.size(), 0);
    for (int i = 0; i < static_cast<int>(vt->size()); ++i) {
      const std::string path = "V[" + std::to_string(i) + "]";
      const json& e = entry_object(*vt, i, "V");
      int x = get_int(require_in(e, "x", path), path + ".x", 0, nx - 1);
      int y = get_int(require_in(e, "y", path), path + ".y", 0, ny - 1);
      int a = get_int(require_in(e, "a", path), path + ".a", 0, na - 1);
      int b = get_int(require_in(e, "b", path), path + ".b", 0, nb - 1);
      int idx = g.payoff_index(a, b, x, y);
      if (seen_v[idx]) fail(path, "duplicate entry");
      seen_v[idx] = 1;
      g.set_payoff(a, b, x, y, read_matrix(e, path, m));
    }
  }
  return g;
}

games::MonogamyGame parse_monogamy(const json& root) {
  int m = get_int(require(root, "m"), "m", 1, 1000000);
  int nx = get_int(require(root, "nx"), "nx", 1, 1000000);
  int na = get_int(require(root, "na"), "na", 1, 1000000);
  check_table_budget({2, m, m, nx, na});

  games::MonogamyGame g(m, nx, na);

  const json& pi = require(root, "pi");
  if (!pi.is_array() || static_cast<int>(pi.size()) != nx)
    fail("pi", "expected " + std::to_string(nx) + " numbers");
  for (int x = 0; x < nx; ++x) g.pi[x] = get_num(pi[x], "pi[" + std::to_string(x) + "]");

  const json& rt = require(root, "R");
  if (!rt.is_array()) fail("R", "expected an array");
  std::vector<char> seen(g.R.size(), 0);
  for (int i = 0; i < static_cast<int>(rt.size()); ++i) {
    const std::string path = "R[" + std::to_string(i) + "]";
    const json& e = entry_object(rt, i, "R");
    int x = get_int(require_in(e, "x", path), path + ".x", 0, nx - 1);
    int a = get_int(require_in(e, "a", path), path + ".a", 0, na - 1);
    if (seen[static_cast<std::size_t>(x) * na + a]) fail(path, "duplicate entry");
    seen[static_cast<std::size_t>(x) * na + a] = 1;
    g.set_effect(a, x, read_matrix(e, path, m));
  }
  return g;
}

}  // namespace

std::string to_json(const games::ExtendedNonlocalGame& g) {
  if (static_cast<int>(g.pi.size()) != g.nx * g.ny ||
      static_cast<int>(g.V.size()) != g.nx * g.ny * g.na * g.nb)
    throw DimensionError("game tables do not match the declared sizes");
  std::string out = "{\n  \"schema\": \"1\",\n  \"type\": \"extended\",\n";
  append_int_field(out, "m", g.m);
  append_int_field(out, "nx", g.nx);
  append_int_field(out, "ny", g.ny);
  append_int_field(out, "na", g.na);
  append_int_field(out, "nb", g.nb);

  out += "  \"pi\": [";
  bool first = true;
  for (int x = 0; x < g.nx; ++x)
    for (int y = 0; y < g.ny; ++y) {
      out += first ? "\n" : ",\n";
      first = false;
      out += "    {\"x\": " + std::to_string(x) + ", \"y\": " + std::to_string(y) +
             ", \"p\": " + format_double(g.prob(x, y)) + "}";
    }
  out += first ? "],\n" : "\n  ],\n";

  out += "  \"V\": [";
  first = true;
  for (int x = 0; x < g.nx; ++x)
    for (int y = 0; y < g.ny; ++y)
      for (int a = 0; a < g.na; ++a)
        for (int b = 0; b < g.nb; ++b) {
          const CMatrix& v = g.payoff(a, b, x, y);
          require_square(v, g.m, "pay-off matrix");
          if (matrix_is_zero(v)) continue;
          out += first ? "\n" : ",\n";
          first = false;
          out += "    {\"x\": " + std::to_string(x) + ", \"y\": " + std::to_string(y) +
                 ", \"a\": " + std::to_string(a) + ", \"b\": " + std::to_string(b) + ", ";
          append_matrix_fields(out, v, g.m);
          out += "}";
        }
  out += first ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

std::string to_json(const games::MonogamyGame& g) {
  if (static_cast<int>(g.pi.size()) != g.nx ||
      static_cast<int>(g.R.size()) != g.nx * g.na)
    throw DimensionError("game tables do not match the declared sizes");
  std::string out = "{\n  \"schema\": \"1\",\n  \"type\": \"monogamy\",\n";
  append_int_field(out, "m", g.m);
  append_int_field(out, "nx", g.nx);
  append_int_field(out, "na", g.na);

  out += "  \"pi\": [";
  for (int x = 0; x < g.nx; ++x) {
    if (x) out += ", ";
    out += format_double(g.pi[x]);
  }
  out += "],\n";

  out += "  \"R\": [";
  bool first = true;
  for (int x = 0; x < g.nx; ++x)
    for (int a = 0; a < g.na; ++a) {
      const CMatrix& r = g.effect(a, x);
      require_square(r, g.m, "measurement effect");
      out += first ? "\n" : ",\n";
      first = false;
      out += "    {\"x\": " + std::to_string(x) + ", \"a\": " + std::to_string(a) + ", ";
      append_matrix_fields(out, r, g.m);
      out += "}";
    }
  out += first ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

std::string to_json(const strategies::Strategy& s) {
  if (s.alice.empty() || s.bob.empty()) throw DomainError("strategy has no measurements");
  int nx = static_cast<int>(s.alice.size());
  int ny = static_cast<int>(s.bob.size());
  int na = static_cast<int>(s.alice[0].size());
  int nb = static_cast<int>(s.bob[0].size());
  for (const auto& povm : s.alice)
    if (static_cast<int>(povm.size()) != na)
      throw DimensionError("strategy measurement tables are ragged");
  for (const auto& povm : s.bob)
    if (static_cast<int>(povm.size()) != nb)
      throw DimensionError("strategy measurement tables are ragged");
  require_square(s.rho, s.total_dim(), "strategy state");

  std::string out = "{\n  \"schema\": \"1\",\n  \"type\": \"strategy\",\n";
  append_int_field(out, "m", s.m);
  append_int_field(out, "dA", s.dA);
  append_int_field(out, "dB", s.dB);
  append_int_field(out, "nx", nx);
  append_int_field(out, "ny", ny);
  append_int_field(out, "na", na);
  append_int_field(out, "nb", nb);

  out += "  \"rho\": {";
  append_matrix_fields(out, s.rho, s.total_dim());
  out += "},\n";

  out += "  \"alice\": [";
  bool first = true;
  for (int x = 0; x < nx; ++x)
    for (int a = 0; a < na; ++a) {
      require_square(s.alice[x][a], s.dA, "measurement effect");
      out += first ? "\n" : ",\n";
      first = false;
      out += "    {\"x\": " + std::to_string(x) + ", \"a\": " + std::to_string(a) + ", ";
      append_matrix_fields(out, s.alice[x][a], s.dA);
      out += "}";
    }
  out += first ? "],\n" : "\n  ],\n";

  out += "  \"bob\": [";
  first = true;
  for (int y = 0; y < ny; ++y)
    for (int b = 0; b < nb; ++b) {
      require_square(s.bob[y][b], s.dB, "measurement effect");
      out += first ? "\n" : ",\n";
      first = false;
      out += "    {\"y\": " + std::to_string(y) + ", \"b\": " + std::to_string(b) + ", ";
      append_matrix_fields(out, s.bob[y][b], s.dB);
      out += "}";
    }
  out += first ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

namespace {

json parse_root(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (auto pos = msg.find("parse error"); pos != std::string::npos) msg = msg.substr(pos);
    throw DomainError(msg);
  }
}

std::string get_type(const json& root) {
  if (!root.is_object()) fail("$", "expected a JSON object");
  const json& schema = require(root, "schema");
  if (!schema.is_string() || schema.get<std::string>() != "1")
    fail("schema", "unsupported schema version (expected \"1\")");
  const json& type = require(root, "type");
  if (!type.is_string()) fail("type", "expected a string");
  return type.get<std::string>();
}

}  // namespace

LoadedGame game_from_json(std::string_view text) {
  json root = parse_root(text);
  std::string t = get_type(root);
  if (t == "extended") return parse_extended(root);
  if (t == "monogamy") return parse_monogamy(root);
  fail("type", "expected \"extended\" or \"monogamy\"");
}

strategies::Strategy strategy_from_json(std::string_view text) {
  json root = parse_root(text);
  if (get_type(root) != "strategy") fail("type", "expected \"strategy\"");
  int m = get_int(require(root, "m"), "m", 1, 1000000);
  int dA = get_int(require(root, "dA"), "dA", 1, 1000000);
  int dB = get_int(require(root, "dB"), "dB", 1, 1000000);
  int nx = get_int(require(root, "nx"), "nx", 1, 1000000);
  int ny = get_int(require(root, "ny"), "ny", 1, 1000000);
  int na = get_int(require(root, "na"), "na", 1, 1000000);
  int nb = get_int(require(root, "nb"), "nb", 1, 1000000);
  check_table_budget({2, m, dA, dB, m, dA, dB});
  check_table_budget({2, dA, dA, nx, na});
  check_table_budget({2, dB, dB, ny, nb});

  strategies::Strategy s;
  s.m = m;
  s.dA = dA;
  s.dB = dB;

  const json& rho = require(root, "rho");
  if (!rho.is_object()) fail("rho", "expected an object");
  s.rho = read_matrix(rho, "rho", s.total_dim());

  s.alice.assign(nx, std::vector<CMatrix>(na));
  const json& alice = require(root, "alice");
  if (!alice.is_array()) fail("alice", "expected an array");
  std::vector<char> seen_a(static_cast<std::size_t>(nx) * na, 0);
  for (int i = 0; i < static_cast<int>(alice.size()); ++i) {
    const std::string path = "alice[" + std::to_string(i) + "]";
    const json& e = entry_object(alice, i, "alice");
    int x = get_int(require_in(e, "x", path), path + ".x", 0, nx - 1);
    int a = get_int(require_in(e, "a", path), path + ".a", 0, na - 1);
    if (seen_a[static_cast<std::size_t>(x) * na + a]) fail(path, "duplicate entry");
    seen_a[static_cast<std::size_t>(x) * na + a] = 1;
    s.alice[x][a] = read_matrix(e, path, dA);
  }
  for (char c : seen_a)
    if (!c) fail("alice", "incomplete measurement table");

  s.bob.assign(ny, std::vector<CMatrix>(nb));
  const json& bob = require(root, "bob");
  if (!bob.is_array()) fail("bob", "expected an array");
  std::vector<char> seen_b(static_cast<std::size_t>(ny) * nb, 0);
  for (int i = 0; i < static_cast<int>(bob.size()); ++i) {
    const std::string path = "bob[" + std::to_string(i) + "]";
    const json& e = entry_object(bob, i, "bob");
    int y = get_int(require_in(e, "y", path), path + ".y", 0, ny - 1);
    int b = get_int(require_in(e, "b", path), path + ".b", 0, nb - 1);
    if (seen_b[static_cast<std::size_t>(y) * nb + b]) fail(path, "duplicate entry");
    seen_b[static_cast<std::size_t>(y) * nb + b] = 1;
    s.bob[y][b] = read_matrix(e, path, dB);
  }
  for (char c : seen_b)
    if (!c) fail("bob", "incomplete measurement table");
  return s;
}

std::string export_sdp_text(const sdp::SdpProblem& p) {
  const std::vector<int>& dims = p.block_dims();
  // (constraint, block, row, col) -> accumulated entry of the real embedding,
  // upper triangle, 1-indexed; constraint 0 is the objective F_0.
  std::map<std::tuple<int, int, int, int>, double> acc;
  auto add_herm = [&](int matno, const sdp::SparseHerm& h, double scale) {
    for (const sdp::SparseEntry& e : h.entries) {
      int d = dims.at(e.block);
      double re = e.value.real() * scale;
      double im = e.value.imag() * scale;
      auto put = [&](int r, int c, double v) {
        if (r > c) std::swap(r, c);
        acc[{matno, e.block + 1, r + 1, c + 1}] += v;
      };
      put(e.row, e.col, re);
      put(e.row + d, e.col + d, re);
      put(e.row, e.col + d, -im);
      put(e.col, e.row + d, im);
    }
  };
  // F_0 = emb(C)/2, F_i = emb(A_i), c_i = 2 b_i: the exported real program
  // maximize <F_0, W> s.t. <F_i, W> = c_i over W >= 0 has the same optimal
  // value as the engine problem (symplectic averaging of any feasible W
  // yields an embedded Hermitian point with the same objective).
  add_herm(0, p.objective(), 0.5);
  for (int i = 0; i < p.num_constraints(); ++i)
    add_herm(i + 1, p.constraints()[i], 1.0);

  std::string out = std::to_string(p.num_constraints()) + "\n";
  out += std::to_string(dims.size()) + "\n";
  for (std::size_t b = 0; b < dims.size(); ++b) {
    if (b) out += ' ';
    out += std::to_string(2 * dims[b]);
  }
  out += '\n';
  const std::vector<double>& rhs = p.rhs();
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    if (i) out += ' ';
    out += format_double(2.0 * rhs[i]);
  }
  out += '\n';
  for (const auto& [key, value] : acc) {
    if (value == 0.0) continue;
    auto [matno, block, row, col] = key;
    out += std::to_string(matno) + " " + std::to_string(block) + " " +
           std::to_string(row) + " " + std::to_string(col) + " " +
           format_double(value) + "\n";
  }
  return out;
}

}  // namespace xnlg::serialization
