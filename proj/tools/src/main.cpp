#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "xnlg/errors.hpp"
#include "xnlg/games.hpp"
#include "xnlg/npa.hpp"
#include "xnlg/sdp.hpp"
#include "xnlg/serialization.hpp"
#include "xnlg/strategies.hpp"

namespace {

using namespace xnlg;
using serialization::format_double;
using serialization::LoadedGame;

// Thrown to unwind with a specific process exit code after the relevant
// messages have already been printed.
struct CliExit {
  int code;
};

struct ResultRecord {
  std::string method;
  double value = 0.0;
  std::string status;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<std::pair<std::string, std::string>> diagnostics;
};

// Shortest decimal form that parses back to the identical double; used for
// parameter echoes where "1e-07" is clearer than its 17-digit expansion.
std::string format_shortest(double v) {
  for (int prec = 1; prec <= 17; ++prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return format_double(v);
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

void print_record(const ResultRecord& r, bool as_json) {
  if (as_json) {
    std::string out = "{\"method\":\"" + json_escape(r.method) +
                      "\",\"value\":" + format_double(r.value) + ",\"status\":\"" +
                      json_escape(r.status) + "\",\"parameters\":{";
    for (std::size_t i = 0; i < r.parameters.size(); ++i) {
      if (i) out += ',';
      out += "\"" + json_escape(r.parameters[i].first) + "\":\"" +
             json_escape(r.parameters[i].second) + "\"";
    }
    out += "},\"diagnostics\":{";
    for (std::size_t i = 0; i < r.diagnostics.size(); ++i) {
      if (i) out += ',';
      out += "\"" + json_escape(r.diagnostics[i].first) + "\":\"" +
             json_escape(r.diagnostics[i].second) + "\"";
    }
    out += "}}";
    std::printf("%s\n", out.c_str());
    return;
  }
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("method", r.method);
  rows.emplace_back("value", format_double(r.value));
  rows.emplace_back("status", r.status);
  rows.insert(rows.end(), r.parameters.begin(), r.parameters.end());
  rows.insert(rows.end(), r.diagnostics.begin(), r.diagnostics.end());
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  for (const auto& [k, v] : rows)
    std::printf("%-*s  %s\n", static_cast<int>(width), k.c_str(), v.c_str());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write file: " + path);
  out << content;
  if (!out) throw DomainError("cannot write file: " + path);
}

LoadedGame load_game(const std::string& spec) {
  if (spec == "builtin:bb84") return games::bb84_game();
  if (spec == "builtin:mub43") return games::mub_game();
  if (spec.rfind("builtin:", 0) == 0)
    throw DomainError("unknown builtin: " + spec.substr(8));
  return serialization::game_from_json(read_file(spec));
}

std::vector<games::ValidationIssue> validate_loaded(const LoadedGame& g) {
  if (std::holds_alternative<games::ExtendedNonlocalGame>(g))
    return games::validate(std::get<games::ExtendedNonlocalGame>(g));
  return games::validate(std::get<games::MonogamyGame>(g));
}

// Loads, validates, and reports any violations on stderr before exiting 1.
LoadedGame load_valid_game(const std::string& spec) {
  LoadedGame g = load_game(spec);
  std::vector<games::ValidationIssue> issues = validate_loaded(g);
  if (!issues.empty()) {
    for (const auto& issue : issues)
      std::fprintf(stderr, "%s: %s\n", issue.field.c_str(), issue.message.c_str());
    throw CliExit{1};
  }
  return g;
}

games::ExtendedNonlocalGame as_extended(LoadedGame g) {
  if (std::holds_alternative<games::ExtendedNonlocalGame>(g))
    return std::move(std::get<games::ExtendedNonlocalGame>(g));
  return games::monogamy_to_extended(std::get<games::MonogamyGame>(g));
}

const games::MonogamyGame& as_monogamy(const LoadedGame& g, const char* what) {
  if (!std::holds_alternative<games::MonogamyGame>(g))
    throw DomainError(std::string(what) + " requires a monogamy game");
  return std::get<games::MonogamyGame>(g);
}

std::optional<std::uint64_t> env_budget() {
  const char* s = std::getenv("XNLG_BUDGET");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw DomainError("XNLG_BUDGET must be a nonnegative integer");
  return v;
}

struct WallClock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::string elapsed_ms() const {
    double ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", ms);
    return buf;
  }
};

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

int run_validate(const std::string& file) {
  LoadedGame g = load_game(file);
  std::vector<games::ValidationIssue> issues = validate_loaded(g);
  if (!issues.empty()) {
    for (const auto& issue : issues)
      std::fprintf(stderr, "%s: %s\n", issue.field.c_str(), issue.message.c_str());
    return 1;
  }
  if (std::holds_alternative<games::ExtendedNonlocalGame>(g)) {
    const auto& e = std::get<games::ExtendedNonlocalGame>(g);
    std::printf("valid: extended game (m=%d, nx=%d, ny=%d, na=%d, nb=%d)\n", e.m, e.nx,
                e.ny, e.na, e.nb);
  } else {
    const auto& m = std::get<games::MonogamyGame>(g);
    std::printf("valid: monogamy game (m=%d, nx=%d, na=%d)\n", m.m, m.nx, m.na);
  }
  return 0;
}

int run_builtin(const std::string& name, int repeat, const std::string& out_path) {
  games::MonogamyGame g;
  if (name == "bb84") {
    g = games::bb84_game();
  } else if (name == "mub43") {
    g = games::mub_game();
  } else {
    throw DomainError("unknown builtin: " + name);
  }
  if (repeat > 1)
    g = games::parallel_repetition(g, repeat,
                                   env_budget().value_or(games::kDefaultBudget));
  std::string text = serialization::to_json(g);
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    write_file(out_path, text);
  }
  return 0;
}

int run_value_unentangled(const std::string& game_spec, bool as_json) {
  WallClock clock;
  std::uint64_t budget = env_budget().value_or(games::kDefaultBudget);
  games::ExtendedNonlocalGame g = as_extended(load_valid_game(game_spec));
  games::UnentangledResult res = games::unentangled_value(g, budget);
  ResultRecord r;
  r.method = "unentangled";
  r.value = res.value;
  r.status = "exact";
  r.parameters = {{"game", game_spec}, {"budget", std::to_string(budget)}};
  r.diagnostics = {{"witness_f", join_ints(res.witness.f)},
                   {"witness_g", join_ints(res.witness.g)}};
  print_record(r, as_json);
  std::fprintf(stderr, "wall_ms: %s\n", clock.elapsed_ms().c_str());
  return 0;
}

int run_value_seesaw(const std::string& game_spec, int dim_a, int dim_b, int restarts,
                     int iters, std::uint64_t seed, double tol,
                     const std::string& save_strategy, bool as_json) {
  WallClock clock;
  games::ExtendedNonlocalGame g = as_extended(load_valid_game(game_spec));
  strategies::SeesawResult res = strategies::seesaw(g, dim_a, dim_b, restarts, iters, seed, tol);
  for (const std::string& note : res.diagnostics)
    std::fprintf(stderr, "%s\n", note.c_str());
  if (res.best_restart < 0) {
    std::fprintf(stderr, "all restarts failed\n");
    throw CliExit{2};
  }
  if (!save_strategy.empty())
    write_file(save_strategy, serialization::to_json(res.best));
  ResultRecord r;
  r.method = "seesaw";
  r.value = res.lower_bound;
  r.status = "ok";
  r.parameters = {{"game", game_spec},
                  {"dim_a", std::to_string(dim_a)},
                  {"dim_b", std::to_string(dim_b)},
                  {"restarts", std::to_string(restarts)},
                  {"iters", std::to_string(iters)},
                  {"seed", std::to_string(seed)},
                  {"tol", format_shortest(tol)}};
  if (!save_strategy.empty()) r.parameters.emplace_back("save_strategy", save_strategy);
  r.diagnostics = {
      {"best_restart", std::to_string(res.best_restart)},
      {"best_iters",
       std::to_string(res.traces[res.best_restart].empty()
                          ? 0
                          : res.traces[res.best_restart].size() - 1)},
      {"notes", std::to_string(res.diagnostics.size())}};
  print_record(r, as_json);
  std::fprintf(stderr, "wall_ms: %s\n", clock.elapsed_ms().c_str());
  return 0;
}

int run_value_npa(const std::string& game_spec, int level, double tol, int max_iter,
                  bool as_json) {
  WallClock clock;
  std::uint64_t budget_raw = env_budget().value_or(1200);
  int budget = budget_raw > static_cast<std::uint64_t>(std::numeric_limits<int>::max())
                   ? std::numeric_limits<int>::max()
                   : static_cast<int>(budget_raw);
  games::ExtendedNonlocalGame g = as_extended(load_valid_game(game_spec));
  npa::NpaBound res = npa::npa_upper_bound(g, level, tol, max_iter, budget);
  ResultRecord r;
  r.method = "npa";
  r.value = res.bound;
  r.status = sdp::to_string(res.solution.status);
  r.parameters = {{"game", game_spec},
                  {"level", std::to_string(level)},
                  {"tol", format_shortest(tol)},
                  {"max_iter", std::to_string(max_iter)},
                  {"budget", std::to_string(budget)}};
  r.diagnostics = {{"iterations", std::to_string(res.solution.iterations)},
                   {"gap", format_shortest(res.solution.gap)},
                   {"primal_residual", format_shortest(res.solution.primal_residual)},
                   {"dual_residual", format_shortest(res.solution.dual_residual)}};
  print_record(r, as_json);
  std::fprintf(stderr, "wall_ms: %s\n", clock.elapsed_ms().c_str());
  return res.verified ? 0 : 2;
}

int run_value_two_question(const std::string& game_spec, bool as_json) {
  WallClock clock;
  LoadedGame g = load_valid_game(game_spec);
  const games::MonogamyGame& mg = as_monogamy(g, "the two-question value");
  double value = games::two_question_value(mg);
  ResultRecord r;
  r.method = "two_question";
  r.value = value;
  r.status = "exact";
  r.parameters = {{"game", game_spec}};
  print_record(r, as_json);
  std::fprintf(stderr, "wall_ms: %s\n", clock.elapsed_ms().c_str());
  return 0;
}

int run_bound_tfkw(const std::string& game_spec, int n, bool as_json) {
  WallClock clock;
  LoadedGame g = load_valid_game(game_spec);
  const games::MonogamyGame& mg = as_monogamy(g, "the tfkw bound");
  double value = games::tfkw_bound(mg, n);
  ResultRecord r;
  r.method = "tfkw";
  r.value = value;
  r.status = "closed-form";
  r.parameters = {{"game", game_spec}, {"n", std::to_string(n)}};
  r.diagnostics = {{"overlap_constant", format_double(games::overlap_constant(mg))}};
  print_record(r, as_json);
  std::fprintf(stderr, "wall_ms: %s\n", clock.elapsed_ms().c_str());
  return 0;
}

int run_export_sdp(const std::string& game_spec, int level, const std::string& out_path) {
  std::uint64_t budget_raw = env_budget().value_or(1200);
  int budget = budget_raw > static_cast<std::uint64_t>(std::numeric_limits<int>::max())
                   ? std::numeric_limits<int>::max()
                   : static_cast<int>(budget_raw);
  games::ExtendedNonlocalGame g = as_extended(load_valid_game(game_spec));
  npa::MomentProblem mp = npa::build_moment_problem(g, level, budget);
  write_file(out_path, serialization::export_sdp_text(mp.sdp));
  std::printf("wrote %s: level-%d relaxation, %d constraints, embedded dimension %d\n",
              out_path.c_str(), level, mp.sdp.num_constraints(), 2 * mp.dim());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"extended nonlocal game values: exact, see-saw, and moment relaxations"};
  app.require_subcommand(1);

  auto* cmd_validate = app.add_subcommand("validate", "check a game file");
  std::string validate_file;
  cmd_validate->add_option("file", validate_file, "game file (JSON, schema 1)")->required();

  auto* cmd_builtin = app.add_subcommand("builtin", "emit a built-in game as JSON");
  std::string builtin_name;
  int builtin_repeat = 1;
  std::string builtin_out;
  cmd_builtin->add_option("name", builtin_name, "bb84 or mub43")->required();
  cmd_builtin->add_option("--repeat", builtin_repeat, "n-fold parallel repetition")
      ->check(CLI::PositiveNumber);
  cmd_builtin->add_option("--out", builtin_out, "output path (stdout when omitted)");

  auto* cmd_value = app.add_subcommand("value", "compute a game value");
  std::string value_method, value_game;
  int value_level = 1, value_dim_a = 2, value_dim_b = 2, value_restarts = 20,
      value_iters = 200;
  std::uint64_t value_seed = 0;
  double value_tol = 1e-7;
  bool value_json = false;
  std::string value_save_strategy;
  cmd_value->add_option("method", value_method, "unentangled, seesaw, npa, or two-question")
      ->required()
      ->check(CLI::IsMember({"unentangled", "seesaw", "npa", "two-question"}));
  cmd_value->add_option("game", value_game, "game file or builtin:name")->required();
  cmd_value->add_option("--level", value_level, "relaxation level k")
      ->check(CLI::PositiveNumber);
  cmd_value->add_option("--dim-a", value_dim_a, "Alice's local dimension")
      ->check(CLI::PositiveNumber);
  cmd_value->add_option("--dim-b", value_dim_b, "Bob's local dimension")
      ->check(CLI::PositiveNumber);
  cmd_value->add_option("--restarts", value_restarts, "see-saw restarts")
      ->check(CLI::PositiveNumber);
  cmd_value->add_option("--iters", value_iters, "iteration cap")->check(CLI::PositiveNumber);
  cmd_value->add_option("--seed", value_seed, "see-saw seed");
  cmd_value->add_option("--tol", value_tol, "solver or stopping tolerance");
  cmd_value->add_option("--save-strategy", value_save_strategy,
                        "write the best see-saw strategy to this path");
  cmd_value->add_flag("--json", value_json, "single-line JSON output");

  auto* cmd_bound = app.add_subcommand("bound", "closed-form bounds");
  std::string bound_method, bound_game;
  int bound_n = 0;
  bool bound_json = false;
  cmd_bound->add_option("method", bound_method, "tfkw")
      ->required()
      ->check(CLI::IsMember({"tfkw"}));
  cmd_bound->add_option("game", bound_game, "game file or builtin:name")->required();
  cmd_bound->add_option("-n,--repetitions", bound_n, "number of repetitions")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd_bound->add_flag("--json", bound_json, "single-line JSON output");

  auto* cmd_export = app.add_subcommand("export-sdp", "write the level-k moment relaxation");
  std::string export_game, export_out;
  int export_level = 0;
  cmd_export->add_option("game", export_game, "game file or builtin:name")->required();
  cmd_export->add_option("--level", export_level, "relaxation level k")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd_export->add_option("--out", export_out, "output path")->required();

  try {
    app.parse(argc, argv);
    if (*cmd_validate) return run_validate(validate_file);
    if (*cmd_builtin) return run_builtin(builtin_name, builtin_repeat, builtin_out);
    if (*cmd_value) {
      if (value_method == "unentangled")
        return run_value_unentangled(value_game, value_json);
      if (value_method == "seesaw")
        return run_value_seesaw(value_game, value_dim_a, value_dim_b, value_restarts,
                                value_iters, value_seed, value_tol, value_save_strategy,
                                value_json);
      if (value_method == "npa")
        return run_value_npa(value_game, value_level, value_tol, value_iters, value_json);
      return run_value_two_question(value_game, value_json);
    }
    if (*cmd_bound) return run_bound_tfkw(bound_game, bound_n, bound_json);
    if (*cmd_export) return run_export_sdp(export_game, export_level, export_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  } catch (const CliExit& e) {
    return e.code;
  } catch (const BudgetError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
