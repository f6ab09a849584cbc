#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "xnlg/games.hpp"
#include "xnlg/serialization.hpp"

using namespace xnlg;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

// Runs the installed binary through the shell; stderr is folded into the
// captured stream unless the caller redirects it.
RunResult run_cli(const std::string& args, bool combine_stderr = true) {
  std::string cmd = std::string("\"") + XNLG_CLI_PATH + "\" " + args;
  if (combine_stderr) cmd += " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) res.out.append(buf, n);
  int status = pclose(pipe);
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string temp_path(const char* name) {
  return std::string("/tmp/xnlg_cli_") + std::to_string(getpid()) + "_" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace

TEST_CASE("unentangled value of the builtin qubit game") {
  RunResult r = run_cli("value unentangled builtin:bb84");
  CHECK(r.code == 0);
  CHECK(r.out.find("0.85355339059327") != std::string::npos);
  CHECK(r.out.find("exact") != std::string::npos);

  RunResult j = run_cli("value unentangled builtin:bb84 --json 2>/dev/null", false);
  CHECK(j.code == 0);
  nlohmann::json doc = nlohmann::json::parse(j.out);
  CHECK(doc["method"] == "unentangled");
  CHECK(doc["status"] == "exact");
  CHECK(doc["value"].get<double>() == doctest::Approx(0.8535533905932737).epsilon(1e-12));
  CHECK(doc["parameters"]["game"] == "builtin:bb84");
  CHECK(doc["parameters"].contains("budget"));
}

TEST_CASE("two-question value matches the unentangled value") {
  RunResult r = run_cli("value two-question builtin:bb84 --json 2>/dev/null", false);
  CHECK(r.code == 0);
  nlohmann::json doc = nlohmann::json::parse(r.out);
  CHECK(doc["value"].get<double>() == doctest::Approx(0.8535533905932737).epsilon(1e-12));
  CHECK(doc["method"] == "two_question");

  // Extended games have no two-question form.
  std::string path = temp_path("ext.json");
  spit(path, serialization::to_json(games::monogamy_to_extended(games::bb84_game())));
  RunResult bad = run_cli("value two-question " + path);
  CHECK(bad.code == 1);
  CHECK(bad.out.find("monogamy") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("npa relaxation through the command line") {
  RunResult r = run_cli("value npa builtin:bb84 --level 1 --json 2>/dev/null", false);
  CHECK(r.code == 0);
  nlohmann::json doc = nlohmann::json::parse(r.out);
  CHECK(doc["status"] == "optimal");
  double v = doc["value"].get<double>();
  CHECK(v >= 0.8535533905932737 - 1e-6);
  CHECK(v <= 1.0 + 1e-9);
  CHECK(doc["parameters"]["level"] == "1");
  CHECK(doc["diagnostics"].contains("iterations"));
  CHECK(doc["diagnostics"].contains("primal_residual"));

  // An iteration cap too small to converge is a solver non-convergence.
  RunResult capped = run_cli("value npa builtin:bb84 --iters 2 --json 2>/dev/null", false);
  CHECK(capped.code == 2);
  nlohmann::json capped_doc = nlohmann::json::parse(capped.out);
  CHECK(capped_doc["status"] == "max_iterations");
}

TEST_CASE("closed-form bounds") {
  RunResult r = run_cli("bound tfkw builtin:bb84 -n 2");
  CHECK(r.code == 0);
  CHECK(r.out.find("0.72855339059327") != std::string::npos);
  CHECK(r.out.find("closed-form") != std::string::npos);

  RunResult mub = run_cli("bound tfkw builtin:mub43 -n 1 --json 2>/dev/null", false);
  CHECK(mub.code == 0);
  nlohmann::json doc = nlohmann::json::parse(mub.out);
  // 1/4 + (3/4) / sqrt(3) for the four-basis qutrit game.
  CHECK(doc["value"].get<double>() == doctest::Approx(0.6830127018922193).epsilon(1e-12));
  CHECK(doc["parameters"]["n"] == "1");
}

TEST_CASE("builtin emission round-trips through validate and the library") {
  std::string path = temp_path("bb84.json");
  RunResult w = run_cli("builtin bb84 --out " + path);
  CHECK(w.code == 0);
  RunResult v = run_cli("validate " + path);
  CHECK(v.code == 0);
  CHECK(v.out.find("valid: monogamy game") != std::string::npos);

  std::string text = slurp(path);
  serialization::LoadedGame g = serialization::game_from_json(text);
  CHECK(serialization::to_json(std::get<games::MonogamyGame>(g)) == text);

  // stdout emission is byte-identical to the file emission.
  RunResult direct = run_cli("builtin bb84 2>/dev/null", false);
  CHECK(direct.code == 0);
  CHECK(direct.out == text);
  std::remove(path.c_str());
}

TEST_CASE("repeated builtins stay valid") {
  std::string path = temp_path("bb84sq.json");
  RunResult w = run_cli("builtin bb84 --repeat 2 --out " + path);
  CHECK(w.code == 0);
  RunResult v = run_cli("validate " + path);
  CHECK(v.code == 0);
  CHECK(v.out.find("m=4, nx=4, na=4") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("invalid inputs exit with code 1 and name the problem") {
  std::string path = temp_path("broken.json");
  spit(path, "{\n  \"schema\": \"1\",\n  \"type\": ");
  RunResult parse = run_cli("validate " + path);
  CHECK(parse.code == 1);
  CHECK(parse.out.find("line") != std::string::npos);

  games::MonogamyGame g = games::bb84_game();
  g.pi = {0.45, 0.45};
  spit(path, serialization::to_json(g));
  RunResult pi = run_cli("validate " + path);
  CHECK(pi.code == 1);
  CHECK(pi.out.find("pi") != std::string::npos);

  g = games::bb84_game();
  g.set_effect(0, 0, CMatrix::zero(2, 2));
  spit(path, serialization::to_json(g));
  RunResult comp = run_cli("validate " + path);
  CHECK(comp.code == 1);
  CHECK(comp.out.find("question 0") != std::string::npos);

  RunResult missing = run_cli("value unentangled " + path);
  CHECK(missing.code == 1);

  RunResult unknown = run_cli("value unentangled builtin:chsh");
  CHECK(unknown.code == 1);
  CHECK(unknown.out.find("unknown builtin") != std::string::npos);

  RunResult badflag = run_cli("value unentangled builtin:bb84 --level 0");
  CHECK(badflag.code == 1);
  std::remove(path.c_str());
}

TEST_CASE("budget refusals exit with code 3") {
  std::string cmd = std::string("XNLG_BUDGET=10 \"") + XNLG_CLI_PATH +
                    "\" value unentangled builtin:mub43 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  int status = pclose(pipe);
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 3);
  CHECK(out.find("budget") != std::string::npos);

  // The same cap refuses a level-2 moment matrix.
  std::string cmd2 = std::string("XNLG_BUDGET=10 \"") + XNLG_CLI_PATH +
                     "\" value npa builtin:bb84 --level 2 2>&1";
  FILE* pipe2 = popen(cmd2.c_str(), "r");
  REQUIRE(pipe2 != nullptr);
  std::string out2;
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe2)) out2.append(buf, n);
  int status2 = pclose(pipe2);
  CHECK(WEXITSTATUS(status2) == 3);
  CHECK(out2.find("budget") != std::string::npos);
}

TEST_CASE("seesaw output is deterministic for a fixed seed") {
  std::string args =
      "value seesaw builtin:bb84 --restarts 2 --iters 10 --seed 7 --json 2>/dev/null";
  RunResult first = run_cli(args, false);
  RunResult second = run_cli(args, false);
  CHECK(first.code == 0);
  CHECK(first.out == second.out);
  nlohmann::json doc = nlohmann::json::parse(first.out);
  CHECK(doc["method"] == "seesaw");
  CHECK(doc["parameters"]["seed"] == "7");
  CHECK(doc["parameters"]["restarts"] == "2");
  CHECK(doc["value"].get<double>() >= 0.85355339059 - 1e-4);

  // The best strategy archives and reloads.
  std::string spath = temp_path("strategy.json");
  RunResult saved = run_cli("value seesaw builtin:bb84 --restarts 1 --iters 5 --seed 7 "
                            "--save-strategy " + spath + " --json 2>/dev/null", false);
  CHECK(saved.code == 0);
  strategies::Strategy s = serialization::strategy_from_json(slurp(spath));
  CHECK(s.m == 2);
  CHECK(serialization::to_json(s) == slurp(spath));
  std::remove(spath.c_str());
}

TEST_CASE("sdp export writes a loadable description") {
  std::string path = temp_path("export.sdp");
  RunResult r = run_cli("export-sdp builtin:bb84 --level 1 --out " + path);
  CHECK(r.code == 0);
  CHECK(r.out.find("wrote") != std::string::npos);

  std::istringstream in(slurp(path));
  int ncons = 0, nblocks = 0, dim = 0;
  in >> ncons >> nblocks >> dim;
  CHECK(ncons > 0);
  CHECK(nblocks == 1);
  CHECK(dim == 36);
  std::remove(path.c_str());
}
