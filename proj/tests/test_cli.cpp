#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "doctest.h"
#include "sobotrace/tracelift.hpp"

using namespace sobotrace;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int status;
  std::string out, err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "sobotrace");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int status = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

/// Fresh scratch directory holding copies of the shipped configs.
struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("sobotrace_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (const auto& e : fs::directory_iterator(fs::path(SOBOTRACE_SOURCE_DIR) / "configs"))
      fs::copy_file(e.path(), dir / e.path().filename());
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir / name) << text; }
  std::size_t file_count() const {
    return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}));
  }
};

std::string read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("every shipped schema loads and the config examples validate") {
  for (const auto& name : cli::command_names()) CHECK_NOTHROW(cli::schema_text(name + ".json"));
  CHECK_NOTHROW(cli::validate("mollifier.json", json{{"dim", 1}, {"k", 2}, {"m", 2}}));
  CHECK_NOTHROW(cli::validate("problem.json",
                              json::parse(read(std::string(SOBOTRACE_SOURCE_DIR) + "/configs/neumann_problem.json"))));
  for (const auto& e : fs::directory_iterator(fs::path(SOBOTRACE_SOURCE_DIR) / "configs")) {
    const json j = json::parse(read(e.path().string()));
    if (!j.contains("command")) continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW(cli::validate("config.json", j));
    CHECK_NOTHROW(cli::validate(j["command"].get<std::string>() + ".json", j["parameters"]));
  }
}

TEST_CASE("schema violations name the offending value") {
  CHECK_THROWS_WITH_AS(cli::validate("mollifier.json", json{{"dim", 1}, {"k", 2}}), doctest::Contains("required"),
                       InvalidArgument);
  CHECK_THROWS_WITH_AS(cli::validate("mollifier.json", json{{"dim", 4}, {"k", 2}, {"m", 1}}),
                       doctest::Contains("'/dim'"), InvalidArgument);
  CHECK_THROWS_WITH_AS(cli::validate("seminorm.json", json{{"field", "f"}, {"s", 1.0}, {"p", 2}}),
                       doctest::Contains("'/s'"), InvalidArgument);
  // References into the shared definitions resolve.
  CHECK_THROWS_WITH_AS(
      cli::validate("trace-check.json", json{{"field", {{"modes", {{{"amplitude", 1}}}}}}, {"p", 2}}),
      doctest::Contains("'/field'"), InvalidArgument);
  CHECK_THROWS_AS(cli::execute("nope", json::object(), 1), InvalidArgument);
}

TEST_CASE("mollifier command reports moments below 1e-9") {
  const auto r = cli::execute("mollifier", {{"dim", 1}, {"k", 2}, {"m", 2}}, 1);
  CHECK(r.pass);
  CHECK(r.report["result"]["max_moment_residual"].get<double>() <= 1e-9);
  CHECK(r.report["result"]["moments"].size() == 3);
  CHECK(r.csv.rfind("r,phi\n", 0) == 0);
}

TEST_CASE("fourier command") {
  const auto r = cli::execute("fourier", {{"s", 0.5}, {"dim", 2}, {"single_mode", {{"shape", 512}}}}, 1);
  CHECK(r.pass);
  CHECK(r.report["result"]["single_mode"]["relative_error"].get<double>() <= 1e-2);
  CHECK(r.report["result"]["multiplier_bounds"]["rows"].size() == 8);
  CHECK_THROWS_AS(cli::execute("fourier", {{"s", 0.5}, {"dim", 1}, {"single_mode", {{"shape", 8}, {"mode", 4}}}}, 1),
                  InvalidArgument);
}

TEST_CASE("field arguments: trigonometric specs need a grid, files carry theirs") {
  const json field = {{"modes", {{{"wavevector", {1}}}}}};
  CHECK_THROWS_WITH_AS(cli::execute("seminorm", {{"field", field}, {"s", 0.5}, {"p", 2}}, 1),
                       doctest::Contains("needs 'grid'"), InvalidArgument);
  const json grid = {{"lo", {0}}, {"hi", {1}}, {"periodic", {true}}, {"shape", {64}}};
  const auto r = cli::execute("seminorm", {{"field", field}, {"grid", grid}, {"s", 0.5}, {"p", 2}}, 1);
  CHECK(r.pass);
  CHECK(r.report["result"]["seminorm"]["value"].get<double>() > 0.0);
  CHECK_THROWS_WITH_AS(
      cli::execute("seminorm", {{"field", field}, {"grid", grid}, {"s", 0.5}, {"p", 2}, {"sigma", {{"kind", "infinite"}, {"a", 1}}}}, 1),
      doctest::Contains("does not apply"), InvalidArgument);
}

TEST_CASE("lift then trace-check through field files") {
  Workspace ws;
  json params = json::parse(read(ws.path("lift.json")))["parameters"];
  params["field_output"] = "lifted.field";
  const auto lift = cli::execute("lift", params, 1, ws.dir.string());
  CHECK(lift.pass);
  REQUIRE(lift.files.size() == 1);
  CHECK(lift.files[0].path == ws.path("lifted.field"));
  CHECK(lift.report["result"]["trace_error"]["minus"].get<double>() < 1e-4);
  CHECK_FALSE(fs::exists(ws.path("lifted.field")));  // execute never writes

  const Invocation w = invoke({"run", ws.path("lift.json")});
  CHECK(w.status == cli::kOk);
  std::ofstream(ws.path("lifted.field"), std::ios::binary) << lift.files[0].content;
  const auto tc = cli::execute("trace-check", {{"field", "lifted.field"}, {"p", 2}}, 1, ws.dir.string());
  CHECK(tc.pass);
  CHECK(tc.report["result"]["reports"].size() == 3);
  CHECK_THROWS_WITH_AS(
      cli::execute("trace-check", {{"field", "lifted.field"}, {"p", 2}, {"eps", {0.1}}}, 1, ws.dir.string()),
      doctest::Contains("p = 1"), InvalidArgument);
}

TEST_CASE("exit statuses") {
  Workspace ws;
  SUBCASE("success writes report and CSV") {
    const Invocation r = invoke({"run", ws.path("pde_dirichlet.json")});
    CHECK(r.status == cli::kOk);
    CHECK(r.out.empty());
    const json rep = json::parse(read(ws.path("pde_dirichlet_report.json")));
    CHECK(rep["pass"] == true);
    CHECK(rep["result"]["diagnostics"]["converged"] == true);
    CHECK(fs::exists(ws.path("pde_dirichlet_solution.csv")));
  }
  SUBCASE("inequality violation") {
    json problem = json::parse(read(ws.path("dirichlet_problem.json")));
    problem["lagrangian"] = {{"preset", "concave"}, {"p", 2}};
    ws.write("concave.json", problem.dump());
    const Invocation r = invoke({"pde", "--problem", ws.path("concave.json")});
    CHECK(r.status == cli::kViolation);
    CHECK(json::parse(r.out)["result"]["admissibility"]["pass"] == false);
  }
  SUBCASE("malformed config leaves no output") {
    const std::size_t before = ws.file_count();
    ws.write("bad.json", R"({"command": "pde", "output": "out.json", "parameters": {"problem": "dirichlet_problem.json", "x": 1}})");
    Invocation r = invoke({"run", ws.path("bad.json")});
    CHECK(r.status == cli::kInvalid);
    CHECK(r.out.empty());
    CHECK(r.err.find("additionalProperties") != std::string::npos);
    ws.write("broken.json", R"({"command": )");
    CHECK(invoke({"run", ws.path("broken.json")}).status == cli::kInvalid);
    ws.write("unknown.json", R"({"command": "frobnicate", "parameters": {}})");
    CHECK(invoke({"run", ws.path("unknown.json")}).status == cli::kInvalid);
    CHECK(invoke({"mollifier", "--dim", "1", "--k", "2"}).status == cli::kInvalid);
    CHECK(invoke({"seminorm", "--field", "x", "--s", "0.5", "--p", "2", "--sigma", "wide"}).status == cli::kInvalid);
    CHECK(invoke({"seminorm", "--field", ws.path("missing.field"), "--s", "0.5", "--p", "2"}).status == cli::kInvalid);
    CHECK(ws.file_count() == before + 3);  // only the three configs written above
  }
  SUBCASE("non-convergence leaves no output") {
    json problem = json::parse(read(ws.path("dirichlet_problem.json")));
    problem["solver"] = {{"max_iterations", 2}, {"cross_check", false}};
    ws.write("slow.json", problem.dump());
    const Invocation r = invoke({"pde", "--problem", ws.path("slow.json"), "-o", ws.path("slow_out.json")});
    CHECK(r.status == cli::kNumerical);
    CHECK(r.err.find("did not converge") != std::string::npos);
    CHECK_FALSE(fs::exists(ws.path("slow_out.json")));
  }
  SUBCASE("incompatible Neumann data is an argument error") {
    json problem = json::parse(read(ws.path("neumann_problem.json")));
    problem["h_plus"] = {{"constant", 2.0}};
    ws.write("incompatible.json", problem.dump());
    const Invocation r = invoke({"pde", "--problem", ws.path("incompatible.json")});
    CHECK(r.status == cli::kInvalid);
    CHECK(r.err.find("compatibility") != std::string::npos);
  }
  SUBCASE("help") { CHECK(invoke({"--help"}).status == cli::kOk); }
}

TEST_CASE("reports are byte-identical across runs") {
  Workspace ws;
  const Invocation a = invoke({"run", ws.path("seminorm.json")});
  const Invocation b = invoke({"run", ws.path("seminorm.json")});
  CHECK(a.status == cli::kOk);
  CHECK(a.out == b.out);
  const Invocation c = invoke({"witness", "--kind", "vanishing"});
  const Invocation d = invoke({"witness", "--kind", "vanishing"});
  CHECK(c.status == cli::kOk);
  CHECK(c.out == d.out);
  const Invocation e = invoke({"suite", "--seed", "3", "--only", "5", "10"});
  const Invocation f = invoke({"suite", "--seed", "3", "--only", "5", "10"});
  CHECK(e.status == cli::kOk);
  CHECK(e.out == f.out);
  CHECK(json::parse(e.out)["result"]["criteria"].size() == 2);
}
