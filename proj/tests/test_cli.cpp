#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "fcpde_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

int run(const std::string& args) {
  const std::string cmd = std::string(FCPDE_CLI) + " " + args + " > " + path("stdout.txt") + " 2> " + path("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// A case config with a tiny training budget so end-to-end runs stay fast.
std::string quick_config(const std::string& tag, const std::string& extra = "") {
  const std::string file = path(tag + ".cfg");
  std::ofstream(file) << slurp(std::string(FCPDE_CONFIGS) + "/" + tag + ".cfg")
                      << "train.qn_iters = 2\ntrain.adam_iters = 2\ntrain.max_rounds = 1\n"
                      << extra;
  return file;
}

}  // namespace

TEST_CASE("generate, train, eval and export round trip on every case") {
  for (const char* tag : {"poisson1d_constant", "poisson1d_neumann", "poisson1d_sine", "poisson1d_varying",
                          "poisson1d_nonlinear", "poisson2d_cubic", "poisson2d_sine", "helmholtz_reciprocal",
                          "helmholtz_sine", "wave", "navier_stokes"}) {
    CAPTURE(tag);
    const std::string cfg = quick_config(tag);
    const std::string t = tag;
    REQUIRE(run("generate --config " + cfg + " --out " + path(t + ".data")) == 0);
    const int trained = run("train --config " + cfg + " --dataset " + path(t + ".data") + " --model " + path(t + ".model"));
    CHECK((trained == 0 || trained == 3));
    CHECK(fs::exists(path(t + ".model")));
    CHECK(slurp(path(t + ".model.history.csv")).rfind("global_step,stage,loss\n", 0) == 0);
    REQUIRE(run("eval --model " + path(t + ".model") + " --config " + cfg + " --tests 2 --out " + path(t + ".json")) == 0);
    const auto report = nlohmann::json::parse(slurp(path(t + ".json")));
    CHECK(report["case"] == t);
    CHECK(report["tests"].size() == 2);
    const std::string dump = (workdir() / (t + "_dumps") / report["tests"][0]["dump"].get<std::string>()).string();
    CHECK(run("export-plot " + dump + " --out " + path(t + ".plot")) == 0);
    CHECK(fs::file_size(path(t + ".plot")) > 0);
  }
}

TEST_CASE("generate reports sample count and grid") {
  REQUIRE(run("generate --config " + std::string(FCPDE_CONFIGS) + "/poisson1d_constant.cfg --out " +
              path("c.data")) == 0);
  CHECK(slurp(path("stdout.txt")).find("4 samples") != std::string::npos);
  CHECK(slurp(path("stdout.txt")).find("128") != std::string::npos);
  CHECK(slurp(path("c.data")).rfind("grid=1:128\n", 0) == 0);
  REQUIRE(run("generate --config " + std::string(FCPDE_CONFIGS) + "/helmholtz_sine.cfg --out " + path("h.data")) == 0);
  CHECK(slurp(path("stdout.txt")).find("4 samples") != std::string::npos);
  CHECK(slurp(path("h.data")).rfind("grid=2:32x32\n", 0) == 0);
}

TEST_CASE("reruns are byte-identical") {
  const std::string cfg = quick_config("poisson1d_sine", "case.noise = 0.15\n");
  REQUIRE(run("generate --config " + cfg + " --out " + path("a.data")) == 0);
  REQUIRE(run("generate --config " + cfg + " --out " + path("b.data")) == 0);
  CHECK(slurp(path("a.data")) == slurp(path("b.data")));
  run("train --config " + cfg + " --dataset " + path("a.data") + " --model " + path("a.model"));
  run("train --config " + cfg + " --dataset " + path("b.data") + " --model " + path("b.model"));
  CHECK(slurp(path("a.model")) == slurp(path("b.model")));
  REQUIRE(run("eval --model " + path("a.model") + " --config " + cfg + " --out " + path("a.json")) == 0);
  REQUIRE(run("eval --model " + path("b.model") + " --config " + cfg + " --out " + path("b.json")) == 0);
  CHECK(slurp(path("a.json")) == slurp(path("b.json")));
  REQUIRE(run("generate --config " + cfg + " --seed 7 --out " + path("c.data")) == 0);
  CHECK(slurp(path("a.data")) != slurp(path("c.data")));
}

TEST_CASE("an untrained model scores badly but reports cleanly") {
  const std::string cfg = quick_config("poisson1d_constant", "train.qn_iters = 0\ntrain.adam_iters = 0\n");
  REQUIRE(run("generate --config " + cfg + " --out " + path("u.data")) == 0);
  CHECK(run("train --config " + cfg + " --dataset " + path("u.data") + " --model " + path("u.model")) == 3);
  REQUIRE(run("eval --model " + path("u.model") + " --config " + cfg + " --tests 16 --out " + path("u.json")) == 0);
  const auto report = nlohmann::json::parse(slurp(path("u.json")));
  CHECK(report["n_tests"] == 16);
  CHECK(report["mean_mse"].get<double>() > 1e-2);
}

TEST_CASE("plot export formats") {
  const std::string sine = quick_config("poisson1d_sine");
  REQUIRE(run("generate --config " + sine + " --out " + path("s.data")) == 0);
  run("train --config " + sine + " --dataset " + path("s.data") + " --model " + path("s.model"));
  REQUIRE(run("eval --model " + path("s.model") + " --config " + sine + " --tests 1 --out " + path("s.json")) == 0);
  REQUIRE(run("export-plot " + path("s_dumps/test0.dump") + " --out " + path("s.plot")) == 0);
  std::istringstream lines(slurp(path("s.plot")));
  int rows = 0;
  for (std::string line; std::getline(lines, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream cols(line);
    int n = 0;
    for (double v; cols >> v;) ++n;
    CHECK(n == 4);
    ++rows;
  }
  CHECK(rows == 32);

  const std::string helm = quick_config("helmholtz_sine");
  REQUIRE(run("generate --config " + helm + " --out " + path("hs.data")) == 0);
  run("train --config " + helm + " --dataset " + path("hs.data") + " --model " + path("hs.model"));
  REQUIRE(run("eval --model " + path("hs.model") + " --config " + helm + " --tests 1 --out " + path("hs.json")) == 0);
  REQUIRE(run("export-plot " + path("hs_dumps/test0.dump") + " --out " + path("hs.plot")) == 0);
  std::istringstream mat(slurp(path("hs.plot")));
  int headers = 0, matrix_rows = 0;
  for (std::string line; std::getline(mat, line);) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      ++headers;
      continue;
    }
    std::istringstream cols(line);
    int n = 0;
    for (double v; cols >> v;) ++n;
    CHECK(n == 32);
    ++matrix_rows;
  }
  CHECK(headers == 3);
  CHECK(matrix_rows == 3 * 32);
}

TEST_CASE("exit codes separate config, I/O and convergence failures") {
  std::ofstream(path("bad.cfg")) << "case.equation = heat\n";
  CHECK(run("generate --config " + path("bad.cfg") + " --out " + path("bad.data")) == 2);
  CHECK(slurp(path("stderr.txt")).find("case.equation") != std::string::npos);
  CHECK_FALSE(fs::exists(path("bad.data")));

  CHECK(run("generate --out " + path("x.data")) == 2);
  CHECK(run("generate --config " + path("missing.cfg") + " --out " + path("x.data")) == 4);
  const std::string cfg = quick_config("poisson1d_sine");
  CHECK(run("train --config " + cfg + " --dataset " + path("missing.data") + " --model " + path("x.model")) == 4);

  REQUIRE(run("generate --config " + cfg + " --out " + path("m.data")) == 0);
  const std::string other = quick_config("poisson1d_constant");
  CHECK(run("train --config " + other + " --dataset " + path("m.data") + " --model " + path("x.model")) == 4);
  CHECK_FALSE(fs::exists(path("x.model")));

  // architecture mismatch between a sine model and the varying case
  run("train --config " + cfg + " --dataset " + path("m.data") + " --model " + path("m.model"));
  CHECK(run("eval --model " + path("m.model") + " --config " + quick_config("poisson1d_varying") + " --out " +
            path("m.json")) == 2);
}

TEST_CASE("an empty dump is an error and leaves no output") {
  std::ofstream(path("empty.dump")).close();
  CHECK(run("export-plot " + path("empty.dump") + " --out " + path("empty.plot")) == 4);
  CHECK_FALSE(fs::exists(path("empty.plot")));
  CHECK_FALSE(fs::exists(path("empty.plot.tmp")));
}
