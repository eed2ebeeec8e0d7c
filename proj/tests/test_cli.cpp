#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() /
          ("sqcir_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  static int& counter() {
    static int n = 0;
    return n;
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name, std::ios::binary) << text;
    return dir / name;
  }
  Result run(const std::string& args) const {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + SQCIR_CLI_PATH + "\" " + args + " >\"" +
                            out.string() + "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, slurp(out), slurp(err)};
  }
};

}  // namespace

TEST_CASE("analyze prints the stability report") {
  Sandbox box;
  const auto cfg = box.write("t1.json", R"({"preset":"table1"})");
  const auto r = box.run("analyze --config " + cfg.string());
  REQUIRE(r.code == 0);
  const auto rep = nlohmann::json::parse(r.out);
  CHECK(rep["kind"] == "analyze");
  CHECK(std::abs(rep["stability"]["r0_paper"].get<double>() - 200.0) <= 1e-12);
  CHECK(rep["stability"]["classification"] == "unstable");
}

TEST_CASE("invalid config exits 1 and names the field") {
  Sandbox box;
  const auto cfg = box.write("bad.json", R"({"preset":"table1","params":{"phi":-0.1}})");
  const auto r = box.run("analyze --config " + cfg.string());
  CHECK(r.code == 1);
  CHECK(r.err.find("phi") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("missing config file exits 1") {
  Sandbox box;
  const auto r = box.run("analyze --config " + (box.dir / "absent.json").string());
  CHECK(r.code == 1);
  CHECK(r.err.find("absent.json") != std::string::npos);
}

TEST_CASE("usage errors exit 1 with help on stderr") {
  Sandbox box;
  const auto cfg = box.write("t1.json", R"({"preset":"table1"})");
  auto r = box.run("frobnicate");
  CHECK(r.code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);
  r = box.run("analyze --config " + cfg.string() + " --bogus");
  CHECK(r.code == 1);
  r = box.run("sweep --config " + cfg.string() + " --from 0.1");
  CHECK(r.code == 1);
  CHECK(r.err.find("--to") != std::string::npos);
  r = box.run("sweep --config " + cfg.string() + " --param gamma --from 0.1 --to 0.2");
  CHECK(r.code == 1);
  r = box.run("mc --config " + cfg.string() + " --runs 0");
  CHECK(r.code == 1);
  r = box.run("");
  CHECK(r.code == 1);
}

TEST_CASE("version flag") {
  Sandbox box;
  const auto r = box.run("--version");
  CHECK(r.code == 0);
  CHECK(r.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("runtime failure exits 2") {
  Sandbox box;
  const auto cfg = box.write("h.json", R"({"preset":"fig-peak","integrator":{"h":2}})");
  const auto r = box.run("simulate --config " + cfg.string());
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
}

TEST_CASE("simulate writes a trajectory CSV") {
  Sandbox box;
  const auto cfg = box.write("s.json", R"({"preset":"fig-sim","integrator":{"tf":2}})");
  const auto out = box.dir / "traj.csv";
  const auto r = box.run("simulate --config " + cfg.string() + " --out " + out.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  const auto text = slurp(out);
  CHECK(text.rfind("t,S,Q,C,I,R,epsilon\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 202);
}

TEST_CASE("sweep writes one row per grid point") {
  Sandbox box;
  const auto cfg = box.write("s.json", R"({"preset":"table1","integrator":{"tf":50}})");
  const auto r = box.run("sweep --config " + cfg.string() + " --from 0.0001 --to 0.001 --steps 4");
  REQUIRE(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 5);
  CHECK(r.out.rfind("epsilon,r0_paper,", 0) == 0);
}

TEST_CASE("mc is reproducible for a fixed seed") {
  Sandbox box;
  const auto cfg = box.write("m.json", R"({"preset":"table1","integrator":{"tf":40}})");
  const auto a = box.dir / "a.json";
  const auto b = box.dir / "b.json";
  REQUIRE(box.run("mc --config " + cfg.string() + " --runs 20 --seed 7 --out " + a.string()).code == 0);
  REQUIRE(box.run("mc --config " + cfg.string() + " --runs 20 --seed 7 --out " + b.string()).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(fs::exists(box.dir / "a.runs.csv"));
  CHECK(slurp(box.dir / "a.runs.csv") == slurp(box.dir / "b.runs.csv"));
  const auto rep = nlohmann::json::parse(slurp(a));
  CHECK(rep["seed"] == 7);
  CHECK(rep["per_run"].size() == 20);

  const auto c = box.dir / "c.json";
  REQUIRE(box.run("mc --config " + cfg.string() + " --runs 20 --seed 8 --out " + c.string()).code == 0);
  CHECK(slurp(a) != slurp(c));
}

TEST_CASE("gen-data output feeds fit") {
  Sandbox box;
  const auto cfg = box.write("f.json", R"({"preset":"table1","integrator":{"tf":30}})");
  const auto data = box.dir / "obs.csv";
  REQUIRE(box.run("gen-data --config " + cfg.string() + " --out " + data.string()).code == 0);
  CHECK(slurp(data).rfind("t,cumulative\n1,", 0) == 0);
  const auto r = box.run("fit --config " + cfg.string() + " --data " + data.string() +
                         " --free epsilon --seed 4");
  REQUIRE(r.code == 0);
  const auto rep = nlohmann::json::parse(r.out);
  CHECK(std::abs(rep["theta"]["epsilon"].get<double>() - 0.03) <= 1e-3);
  CHECK(rep["seed"] == 4);

  const auto broken = box.write("broken.csv", "t,cumulative\n1,2\nx,3\n");
  const auto bad = box.run("fit --config " + cfg.string() + " --data " + broken.string());
  CHECK(bad.code == 1);
  CHECK(bad.err.find("line 3") != std::string::npos);
}
