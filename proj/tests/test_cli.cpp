#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(PERSLAB_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("perslab_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("cli: exact-p prints the value and writes one row") {
  TempDir dir;
  const auto r = run("exact-p --family simple --n 3 --out " + dir / "p.csv");
  CHECK(r.status == 0);
  CHECK(r.out == "3/8\n");
  CHECK(slurp(dir / "p.csv") == "spec_id,n,quantity,value_num,value_den\nsimple,3,pN,3,8\n");
  CHECK(fs::exists(dir / "p.csv.manifest"));
}

TEST_CASE("cli: spitzer and prop2") {
  TempDir dir;
  const auto q = run("spitzer --probs half --n 3 --out " + dir / "q.csv");
  CHECK(q.status == 0);
  CHECK(q.out == "5/16\n");
  const auto p = run("prop2 --bspec correlated-coin --n 1 --out " + dir / "p2.csv");
  CHECK(p.status == 0);
  CHECK(p.out.find("1 1 1/2 1/4 1/2 1/4 PASS") != std::string::npos);
}

TEST_CASE("cli: manifests reproduce the CSV byte for byte") {
  TempDir dir;
  REQUIRE(run("mc-p --family laplace --grid 8,16 --samples 2000 --seed 4 --out " + dir / "a.csv").status == 0);
  std::string manifest = slurp(dir / "a.csv.manifest");
  CHECK(manifest.rfind("# perslab ", 0) == 0);
  const auto b = dir / "b.csv";
  REQUIRE(run("--config " + dir / "a.csv.manifest" + " mc-p --out " + b).status == 0);
  CHECK(slurp(dir / "a.csv") == slurp(b));
}

TEST_CASE("cli: exit codes") {
  TempDir dir;
  CHECK(run("exact-p --n notanumber").status == 2);
  CHECK(run("no-such-command").status == 2);
  CHECK(run("exact-bridge --n 3 --out " + dir / "x.csv").status == 2);
  {
    std::ofstream cfg(dir / "bad.ini");
    cfg << "[mc-p]\nbogus = 1\n";
  }
  CHECK(run("--config " + dir / "bad.ini").status == 2);
  CHECK(run("prop2 --bspec asymmetric-x --n 3 --assert --out " + dir / "p.csv").status == 0);
  CHECK(run("eta-scaling --family heavy --n 64 --samples 50 --assert --out " + dir / "e.csv").status == 1);
}

TEST_CASE("cli: seed from the environment") {
  TempDir dir;
  REQUIRE(run("mc-p --family laplace --n 8 --samples 1000 --seed 77 --out " + dir / "a.csv").status == 0);
  REQUIRE(run("mc-p --family laplace --n 8 --samples 1000 --out " + dir / "b.csv").status == 0);
  const std::string env = "PERSLAB_SEED=77 ";
  const std::string cmd = env + PERSLAB_CLI + " mc-p --family laplace --n 8 --samples 1000 --out " + dir / "c.csv" +
                          " >/dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "c.csv"));
  CHECK(slurp(dir / "a.csv") != slurp(dir / "b.csv"));
}

TEST_CASE("cli: scaling-report in exact mode") {
  TempDir dir;
  const auto r = run("scaling-report --family simple --mode exact --grid 16,23,32,45,64,91,128 --out " + dir / "s.csv");
  CHECK(r.status == 0);
  CHECK(r.out.find("slope -0.24") != std::string::npos);
  CHECK(slurp(dir / "s.csv").find("pN_exact") != std::string::npos);
}
