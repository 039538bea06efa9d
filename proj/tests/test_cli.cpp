// Drives the robustmean executable named by $ROBUSTMEAN_CLI.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const char* exe = std::getenv("ROBUSTMEAN_CLI");
  REQUIRE_MESSAGE(exe != nullptr, "ROBUSTMEAN_CLI is not set");
  const std::string cmd = std::string(exe) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("robustmean_cli_" + std::to_string(getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write(const std::string& name, const std::string& text) {
  const auto path = scratch() / name;
  std::ofstream(path) << text;
  return path.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> parse_row(const std::string& line) {
  std::vector<double> v;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) v.push_back(std::stod(f));
  return v;
}

const std::string kSamples2d = "x,y\n0,0\n2,4\n1,2\n1,2\n";

// 200 points on a deterministic spiral around (1, -1).
std::string spiral() {
  std::string text;
  for (int i = 0; i < 200; ++i) {
    const double r = 0.01 * i, a = 0.7 * i;
    text += std::to_string(1.0 + r * std::cos(a)) + "," + std::to_string(-1.0 + r * std::sin(a)) + "\n";
  }
  return text;
}

}  // namespace

TEST_CASE("estimate: mean and gmom") {
  const auto in = write("s2.csv", kSamples2d);
  auto r = cli("estimate --method mean --in " + in);
  CHECK(r.code == 0);
  CHECK(parse_row(r.out) == std::vector<double>{1.0, 2.0});

  r = cli("estimate --method gmom --blocks 1 --in " + in);
  CHECK(r.code == 0);
  CHECK(parse_row(r.out) == std::vector<double>{1.0, 2.0});
}

TEST_CASE("estimate: filter flags") {
  std::string text;
  for (int i = 0; i < 99; ++i) text += "0,0\n";
  text += "100,0\n";
  const auto in = write("outlier.csv", text);
  const auto r = cli("estimate --method filter --cov-bound 1 --stop-mode threshold --seed 3 --in " + in);
  CHECK(r.code == 0);
  const auto est = parse_row(r.out);
  REQUIRE(est.size() == 2);
  CHECK(est[1] == 0.0);

  const auto fixed = cli("estimate --method filter --stop-mode fixed_steps --steps 2 --in " + in);
  CHECK(fixed.code == 0);
  CHECK(cli("estimate --method filter --stop-mode sometimes --in " + in).code == 2);
  // A single survivor before the step budget is spent exhausts the filter.
  CHECK(cli("estimate --method filter --stop-mode fixed_steps --steps 99 --in " + in).code == 0);
  CHECK(cli("estimate --method coord --in " + write("tiny.csv", kSamples2d)).code == 3);

  const auto cfg = write("filter.json", R"({"cov_bound": 1, "stop_mode": {"kind": "capped", "steps": 5}, "seed": 3})");
  CHECK(cli("estimate --method filter --filter-config " + cfg + " --in " + in).out == r.out);
}

TEST_CASE("estimate: oracle, interval, srm, coord, net") {
  const auto line = write("line.csv", "-1\n0\n1\n10\n");
  auto r = cli("estimate --method oracle --true-mean 0 --radius 2 --in " + line);
  CHECK(r.code == 0);
  CHECK(parse_row(r.out) == std::vector<double>{0.0});
  CHECK(cli("estimate --method oracle --true-mean 50 --radius 1 --in " + line).code == 3);
  CHECK(cli("estimate --method oracle --in " + line).code == 2);

  const auto srm = write("srm.csv", "0\n0\n0\n100\n");
  r = cli("estimate --method srm --epsilon 0.25 --in " + srm);
  CHECK(r.code == 0);
  CHECK(parse_row(r.out) == std::vector<double>{0.0});

  const auto same = write("same.csv", "2\n2\n2\n2\n2\n2\n2\n2\n2\n2\n");
  r = cli("estimate --method interval --epsilon 0 --delta 0.5 --in " + same);
  CHECK(r.code == 0);
  CHECK(parse_row(r.out) == std::vector<double>{2.0});
  CHECK(cli("estimate --method interval --epsilon 0.3 --in " + same).code == 2);

  const auto cloud = write("spiral.csv", spiral());
  CHECK(cli("estimate --method coord --in " + cloud).code == 0);
  r = cli("estimate --method net --inner filter --in " + cloud);
  CHECK(r.code == 0);
  const auto est = parse_row(r.out);
  REQUIRE(est.size() == 2);
  CHECK(std::hypot(est[0] - 1.0, est[1] + 1.0) < 1.0);
  CHECK(cli("estimate --method net --inner median --in " + cloud).code == 2);
}

TEST_CASE("estimate: usage errors exit with 2") {
  CHECK(cli("estimate --method nope --in x.csv").code == 2);
  CHECK(cli("estimate --method mean").code == 2);
  CHECK(cli("estimate --method mean --in /nonexistent.csv").code == 2);
  CHECK(cli("").code == 2);
  CHECK(cli("estimate --method mean --in " + write("nan.csv", "1\nnan\n")).code == 2);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("cover build writes a loadable cover") {
  const auto out = (scratch() / "cover.csv").string();
  CHECK(cli("cover build --p 2 --out " + out).code == 0);
  const auto text = slurp(out);
  const auto rows = std::count(text.begin(), text.end(), '\n');
  CHECK(rows >= 4);
  CHECK(rows <= 25);

  CHECK(cli("estimate --method net --cover " + out + " --in " + write("spiral.csv", spiral())).code == 0);
  CHECK(cli("cover build --p 4 --sparsity 3 --out " + out).code == 2);
}

TEST_CASE("bench run and summarize") {
  const auto cfg = write("bench.json", R"({
    "distribution": {"family": "lognormal", "p": 2},
    "methods": ["mean", {"name": "filter", "settings": {"steps": 3}}],
    "n_values": [30], "trials": 20, "master_seed": 5})");
  const auto a = (scratch() / "a.csv").string();
  const auto b = (scratch() / "b.csv").string();
  CHECK(cli("bench run --config " + cfg + " --out " + a).code == 0);
  CHECK(cli("bench run --threads 3 --config " + cfg + " --out " + b).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).rfind("method,family,n,p,delta,epsilon,trial_index,loss,failed\n", 0) == 0);

  auto r = cli("bench summarize --in " + a + " --delta 0.1");
  CHECK(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);
  r = cli("bench summarize --in " + a);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1 + 2 * 5);

  CHECK(cli("bench run --config " + write("bad.json", "{") + " --out " + a).code == 2);
  CHECK(cli("bench summarize --in " + cfg).code == 2);
}
