#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <set>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run_cli(const std::string& args, const fs::path& dir) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd =
      std::string("\"") + FROST_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("frost_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::regex kErrorLine(R"(error: kind=[a-z_]+ message="([^"\\]|\\.)*"\n)");

}  // namespace

TEST_CASE("unknown method token is a usage error") {
  const auto dir = fresh_dir("usage");
  const auto r = run_cli("eval --bank nowhere --data nowhere --methods avg,kriging --out r.json", dir);
  CHECK(r.code == 2);
  CHECK(std::regex_match(r.err, kErrorLine));
  CHECK(r.err.find("kind=usage") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("missing required options and unknown subcommands are usage errors") {
  const auto dir = fresh_dir("missing");
  auto r = run_cli("folds", dir);
  CHECK(r.code == 2);
  CHECK(std::regex_match(r.err, kErrorLine));
  r = run_cli("frobnicate", dir);
  CHECK(r.code == 2);
  fs::remove_all(dir);
}

TEST_CASE("missing input files are reported on one line") {
  const auto dir = fresh_dir("missing_input");
  const auto r = run_cli("folds --data \"" + (dir / "none.bin").string() + "\" --out x.json", dir);
  CHECK(r.code == 3);
  CHECK(std::regex_match(r.err, kErrorLine));
  fs::remove_all(dir);
}

TEST_CASE("folds on 75 station ids") {
  const auto dir = fresh_dir("folds");
  fs::create_directories(dir / "stations");
  {
    std::ofstream idx(dir / "stations" / "stations.csv");
    idx << "id,lon,lat\n";
    for (int i = 1; i <= 75; ++i) idx << "S" << i << "," << 148.0 + 0.01 * i << ",-34.0\n";
  }
  const auto out = dir / "folds.json";
  const auto r = run_cli("folds --stations \"" + (dir / "stations").string() + "\" --seed 9 --out \"" + out.string() + "\"", dir);
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j.at("seed") == 9);
  REQUIRE(j.at("folds").size() == 5);
  std::set<std::string> seen;
  for (const auto& f : j.at("folds")) {
    CHECK(f.size() == 15);
    for (const auto& id : f) seen.insert(id.get<std::string>());
  }
  CHECK(seen.size() == 75);

  const auto again = dir / "again.json";
  run_cli("folds --stations \"" + (dir / "stations").string() + "\" --seed 9 --out \"" + again.string() + "\"", dir);
  CHECK(slurp(out) == slurp(again));
  fs::remove_all(dir);
}

TEST_CASE("compare writes a p-value matrix") {
  const auto dir = fresh_dir("compare");
  const char* grid_a = "ncols 3\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n1 2 3\n";
  const char* grid_b = "ncols 3\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n2 3 4\n";
  std::ofstream(dir / "a.asc") << grid_a;
  std::ofstream(dir / "b.asc") << grid_b;
  const auto r = run_cli("compare --rasters \"" + (dir / "a.asc").string() + "\" \"" + (dir / "b.asc").string() +
                             "\" --labels A B --out \"" + (dir / "p.csv").string() + "\"",
                         dir);
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "p.csv") == ",A,B\nA,N/A,0.00\nB,0.00,N/A\n");
  const auto comma = run_cli("compare --rasters \"" + (dir / "a.asc").string() + "\" \"" + (dir / "b.asc").string() +
                                 "\" --labels A,B --out \"" + (dir / "q.csv").string() + "\"",
                             dir);
  REQUIRE(comma.code == 0);
  CHECK(slurp(dir / "q.csv") == slurp(dir / "p.csv"));
  fs::remove_all(dir);
}
