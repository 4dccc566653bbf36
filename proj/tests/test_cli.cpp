// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunOut {
  int code = -1;
  std::string out;
};

std::string cli() {
  const char* p = std::getenv("SLACKDOWN_CLI");
  REQUIRE_MESSAGE(p != nullptr, "SLACKDOWN_CLI must point at the built binary");
  return p;
}

RunOut run(const std::string& args) {
  const std::string cmd = cli() + " " + args + " 2>/tmp/slackdown_cli_stderr.txt";
  RunOut r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (fgets(buf, sizeof buf, pipe) != nullptr) r.out += buf;
  const int status = pclose(pipe);
  r.code = WEXITSTATUS(status);
  return r;
}

std::string stderr_text() {
  std::ifstream in("/tmp/slackdown_cli_stderr.txt");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("slackdown_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const char* kFlagshipWorkload =
    R"({"meta":{},"ranks":[[{"kind":"app","cycles":2400000},{"kind":"mpi","cycles":0,"sync":"s"}],)"
    R"([{"kind":"app","cycles":7200000},{"kind":"mpi","cycles":0,"sync":"s"}]]})";

std::string flagship_cfg(const fs::path& dir) {
  return "workload = " + (dir / "w.json").string() +
         "\npolicy = countdown_dvfs\n"
         "timeout_us = 500\n"
         "low_freq_ghz = 1.2\n"
         "high_freq = 2.4\n"
         "turbo_table_ghz = 1:2.4,2:2.4\n"
         "power_table_w = 1.2:4,2.4:10\n"
         "power_uncore_w = 0\n"
         "out = " + (dir / "out").string() + "\n";
}

} // namespace

TEST_CASE("generate writes the expected phase count and is deterministic") {
  const fs::path dir = fresh_dir("gen");
  const std::string base = "generate balanced --ranks 4 --iters 100 --app-us 200 "
                           "--mpi-us 50 --jitter-pct 10 --seed 7 --out ";
  CHECK(run(base + (dir / "a.json").string()).code == 0);
  CHECK(run(base + (dir / "b.json").string()).code == 0);
  const std::string a = slurp(dir / "a.json");
  CHECK(a == slurp(dir / "b.json"));
  // 4 ranks x 100 iterations x (app + mpi)
  std::size_t count = 0, pos = 0;
  while ((pos = a.find("\"kind\"", pos)) != std::string::npos) {
    ++count;
    pos += 6;
  }
  CHECK(count == 800);
}

TEST_CASE("generate with one rank and sync phases fails") {
  const fs::path dir = fresh_dir("gen1");
  const RunOut r = run("generate balanced --ranks 1 --out " + (dir / "x.json").string());
  CHECK(r.code == 2);
  CHECK(stderr_text().find("2 ranks") != std::string::npos);
  CHECK(!fs::exists(dir / "x.json"));
}

TEST_CASE("simulate flagship emits the known report row") {
  const fs::path dir = fresh_dir("sim");
  write_file(dir / "w.json", kFlagshipWorkload);
  write_file(dir / "run.cfg", flagship_cfg(dir));
  const RunOut r = run("simulate --config " + (dir / "run.cfg").string());
  CHECK(r.code == 0);
  const std::string report = slurp(dir / "out" / "report.csv");
  CHECK(report.find("countdown_dvfs,500,3000,0.00,0.054,10.00,10.00") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "segments.csv"));
  CHECK(fs::exists(dir / "out" / "segments_baseline.csv"));
}

TEST_CASE("simulate a policy against itself gives zero deltas") {
  const fs::path dir = fresh_dir("self");
  write_file(dir / "w.json", kFlagshipWorkload);
  write_file(dir / "run.cfg", flagship_cfg(dir));
  const RunOut r = run("simulate --config " + (dir / "run.cfg").string() +
                       " --policy busy_wait");
  CHECK(r.code == 0);
  const std::string report = slurp(dir / "out" / "report.csv");
  CHECK(report.find(",0.00,0.06,0.00,0.00,") != std::string::npos);
}

TEST_CASE("missing workload file exits 2 with a message on stderr") {
  const fs::path dir = fresh_dir("missing");
  const RunOut r = run("simulate --workload " + (dir / "nope.json").string());
  CHECK(r.code == 2);
  CHECK(stderr_text().find("nope.json") != std::string::npos);
}

TEST_CASE("single-element sweep equals the simulate row") {
  const fs::path dir = fresh_dir("sweep1");
  write_file(dir / "w.json", kFlagshipWorkload);
  write_file(dir / "run.cfg", flagship_cfg(dir));
  CHECK(run("simulate --config " + (dir / "run.cfg").string()).code == 0);
  CHECK(run("sweep --config " + (dir / "run.cfg").string() + " --timeouts 500").code == 0);
  std::istringstream report(slurp(dir / "out" / "report.csv"));
  std::istringstream sweep(slurp(dir / "out" / "sweep.csv"));
  std::string rline, sline;
  std::getline(report, rline); // headers
  std::getline(sweep, sline);
  std::getline(report, rline);
  std::getline(sweep, sline);
  CHECK(sline == "timeout_us,500," + rline);
}

TEST_CASE("timeout above the longest MPI phase reproduces the baseline") {
  const fs::path dir = fresh_dir("bigto");
  write_file(dir / "w.json", kFlagshipWorkload);
  write_file(dir / "run.cfg", flagship_cfg(dir));
  const RunOut r = run("sweep --config " + (dir / "run.cfg").string() + " --timeouts 99999");
  CHECK(r.code == 0);
  const std::string sweep = slurp(dir / "out" / "sweep.csv");
  CHECK(sweep.find(",0.00,0.06,0.00,0.00,") != std::string::npos);
}

TEST_CASE("sweep requires exactly one parameter list") {
  const fs::path dir = fresh_dir("sweepbad");
  write_file(dir / "w.json", kFlagshipWorkload);
  write_file(dir / "run.cfg", flagship_cfg(dir));
  CHECK(run("sweep --config " + (dir / "run.cfg").string()).code == 2);
  CHECK(run("sweep --config " + (dir / "run.cfg").string() +
            " --timeouts 10 --spin-counts 5").code == 2);
}

TEST_CASE("analyze the four-pair quadrant example") {
  const fs::path dir = fresh_dir("analyze");
  std::ostringstream csv;
  csv << "rank,t0_us,t1_us,freq_ghz,duty,sleep,phase_index,phase_kind\n";
  int phase = 0;
  long t = 0;
  for (const auto [a, m] : {std::pair{600, 700}, {600, 100}, {100, 700}, {100, 100}}) {
    csv << "0," << t << ',' << t + a << ",2.4,1,active," << phase++ << ",app\n";
    t += a;
    csv << "0," << t << ',' << t + m << ",2.4,1,active," << phase++ << ",mpi\n";
    t += m;
  }
  write_file(dir / "segments.csv", csv.str());
  const RunOut r = run("analyze " + (dir / "segments.csv").string() + " --out " + dir.string());
  CHECK(r.code == 0);
  const std::string quad = slurp(dir / "quadrant.csv");
  CHECK(quad.find("0,I,1,") != std::string::npos);
  CHECK(quad.find("0,II,1,") != std::string::npos);
  CHECK(quad.find("0,III,1,") != std::string::npos);
  CHECK(quad.find("0,IV,1,") != std::string::npos);
}

TEST_CASE("analyze an empty segments file succeeds with empty outputs") {
  const fs::path dir = fresh_dir("analyze_empty");
  write_file(dir / "segments.csv",
             "rank,t0_us,t1_us,freq_ghz,duty,sleep,phase_index,phase_kind\n");
  const RunOut r = run("analyze " + (dir / "segments.csv").string() + " --out " + dir.string());
  CHECK(r.code == 0);
  CHECK(slurp(dir / "quadrant.csv") ==
        "rank,region,count,time_share_pct,mean_app_freq_ghz,mean_mpi_freq_ghz\n");
  CHECK(slurp(dir / "duration.csv") ==
        "rank,app_long_pct,app_short_pct,mpi_long_pct,mpi_short_pct\n");
}

TEST_CASE("analyze reports the malformed row number") {
  const fs::path dir = fresh_dir("analyze_bad");
  write_file(dir / "segments.csv",
             "rank,t0_us,t1_us,freq_ghz,duty,sleep,phase_index,phase_kind\n"
             "0,0,100,2.4,1,active,0,app\n"
             "0,100,oops,2.4,1,active,1,mpi\n");
  const RunOut r = run("analyze " + (dir / "segments.csv").string() + " --out " + dir.string());
  CHECK(r.code == 2);
  CHECK(stderr_text().find("row 3") != std::string::npos);
}

TEST_CASE("unknown config keys are rejected") {
  const fs::path dir = fresh_dir("badkey");
  write_file(dir / "w.json", kFlagshipWorkload);
  write_file(dir / "run.cfg", flagship_cfg(dir) + "bogus_key = 1\n");
  const RunOut r = run("simulate --config " + (dir / "run.cfg").string());
  CHECK(r.code == 2);
  CHECK(stderr_text().find("bogus_key") != std::string::npos);
}

TEST_CASE("reruns produce byte-identical outputs") {
  const fs::path dir = fresh_dir("det");
  write_file(dir / "w.json", kFlagshipWorkload);
  write_file(dir / "run.cfg", flagship_cfg(dir));
  CHECK(run("simulate --config " + (dir / "run.cfg").string()).code == 0);
  const std::string report1 = slurp(dir / "out" / "report.csv");
  const std::string segs1 = slurp(dir / "out" / "segments.csv");
  CHECK(run("simulate --config " + (dir / "run.cfg").string()).code == 0);
  CHECK(slurp(dir / "out" / "report.csv") == report1);
  CHECK(slurp(dir / "out" / "segments.csv") == segs1);
}

TEST_CASE("invalid workload content is a simulation failure (exit 1)") {
  const fs::path dir = fresh_dir("invalid");
  // One-member sync group passes the parser but fails validation.
  write_file(dir / "w.json",
             R"({"meta":{},"ranks":[[{"kind":"mpi","cycles":0,"sync":"s"}],)"
             R"([{"kind":"app","cycles":10}]]})");
  write_file(dir / "run.cfg", flagship_cfg(dir));
  const RunOut r = run("simulate --config " + (dir / "run.cfg").string());
  CHECK(r.code == 1);
  CHECK(stderr_text().find("validation") != std::string::npos);
}
