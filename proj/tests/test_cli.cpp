#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "rmtp/simulate.hpp"
#include "rmtp/stats.hpp"

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rmtp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = rmtp::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("predict: Ginibre Lyapunov moment") {
  auto r = cli({"predict", "--ensemble", "ginibre", "--gamma", "2", "--regime", "lyapunov", "--moments", "1,2"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["schema"] == "rmtp.predictions/1");
  auto p = j["predictions"][0];
  CHECK(p["statistic"] == "lln_moment_lyapunov");
  CHECK(p["k"] == 1);
  CHECK(p["value"].get<double>() == doctest::Approx(0.386294361).epsilon(1e-8));
  CHECK(p.contains("quadrature_error"));
  CHECK(p.contains("contour_spec"));
}

TEST_CASE("predict: point mass gives zero covariances") {
  auto r = cli({"predict", "--ensemble", "pointmass", "--x0", "0"});
  REQUIRE(r.code == 0);
  int covs = 0;
  auto j = nlohmann::json::parse(r.out);
  for (const auto& p : j["predictions"])
    if (p["statistic"] == "clt_cov_fixedM") {
      CHECK(p["value"].get<double>() == 0.0);
      ++covs;
    }
  CHECK(covs == 3);
}

TEST_CASE("predict: config errors exit with 2") {
  CHECK(cli({"predict", "--ensemble", "ginibre", "--gamma", "0.5"}).code == 2);
  write_file("rmtp_bad_cfg.json", R"({"ensemble": "ginibre", "gama": 2})");
  auto r = cli({"predict", "--config", "rmtp_bad_cfg.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown key 'gama'") != std::string::npos);
  write_file("rmtp_cfg.json", R"({"measure": {"kind": "jacobi", "alpha_hat": 1, "R_hat": 1}, "regime": "lyapunov", "moments": [1]})");
  auto ok = cli({"predict", "--config", "rmtp_cfg.json", "--no-covariances"});
  CHECK(ok.code == 0);
  auto j = nlohmann::json::parse(ok.out);
  CHECK(j["predictions"].size() == 1);
  CHECK(j["predictions"][0]["value"].get<double>() == doctest::Approx(-0.523248143765).epsilon(1e-9));
  write_file("rmtp_bad_measure.json", R"({"measure": {"kind": "ginibre", "gamma": 2, "extra": 1}})");
  CHECK(cli({"predict", "--config", "rmtp_bad_measure.json"}).code == 2);
  CHECK(cli({"predict", "--bogus-flag"}).code == 2);
  CHECK(cli({}).code == 2);
  std::remove("rmtp_bad_cfg.json");
  std::remove("rmtp_cfg.json");
  std::remove("rmtp_bad_measure.json");
}

TEST_CASE("simulate: seed is mandatory and output is reproducible") {
  std::vector<std::string> base{"simulate", "--ensemble", "jacobi", "--N", "3", "--alpha", "2", "--R", "4",
                                "--M", "6", "--trials", "5", "--backend", "bigfloat", "--checkpoints", "0.5"};
  CHECK(cli(base).code == 2);
  auto s1 = base, s2 = base;
  s1.insert(s1.end(), {"--seed", "17", "--threads", "1"});
  s2.insert(s2.end(), {"--seed", "17", "--threads", "3"});
  auto a = cli(s1), b = cli(s2);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("seed,stream,backend,M,N,sv1,sv2,sv3,cp0.5_sv1", 0) == 0);
  auto s3 = base;
  s3.insert(s3.end(), {"--seed", "18"});
  CHECK(cli(s3).out != a.out);
}

TEST_CASE("simulate: resume from a binary checkpoint") {
  std::remove("rmtp_resume.bin");
  std::vector<std::string> base{"simulate", "--ensemble", "ginibre", "--N", "3", "--gamma", "2", "--M", "8",
                                "--backend", "direct", "--seed", "5"};
  auto full = base;
  full.insert(full.end(), {"--trials", "7"});
  auto part = base;
  part.insert(part.end(), {"--trials", "4", "--resume", "rmtp_resume.bin", "--chunk", "3"});
  auto rest = base;
  rest.insert(rest.end(), {"--trials", "7", "--resume", "rmtp_resume.bin"});
  REQUIRE(cli(part).code == 0);
  auto r = cli(rest);
  REQUIRE(r.code == 0);
  CHECK(r.out == cli(full).out);
  auto other = base;
  other[other.size() - 1] = "6";
  other.insert(other.end(), {"--trials", "7", "--resume", "rmtp_resume.bin"});
  CHECK(cli(other).code == 2);
  std::remove("rmtp_resume.bin");
}

TEST_CASE("compare: matching data passes, shifted prediction fails, corrupted CSV is a config error") {
  auto sim = cli({"simulate", "--ensemble", "ginibre", "--N", "4", "--gamma", "2", "--M", "1", "--trials", "200",
                  "--backend", "direct", "--seed", "3", "--out", "rmtp_trials.csv"});
  REQUIRE(sim.code == 0);
  std::ifstream in("rmtp_trials.csv");
  auto rows = rmtp::read_trials_csv(in);
  auto ms = rmtp::empirical_moments(rows, {1}, rmtp::MomentScale::Raw);
  std::vector<double> x = ms.of(1);
  for (double& v : x) v /= 4;
  auto est = rmtp::mean_estimate(x);
  auto cov = rmtp::covariance_estimate(ms, 1, 1, false);
  auto doc = [&](double shift) {
    nlohmann::json j = {{"schema", "rmtp.predictions/1"},
                        {"measure", {{"kind", "ginibre"}, {"gamma", 2.0}}},
                        {"M", 1},
                        {"regime", "fixed"},
                        {"predictions",
                         {{{"statistic", "lln_moment_fixedM"}, {"k", 1}, {"l", 0}, {"value", est.value + shift * est.std_error}},
                          {{"statistic", "clt_cov_fixedM"}, {"k", 1}, {"l", 1}, {"value", cov.value}}}}};
    return j.dump();
  };
  write_file("rmtp_pred.json", doc(0.0));
  auto ok = cli({"compare", "rmtp_pred.json", "rmtp_trials.csv", "--out-json", "rmtp_report.json"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("lln_moment_fixedM[k=1]") != std::string::npos);
  CHECK(nlohmann::json::parse(read_file("rmtp_report.json"))["reports"].size() == 2);
  write_file("rmtp_pred.json", doc(5.0));
  CHECK(cli({"compare", "rmtp_pred.json", "rmtp_trials.csv"}).code == 1);
  std::string csv = read_file("rmtp_trials.csv");
  csv.replace(csv.find(',', csv.find('\n') + 1) + 1, 1, "q");
  write_file("rmtp_trials_bad.csv", csv);
  auto bad = cli({"compare", "rmtp_pred.json", "rmtp_trials_bad.csv"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 2") != std::string::npos);
  for (const char* f : {"rmtp_pred.json", "rmtp_trials.csv", "rmtp_trials_bad.csv", "rmtp_report.json"}) std::remove(f);
}

TEST_CASE("density output") {
  auto r = cli({"density", "--ensemble", "ginibre", "--gamma", "2", "--points", "4"});
  REQUIRE(r.code == 0);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,density");
  int n = 0;
  while (std::getline(is, line)) ++n;
  CHECK(n == 4);
  CHECK(cli({"density", "--ensemble", "ginibre", "--gamma", "2", "--kind", "lyapunov", "--points", "3"}).code == 0);
}

TEST_CASE("bessel-check smoke run") {
  auto r = cli({"bessel-check", "--spectra", "1"});
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["verdict"] == "pass");
  CHECK(j["contour_vs_direct_max_relative_error"].get<double>() < 1e-8);
}

TEST_CASE("process exit codes") {
  std::string exe = RMTP_CLI_PATH;
  int st = std::system((exe + " predict --ensemble ginibre --gamma 0.5 >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(st) == 2);
  st = std::system((exe + " predict --ensemble ginibre --gamma 2 --moments 1 >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(st) == 0);
}
