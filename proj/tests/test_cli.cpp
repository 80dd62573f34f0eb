#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "tshrink/harness.hpp"
#include "tshrink/lasso.hpp"
#include "tshrink/vb.hpp"
#include "tshrink_cli/cli.hpp"
#include "tshrink_cli/csv.hpp"

using namespace tshrink;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "tshrink");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("tshrink_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const char* value) : name_(name) { ::setenv(name, value, 1); }
  ~ScopedEnv() { ::unsetenv(name_); }

 private:
  const char* name_;
};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> cells;
  std::stringstream s(line);
  for (std::string cell; std::getline(s, cell, sep);) cells.push_back(cell);
  return cells;
}

std::vector<double> doubles(const Json& array) { return array.get<std::vector<double>>(); }

}  // namespace

TEST_CASE("help and unknown input") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"fit", "--help"}).out.find("--eb-sigma") != std::string::npos);
  CHECK(run({}).code == cli::kConfigError);
  CHECK(run({"frobnicate"}).code == cli::kConfigError);
  CHECK(run({"fit"}).code == cli::kConfigError);
}

TEST_CASE("input errors exit 2") {
  TempDir dir;
  const Outcome missing = run({"fit", "--input", dir.file("absent.csv")});
  CHECK(missing.code == cli::kInputError);
  CHECK(missing.err.find("input error") != std::string::npos);

  write_text(dir.file("ragged.csv"), "y,x1,x2\n1,2,3\n4,5\n");
  CHECK(run({"fit", "--input", dir.file("ragged.csv")}).code == cli::kInputError);
  write_text(dir.file("text.csv"), "y,x1\n1,abc\n2,3\n");
  CHECK(run({"fit", "--input", dir.file("text.csv")}).code == cli::kInputError);
  write_text(dir.file("header.csv"), "z,x1\n1,2\n");
  CHECK(run({"fit", "--input", dir.file("header.csv")}).code == cli::kInputError);
}

TEST_CASE("configuration errors exit 4") {
  TempDir dir;
  REQUIRE(run({"simulate", "--spec", "custom", "--n", "30", "--p", "8", "--sparsity", "2", "--output",
               dir.file("d.csv")})
              .code == 0);
  const std::string data = dir.file("d.csv");
  CHECK(run({"simulate", "--spec", "example9"}).code == cli::kConfigError);
  CHECK(run({"simulate", "--spec", "example1a", "--n", "10"}).code == cli::kConfigError);
  CHECK(run({"fit", "--input", data, "--level", "1.5"}).code == cli::kConfigError);
  CHECK(run({"fit", "--input", data, "--a0", "0.5"}).code == cli::kConfigError);
  CHECK(run({"fit", "--input", data, "--blocks", "9"}).code == cli::kConfigError);
  CHECK(run({"fit", "--input", data, "--preset", "other"}).code == cli::kConfigError);
  CHECK(run({"fit", "--input", data, "--init", "ridge"}).code == cli::kConfigError);
  CHECK(run({"fit", "--input", data, "--sigma", "2", "--eb-sigma"}).code == cli::kConfigError);
  CHECK(run({"fit", "--input", data, "--max-iters", "many"}).code == cli::kConfigError);
  CHECK(run({"benchmark", "--spec", "toyC", "--methods", "tvb,lasso"}).code == cli::kConfigError);
  CHECK(run({"compare-kl", "--reps", "0"}).code == cli::kConfigError);

  const ScopedEnv env("TSHRINK_SEED", "12x");
  const Outcome bad_seed = run({"simulate", "--spec", "toyC"});
  CHECK(bad_seed.code == cli::kConfigError);
  CHECK(bad_seed.err.find("TSHRINK_SEED") != std::string::npos);
}

TEST_CASE("fit report") {
  TempDir dir;
  REQUIRE(run({"simulate", "--spec", "custom", "--n", "60", "--p", "12", "--sparsity", "2", "--signal", "3",
               "--seed", "4", "--output", dir.file("d.csv"), "--truth", dir.file("truth.json")})
              .code == 0);
  const Outcome fit = run({"fit", "--input", dir.file("d.csv"), "--seed", "17"});
  REQUIRE(fit.code == 0);
  const Json report = Json::parse(fit.out);
  for (const char* key : {"command", "config", "predictors", "mu", "a", "b", "sigma", "selected", "selected_names",
                          "intervals", "elbo_trace", "iterations", "converged", "wall_time_sec"}) {
    CHECK_MESSAGE(report.contains(key), key);
  }
  CHECK(report["command"] == "fit");
  CHECK(report["config"]["seed"] == 17);
  CHECK(report["config"]["seed_source"] == "flag");
  CHECK(report["config"]["n"] == 60);
  CHECK(report["config"]["p"] == 12);
  CHECK(report["config"]["noise"] == "known");
  CHECK(report["config"]["init"]["method"] == "cv-lasso");
  CHECK(report["sigma"] == 1.0);
  CHECK(report["mu"].size() == 12);
  CHECK(report["predictors"][0] == "x1");
  CHECK(report["intervals"].size() == 12);
  CHECK(report["converged"] == true);

  // Both true signals are found.
  const Json truth = Json::parse(read_text(dir.file("truth.json")));
  const auto support = truth["support"].get<std::vector<Index>>();
  const auto selected = report["selected"].get<std::vector<Index>>();
  for (Index j : support) CHECK(std::find(selected.begin(), selected.end(), j) != selected.end());
  CHECK(report["selected_names"].size() == selected.size());

  const std::vector<double> trace = doubles(report["elbo_trace"]);
  for (std::size_t t = 1; t < trace.size(); ++t) CHECK(trace[t] <= trace[t - 1] + 1e-9 * std::abs(trace[t - 1]));

  const Outcome eb = run({"fit", "--input", dir.file("d.csv"), "--eb-sigma", "--output", dir.file("fit.json")});
  REQUIRE(eb.code == 0);
  CHECK(eb.out.empty());
  const Json eb_report = Json::parse(read_text(dir.file("fit.json")));
  CHECK(eb_report["config"]["noise"] == "empirical_bayes");
  CHECK(eb_report["sigma"].get<double>() != 1.0);
  CHECK(eb_report["sigma"].get<double>() > 0.5);
  CHECK(eb_report["sigma"].get<double>() < 2.0);
  CHECK(eb_report["config"]["seed_source"] == "default");
}

TEST_CASE("simulate then fit equals a direct fit on the generated data") {
  TempDir dir;
  REQUIRE(run({"simulate", "--spec", "custom", "--n", "50", "--p", "30", "--sparsity", "3", "--signal", "2",
               "--sigma", "0.7", "--seed", "9", "--replication", "2", "--output", dir.file("d.csv")})
              .code == 0);
  const Outcome fit = run({"fit", "--input", dir.file("d.csv"), "--sigma", "0.7"});
  REQUIRE(fit.code == 0);
  const Json report = Json::parse(fit.out);

  harness::ExperimentSpec spec;
  spec.name = "custom";
  spec.n = 50;
  spec.p = 30;
  spec.sparsity = 3;
  spec.rule = harness::SignalRule::RandomPositions;
  spec.signal_value = 2.0;
  spec.sigma = 0.7;
  spec.seed = 9;
  const harness::Replicate rep = harness::generate(spec, 2);

  const cli::CsvData csv = cli::read_regression_csv(dir.file("d.csv"));
  CHECK(csv.X == rep.data.X());
  CHECK(csv.Y == rep.data.Y());

  Hyperparameters hyper;
  hyper.bn = vb::default_rate(50, 30, hyper.a0, vb::ScalePreset::Default);
  hyper.sigma = 0.7;
  const FitResult direct = vb::fit(rep.data, hyper, harness::cv_lasso(rep.data).beta);
  const std::vector<double> mu = doubles(report["mu"]);
  const std::vector<double> a = doubles(report["a"]);
  const std::vector<double> b = doubles(report["b"]);
  for (Index j = 0; j < 30; ++j) {
    CHECK(mu[static_cast<std::size_t>(j)] == direct.state.mu[j]);
    CHECK(a[static_cast<std::size_t>(j)] == direct.state.a[j]);
    CHECK(b[static_cast<std::size_t>(j)] == direct.state.b[j]);
  }
  CHECK(doubles(report["elbo_trace"]) == direct.elbo_trace);
  CHECK(report["iterations"] == direct.iterations);
}

TEST_CASE("seed resolution") {
  TempDir dir;
  const std::string with_flag = run({"simulate", "--spec", "toyC", "--seed", "31"}).out;
  {
    const ScopedEnv env("TSHRINK_SEED", "31");
    const Outcome from_env = run({"simulate", "--spec", "toyC", "--truth", dir.file("t.json")});
    REQUIRE(from_env.code == 0);
    CHECK(from_env.out.substr(0, with_flag.size()) == with_flag);
    const Json truth = Json::parse(read_text(dir.file("t.json")));
    CHECK(truth["config"]["seed"] == 31);
    CHECK(truth["config"]["seed_source"] == "env");

    const Outcome flag_wins = run({"simulate", "--spec", "toyC", "--seed", "0"});
    CHECK(flag_wins.out == run({"simulate", "--spec", "toyC", "--seed", "0"}).out);
    CHECK(flag_wins.out != with_flag);
  }
  const Outcome fallback = run({"simulate", "--spec", "toyC"});
  CHECK(fallback.out == run({"simulate", "--spec", "toyC", "--seed", "0"}).out);
}

TEST_CASE("benchmark with one replication reports zero spread") {
  TempDir dir;
  const Outcome bench = run({"benchmark", "--spec", "toyC", "--reps", "1", "--seed", "3", "--records",
                             dir.file("records.csv")});
  REQUIRE(bench.code == 0);
  std::stringstream lines(bench.out);
  std::string header, row, extra;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(!std::getline(lines, extra));
  const auto names = split(header, ',');
  const auto cells = split(row, ',');
  REQUIRE(names.size() == cells.size());
  const std::vector<std::string> required = {"method",        "rmse_mean",       "rmse_sd",     "fdr_mean",
                                             "fdr_sd",        "tpr_mean",        "tpr_sd",      "cov_signal_mean",
                                             "cov_signal_sd", "cov_null_mean",   "cov_null_sd", "time_mean_sec",
                                             "time_sd_sec"};
  REQUIRE(names.size() >= required.size());
  CHECK(std::equal(required.begin(), required.end(), names.begin()));
  CHECK(cells[0] == "tvb");
  for (std::size_t k = 2; k <= 12; k += 2) CHECK_MESSAGE(std::stod(cells[k]) == 0.0, names[k]);
  CHECK(std::stod(cells[5]) == 1.0);

  const std::string records = read_text(dir.file("records.csv"));
  CHECK(records.find("0,tvb,1,") != std::string::npos);
}

TEST_CASE("compare-kl report") {
  const Outcome kl = run({"compare-kl", "--reps", "2", "--steps", "50", "--seed", "1"});
  REQUIRE(kl.code == 0);
  const Json report = Json::parse(kl.out);
  CHECK(report["command"] == "compare-kl");
  CHECK(report["config"]["steps"] == 50);
  CHECK(report["failures"] == 0);
  CHECK(report["replications"].size() == 2);
  CHECK(report["mse_nonzero"]["count"] == 2);
  CHECK(report["mse_zero"]["mean"].get<double>() >= 0.0);

  CHECK(run({"compare-kl", "--reps", "2", "--steps", "50", "--seed", "1", "--jobs", "1"}).out == kl.out);
  CHECK(run({"compare-kl", "--reps", "1", "--steps", "30", "--lr", "1e6"}).code == cli::kNumericError);
}
