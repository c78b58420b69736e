#include <doctest.h>
#include <stdexcept>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mcboost/data_io.hpp"
#include "oracles.hpp"

using namespace mcboost;
using namespace mcboost::testing;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("mcboost_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args, const std::string& stdout_path = "") {
  std::string cmd = std::string(MCBOOST_CLI) + " " + args;
  cmd += stdout_path.empty() ? " > /dev/null" : " > '" + stdout_path + "'";
  cmd += " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

const LabelMap kLabels = LabelMap::from_tokens({"north", "south", "west"});

}  // namespace

TEST_CASE("train, predict and evaluate") {
  Workspace ws;
  const Dataset train_set = gaussian_blobs(30, 3, 2, 2.0, 0.7, 1);
  const Dataset test_set = gaussian_blobs(15, 3, 2, 2.0, 0.7, 2);
  write_csv(ws / "train.csv", train_set, kLabels);
  write_csv(ws / "test.csv", test_set, kLabels);

  const std::string common = "--data " + (ws / "train.csv") + " --header --iterations 15 --no-timings";
  REQUIRE(run("train " + common + " --test " + (ws / "test.csv") + " --model-out " + (ws / "m.json") +
              " --trace-out " + (ws / "t.ndjson"), ws / "train.out") == 0);
  CHECK(read_trace(ws / "t.ndjson").size() == 15);
  CHECK(slurp(ws / "train.out").find("test_error") != std::string::npos);

  REQUIRE(run("predict --model " + (ws / "m.json") + " --data " + (ws / "test.csv") + " --header --out " +
              (ws / "pred.txt")) == 0);
  const auto preds = lines_of(ws / "pred.txt");
  REQUIRE(preds.size() == test_set.num_examples());
  const LoadedModel model = load_model(ws / "m.json");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const ClassId c = predict(model.model, test_set.row(i));
    REQUIRE(preds[i] == kLabels.token(c));
    if (c != test_set.label(i)) ++wrong;
  }

  REQUIRE(run("evaluate --model " + (ws / "m.json") + " --data " + (ws / "test.csv") + " --header",
              ws / "eval.out") == 0);
  std::ostringstream expected;
  expected << "error: " << static_cast<double>(wrong) / static_cast<double>(preds.size());
  CHECK(slurp(ws / "eval.out").find(expected.str()) != std::string::npos);

  SUBCASE("feature count mismatch is a data error") {
    const Dataset wide = gaussian_blobs(5, 3, 3, 2.0, 0.7, 3);
    write_csv(ws / "wide.csv", wide, kLabels);
    CHECK(run("predict --model " + (ws / "m.json") + " --data " + (ws / "wide.csv") + " --header") == 1);
  }
}

TEST_CASE("empty model predicts the first label") {
  Workspace ws;
  const Model empty(3, 2);
  save_model(ws / "empty.json", empty, &kLabels);
  write_csv(ws / "d.csv", gaussian_blobs(4, 3, 2, 1.0, 1.0, 5), kLabels);
  REQUIRE(run("predict --model " + (ws / "empty.json") + " --data " + (ws / "d.csv") + " --header",
              ws / "p.txt") == 0);
  const auto preds = lines_of(ws / "p.txt");
  REQUIRE(preds.size() == 12);
  for (const auto& p : preds) CHECK(p == "north");
}

TEST_CASE("exit codes") {
  Workspace ws;
  write_csv(ws / "d.csv", gaussian_blobs(10, 3, 2, 2.0, 0.5, 6), kLabels);
  const std::string data = " --data " + (ws / "d.csv") + " --header --iterations 2";
  CHECK(run("") == 2);
  CHECK(run("train") == 2);
  CHECK(run("train --bogus 1" + data) == 2);
  CHECK(run("train --algorithm cw-stagewise --tau-max 2" + data) == 2);
  CHECK(run("train --algorithm cw-stagewise --C 100" + data) == 2);
  CHECK(run("train --algorithm adaboost" + data) == 2);
  CHECK(run("train --data " + (ws / "missing.csv")) == 1);
  std::ofstream(ws / "bad.csv") << "x,y\n1,a\nnan,b\n";
  CHECK(run("train --header --data " + (ws / "bad.csv")) == 1);
  CHECK(run("train" + data) == 0);
}

TEST_CASE("stage-wise runs at large C") {
  Workspace ws;
  write_csv(ws / "d.csv", gaussian_blobs(10, 3, 2, 0.3, 1.0, 7), kLabels);
  REQUIRE(run("train --algorithm cw-stagewise --data " + (ws / "d.csv") + " --header --iterations 1 --trace-out " +
              (ws / "t.ndjson")) == 0);
  const auto trace = read_trace(ws / "t.ndjson");
  REQUIRE(trace.size() == 1);
  // overlapping classes keep the loss term, scaled by C/p, far above any C near the default
  CHECK(trace[0].objective > 1e5);
}

TEST_CASE("identical runs write identical traces") {
  Workspace ws;
  write_csv(ws / "d.csv", gaussian_blobs(25, 3, 2, 1.5, 1.0, 8), kLabels);
  const std::string args = "train --data " + (ws / "d.csv") + " --header --iterations 20 --tau-max 4 --seed 3";
  REQUIRE(run(args + " --no-timings --trace-out " + (ws / "a.ndjson")) == 0);
  REQUIRE(run(args + " --no-timings --trace-out " + (ws / "b.ndjson")) == 0);
  CHECK(slurp(ws / "a.ndjson") == slurp(ws / "b.ndjson"));

  REQUIRE(run(args + " --trace-out " + (ws / "c.ndjson")) == 0);
  const auto timed = read_trace(ws / "c.ndjson");
  const auto bare = read_trace(ws / "a.ndjson");
  REQUIRE(timed.size() == bare.size());
  for (std::size_t t = 0; t < timed.size(); ++t) {
    CHECK(timed[t].objective == bare[t].objective);
    CHECK(timed[t].train_error == bare[t].train_error);
    CHECK(timed[t].solver_ms <= timed[t].total_ms);
  }
}

TEST_CASE("benchmark outputs") {
  Workspace ws;
  write_csv(ws / "d.csv", gaussian_blobs(20, 3, 2, 2.0, 0.7, 9), kLabels);
  REQUIRE(run("benchmark --data " + (ws / "d.csv") + " --header --iterations 4 --repeats 2 --C 100,10000 --out-dir " +
              (ws / "bench")) == 0);
  const auto summary = lines_of(ws / "bench/summary.csv");
  REQUIRE(summary.size() == 6);
  CHECK(summary[0] == "algorithm,repeats,test_error_mean,test_error_std,total_s_mean,solver_s_mean,stumps_total_mean,C");
  CHECK(fs::exists(ws / "bench/curves.csv"));
  int traces = 0;
  for (const auto& entry : fs::directory_iterator(ws / "bench/traces")) {
    ++traces;
    for (const auto& r : read_trace(entry.path())) REQUIRE(r.solver_ms <= r.total_ms);
  }
  CHECK(traces == 10);
  CHECK(fs::exists(ws / "bench/traces/cw-stagewise_C1e+08_r1.ndjson"));
  CHECK(run("benchmark --data " + (ws / "d.csv") + " --header --repeats 0 --out-dir " + (ws / "b2")) == 2);
}
