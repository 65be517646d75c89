#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "mrgc/cli.hpp"
#include "mrgc/graph.hpp"
#include "support/synthetic.hpp"

using namespace mrgc;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "mrgc_cli_suite";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Captured {
  int code;
  std::string err;
};

Captured run_cli(const std::vector<std::string>& args) {
  std::ostringstream err, out;
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  const int code = cli::run(args);
  std::cerr.rdbuf(old_err);
  std::cout.rdbuf(old_out);
  return {code, err.str()};
}

const std::string& graph_file() {
  static const std::string p = [] {
    const std::string f = path("graph.json");
    save_graph(testing::blob_graph(4, {.nodes = 60}), f);
    return f;
  }();
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("metrics happy path") {
    const auto r = run_cli({"metrics", "--input", graph_file(), "--k", "8", "--output", path("report.json")});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(path("report.json")));
    for (const char* key : {"id", "fdr", "fhc", "class_volumes", "total_volume", "manifest"}) CHECK(j.contains(key));
    CHECK(j["manifest"]["command"] == "metrics");
    CHECK(j["manifest"]["input_paths"][0] == graph_file());
    CHECK(j["manifest"]["tool_version"] == cli::tool_version);
  }

  TEST_CASE("quota violation is a data error") {
    const auto r = run_cli({"condense", "--input", graph_file(), "--ratio", "0.01", "--output", path("c.json")});
    CHECK(r.code == 2);
    CHECK(r.err.find("per-class quota") != std::string::npos);
  }

  TEST_CASE("usage errors") {
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"metrics"}).code == 1);
    CHECK(run_cli({"metrics", "--input", graph_file(), "--bogus"}).code == 1);
    CHECK(run_cli({"frobnicate"}).code == 1);
    CHECK(run_cli({"attack", "--input", graph_file(), "--output", path("a.json"), "--kind", "evasion"}).code == 1);
    CHECK(run_cli({"attack", "--input", graph_file(), "--output", path("a.json"), "--budget-percent", "150"}).code == 1);
    const auto r = run_cli({"condense", "--input", graph_file()});
    CHECK(r.code == 1);
    CHECK(r.err.find("--output") != std::string::npos);
  }

  TEST_CASE("data errors") {
    CHECK(run_cli({"metrics", "--input", path("missing.json")}).code == 2);
    std::ofstream(path("broken.json")) << "{\"num_nodes\": 3";
    const auto r = run_cli({"metrics", "--input", path("broken.json")});
    CHECK(r.code == 2);
    CHECK(r.err.find("ParseError") != std::string::npos);
    std::ofstream(path("loop.json")) << R"({"num_nodes":2,"features":[[1],[2]],"edges":[[1,1]],"labels":[0,1]})";
    const auto loop = run_cli({"metrics", "--input", path("loop.json")});
    CHECK(loop.code == 2);
    CHECK(loop.err.find("self-loop") != std::string::npos);
  }

  TEST_CASE("pipeline is byte-identical across runs and thread counts") {
    const std::vector<std::string> outputs{"p_att.json", "p_cond.json", "p_hist.jsonl", "p_rep.json"};
    auto pipeline = [&](const std::string& threads) {
      REQUIRE(run_cli({"attack", "--input", graph_file(), "--output", path("p_att.json"), "--kind", "feature",
                       "--budget-percent", "20", "--seed", "3"}).code == 0);
      REQUIRE(run_cli({"condense", "--input", path("p_att.json"), "--output", path("p_cond.json"), "--history",
                       path("p_hist.jsonl"), "--ratio", "0.2", "--epochs", "3", "--alpha", "0.1", "--beta", "0.1",
                       "--gamma", "0.1", "--k", "5", "--pca-dims", "2", "--lr", "0.1", "--epsilon", "0.5",
                       "--seed", "9", "--threads", threads}).code == 0);
      REQUIRE(run_cli({"metrics", "--input", path("p_cond.json"), "--output", path("p_rep.json")}).code == 0);
      std::vector<std::string> contents;
      for (const auto& f : outputs) contents.push_back(slurp(path(f)));
      return contents;
    };
    const auto first = pipeline("1");
    const auto second = pipeline("1");
    const auto threaded = pipeline("3");
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      CHECK_FALSE(first[i].empty());
      CHECK(first[i] == second[i]);
      CHECK(first[i] == threaded[i]);
    }
  }

  TEST_CASE("condense outputs") {
    REQUIRE(run_cli({"condense", "--input", graph_file(), "--output", path("cond.json"), "--history",
                     path("hist.jsonl"), "--epochs", "4", "--alpha", "0", "--beta", "0", "--gamma", "0",
                     "--ratio", "0.2"}).code == 0);
    const auto j = nlohmann::json::parse(slurp(path("cond.json")));
    CHECK(j["num_nodes"] == 12);
    CHECK(j["manifest"]["config_snapshot"]["epochs"] == 4);
    CHECK(j["manifest"]["config_snapshot"]["epsilon_mode"] == "median-heuristic");
    std::istringstream lines(slurp(path("hist.jsonl")));
    std::string line;
    std::getline(lines, line);
    CHECK(nlohmann::json::parse(line).contains("manifest"));
    std::size_t count = 0;
    while (std::getline(lines, line)) {
      const auto r = nlohmann::json::parse(line);
      CHECK(r["epoch"] == ++count);
      CHECK(r["total"] == r["l_gc"]);
    }
    CHECK(count == 4);
    const Graph back = load_graph(path("cond.json"));
    CHECK(back.num_edges() == 0);
  }

  TEST_CASE("config file with flag overrides") {
    std::ofstream(path("cfg.json")) << R"({"ratio": 0.2, "epochs": 2, "alpha": 0, "beta": 0, "gamma": 0, "seed": 5})";
    REQUIRE(run_cli({"condense", "--input", graph_file(), "--config", path("cfg.json"), "--epochs", "1",
                     "--output", path("cfgcond.json")}).code == 0);
    const auto j = nlohmann::json::parse(slurp(path("cfgcond.json")));
    CHECK(j["manifest"]["config_snapshot"]["epochs"] == 1);
    CHECK(j["manifest"]["config_snapshot"]["seed"] == 5);
    CHECK(j["manifest"]["input_paths"].size() == 2);
  }

  TEST_CASE("seed from the environment") {
    ::setenv("MRGC_SEED", "41", 1);
    REQUIRE(run_cli({"attack", "--input", graph_file(), "--output", path("env.json"), "--budget-percent", "10"}).code == 0);
    ::unsetenv("MRGC_SEED");
    REQUIRE(run_cli({"attack", "--input", graph_file(), "--output", path("flag.json"), "--budget-percent", "10",
                     "--seed", "41"}).code == 0);
    CHECK(slurp(path("env.json")) == slurp(path("flag.json")));
    CHECK(nlohmann::json::parse(slurp(path("env.json")))["manifest"]["seed"] == 41);
  }

  TEST_CASE("id and curvature reports") {
    REQUIRE(run_cli({"id", "--input", graph_file(), "--output", path("id.json")}).code == 0);
    const auto id = nlohmann::json::parse(slurp(path("id.json")));
    CHECK(id["id"].get<double>() > 0.0);
    REQUIRE(run_cli({"curvature", "--input", graph_file(), "--k", "8", "--pca-dims", "3", "--output",
                     path("curv.json")}).code == 0);
    const auto c = nlohmann::json::parse(slurp(path("curv.json")));
    CHECK(c["nodes"].size() == 60);
    CHECK(c["nodes"][0].contains("gaussian_k"));
    CHECK(c["nodes"][0].contains("ricci"));
    CHECK(c.contains("loss_cur"));
    REQUIRE(run_cli({"id", "--input", graph_file(), "--representation", "features", "--output",
                     path("idx.json")}).code == 0);
    CHECK(slurp(path("idx.json")) != slurp(path("id.json")));
  }

  TEST_CASE("csv triplet input") {
    save_graph(testing::blob_graph(5, {.nodes = 30}), path("csvgraph"), GraphFormat::csv_triplet);
    CHECK(run_cli({"metrics", "--input", path("csvgraph"), "--output", path("csvrep.json")}).code == 0);
  }
}
