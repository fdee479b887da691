#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ggb/cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = ggb::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Workdir {
 public:
  Workdir() : dir_(fs::temp_directory_path() / ("ggb_cli_" + std::to_string(counter_++) + "_" +
                                                std::to_string(::getpid()))) {
    fs::create_directories(dir_);
  }
  ~Workdir() { fs::remove_all(dir_); }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  static inline int counter_ = 0;
  fs::path dir_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

const char* kBm = R"({"kind": "bm", "T": 1.0})";
const char* kPin = R"({"functions": [{"preset": "one"}], "y": [0.0]})";

}  // namespace

TEST_CASE("sample writes one row per node") {
  Workdir w;
  const std::string model = w.file("bm.json", kBm);
  const std::string out = w.path("p.csv");
  const Result r = run({"sample", "--model", model, "--grid-n", "256", "--paths", "10", "--seed", "1", "--out", out});
  CHECK(r.code == 0);
  const auto rows = lines(slurp(out));
  REQUIRE(rows.size() == 258);
  CHECK(rows[0] == "time,path_0,path_1,path_2,path_3,path_4,path_5,path_6,path_7,path_8,path_9");
  CHECK(rows[1].rfind("0,0,0", 0) == 0);
  CHECK(rows[257].rfind("1,", 0) == 0);
}

TEST_CASE("same arguments give byte-identical output") {
  Workdir w;
  const std::string model = w.file("bm.json", kBm);
  const std::string cond = w.file("pin.json", kPin);
  for (const char* type : {"orthogonal", "canonical", "volterra"}) {
    const std::vector<std::string> args{"bridge", "--type", type, "--model", model, "--cond", cond,
                                        "--grid-n", "64", "--paths", "3", "--seed", "11"};
    const Result a = run(args);
    const Result b = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(!a.out.empty());
  }
}

TEST_CASE("canonical bridge ends at the target") {
  Workdir w;
  const std::string model = w.file("bm.json", kBm);
  const std::string cond = w.file("pin.json", R"({"functions": [{"preset": "one"}], "y": [0.4]})");
  const std::string out = w.path("b.csv");
  const Result r = run({"bridge", "--type", "canonical", "--model", model, "--cond", cond, "--grid-n", "1000",
                        "--epsilon", "0.001", "--seed", "1", "--out", out});
  CHECK(r.code == 0);
  CHECK(r.out == "sde_nodes 0..999\ncompletion_nodes 1000..1000\n");
  const auto rows = lines(slurp(out));
  const std::string last = rows.back();
  CHECK(std::stod(last.substr(last.find(',') + 1)) == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("exit codes") {
  Workdir w;
  const std::string model = w.file("bm.json", kBm);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"sample", "--model", w.path("missing.json")}).code == 2);

  const Result bad_kind = run({"sample", "--model", w.file("k.json", R"({"kind": "levy", "T": 1})")});
  CHECK(bad_kind.code == 2);
  CHECK(bad_kind.err.find("'kind'") != std::string::npos);

  const Result bad_hurst = run({"sample", "--model", w.file("h.json", R"({"kind": "fbm", "T": 1, "hurst": 1.5})")});
  CHECK(bad_hurst.code == 2);
  CHECK(bad_hurst.err.find("'hurst'") != std::string::npos);

  const Result bad_json = run({"sample", "--model", w.file("j.json", "{not json")});
  CHECK(bad_json.code == 2);

  const std::string dup = w.file("dup.json", R"({"functions": [{"preset": "one"}, {"preset": "one"}], "y": [0, 0]})");
  CHECK(run({"bridge", "--type", "orthogonal", "--model", model, "--cond", dup, "--grid-n", "16"}).code == 3);
  CHECK(run({"bridge", "--type", "canonical", "--model", model, "--cond", dup, "--grid-n", "16"}).code == 3);
  const std::string short_y = w.file("y.json", R"({"functions": [{"preset": "one"}], "y": []})");
  const Result r = run({"bridge", "--type", "orthogonal", "--model", model, "--cond", short_y});
  CHECK(r.code == 2);
  CHECK(r.err.find("'y'") != std::string::npos);
  CHECK(run({"bridge", "--type", "sideways", "--model", model, "--cond", short_y}).code == 2);
  CHECK(run({"verify", "nothing"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("verify gram output is stable") {
  Workdir w;
  const std::string model = w.file("bm.json", kBm);
  const std::string cond = w.file("c.json", R"({"functions": [{"preset": "one"}, {"preset": "avg"}], "y": [0, 0]})");
  const Result r = run({"verify", "gram", "--model", model, "--cond", cond, "--n", "4"});
  CHECK(r.code == 0);
  CHECK(r.out == slurp(std::string(GGB_GOLDEN_DIR) + "/gram_one_avg_n4.csv"));
}

TEST_CASE("sample output matches the golden file") {
  Workdir w;
  const std::string model = w.file("bm.json", kBm);
  const Result r = run({"sample", "--model", model, "--grid-n", "4", "--paths", "2", "--seed", "7"});
  CHECK(r.code == 0);
  CHECK(r.out == slurp(std::string(GGB_GOLDEN_DIR) + "/sample_bm_n4_seed7.csv"));
}

TEST_CASE("verify reports") {
  const Result res = run({"verify", "resolvent", "--n", "64", "--probes", "3"});
  CHECK(res.code == 0);
  const auto rows = lines(res.out);
  CHECK(rows.size() == 4);
  CHECK(rows[0] == "t,s,residual");
  const Result fk = run({"verify", "fbm-kernel", "--n", "256", "--hurst", "0.3"});
  CHECK(fk.code == 0);
  CHECK(lines(fk.out).size() == 7);
  CHECK(lines(fk.out)[0] == "t,s,R_exact,R_from_k,rel_err");

  Workdir w;
  const std::string model = w.file("bm.json", kBm);
  const std::string cond = w.file("pin.json", kPin);
  const Result bc = run({"verify", "bridge-cov", "--model", model, "--cond", cond, "--n", "20", "--paths", "500"});
  CHECK(bc.code == 0);
  CHECK(lines(bc.out).size() == 4);
  CHECK(lines(bc.out)[0] == "t,s,emp_cov,theory_cov,se,z_score");
  CHECK(run({"verify", "bridge-cov", "--model", model, "--cond", cond, "--paths", "50"}).code == 2);
}

TEST_CASE("insider-delta JSON") {
  Workdir w;
  const std::string base = R"("model": {"kind": "bm", "T": 1.0},
    "a": {"const": 1.0},
    "conditioning": {"functions": [{"preset": "one"}, {"preset": "avg"}], "y": [0.0, 0.0]},
    "mu": 1.0, "sigma": 1.0, )";
  const std::string none = w.file("m0.json", "{" + base + R"("epsilon": 1.0})");
  const Result r0 = run({"insider-delta", "--config", none, "--grid-n", "512"});
  CHECK(r0.code == 0);
  const auto j0 = nlohmann::json::parse(r0.out);
  CHECK(j0.at("delta_formula").get<double>() == 0.0);
  CHECK(j0.at("delta_bs_example").get<double>() == 0.0);
  CHECK(!j0.contains("delta_mc"));

  const std::string half = w.file("m1.json", "{" + base + R"("epsilon": 0.5})");
  const Result r1 = run({"insider-delta", "--config", half, "--grid-n", "512", "--mc-paths", "500", "--seed", "3"});
  CHECK(r1.code == 0);
  const auto j1 = nlohmann::json::parse(r1.out);
  CHECK(std::abs(j1.at("delta_formula").get<double>() - j1.at("delta_bs_example").get<double>()) < 0.01);
  CHECK(j1.at("mc_se").get<double>() > 0.0);
  CHECK(j1.contains("delta_mc"));

  const std::string fbm = w.file("m2.json", R"({"model": {"kind": "fbm", "T": 1, "hurst": 0.7}, "a": {"const": 1},
    "conditioning": {"functions": [{"preset": "one"}], "y": [0]}, "epsilon": 0.5})");
  const Result r2 = run({"insider-delta", "--config", fbm});
  CHECK(r2.code == 2);
  CHECK(r2.err.find("model.kind") != std::string::npos);
  const std::string bad_eps = w.file("m3.json", "{" + base + R"("epsilon": 0.0})");
  CHECK(run({"insider-delta", "--config", bad_eps}).code == 2);
}
