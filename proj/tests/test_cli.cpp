#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "pdtree/diagram.hpp"
#include "pdtree/embedding.hpp"
#include "pdtree/exact.hpp"

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

class Sandbox {
 public:
  Sandbox() {
    dir_ = fs::temp_directory_path() /
           ("pdtree_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Sandbox() { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
  }

  Run run(const std::string& args, const std::string& env = "") const {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = env + " " + PDTREE_CLI_PATH + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

 private:
  static inline int counter_ = 0;
  fs::path dir_;
};

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("dist on two singletons") {
  Sandbox box;
  box.write("a.txt", "0 4\n");
  box.write("b.txt", "0 6\n");
  const auto r = box.run("dist --method exact " + box.path("a.txt").string() + " " +
                         box.path("b.txt").string());
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["value"].get<double>() == doctest::Approx(2.0));
  CHECK(j["method"] == "exact");
  CHECK(first_line(r.err).rfind("pdtree dist --method exact", 0) == 0);
  CHECK(first_line(r.err).find("--seed 0") != std::string::npos);

  const auto same = box.run("dist --method flowtree " + box.path("a.txt").string() + " " +
                            box.path("a.txt").string());
  CHECK(nlohmann::json::parse(same.out)["value"].get<double>() == 0.0);
}

TEST_CASE("multi-tree min never exceeds mean") {
  Sandbox box;
  box.write("a.txt", "0 4\n1 9\n3 3.5\n");
  box.write("b.txt", "0 6\n2 8 2\n");
  const std::string files = box.path("a.txt").string() + " " + box.path("b.txt").string();
  const auto mean = box.run("dist --trees 10 --reduce mean --seed 4 " + files);
  const auto lo = box.run("dist --trees 10 --reduce min --seed 4 " + files);
  REQUIRE(mean.code == 0);
  REQUIRE(lo.code == 0);
  const auto jm = nlohmann::json::parse(mean.out);
  CHECK(jm["tree_meta"].size() == 10);
  CHECK(nlohmann::json::parse(lo.out)["value"].get<double>() <=
        jm["value"].get<double>());
}

TEST_CASE("seed from the environment") {
  Sandbox box;
  box.write("a.txt", "0 4\n");
  box.write("b.txt", "1 6\n");
  const std::string files = box.path("a.txt").string() + " " + box.path("b.txt").string();
  const auto r = box.run("dist --no-timing " + files, "PDTREE_SEED=77");
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["seeds"][0] == 77);
  CHECK(first_line(r.err).find("--seed 77") != std::string::npos);
  CHECK(box.run("dist --no-timing --seed 77 " + files).out == r.out);
}

TEST_CASE("exit codes") {
  Sandbox box;
  box.write("good.txt", "0 4\n");
  box.write("bad.txt", "0 4\nfoo bar\n");
  box.write("inverted.txt", "3 1\n");
  const auto good = box.path("good.txt").string();
  CHECK(box.run("dist " + good + " " + box.path("bad.txt").string()).code == 3);
  const auto inv = box.run("dist " + good + " " + box.path("inverted.txt").string());
  CHECK(inv.code == 3);
  CHECK(inv.err.find("line 1") != std::string::npos);
  CHECK(box.run("dist " + good).code == 2);
  CHECK(box.run("dist --metric l7 " + good + " " + good).code == 2);
  CHECK(box.run("dist --method hera " + good + " " + good).code == 2);
  CHECK(box.run("frobnicate").code == 2);
  CHECK(box.run("gen --count 0 --out " + box.path("g").string()).code == 2);
  CHECK(box.run("gen --kind normal --out " + box.path("g").string()).code == 2);
  CHECK(box.run("dist --method exact --oracle-cap 1 " + good + " " + good).code == 4);
  CHECK(box.run("--help").code == 0);
}

TEST_CASE("gen is reproducible and writes a manifest") {
  Sandbox box;
  const auto a = box.path("a");
  const auto b = box.path("b");
  REQUIRE(box.run("gen --kind uniform --count 5 --max-size 20 --seed 3 --out " + a.string())
              .code == 0);
  REQUIRE(box.run("gen --kind uniform --count 5 --max-size 20 --seed 3 --out " + b.string())
              .code == 0);
  for (int i = 0; i < 5; ++i) {
    const std::string name = "dgm_000" + std::to_string(i) + ".txt";
    REQUIRE(fs::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
  }
  CHECK(pdtree::load_diagram(a / "dgm_0004.txt").size() == 20);
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["kind"] == "uniform");
  CHECK(manifest["files"].size() == 5);
}

TEST_CASE("embed writes comparable vectors") {
  Sandbox box;
  const auto data = box.path("data");
  const auto vecs = box.path("vecs");
  REQUIRE(box.run("gen --count 4 --max-size 12 --out " + data.string()).code == 0);
  pdtree::save_diagram(pdtree::load_diagram(data / "dgm_0001.txt"), data / "dup.txt");
  REQUIRE(box.run("embed --seed 9 " + data.string() + " " + vecs.string()).code == 0);

  std::ifstream a(vecs / "dgm_0001.vec");
  std::ifstream b(vecs / "dgm_0003.vec");
  const auto va = pdtree::read_embedding(a);
  const auto vb = pdtree::read_embedding(b);
  CHECK(va.tree_signature == vb.tree_signature);
  CHECK(pdtree::l1_distance(va, vb) > 0.0);
  CHECK(slurp(vecs / "dgm_0001.vec") == slurp(vecs / "dup.vec"));

  const auto other = box.path("other");
  REQUIRE(box.run("embed --seed 10 " + data.string() + " " + other.string()).code == 0);
  CHECK(first_line(slurp(other / "dgm_0001.vec")) != first_line(slurp(vecs / "dgm_0001.vec")));
}

TEST_CASE("knn with the exact method puts the true nearest neighbour first") {
  Sandbox box;
  const auto q = box.path("q");
  const auto c = box.path("c");
  REQUIRE(box.run("gen --count 3 --max-size 10 --seed 1 --out " + q.string()).code == 0);
  REQUIRE(box.run("gen --count 6 --max-size 10 --seed 2 --out " + c.string()).code == 0);
  const auto r = box.run("knn --method exact -k 2 --workers 2 " + q.string() + " " + c.string());
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "query,rank,candidate,distance");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    std::istringstream fields(line);
    std::string query, rank, cand;
    std::getline(fields, query, ',');
    std::getline(fields, rank, ',');
    std::getline(fields, cand, ',');
    if (rank != "1") continue;
    const auto qd = pdtree::load_diagram(q / query);
    std::string best;
    double best_d = 1e300;
    for (int i = 0; i < 6; ++i) {
      const std::string name = "dgm_000" + std::to_string(i) + ".txt";
      const double d =
          pdtree::exact_distance(qd, pdtree::load_diagram(c / name), pdtree::GroundMetric::L2);
      if (d < best_d) {
        best_d = d;
        best = name;
      }
    }
    CHECK(cand == best);
  }
  CHECK(rows == 6);
  const auto ft = box.run("knn --method flowtree -k 6 " + q.string() + " " + c.string());
  CHECK(ft.code == 0);
}

TEST_CASE("eval emits exactly five csv files") {
  Sandbox box;
  const auto data = box.path("data");
  const auto out = box.path("out");
  REQUIRE(box.run("gen --count 12 --max-size 15 --out " + data.string()).code == 0);
  const auto r = box.run("eval --pairs 6 --metrics l1,l2 --bench-sizes 10,20 --bench-reps 1 "
                         "--out " + out.string() + " " + data.string());
  REQUIRE(r.code == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    CHECK(e.path().extension() == ".csv");
    ++files;
  }
  CHECK(files == 5);
  CHECK(first_line(slurp(out / "error_stats.csv")) ==
        "method,metric,mean_rel_error,std_rel_error,n_pairs,n_undefined");

  const auto again = box.path("again");
  REQUIRE(box.run("eval --pairs 6 --metrics l1,l2 --bench-sizes 10,20 --bench-reps 1 "
                  "--no-timing --out " + again.string() + " " + data.string()).code == 0);
  for (const auto* name : {"pair_errors.csv", "error_stats.csv", "recall.csv", "ranking.csv"})
    CHECK(slurp(out / name) == slurp(again / name));

  CHECK(box.run("eval --pairs 6 --oracle-cap 2 --out " + box.path("x").string() + " " +
                data.string()).code == 4);
}

TEST_CASE("bench rows") {
  Sandbox box;
  const auto r = box.run("bench --sizes 1000,2000 --methods flowtree --reps 1");
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  int rows = -1;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 2);
  CHECK(box.run("bench --sizes 2000,1000 --methods flowtree").code == 2);
}

}
