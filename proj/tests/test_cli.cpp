#include <doctest.h>

#include <cstdlib>
#include <string>

#include "pathx/text.hpp"
#include "test_util.hpp"

using namespace pathx;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string binary() {
  const char* bin = std::getenv("PATHX_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "PATHX_BIN must point at the pathx binary");
  return bin;
}

RunResult run(const std::string& args, const std::filesystem::path& scratch) {
  std::filesystem::path out = scratch / "stdout.txt";
  std::filesystem::path err = scratch / "stderr.txt";
  std::string cmd = binary() + " " + args + " > " + out.string() + " 2> " +
                    err.string();
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = std::filesystem::exists(out) ? read_file(out) : "";
  r.err = std::filesystem::exists(err) ? read_file(err) : "";
  return r;
}

std::string corpus_path() {
  return (testutil::fixture_dir() / "corpus_mini").string();
}

}  // namespace

TEST_CASE("cli pipeline runs end to end and is deterministic") {
  testutil::TempDir tmp("cli");
  std::string ds1 = (tmp.path() / "ds1").string();
  std::string ds2 = (tmp.path() / "ds2").string();

  std::string build_args = "build-dataset --corpus " + corpus_path() +
                           " --seed-title Alpha --paths 50 --policy dense --seed 1 ";
  RunResult b1 = run(build_args + "--out " + ds1, tmp.path());
  CAPTURE(b1.err);
  REQUIRE(b1.exit_code == 0);
  CHECK(b1.out.find("density=") != std::string::npos);
  CHECK(std::filesystem::exists(std::filesystem::path(ds1) / "graph.graphml"));
  CHECK(std::filesystem::exists(std::filesystem::path(ds1) / "manifest.txt"));

  RunResult b2 = run(build_args + "--out " + ds2, tmp.path());
  REQUIRE(b2.exit_code == 0);
  auto bytes1 = testutil::read_dir_bytes(ds1);
  auto bytes2 = testutil::read_dir_bytes(ds2);
  CHECK(bytes1 == bytes2);

  std::string feat = (tmp.path() / "features").string();
  RunResult f1 = run("extract-features --dataset " + ds1 + " --out " + feat +
                         " --features both --corpus " + corpus_path(),
                     tmp.path());
  CAPTURE(f1.err);
  REQUIRE(f1.exit_code == 0);
  CHECK(f1.out.find("edge_width=5") != std::string::npos);

  std::string feat2 = (tmp.path() / "features2").string();
  RunResult f2 = run("extract-features --dataset " + ds1 + " --out " + feat2 +
                         " --features both --corpus " + corpus_path(),
                     tmp.path());
  REQUIRE(f2.exit_code == 0);
  CHECK(read_file(std::filesystem::path(feat) / "edge_features.tsv") ==
        read_file(std::filesystem::path(feat2) / "edge_features.tsv"));

  std::string model = (tmp.path() / "model").string();
  RunResult t1 = run("train --dataset " + ds1 + " --features " + feat + " --out " +
                         model + " --epochs 15 --seed 3",
                     tmp.path());
  CAPTURE(t1.err);
  REQUIRE(t1.exit_code == 0);
  CHECK(std::filesystem::exists(std::filesystem::path(model) / "checkpoint.txt"));
  CHECK(std::filesystem::exists(std::filesystem::path(model) / "history.tsv"));

  std::string evaldir = (tmp.path() / "eval").string();
  RunResult e1 = run("evaluate --dataset " + ds1 + " --features " + feat +
                         " --checkpoint " + model + "/checkpoint.txt --out " + evaldir,
                     tmp.path());
  CAPTURE(e1.err);
  REQUIRE(e1.exit_code == 0);
  CHECK(e1.out.find("target probability") != std::string::npos);
  CHECK(std::filesystem::exists(std::filesystem::path(evaldir) / "report.tsv"));
}

TEST_CASE("feature width follows the requested configuration") {
  testutil::TempDir tmp("cliw");
  std::string ds = (tmp.path() / "ds").string();
  REQUIRE(run("build-dataset --corpus " + corpus_path() +
                  " --seed-title Alpha --paths 30 --seed 2 --out " + ds,
              tmp.path())
              .exit_code == 0);
  std::string feat = (tmp.path() / "orig").string();
  RunResult r = run("extract-features --dataset " + ds + " --out " + feat +
                        " --features original",
                    tmp.path());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("edge_width=2") != std::string::npos);
  std::string header =
      split(read_file(std::filesystem::path(feat) / "edge_features.tsv"), '\n')[0];
  CHECK(header == "edge_id\ttfidf\tnof");
}

TEST_CASE("predict on a deterministic chain prints probability 1") {
  testutil::TempDir tmp("clip");
  // hand-write a chain corpus
  std::filesystem::path corpus = tmp.path() / "chain";
  std::filesystem::create_directories(corpus);
  write_file(corpus / "a.txt", "A\nB\nbody a\n");
  write_file(corpus / "b.txt", "B\nC\nbody b\n");
  write_file(corpus / "c.txt", "C\nD\nbody c\n");
  write_file(corpus / "d.txt", "D\nE\nbody d\n");
  write_file(corpus / "e.txt", "E\nF\nbody e\n");
  write_file(corpus / "f.txt", "F\nG\nbody f\n");
  write_file(corpus / "g.txt", "G\n\nbody g\n");

  std::string ds = (tmp.path() / "ds").string();
  REQUIRE(run("build-dataset --corpus " + corpus.string() +
                  " --seed-title A --paths 5 --seed 1 --out " + ds,
              tmp.path())
              .exit_code == 0);
  std::string feat = (tmp.path() / "feat").string();
  REQUIRE(run("extract-features --dataset " + ds + " --out " + feat, tmp.path())
              .exit_code == 0);
  std::string model = (tmp.path() / "model").string();
  REQUIRE(run("train --dataset " + ds + " --features " + feat + " --out " + model +
                  " --epochs 2",
              tmp.path())
              .exit_code == 0);

  RunResult p = run("predict --dataset " + ds + " --features " + feat +
                        " --checkpoint " + model +
                        "/checkpoint.txt --prefix A,B --horizon 2 --top 3",
                    tmp.path());
  CAPTURE(p.err);
  REQUIRE(p.exit_code == 0);
  CHECK(p.out.find("suffix\tprobability") != std::string::npos);
  CHECK(p.out.find("C,D\t1.000000") != std::string::npos);

  RunResult unknown = run("predict --dataset " + ds + " --features " + feat +
                              " --checkpoint " + model +
                              "/checkpoint.txt --prefix Nowhere --horizon 1",
                          tmp.path());
  CHECK(unknown.exit_code == 1);
  CHECK(unknown.err.find("unknown title") != std::string::npos);
}

TEST_CASE("usage errors exit with code 2") {
  testutil::TempDir tmp("cliu");
  RunResult missing_corpus =
      run("build-dataset --corpus /nonexistent/path --out " +
              (tmp.path() / "x").string(),
          tmp.path());
  CHECK(missing_corpus.exit_code == 2);

  RunResult no_sub = run("", tmp.path());
  CHECK(no_sub.exit_code == 2);

  RunResult eval_no_ckpt =
      run("evaluate --dataset x --features y --out z", tmp.path());
  CHECK(eval_no_ckpt.exit_code == 2);  // --checkpoint is required

  RunResult bad_flag = run("train --bogus", tmp.path());
  CHECK(bad_flag.exit_code == 2);

  RunResult help = run("--help", tmp.path());
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("build-dataset") != std::string::npos);
}

TEST_CASE("matrix command emits reports and a manifest") {
  testutil::TempDir tmp("clim");
  std::string ds = (tmp.path() / "ds").string();
  REQUIRE(run("build-dataset --corpus " + corpus_path() +
                  " --seed-title Alpha --paths 40 --seed 4 --out " + ds,
              tmp.path())
              .exit_code == 0);
  std::string out1 = (tmp.path() / "m1").string();
  RunResult m = run("matrix --dataset " + ds + " --corpus " + corpus_path() +
                        " --configs original,both --seeds 1,2 --epochs 3 --out " + out1,
                    tmp.path());
  CAPTURE(m.err);
  REQUIRE(m.exit_code == 0);
  CHECK(m.out.find("directional check") != std::string::npos);
  std::string manifest = read_file(std::filesystem::path(out1) / "manifest.txt");
  CHECK(manifest.find("dataset_hash=") != std::string::npos);
  CHECK(manifest.find("seeds=1,2") != std::string::npos);
  CHECK(manifest.find("code_version=") != std::string::npos);
  CHECK(manifest.find("dht_beats_original_on_top5=") != std::string::npos);

  std::string out2 = (tmp.path() / "m2").string();
  RunResult m2 = run("matrix --dataset " + ds + " --corpus " + corpus_path() +
                         " --configs original,both --seeds 1,2 --epochs 3 --out " + out2,
                     tmp.path());
  REQUIRE(m2.exit_code == 0);
  CHECK(testutil::read_dir_bytes(out1) == testutil::read_dir_bytes(out2));
}
