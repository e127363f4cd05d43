#include <doctest.h>

#include <set>
#include <unordered_set>

#include "pathx/corpus.hpp"
#include "pathx/text.hpp"
#include "test_util.hpp"

using namespace pathx;

TEST_CASE("is_valid_title follows the exclusion rules") {
  CHECK_FALSE(is_valid_title("Talk:Thessaloniki"));
  CHECK_FALSE(is_valid_title("User:Someone"));
  CHECK_FALSE(is_valid_title("File:Map.png"));
  CHECK_FALSE(is_valid_title("ISO 3166"));
  CHECK_FALSE(is_valid_title("100% renewable"));
  CHECK_FALSE(is_valid_title("C# sharp"));
  CHECK_FALSE(is_valid_title("Category:Things"));
  CHECK_FALSE(is_valid_title("12345"));
  CHECK_FALSE(is_valid_title(""));

  CHECK(is_valid_title("Thessaloniki"));
  CHECK(is_valid_title("Central Macedonia"));
  CHECK(is_valid_title("Route 66"));   // digits mixed with letters are fine
  CHECK(is_valid_title("isotope"));    // the ISO token match is case-sensitive
}

namespace {

SnapshotCorpus chain_corpus(int length) {
  std::vector<ArticleDocument> docs;
  for (int i = 0; i < length; ++i) {
    ArticleDocument d;
    d.title = "C" + std::to_string(i);
    if (i + 1 < length) d.links = {"C" + std::to_string(i + 1)};
    d.body = "chain article " + std::to_string(i);
    docs.push_back(std::move(d));
  }
  return SnapshotCorpus(std::move(docs));
}

CrawlConfig basic_config(const std::string& seed) {
  CrawlConfig c;
  c.seed_title = seed;
  c.num_paths = 10;
  c.rng_seed = 1;
  return c;
}

}  // namespace

TEST_CASE("generate_path walks a forced chain to the drawn target length") {
  SnapshotCorpus corpus = chain_corpus(10);
  CrawlConfig config = basic_config("C0");
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    GeneratedPath p = generate_path(corpus, config, rng, "C0");
    CHECK(p.titles.size() >= 4);
    CHECK(p.titles.size() <= 7);
    CHECK_FALSE(p.early_terminated);
    CHECK(p.titles.front() == "C0");
  }
}

TEST_CASE("generate_path with a linkless seed is length 1 and flagged") {
  SnapshotCorpus corpus({{"Seed", "no links here", {}}});
  CrawlConfig config = basic_config("Seed");
  Rng rng(0);
  GeneratedPath p = generate_path(corpus, config, rng, "Seed");
  CHECK(p.titles.size() == 1);
  CHECK(p.early_terminated);
}

TEST_CASE("generate_path errors when the start article is missing") {
  SnapshotCorpus corpus = chain_corpus(4);
  CrawlConfig config = basic_config("Nowhere");
  Rng rng(0);
  CHECK_THROWS_AS(generate_path(corpus, config, rng, "Nowhere"), DanglingIdError);
}

TEST_CASE("dense policy never enters links beyond the 5-link window") {
  // Hub has 8 valid links; 6..8 lead into a trap that would extend walks.
  std::vector<ArticleDocument> docs;
  ArticleDocument hub{"Hub", "hub", {}};
  for (int i = 1; i <= 5; ++i) hub.links.push_back("Safe" + std::to_string(i));
  for (int i = 6; i <= 8; ++i) hub.links.push_back("Trap" + std::to_string(i));
  docs.push_back(hub);
  for (int i = 1; i <= 5; ++i) {
    // each safe article chains onward so walks can reach length 4
    docs.push_back({"Safe" + std::to_string(i), "safe",
                    {"Mid" + std::to_string(i)}});
    docs.push_back({"Mid" + std::to_string(i), "mid",
                    {"End" + std::to_string(i)}});
    docs.push_back({"End" + std::to_string(i), "end", {}});
  }
  for (int i = 6; i <= 8; ++i)
    docs.push_back({"Trap" + std::to_string(i), "trap", {"TrapDeep"}});
  docs.push_back({"TrapDeep", "deep", {}});
  SnapshotCorpus corpus(std::move(docs));

  CrawlConfig config = basic_config("Hub");
  config.policy = CrawlPolicy::Dense;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    GeneratedPath p = generate_path(corpus, config, rng, "Hub");
    for (const std::string& t : p.titles) {
      CHECK(t.find("Trap") == std::string::npos);
    }
  }
}

TEST_CASE("generated paths never revisit and only visit valid titles") {
  SnapshotCorpus corpus(testutil::fixture_dir() / "corpus_mini");
  CrawlConfig config = basic_config("Alpha");
  config.num_paths = 200;
  config.rng_seed = 17;
  Dataset ds = generate_dataset(corpus, config);
  REQUIRE(ds.trajectories.size() == 200);
  for (const Trajectory& t : ds.trajectories) {
    std::unordered_set<NodeId> seen;
    for (NodeId v : t.node_ids) {
      CHECK(seen.insert(v).second);
      CHECK(is_valid_title(ds.graph.node(v).title));
    }
    CHECK(t.length() >= 4);
    CHECK(t.length() <= 7);
  }
}

TEST_CASE("generate_dataset on a chain yields identical routes") {
  SnapshotCorpus corpus = chain_corpus(12);
  CrawlConfig config = basic_config("C0");
  config.num_paths = 3;
  Dataset ds = generate_dataset(corpus, config);
  REQUIRE(ds.trajectories.size() == 3);
  for (const Trajectory& t : ds.trajectories) {
    CHECK(t.node_ids.front() == ds.graph.find_title("C0"));
    for (int i = 0; i + 1 < t.length(); ++i)
      CHECK(ds.graph.find_edge(t.node_ids[static_cast<std::size_t>(i)],
                               t.node_ids[static_cast<std::size_t>(i) + 1]) != kNoEdge);
  }
  // the graph is exactly the traversed chain prefix
  CHECK(ds.graph.num_edges() == ds.graph.num_nodes() - 1);
}

TEST_CASE("generate_dataset is byte-deterministic for a fixed seed") {
  SnapshotCorpus corpus(testutil::fixture_dir() / "corpus_mini");
  CrawlConfig config = basic_config("Alpha");
  config.num_paths = 40;
  config.rng_seed = 5;
  Dataset a = generate_dataset(corpus, config);
  Dataset b = generate_dataset(corpus, config);
  testutil::TempDir da("det_a"), db("det_b");
  save_dataset(a, da.path());
  save_dataset(b, db.path());
  CHECK(testutil::read_dir_bytes(da.path()) == testutil::read_dir_bytes(db.path()));
}

TEST_CASE("dense policy reaches fewer distinct nodes than sparse") {
  // articles link to two shared hubs first, then to distinct spokes, so the
  // 5-link window concentrates dense walks
  std::vector<ArticleDocument> docs;
  const int n_articles = 50;
  for (int i = 0; i < n_articles; ++i) {
    ArticleDocument d;
    d.title = "A" + std::to_string(i);
    d.links = {"A" + std::to_string((i + 1) % n_articles),
               "A" + std::to_string((i + 2) % n_articles),
               "A" + std::to_string((i + 3) % n_articles),
               "A" + std::to_string((i + 4) % n_articles),
               "A" + std::to_string((i + 5) % n_articles)};
    for (int j = 6; j < 16; ++j)
      d.links.push_back("A" + std::to_string((i + j * 3) % n_articles));
    d.body = "article " + std::to_string(i);
    docs.push_back(std::move(d));
  }
  SnapshotCorpus corpus(std::move(docs));

  CrawlConfig config = basic_config("A0");
  config.num_paths = 120;
  config.rng_seed = 11;
  config.policy = CrawlPolicy::Dense;
  Dataset dense = generate_dataset(corpus, config);
  config.policy = CrawlPolicy::Sparse;
  Dataset sparse = generate_dataset(corpus, config);
  CHECK(dense.graph.num_nodes() < sparse.graph.num_nodes());
}

TEST_CASE("sub-minimum walks are discarded until the corpus is exhausted") {
  // every walk dies at length 2
  SnapshotCorpus corpus({{"Seed", "", {"Dead"}}, {"Dead", "", {}}});
  CrawlConfig config = basic_config("Seed");
  config.num_paths = 1;
  CHECK_THROWS_WITH_AS(generate_dataset(corpus, config),
                       doctest::Contains("corpus exhaustion"), Error);
}

TEST_CASE("window_before_filter changes the candidate pool") {
  // first five links are invalid; valid ones sit beyond the window
  ArticleDocument hub{"Hub", "", {"Talk:1", "Talk:2", "Talk:3", "Talk:4", "Talk:5",
                                  "Good1", "Good2"}};
  std::vector<ArticleDocument> docs = {hub,
                                       {"Good1", "", {"Good2"}},
                                       {"Good2", "", {"Good1"}}};
  SnapshotCorpus corpus(docs);
  CrawlConfig config = basic_config("Hub");
  config.policy = CrawlPolicy::Dense;
  Rng rng(1);

  // filter-then-window: Good1/Good2 are reachable
  GeneratedPath p = generate_path(corpus, config, rng, "Hub");
  CHECK(p.titles.size() > 1);

  config.window_before_filter = true;
  Rng rng2(1);
  GeneratedPath q = generate_path(corpus, config, rng2, "Hub");
  CHECK(q.titles.size() == 1);  // window holds only invalid titles
  CHECK(q.early_terminated);
}

TEST_CASE("rate limiter spaces requests with a fake clock") {
  struct FakeClock : Clock {
    double t = 100.0;
    double now() override { return t; }
    void sleep_for(double seconds) override { t += seconds; }
  } clock;
  RateLimiter limiter(clock, 1.0);
  limiter.acquire();
  clock.t += 0.25;  // caller comes back too early
  limiter.acquire();
  limiter.acquire();
  clock.t += 5.0;   // long pause, no wait needed
  limiter.acquire();
  const auto& stamps = limiter.timestamps();
  REQUIRE(stamps.size() == 4);
  for (std::size_t i = 1; i < stamps.size(); ++i)
    CHECK(stamps[i] - stamps[i - 1] >= 1.0);
}

TEST_CASE("snapshot documents round-trip") {
  testutil::TempDir tmp("snap");
  ArticleDocument doc{"Title X", "line one\nline two", {"A", "B"}};
  write_snapshot_document(tmp.path() / "doc.txt", doc);
  SnapshotCorpus corpus(tmp.path());
  auto got = corpus.fetch("Title X");
  REQUIRE(got.has_value());
  CHECK(got->links == std::vector<std::string>{"A", "B"});
  CHECK(got->body == "line one\nline two");
  CHECK_FALSE(corpus.fetch("Other").has_value());
}
