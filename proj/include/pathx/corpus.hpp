#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pathx/dataset.hpp"
#include "pathx/rng.hpp"

namespace pathx {

/// One article: title, body text (token source for the TF-IDF features)
/// and its outbound links in document order. Link order is load-bearing;
/// the dense crawl policy samples from the first few links only.
struct ArticleDocument {
  std::string title;
  std::string body;
  std::vector<std::string> links;
};

/// Source of articles for the crawler.
class CorpusSource {
 public:
  virtual ~CorpusSource() = default;
  /// nullopt when the title cannot be resolved.
  virtual std::optional<ArticleDocument> fetch(const std::string& title) = 0;
};

/// In-memory snapshot loaded from a directory: one document per file,
/// first line title, second line comma-joined ordered links, remainder
/// body text.
class SnapshotCorpus : public CorpusSource {
 public:
  explicit SnapshotCorpus(const std::filesystem::path& dir);
  explicit SnapshotCorpus(std::vector<ArticleDocument> documents);

  std::optional<ArticleDocument> fetch(const std::string& title) override;
  std::size_t size() const { return docs_.size(); }

 private:
  std::unordered_map<std::string, ArticleDocument> docs_;
};

void write_snapshot_document(const std::filesystem::path& file,
                             const ArticleDocument& doc);

/// Injectable clock so rate limiting is testable without real sleeps.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;                    // seconds, monotone
  virtual void sleep_for(double seconds) = 0;
};

class SystemClock : public Clock {
 public:
  double now() override;
  void sleep_for(double seconds) override;
};

/// Enforces a minimum interval between acquire() returns.
class RateLimiter {
 public:
  RateLimiter(Clock& clock, double min_interval)
      : clock_(clock), min_interval_(min_interval) {}

  /// Blocks (via the clock) until at least min_interval has elapsed since
  /// the previous acquire, then stamps the request time.
  void acquire();

  const std::vector<double>& timestamps() const { return stamps_; }

 private:
  Clock& clock_;
  double min_interval_;
  std::vector<double> stamps_;
};

/// Fetches snapshot-format documents over HTTP (GET {prefix}/{title}),
/// one request per politeness interval.
class LiveCorpus : public CorpusSource {
 public:
  LiveCorpus(std::string host, int port, std::string path_prefix, Clock& clock,
             double politeness_delay = 1.0,
             std::string user_agent = "pathx-crawler/0.1",
             std::filesystem::path cache_dir = {});
  ~LiveCorpus() override;

  std::optional<ArticleDocument> fetch(const std::string& title) override;
  const RateLimiter& limiter() const { return limiter_; }

 private:
  std::string host_;
  int port_;
  std::string path_prefix_;
  std::string user_agent_;
  RateLimiter limiter_;
  std::filesystem::path cache_dir_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Title filter for the crawl. Rejects titles containing the namespace
/// markers Talk/User/File, the token ISO (exact case), '%', '#', ':',
/// and titles consisting solely of digits.
bool is_valid_title(std::string_view title);

enum class CrawlPolicy { Dense, Sparse };

struct CrawlConfig {
  std::string seed_title;
  int num_paths = 3000;
  int min_len = 4;
  int max_len = 7;
  CrawlPolicy policy = CrawlPolicy::Sparse;
  int dense_window = 5;
  std::uint64_t rng_seed = 0;
  /// Alternative reading of the dense rule: cut the 5-link window before
  /// dropping invalid/visited titles.
  bool window_before_filter = false;
  /// Restart each walk from a random node of a previous path instead of
  /// the seed article. Off by default.
  bool restart_from_prior = false;
  int max_attempts_per_path = 100;
};

struct GeneratedPath {
  std::vector<std::string> titles;
  bool early_terminated = false;  // stopped before the drawn target length
};

/// One random walk. Starts at start_title, draws a target length uniformly
/// from [min_len, max_len], then repeatedly picks a successor uniformly
/// from the valid, unvisited candidate links (dense policy: from the first
/// dense_window of them). Stops at the target length or when no candidate
/// remains.
GeneratedPath generate_path(CorpusSource& source, const CrawlConfig& config,
                            Rng& rng, const std::string& start_title);

using CategorizeFn = std::function<std::string(const std::string& title)>;

/// Runs walks until num_paths paths of length >= min_len are collected
/// (shorter walks are discarded and retried, bounded per slot). The graph
/// holds exactly the traversed nodes and edges, ids in first-appearance
/// order. Deterministic for a fixed rng_seed.
Dataset generate_dataset(CorpusSource& source, const CrawlConfig& config,
                         const CategorizeFn& categorize = nullptr);

}  // namespace pathx
