#include "pathx/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <thread>
#include <unordered_set>

#include <httplib.h>

#include "pathx/text.hpp"

namespace pathx {

SnapshotCorpus::SnapshotCorpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw MissingFileError("corpus directory missing: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::vector<std::string> lines = split(read_file(f), '\n');
    if (lines.empty() || lines[0].empty())
      throw ParseError("snapshot document without a title line: " + f.string());
    ArticleDocument doc;
    doc.title = lines[0];
    if (lines.size() > 1 && !lines[1].empty())
      doc.links = split(lines[1], ',');
    for (std::size_t i = 2; i < lines.size(); ++i) {
      if (i > 2) doc.body += '\n';
      doc.body += lines[i];
    }
    std::string key = doc.title;
    docs_.emplace(std::move(key), std::move(doc));
  }
}

SnapshotCorpus::SnapshotCorpus(std::vector<ArticleDocument> documents) {
  for (ArticleDocument& d : documents) {
    std::string key = d.title;
    docs_.emplace(std::move(key), std::move(d));
  }
}

std::optional<ArticleDocument> SnapshotCorpus::fetch(const std::string& title) {
  auto it = docs_.find(title);
  if (it == docs_.end()) return std::nullopt;
  return it->second;
}

void write_snapshot_document(const std::filesystem::path& file,
                             const ArticleDocument& doc) {
  std::string out = doc.title + "\n" + join(doc.links, ',') + "\n" + doc.body;
  write_file(file, out);
}

double SystemClock::now() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void SystemClock::sleep_for(double seconds) {
  std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

void RateLimiter::acquire() {
  double t = clock_.now();
  if (!stamps_.empty()) {
    double earliest = stamps_.back() + min_interval_;
    if (t < earliest) {
      clock_.sleep_for(earliest - t);
      t = clock_.now();
    }
  }
  stamps_.push_back(t);
}

struct LiveCorpus::Impl {
  httplib::Client client;
  Impl(const std::string& host, int port) : client(host, port) {}
};

LiveCorpus::LiveCorpus(std::string host, int port, std::string path_prefix,
                       Clock& clock, double politeness_delay,
                       std::string user_agent, std::filesystem::path cache_dir)
    : host_(std::move(host)),
      port_(port),
      path_prefix_(std::move(path_prefix)),
      user_agent_(std::move(user_agent)),
      limiter_(clock, politeness_delay),
      cache_dir_(std::move(cache_dir)),
      impl_(std::make_unique<Impl>(host_, port_)) {
  impl_->client.set_connection_timeout(10, 0);
  impl_->client.set_read_timeout(10, 0);
}

LiveCorpus::~LiveCorpus() = default;

namespace {
ArticleDocument parse_snapshot_body(const std::string& content,
                                    const std::string& fallback_title) {
  std::vector<std::string> lines = split(content, '\n');
  ArticleDocument doc;
  doc.title = lines.empty() || lines[0].empty() ? fallback_title : lines[0];
  if (lines.size() > 1 && !lines[1].empty()) doc.links = split(lines[1], ',');
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (i > 2) doc.body += '\n';
    doc.body += lines[i];
  }
  return doc;
}
}  // namespace

std::optional<ArticleDocument> LiveCorpus::fetch(const std::string& title) {
  if (!cache_dir_.empty()) {
    std::filesystem::path cached = cache_dir_ / (url_encode(title) + ".txt");
    if (std::filesystem::exists(cached))
      return parse_snapshot_body(read_file(cached), title);
  }
  limiter_.acquire();
  httplib::Headers headers = {{"User-Agent", user_agent_}};
  auto res = impl_->client.Get(path_prefix_ + url_encode(title), headers);
  if (!res || res->status != 200) return std::nullopt;
  if (!cache_dir_.empty()) {
    std::filesystem::create_directories(cache_dir_);
    write_file(cache_dir_ / (url_encode(title) + ".txt"), res->body);
  }
  return parse_snapshot_body(res->body, title);
}

bool is_valid_title(std::string_view title) {
  if (title.empty()) return false;
  for (const char* marker : {"Talk", "User", "File", "ISO"})
    if (title.find(marker) != std::string_view::npos) return false;
  if (title.find('%') != std::string_view::npos) return false;
  if (title.find('#') != std::string_view::npos) return false;
  if (title.find(':') != std::string_view::npos) return false;
  bool all_digits = true;
  for (unsigned char c : title)
    if (!std::isdigit(c)) {
      all_digits = false;
      break;
    }
  return !all_digits;
}

namespace {

/// Successor candidates of `doc` given the nodes already on the path.
/// Duplicate mentions are kept: a link listed twice is twice as likely.
std::vector<std::string> candidate_links(
    const ArticleDocument& doc, const std::unordered_set<std::string>& visited,
    const CrawlConfig& config) {
  std::vector<std::string> pool = doc.links;
  if (config.policy == CrawlPolicy::Dense && config.window_before_filter &&
      static_cast<int>(pool.size()) > config.dense_window)
    pool.resize(static_cast<std::size_t>(config.dense_window));

  std::vector<std::string> out;
  for (std::string& link : pool)
    if (is_valid_title(link) && !visited.count(link)) out.push_back(std::move(link));

  if (config.policy == CrawlPolicy::Dense && !config.window_before_filter &&
      static_cast<int>(out.size()) > config.dense_window)
    out.resize(static_cast<std::size_t>(config.dense_window));
  return out;
}

}  // namespace

GeneratedPath generate_path(CorpusSource& source, const CrawlConfig& config,
                            Rng& rng, const std::string& start_title) {
  std::optional<ArticleDocument> start = source.fetch(start_title);
  if (!start)
    throw DanglingIdError("start article missing from corpus: " + start_title);

  int target = static_cast<int>(rng.uniform_int(config.min_len, config.max_len));
  GeneratedPath path;
  path.titles.push_back(start_title);
  std::unordered_set<std::string> visited = {start_title};
  ArticleDocument current = std::move(*start);

  while (static_cast<int>(path.titles.size()) < target) {
    std::vector<std::string> candidates = candidate_links(current, visited, config);
    if (candidates.empty()) {
      path.early_terminated = true;
      return path;
    }
    std::string next = candidates[rng.uniform(candidates.size())];
    path.titles.push_back(next);
    visited.insert(next);
    if (static_cast<int>(path.titles.size()) == target) break;
    std::optional<ArticleDocument> doc = source.fetch(next);
    if (!doc) {
      // unreachable article: walk has nowhere to go
      path.early_terminated = true;
      return path;
    }
    current = std::move(*doc);
  }
  return path;
}

Dataset generate_dataset(CorpusSource& source, const CrawlConfig& config,
                         const CategorizeFn& categorize) {
  if (config.min_len < 2 || config.min_len > config.max_len)
    throw DomainError("crawl config requires 2 <= min_len <= max_len");
  if (config.dense_window < 1) throw DomainError("dense_window must be >= 1");
  if (config.num_paths < 1) throw DomainError("num_paths must be >= 1");

  Rng rng(config.rng_seed);
  std::vector<std::vector<std::string>> accepted;
  accepted.reserve(static_cast<std::size_t>(config.num_paths));

  while (static_cast<int>(accepted.size()) < config.num_paths) {
    int attempts = 0;
    while (true) {
      std::string start = config.seed_title;
      if (config.restart_from_prior && !accepted.empty()) {
        const auto& prior = accepted[rng.uniform(accepted.size())];
        const std::string& candidate = prior[rng.uniform(prior.size())];
        if (source.fetch(candidate)) start = candidate;
      }
      GeneratedPath p = generate_path(source, config, rng, start);
      if (static_cast<int>(p.titles.size()) >= config.min_len) {
        accepted.push_back(std::move(p.titles));
        break;
      }
      if (++attempts >= config.max_attempts_per_path)
        throw Error("corpus exhaustion: cannot generate a path of length >= " +
                    std::to_string(config.min_len) + " from '" +
                    config.seed_title + "' after " + std::to_string(attempts) +
                    " attempts");
    }
  }

  Dataset ds;
  for (const auto& titles : accepted)
    for (const std::string& t : titles)
      if (ds.graph.find_title(t) == kNoNode) ds.graph.add_node(t);
  PathId pid = 0;
  for (const auto& titles : accepted) {
    Trajectory traj;
    traj.path_id = pid++;
    for (std::size_t i = 0; i + 1 < titles.size(); ++i)
      ds.graph.add_edge(ds.graph.find_title(titles[i]),
                        ds.graph.find_title(titles[i + 1]));
    for (const std::string& t : titles) traj.node_ids.push_back(ds.graph.find_title(t));
    apply_default_split(traj);
    ds.trajectories.push_back(std::move(traj));
  }
  ds.categories.reserve(static_cast<std::size_t>(ds.graph.num_nodes()));
  for (const ArticleNode& n : ds.graph.nodes())
    ds.categories.push_back(categorize ? categorize(n.title) : "subject.General");
  return ds;
}

}  // namespace pathx
