#pragma once

#include <memory>
#include <optional>
#include <string>

#include "pathx/corpus.hpp"

namespace pathx {

struct CategoryRecord {
  std::string title;
  std::string category;
};

inline constexpr const char* kFallbackCategory = "subject.General";

/// Resolves an article title to an ontology type name.
class SparqlClient {
 public:
  virtual ~SparqlClient() = default;
  /// Empty optional when the article has no explicit type; throws on
  /// transport or parse failure.
  virtual std::optional<std::string> query_type(const std::string& title) = 0;
};

/// SPARQL-over-HTTP client (JSON results format). Requests go through the
/// same politeness limiter as page fetches; timeout 10 s.
class HttpSparqlClient : public SparqlClient {
 public:
  HttpSparqlClient(std::string host, int port, std::string endpoint_path,
                   Clock& clock, double politeness_delay = 1.0);
  ~HttpSparqlClient() override;

  std::optional<std::string> query_type(const std::string& title) override;

 private:
  std::string host_;
  int port_;
  std::string endpoint_path_;
  RateLimiter limiter_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Never throws: no explicit type, timeouts, transport and parse errors
/// all collapse to the subject.General fallback (with a diagnostic on
/// stderr).
CategoryRecord categorize(const std::string& title, SparqlClient& client);

}  // namespace pathx
