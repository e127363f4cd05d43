#include "pathx/categorize.hpp"

#include <iostream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "pathx/text.hpp"

namespace pathx {

struct HttpSparqlClient::Impl {
  httplib::Client client;
  Impl(const std::string& host, int port) : client(host, port) {}
};

HttpSparqlClient::HttpSparqlClient(std::string host, int port,
                                   std::string endpoint_path, Clock& clock,
                                   double politeness_delay)
    : host_(std::move(host)),
      port_(port),
      endpoint_path_(std::move(endpoint_path)),
      limiter_(clock, politeness_delay),
      impl_(std::make_unique<Impl>(host_, port_)) {
  impl_->client.set_connection_timeout(10, 0);
  impl_->client.set_read_timeout(10, 0);
}

HttpSparqlClient::~HttpSparqlClient() = default;

std::optional<std::string> HttpSparqlClient::query_type(const std::string& title) {
  limiter_.acquire();
  std::string resource = title;
  for (char& c : resource)
    if (c == ' ') c = '_';
  std::string query =
      "SELECT ?type WHERE { <http://dbpedia.org/resource/" + resource +
      "> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> ?type }";
  std::string url = endpoint_path_ + "?format=application%2Fsparql-results%2Bjson&query=" +
                    url_encode(query);
  auto res = impl_->client.Get(url);
  if (!res) throw Error("sparql transport failure for '" + title + "'");
  if (res->status != 200)
    throw Error("sparql endpoint returned status " + std::to_string(res->status));

  nlohmann::json doc = nlohmann::json::parse(res->body);  // throws on bad JSON
  const auto& bindings = doc.at("results").at("bindings");
  std::optional<std::string> fallback_uri;
  for (const auto& b : bindings) {
    if (!b.contains("type")) continue;
    std::string uri = b["type"].value("value", "");
    if (uri.empty()) continue;
    const std::string ontology_prefix = "http://dbpedia.org/ontology/";
    if (uri.rfind(ontology_prefix, 0) == 0)
      return uri.substr(ontology_prefix.size());
    if (!fallback_uri) fallback_uri = uri;
  }
  // only non-ontology types found: treat as no explicit type
  return std::nullopt;
}

CategoryRecord categorize(const std::string& title, SparqlClient& client) {
  try {
    std::optional<std::string> type = client.query_type(title);
    if (type && !type->empty()) return {title, *type};
    std::cerr << "categorize: no explicit type for '" << title
              << "', falling back to " << kFallbackCategory << "\n";
  } catch (const std::exception& e) {
    std::cerr << "categorize: lookup failed for '" << title << "' (" << e.what()
              << "), falling back to " << kFallbackCategory << "\n";
  }
  return {title, kFallbackCategory};
}

}  // namespace pathx
