#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "xwalk/graph.hpp"
#include "xwalk/walk.hpp"

namespace xwalk {

struct ServiceConfig {
  std::string graph_path;
  std::string bind_address = "127.0.0.1:8080";  // host:port
  WalkParams defaults;
  std::uint64_t default_seed = 0;
  std::uint32_t request_timeout_ms = 5000;
};

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Request handling over a shared read-only graph. Thread-safe.
class RetrievalService {
 public:
  RetrievalService(const CsrGraph& graph, WalkParams defaults, std::uint64_t default_seed = 0);

  HttpReply health() const;

  /// GET /retrieve?q=&walks=&hops=&topk=&seed=
  HttpReply retrieve(const std::multimap<std::string, std::string>& params) const;

 private:
  const CsrGraph& graph_;
  WalkParams defaults_;
  std::uint64_t default_seed_;
};

/// Splits "host:port". Throws std::invalid_argument.
std::pair<std::string, int> parse_bind_address(const std::string& address);

/// HTTP front end for a RetrievalService.
class HttpFrontend {
 public:
  HttpFrontend(const RetrievalService& service, std::uint32_t request_timeout_ms);
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  /// Binds the socket; port 0 picks a free port. Returns the bound port.
  /// Throws std::runtime_error on bind failure.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop() is called.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Loads and validates the graph, binds and serves until the process is signaled.
void serve(const ServiceConfig& config, const std::function<void(int port)>& on_ready = {});

}  // namespace xwalk
