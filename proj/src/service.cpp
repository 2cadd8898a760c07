#include "xwalk/service.hpp"

#include <charconv>
#include <csignal>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

namespace xwalk {

using json = nlohmann::json;

namespace {

HttpReply error_reply(int status, const std::string& code, const std::string& message = {}) {
  json body = {{"error", code}};
  if (!message.empty()) body["message"] = message;
  return {status, body.dump()};
}

template <typename T>
bool parse_param(const std::multimap<std::string, std::string>& params, const char* name, T& out) {
  auto it = params.find(name);
  if (it == params.end()) return true;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

RetrievalService::RetrievalService(const CsrGraph& graph, WalkParams defaults, std::uint64_t default_seed)
    : graph_(graph), defaults_(defaults), default_seed_(default_seed) {
  defaults_.check();
}

HttpReply RetrievalService::health() const { return {200, "ok", "text/plain"}; }

HttpReply RetrievalService::retrieve(const std::multimap<std::string, std::string>& params) const {
  auto q = params.find("q");
  if (q == params.end() || q->second.empty()) return error_reply(400, "bad_request", "missing q");

  WalkParams p = defaults_;
  std::uint64_t seed = default_seed_;
  std::uint64_t walks = p.walks;
  std::uint32_t hops = p.hops;
  std::size_t topk = p.top_k;
  if (!parse_param(params, "walks", walks) || !parse_param(params, "hops", hops) ||
      !parse_param(params, "topk", topk) || !parse_param(params, "seed", seed)) {
    return error_reply(400, "bad_request", "non-numeric parameter");
  }
  p.walks = walks;
  p.hops = hops;
  p.top_k = topk;

  try {
    const auto result = xwalk::retrieve(graph_, q->second, p, seed);
    json items = json::array();
    for (const auto& r : result.results) items.push_back({{"listing", r.listing}, {"score", r.score}});
    return {200, json{{"query", result.query}, {"results", std::move(items)}}.dump()};
  } catch (const NoSuchQuery&) {
    return error_reply(404, "cold_start");
  } catch (const ParameterError& e) {
    return error_reply(400, "bad_request", e.what());
  } catch (const std::exception& e) {
    return error_reply(500, "internal", e.what());
  }
}

std::pair<std::string, int> parse_bind_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
    throw std::invalid_argument("bind address must be host:port, got '" + address + "'");
  }
  int port = 0;
  const auto* begin = address.data() + colon + 1;
  const auto* end = address.data() + address.size();
  auto [ptr, ec] = std::from_chars(begin, end, port);
  if (ec != std::errc{} || ptr != end || port < 0 || port > 65535) {
    throw std::invalid_argument("invalid port in bind address '" + address + "'");
  }
  return {address.substr(0, colon), port};
}

struct HttpFrontend::Impl {
  httplib::Server server;
};

HttpFrontend::HttpFrontend(const RetrievalService& service, std::uint32_t request_timeout_ms)
    : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  const auto secs = static_cast<time_t>(request_timeout_ms / 1000);
  const auto usecs = static_cast<time_t>((request_timeout_ms % 1000) * 1000);
  srv.set_read_timeout(secs, usecs);
  srv.set_write_timeout(secs, usecs);

  auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
  };
  srv.Get("/health", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, service.health());
  });
  srv.Get("/retrieve", [&service, send](const httplib::Request& req, httplib::Response& res) {
    std::multimap<std::string, std::string> params(req.params.begin(), req.params.end());
    send(res, service.retrieve(params));
  });
}

HttpFrontend::~HttpFrontend() = default;

int HttpFrontend::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpFrontend::run() { impl_->server.listen_after_bind(); }

void HttpFrontend::stop() { impl_->server.stop(); }

namespace {

HttpFrontend* g_frontend = nullptr;

extern "C" void stop_on_signal(int) {
  if (g_frontend) g_frontend->stop();
}

}  // namespace

void serve(const ServiceConfig& config, const std::function<void(int port)>& on_ready) {
  const auto graph = load_graph(config.graph_path);
  const RetrievalService service(graph, config.defaults, config.default_seed);
  HttpFrontend frontend(service, config.request_timeout_ms);
  const auto [host, port] = parse_bind_address(config.bind_address);
  const int bound = frontend.bind(host, port);

  g_frontend = &frontend;
  std::signal(SIGINT, stop_on_signal);
  std::signal(SIGTERM, stop_on_signal);
  if (on_ready) on_ready(bound);
  frontend.run();
  g_frontend = nullptr;
}

}  // namespace xwalk
