#include "marisim/tuning_server.hpp"

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <list>
#include <mutex>
#include <sstream>
#include <thread>

namespace marisim {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

HttpReply jsonReply(int status, const json& doc) { return {status, "application/json", doc.dump()}; }

HttpReply errorReply(int status, const std::string& message, const std::vector<std::string>& fields = {}) {
  json doc = {{"error", message}};
  if (!fields.empty()) doc["fields"] = fields;
  return jsonReply(status, doc);
}

std::vector<std::string> splitPath(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

std::string queryParam(const std::string& query, const std::string& key) {
  std::stringstream ss(query);
  std::string kv;
  while (std::getline(ss, kv, '&')) {
    const auto eq = kv.find('=');
    if (kv.substr(0, eq) == key) return eq == std::string::npos ? std::string() : kv.substr(eq + 1);
  }
  return {};
}

std::string mimeType(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

HttpReply serveStatic(const std::filesystem::path& root, const std::string& path) {
  if (root.empty()) return errorReply(404, "not found");
  std::string rel = path == "/" ? "index.html" : path.substr(1);
  for (const auto& part : splitPath(rel)) {
    if (part == "..") return errorReply(403, "forbidden");
  }
  const std::filesystem::path file = root / rel;
  std::ifstream in(file, std::ios::binary);
  if (!in || std::filesystem::is_directory(file)) return errorReply(404, "not found");
  std::stringstream ss;
  ss << in.rdbuf();
  return {200, mimeType(file), ss.str()};
}

HttpReply pngReply(const std::optional<std::vector<std::uint8_t>>& png, const std::string& what) {
  if (!png) return errorReply(404, what + " not found");
  return {200, "image/png", std::string(png->begin(), png->end())};
}

HttpReply route(TuningService& service, const std::string& method, const std::string& path, const std::string& query,
                const std::string& body, const std::filesystem::path& static_dir) {
  const auto parts = splitPath(path);
  if (parts.empty() || parts[0] != "sessions") {
    if (method == "GET") return serveStatic(static_dir, path);
    return errorReply(404, "not found");
  }

  if (parts.size() == 1) {
    if (method != "POST") return errorReply(405, "method not allowed");
    json req;
    try {
      req = json::parse(body);
    } catch (const json::exception& e) {
      return errorReply(400, std::string("session request: ") + e.what());
    }
    auto session = createSessionFromJson(service, req);
    return jsonReply(201, session->state());
  }

  auto session = service.session(parts[1]);
  const std::string action = parts.size() > 2 ? parts[2] : "state";
  if (parts.size() > 3) return errorReply(404, "not found");

  if (action == "state" && method == "GET") return jsonReply(200, session->state());
  if (action == "preview.png" && method == "GET") return pngReply(session->previewPng(queryParam(query, "token")), "preview");
  if (action == "reference.png" && method == "GET") return pngReply(session->referencePng(), "reference");
  if (action == "params" && method == "POST") {
    const std::string reply = handleParamsMessage(*session, body);
    return {json::parse(reply).contains("error") ? 400 : 200, "application/json", reply};
  }
  if (action == "save" && method == "POST") {
    json req;
    try {
      req = json::parse(body);
    } catch (const json::exception& e) {
      return errorReply(400, std::string("save request: ") + e.what());
    }
    if (!req.contains("path") || !req["path"].is_string()) return errorReply(400, "save request needs \"path\"", {"path"});
    const std::string target = req["path"].get<std::string>();
    const std::uint64_t hash = session->save(target);
    return jsonReply(200, {{"path", target}, {"preview_hash", std::to_string(hash)}});
  }
  return errorReply(404, "not found");
}

} // namespace

HttpReply handleHttpRequest(TuningService& service, const std::string& method, const std::string& target,
                            const std::string& body, const std::filesystem::path& static_dir) {
  const auto q = target.find('?');
  const std::string path = target.substr(0, q);
  const std::string query = q == std::string::npos ? std::string() : target.substr(q + 1);
  try {
    return route(service, method, path, query, body, static_dir);
  } catch (const SessionNotFound& e) {
    return errorReply(404, e.what());
  } catch (const ParamsRejected& e) {
    return errorReply(400, e.what(), e.fields());
  } catch (const ConfigError& e) {
    return errorReply(400, e.what());
  } catch (const LoadError& e) {
    return errorReply(400, e.what());
  } catch (const json::exception& e) {
    return errorReply(400, e.what());
  } catch (const std::exception& e) {
    return errorReply(500, e.what());
  }
}

std::string handleParamsMessage(TuningSession& session, const std::string& message) {
  json doc;
  try {
    doc = json::parse(message);
  } catch (const json::exception& e) {
    return json{{"error", std::string("params: ") + e.what()}, {"fields", json::array()}}.dump();
  }
  try {
    const PreviewResult r = session.updateFromJson(doc);
    json reply = {{"preview_token", r.token}, {"latency_ms", r.latency_ms}};
    if (doc.is_object() && doc.contains("seq")) reply["seq"] = doc["seq"];
    return reply.dump();
  } catch (const ParamsRejected& e) {
    json reply = {{"error", e.what()}, {"fields", e.fields()}};
    if (doc.is_object() && doc.contains("seq")) reply["seq"] = doc["seq"];
    return reply.dump();
  }
}

struct TuningServer::Impl {
  TuningService& service;
  ServerOptions options;
  asio::io_context io;
  std::unique_ptr<tcp::acceptor> acceptor;
  unsigned short port = 0;
  std::atomic<bool> stopping{false};
  std::thread accept_thread;

  std::mutex mutex;
  std::condition_variable stopped_cv;
  bool stopped = false;
  struct Connection {
    std::shared_ptr<tcp::socket> socket;
    std::shared_ptr<std::atomic<bool>> done;
    std::thread thread;
  };
  std::list<Connection> connections;

  Impl(TuningService& s, ServerOptions o) : service(s), options(std::move(o)) {}

  void serveWebSocket(tcp::socket& socket, http::request<http::string_body>& req, TuningSession& session) {
    websocket::stream<tcp::socket&> ws(socket);
    ws.accept(req);
    beast::flat_buffer buffer;
    for (;;) {
      buffer.clear();
      ws.read(buffer);
      const std::string reply = handleParamsMessage(session, beast::buffers_to_string(buffer.data()));
      ws.text(true);
      ws.write(asio::buffer(reply));
    }
  }

  void serveConnection(std::shared_ptr<tcp::socket> socket) {
    beast::error_code ec;
    beast::flat_buffer buffer;
    try {
      for (;;) {
        http::request<http::string_body> req;
        http::read(*socket, buffer, req, ec);
        if (ec) break;
        const std::string target(req.target());
        if (websocket::is_upgrade(req)) {
          const auto parts = splitPath(target.substr(0, target.find('?')));
          std::shared_ptr<TuningSession> session;
          if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "params") {
            try {
              session = service.session(parts[1]);
            } catch (const SessionNotFound&) {
            }
          }
          if (!session) {
            http::response<http::string_body> res{http::status::not_found, req.version()};
            res.set(http::field::content_type, "application/json");
            res.body() = json{{"error", "no such WebSocket endpoint"}}.dump();
            res.prepare_payload();
            http::write(*socket, res, ec);
            break;
          }
          serveWebSocket(*socket, req, *session);
          break;
        }
        const HttpReply reply =
            handleHttpRequest(service, std::string(req.method_string()), target, req.body(), options.static_dir);
        http::response<http::string_body> res{static_cast<http::status>(reply.status), req.version()};
        res.set(http::field::content_type, reply.content_type);
        res.set(http::field::cache_control, "no-store");
        res.keep_alive(req.keep_alive());
        res.body() = reply.body;
        res.prepare_payload();
        http::write(*socket, res, ec);
        if (ec || !req.keep_alive()) break;
      }
    } catch (const beast::system_error&) {
      // Peer went away or the server is stopping.
    } catch (const std::exception& e) {
      std::cerr << "tuning server: " << e.what() << "\n";
    }
    socket->shutdown(tcp::socket::shutdown_both, ec);
    socket->close(ec);
  }

  // Caller holds the mutex.
  void reapFinished() {
    for (auto it = connections.begin(); it != connections.end();) {
      if (*it->done) {
        it->thread.join();
        it = connections.erase(it);
      } else {
        ++it;
      }
    }
  }

  void acceptLoop() {
    for (;;) {
      auto socket = std::make_shared<tcp::socket>(io);
      beast::error_code ec;
      acceptor->accept(*socket, ec);
      if (stopping) break;
      if (ec) continue;
      std::lock_guard lock(mutex);
      reapFinished();
      auto done = std::make_shared<std::atomic<bool>>(false);
      connections.push_back({socket, done, std::thread([this, socket, done] {
                               serveConnection(socket);
                               *done = true;
                             })});
    }
  }
};

TuningServer::TuningServer(TuningService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

TuningServer::~TuningServer() { stop(); }

unsigned short TuningServer::start() {
  auto& d = *impl_;
  const tcp::endpoint endpoint(asio::ip::make_address(d.options.address), d.options.port);
  d.acceptor = std::make_unique<tcp::acceptor>(d.io);
  d.acceptor->open(endpoint.protocol());
  d.acceptor->set_option(asio::socket_base::reuse_address(true));
  d.acceptor->bind(endpoint);
  d.acceptor->listen();
  d.port = d.acceptor->local_endpoint().port();
  d.accept_thread = std::thread([&d] { d.acceptLoop(); });
  return d.port;
}

void TuningServer::stop() {
  auto& d = *impl_;
  if (!d.acceptor || d.stopping.exchange(true)) return;
  // Wake the blocking accept with a throwaway connection.
  {
    beast::error_code ec;
    tcp::socket poke(d.io);
    poke.connect(tcp::endpoint(asio::ip::make_address(d.options.address == "0.0.0.0" ? "127.0.0.1" : d.options.address),
                               d.port),
                 ec);
  }
  if (d.accept_thread.joinable()) d.accept_thread.join();
  beast::error_code ec;
  d.acceptor->close(ec);
  std::list<Impl::Connection> connections;
  {
    std::lock_guard lock(d.mutex);
    for (auto& c : d.connections) c.socket->shutdown(tcp::socket::shutdown_both, ec);
    connections.swap(d.connections);
  }
  for (auto& c : connections) c.thread.join();
  {
    std::lock_guard lock(d.mutex);
    d.stopped = true;
  }
  d.stopped_cv.notify_all();
}

void TuningServer::wait() {
  auto& d = *impl_;
  std::unique_lock lock(d.mutex);
  d.stopped_cv.wait(lock, [&d] { return d.stopped; });
}

} // namespace marisim
