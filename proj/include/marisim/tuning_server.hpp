#pragma once

// HTTP and WebSocket front end for TuningService.
//
//   POST /sessions                  create a session (JSON body, see tuning.hpp)
//   GET  /sessions/{id}/state       current params and latest preview token
//   GET  /sessions/{id}/preview.png ?token=... (latest when omitted)
//   GET  /sessions/{id}/reference.png
//   POST /sessions/{id}/params      HTTP variant of the WebSocket update
//   POST /sessions/{id}/save        {"path": "..."}
//   WS   /sessions/{id}/params      params JSON in, {"preview_token","latency_ms"} out
//   GET  /...                       static files from the configured directory

#include "marisim/tuning.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace marisim {

struct HttpReply {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Routing for plain HTTP requests; transport independent.
HttpReply handleHttpRequest(TuningService& service, const std::string& method, const std::string& target,
                            const std::string& body, const std::filesystem::path& static_dir = {});

// Handles one WebSocket text message for a session and returns the reply.
std::string handleParamsMessage(TuningSession& session, const std::string& message);

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::filesystem::path static_dir;
};

class TuningServer {
 public:
  TuningServer(TuningService& service, ServerOptions options);
  ~TuningServer();
  TuningServer(const TuningServer&) = delete;
  TuningServer& operator=(const TuningServer&) = delete;

  // Binds and starts accepting in the background. Returns the bound port.
  unsigned short start();
  void stop();
  // Blocks until stop() is called from another thread.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace marisim
