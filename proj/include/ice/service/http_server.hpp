#pragma once

#include <memory>
#include <string>

#include "ice/service/service.hpp"

namespace httplib {
class Server;
}

namespace ice::service {

/// Routes the Service onto HTTP. All bodies are application/json except the
/// dataset upload, which accepts a raw CSV body or a multipart form.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds host:port; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop() is called.
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  void install_routes();

  Service& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace ice::service
