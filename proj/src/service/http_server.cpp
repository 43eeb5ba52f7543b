#include "ice/service/http_server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace ice::service {

namespace {

constexpr const char* kJson = "application/json";

void send(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  return Json::parse(req.body);
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn, int success = 200) {
  return [fn, success](const httplib::Request& req, httplib::Response& res) {
    try {
      send(res, success, fn(req));
    } catch (const std::exception& e) {
      auto [status, body] = error_response(e);
      send(res, status, body);
    }
  };
}

std::string path_id(const httplib::Request& req) { return req.matches[1]; }

std::size_t parse_stage(const Json& body) {
  if (!body.contains("stage") || !body.at("stage").is_number_integer() ||
      body.at("stage").get<long long>() < 1) {
    throw ApiError(400, "rollback requires a positive integer 'stage'");
  }
  return body.at("stage").get<std::size_t>();
}

}  // namespace

HttpServer::HttpServer(Service& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpServer::~HttpServer() = default;

void HttpServer::install_routes() {
  auto& svc = service_;
  auto& srv = *server_;

  srv.Get("/api/health", guarded([](const httplib::Request&) {
            return Json{{"status", "ok"}};
          }));

  srv.Post("/api/datasets", guarded(
                                [&svc](const httplib::Request& req) {
                                  if (req.is_multipart_form_data()) {
                                    if (!req.has_file("file")) {
                                      throw ApiError(400, "multipart upload needs a 'file' part");
                                    }
                                    std::string target = req.get_param_value("target");
                                    if (req.has_file("target")) {
                                      target = req.get_file_value("target").content;
                                    }
                                    return svc.create_dataset(req.get_file_value("file").content,
                                                              target);
                                  }
                                  return svc.create_dataset(req.body,
                                                            req.get_param_value("target"));
                                },
                                201));
  srv.Get("/api/datasets", guarded([&svc](const httplib::Request&) {
            return svc.list_datasets();
          }));
  srv.Get(R"(/api/datasets/([^/]+))", guarded([&svc](const httplib::Request& req) {
            return svc.get_dataset(path_id(req));
          }));

  srv.Post("/api/sessions", guarded(
                                [&svc](const httplib::Request& req) {
                                  return svc.create_session(parse_body(req));
                                },
                                201));
  srv.Post("/api/sessions/import", guarded(
                                       [&svc](const httplib::Request& req) {
                                         return svc.import_session(parse_body(req));
                                       },
                                       201));
  srv.Get(R"(/api/sessions/([^/]+))", guarded([&svc](const httplib::Request& req) {
            return svc.get_session(path_id(req));
          }));
  srv.Get(R"(/api/sessions/([^/]+)/explorer)",
          guarded([&svc](const httplib::Request& req) {
            return svc.get_explorer(path_id(req));
          }));
  srv.Get(R"(/api/sessions/([^/]+)/aggregate)",
          guarded([&svc](const httplib::Request& req) {
            return svc.get_aggregate(path_id(req));
          }));
  srv.Get(R"(/api/sessions/([^/]+)/provenance)",
          guarded([&svc](const httplib::Request& req) {
            return svc.get_provenance(path_id(req));
          }));
  srv.Get(R"(/api/sessions/([^/]+)/document)",
          guarded([&svc](const httplib::Request& req) {
            return svc.export_session(path_id(req));
          }));
  srv.Post(R"(/api/sessions/([^/]+)/filter)",
           guarded([&svc](const httplib::Request& req) {
             return svc.apply_filter(path_id(req), parse_body(req));
           }));
  srv.Post(R"(/api/sessions/([^/]+)/rollback)",
           guarded([&svc](const httplib::Request& req) {
             return svc.rollback(path_id(req), parse_stage(parse_body(req)));
           }));
  srv.Post(R"(/api/sessions/([^/]+)/searches)",
           guarded(
               [&svc](const httplib::Request& req) {
                 return svc.start_search(path_id(req), parse_body(req));
               },
               202));
  srv.Post(R"(/api/sessions/([^/]+)/importance)",
           guarded([&svc](const httplib::Request& req) {
             return svc.importance(path_id(req), parse_body(req));
           }));
  srv.Get(R"(/api/jobs/([^/]+))", guarded([&svc](const httplib::Request& req) {
            return svc.get_job(path_id(req));
          }));

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      send(res, res.status,
           {{"error", {{"code", res.status == 404 ? "not_found" : "http_error"},
                       {"message", httplib::status_message(res.status)}}}});
    }
  });
  srv.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
  });
}

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  if (!server_->bind_to_port(host, port)) return -1;
  return port;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() { server_->stop(); }

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace ice::service
