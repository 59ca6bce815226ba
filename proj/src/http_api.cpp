#include "hidss/http_api.hpp"

#include <httplib.h>

#include <iostream>

namespace hidss {

namespace {

using httplib::Request;
using httplib::Response;

void reply(Response& res, int status, const Document& body) {
  res.status = status;
  res.set_content(canonical(body), kContentType);
}

Document parse_body(const Request& req) {
  if (req.body.empty()) return Document::object();
  try {
    return Document::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    fail("bad-request", std::string("request body is not a valid document: ") + e.what(), "body");
  }
}

std::string actor_of(const Request& req) { return req.get_header_value(kActorHeader); }

int path_int(const Request& req, std::size_t i, const char* field) {
  try {
    return std::stoi(req.matches[static_cast<int>(i)].str());
  } catch (const std::exception&) {
    fail("bad-request", std::string(field) + " must be an integer", field);
  }
}

// Runs a handler, mapping thrown errors to the machine-readable error body.
template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const Request& req, Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      reply(res, http_status(e), error_document(e));
    } catch (const nlohmann::json::exception& e) {
      Error err("bad-request", e.what());
      reply(res, 400, error_document(err));
    } catch (const std::exception& e) {
      Error err("internal", e.what());
      reply(res, 500, error_document(err));
    }
  };
}

}  // namespace

int http_status(const Error& error) {
  const auto& code = error.code();
  if (code == "unknown-venture" || code == "unknown-version" || code == "not-found") return 404;
  if (code == "stale-base" || code == "duplicate-outcome" || code == "duplicate-venture") return 409;
  if (code == "cold-start" || code == "no-model") return 503;
  if (code == "internal" || code == "io") return 500;
  return 400;
}

Document error_document(const Error& error) {
  Document list = Document::array();
  for (const auto& i : error.issues()) list.push_back({{"code", i.code}, {"message", i.message}, {"field", i.field}});
  return {{"errors", list}};
}

void install_routes(httplib::Server& server, Service& service) {
  server.Post("/ventures", guarded([&service](const Request& req, Response& res) {
                reply(res, 201, service.register_venture(parse_body(req), actor_of(req)));
              }));

  server.Post(R"(/ventures/([^/]+)/versions)", guarded([&service](const Request& req, Response& res) {
                auto v = service.create_version(req.matches[1], parse_body(req), actor_of(req));
                reply(res, 201, to_document(v));
              }));

  server.Get(R"(/ventures/([^/]+)/versions/(\d+))", guarded([&service](const Request& req, Response& res) {
               reply(res, 200, to_document(service.version(req.matches[1], path_int(req, 2, "version_number"))));
             }));

  server.Get(R"(/ventures/([^/]+)/matches)", guarded([&service](const Request& req, Response& res) {
               std::size_t k = service.config().match_k;
               if (req.has_param("k")) {
                 auto text = req.get_param_value("k");
                 long long parsed = 0;
                 try {
                   parsed = std::stoll(text);
                 } catch (const std::exception&) {
                   fail("invalid-k", "k must be a positive integer", "k");
                 }
                 if (parsed <= 0) fail("invalid-k", "k must be a positive integer", "k");
                 k = static_cast<std::size_t>(parsed);
               }
               reply(res, 200, to_document(service.matches(req.matches[1], k)));
             }));

  server.Post(R"(/ventures/([^/]+)/versions/(\d+)/judgments)", guarded([&service](const Request& req, Response& res) {
                auto j = service.submit_judgment(req.matches[1], path_int(req, 2, "version_number"), parse_body(req),
                                                 actor_of(req));
                reply(res, 201, to_document(j));
              }));

  server.Get(R"(/ventures/([^/]+)/versions/(\d+)/guidance)", guarded([&service](const Request& req, Response& res) {
               auto report = service.process_validation_round(req.matches[1], path_int(req, 2, "version_number"),
                                                              actor_of(req));
               reply(res, 200, report.to_document());
             }));

  server.Post(R"(/ventures/([^/]+)/outcomes)", guarded([&service](const Request& req, Response& res) {
                reply(res, 201, to_document(service.record_outcome(req.matches[1], parse_body(req), actor_of(req))));
              }));

  server.Post("/admin/retrain", guarded([&service](const Request&, Response& res) {
                reply(res, 200, service.retrain().to_document());
              }));

  server.Get("/patterns/stats", guarded([&service](const Request& req, Response& res) {
               auto milestone = parse_milestone(req.get_param_value("milestone"));
               if (!milestone) fail("unknown-milestone", "milestone must be survival or series_a", "milestone");
               reply(res, 200, to_document(service.pattern_stats(*milestone)));
             }));

  server.Get("/mentors", guarded([&service](const Request&, Response& res) {
               Document list = Document::array();
               for (const auto& m : service.mentors()) list.push_back(to_document(m));
               reply(res, 200, list);
             }));

  server.Post("/mentors", guarded([&service](const Request& req, Response& res) {
                reply(res, 201, to_document(service.register_mentor(parse_body(req), actor_of(req))));
              }));

  server.Get("/catalog/patterns", guarded([&service](const Request&, Response& res) {
               reply(res, 200, service.repository().patterns().to_document());
             }));

  server.Get("/catalog/criteria", guarded([&service](const Request&, Response& res) {
               reply(res, 200, service.repository().criteria().to_document());
             }));
}

void serve(Service& service) {
  httplib::Server server;
  install_routes(server, service);
  const auto host = service.config().host();
  const int port = service.config().port();
  std::cerr << "hidss listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) fail("io", "cannot listen on " + service.config().listen, "listen");
}

}  // namespace hidss
