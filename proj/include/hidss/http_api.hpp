#pragma once

#include <string>

#include "hidss/errors.hpp"
#include "hidss/service.hpp"

namespace httplib {
class Server;
}

namespace hidss {

inline constexpr const char* kContentType = "application/json";
inline constexpr const char* kActorHeader = "X-HIDSS-Actor";

/// HTTP status for an error code (400 validation, 404 unknown, 409 conflict,
/// 503 cold start).
int http_status(const Error& error);
/// {"errors": [{code, message, field}, ...]}
Document error_document(const Error& error);

/// Registers every service endpoint on the server.
void install_routes(httplib::Server& server, Service& service);

/// Blocks serving on the configured listen address.
void serve(Service& service);

}  // namespace hidss
