#pragma once

#include "attentiv/stream_service.hpp"

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace attentiv::wire {

using nlohmann::json;

// One JSON object per line, UTF-8, '\n' terminated. Every request gets zero
// or more "prediction" lines followed by exactly one terminal reply
// ("open_ack", "ack", "summary" or "error"). See protocol.md.
inline constexpr int kProtocolVersion = 1;

json to_json(const stream::WirePrediction& p);
stream::WirePrediction prediction_from_json(const json& j);
json to_json(const stream::SessionSummary& s);
json error_json(std::string_view code, std::string_view message,
                std::optional<std::size_t> index = std::nullopt,
                std::string_view request = {});

bool is_terminal(const json& reply);

class ProtocolHandler {
 public:
  explicit ProtocolHandler(stream::SessionManager& sessions) : sessions_(sessions) {}

  // Never throws for bad input; protocol and domain failures become an
  // "error" reply.
  std::vector<json> handle(const json& request);
  std::vector<std::string> handle_line(std::string_view line);

 private:
  std::vector<json> dispatch(const std::string& type, const json& request);

  stream::SessionManager& sessions_;
};

}  // namespace attentiv::wire
