#include "attentiv/error.hpp"

namespace attentiv {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::stream_order: return "stream_order";
    case ErrorKind::data: return "data";
    case ErrorKind::schema: return "schema";
    case ErrorKind::training: return "training";
    case ErrorKind::stratification: return "stratification";
    case ErrorKind::model_version: return "model_version";
    case ErrorKind::model_truncated: return "model_truncated";
    case ErrorKind::model_checksum: return "model_checksum";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::validation: return "validation";
    case ErrorKind::state: return "state";
    case ErrorKind::network: return "network";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

std::optional<ErrorKind> parse_error_kind(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(ErrorKind::io); ++k) {
    const auto kind = static_cast<ErrorKind>(k);
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter: return 10;
    case ErrorKind::stream_order: return 11;
    case ErrorKind::data: return 12;
    case ErrorKind::schema: return 13;
    case ErrorKind::training: return 14;
    case ErrorKind::stratification: return 15;
    case ErrorKind::model_version: return 16;
    case ErrorKind::model_truncated: return 17;
    case ErrorKind::model_checksum: return 18;
    case ErrorKind::not_found: return 19;
    case ErrorKind::validation: return 20;
    case ErrorKind::state: return 21;
    case ErrorKind::network: return 22;
    case ErrorKind::io: return 23;
  }
  return 1;
}

Error::Error(ErrorKind kind, const std::string& message,
             std::optional<std::size_t> index)
    : std::runtime_error(message), kind_(kind), index_(index) {}

}  // namespace attentiv
