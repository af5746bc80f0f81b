#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace attentiv {

// Every failure surfaced by the library is an attentiv::Error carrying one of
// these kinds. The CLI maps each kind to a fixed process exit code.
enum class ErrorKind {
  parameter,
  stream_order,
  data,
  schema,
  training,
  stratification,
  model_version,
  model_truncated,
  model_checksum,
  not_found,
  validation,
  state,
  network,
  io,
};

std::string_view to_string(ErrorKind kind);
std::optional<ErrorKind> parse_error_kind(std::string_view name);

// Exit code used by the CLI for an error of this kind. 0 is never returned.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> index = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }

  // Offending element (row, sample, fold...) when the error refers to one.
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> index_;
};

}  // namespace attentiv
