#pragma once

#include <optional>
#include <string_view>

namespace attentiv {

enum class Algorithm { svm, nb, rf, ensemble };

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

}  // namespace attentiv
