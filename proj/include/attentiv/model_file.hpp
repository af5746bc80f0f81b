#pragma once

#include "attentiv/algorithm.hpp"
#include "attentiv/classifier.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace attentiv {

// Text layout, one item per line:
//
//   attentiv-model v1
//   algorithm <svm|nb|rf|ensemble>
//   features <name>,<name>,...
//   <JSON document: scaler, training metadata, parameter block>
//   checksum crc32 <8 hex digits>
//
// The checksum covers every byte before the checksum line.
inline constexpr std::string_view kModelMagic = "attentiv-model";
inline constexpr std::string_view kModelVersion = "v1";

struct ModelHeader {
  std::string version;
  Algorithm algorithm = Algorithm::ensemble;
  std::vector<std::string> feature_names;
};

std::string serialize_model(const TrainedModel& model);

// Throws model_version, model_truncated or model_checksum errors.
TrainedModel deserialize_model(std::string_view text);

// Reads only the header lines; the parameter block is not parsed.
ModelHeader read_model_header(std::string_view text);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);
ModelHeader peek_model(const std::filesystem::path& path);

}  // namespace attentiv
