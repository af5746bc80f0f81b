#include "attentiv/model_file.hpp"

#include "attentiv/error.hpp"

#include <boost/crc.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace attentiv {

using nlohmann::json;

namespace {

std::uint32_t crc32(std::string_view bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::string hex8(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", v);
  return buf;
}

json to_json(const SvmModel& m) {
  return {{"weights", m.weights}, {"bias", m.bias}, {"C", m.C}, {"tol", m.tol},
          {"converged", m.converged}, {"iterations", m.iterations}};
}

json to_json(const NaiveBayesModel& m) {
  return {{"priors", m.priors}, {"means", m.means}, {"variances", m.variances},
          {"epsilon", m.epsilon}};
}

json to_json(const DecisionTree& t) {
  json feature = json::array(), threshold = json::array(), left = json::array(),
       right = json::array(), count0 = json::array(), count1 = json::array();
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    count0.push_back(n.counts[0]);
    count1.push_back(n.counts[1]);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"count0", count0},       {"count1", count1}};
}

json to_json(const RandomForestModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(to_json(t));
  return {{"seed", m.seed}, {"dims", m.dims}, {"trees", trees}};
}

json member_json(const BaseModel& m) {
  return {{"algorithm", to_string(algorithm_of(m))},
          {"params", std::visit([](const auto& x) { return to_json(x); }, m)}};
}

json to_json(const EnsembleModel& m) {
  json members = json::array();
  for (const auto& member : m.members) members.push_back(member_json(member));
  return {{"members", members}, {"skipped_members", m.skipped_members}};
}

SvmModel svm_from(const json& j) {
  SvmModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.C = j.at("C").get<double>();
  m.tol = j.at("tol").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<std::size_t>();
  return m;
}

NaiveBayesModel nb_from(const json& j) {
  NaiveBayesModel m;
  m.priors = j.at("priors").get<std::array<double, 2>>();
  m.means = j.at("means").get<std::array<std::vector<double>, 2>>();
  m.variances = j.at("variances").get<std::array<std::vector<double>, 2>>();
  m.epsilon = j.at("epsilon").get<double>();
  return m;
}

DecisionTree tree_from(const json& j) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<std::int32_t>>();
  const auto right = j.at("right").get<std::vector<std::int32_t>>();
  const auto count0 = j.at("count0").get<std::vector<std::uint32_t>>();
  const auto count1 = j.at("count1").get<std::vector<std::uint32_t>>();
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n ||
      count0.size() != n || count1.size() != n || n == 0) {
    throw Error(ErrorKind::model_truncated, "tree node arrays have inconsistent lengths");
  }
  DecisionTree t;
  t.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    TreeNode& node = t.nodes[i];
    node = {feature[i], threshold[i], left[i], right[i], {count0[i], count1[i]}};
    if (!node.is_leaf()) {
      const auto self = static_cast<std::int32_t>(i);
      if (node.left <= self || node.right <= self ||
          node.left >= static_cast<std::int32_t>(n) ||
          node.right >= static_cast<std::int32_t>(n)) {
        throw Error(ErrorKind::model_truncated, "tree node has an invalid child index");
      }
    }
  }
  return t;
}

RandomForestModel rf_from(const json& j) {
  RandomForestModel m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.dims = j.at("dims").get<std::size_t>();
  for (const auto& t : j.at("trees")) m.trees.push_back(tree_from(t));
  return m;
}

BaseModel member_from(const json& j) {
  const auto a = parse_algorithm(j.at("algorithm").get<std::string>());
  const json& p = j.at("params");
  if (a == Algorithm::svm) return svm_from(p);
  if (a == Algorithm::nb) return nb_from(p);
  if (a == Algorithm::rf) return rf_from(p);
  throw Error(ErrorKind::model_truncated, "unknown ensemble member algorithm");
}

EnsembleModel ensemble_from(const json& j) {
  EnsembleModel m;
  for (const auto& member : j.at("members")) m.members.push_back(member_from(member));
  m.skipped_members = j.at("skipped_members").get<std::size_t>();
  return m;
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
  return out;
}

std::vector<std::string> split_names(std::string_view s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.emplace_back(s.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view next_line(std::string_view text, std::size_t& pos) {
  if (pos >= text.size()) {
    throw Error(ErrorKind::model_truncated, "model file ends early");
  }
  const auto nl = text.find('\n', pos);
  if (nl == std::string_view::npos) {
    throw Error(ErrorKind::model_truncated, "model file ends mid-line");
  }
  const auto line = text.substr(pos, nl - pos);
  pos = nl + 1;
  return line;
}

std::string_view expect_prefix(std::string_view line, std::string_view key) {
  if (line.substr(0, key.size() + 1) != std::string(key) + " ") {
    throw Error(ErrorKind::model_truncated, "expected '" + std::string(key) + "' line");
  }
  return line.substr(key.size() + 1);
}

ModelHeader parse_header(std::string_view text, std::size_t& pos) {
  ModelHeader h;
  const auto first = next_line(text, pos);
  if (first.substr(0, kModelMagic.size() + 1) != std::string(kModelMagic) + " ") {
    throw Error(ErrorKind::model_truncated, "not an attentiv model file");
  }
  h.version = std::string(first.substr(kModelMagic.size() + 1));
  if (h.version != kModelVersion) {
    throw Error(ErrorKind::model_version, "unsupported model file version '" + h.version +
                                              "' (expected " + std::string(kModelVersion) + ")");
  }
  const auto algo = parse_algorithm(expect_prefix(next_line(text, pos), "algorithm"));
  if (!algo) throw Error(ErrorKind::model_truncated, "unknown algorithm in model header");
  h.algorithm = *algo;
  h.feature_names = split_names(expect_prefix(next_line(text, pos), "features"));
  return h;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
  json doc;
  doc["scaler"] = {{"means", model.scaler.means}, {"stds", model.scaler.stds}};
  doc["training"] = {{"seed", model.info.seed},
                     {"timestamp", model.info.timestamp},
                     {"rows", model.info.rows}};
  doc["model"] = std::visit([](const auto& m) { return to_json(m); }, model.classifier);

  std::string body;
  body += std::string(kModelMagic) + " " + std::string(kModelVersion) + "\n";
  body += "algorithm " + std::string(to_string(algorithm_of(model.classifier))) + "\n";
  body += "features " + join(model.scaler.feature_names) + "\n";
  body += doc.dump(1) + "\n";
  return body + "checksum crc32 " + hex8(crc32(body)) + "\n";
}

ModelHeader read_model_header(std::string_view text) {
  std::size_t pos = 0;
  return parse_header(text, pos);
}

TrainedModel deserialize_model(std::string_view text) {
  std::size_t pos = 0;
  const ModelHeader header = parse_header(text, pos);

  if (text.empty() || text.back() != '\n') {
    throw Error(ErrorKind::model_truncated, "model file does not end with a newline");
  }
  const auto last_start = text.size() < 2 ? std::string_view::npos
                                           : text.rfind('\n', text.size() - 2);
  if (last_start == std::string_view::npos || last_start + 1 <= pos) {
    throw Error(ErrorKind::model_truncated, "model file has no checksum line");
  }
  const auto trailer = text.substr(last_start + 1, text.size() - last_start - 2);
  const std::string_view prefix = "checksum crc32 ";
  if (trailer.substr(0, prefix.size()) != prefix) {
    throw Error(ErrorKind::model_truncated, "model file has no checksum line");
  }
  const auto payload = text.substr(0, last_start + 1);
  if (trailer.substr(prefix.size()) != hex8(crc32(payload))) {
    throw Error(ErrorKind::model_checksum, "model file checksum does not match");
  }

  try {
    const json doc = json::parse(text.substr(pos, last_start + 1 - pos));
    TrainedModel model;
    model.scaler.feature_names = header.feature_names;
    model.scaler.means = doc.at("scaler").at("means").get<std::vector<double>>();
    model.scaler.stds = doc.at("scaler").at("stds").get<std::vector<double>>();
    if (model.scaler.means.size() != header.feature_names.size() ||
        model.scaler.stds.size() != header.feature_names.size()) {
      throw Error(ErrorKind::model_truncated, "scaler width does not match feature list");
    }
    const json& t = doc.at("training");
    model.info = {t.at("seed").get<std::uint64_t>(), t.at("timestamp").get<std::int64_t>(),
                  t.at("rows").get<std::size_t>()};
    const json& p = doc.at("model");
    switch (header.algorithm) {
      case Algorithm::svm: model.classifier = svm_from(p); break;
      case Algorithm::nb: model.classifier = nb_from(p); break;
      case Algorithm::rf: model.classifier = rf_from(p); break;
      case Algorithm::ensemble: model.classifier = ensemble_from(p); break;
    }
    if (input_dims(model.classifier) != header.feature_names.size()) {
      throw Error(ErrorKind::model_truncated, "parameter block width does not match features");
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::model_truncated, std::string("malformed parameter block: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << serialize_model(model);
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  return deserialize_model(read_file(path));
}

ModelHeader peek_model(const std::filesystem::path& path) {
  return read_model_header(read_file(path));
}

}  // namespace attentiv
