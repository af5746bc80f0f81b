#include "attentiv/wire_protocol.hpp"

#include "attentiv/error.hpp"

#include <cmath>
#include <limits>

namespace attentiv::wire {

namespace {

Error bad(const std::string& message) { return Error(ErrorKind::validation, message); }

const json& field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw bad(std::string("missing field '") + name + "'");
  return *it;
}

std::string get_string(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_string()) throw bad(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

std::int64_t as_integer(const json& v, const std::string& what) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) {
      return static_cast<std::int64_t>(d);
    }
  }
  throw bad(what + " must be an integer");
}

std::int64_t get_integer(const json& j, const char* name, std::int64_t fallback) {
  const auto it = j.find(name);
  if (it == j.end()) return fallback;
  return as_integer(*it, std::string("field '") + name + "'");
}

double get_number(const json& j, const char* name, double fallback) {
  const auto it = j.find(name);
  if (it == j.end()) return fallback;
  if (!it->is_number()) throw bad(std::string("field '") + name + "' must be a number");
  return it->get<double>();
}

bool get_bool(const json& j, const char* name, bool fallback) {
  const auto it = j.find(name);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) throw bad(std::string("field '") + name + "' must be true or false");
  return it->get<bool>();
}

int rating(const json& v, const std::string& what) {
  const std::int64_t r = as_integer(v, what);
  if (r < std::numeric_limits<int>::min() || r > std::numeric_limits<int>::max()) {
    throw bad(what + " is outside [1, 10]");
  }
  return static_cast<int>(r);
}

std::vector<int> ratings(const json& v) {
  if (!v.is_array()) throw bad("field 'observer_ratings' must be an array");
  std::vector<int> out;
  for (const auto& r : v) out.push_back(rating(r, "observer rating"));
  return out;
}

std::vector<dsp::RawSample> samples_from(const json& v) {
  if (!v.is_array()) throw bad("field 'samples' must be an array");
  std::vector<dsp::RawSample> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& s = v[i];
    if (!s.is_array() || s.size() != 3 || !s[2].is_number()) {
      throw Error(ErrorKind::validation,
                  "sample " + std::to_string(i) + " must be [timestamp, channel, value]", i);
    }
    const std::int64_t ch = as_integer(s[1], "sample channel");
    out.push_back({as_integer(s[0], "sample timestamp"), static_cast<int>(ch),
                   s[2].get<double>()});
  }
  return out;
}

json ack(std::string_view request, const std::string& session_id, stream::Phase phase) {
  return {{"type", "ack"},
          {"request", request},
          {"session_id", session_id},
          {"phase", stream::to_string(phase)}};
}

}  // namespace

json to_json(const stream::WirePrediction& p) {
  json energies;
  for (std::size_t b = 0; b < dsp::kBandCount; ++b) {
    const auto id = static_cast<dsp::BandId>(b);
    energies[std::string(dsp::band_name(id))] = p.energies[id];
  }
  return {{"type", "prediction"},     {"session_id", p.session_id},
          {"window_start", p.window_start}, {"energies", energies},
          {"label", p.label},         {"score", p.score},
          {"model_id", p.model_id},   {"scoring", p.scoring},
          {"included", p.included}};
}

stream::WirePrediction prediction_from_json(const json& j) {
  stream::WirePrediction p;
  p.session_id = j.at("session_id").get<std::string>();
  p.window_start = j.at("window_start").get<std::int64_t>();
  for (std::size_t b = 0; b < dsp::kBandCount; ++b) {
    const auto id = static_cast<dsp::BandId>(b);
    p.energies[id] = j.at("energies").at(std::string(dsp::band_name(id))).get<double>();
  }
  p.label = j.at("label").get<int>();
  p.score = j.at("score").get<double>();
  p.model_id = j.at("model_id").get<std::string>();
  p.scoring = j.at("scoring").get<bool>();
  p.included = j.at("included").get<bool>();
  return p;
}

json to_json(const stream::SessionSummary& s) {
  json j{{"type", "summary"},
         {"session_id", s.session_id},
         {"windows_total", s.windows_total},
         {"windows_scoring", s.windows_scoring},
         {"windows_included", s.windows_included},
         {"majority_label", s.majority_label},
         {"observer_ratings", s.observer_ratings},
         {"dropped", s.dropped},
         {"trim", s.trim},
         {"phase", "closed"}};
  j["mean_score"] = s.mean_score ? json(*s.mean_score) : json(nullptr);
  j["self_rating"] = s.self_rating ? json(*s.self_rating) : json(nullptr);
  return j;
}

json error_json(std::string_view code, std::string_view message,
                std::optional<std::size_t> index, std::string_view request) {
  json j{{"type", "error"}, {"code", code}, {"message", message}};
  if (index) j["index"] = *index;
  if (!request.empty()) j["request"] = request;
  return j;
}

bool is_terminal(const json& reply) {
  if (!reply.is_object()) return false;
  const auto it = reply.find("type");
  if (it == reply.end() || !it->is_string()) return false;
  const auto& t = it->get_ref<const std::string&>();
  return t == "open_ack" || t == "ack" || t == "summary" || t == "error";
}

std::vector<json> ProtocolHandler::dispatch(const std::string& type, const json& req) {
  if (type == "open") {
    stream::SessionMetadata meta;
    meta.subject_id = get_string(req, "subject_id");
    meta.material_id = get_string(req, "material_id");
    meta.channel = static_cast<int>(get_integer(req, "channel", 0));
    meta.acclimation_s =
        get_number(req, "acclimation_s", stream::kDefaultAcclimationSeconds);
    const std::string model_id = get_string(req, "model_id");
    const std::string id = sessions_.open_session(meta, model_id);
    return {{{"type", "open_ack"},
             {"session_id", id},
             {"phase", stream::to_string(sessions_.phase(id))},
             {"model_id", model_id},
             {"acclimation_ticks", sessions_.acclimation_ticks(id)},
             {"protocol", kProtocolVersion}}};
  }

  const std::string id = get_string(req, "session_id");

  if (type == "samples") {
    const auto batch = samples_from(field(req, "samples"));
    const auto result = sessions_.ingest_samples(id, batch);
    std::vector<json> out;
    for (const auto& p : result.predictions) out.push_back(to_json(p));
    json a = ack("samples", id, result.phase);
    a["accepted"] = result.accepted;
    a["predictions"] = result.new_predictions;
    a["buffered"] = result.buffered;
    a["dropped"] = result.dropped;
    out.push_back(std::move(a));
    return out;
  }
  if (type == "poll") {
    const std::int64_t after =
        get_integer(req, "after", std::numeric_limits<std::int64_t>::min());
    std::vector<json> out;
    for (const auto& p : sessions_.poll_predictions(id, after)) out.push_back(to_json(p));
    json a = ack("poll", id, sessions_.phase(id));
    a["count"] = out.size();
    out.push_back(std::move(a));
    return out;
  }
  if (type == "phase") {
    const std::string target = get_string(req, "phase");
    stream::Phase now;
    if (target == "resting") {
      now = sessions_.begin_rest(id);
    } else if (target == "recording") {
      now = sessions_.resume_recording(id);
    } else {
      throw bad("field 'phase' must be \"resting\" or \"recording\"");
    }
    return {ack("phase", id, now)};
  }
  if (type == "rate") {
    const int self = rating(field(req, "self_rating"), "self rating");
    const auto it = req.find("observer_ratings");
    const std::vector<int> observers = it == req.end() ? std::vector<int>{} : ratings(*it);
    return {ack("rate", id, sessions_.submit_ratings(id, self, observers))};
  }
  if (type == "close") {
    stream::CloseOptions options;
    if (const auto it = req.find("self_rating"); it != req.end()) {
      options.self_rating = rating(*it, "self rating");
    }
    if (const auto it = req.find("observer_ratings"); it != req.end()) {
      options.observer_ratings = ratings(*it);
    }
    options.trim = get_bool(req, "trim", false);
    options.trim_s = get_number(req, "trim_s", stream::kDefaultTrimSeconds);
    return {to_json(sessions_.close_session(id, options))};
  }
  throw bad("unknown message type '" + type + "'");
}

std::vector<json> ProtocolHandler::handle(const json& request) {
  std::string type;
  std::vector<json> out;
  try {
    if (!request.is_object()) throw bad("message must be a JSON object");
    type = get_string(request, "type");
    out = dispatch(type, request);
  } catch (const Error& e) {
    out = {error_json(to_string(e.kind()), e.what(), e.index(), type)};
  } catch (const json::exception& e) {
    out = {error_json("validation", e.what(), std::nullopt, type)};
  } catch (const std::exception& e) {
    out = {error_json("internal", e.what(), std::nullopt, type)};
  }
  if (request.is_object()) {
    if (const auto it = request.find("id"); it != request.end()) out.back()["id"] = *it;
  }
  return out;
}

std::vector<std::string> ProtocolHandler::handle_line(std::string_view line) {
  std::vector<json> replies;
  const json request = json::parse(line, nullptr, false);
  if (request.is_discarded()) {
    replies = {error_json("parse", "line is not valid JSON")};
  } else {
    replies = handle(request);
  }
  std::vector<std::string> out;
  out.reserve(replies.size());
  for (const auto& r : replies) out.push_back(r.dump());
  return out;
}

}  // namespace attentiv::wire
