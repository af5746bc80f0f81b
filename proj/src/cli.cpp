#include "attentiv/cli.hpp"

#include "attentiv/dataset_io.hpp"
#include "attentiv/error.hpp"
#include "attentiv/evaluation.hpp"
#include "attentiv/model_file.hpp"
#include "attentiv/stream_service.hpp"
#include "attentiv/tcp.hpp"
#include "attentiv/wire_protocol.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace attentiv::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct Options {
  // inputs
  std::string data;
  std::string model;
  std::string raw;
  std::string schema = "paper";
  std::string features;
  std::string target = "predefined";
  double rating_threshold = kDefaultRatingThreshold;
  // training
  std::string algorithm = "ensemble";
  std::optional<std::uint64_t> seed;
  double C = 1.0;
  double tol = 1e-3;
  std::size_t trees = 100;
  std::size_t max_features = 0;
  std::size_t bags = 3;
  double var_smoothing = kNbVarianceSmoothing;
  // evaluation
  double split = 0.2;
  bool per_subject = false;
  std::size_t k = 10;
  // outputs
  std::string out;
  std::string report;
  bool fixed_clock = false;
  // extraction
  std::size_t hop = dsp::kWindowLength;
  double cutoff = dsp::kDefaultCutoffHz;
  std::optional<int> channel;
  // service
  std::string host = "127.0.0.1";
  std::optional<int> port;
  std::vector<std::string> serve_models;
  std::size_t ring_capacity = stream::kDefaultRingCapacity;
  // replay
  std::string model_id;
  std::string subject = "replay";
  std::string material = "replay";
  double rate = 1.0;
  bool trim = false;
  double trim_s = stream::kDefaultTrimSeconds;
  double acclimation = 0.0;
  std::optional<int> self_rating;
  std::string observer_ratings;
  std::size_t batch = 16;
  std::string log;
};

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

fs::path input_path(const std::string& p) {
  const fs::path path(p);
  const std::string dir = env("ATTENTIV_DATA_DIR");
  if (path.is_relative() && !dir.empty()) return fs::path(dir) / path;
  return path;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::int64_t now_seconds(const Options& o) {
  if (o.fixed_clock || !env("ATTENTIV_FIXED_CLOCK").empty()) return 0;
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

LoadOptions load_options(const Options& o) {
  LoadOptions lo;
  lo.rating_threshold = o.rating_threshold;
  if (o.schema == "paper") {
    lo.schema = default_schema();
  } else if (o.schema == "bands") {
    lo.schema = band_schema();
  } else {
    lo.schema = std::vector<std::string>{};
  }
  return lo;
}

Dataset load(const Options& o) { return load_dataset(input_path(o.data), load_options(o)); }

Target target_of(const Options& o) {
  return o.target == "user" ? Target::user : Target::predefined;
}

FeatureMatrix labeled_matrix(const Dataset& ds, const Options& o,
                             std::vector<std::string> selection = {}) {
  if (selection.empty()) selection = split_csv(o.features);
  return build_matrix(ds, selection, target_of(o));
}

std::uint64_t require_seed(const Options& o, const char* command) {
  if (!o.seed) throw Error(ErrorKind::parameter, std::string(command) + " needs --seed");
  return *o.seed;
}

AlgorithmConfig algorithm_config(const Options& o, Algorithm a) {
  AlgorithmConfig c;
  c.algorithm = a;
  c.svm.C = o.C;
  c.svm.tol = o.tol;
  c.forest.trees = o.trees;
  c.forest.max_features = o.max_features;
  c.nb_smoothing = o.var_smoothing;
  c.ensemble.bags = o.bags;
  c.ensemble.svm = c.svm;
  c.ensemble.forest = c.forest;
  c.ensemble.nb_smoothing = c.nb_smoothing;
  return c;
}

std::vector<Algorithm> algorithms_of(const Options& o) {
  if (o.algorithm == "all") {
    return {Algorithm::svm, Algorithm::nb, Algorithm::rf, Algorithm::ensemble};
  }
  const auto a = parse_algorithm(o.algorithm);
  if (!a) throw Error(ErrorKind::parameter, "unknown algorithm '" + o.algorithm + "'");
  return {*a};
}

json confusion_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
}

json class_json(const ClassMetrics& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"degenerate", m.degenerate}};
}

json report_json(const MetricsReport& r) {
  return {{"accuracy", r.accuracy},
          {"confusion", confusion_json(r.counts)},
          {"classes", {{"0", class_json(r.per_class[0])}, {"1", class_json(r.per_class[1])}}},
          {"degenerate", r.degenerate}};
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

// Aligned layout: accuracy per algorithm, then precision/recall/f1 per class.
std::string metrics_table(const std::vector<std::pair<std::string, EvaluationResult>>& rows) {
  std::ostringstream t;
  t << std::left << std::setw(10) << "algorithm" << std::right << std::setw(10) << "accuracy"
    << std::setw(8) << "auc" << std::setw(7) << "class" << std::setw(11) << "precision"
    << std::setw(8) << "recall" << std::setw(10) << "f1-score" << '\n';
  for (const auto& [name, r] : rows) {
    for (int c = 0; c < 2; ++c) {
      const auto& m = r.report.per_class[static_cast<std::size_t>(c)];
      t << std::left << std::setw(10) << (c == 0 ? name : "") << std::right << std::setw(10)
        << (c == 0 ? fixed(r.report.accuracy) : "") << std::setw(8)
        << (c == 0 ? (r.roc.points.empty() ? std::string("-") : fixed(r.roc.auc, 3)) : "")
        << std::setw(7) << c << std::setw(11) << fixed(m.precision, 2) << std::setw(8)
        << fixed(m.recall, 2) << std::setw(10) << fixed(m.f1, 2) << '\n';
    }
  }
  return t.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::io, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::io, "write failed for " + path.string());
}

// --report BASE writes BASE (machine-readable JSON) and BASE.txt (table).
void write_report(const Options& o, const json& doc, const std::string& table) {
  if (o.report.empty()) return;
  write_text(o.report, doc.dump(2) + "\n");
  write_text(o.report + ".txt", table);
}

int cmd_train(const Options& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(o, "train");
  const auto algos = algorithms_of(o);
  if (algos.size() != 1) throw Error(ErrorKind::parameter, "train takes a single algorithm");
  if (o.out.empty()) throw Error(ErrorKind::parameter, "train needs --out");
  const Dataset ds = load(o);
  const FeatureMatrix m = labeled_matrix(ds, o);
  const TrainedModel model = fit_model(m, algorithm_config(o, algos[0]), seed, now_seconds(o));
  save_model(model, o.out);
  out << "trained " << to_string(algos[0]) << " on " << m.n << " rows x " << m.d
      << " features -> " << o.out << '\n';
  return 0;
}

struct Evaluated {
  std::vector<std::pair<std::string, EvaluationResult>> rows;
  json doc;
};

Evaluated evaluate_all(const Options& o) {
  const Dataset ds = load(o);
  Evaluated ev;
  ev.doc["command"] = "evaluate";
  ev.doc["target"] = o.target;
  json results = json::array();

  if (!o.model.empty()) {
    const TrainedModel model = load_model(input_path(o.model));
    const FeatureMatrix m = labeled_matrix(ds, o, model.feature_names());
    auto r = evaluate_model(model, m);
    ev.doc["protocol"] = {{"mode", "model"}, {"rows_test", m.n}};
    json entry = report_json(r.report);
    entry["algorithm"] = to_string(algorithm_of(model.classifier));
    entry["auc"] = r.roc.points.empty() ? json(nullptr) : json(r.roc.auc);
    results.push_back(entry);
    ev.rows.emplace_back(std::string(to_string(algorithm_of(model.classifier))), std::move(r));
    ev.doc["results"] = results;
    return ev;
  }

  const std::uint64_t seed = require_seed(o, "evaluate");
  const FeatureMatrix m = labeled_matrix(ds, o);
  Split split;
  if (o.per_subject) {
    const auto c = ds.column("subject_id");
    if (!c) throw Error(ErrorKind::schema, "--per-subject needs a subject_id column");
    split = group_split(ds.column_values(*c), o.split, seed);
  } else {
    split = stratified_split(*m.labels, o.split, seed);
  }
  const FeatureMatrix train = select_rows(m, split.train);
  const FeatureMatrix test = select_rows(m, split.test);
  ev.doc["protocol"] = {{"mode", o.per_subject ? "per_subject" : "stratified"},
                        {"test_fraction", o.split},
                        {"seed", seed},
                        {"rows_train", train.n},
                        {"rows_test", test.n}};
  for (const Algorithm a : algorithms_of(o)) {
    const TrainedModel model = fit_model(train, algorithm_config(o, a), seed, 0);
    auto r = evaluate_model(model, test);
    json entry = report_json(r.report);
    entry["algorithm"] = to_string(a);
    entry["auc"] = r.roc.points.empty() ? json(nullptr) : json(r.roc.auc);
    results.push_back(entry);
    ev.rows.emplace_back(std::string(to_string(a)), std::move(r));
  }
  ev.doc["results"] = results;
  return ev;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const Evaluated ev = evaluate_all(o);
  const std::string table = metrics_table(ev.rows);
  out << table;
  write_report(o, ev.doc, table);
  return 0;
}

int cmd_crossval(const Options& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(o, "crossval");
  const Dataset ds = load(o);
  const FeatureMatrix m = labeled_matrix(ds, o);
  json doc{{"command", "crossval"}, {"k", o.k}, {"seed", seed}, {"target", o.target},
           {"rows", m.n}};
  json results = json::array();
  std::ostringstream table;
  table << std::left << std::setw(10) << "algorithm" << std::right << std::setw(10) << "mean"
        << std::setw(10) << "std" << "  folds\n";
  for (const Algorithm a : algorithms_of(o)) {
    const auto cv = cross_validate(m, algorithm_config(o, a), o.k, seed);
    json folds = json::array();
    table << std::left << std::setw(10) << to_string(a) << std::right << std::setw(10)
          << fixed(cv.mean_accuracy) << std::setw(10) << fixed(cv.std_accuracy) << ' ';
    for (const auto& f : cv.folds) {
      folds.push_back(f.accuracy);
      table << ' ' << fixed(f.accuracy, 3);
    }
    table << '\n';
    results.push_back({{"algorithm", to_string(a)},
                       {"fold_accuracy", folds},
                       {"mean_accuracy", cv.mean_accuracy},
                       {"std_accuracy", cv.std_accuracy}});
  }
  doc["results"] = results;
  out << table.str();
  write_report(o, doc, table.str());
  return 0;
}

std::string roc_csv(const RocCurve& roc) {
  std::ostringstream s;
  s << "threshold,fpr,tpr,auc\n";
  for (const auto& p : roc.points) {
    s << (std::isinf(p.threshold) ? std::string("inf") : format_double(p.threshold)) << ','
      << format_double(p.fpr) << ',' << format_double(p.tpr) << ',' << format_double(roc.auc)
      << '\n';
  }
  return s.str();
}

int cmd_roc(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw Error(ErrorKind::parameter, "roc needs --out");
  if (o.model.empty()) {
    const auto algos = algorithms_of(o);
    if (algos.size() != 1) throw Error(ErrorKind::parameter, "roc takes a single algorithm");
  }
  const Evaluated ev = evaluate_all(o);
  const auto& r = ev.rows.front().second;
  if (r.roc.points.empty()) {
    throw Error(ErrorKind::data, "test rows hold a single class; no ROC curve");
  }
  write_text(o.out, roc_csv(r.roc));
  out << "auc " << format_double(r.roc.auc) << " (" << r.roc.points.size() << " points) -> "
      << o.out << '\n';
  return 0;
}

std::map<int, std::vector<dsp::RawSample>> by_channel(const std::vector<dsp::RawSample>& raw) {
  std::map<int, std::vector<dsp::RawSample>> out;
  for (const auto& s : raw) out[s.channel].push_back(s);
  return out;
}

int cmd_extract(const Options& o, std::ostream& out) {
  if (o.raw.empty()) throw Error(ErrorKind::parameter, "extract needs --raw");
  if (o.out.empty()) throw Error(ErrorKind::parameter, "extract needs --out");
  const auto raw = load_raw_samples(input_path(o.raw));
  std::optional<TrainedModel> model;
  if (!o.model.empty()) model = load_model(input_path(o.model));

  dsp::ExtractionConfig config;
  config.hop = o.hop;
  config.cutoff_hz = o.cutoff;

  std::ostringstream csv;
  csv << "window_start,channel";
  for (const auto& b : band_feature_names()) csv << ',' << b;
  if (model) csv << ",score,label";
  csv << '\n';
  std::size_t windows = 0;
  for (const auto& [channel, samples] : by_channel(raw)) {
    if (o.channel && channel != *o.channel) continue;
    const auto features = dsp::extract_features(samples, config);
    std::vector<Prediction> predictions;
    if (model && !features.empty()) {
      FeatureMatrix fm(features.size(), model->feature_names());
      for (std::size_t c = 0; c < fm.d; ++c) {
        const auto& name = fm.feature_names[c];
        std::optional<dsp::BandId> band;
        for (std::size_t b = 0; b < dsp::kBandCount; ++b) {
          if (dsp::band_name(static_cast<dsp::BandId>(b)) == name) {
            band = static_cast<dsp::BandId>(b);
          }
        }
        if (!band) {
          throw Error(ErrorKind::schema,
                      "model feature '" + name + "' is not a band energy");
        }
        for (std::size_t i = 0; i < features.size(); ++i) {
          fm.at(i, c) = features[i].energies[*band];
        }
      }
      predictions = predict(*model, fm);
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
      const auto& w = features[i];
      csv << w.start_timestamp << ',' << w.channel;
      for (std::size_t b = 0; b < dsp::kBandCount; ++b) {
        csv << ',' << format_double(w.energies[static_cast<dsp::BandId>(b)]);
      }
      if (model) csv << ',' << format_double(predictions[i].score) << ',' << predictions[i].label;
      csv << '\n';
    }
    windows += features.size();
  }
  write_text(o.out, csv.str());
  out << "extracted " << windows << " windows -> " << o.out << '\n';
  return 0;
}

std::uint16_t resolve_port(const Options& o) {
  int port = kDefaultPort;
  if (const std::string e = env("ATTENTIV_PORT"); !e.empty()) {
    try {
      port = std::stoi(e);
    } catch (const std::exception&) {
      throw Error(ErrorKind::parameter, "ATTENTIV_PORT is not a number");
    }
  }
  if (o.port) port = *o.port;
  if (port < 0 || port > 65535) throw Error(ErrorKind::parameter, "port must be in [0, 65535]");
  return static_cast<std::uint16_t>(port);
}

int cmd_serve(const Options& o, std::ostream& out) {
  auto registry = std::make_shared<stream::ModelRegistry>();
  for (const auto& spec : o.serve_models) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw Error(ErrorKind::parameter, "--model takes id=path, got '" + spec + "'");
    }
    registry->add(spec.substr(0, eq), load_model(input_path(spec.substr(eq + 1))));
  }
  if (registry->ids().empty()) throw Error(ErrorKind::parameter, "serve needs --model id=path");
  stream::ServiceConfig config;
  config.ring_capacity = o.ring_capacity;
  config.extraction.cutoff_hz = o.cutoff;
  config.extraction.hop = o.hop;
  stream::SessionManager sessions(registry, config);
  wire::ProtocolHandler handler(sessions);
  net::TcpServer server(handler, resolve_port(o), o.host);
  server.start();
  out << "listening on " << o.host << ':' << server.port() << std::endl;

  g_stop = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  out << "stopped" << std::endl;
  return 0;
}

void throw_reply_error(const json& reply) {
  const std::string code = reply.value("code", "network");
  const auto kind = parse_error_kind(code).value_or(ErrorKind::network);
  std::optional<std::size_t> index;
  if (reply.contains("index")) index = reply["index"].get<std::size_t>();
  throw Error(kind, "server: " + reply.value("message", std::string("request failed")), index);
}

json expect_reply(const std::vector<json>& replies) {
  const json& last = replies.back();
  if (last.value("type", "") == "error") throw_reply_error(last);
  return last;
}

int cmd_replay(const Options& o, std::ostream& out) {
  if (o.raw.empty()) throw Error(ErrorKind::parameter, "replay needs --raw");
  if (o.model_id.empty()) throw Error(ErrorKind::parameter, "replay needs --model-id");
  if (!o.self_rating) throw Error(ErrorKind::parameter, "replay needs --self-rating");
  std::vector<int> observers;
  for (const auto& r : split_csv(o.observer_ratings)) {
    try {
      observers.push_back(std::stoi(r));
    } catch (const std::exception&) {
      throw Error(ErrorKind::parameter, "observer rating '" + r + "' is not an integer");
    }
  }

  const auto raw = load_raw_samples(input_path(o.raw));
  const int channel = o.channel.value_or(0);
  std::vector<dsp::RawSample> samples;
  for (const auto& s : raw) {
    if (s.channel == channel) samples.push_back(s);
  }
  if (samples.empty()) {
    throw Error(ErrorKind::data, "no samples on channel " + std::to_string(channel));
  }

  net::LineClient client(o.host, resolve_port(o));
  const json ack = expect_reply(client.request({{"type", "open"},
                                                {"subject_id", o.subject},
                                                {"material_id", o.material},
                                                {"model_id", o.model_id},
                                                {"channel", channel},
                                                {"acclimation_s", o.acclimation}}));
  const std::string session = ack.at("session_id").get<std::string>();

  const auto start = std::chrono::steady_clock::now();
  const double samples_per_second = dsp::kSampleRateHz * o.rate;
  for (std::size_t i = 0; i < samples.size(); i += o.batch) {
    const std::size_t end = std::min(samples.size(), i + o.batch);
    json batch = json::array();
    for (std::size_t j = i; j < end; ++j) {
      batch.push_back({samples[j].timestamp, samples[j].channel, samples[j].value});
    }
    expect_reply(client.request({{"type", "samples"}, {"session_id", session}, {"samples", batch}}));
    const auto due = start + std::chrono::duration<double>(static_cast<double>(end) /
                                                           samples_per_second);
    std::this_thread::sleep_until(
        std::chrono::time_point_cast<std::chrono::steady_clock::duration>(due));
  }

  json close{{"type", "close"},
             {"session_id", session},
             {"trim", o.trim},
             {"trim_s", o.trim_s},
             {"self_rating", *o.self_rating},
             {"observer_ratings", observers}};
  const json summary = expect_reply(client.request(close));

  if (!o.log.empty()) {
    const auto replies = client.request({{"type", "poll"}, {"session_id", session}});
    expect_reply(replies);
    std::ostringstream csv;
    csv << "window_start,channel";
    for (const auto& b : band_feature_names()) csv << ',' << b;
    csv << ",score,label,scoring,included\n";
    for (const auto& r : replies) {
      if (r.value("type", "") != "prediction") continue;
      const auto p = wire::prediction_from_json(r);
      csv << p.window_start << ',' << channel;
      for (std::size_t b = 0; b < dsp::kBandCount; ++b) {
        csv << ',' << format_double(p.energies[static_cast<dsp::BandId>(b)]);
      }
      csv << ',' << format_double(p.score) << ',' << p.label << ',' << (p.scoring ? 1 : 0)
          << ',' << (p.included ? 1 : 0) << '\n';
    }
    write_text(o.log, csv.str());
  }
  out << summary.dump(2) << '\n';
  return 0;
}

void add_data_flags(CLI::App* c, Options& o) {
  c->add_option("--data", o.data, "Dataset CSV")->required();
  c->add_option("--schema", o.schema, "Required columns: paper, bands or none")
      ->check(CLI::IsMember({"paper", "bands", "none"}))
      ->capture_default_str();
  c->add_option("--features", o.features, "Comma-separated feature columns (default: all)");
  c->add_option("--target", o.target, "Label column: predefined or user")
      ->check(CLI::IsMember({"predefined", "user"}))
      ->capture_default_str();
  c->add_option("--rating-threshold", o.rating_threshold,
                "User ratings at or above this become label 1")
      ->check(CLI::Range(1.0, 10.0))
      ->capture_default_str();
}

void add_algorithm_flags(CLI::App* c, Options& o, bool allow_all) {
  std::vector<std::string> names{"svm", "nb", "rf", "ensemble"};
  if (allow_all) names.emplace_back("all");
  c->add_option("--algorithm", o.algorithm, "Classifier")
      ->check(CLI::IsMember(names))
      ->capture_default_str();
  c->add_option("--C", o.C, "SVM box constraint")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c->add_option("--tol", o.tol, "SVM KKT tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c->add_option("--trees", o.trees, "Random forest size")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100000}))
      ->capture_default_str();
  c->add_option("--max-features", o.max_features, "Features tried per split (0: sqrt(d))")
      ->capture_default_str();
  c->add_option("--bags", o.bags, "Ensemble members per algorithm")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000}))
      ->capture_default_str();
  c->add_option("--var-smoothing", o.var_smoothing,
                "Naive Bayes variance floor, times the largest feature variance")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  c->add_option("--seed", o.seed, "Random seed");
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"attentiv: EEG attention classification engine", "attentiv"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train a model and write a model file");
  add_data_flags(train, o);
  add_algorithm_flags(train, o, false);
  train->add_option("--out", o.out, "Model file to write")->required();
  train->add_flag("--fixed-clock", o.fixed_clock, "Record training timestamp 0");

  auto* evaluate = app.add_subcommand("evaluate", "Score a model or a train/test split");
  add_data_flags(evaluate, o);
  add_algorithm_flags(evaluate, o, true);
  evaluate->add_option("--model", o.model, "Evaluate this model file on every row");
  evaluate->add_option("--split", o.split, "Held-out fraction")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  evaluate->add_flag("--per-subject", o.per_subject, "Hold out whole subjects");
  evaluate->add_option("--report", o.report, "Write REPORT (JSON) and REPORT.txt");

  auto* crossval = app.add_subcommand("crossval", "Stratified k-fold cross-validation");
  add_data_flags(crossval, o);
  add_algorithm_flags(crossval, o, true);
  crossval->add_option("--k", o.k, "Folds")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000}))
      ->capture_default_str();
  crossval->add_option("--report", o.report, "Write REPORT (JSON) and REPORT.txt");

  auto* roc = app.add_subcommand("roc", "Export ROC points and AUC as CSV");
  add_data_flags(roc, o);
  add_algorithm_flags(roc, o, false);
  roc->add_option("--model", o.model, "Score this model file on every row");
  roc->add_option("--split", o.split, "Held-out fraction")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  roc->add_flag("--per-subject", o.per_subject, "Hold out whole subjects");
  roc->add_option("--out", o.out, "CSV to write")->required();

  auto* extract = app.add_subcommand("extract", "Band energies per window from raw samples");
  extract->add_option("--raw", o.raw, "Raw sample CSV (timestamp,channel,value)")->required();
  extract->add_option("--out", o.out, "Feature CSV to write")->required();
  extract->add_option("--model", o.model, "Also score each window with this model");
  extract->add_option("--channel", o.channel, "Only this channel");
  extract->add_option("--hop", o.hop, "Window hop in samples")
      ->check(CLI::Range(std::size_t{1}, dsp::kWindowLength))
      ->capture_default_str();
  extract->add_option("--cutoff", o.cutoff, "Low-pass cutoff in Hz")
      ->check(CLI::Range(0.0, dsp::kSampleRateHz / 2.0))
      ->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Run the live session service");
  serve->add_option("--model", o.serve_models, "Model to serve, as id=path (repeatable)")
      ->required();
  serve->add_option("--host", o.host, "Bind address")->capture_default_str();
  serve->add_option("--port", o.port, "TCP port (0: ephemeral; env ATTENTIV_PORT)");
  serve->add_option("--ring-capacity", o.ring_capacity, "Samples buffered per session")
      ->check(CLI::Range(dsp::kWindowLength, std::size_t{1} << 24))
      ->capture_default_str();
  serve->add_option("--hop", o.hop, "Window hop in samples")
      ->check(CLI::Range(std::size_t{1}, dsp::kWindowLength))
      ->capture_default_str();
  serve->add_option("--cutoff", o.cutoff, "Low-pass cutoff in Hz")
      ->check(CLI::Range(0.0, dsp::kSampleRateHz / 2.0))
      ->capture_default_str();

  auto* replay = app.add_subcommand("replay", "Stream a recorded file to a running service");
  replay->add_option("--raw", o.raw, "Raw sample CSV")->required();
  replay->add_option("--model-id", o.model_id, "Served model id")->required();
  replay->add_option("--host", o.host, "Service host")->capture_default_str();
  replay->add_option("--port", o.port, "Service port (env ATTENTIV_PORT)");
  replay->add_option("--channel", o.channel, "Channel to stream (default 0)");
  replay->add_option("--subject", o.subject, "Subject id")->capture_default_str();
  replay->add_option("--material", o.material, "Material id")->capture_default_str();
  replay->add_option("--rate", o.rate, "Playback speed, multiple of 128 Hz")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  replay->add_option("--batch", o.batch, "Samples per message")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20))
      ->capture_default_str();
  replay->add_option("--acclimation", o.acclimation, "Acclimation seconds")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  replay->add_flag("--trim", o.trim, "Exclude the first and last trim span of recording");
  replay->add_option("--trim-seconds", o.trim_s, "Trim span")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  replay->add_option("--self-rating", o.self_rating, "Subject confusion rating, 1-10")
      ->required();
  replay->add_option("--observer-ratings", o.observer_ratings, "Comma-separated, 1-10 each");
  replay->add_option("--log", o.log, "Write every prediction as CSV");

  std::vector<const char*> argv{"attentiv"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "attentiv: parameter error: " << e.what() << '\n';
    return exit_code(ErrorKind::parameter);
  }

  if (train->parsed()) return cmd_train(o, out);
  if (evaluate->parsed()) return cmd_evaluate(o, out);
  if (crossval->parsed()) return cmd_crossval(o, out);
  if (roc->parsed()) return cmd_roc(o, out);
  if (extract->parsed()) return cmd_extract(o, out);
  if (serve->parsed()) return cmd_serve(o, out);
  return cmd_replay(o, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const Error& e) {
    err << "attentiv: " << to_string(e.kind()) << " error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "attentiv: internal error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace attentiv::cli
