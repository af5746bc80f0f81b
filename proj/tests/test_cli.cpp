#include "support.hpp"

#include "attentiv/cli.hpp"
#include "attentiv/dataset_io.hpp"
#include "attentiv/model_file.hpp"
#include "attentiv/tcp.hpp"

#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

using namespace attentiv;
using testsupport::TempDir;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

void write_dataset_file(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  write_dataset(out, ds);
}

// Six rows, two per subject, perfectly separated by alpha1.
std::string six_row_fixture(const TempDir& dir) {
  const auto path = dir.path("six.csv");
  std::ofstream out(path);
  out << "subject_id,video_id,attention,meditation,raw,delta,theta,alpha1,alpha2,beta1,beta2,"
         "gamma1,gamma2,predefined_label,user_label\n"
         "0,0,50,40,10,100,90,10,20,30,40,50,60,0,2\n"
         "0,1,51,41,12,101,91,88,21,31,41,51,61,1,8\n"
         "1,0,52,42,11,99,89,11,22,29,39,49,59,0,3\n"
         "1,1,49,43,13,102,92,90,23,32,42,52,62,1,9\n"
         "2,0,48,44,9,98,88,9,24,28,38,48,58,0,1\n"
         "2,1,53,45,14,103,93,95,25,33,43,53,63,1,7\n";
  return path;
}

// Oversample the six-row idea: labels depend on alpha1 alone, with a wide gap.
std::string separable_fixture(const TempDir& dir, std::size_t rows = 200) {
  const auto base = testsupport::synthetic_paper_dataset(rows, 5);
  Dataset ds;
  ds.schema = base.schema;
  ds.schema.push_back("user_label");
  const auto a = *base.column("alpha1");
  const auto l = *base.column("predefined_label");
  for (std::size_t r = 0; r < base.rows(); ++r) {
    for (std::size_t c = 0; c < base.cols(); ++c) {
      ds.values.push_back(c == a ? (base.at(r, l) == 1 ? 10000.0 : -10000.0) + static_cast<double>(r)
                                 : base.at(r, c));
    }
    ds.values.push_back(base.at(r, l) == 1 ? 8.0 : 2.0);
  }
  const auto path = dir.path("separable.csv");
  write_dataset_file(path, ds);
  return path;
}

std::string raw_file(const TempDir& dir, std::size_t n, std::uint64_t seed) {
  const auto path = dir.path("raw" + std::to_string(n) + ".csv");
  std::ofstream out(path);
  write_raw_samples(out, testsupport::raw_stream(n, seed));
  return path;
}

// Band-feature model file for extract/replay.
std::string band_model_file(const TempDir& dir, Algorithm algo) {
  const auto path = dir.path(std::string(to_string(algo)) + ".model");
  save_model(testsupport::band_model(algo, 9), path);
  return path;
}

// In-process service with the given models.
struct Service {
  stream::SessionManager sessions;
  wire::ProtocolHandler handler;
  net::TcpServer server;

  explicit Service(std::shared_ptr<stream::ModelRegistry> models)
      : sessions(models), handler(sessions), server(handler, 0) {
    server.start();
  }
  ~Service() { server.stop(); }
  std::string port() const { return std::to_string(server.port()); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("train writes a versioned model file") {
  TempDir dir;
  const auto data = six_row_fixture(dir);
  const auto model = dir.path("nb.model");
  const auto r = run({"train", "--data", data, "--algorithm", "nb", "--seed", "1", "--out", model});
  CHECK(r.code == 0);
  const auto text = slurp(model);
  CHECK(text.rfind("attentiv-model v1\n", 0) == 0);
  CHECK(peek_model(model).algorithm == Algorithm::nb);
  CHECK(peek_model(model).feature_names.size() == 13);
}

TEST_CASE("train with a feature selection and user target") {
  TempDir dir;
  const auto data = six_row_fixture(dir);
  const auto model = dir.path("svm.model");
  const auto r = run({"train", "--data", data, "--algorithm", "svm", "--seed", "1", "--features",
                      "alpha1,beta1", "--target", "user", "--out", model});
  REQUIRE(r.code == 0);
  CHECK(peek_model(model).feature_names == std::vector<std::string>{"alpha1", "beta1"});
}

TEST_CASE("missing seed is a parameter error") {
  TempDir dir;
  const auto data = six_row_fixture(dir);
  const auto r = run({"train", "--data", data, "--algorithm", "nb", "--out", dir.path("m")});
  CHECK(r.code == exit_code(ErrorKind::parameter));
  CHECK(r.err.find("seed") != std::string::npos);
  CHECK(run({"crossval", "--data", data, "--algorithm", "nb"}).code ==
        exit_code(ErrorKind::parameter));
}

TEST_CASE("command-line errors exit with the parameter code") {
  CHECK(run({}).code == exit_code(ErrorKind::parameter));
  CHECK(run({"bogus"}).code == exit_code(ErrorKind::parameter));
  CHECK(run({"train", "--algorithm", "nb"}).code == exit_code(ErrorKind::parameter));
  CHECK(run({"train", "--data", "x", "--algorithm", "knn", "--seed", "1", "--out", "y"}).code ==
        exit_code(ErrorKind::parameter));
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("library errors map to their exit codes") {
  TempDir dir;
  CHECK(run({"train", "--data", dir.path("absent.csv"), "--algorithm", "nb", "--seed", "1",
             "--out", dir.path("m")})
            .code == exit_code(ErrorKind::io));
  {
    std::ofstream bad(dir.path("bad.csv"));
    bad << "a,b\n1,2\n";
  }
  const auto r = run({"train", "--data", dir.path("bad.csv"), "--algorithm", "nb", "--seed", "1",
                      "--out", dir.path("m")});
  CHECK(r.code == exit_code(ErrorKind::schema));
  CHECK(r.err.rfind("attentiv: schema error: ", 0) == 0);
  {
    std::ofstream corrupt(dir.path("corrupt.model"));
    corrupt << "attentiv-model v9\nalgorithm nb\nfeatures a\n{}\nchecksum crc32 00000000\n";
  }
  CHECK(run({"evaluate", "--data", six_row_fixture(dir), "--model", dir.path("corrupt.model")})
            .code == exit_code(ErrorKind::model_version));
}

TEST_CASE("exit codes are distinct and nonzero") {
  std::set<int> codes;
  for (int k = 0; k <= static_cast<int>(ErrorKind::io); ++k) {
    const int c = exit_code(static_cast<ErrorKind>(k));
    CHECK(c != 0);
    codes.insert(c);
    CHECK(parse_error_kind(to_string(static_cast<ErrorKind>(k))) == static_cast<ErrorKind>(k));
  }
  CHECK(codes.size() == static_cast<std::size_t>(ErrorKind::io) + 1);
}

TEST_CASE("evaluate a perfect-fixture model") {
  TempDir dir;
  const auto data = six_row_fixture(dir);
  const auto model = dir.path("nb.model");
  REQUIRE(run({"train", "--data", data, "--algorithm", "nb", "--seed", "1", "--features", "alpha1",
               "--out", model})
              .code == 0);
  const auto report = dir.path("report.json");
  const auto r = run({"evaluate", "--data", data, "--model", model, "--report", report});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(report));
  REQUIRE(j["results"].size() == 1);
  const auto& res = j["results"][0];
  CHECK(res["algorithm"] == "nb");
  CHECK(res["accuracy"] == 1.0);
  for (const char* c : {"0", "1"}) {
    CHECK(res["classes"][c]["precision"] == 1.0);
    CHECK(res["classes"][c]["recall"] == 1.0);
    CHECK(res["classes"][c]["f1"] == 1.0);
  }
  CHECK(res["auc"] == 1.0);
  const auto table = slurp(report + ".txt");
  CHECK(table == r.out);
  CHECK(table.find("1.00") != std::string::npos);
}

TEST_CASE("evaluate by split covers every algorithm") {
  TempDir dir;
  const auto data = separable_fixture(dir);
  const auto report = dir.path("all.json");
  const auto r = run({"evaluate", "--data", data, "--algorithm", "all", "--seed", "3", "--trees",
                      "20", "--report", report});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(report));
  REQUIRE(j["results"].size() == 4);
  for (const auto& res : j["results"]) {
    if (res["algorithm"] == "svm" || res["algorithm"] == "nb") CHECK(res["accuracy"] == 1.0);
    CHECK(res["accuracy"] >= 0.9);
  }
  for (const char* name : {"svm", "nb", "rf", "ensemble"}) {
    CHECK(r.out.find(name) != std::string::npos);
  }
  const auto per_subject = run(
      {"evaluate", "--data", data, "--algorithm", "nb", "--seed", "3", "--per-subject"});
  CHECK(per_subject.code == 0);
}

TEST_CASE("reports are byte-identical under a fixed clock") {
  TempDir dir;
  const auto data = separable_fixture(dir, 120);
  for (const char* algo : {"rf", "ensemble"}) {
    const auto a = dir.path(std::string("a-") + algo);
    const auto b = dir.path(std::string("b-") + algo);
    for (const auto& out : {a, b}) {
      REQUIRE(run({"train", "--data", data, "--algorithm", algo, "--seed", "11", "--trees", "15",
                   "--fixed-clock", "--out", out})
                  .code == 0);
    }
    CHECK(slurp(a) == slurp(b));
  }
  for (const auto& base : {dir.path("cv1"), dir.path("cv2")}) {
    REQUIRE(run({"crossval", "--data", data, "--algorithm", "all", "--seed", "4", "--trees", "10",
                 "--k", "5", "--report", base})
                .code == 0);
  }
  CHECK(slurp(dir.path("cv1")) == slurp(dir.path("cv2")));
  CHECK(slurp(dir.path("cv1.txt")) == slurp(dir.path("cv2.txt")));
  const auto cv = nlohmann::json::parse(slurp(dir.path("cv1")));
  for (const auto& res : cv["results"]) {
    CHECK(res["fold_accuracy"].size() == 5);
    if (res["algorithm"] == "svm" || res["algorithm"] == "nb") CHECK(res["mean_accuracy"] == 1.0);
  }
}

TEST_CASE("different seeds give different forests") {
  TempDir dir;
  const auto data = separable_fixture(dir, 120);
  REQUIRE(run({"train", "--data", data, "--algorithm", "rf", "--seed", "1", "--trees", "5",
               "--fixed-clock", "--out", dir.path("a")})
              .code == 0);
  REQUIRE(run({"train", "--data", data, "--algorithm", "rf", "--seed", "2", "--trees", "5",
               "--fixed-clock", "--out", dir.path("b")})
              .code == 0);
  CHECK(slurp(dir.path("a")) != slurp(dir.path("b")));
}

TEST_CASE("roc writes points and auc") {
  TempDir dir;
  const auto data = separable_fixture(dir);
  const auto out = dir.path("roc.csv");
  REQUIRE(run({"roc", "--data", data, "--algorithm", "nb", "--seed", "2", "--out", out}).code == 0);
  const auto lines = lines_of(slurp(out));
  REQUIRE(lines.size() >= 3);
  CHECK(lines[0] == "threshold,fpr,tpr,auc");
  CHECK(lines[1].rfind("inf,0,0,", 0) == 0);
  CHECK(lines.back().find(",1,1,") != std::string::npos);
  CHECK(lines[1].substr(lines[1].rfind(',') + 1) == "1");
}

TEST_CASE("extract writes band energies per window") {
  TempDir dir;
  const auto raw = raw_file(dir, 300, 1);
  const auto out = dir.path("features.csv");
  REQUIRE(run({"extract", "--raw", raw, "--out", out}).code == 0);
  const auto lines = lines_of(slurp(out));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "window_start,channel,alpha,beta,theta,delta,gamma");
  const auto features = dsp::extract_features(testsupport::raw_stream(300, 1));
  std::ostringstream expected;
  expected << features[1].start_timestamp << ",0";
  for (std::size_t b = 0; b < dsp::kBandCount; ++b) {
    expected << ',' << format_double(features[1].energies[static_cast<dsp::BandId>(b)]);
  }
  CHECK(lines[2] == expected.str());
}

TEST_CASE("replay of a 256-sample file reports two windows") {
  TempDir dir;
  const auto model_path = band_model_file(dir, Algorithm::nb);
  auto models = std::make_shared<stream::ModelRegistry>();
  models->add("nb", load_model(model_path));
  Service service(models);
  const auto r = run({"replay", "--raw", raw_file(dir, 256, 2), "--model-id", "nb", "--port",
                      service.port(), "--rate", "1000", "--self-rating", "4"});
  REQUIRE(r.code == 0);
  const auto summary = nlohmann::json::parse(r.out);
  CHECK(summary["type"] == "summary");
  CHECK(summary["windows_total"] == 2);
  CHECK(summary["windows_included"] == 2);
  CHECK(summary["self_rating"] == 4);
}

TEST_CASE("replay predictions equal extract with the same model") {
  TempDir dir;
  for (const auto algo : {Algorithm::svm, Algorithm::rf, Algorithm::ensemble}) {
    const auto model_path = band_model_file(dir, algo);
    auto models = std::make_shared<stream::ModelRegistry>();
    models->add("m", load_model(model_path));
    Service service(models);
    const auto raw = raw_file(dir, 128 * 12 + 40, 3);
    const auto log = dir.path("replay.csv");
    REQUIRE(run({"replay", "--raw", raw, "--model-id", "m", "--port", service.port(), "--rate",
                 "1000", "--batch", "37", "--self-rating", "5", "--log", log})
                .code == 0);
    const auto features = dir.path("extract.csv");
    REQUIRE(run({"extract", "--raw", raw, "--model", model_path, "--out", features}).code == 0);
    const auto a = lines_of(slurp(log));
    const auto b = lines_of(slurp(features));
    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() == 13);
    CHECK(b[0] == "window_start,channel,alpha,beta,theta,delta,gamma,score,label");
    for (std::size_t i = 0; i < a.size(); ++i) {
      // the replay log adds the scoring and included flags
      const auto cut = a[i].rfind(',', a[i].rfind(',') - 1);
      CHECK(a[i].substr(0, cut) == b[i]);
    }
  }
}

TEST_CASE("replay to a closed port is a network error") {
  TempDir dir;
  std::uint16_t port = 0;
  {
    Service service(std::make_shared<stream::ModelRegistry>());
    port = service.server.port();
  }
  const auto r = run({"replay", "--raw", raw_file(dir, 256, 2), "--model-id", "nb", "--port",
                      std::to_string(port), "--self-rating", "4"});
  CHECK(r.code == exit_code(ErrorKind::network));
  CHECK(r.code == 22);
}

TEST_CASE("replay surfaces service errors") {
  TempDir dir;
  Service service(std::make_shared<stream::ModelRegistry>());
  const auto r = run({"replay", "--raw", raw_file(dir, 256, 2), "--model-id", "absent", "--port",
                      service.port(), "--self-rating", "4"});
  CHECK(r.code == exit_code(ErrorKind::not_found));
}

}  // TEST_SUITE
