#pragma once

#include "attentiv/classifier.hpp"
#include "attentiv/signal_dsp.hpp"

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

namespace attentiv::stream {

// Lifecycle: acclimating -> recording -> (resting -> recording)* -> rating -> closed.
// close is also accepted straight from recording.
enum class Phase { acclimating, recording, resting, rating, closed };

std::string_view to_string(Phase p);
std::optional<Phase> parse_phase(std::string_view s);

inline constexpr double kDefaultAcclimationSeconds = 120.0;
inline constexpr double kDefaultTrimSeconds = 30.0;
inline constexpr std::size_t kDefaultRingCapacity = 10 * 128;  // 10 s

struct SessionMetadata {
  std::string subject_id;
  std::string material_id;
  int channel = 0;
  double acclimation_s = kDefaultAcclimationSeconds;
};

struct WirePrediction {
  std::string session_id;
  std::int64_t window_start = 0;  // tick of the window's first sample
  dsp::BandEnergies energies;
  int label = 0;
  double score = 0.0;
  std::string model_id;
  bool scoring = true;   // false for windows that start during acclimation
  bool included = true;  // scoring and not removed by the trim rule

  friend bool operator==(const WirePrediction&, const WirePrediction&) = default;
};

// A trained model whose features are all band-energy names, with the
// column mapping precomputed.
class ServingModel {
 public:
  // Throws schema error if a feature is not one of the five band names.
  ServingModel(std::string id, TrainedModel model);

  const std::string& id() const { return id_; }
  const TrainedModel& model() const { return model_; }
  Prediction predict(const dsp::BandEnergies& energies) const;

 private:
  std::string id_;
  TrainedModel model_;
  std::vector<dsp::BandId> columns_;
};

class ModelRegistry {
 public:
  void add(const std::string& id, TrainedModel model);
  std::shared_ptr<const ServingModel> find(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const ServingModel>> models_;
};

struct ServiceConfig {
  dsp::ExtractionConfig extraction;
  std::size_t ring_capacity = kDefaultRingCapacity;
};

struct IngestResult {
  std::size_t accepted = 0;
  std::size_t new_predictions = 0;
  std::vector<WirePrediction> predictions;  // the ones this batch produced
  std::size_t buffered = 0;   // samples currently held in the ring
  std::uint64_t dropped = 0;  // total samples evicted from the ring so far
  Phase phase = Phase::acclimating;
};

struct CloseOptions {
  std::optional<int> self_rating;  // required unless rated before
  std::optional<std::vector<int>> observer_ratings;
  bool trim = false;
  double trim_s = kDefaultTrimSeconds;
};

struct SessionSummary {
  std::string session_id;
  std::size_t windows_total = 0;
  std::size_t windows_scoring = 0;
  std::size_t windows_included = 0;
  std::optional<double> mean_score;  // over included windows
  int majority_label = 0;            // over included windows, ties -> 0
  std::optional<int> self_rating;
  std::vector<int> observer_ratings;
  std::uint64_t dropped = 0;
  bool trim = false;
};

class Session;

// Thread-safe: sessions are independent; ingestion within one session is
// serialized, polling takes only a shared lock on the prediction log.
class SessionManager {
 public:
  explicit SessionManager(std::shared_ptr<const ModelRegistry> models,
                          ServiceConfig config = {});
  ~SessionManager();

  std::string open_session(const SessionMetadata& metadata, const std::string& model_id);

  // All-or-nothing: an out-of-order timestamp, foreign channel or
  // out-of-range value rejects the whole batch and leaves the session as it was.
  IngestResult ingest_samples(const std::string& session_id,
                              std::span<const dsp::RawSample> batch);

  // Predictions with window_start > after, in order.
  std::vector<WirePrediction> poll_predictions(const std::string& session_id,
                                               std::int64_t after) const;
  std::vector<WirePrediction> all_predictions(const std::string& session_id) const;

  Phase begin_rest(const std::string& session_id);
  Phase resume_recording(const std::string& session_id);
  Phase submit_ratings(const std::string& session_id, int self_rating,
                       const std::vector<int>& observer_ratings);
  SessionSummary close_session(const std::string& session_id, const CloseOptions& options);

  Phase phase(const std::string& session_id) const;
  std::int64_t acclimation_ticks(const std::string& session_id) const;

 private:
  std::shared_ptr<Session> find(const std::string& session_id) const;

  std::shared_ptr<const ModelRegistry> models_;
  ServiceConfig config_;
  std::vector<double> taps_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::atomic<std::uint64_t> next_id_{1};
};

}  // namespace attentiv::stream
