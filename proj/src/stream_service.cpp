#include "attentiv/stream_service.hpp"

#include "attentiv/error.hpp"

#include <boost/circular_buffer.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

namespace attentiv::stream {

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::acclimating: return "acclimating";
    case Phase::recording: return "recording";
    case Phase::resting: return "resting";
    case Phase::rating: return "rating";
    case Phase::closed: return "closed";
  }
  return "unknown";
}

std::optional<Phase> parse_phase(std::string_view s) {
  for (auto p : {Phase::acclimating, Phase::recording, Phase::resting, Phase::rating,
                 Phase::closed}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

ServingModel::ServingModel(std::string id, TrainedModel model)
    : id_(std::move(id)), model_(std::move(model)) {
  for (const auto& name : model_.feature_names()) {
    std::optional<dsp::BandId> match;
    for (std::size_t b = 0; b < dsp::kBandCount; ++b) {
      if (dsp::band_name(static_cast<dsp::BandId>(b)) == name) {
        match = static_cast<dsp::BandId>(b);
      }
    }
    if (!match) {
      throw Error(ErrorKind::schema, "model '" + id_ + "' uses feature '" + name +
                                         "', which the live pipeline does not produce");
    }
    columns_.push_back(*match);
  }
}

Prediction ServingModel::predict(const dsp::BandEnergies& energies) const {
  std::vector<double> row(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) row[c] = energies[columns_[c]];
  return predict_one(model_, row);
}

void ModelRegistry::add(const std::string& id, TrainedModel model) {
  auto serving = std::make_shared<const ServingModel>(id, std::move(model));
  std::unique_lock lock(mutex_);
  models_[id] = std::move(serving);
}

std::shared_ptr<const ServingModel> ModelRegistry::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = models_.find(id);
  return it == models_.end() ? nullptr : it->second;
}

std::vector<std::string> ModelRegistry::ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : models_) out.push_back(id);
  return out;
}

namespace {

void check_rating(int r, const std::string& who) {
  if (r < 1 || r > 10) {
    throw Error(ErrorKind::validation,
                who + " rating " + std::to_string(r) + " is outside [1, 10]");
  }
}

void check_ratings(int self, const std::vector<int>& observers) {
  check_rating(self, "self");
  for (const int r : observers) check_rating(r, "observer");
}

}  // namespace

class Session {
 public:
  Session(std::string id, SessionMetadata metadata, std::shared_ptr<const ServingModel> model,
          const ServiceConfig& config, const std::vector<double>& taps)
      : id_(std::move(id)),
        metadata_(std::move(metadata)),
        model_(std::move(model)),
        config_(config),
        taps_(taps),
        ring_(config.ring_capacity),
        acclimation_ticks_(static_cast<std::int64_t>(
            std::llround(metadata_.acclimation_s * dsp::kSampleRateHz))),
        phase_(acclimation_ticks_ == 0 ? Phase::recording : Phase::acclimating) {}

  std::int64_t acclimation_ticks() const { return acclimation_ticks_; }

  Phase phase() const {
    std::lock_guard lock(state_mutex_);
    return phase_;
  }

  IngestResult ingest(std::span<const dsp::RawSample> batch) {
    std::lock_guard writer(ingest_mutex_);
    Phase phase = this->phase();
    if (phase != Phase::acclimating && phase != Phase::recording) {
      throw Error(ErrorKind::state, "session " + id_ + " is " + std::string(to_string(phase)) +
                                        "; samples are accepted only while acclimating or "
                                        "recording");
    }
    validate(batch);

    std::vector<WirePrediction> fresh;
    for (const auto& s : batch) {
      if (!first_timestamp_) first_timestamp_ = s.timestamp;
      if (phase == Phase::acclimating &&
          s.timestamp >= *first_timestamp_ + acclimation_ticks_) {
        phase = Phase::recording;
        set_phase(phase);
      }
      if (phase == Phase::recording) {
        if (!recording_start_) recording_start_ = s.timestamp;
        recording_last_ = s.timestamp;
      }
      last_timestamp_ = s.timestamp;

      if (ring_.full()) ++dropped_;  // push_back evicts the oldest sample
      ring_.push_back(s);
      if (ring_.size() == config_.extraction.window) emit_window(fresh);
    }

    IngestResult result;
    result.accepted = batch.size();
    result.new_predictions = fresh.size();
    result.buffered = ring_.size();
    result.dropped = dropped_;
    result.phase = phase;
    if (!fresh.empty()) {
      std::unique_lock log(log_mutex_);
      log_.insert(log_.end(), fresh.begin(), fresh.end());
    }
    result.predictions = std::move(fresh);
    return result;
  }

  std::vector<WirePrediction> poll(std::int64_t after) const {
    std::shared_lock log(log_mutex_);
    const auto first = std::upper_bound(
        log_.begin(), log_.end(), after,
        [](std::int64_t t, const WirePrediction& p) { return t < p.window_start; });
    return {first, log_.end()};
  }

  Phase begin_rest() {
    std::lock_guard writer(ingest_mutex_);
    require(Phase::recording, "begin a rest");
    ring_.clear();  // a partial window never spans a rest
    set_phase(Phase::resting);
    return Phase::resting;
  }

  Phase resume() {
    std::lock_guard writer(ingest_mutex_);
    require(Phase::resting, "resume recording");
    set_phase(Phase::recording);
    return Phase::recording;
  }

  Phase rate(int self, const std::vector<int>& observers) {
    std::lock_guard writer(ingest_mutex_);
    const Phase phase = this->phase();
    if (phase != Phase::recording && phase != Phase::resting && phase != Phase::rating) {
      throw Error(ErrorKind::state, "session " + id_ + " cannot take ratings while " +
                                        std::string(to_string(phase)));
    }
    check_ratings(self, observers);
    self_rating_ = self;
    observer_ratings_ = observers;
    ring_.clear();
    set_phase(Phase::rating);
    return Phase::rating;
  }

  SessionSummary close(const CloseOptions& options) {
    std::lock_guard writer(ingest_mutex_);
    const Phase phase = this->phase();
    if (phase == Phase::closed) {
      throw Error(ErrorKind::state, "session " + id_ + " is already closed");
    }
    if (phase != Phase::recording && phase != Phase::rating) {
      throw Error(ErrorKind::state, "session " + id_ + " cannot close while " +
                                        std::string(to_string(phase)));
    }
    if (options.trim_s < 0.0 || !std::isfinite(options.trim_s)) {
      throw Error(ErrorKind::validation, "trim span must be a non-negative number of seconds");
    }
    const std::optional<int> self = options.self_rating ? options.self_rating : self_rating_;
    if (!self) {
      throw Error(ErrorKind::validation, "closing a session needs a self rating");
    }
    const std::vector<int> observers =
        options.observer_ratings ? *options.observer_ratings : observer_ratings_;
    check_ratings(*self, observers);

    SessionSummary summary;
    summary.session_id = id_;
    summary.self_rating = self;
    summary.observer_ratings = observers;
    summary.dropped = dropped_;
    summary.trim = options.trim;

    const auto trim_ticks =
        static_cast<std::int64_t>(std::llround(options.trim_s * dsp::kSampleRateHz));
    std::unique_lock log(log_mutex_);
    double score_sum = 0.0;
    std::size_t ones = 0;
    for (auto& p : log_) {
      ++summary.windows_total;
      p.included = p.scoring;
      if (!p.scoring) continue;
      ++summary.windows_scoring;
      if (options.trim) {
        const std::int64_t lo = *recording_start_ + trim_ticks;
        const std::int64_t hi = *recording_last_ + 1 - trim_ticks;
        p.included = p.window_start >= lo && p.window_start < hi;
      }
      if (!p.included) continue;
      ++summary.windows_included;
      score_sum += p.score;
      ones += static_cast<std::size_t>(p.label);
    }
    if (summary.windows_included > 0) {
      summary.mean_score = score_sum / static_cast<double>(summary.windows_included);
      summary.majority_label = 2 * ones > summary.windows_included ? 1 : 0;
    }
    self_rating_ = self;
    observer_ratings_ = observers;
    set_phase(Phase::closed);
    return summary;
  }

 private:
  void set_phase(Phase p) {
    std::lock_guard lock(state_mutex_);
    phase_ = p;
  }

  void require(Phase expected, const std::string& action) const {
    const Phase phase = this->phase();
    if (phase != expected) {
      throw Error(ErrorKind::state, "session " + id_ + " cannot " + action + " while " +
                                        std::string(to_string(phase)));
    }
  }

  void validate(std::span<const dsp::RawSample> batch) const {
    std::optional<std::int64_t> prev = last_timestamp_;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& s = batch[i];
      if (prev && s.timestamp <= *prev) {
        throw Error(ErrorKind::stream_order,
                    "sample " + std::to_string(i) + " has timestamp " +
                        std::to_string(s.timestamp) + ", not after " + std::to_string(*prev),
                    i);
      }
      if (s.channel != metadata_.channel) {
        throw Error(ErrorKind::validation,
                    "sample " + std::to_string(i) + " is on channel " +
                        std::to_string(s.channel) + ", session expects " +
                        std::to_string(metadata_.channel),
                    i);
      }
      if (!std::isfinite(s.value) || s.value < dsp::kMinAmplitude ||
          s.value > dsp::kMaxAmplitude) {
        throw Error(ErrorKind::validation,
                    "sample " + std::to_string(i) + " value is outside the 16-bit range", i);
      }
      prev = s.timestamp;
    }
  }

  // The ring holds exactly the samples a future window still needs.
  void emit_window(std::vector<WirePrediction>& out) {
    const std::size_t w = config_.extraction.window;
    std::vector<double> samples(w);
    for (std::size_t k = 0; k < w; ++k) samples[k] = ring_[k].value;

    WirePrediction p;
    p.session_id = id_;
    p.window_start = ring_.front().timestamp;
    p.energies = dsp::window_energies(samples, taps_, config_.extraction.bands);
    const Prediction pred = model_->predict(p.energies);
    p.label = pred.label;
    p.score = pred.score;
    p.model_id = model_->id();
    p.scoring = recording_start_ && p.window_start >= *recording_start_;
    p.included = p.scoring;
    out.push_back(std::move(p));

    ring_.erase_begin(config_.extraction.hop);
  }

  std::string id_;
  SessionMetadata metadata_;
  std::shared_ptr<const ServingModel> model_;
  ServiceConfig config_;
  const std::vector<double>& taps_;

  std::mutex ingest_mutex_;  // single writer
  mutable std::mutex state_mutex_;
  mutable std::shared_mutex log_mutex_;

  boost::circular_buffer<dsp::RawSample> ring_;
  std::uint64_t dropped_ = 0;
  std::int64_t acclimation_ticks_;
  Phase phase_;
  std::optional<std::int64_t> first_timestamp_;
  std::optional<std::int64_t> last_timestamp_;
  std::optional<std::int64_t> recording_start_;
  std::optional<std::int64_t> recording_last_;
  std::optional<int> self_rating_;
  std::vector<int> observer_ratings_;
  std::vector<WirePrediction> log_;
};

SessionManager::SessionManager(std::shared_ptr<const ModelRegistry> models,
                               ServiceConfig config)
    : models_(std::move(models)), config_(std::move(config)) {
  if (!models_) throw Error(ErrorKind::parameter, "session manager needs a model registry");
  const auto& ex = config_.extraction;
  if (ex.window != dsp::kWindowLength) {
    throw Error(ErrorKind::parameter, "live windows must be 128 samples");
  }
  if (ex.hop == 0 || ex.hop > ex.window) {
    throw Error(ErrorKind::parameter, "hop must be in [1, window]");
  }
  if (config_.ring_capacity < ex.window) {
    throw Error(ErrorKind::parameter, "ring capacity must hold at least one window");
  }
  dsp::validate_bands(ex.bands);
  taps_ = dsp::design_lowpass(ex.cutoff_hz);
}

SessionManager::~SessionManager() = default;

std::string SessionManager::open_session(const SessionMetadata& metadata,
                                         const std::string& model_id) {
  if (metadata.subject_id.empty()) {
    throw Error(ErrorKind::validation, "session metadata needs a subject id");
  }
  if (metadata.material_id.empty()) {
    throw Error(ErrorKind::validation, "session metadata needs a material id");
  }
  if (metadata.channel < 0) throw Error(ErrorKind::validation, "channel must be >= 0");
  if (!std::isfinite(metadata.acclimation_s) || metadata.acclimation_s < 0.0) {
    throw Error(ErrorKind::validation, "acclimation must be a non-negative number of seconds");
  }
  auto model = models_->find(model_id);
  if (!model) throw Error(ErrorKind::not_found, "no model loaded as '" + model_id + "'");

  const std::string id = "session-" + std::to_string(next_id_.fetch_add(1));
  auto session = std::make_shared<Session>(id, metadata, std::move(model), config_, taps_);
  std::unique_lock lock(mutex_);
  sessions_.emplace(id, std::move(session));
  return id;
}

std::shared_ptr<Session> SessionManager::find(const std::string& session_id) const {
  std::shared_lock lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw Error(ErrorKind::not_found, "no session '" + session_id + "'");
  }
  return it->second;
}

IngestResult SessionManager::ingest_samples(const std::string& session_id,
                                            std::span<const dsp::RawSample> batch) {
  return find(session_id)->ingest(batch);
}

std::vector<WirePrediction> SessionManager::poll_predictions(const std::string& session_id,
                                                             std::int64_t after) const {
  return find(session_id)->poll(after);
}

std::vector<WirePrediction> SessionManager::all_predictions(
    const std::string& session_id) const {
  return find(session_id)->poll(std::numeric_limits<std::int64_t>::min());
}

Phase SessionManager::begin_rest(const std::string& session_id) {
  return find(session_id)->begin_rest();
}

Phase SessionManager::resume_recording(const std::string& session_id) {
  return find(session_id)->resume();
}

Phase SessionManager::submit_ratings(const std::string& session_id, int self_rating,
                                     const std::vector<int>& observer_ratings) {
  return find(session_id)->rate(self_rating, observer_ratings);
}

SessionSummary SessionManager::close_session(const std::string& session_id,
                                             const CloseOptions& options) {
  return find(session_id)->close(options);
}

Phase SessionManager::phase(const std::string& session_id) const {
  return find(session_id)->phase();
}

std::int64_t SessionManager::acclimation_ticks(const std::string& session_id) const {
  return find(session_id)->acclimation_ticks();
}

}  // namespace attentiv::stream
