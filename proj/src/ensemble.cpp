#include "attentiv/ensemble.hpp"

#include "attentiv/error.hpp"

#include <cmath>
#include <random>
#include <set>

namespace attentiv {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::svm: return "svm";
    case Algorithm::nb: return "nb";
    case Algorithm::rf: return "rf";
    case Algorithm::ensemble: return "ensemble";
  }
  return "";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::svm, Algorithm::nb, Algorithm::rf, Algorithm::ensemble}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

Algorithm algorithm_of(const BaseModel& m) {
  switch (m.index()) {
    case 0: return Algorithm::svm;
    case 1: return Algorithm::nb;
    default: return Algorithm::rf;
  }
}

Prediction predict_base(const BaseModel& m, std::span<const double> x) {
  return std::visit([&](const auto& model) { return model.predict(x); }, m);
}

double normalized_score(const BaseModel& m, const Prediction& p) {
  switch (algorithm_of(m)) {
    case Algorithm::svm: return std::tanh(p.score);
    case Algorithm::nb: return std::tanh(p.score / 2.0);
    default: return 2.0 * p.score - 1.0;
  }
}

EnsembleVotes EnsembleModel::votes(std::span<const double> x) const {
  EnsembleVotes v;
  double sum = 0.0;
  for (const auto& member : members) {
    const Prediction p = predict_base(member, x);
    (p.label == 1 ? v.votes1 : v.votes0) += 1;
    sum += normalized_score(member, p);
  }
  if (!members.empty()) v.mean_normalized = sum / static_cast<double>(members.size());
  return v;
}

Prediction EnsembleModel::predict(std::span<const double> x) const {
  const EnsembleVotes v = votes(x);
  if (members.empty()) return {};
  const double margin = static_cast<double>(v.votes1) - static_cast<double>(v.votes0);
  const double score = (margin + v.mean_normalized / 2.0) / static_cast<double>(members.size());
  return {label_for(score), score};
}

namespace {

BaseModel train_member(const FeatureMatrix& m, Algorithm a, const EnsembleParams& params,
                       std::uint64_t seed) {
  switch (a) {
    case Algorithm::svm: return train_svm(m, params.svm);
    case Algorithm::nb: return train_nb(m, params.nb_smoothing);
    case Algorithm::rf: return train_rf(m, params.forest, seed);
    case Algorithm::ensemble: break;
  }
  throw Error(ErrorKind::parameter, "an ensemble cannot contain an ensemble");
}

}  // namespace

EnsembleModel train_ensemble(const FeatureMatrix& m, const EnsembleParams& params,
                             std::uint64_t seed) {
  if (params.bags < 1) throw Error(ErrorKind::parameter, "ensemble needs at least one bag");
  if (params.algorithms.empty()) {
    throw Error(ErrorKind::parameter, "ensemble needs at least one algorithm");
  }
  if (!m.labels) throw Error(ErrorKind::training, "ensemble needs labels");
  m.validate();
  std::size_t ones = 0;
  for (std::size_t i = 0; i < m.n; ++i) ones += static_cast<std::size_t>(m.label(i));
  if (m.n < 2 || ones == 0 || ones == m.n) {
    throw Error(ErrorKind::training, "ensemble needs both classes present");
  }

  EnsembleModel model;
  std::set<Algorithm> represented;
  std::optional<Error> last_error;
  std::uint64_t member_index = 0;
  for (const Algorithm a : params.algorithms) {
    for (std::size_t b = 0; b < params.bags; ++b, ++member_index) {
      const std::uint64_t member_seed = derive_seed(seed, member_index);
      std::mt19937_64 rng(member_seed);
      std::uniform_int_distribution<std::size_t> pick(0, m.n - 1);
      std::vector<std::size_t> rows(m.n);
      for (auto& r : rows) r = pick(rng);
      const FeatureMatrix bag = select_rows(m, rows);
      try {
        model.members.push_back(train_member(bag, a, params, derive_seed(member_seed, 1)));
        represented.insert(a);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::training) throw;
        ++model.skipped_members;
        last_error = e;
      }
    }
  }

  const std::set<Algorithm> configured(params.algorithms.begin(), params.algorithms.end());
  const std::size_t needed = std::min<std::size_t>(2, configured.size());
  if (represented.size() < needed || model.members.size() < 3) {
    throw Error(ErrorKind::training,
                "ensemble lost too many members" +
                    (last_error ? std::string(": ") + last_error->what() : std::string()));
  }
  return model;
}

}  // namespace attentiv
