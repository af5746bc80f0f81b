#pragma once

#include <cstdint>

namespace attentiv {

// label is 1 exactly when score is above the owning model's threshold
// (0 for SVM, naive Bayes and the ensemble, 0.5 for the forest). A score
// equal to the threshold is a tie and resolves to label 0 (learned).
struct Prediction {
  int label = 0;
  double score = 0.0;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

inline int label_for(double score, double threshold = 0.0) {
  return score > threshold ? 1 : 0;
}

// splitmix64 finalizer; gives independent child seeds (per tree, member, fold).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace attentiv
