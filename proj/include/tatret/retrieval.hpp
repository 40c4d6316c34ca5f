#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace tatret {

/// Concatenated two-branch feature: 2K values, each K-half unit-norm.
struct FeatureVector {
  std::vector<float> values;
  int category_label = 0;
  std::string sample_id;
};

struct Candidate {
  std::string sample_id;
  int category_label = 0;
  double similarity = 0.0;
};

/// Ranked search result: similarity non-increasing, ties broken by
/// sample_id ascending.
struct CandidateList {
  std::vector<Candidate> entries;
  std::string probe_id;
};

/// Immutable enrolled feature set; searches are exhaustive and exact.
class Gallery {
 public:
  Gallery() = default;
  explicit Gallery(std::vector<FeatureVector> features);

  size_t size() const { return features_.size(); }
  bool empty() const { return features_.empty(); }
  int feature_dim() const { return feature_dim_; }
  int embed_dim() const { return feature_dim_ / 2; }  // the per-branch K
  const std::vector<FeatureVector>& features() const { return features_; }
  const FeatureVector* find(const std::string& sample_id) const;
  bool has_category(int label) const;

 private:
  std::vector<FeatureVector> features_;
  std::unordered_map<std::string, size_t> id_index_;
  int feature_dim_ = 0;
};

/// Cosine similarity a.b / (|a||b|). With unit-norm halves this equals the
/// mean of the per-half cosines. Throws std::invalid_argument on length
/// mismatch or a zero vector.
double similarity(const FeatureVector& a, const FeatureVector& b);

/// Builds the gallery; duplicate sample_id or inconsistent lengths throw
/// std::invalid_argument.
Gallery enroll(std::vector<FeatureVector> features);

/// Top-k exhaustive search. top_k < 1 throws std::invalid_argument; an
/// empty gallery throws InvalidStateError.
CandidateList search(const FeatureVector& probe, const Gallery& gallery, int top_k);

/// Entries of the (sorted) candidate list with similarity >= tau.
std::vector<Candidate> decide(const CandidateList& candidates, double tau);

/// CSV feature store. Header line "K,count", then one row per feature:
/// sample_id,label,v0,...,v_{2K-1}.
void save_features(const std::filesystem::path& path,
                   const std::vector<FeatureVector>& features, int embed_dim);
std::vector<FeatureVector> load_features(const std::filesystem::path& path,
                                         int* embed_dim_out = nullptr);

}  // namespace tatret
