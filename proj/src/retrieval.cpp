#include "tatret/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "tatret/common.hpp"

namespace tatret {

Gallery::Gallery(std::vector<FeatureVector> features) : features_(std::move(features)) {
  if (features_.empty()) {
    throw std::invalid_argument("Gallery: no features");
  }
  feature_dim_ = static_cast<int>(features_[0].values.size());
  if (feature_dim_ < 2 || feature_dim_ % 2 != 0) {
    throw std::invalid_argument("Gallery: feature length must be even (two halves)");
  }
  id_index_.reserve(features_.size());
  for (size_t i = 0; i < features_.size(); ++i) {
    if (static_cast<int>(features_[i].values.size()) != feature_dim_) {
      throw std::invalid_argument("Gallery: inconsistent feature lengths");
    }
    if (!id_index_.emplace(features_[i].sample_id, i).second) {
      throw std::invalid_argument("Gallery: duplicate sample_id: " + features_[i].sample_id);
    }
  }
}

const FeatureVector* Gallery::find(const std::string& sample_id) const {
  const auto it = id_index_.find(sample_id);
  return it == id_index_.end() ? nullptr : &features_[it->second];
}

bool Gallery::has_category(int label) const {
  return std::any_of(features_.begin(), features_.end(),
                     [label](const FeatureVector& f) { return f.category_label == label; });
}

double similarity(const FeatureVector& a, const FeatureVector& b) {
  if (a.values.size() != b.values.size() || a.values.empty()) {
    throw std::invalid_argument("similarity: feature length mismatch");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    dot += static_cast<double>(a.values[i]) * b.values[i];
    na += static_cast<double>(a.values[i]) * a.values[i];
    nb += static_cast<double>(b.values[i]) * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw std::invalid_argument("similarity: zero vector");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

Gallery enroll(std::vector<FeatureVector> features) { return Gallery(std::move(features)); }

CandidateList search(const FeatureVector& probe, const Gallery& gallery, int top_k) {
  if (top_k < 1) {
    throw std::invalid_argument("search: top_k must be >= 1");
  }
  if (gallery.empty()) {
    throw InvalidStateError("search: empty gallery");
  }
  const auto& feats = gallery.features();
  std::vector<std::pair<double, size_t>> scored(feats.size());
  for (size_t i = 0; i < feats.size(); ++i) {
    scored[i] = {similarity(probe, feats[i]), i};
  }
  const size_t k = std::min<size_t>(top_k, feats.size());
  const auto better = [&feats](const std::pair<double, size_t>& a,
                               const std::pair<double, size_t>& b) {
    if (a.first != b.first) return a.first > b.first;
    return feats[a.second].sample_id < feats[b.second].sample_id;
  };
  std::partial_sort(scored.begin(), scored.begin() + k, scored.end(), better);

  CandidateList out;
  out.probe_id = probe.sample_id;
  out.entries.reserve(k);
  for (size_t i = 0; i < k; ++i) {
    out.entries.push_back({feats[scored[i].second].sample_id,
                           feats[scored[i].second].category_label, scored[i].first});
  }
  return out;
}

std::vector<Candidate> decide(const CandidateList& candidates, double tau) {
  std::vector<Candidate> out;
  for (const Candidate& c : candidates.entries) {
    if (c.similarity < tau) break;
    out.push_back(c);
  }
  return out;
}

void save_features(const std::filesystem::path& path,
                   const std::vector<FeatureVector>& features, int embed_dim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_features: cannot open " + path.string());
  out << embed_dim << ',' << features.size() << '\n';
  char buf[32];
  for (const FeatureVector& f : features) {
    if (static_cast<int>(f.values.size()) != 2 * embed_dim) {
      throw std::invalid_argument("save_features: feature length != 2K for " + f.sample_id);
    }
    out << f.sample_id << ',' << f.category_label;
    for (const float v : f.values) {
      std::snprintf(buf, sizeof(buf), ",%.9g", static_cast<double>(v));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("save_features: write failed for " + path.string());
}

std::vector<FeatureVector> load_features(const std::filesystem::path& path,
                                         int* embed_dim_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_features: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("load_features: empty file " + path.string());

  int embed_dim = 0;
  size_t count = 0;
  if (std::sscanf(line.c_str(), "%d,%zu", &embed_dim, &count) != 2 || embed_dim < 1) {
    throw IoError("load_features: bad header in " + path.string());
  }
  std::vector<FeatureVector> features;
  features.reserve(count);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    FeatureVector f;
    size_t pos = line.find(',');
    if (pos == std::string::npos) throw IoError("load_features: bad row in " + path.string());
    f.sample_id = line.substr(0, pos);
    char* cursor = line.data() + pos + 1;
    f.category_label = static_cast<int>(std::strtol(cursor, &cursor, 10));
    f.values.reserve(2 * embed_dim);
    while (*cursor == ',') {
      ++cursor;
      f.values.push_back(std::strtof(cursor, &cursor));
    }
    if (static_cast<int>(f.values.size()) != 2 * embed_dim) {
      throw IoError("load_features: row length != 2K in " + path.string());
    }
    features.push_back(std::move(f));
  }
  if (features.size() != count) {
    throw IoError("load_features: row count mismatch in " + path.string());
  }
  if (embed_dim_out) *embed_dim_out = embed_dim;
  return features;
}

}  // namespace tatret
