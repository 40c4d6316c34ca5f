#include "tatret/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "tatret/common.hpp"
#include "tatret/rng.hpp"

namespace tatret {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double population_std(const std::vector<double>& xs, double mean) {
  double acc = 0.0;
  for (const double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace

std::vector<SplitSpec> make_splits(const std::vector<SampleRef>& samples, int n_splits,
                                   SplitMode mode, uint64_t seed, double open_fraction) {
  if (n_splits < 1) {
    throw std::invalid_argument("make_splits: n_splits must be >= 1");
  }
  if (samples.empty()) {
    throw std::invalid_argument("make_splits: no samples");
  }
  if (mode == SplitMode::kOpenSet && (open_fraction < 0.0 || open_fraction >= 1.0)) {
    throw std::invalid_argument("make_splits: open_fraction must be in [0, 1)");
  }

  std::map<int, std::vector<std::string>> by_category;
  for (const SampleRef& s : samples) by_category[s.category_label].push_back(s.sample_id);
  if (mode == SplitMode::kClosedSet) {
    for (const auto& [label, ids] : by_category) {
      if (ids.size() < 2) {
        throw std::invalid_argument("make_splits: closed-set needs >= 2 samples per "
                                    "category; category " + std::to_string(label) +
                                    " has " + std::to_string(ids.size()));
      }
    }
  }

  std::vector<int> labels;
  labels.reserve(by_category.size());
  for (const auto& [label, ids] : by_category) labels.push_back(label);

  int withheld = 0;
  if (mode == SplitMode::kOpenSet) {
    withheld = static_cast<int>(std::llround(open_fraction * static_cast<double>(labels.size())));
    withheld = std::min<int>(withheld, static_cast<int>(labels.size()) - 1);
  }

  std::vector<SplitSpec> splits;
  splits.reserve(n_splits);
  for (int s = 0; s < n_splits; ++s) {
    SplitSpec spec;
    spec.split_id = s;
    spec.seed = mix64(seed, static_cast<uint64_t>(s));
    Rng rng(spec.seed);

    std::vector<int> order = labels;
    rng.shuffle(order);
    std::unordered_set<int> withheld_set(order.begin(), order.begin() + withheld);

    for (const int label : labels) {
      std::vector<std::string> ids = by_category.at(label);
      rng.shuffle(ids);
      if (withheld_set.count(label)) {
        spec.probe_ids.insert(spec.probe_ids.end(), ids.begin(), ids.end());
      } else {
        spec.enrol_ids.push_back(ids.front());
        spec.probe_ids.insert(spec.probe_ids.end(), ids.begin() + 1, ids.end());
      }
    }
    splits.push_back(std::move(spec));
  }
  return splits;
}

std::pair<std::vector<FeatureVector>, std::vector<FeatureVector>> split_features(
    const std::vector<FeatureVector>& features, const SplitSpec& spec) {
  std::unordered_map<std::string, const FeatureVector*> by_id;
  by_id.reserve(features.size());
  for (const FeatureVector& f : features) by_id[f.sample_id] = &f;
  auto pick = [&](const std::vector<std::string>& ids) {
    std::vector<FeatureVector> out;
    out.reserve(ids.size());
    for (const std::string& id : ids) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw std::invalid_argument("split_features: unknown sample_id: " + id);
      }
      out.push_back(*it->second);
    }
    return out;
  };
  return {pick(spec.enrol_ids), pick(spec.probe_ids)};
}

std::vector<double> cmc(const Gallery& gallery, const std::vector<FeatureVector>& probes,
                        int r_max) {
  if (r_max < 1) {
    throw std::invalid_argument("cmc: r_max must be >= 1");
  }
  if (probes.empty()) {
    throw std::invalid_argument("cmc: no probes");
  }
  std::vector<size_t> hits_at(r_max, 0);
  for (const FeatureVector& probe : probes) {
    if (!gallery.has_category(probe.category_label)) {
      throw InvalidStateError("cmc: probe category " +
                              std::to_string(probe.category_label) +
                              " absent from gallery (closed-set violation)");
    }
    const CandidateList ranked = search(probe, gallery, static_cast<int>(gallery.size()));
    for (size_t i = 0; i < ranked.entries.size(); ++i) {
      if (ranked.entries[i].category_label == probe.category_label) {
        if (static_cast<int>(i) < r_max) ++hits_at[i];
        break;
      }
    }
  }
  std::vector<double> ir(r_max);
  size_t cumulative = 0;
  for (int r = 0; r < r_max; ++r) {
    cumulative += hits_at[r];
    ir[r] = static_cast<double>(cumulative) / static_cast<double>(probes.size());
  }
  return ir;
}

DETCurve det_open_set(const Gallery& gallery, const std::vector<FeatureVector>& probes,
                      int gate_rank) {
  if (gate_rank < 1) {
    throw std::invalid_argument("det_open_set: gate_rank must be >= 1");
  }
  std::vector<double> mated_scores;      // -inf when no same-category in gate
  std::vector<double> nonmated_scores;   // rank-1 similarity
  for (const FeatureVector& probe : probes) {
    const bool mated = gallery.has_category(probe.category_label);
    const CandidateList ranked = search(probe, gallery, gate_rank);
    if (mated) {
      double best = -kInf;
      for (const Candidate& c : ranked.entries) {
        if (c.category_label == probe.category_label) {
          best = std::max(best, c.similarity);
        }
      }
      mated_scores.push_back(best);
    } else {
      nonmated_scores.push_back(ranked.entries.front().similarity);
    }
  }
  if (mated_scores.empty()) {
    throw std::invalid_argument("det_open_set: no mated probes");
  }
  if (nonmated_scores.empty()) {
    throw std::invalid_argument("det_open_set: no non-mated probes");
  }

  std::vector<double> grid;
  for (const double v : mated_scores) {
    if (std::isfinite(v)) grid.push_back(v);
  }
  grid.insert(grid.end(), nonmated_scores.begin(), nonmated_scores.end());
  std::sort(grid.begin(), grid.end(), std::greater<>());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid.insert(grid.begin(), kInf);
  grid.push_back(-kInf);

  const double m_total = static_cast<double>(mated_scores.size());
  const double n_total = static_cast<double>(nonmated_scores.size());
  size_t never = 0;
  for (const double v : mated_scores) {
    if (!std::isfinite(v)) ++never;
  }

  DETCurve curve;
  curve.points.reserve(grid.size());
  for (const double tau : grid) {
    size_t fn = never, fp = 0;
    for (const double v : mated_scores) {
      if (std::isfinite(v) && v < tau) ++fn;
    }
    for (const double v : nonmated_scores) {
      if (v >= tau) ++fp;
    }
    curve.points.push_back({tau, fp / n_total, fn / m_total});
  }

  // FNIR - FPIR decreases monotonically along the list; the crossing is the EER.
  size_t j = 0;
  while (j < curve.points.size() && curve.points[j].fnir - curve.points[j].fpir > 0.0) ++j;
  if (j == 0) {
    curve.eer = std::max(curve.points[0].fpir, curve.points[0].fnir);
  } else if (j == curve.points.size()) {
    curve.eer = std::max(curve.points.back().fpir, curve.points.back().fnir);
  } else {
    const DetPoint& a = curve.points[j - 1];
    const DetPoint& b = curve.points[j];
    const double denom = (b.fpir - a.fpir) - (b.fnir - a.fnir);
    if (denom == 0.0) {
      curve.eer = 0.5 * (b.fpir + b.fnir);
    } else {
      const double t = (a.fnir - a.fpir) / denom;
      curve.eer = a.fpir + t * (b.fpir - a.fpir);
    }
  }
  return curve;
}

CMCCurve aggregate_cmc(const std::vector<std::vector<double>>& per_split_ir) {
  if (per_split_ir.size() < 2) {
    throw std::invalid_argument("aggregate_cmc: need >= 2 splits");
  }
  const size_t r_max = per_split_ir[0].size();
  for (const auto& ir : per_split_ir) {
    if (ir.size() != r_max) {
      throw std::invalid_argument("aggregate_cmc: inconsistent rank axes");
    }
  }
  CMCCurve curve;
  curve.ranks.resize(r_max);
  curve.mean_ir.resize(r_max);
  curve.std_ir.resize(r_max);
  std::vector<double> column(per_split_ir.size());
  for (size_t r = 0; r < r_max; ++r) {
    curve.ranks[r] = static_cast<int>(r) + 1;
    for (size_t s = 0; s < per_split_ir.size(); ++s) column[s] = per_split_ir[s][r];
    double mean = 0.0;
    for (const double v : column) mean += v;
    mean /= static_cast<double>(column.size());
    curve.mean_ir[r] = mean;
    curve.std_ir[r] = population_std(column, mean);
  }
  return curve;
}

namespace {

// Step-function evaluation: the curve's value at the smallest stored
// threshold >= tau (grids are stored descending and bracketed by +/-inf).
DetPoint eval_at(const DETCurve& curve, double tau) {
  const auto& pts = curve.points;
  size_t lo = 0, hi = pts.size();
  while (lo + 1 < hi) {
    const size_t mid = (lo + hi) / 2;
    if (pts[mid].threshold >= tau) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return pts[lo];
}

}  // namespace

AggregatedDET aggregate_det(const std::vector<DETCurve>& curves) {
  if (curves.size() < 2) {
    throw std::invalid_argument("aggregate_det: need >= 2 splits");
  }
  AggregatedDET agg;
  for (const DETCurve& c : curves) {
    if (c.points.empty()) {
      throw std::invalid_argument("aggregate_det: empty curve");
    }
    for (const DetPoint& p : c.points) agg.thresholds.push_back(p.threshold);
  }
  std::sort(agg.thresholds.begin(), agg.thresholds.end(), std::greater<>());
  agg.thresholds.erase(std::unique(agg.thresholds.begin(), agg.thresholds.end()),
                       agg.thresholds.end());

  const size_t n = agg.thresholds.size();
  agg.mean_fpir.resize(n);
  agg.std_fpir.resize(n);
  agg.mean_fnir.resize(n);
  agg.std_fnir.resize(n);
  std::vector<double> fpirs(curves.size()), fnirs(curves.size());
  for (size_t i = 0; i < n; ++i) {
    for (size_t s = 0; s < curves.size(); ++s) {
      const DetPoint p = eval_at(curves[s], agg.thresholds[i]);
      fpirs[s] = p.fpir;
      fnirs[s] = p.fnir;
    }
    double mean_fp = 0.0, mean_fn = 0.0;
    for (size_t s = 0; s < curves.size(); ++s) {
      mean_fp += fpirs[s];
      mean_fn += fnirs[s];
    }
    mean_fp /= static_cast<double>(curves.size());
    mean_fn /= static_cast<double>(curves.size());
    agg.mean_fpir[i] = mean_fp;
    agg.std_fpir[i] = population_std(fpirs, mean_fp);
    agg.mean_fnir[i] = mean_fn;
    agg.std_fnir[i] = population_std(fnirs, mean_fn);
  }

  std::vector<double> eers(curves.size());
  for (size_t s = 0; s < curves.size(); ++s) eers[s] = curves[s].eer;
  double mean_eer = 0.0;
  for (const double e : eers) mean_eer += e;
  mean_eer /= static_cast<double>(eers.size());
  agg.mean_eer = mean_eer;
  agg.std_eer = population_std(eers, mean_eer);
  return agg;
}

void save_cmc_csv(const std::filesystem::path& path, const CMCCurve& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_cmc_csv: cannot open " + path.string());
  out << "rank,mean_ir,std_ir\n";
  char buf[96];
  for (size_t i = 0; i < curve.ranks.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g\n", curve.ranks[i], curve.mean_ir[i],
                  curve.std_ir[i]);
    out << buf;
  }
  if (!out) throw IoError("save_cmc_csv: write failed for " + path.string());
}

CMCCurve load_cmc_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_cmc_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("rank,", 0) != 0) {
    throw IoError("load_cmc_csv: bad header in " + path.string());
  }
  CMCCurve curve;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int rank = 0;
    double mean = 0.0, std = 0.0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf", &rank, &mean, &std) != 3) {
      throw IoError("load_cmc_csv: bad row in " + path.string());
    }
    curve.ranks.push_back(rank);
    curve.mean_ir.push_back(mean);
    curve.std_ir.push_back(std);
  }
  if (curve.ranks.empty()) throw IoError("load_cmc_csv: no rows in " + path.string());
  return curve;
}

void save_det_csv(const std::filesystem::path& path, const AggregatedDET& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_det_csv: cannot open " + path.string());
  out << "threshold,mean_fpir,std_fpir,mean_fnir,std_fnir\n";
  char buf[192];
  for (size_t i = 0; i < curve.thresholds.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g\n", curve.thresholds[i],
                  curve.mean_fpir[i], curve.std_fpir[i], curve.mean_fnir[i],
                  curve.std_fnir[i]);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "# eer,%.9g,%.9g\n", curve.mean_eer, curve.std_eer);
  out << buf;
  if (!out) throw IoError("save_det_csv: write failed for " + path.string());
}

AggregatedDET load_det_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_det_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("threshold,", 0) != 0) {
    throw IoError("load_det_csv: bad header in " + path.string());
  }
  AggregatedDET curve;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::sscanf(line.c_str(), "# eer,%lf,%lf", &curve.mean_eer, &curve.std_eer);
      continue;
    }
    const char* cursor = line.c_str();
    char* end = nullptr;
    double vals[5];
    for (int f = 0; f < 5; ++f) {
      vals[f] = std::strtod(cursor, &end);
      if (end == cursor || (f < 4 && *end != ',')) {
        throw IoError("load_det_csv: bad row in " + path.string());
      }
      cursor = end + 1;
    }
    curve.thresholds.push_back(vals[0]);
    curve.mean_fpir.push_back(vals[1]);
    curve.std_fpir.push_back(vals[2]);
    curve.mean_fnir.push_back(vals[3]);
    curve.std_fnir.push_back(vals[4]);
  }
  if (curve.thresholds.empty()) throw IoError("load_det_csv: no rows in " + path.string());
  return curve;
}

}  // namespace tatret
