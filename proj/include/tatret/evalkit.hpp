#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tatret/retrieval.hpp"

namespace tatret {

struct SampleRef {
  std::string sample_id;
  int category_label = 0;
};

enum class SplitMode { kClosedSet, kOpenSet };

/// One enrolment/identification partition. Closed set: one enrolled sample
/// per category, every probe category enrolled. Open set: a fraction of
/// categories is withheld from enrolment entirely.
struct SplitSpec {
  int split_id = 0;
  std::vector<std::string> enrol_ids;
  std::vector<std::string> probe_ids;
  uint64_t seed = 0;
};

/// Deterministic under seed; closed-set needs >= 2 samples per category.
/// Open mode withholds round(open_fraction * categories) categories.
std::vector<SplitSpec> make_splits(const std::vector<SampleRef>& samples, int n_splits,
                                   SplitMode mode, uint64_t seed,
                                   double open_fraction = 0.3);

/// Partition features by a split spec: (enrolled, probes). Unknown ids
/// throw std::invalid_argument.
std::pair<std::vector<FeatureVector>, std::vector<FeatureVector>> split_features(
    const std::vector<FeatureVector>& features, const SplitSpec& spec);

/// Closed-set identification rates: ir[r-1] = fraction of probes whose first
/// same-category candidate sits at rank <= r. Throws InvalidStateError when
/// a probe's category is missing from the gallery.
std::vector<double> cmc(const Gallery& gallery, const std::vector<FeatureVector>& probes,
                        int r_max);

struct DetPoint {
  double threshold = 0.0;
  double fpir = 0.0;
  double fnir = 0.0;
};

/// Stored with thresholds descending, so fpir is non-decreasing and fnir
/// non-increasing along the list.
struct DETCurve {
  std::vector<DetPoint> points;
  double eer = 0.0;
};

/// Open-set DET. A mated probe counts as identified at threshold t when a
/// same-category candidate appears within gate_rank with similarity >= t;
/// FPIR is the rate of non-mated probes whose rank-1 similarity >= t.
/// Thresholds: every distinct observed score plus the +/-infinity endpoints.
/// Throws std::invalid_argument when there are no non-mated (or no mated)
/// probes.
DETCurve det_open_set(const Gallery& gallery, const std::vector<FeatureVector>& probes,
                      int gate_rank = 1);

struct CMCCurve {
  std::vector<int> ranks;        // 1..R
  std::vector<double> mean_ir;
  std::vector<double> std_ir;    // population std over splits
};

/// Pointwise mean and population std; needs >= 2 splits of equal length.
CMCCurve aggregate_cmc(const std::vector<std::vector<double>>& per_split_ir);

struct AggregatedDET {
  std::vector<double> thresholds;  // descending (union of split grids)
  std::vector<double> mean_fpir, std_fpir;
  std::vector<double> mean_fnir, std_fnir;
  double mean_eer = 0.0;
  double std_eer = 0.0;
};

/// Union-grid aggregation: each curve is evaluated as a step function at
/// every threshold appearing in any split.
AggregatedDET aggregate_det(const std::vector<DETCurve>& curves);

void save_cmc_csv(const std::filesystem::path& path, const CMCCurve& curve);
CMCCurve load_cmc_csv(const std::filesystem::path& path);
void save_det_csv(const std::filesystem::path& path, const AggregatedDET& curve);
AggregatedDET load_det_csv(const std::filesystem::path& path);

}  // namespace tatret
