#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tatret/compose.hpp"

namespace tatret {

struct ManifestEntry {
  std::string sample_path;  // relative to the manifest's directory
  std::string target_path;
  std::string template_id;
  int category_label = 0;
  AugmentationParams params;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  int num_categories = 0;
  int per_template_count = 0;
  uint64_t global_seed = 0;
  int input_side = 0;
};

struct DatasetOptions {
  int input_side = 224;
  double margin_frac = 0.1;
  AugmentationRanges ranges;
  int workers = 1;  // 0 = hardware concurrency
  // Per-sample draws are keyed by first_sample_index + j, so a second call
  // with an offset yields a disjoint, equally deterministic set.
  int first_sample_index = 0;
  std::string manifest_filename = "manifest.jsonl";
};

/// Composite per_template_count samples per template, alternating base pools
/// per sample as in a 25:25 two-source split, crop each around its mask, and
/// write PNGs plus a JSON-lines manifest under out_dir. Output bytes depend
/// only on the inputs and global_seed, not on worker count.
DatasetManifest build_dataset(const std::vector<TattooTemplate>& templates,
                              const std::vector<std::vector<SkinBase>>& base_pools,
                              int per_template_count, uint64_t global_seed,
                              const std::filesystem::path& out_dir,
                              const DatasetOptions& options = {});

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace tatret
