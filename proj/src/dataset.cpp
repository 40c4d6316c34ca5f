#include "tatret/dataset.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "tatret/common.hpp"

namespace tatret {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json params_to_json(const AugmentationParams& p) {
  ordered_json j;
  j["scale"] = p.scale;
  j["offset"] = {p.offset_row, p.offset_col};
  j["color_shift"] = {p.color_shift[0], p.color_shift[1], p.color_shift[2]};
  j["blur_sigma"] = p.blur_sigma;
  j["opacity"] = p.opacity;
  j["seed"] = p.seed;
  return j;
}

AugmentationParams params_from_json(const ordered_json& j) {
  AugmentationParams p;
  p.scale = j.at("scale").get<double>();
  p.offset_row = j.at("offset").at(0).get<int>();
  p.offset_col = j.at("offset").at(1).get<int>();
  for (int c = 0; c < 3; ++c) p.color_shift[c] = j.at("color_shift").at(c).get<double>();
  p.blur_sigma = j.at("blur_sigma").get<double>();
  p.opacity = j.at("opacity").get<double>();
  p.seed = j.at("seed").get<uint64_t>();
  return p;
}

}  // namespace

DatasetManifest build_dataset(const std::vector<TattooTemplate>& templates,
                              const std::vector<std::vector<SkinBase>>& base_pools,
                              int per_template_count, uint64_t global_seed,
                              const std::filesystem::path& out_dir,
                              const DatasetOptions& options) {
  if (templates.empty()) {
    throw std::invalid_argument("build_dataset: empty template list");
  }
  if (per_template_count < 1) {
    throw std::invalid_argument("build_dataset: per_template_count must be >= 1");
  }
  if (base_pools.empty()) {
    throw std::invalid_argument("build_dataset: no base pools");
  }
  for (const auto& pool : base_pools) {
    if (pool.empty()) {
      throw std::invalid_argument("build_dataset: empty base pool");
    }
  }
  {
    std::unordered_set<int> labels;
    for (const auto& tpl : templates) {
      if (!labels.insert(tpl.category_label).second) {
        throw std::invalid_argument("build_dataset: duplicate category label");
      }
    }
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  std::filesystem::create_directories(out_dir / "targets", ec);
  if (!std::filesystem::is_directory(out_dir / "images") ||
      !std::filesystem::is_directory(out_dir / "targets")) {
    throw IoError("build_dataset: cannot create output directories under " + out_dir.string());
  }

  DatasetManifest manifest;
  manifest.num_categories = static_cast<int>(templates.size());
  manifest.per_template_count = per_template_count;
  manifest.global_seed = global_seed;
  manifest.input_side = options.input_side;

  const size_t total = templates.size() * static_cast<size_t>(per_template_count);
  manifest.entries.resize(total);

  auto make_sample = [&](size_t i) {
    const size_t t_idx = i / per_template_count;
    const int j = static_cast<int>(i % per_template_count);
    const int j_global = options.first_sample_index + j;
    const TattooTemplate& tpl = templates[t_idx];
    const uint64_t seed =
        mix64(global_seed, mix64(static_cast<uint64_t>(t_idx), static_cast<uint64_t>(j_global)));
    Rng rng(seed);

    const auto& pool = base_pools[static_cast<size_t>(j_global) % base_pools.size()];
    const SkinBase& base = pool[rng.below(pool.size())];

    AugmentationParams params =
        sample_params(rng, options.ranges, base.image.height(), base.image.width());
    params.seed = seed;

    SyntheticSample sample = compose(tpl, base, params);
    const Image target = render_template_target(tpl, params, base.image.height(),
                                                base.image.width());
    const Box box = mask_bbox_with_margin(sample.mask, options.margin_frac);
    const Image img =
        resize_bilinear(crop(sample.image, box), options.input_side, options.input_side);
    const Image tgt =
        resize_bilinear(crop(target, box), options.input_side, options.input_side);

    char name[96];
    std::snprintf(name, sizeof(name), "%s_%06d.png", tpl.id.c_str(), j_global);
    const std::string sample_rel = std::string("images/") + name;
    const std::string target_rel = std::string("targets/") + name;
    write_png(out_dir / sample_rel, img);
    write_png(out_dir / target_rel, tgt);

    ManifestEntry entry;
    entry.sample_path = sample_rel;
    entry.target_path = target_rel;
    entry.template_id = tpl.id;
    entry.category_label = tpl.category_label;
    entry.params = params;
    manifest.entries[i] = std::move(entry);
  };

  int workers = options.workers;
  if (workers == 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(total)));

  if (workers == 1) {
    for (size_t i = 0; i < total; ++i) make_sample(i);
  } else {
    std::atomic<size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto run = [&] {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= total) return;
        try {
          make_sample(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          next.store(total);
          return;
        }
      }
    };
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) threads.emplace_back(run);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  save_manifest(manifest, out_dir / options.manifest_filename);
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("save_manifest: cannot open " + path.string());
  }
  ordered_json meta;
  meta["type"] = "tatret-dataset";
  meta["version"] = 1;
  meta["num_categories"] = manifest.num_categories;
  meta["per_template_count"] = manifest.per_template_count;
  meta["global_seed"] = manifest.global_seed;
  meta["input_side"] = manifest.input_side;
  out << meta.dump() << '\n';
  for (const auto& e : manifest.entries) {
    ordered_json j;
    j["path"] = e.sample_path;
    j["template_id"] = e.template_id;
    j["label"] = e.category_label;
    j["params"] = params_to_json(e.params);
    j["target_path"] = e.target_path;
    out << j.dump() << '\n';
  }
  if (!out) {
    throw IoError("save_manifest: write failed for " + path.string());
  }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("load_manifest: cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("load_manifest: empty manifest " + path.string());
  }
  DatasetManifest manifest;
  try {
    const ordered_json meta = ordered_json::parse(line);
    if (meta.value("type", "") != "tatret-dataset") {
      throw IoError("load_manifest: not a dataset manifest: " + path.string());
    }
    manifest.num_categories = meta.at("num_categories").get<int>();
    manifest.per_template_count = meta.at("per_template_count").get<int>();
    manifest.global_seed = meta.at("global_seed").get<uint64_t>();
    manifest.input_side = meta.at("input_side").get<int>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const ordered_json j = ordered_json::parse(line);
      ManifestEntry e;
      e.sample_path = j.at("path").get<std::string>();
      e.template_id = j.at("template_id").get<std::string>();
      e.category_label = j.at("label").get<int>();
      e.params = params_from_json(j.at("params"));
      e.target_path = j.at("target_path").get<std::string>();
      manifest.entries.push_back(std::move(e));
    }
  } catch (const ordered_json::exception& ex) {
    throw IoError("load_manifest: malformed manifest " + path.string() + ": " + ex.what());
  }
  return manifest;
}

}  // namespace tatret
