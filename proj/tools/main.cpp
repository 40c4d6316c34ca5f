#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <string>

#include "tatret/common.hpp"
#include "tatret/dataset.hpp"
#include "tatret/evalkit.hpp"
#include "tatret/plot.hpp"
#include "tatret/runconfig.hpp"
#include "tatret/skin.hpp"
#include "tatret/template_gen.hpp"
#include "tatret/train.hpp"

namespace fs = std::filesystem;
using namespace tatret;

namespace {

RunConfig base_config(const std::string& config_path) {
  RunConfig cfg;
  if (!config_path.empty()) cfg = load_run_config(config_path);
  if (const char* root = std::getenv("TATRET_OUT_ROOT")) {
    if (*root) cfg.out_root = root;
  }
  if (const char* workers = std::getenv("TATRET_WORKERS")) {
    if (*workers) cfg.synth.workers = std::max(0, std::atoi(workers));
  }
  return cfg;
}

fs::path make_run_dir(const RunConfig& cfg, const std::string& command,
                      const std::string& explicit_out) {
  fs::path dir;
  if (!explicit_out.empty()) {
    dir = explicit_out;
  } else {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm);
    dir = fs::path(cfg.out_root) / (command + "-" + stamp);
    for (int i = 1; fs::exists(dir); ++i) {
      dir = fs::path(cfg.out_root) / (command + "-" + std::string(stamp) + "-" +
                                      std::to_string(i));
    }
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) {
    throw IoError("cannot create run directory " + dir.string());
  }
  save_run_config(cfg, dir / "config.ini");
  return dir;
}

std::vector<std::vector<SkinBase>> make_skin_pools(const SynthSettings& synth,
                                                   uint64_t seed) {
  std::vector<std::vector<SkinBase>> pools;
  if (!synth.skin_dir.empty()) {
    pools.push_back(load_skin_dir(synth.skin_dir));
    return pools;
  }
  for (int p = 0; p < std::max(1, synth.skin_pools); ++p) {
    std::vector<SkinBase> pool = generate_skin_pool(
        synth.skin_count, synth.base_side, synth.base_side,
        mix64(seed, 0x5151ull + static_cast<uint64_t>(p)));
    for (SkinBase& base : pool) base.id = "pool" + std::to_string(p) + "_" + base.id;
    pools.push_back(std::move(pool));
  }
  return pools;
}

std::vector<TattooTemplate> make_templates(const SynthSettings& synth, uint64_t seed) {
  if (!synth.template_dir.empty()) {
    return load_template_dir(synth.template_dir, synth.template_side);
  }
  return generate_glyph_set(synth.templates, synth.template_side, mix64(seed, 0x717ull));
}

int cmd_gen_data(const RunConfig& cfg, const std::string& out_arg) {
  const fs::path dir = make_run_dir(cfg, "gen-data", out_arg);
  const std::vector<TattooTemplate> templates = make_templates(cfg.synth, cfg.seed);
  const std::vector<std::vector<SkinBase>> pools = make_skin_pools(cfg.synth, cfg.seed);

  DatasetOptions opts;
  opts.input_side = cfg.synth.input_side;
  opts.margin_frac = cfg.synth.margin_frac;
  opts.ranges = cfg.synth.ranges;
  opts.workers = cfg.synth.workers;
  const DatasetManifest manifest =
      build_dataset(templates, pools, cfg.synth.per_template, cfg.seed, dir, opts);
  std::printf("wrote %zu samples (%d categories) to %s\n", manifest.entries.size(),
              manifest.num_categories, (dir / "manifest.jsonl").string().c_str());

  if (cfg.synth.eval_per_template > 0) {
    DatasetOptions eval_opts = opts;
    eval_opts.first_sample_index = cfg.synth.per_template;
    eval_opts.manifest_filename = "manifest_eval.jsonl";
    const DatasetManifest eval_manifest = build_dataset(
        templates, pools, cfg.synth.eval_per_template, cfg.seed, dir, eval_opts);
    std::printf("wrote %zu held-out samples to %s\n", eval_manifest.entries.size(),
                (dir / "manifest_eval.jsonl").string().c_str());
  }
  return 0;
}

int cmd_train(const RunConfig& cfg_in, const std::string& manifest_path,
              const std::string& out_arg, const std::string& resume, bool verbose) {
  RunConfig cfg = cfg_in;
  const fs::path manifest_file = manifest_path;
  const DatasetManifest manifest = load_manifest(manifest_file);
  if (cfg.model.C == 0) {
    cfg.model.C = manifest.num_categories;
  } else if (cfg.model.C != manifest.num_categories) {
    throw std::invalid_argument("train: config C=" + std::to_string(cfg.model.C) +
                                " but manifest has " +
                                std::to_string(manifest.num_categories) + " categories");
  }
  if (cfg.model.init_seed == 1) cfg.model.init_seed = mix64(cfg.seed, 0xA11CEull);

  const fs::path dir = make_run_dir(cfg, "train", out_arg);
  TrainOptions opts;
  opts.seed = cfg.seed;
  opts.resume_from = resume.empty() ? fs::path() : fs::path(resume);
  opts.verbose = verbose;
  const TrainResult result =
      train(manifest, manifest_file.parent_path(), cfg.model, dir, opts);
  const TrainHistoryRow& last = result.history.back();
  std::printf("trained %d epochs; final total loss %.6f\n", last.epoch, last.total);
  std::printf("checkpoint: %s\n", result.final_checkpoint.string().c_str());
  return 0;
}

int cmd_enroll(const RunConfig& cfg, const std::string& features_path,
               const std::string& out_arg) {
  int embed_dim = 0;
  std::vector<FeatureVector> features = load_features(features_path, &embed_dim);
  const Gallery gallery = enroll(std::move(features));

  fs::path out;
  if (!out_arg.empty() && fs::path(out_arg).extension() == ".csv") {
    out = out_arg;
    if (out.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(out.parent_path(), ec);
    }
  } else {
    out = make_run_dir(cfg, "enroll", out_arg) / "gallery.csv";
  }
  save_features(out, gallery.features(), embed_dim);
  std::printf("enrolled %zu features (K=%d) into %s\n", gallery.size(), embed_dim,
              out.string().c_str());
  return 0;
}

FeatureVector feature_from_image(Model& model, const Image& image, const std::string& id,
                                 int label) {
  Image sized = image;
  if (sized.channels() == 1) sized = replicate_channels(sized, 3);
  const int side = model.config().input_side;
  if (sized.height() != side || sized.width() != side) {
    sized = resize_bilinear(sized, side, side);
  }
  const Tensor feat = model.extract_feature(image_to_tensor(sized));
  FeatureVector f;
  f.values.assign(feat.data(), feat.data() + feat.size());
  f.sample_id = id;
  f.category_label = label;
  return f;
}

int cmd_search(const std::string& gallery_path, const std::string& probe_path,
               const std::string& checkpoint_path, int top_k, double tau, bool has_tau) {
  std::vector<FeatureVector> features = load_features(gallery_path);
  const Gallery gallery = enroll(std::move(features));
  LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
  if (2 * loaded.config.K != gallery.feature_dim()) {
    throw InvalidStateError("search: checkpoint K=" + std::to_string(loaded.config.K) +
                            " does not match gallery feature length " +
                            std::to_string(gallery.feature_dim()));
  }
  const FeatureVector probe =
      feature_from_image(*loaded.model, read_png(probe_path), "probe", -1);
  const CandidateList ranked = search(probe, gallery, top_k);
  for (size_t i = 0; i < ranked.entries.size(); ++i) {
    const Candidate& c = ranked.entries[i];
    std::printf("rank %zu  id=%s  label=%d  similarity %.2f\n", i + 1,
                c.sample_id.c_str(), c.category_label, c.similarity);
  }
  if (has_tau) {
    const size_t accepted = decide(ranked, tau).size();
    std::printf("accepted %zu of %zu at tau %.2f\n", accepted, ranked.entries.size(), tau);
  }
  return 0;
}

std::vector<FeatureVector> features_from_manifest(const fs::path& manifest_path,
                                                  const std::string& checkpoint_path,
                                                  int batch_size) {
  const DatasetManifest manifest = load_manifest(manifest_path);
  LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
  Model& model = *loaded.model;
  const fs::path root = manifest_path.parent_path();
  const int side = model.config().input_side;

  std::vector<FeatureVector> features;
  features.reserve(manifest.entries.size());
  const size_t n = manifest.entries.size();
  for (size_t start = 0; start < n; start += batch_size) {
    const size_t count = std::min<size_t>(batch_size, n - start);
    std::vector<Image> images(count);
    std::vector<const Image*> ptrs(count);
    for (size_t b = 0; b < count; ++b) {
      Image img = read_png(root / manifest.entries[start + b].sample_path);
      if (img.channels() == 1) img = replicate_channels(img, 3);
      if (img.height() != side || img.width() != side) {
        img = resize_bilinear(img, side, side);
      }
      images[b] = std::move(img);
      ptrs[b] = &images[b];
    }
    const Tensor batch_features = model.extract_feature(images_to_tensor(ptrs));
    for (size_t b = 0; b < count; ++b) {
      const ManifestEntry& e = manifest.entries[start + b];
      FeatureVector f;
      const float* row = batch_features.sample(static_cast<int>(b));
      f.values.assign(row, row + batch_features.per_sample());
      f.sample_id = e.sample_path;
      f.category_label = e.category_label;
      features.push_back(std::move(f));
    }
  }
  return features;
}

int cmd_eval(const RunConfig& cfg, const std::string& features_path,
             const std::string& manifest_path, const std::string& checkpoint_path,
             const std::string& out_arg, int r_max_arg) {
  if (cfg.eval.mode != "closed" && cfg.eval.mode != "open") {
    throw std::invalid_argument("eval: mode must be 'closed' or 'open'");
  }
  std::vector<FeatureVector> features;
  int embed_dim = 0;
  if (!features_path.empty()) {
    features = load_features(features_path, &embed_dim);
  } else {
    if (manifest_path.empty() || checkpoint_path.empty()) {
      throw std::invalid_argument("eval: need --features, or --manifest with --checkpoint");
    }
    features = features_from_manifest(manifest_path, checkpoint_path,
                                      std::max(1, cfg.model.batch_size));
    embed_dim = static_cast<int>(features.front().values.size()) / 2;
  }

  const fs::path dir = make_run_dir(cfg, "eval", out_arg);
  if (features_path.empty()) {
    save_features(dir / "features.csv", features, embed_dim);
  }

  std::vector<SampleRef> refs;
  refs.reserve(features.size());
  for (const FeatureVector& f : features) refs.push_back({f.sample_id, f.category_label});
  const SplitMode mode =
      cfg.eval.mode == "closed" ? SplitMode::kClosedSet : SplitMode::kOpenSet;
  const std::vector<SplitSpec> splits = make_splits(refs, cfg.eval.splits, mode,
                                                    mix64(cfg.seed, 0x5EEDull),
                                                    cfg.eval.open_fraction);

  if (mode == SplitMode::kClosedSet) {
    std::vector<std::vector<double>> per_split;
    per_split.reserve(splits.size());
    for (const SplitSpec& spec : splits) {
      auto [enrol, probes] = split_features(features, spec);
      const Gallery gallery = enroll(std::move(enrol));
      const int r_max = r_max_arg > 0 ? r_max_arg : static_cast<int>(gallery.size());
      per_split.push_back(cmc(gallery, probes, r_max));
    }
    const CMCCurve curve = aggregate_cmc(per_split);
    save_cmc_csv(dir / "cmc.csv", curve);
    std::printf("closed-set over %zu splits: rank-1 IR %.4f +/- %.4f\n", splits.size(),
                curve.mean_ir.front(), curve.std_ir.front());
    std::printf("report: %s\n", (dir / "cmc.csv").string().c_str());
  } else {
    std::vector<DETCurve> curves;
    curves.reserve(splits.size());
    for (const SplitSpec& spec : splits) {
      auto [enrol, probes] = split_features(features, spec);
      const Gallery gallery = enroll(std::move(enrol));
      curves.push_back(det_open_set(gallery, probes, cfg.eval.gate_rank));
    }
    const AggregatedDET agg = aggregate_det(curves);
    save_det_csv(dir / "det.csv", agg);
    std::printf("open-set over %zu splits: EER %.4f +/- %.4f\n", splits.size(),
                agg.mean_eer, agg.std_eer);
    std::printf("report: %s\n", (dir / "det.csv").string().c_str());
  }
  return 0;
}

int cmd_plot(const RunConfig& cfg, const std::string& cmc_path, const std::string& det_path,
             const std::string& out_arg) {
  if (cmc_path.empty() && det_path.empty()) {
    throw std::invalid_argument("plot: give --cmc and/or --det");
  }
  const fs::path dir = make_run_dir(cfg, "plot", out_arg);
  if (!cmc_path.empty()) {
    plot_cmc(dir / "cmc.png", load_cmc_csv(cmc_path));
    std::printf("wrote %s\n", (dir / "cmc.png").string().c_str());
  }
  if (!det_path.empty()) {
    plot_det(dir / "det.png", load_det_csv(det_path));
    std::printf("wrote %s\n", (dir / "det.png").string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tattooed-skin retrieval pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_dir, manifest_path, checkpoint_path, features_path;
  std::string gallery_path, probe_path, resume_path, cmc_path, det_path;
  uint64_t seed = 0;
  bool verbose = false;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic tattoo dataset");
  gen->add_option("--config", config_path, "run config file (INI)");
  gen->add_option("--out", out_dir, "output directory (default: timestamped)");
  auto* gen_seed = gen->add_option("--seed", seed, "global seed");
  int templates = 0, per_template = 0, eval_per_template = -1, input_side = 0, workers = -1;
  std::string template_dir, skin_dir;
  auto* gen_templates = gen->add_option("--templates", templates, "number of categories");
  auto* gen_per = gen->add_option("--per-template", per_template, "samples per category");
  auto* gen_eval = gen->add_option("--eval-per-template", eval_per_template,
                                   "extra held-out samples per category");
  auto* gen_side = gen->add_option("--input-side", input_side, "output crop side");
  auto* gen_workers = gen->add_option("--workers", workers, "parallel sample workers");
  gen->add_option("--template-dir", template_dir, "PNG artwork directory");
  gen->add_option("--skin-dir", skin_dir, "PNG skin directory");

  auto* tr = app.add_subcommand("train", "train the translation + embedding model");
  tr->add_option("--manifest", manifest_path, "dataset manifest")->required();
  tr->add_option("--config", config_path, "run config file (INI)");
  tr->add_option("--out", out_dir, "output directory");
  auto* tr_seed = tr->add_option("--seed", seed, "run seed");
  tr->add_option("--resume", resume_path, "checkpoint to resume from");
  int epochs = 0, batch_size = 0, k_dim = 0, t_width = 0;
  double lr = 0.0, margin = -1.0, lambda = -1.0;
  std::string backbone;
  auto* tr_epochs = tr->add_option("--epochs", epochs, "training epochs");
  auto* tr_batch = tr->add_option("--batch-size", batch_size, "mini-batch size");
  auto* tr_lr = tr->add_option("--lr", lr, "learning rate");
  auto* tr_k = tr->add_option("--k", k_dim, "embedding size per branch");
  auto* tr_margin = tr->add_option("--margin", margin, "angular margin m");
  auto* tr_lambda = tr->add_option("--lambda", lambda, "reconstruction weight");
  auto* tr_backbone = tr->add_option("--backbone", backbone, "backbone spec conv:w1,w2,...");
  auto* tr_width = tr->add_option("--translator-width", t_width, "translator base width");
  tr->add_flag("--verbose", verbose, "print per-epoch losses");

  auto* en = app.add_subcommand("enroll", "validate and store a feature gallery");
  en->add_option("--features", features_path, "feature CSV")->required();
  en->add_option("--out", out_dir, "gallery CSV path or directory");

  auto* se = app.add_subcommand("search", "rank gallery candidates for a probe image");
  se->add_option("--gallery", gallery_path, "gallery CSV")->required();
  se->add_option("--probe", probe_path, "probe PNG")->required();
  se->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  int top_k = 10;
  se->add_option("--top-k", top_k, "candidates to return");
  double tau = 0.5;
  auto* se_tau = se->add_option("--tau", tau, "acceptance threshold");

  auto* ev = app.add_subcommand("eval", "closed-set CMC / open-set DET evaluation");
  ev->add_option("--features", features_path, "precomputed feature CSV");
  ev->add_option("--manifest", manifest_path, "dataset manifest (with --checkpoint)");
  ev->add_option("--checkpoint", checkpoint_path, "model checkpoint");
  ev->add_option("--config", config_path, "run config file (INI)");
  ev->add_option("--out", out_dir, "report directory");
  auto* ev_seed = ev->add_option("--seed", seed, "split seed");
  std::string mode;
  auto* ev_mode = ev->add_option("--mode", mode, "closed | open");
  int splits = 0, gate_rank = 0, r_max = 0;
  double open_fraction = -1.0;
  auto* ev_splits = ev->add_option("--splits", splits, "number of splits");
  auto* ev_open = ev->add_option("--open-fraction", open_fraction,
                                 "categories withheld from enrolment");
  auto* ev_gate = ev->add_option("--gate-rank", gate_rank, "open-set candidate gate rank");
  ev->add_option("--r-max", r_max, "maximum CMC rank");

  auto* pl = app.add_subcommand("plot", "render CMC/DET CSVs to PNG charts");
  pl->add_option("--cmc", cmc_path, "cmc.csv path");
  pl->add_option("--det", det_path, "det.csv path");
  pl->add_option("--config", config_path, "run config file (INI)");
  pl->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = base_config(config_path);
    if (gen->parsed()) {
      if (!gen_seed->empty()) cfg.seed = seed;
      if (!gen_templates->empty()) cfg.synth.templates = templates;
      if (!gen_per->empty()) cfg.synth.per_template = per_template;
      if (!gen_eval->empty()) cfg.synth.eval_per_template = eval_per_template;
      if (!gen_side->empty()) cfg.synth.input_side = input_side;
      if (!gen_workers->empty()) cfg.synth.workers = workers;
      if (!template_dir.empty()) cfg.synth.template_dir = template_dir;
      if (!skin_dir.empty()) cfg.synth.skin_dir = skin_dir;
      return cmd_gen_data(cfg, out_dir);
    }
    if (tr->parsed()) {
      if (!tr_seed->empty()) cfg.seed = seed;
      if (!tr_epochs->empty()) cfg.model.epochs = epochs;
      if (!tr_batch->empty()) cfg.model.batch_size = batch_size;
      if (!tr_lr->empty()) cfg.model.lr = lr;
      if (!tr_k->empty()) cfg.model.K = k_dim;
      if (!tr_margin->empty()) cfg.model.m = margin;
      if (!tr_lambda->empty()) cfg.model.lambda = lambda;
      if (!tr_backbone->empty()) cfg.model.backbone_spec = backbone;
      if (!tr_width->empty()) cfg.model.translator_width = t_width;
      return cmd_train(cfg, manifest_path, out_dir, resume_path, verbose);
    }
    if (en->parsed()) {
      return cmd_enroll(cfg, features_path, out_dir);
    }
    if (se->parsed()) {
      return cmd_search(gallery_path, probe_path, checkpoint_path, top_k, tau,
                        !se_tau->empty());
    }
    if (ev->parsed()) {
      if (!ev_seed->empty()) cfg.seed = seed;
      if (!ev_mode->empty()) cfg.eval.mode = mode;
      if (!ev_splits->empty()) cfg.eval.splits = splits;
      if (!ev_open->empty()) cfg.eval.open_fraction = open_fraction;
      if (!ev_gate->empty()) cfg.eval.gate_rank = gate_rank;
      return cmd_eval(cfg, features_path, manifest_path, checkpoint_path, out_dir, r_max);
    }
    if (pl->parsed()) {
      return cmd_plot(cfg, cmc_path, det_path, out_dir);
    }
  } catch (const InvalidStateError& e) {
    std::fprintf(stderr, "error: invalid state: %s\n", e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: io: %s\n", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: invalid argument: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
