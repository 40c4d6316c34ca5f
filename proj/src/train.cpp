#include "tatret/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "tatret/common.hpp"

namespace tatret {

Tensor images_to_tensor(const std::vector<const Image*>& images) {
  if (images.empty()) {
    throw std::invalid_argument("images_to_tensor: empty batch");
  }
  const Image& first = *images[0];
  Tensor t(static_cast<int>(images.size()), first.channels(), first.height(), first.width());
  for (size_t i = 0; i < images.size(); ++i) {
    const Image& img = *images[i];
    if (img.height() != first.height() || img.width() != first.width() ||
        img.channels() != first.channels()) {
      throw std::invalid_argument("images_to_tensor: inconsistent image shapes");
    }
    float* dst = t.sample(static_cast<int>(i));
    const size_t plane = static_cast<size_t>(t.h) * t.w;
    for (int r = 0; r < img.height(); ++r) {
      for (int c = 0; c < img.width(); ++c) {
        for (int ch = 0; ch < img.channels(); ++ch) {
          dst[ch * plane + r * t.w + c] = img.at(r, c, ch);
        }
      }
    }
  }
  return t;
}

Tensor image_to_tensor(const Image& image) { return images_to_tensor({&image}); }

namespace {

Image load_sized(const std::filesystem::path& path, int side, int channels) {
  Image img = read_png(path);
  if (channels == 3 && img.channels() == 1) img = replicate_channels(img, 3);
  if (channels == 1 && img.channels() == 3) img = to_grayscale(img);
  if (img.height() != side || img.width() != side) {
    img = resize_bilinear(img, side, side);
  }
  return img;
}

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<TrainHistoryRow>& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("train: cannot write " + path.string());
  out << "epoch,L_I_arc,L_T_arc,L_rec,total\n";
  char buf[192];
  for (const TrainHistoryRow& row : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g\n", row.epoch, row.l_i_arc,
                  row.l_t_arc, row.l_rec, row.total);
    out << buf;
  }
}

}  // namespace

TrainResult train(const DatasetManifest& manifest, const std::filesystem::path& manifest_dir,
                  const ModelConfig& config, const std::filesystem::path& out_dir,
                  const TrainOptions& options) {
  config.validate();
  if (manifest.num_categories != config.C) {
    throw std::invalid_argument("train: manifest has " +
                                std::to_string(manifest.num_categories) +
                                " categories but config.C = " + std::to_string(config.C));
  }
  if (manifest.entries.empty()) {
    throw std::invalid_argument("train: empty manifest");
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  const int side = config.input_side;
  const size_t n = manifest.entries.size();
  std::vector<Image> images(n), targets(n);
  std::vector<int> labels(n);
  for (size_t i = 0; i < n; ++i) {
    const ManifestEntry& e = manifest.entries[i];
    images[i] = load_sized(manifest_dir / e.sample_path, side, 3);
    targets[i] = load_sized(manifest_dir / e.target_path, side, 1);
    if (e.category_label < 0 || e.category_label >= config.C) {
      throw std::invalid_argument("train: manifest label out of range: " +
                                  std::to_string(e.category_label));
    }
    labels[i] = e.category_label;
  }

  std::unique_ptr<Model> model;
  std::unique_ptr<Adam> opt;
  int done_epochs = 0;
  std::vector<TrainHistoryRow> history;
  if (!options.resume_from.empty()) {
    LoadedCheckpoint loaded = load_checkpoint(options.resume_from, config);
    model = std::move(loaded.model);
    opt = std::move(loaded.opt);
    done_epochs = loaded.epoch;
    history = std::move(loaded.history);
  } else {
    ModelConfig init_config = config;
    model = std::make_unique<Model>(init_config);
  }
  if (!opt) {
    opt = std::make_unique<Adam>(config.lr, 0.9, 0.999, 1e-8,
                                 config.decay_as_weight_decay ? config.decay : 0.0);
  }

  TrainResult result;
  result.history_csv = out_dir / "loss_history.csv";
  result.final_checkpoint = out_dir / "model_final.ckpt";

  std::vector<size_t> order(n);
  for (int epoch = done_epochs + 1; epoch <= config.epochs; ++epoch) {
    const double lr = config.decay_as_weight_decay
                          ? config.lr
                          : config.lr * std::pow(config.decay, epoch - 1);
    opt->set_lr(lr);

    std::iota(order.begin(), order.end(), size_t{0});
    Rng shuffle_rng(mix64(mix64(options.seed, 0xE90Cull), static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    TrainHistoryRow row;
    row.epoch = epoch;
    size_t seen = 0;
    for (size_t start = 0; start < n; start += config.batch_size) {
      const size_t count = std::min<size_t>(config.batch_size, n - start);
      Batch batch;
      std::vector<const Image*> batch_images, batch_targets;
      std::vector<Image> jittered(count);
      batch_images.reserve(count);
      batch_targets.reserve(count);
      batch.labels.reserve(count);
      for (size_t b = 0; b < count; ++b) {
        const size_t idx = order[start + b];
        Rng jitter_rng(mix64(mix64(options.seed, 0x1177ull),
                             mix64(static_cast<uint64_t>(epoch), static_cast<uint64_t>(idx))));
        jittered[b] = apply_color_jitter(images[idx], options.jitter, jitter_rng);
        batch_images.push_back(&jittered[b]);
        batch_targets.push_back(&targets[idx]);
        batch.labels.push_back(labels[idx]);
      }
      batch.images = images_to_tensor(batch_images);
      batch.templates = images_to_tensor(batch_targets);

      LossParts parts;
      try {
        parts = model->train_step(batch, *opt);
      } catch (const InvalidStateError&) {
        save_checkpoint(out_dir / "checkpoint_abort.ckpt", *model, opt.get(), epoch - 1,
                        history);
        throw;
      }
      row.l_i_arc += parts.l_i_arc * count;
      row.l_t_arc += parts.l_t_arc * count;
      row.l_rec += parts.l_rec * count;
      row.total += parts.total * count;
      seen += count;
    }
    row.l_i_arc /= seen;
    row.l_t_arc /= seen;
    row.l_rec /= seen;
    row.total /= seen;
    history.push_back(row);
    write_history_csv(result.history_csv, history);

    if (options.verbose) {
      std::printf("epoch %d/%d lr %.3g  L_I %.4f  L_T %.4f  L_rec %.4f  total %.4f\n",
                  epoch, config.epochs, lr, row.l_i_arc, row.l_t_arc, row.l_rec, row.total);
      std::fflush(stdout);
    }
    if (options.checkpoint_every > 0 && epoch % options.checkpoint_every == 0 &&
        epoch != config.epochs) {
      char name[64];
      std::snprintf(name, sizeof(name), "checkpoint_epoch_%04d.ckpt", epoch);
      save_checkpoint(out_dir / name, *model, opt.get(), epoch, history);
    }
  }

  save_checkpoint(result.final_checkpoint, *model, opt.get(),
                  std::max(done_epochs, config.epochs), history);
  result.history = std::move(history);
  return result;
}

}  // namespace tatret
