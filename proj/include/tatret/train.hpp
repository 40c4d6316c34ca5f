#pragma once

#include <filesystem>

#include "tatret/checkpoint.hpp"
#include "tatret/dataset.hpp"
#include "tatret/image.hpp"

namespace tatret {

/// Pack HWC float images into one NCHW tensor. All images must share the
/// first image's dimensions.
Tensor images_to_tensor(const std::vector<const Image*>& images);
Tensor image_to_tensor(const Image& image);

struct TrainOptions {
  uint64_t seed = 0;  // drives shuffling and input jitter, not weight init
  int checkpoint_every = 10;  // epochs; 0 = final checkpoint only
  std::filesystem::path resume_from;
  ColorJitter jitter{0.2, 0.2, 0.2, 0.05};
  bool verbose = false;
};

struct TrainResult {
  std::vector<TrainHistoryRow> history;
  std::filesystem::path final_checkpoint;
  std::filesystem::path history_csv;
};

/// Mini-batch training on a generated dataset: per-epoch reshuffle and
/// fresh photometric jitter (inputs only, never template targets), both
/// drawn statelessly from (seed, epoch, index) so a resumed run replays the
/// exact schedule. Writes loss_history.csv, periodic checkpoints, and
/// model_final.ckpt under out_dir; a non-finite loss aborts after writing
/// checkpoint_abort.ckpt.
TrainResult train(const DatasetManifest& manifest, const std::filesystem::path& manifest_dir,
                  const ModelConfig& config, const std::filesystem::path& out_dir,
                  const TrainOptions& options = {});

}  // namespace tatret
