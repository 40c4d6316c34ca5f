#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "tatret/model.hpp"

namespace tatret {

struct TrainHistoryRow {
  int epoch = 0;
  double l_i_arc = 0.0;
  double l_t_arc = 0.0;
  double l_rec = 0.0;
  double total = 0.0;
};

/// Versioned binary snapshot: config, parameters, optional optimizer
/// moments, completed-epoch counter, per-epoch loss history.
void save_checkpoint(const std::filesystem::path& path, Model& model, Adam* opt,
                     int epoch, const std::vector<TrainHistoryRow>& history);

struct LoadedCheckpoint {
  ModelConfig config;
  std::unique_ptr<Model> model;
  std::unique_ptr<Adam> opt;  // null when the file carries no optimizer state
  int epoch = 0;
  std::vector<TrainHistoryRow> history;
};

/// Throws IoError on unreadable/corrupt files.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// As above, but refuses (InvalidStateError) when the stored K, C or
/// input_side differ from `expected`.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const ModelConfig& expected);

}  // namespace tatret
