#pragma once

#include <filesystem>
#include <string>

#include "tatret/compose.hpp"
#include "tatret/model.hpp"

namespace tatret {

struct SynthSettings {
  int templates = 20;
  int per_template = 30;
  int eval_per_template = 0;  // extra held-out samples per template
  int input_side = 224;
  int template_side = 224;  // render/load resolution of template ink
  double margin_frac = 0.1;
  AugmentationRanges ranges;
  int skin_pools = 2;
  int skin_count = 8;  // bases per pool
  int base_side = 256;
  int workers = 1;
  std::string template_dir;  // load real artwork instead of glyphs
  std::string skin_dir;      // load real skin patches instead of procedural
};

struct EvalSettings {
  int splits = 5;
  std::string mode = "closed";  // closed | open
  double open_fraction = 0.3;
  int gate_rank = 1;
  int top_k = 10;
  double tau = 0.5;
};

/// Everything a run needs, serialized into every output directory so any
/// result can be regenerated from the file alone.
struct RunConfig {
  int version = 1;
  uint64_t seed = 42;
  std::string out_root = "runs";
  SynthSettings synth;
  ModelConfig model;
  EvalSettings eval;
};

/// INI-style sections [run]/[synthgen]/[model]/[eval]; '#' and ';' comments.
/// Unknown sections or keys throw std::invalid_argument; unreadable files
/// throw IoError.
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& config, const std::filesystem::path& path);

}  // namespace tatret
