#include "tatret/runconfig.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

#include "tatret/common.hpp"

namespace tatret {

namespace {

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int out = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
  }
}

uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const uint64_t out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad unsigned integer for " + key + ": '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": '" + v + "'");
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("config: cannot open " + path.string());

  RunConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, std::map<std::string, Setter>> schema = {
      {"run",
       {
           {"version", [&](const std::string& k, const std::string& v) { cfg.version = to_int(k, v); }},
           {"seed", [&](const std::string& k, const std::string& v) { cfg.seed = to_u64(k, v); }},
           {"out_root", [&](const std::string&, const std::string& v) { cfg.out_root = v; }},
       }},
      {"synthgen",
       {
           {"templates", [&](const std::string& k, const std::string& v) { cfg.synth.templates = to_int(k, v); }},
           {"per_template", [&](const std::string& k, const std::string& v) { cfg.synth.per_template = to_int(k, v); }},
           {"eval_per_template", [&](const std::string& k, const std::string& v) { cfg.synth.eval_per_template = to_int(k, v); }},
           {"input_side", [&](const std::string& k, const std::string& v) { cfg.synth.input_side = to_int(k, v); }},
           {"template_side", [&](const std::string& k, const std::string& v) { cfg.synth.template_side = to_int(k, v); }},
           {"margin_frac", [&](const std::string& k, const std::string& v) { cfg.synth.margin_frac = to_double(k, v); }},
           {"scale_min", [&](const std::string& k, const std::string& v) { cfg.synth.ranges.scale_min = to_double(k, v); }},
           {"scale_max", [&](const std::string& k, const std::string& v) { cfg.synth.ranges.scale_max = to_double(k, v); }},
           {"color_min", [&](const std::string& k, const std::string& v) { cfg.synth.ranges.color_min = to_double(k, v); }},
           {"color_max", [&](const std::string& k, const std::string& v) { cfg.synth.ranges.color_max = to_double(k, v); }},
           {"blur_min", [&](const std::string& k, const std::string& v) { cfg.synth.ranges.blur_min = to_double(k, v); }},
           {"blur_max", [&](const std::string& k, const std::string& v) { cfg.synth.ranges.blur_max = to_double(k, v); }},
           {"opacity_min", [&](const std::string& k, const std::string& v) { cfg.synth.ranges.opacity_min = to_double(k, v); }},
           {"opacity_max", [&](const std::string& k, const std::string& v) { cfg.synth.ranges.opacity_max = to_double(k, v); }},
           {"skin_pools", [&](const std::string& k, const std::string& v) { cfg.synth.skin_pools = to_int(k, v); }},
           {"skin_count", [&](const std::string& k, const std::string& v) { cfg.synth.skin_count = to_int(k, v); }},
           {"base_side", [&](const std::string& k, const std::string& v) { cfg.synth.base_side = to_int(k, v); }},
           {"workers", [&](const std::string& k, const std::string& v) { cfg.synth.workers = to_int(k, v); }},
           {"template_dir", [&](const std::string&, const std::string& v) { cfg.synth.template_dir = v; }},
           {"skin_dir", [&](const std::string&, const std::string& v) { cfg.synth.skin_dir = v; }},
       }},
      {"model",
       {
           {"K", [&](const std::string& k, const std::string& v) { cfg.model.K = to_int(k, v); }},
           {"m", [&](const std::string& k, const std::string& v) { cfg.model.m = to_double(k, v); }},
           {"s", [&](const std::string& k, const std::string& v) { cfg.model.s = to_double(k, v); }},
           {"lambda", [&](const std::string& k, const std::string& v) { cfg.model.lambda = to_double(k, v); }},
           {"C", [&](const std::string& k, const std::string& v) { cfg.model.C = to_int(k, v); }},
           {"input_side", [&](const std::string& k, const std::string& v) { cfg.model.input_side = to_int(k, v); }},
           {"backbone", [&](const std::string&, const std::string& v) { cfg.model.backbone_spec = v; }},
           {"translator_width", [&](const std::string& k, const std::string& v) { cfg.model.translator_width = to_int(k, v); }},
           {"epochs", [&](const std::string& k, const std::string& v) { cfg.model.epochs = to_int(k, v); }},
           {"batch_size", [&](const std::string& k, const std::string& v) { cfg.model.batch_size = to_int(k, v); }},
           {"lr", [&](const std::string& k, const std::string& v) { cfg.model.lr = to_double(k, v); }},
           {"decay", [&](const std::string& k, const std::string& v) { cfg.model.decay = to_double(k, v); }},
           {"decay_as_weight_decay", [&](const std::string& k, const std::string& v) { cfg.model.decay_as_weight_decay = to_bool(k, v); }},
           {"printed_cycle_target", [&](const std::string& k, const std::string& v) { cfg.model.printed_cycle_target = to_bool(k, v); }},
           {"init_seed", [&](const std::string& k, const std::string& v) { cfg.model.init_seed = to_u64(k, v); }},
       }},
      {"eval",
       {
           {"splits", [&](const std::string& k, const std::string& v) { cfg.eval.splits = to_int(k, v); }},
           {"mode", [&](const std::string&, const std::string& v) { cfg.eval.mode = v; }},
           {"open_fraction", [&](const std::string& k, const std::string& v) { cfg.eval.open_fraction = to_double(k, v); }},
           {"gate_rank", [&](const std::string& k, const std::string& v) { cfg.eval.gate_rank = to_int(k, v); }},
           {"top_k", [&](const std::string& k, const std::string& v) { cfg.eval.top_k = to_int(k, v); }},
           {"tau", [&](const std::string& k, const std::string& v) { cfg.eval.tau = to_double(k, v); }},
       }},
  };

  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("config: malformed section at line " +
                                    std::to_string(line_no));
      }
      section = trim(line.substr(1, line.size() - 2));
      if (schema.find(section) == schema.end()) {
        throw std::invalid_argument("config: unknown section [" + section + "]");
      }
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw std::invalid_argument("config: key '" + key + "' outside any section");
    }
    const auto& keys = schema.at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) {
      throw std::invalid_argument("config: unknown key '" + key + "' in [" + section + "]");
    }
    it->second(section + "." + key, value);
  }
  return cfg;
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("config: cannot write " + path.string());
  char buf[128];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
  };
  out << "[run]\n";
  out << "version = " << cfg.version << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "out_root = " << cfg.out_root << '\n';
  out << "\n[synthgen]\n";
  out << "templates = " << cfg.synth.templates << '\n';
  out << "per_template = " << cfg.synth.per_template << '\n';
  out << "eval_per_template = " << cfg.synth.eval_per_template << '\n';
  out << "input_side = " << cfg.synth.input_side << '\n';
  out << "template_side = " << cfg.synth.template_side << '\n';
  out << "margin_frac = " << num(cfg.synth.margin_frac) << '\n';
  out << "scale_min = " << num(cfg.synth.ranges.scale_min) << '\n';
  out << "scale_max = " << num(cfg.synth.ranges.scale_max) << '\n';
  out << "color_min = " << num(cfg.synth.ranges.color_min) << '\n';
  out << "color_max = " << num(cfg.synth.ranges.color_max) << '\n';
  out << "blur_min = " << num(cfg.synth.ranges.blur_min) << '\n';
  out << "blur_max = " << num(cfg.synth.ranges.blur_max) << '\n';
  out << "opacity_min = " << num(cfg.synth.ranges.opacity_min) << '\n';
  out << "opacity_max = " << num(cfg.synth.ranges.opacity_max) << '\n';
  out << "skin_pools = " << cfg.synth.skin_pools << '\n';
  out << "skin_count = " << cfg.synth.skin_count << '\n';
  out << "base_side = " << cfg.synth.base_side << '\n';
  out << "workers = " << cfg.synth.workers << '\n';
  if (!cfg.synth.template_dir.empty()) out << "template_dir = " << cfg.synth.template_dir << '\n';
  if (!cfg.synth.skin_dir.empty()) out << "skin_dir = " << cfg.synth.skin_dir << '\n';
  out << "\n[model]\n";
  out << "K = " << cfg.model.K << '\n';
  out << "m = " << num(cfg.model.m) << '\n';
  out << "s = " << num(cfg.model.s) << '\n';
  out << "lambda = " << num(cfg.model.lambda) << '\n';
  out << "C = " << cfg.model.C << '\n';
  out << "input_side = " << cfg.model.input_side << '\n';
  out << "backbone = " << cfg.model.backbone_spec << '\n';
  out << "translator_width = " << cfg.model.translator_width << '\n';
  out << "epochs = " << cfg.model.epochs << '\n';
  out << "batch_size = " << cfg.model.batch_size << '\n';
  out << "lr = " << num(cfg.model.lr) << '\n';
  out << "decay = " << num(cfg.model.decay) << '\n';
  out << "decay_as_weight_decay = " << (cfg.model.decay_as_weight_decay ? "true" : "false") << '\n';
  out << "printed_cycle_target = " << (cfg.model.printed_cycle_target ? "true" : "false") << '\n';
  out << "init_seed = " << cfg.model.init_seed << '\n';
  out << "\n[eval]\n";
  out << "splits = " << cfg.eval.splits << '\n';
  out << "mode = " << cfg.eval.mode << '\n';
  out << "open_fraction = " << num(cfg.eval.open_fraction) << '\n';
  out << "gate_rank = " << cfg.eval.gate_rank << '\n';
  out << "top_k = " << cfg.eval.top_k << '\n';
  out << "tau = " << num(cfg.eval.tau) << '\n';
  if (!out) throw IoError("config: write failed for " + path.string());
}

}  // namespace tatret
