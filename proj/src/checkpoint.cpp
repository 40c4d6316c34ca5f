#include "tatret/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "tatret/common.hpp"

namespace tatret {

namespace {

constexpr char kMagic[8] = {'T', 'A', 'T', 'R', 'C', 'K', 'P', '1'};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_string(std::ostream& out, const std::string& s) {
  put<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_floats(std::ostream& out, const std::vector<float>& v) {
  put<uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("checkpoint: truncated file");
  return v;
}

std::string get_string(std::istream& in) {
  const uint32_t len = get<uint32_t>(in);
  if (len > (1u << 20)) throw IoError("checkpoint: implausible string length");
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw IoError("checkpoint: truncated file");
  return s;
}

std::vector<float> get_floats(std::istream& in, uint64_t expected_size) {
  const uint64_t size = get<uint64_t>(in);
  if (expected_size != 0 && size != expected_size) {
    throw IoError("checkpoint: tensor size mismatch");
  }
  std::vector<float> v(size);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(size * sizeof(float)));
  if (!in) throw IoError("checkpoint: truncated file");
  return v;
}

void put_config(std::ostream& out, const ModelConfig& c) {
  put<int32_t>(out, c.K);
  put<double>(out, c.m);
  put<double>(out, c.s);
  put<double>(out, c.lambda);
  put<int32_t>(out, c.C);
  put<int32_t>(out, c.input_side);
  put_string(out, c.backbone_spec);
  put<int32_t>(out, c.translator_width);
  put<int32_t>(out, c.epochs);
  put<int32_t>(out, c.batch_size);
  put<double>(out, c.lr);
  put<double>(out, c.decay);
  put<uint8_t>(out, c.decay_as_weight_decay ? 1 : 0);
  put<uint8_t>(out, c.printed_cycle_target ? 1 : 0);
  put<uint64_t>(out, c.init_seed);
}

ModelConfig get_config(std::istream& in) {
  ModelConfig c;
  c.K = get<int32_t>(in);
  c.m = get<double>(in);
  c.s = get<double>(in);
  c.lambda = get<double>(in);
  c.C = get<int32_t>(in);
  c.input_side = get<int32_t>(in);
  c.backbone_spec = get_string(in);
  c.translator_width = get<int32_t>(in);
  c.epochs = get<int32_t>(in);
  c.batch_size = get<int32_t>(in);
  c.lr = get<double>(in);
  c.decay = get<double>(in);
  c.decay_as_weight_decay = get<uint8_t>(in) != 0;
  c.printed_cycle_target = get<uint8_t>(in) != 0;
  c.init_seed = get<uint64_t>(in);
  return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Model& model, Adam* opt,
                     int epoch, const std::vector<TrainHistoryRow>& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_checkpoint: cannot open " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put_config(out, model.config());
  put<int32_t>(out, epoch);

  const std::vector<Param*> params = model.params();
  put<uint32_t>(out, static_cast<uint32_t>(params.size()));
  for (const Param* p : params) {
    put_string(out, p->name);
    put_floats(out, p->value);
  }

  const bool has_opt = opt != nullptr && !opt->moments1().empty();
  put<uint8_t>(out, has_opt ? 1 : 0);
  if (has_opt) {
    put<int64_t>(out, opt->steps());
    for (size_t i = 0; i < params.size(); ++i) {
      put_floats(out, opt->moments1()[i]);
      put_floats(out, opt->moments2()[i]);
    }
  }

  put<uint32_t>(out, static_cast<uint32_t>(history.size()));
  for (const TrainHistoryRow& row : history) {
    put<int32_t>(out, row.epoch);
    put<double>(out, row.l_i_arc);
    put<double>(out, row.l_t_arc);
    put<double>(out, row.l_rec);
    put<double>(out, row.total);
  }
  if (!out) throw IoError("save_checkpoint: write failed for " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_checkpoint: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("load_checkpoint: not a checkpoint file: " + path.string());
  }

  LoadedCheckpoint loaded;
  loaded.config = get_config(in);
  loaded.epoch = get<int32_t>(in);
  loaded.model = std::make_unique<Model>(loaded.config);

  const std::vector<Param*> params = loaded.model->params();
  const uint32_t count = get<uint32_t>(in);
  if (count != params.size()) {
    throw IoError("load_checkpoint: parameter count mismatch in " + path.string());
  }
  for (Param* p : params) {
    const std::string name = get_string(in);
    if (name != p->name) {
      throw IoError("load_checkpoint: parameter order mismatch: " + name + " vs " + p->name);
    }
    p->value = get_floats(in, p->value.size());
  }

  if (get<uint8_t>(in) != 0) {
    const ModelConfig& c = loaded.config;
    loaded.opt = std::make_unique<Adam>(c.lr, 0.9, 0.999, 1e-8,
                                        c.decay_as_weight_decay ? c.decay : 0.0);
    loaded.opt->restore_steps(get<int64_t>(in));
    auto& m1 = loaded.opt->moments1();
    auto& m2 = loaded.opt->moments2();
    m1.resize(params.size());
    m2.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      m1[i] = get_floats(in, params[i]->value.size());
      m2[i] = get_floats(in, params[i]->value.size());
    }
  }

  const uint32_t rows = get<uint32_t>(in);
  loaded.history.resize(rows);
  for (TrainHistoryRow& row : loaded.history) {
    row.epoch = get<int32_t>(in);
    row.l_i_arc = get<double>(in);
    row.l_t_arc = get<double>(in);
    row.l_rec = get<double>(in);
    row.total = get<double>(in);
  }
  return loaded;
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const ModelConfig& expected) {
  LoadedCheckpoint loaded = load_checkpoint(path);
  const ModelConfig& c = loaded.config;
  if (c.K != expected.K || c.C != expected.C || c.input_side != expected.input_side) {
    throw InvalidStateError(
        "load_checkpoint: config mismatch (stored K=" + std::to_string(c.K) +
        " C=" + std::to_string(c.C) + " side=" + std::to_string(c.input_side) +
        ", expected K=" + std::to_string(expected.K) + " C=" + std::to_string(expected.C) +
        " side=" + std::to_string(expected.input_side) + ")");
  }
  return loaded;
}

}  // namespace tatret
