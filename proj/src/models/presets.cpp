#include "lasco/models/presets.hpp"

namespace lasco::models {

Preset preset_from_name(const std::string& s) {
  if (s == "desk") return Preset::kDesk;
  if (s == "paper") return Preset::kPaper;
  throw ConfigError("unknown preset: " + s);
}

const char* preset_name(Preset p) {
  return p == Preset::kDesk ? "desk" : "paper";
}

ModelConfig lam_config(const chansim::ArrayConfig& arr, Preset preset) {
  arr.validate();
  ModelConfig c;
  c.input_dim = 2 * arr.n_tx;
  c.seq_len = arr.n_sc;
  c.norm = NormPlacement::kPre;
  if (preset == Preset::kPaper) {
    c.depth = 20;
    c.d_model = 512;
    c.d_ff = 2048;
    c.n_heads = 8;
  } else {
    c.depth = 6;
    c.d_model = 128;
    c.d_ff = 512;
    c.n_heads = 4;
  }
  return c;
}

ModelConfig sam_config(const chansim::ArrayConfig& arr, Preset preset) {
  arr.validate();
  ModelConfig c;
  c.input_dim = 2 * arr.n_tx;
  c.seq_len = arr.n_sc;
  c.norm = NormPlacement::kPost;
  c.depth = 2;
  if (preset == Preset::kPaper) {
    c.d_model = 64;
    c.d_ff = 256;
    c.n_heads = 4;
  } else {
    c.d_model = 32;
    c.d_ff = 128;
    c.n_heads = 2;
  }
  return c;
}

ModelConfig sam_config_for_dmodel(const chansim::ArrayConfig& arr, int d_model) {
  ModelConfig c = sam_config(arr, Preset::kDesk);
  c.d_model = d_model;
  c.d_ff = 4 * d_model;
  c.n_heads = 2;
  return c;
}

}  // namespace lasco::models
