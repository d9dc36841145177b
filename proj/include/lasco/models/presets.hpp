#pragma once

#include <string>

#include "lasco/chansim/types.hpp"
#include "lasco/models/recon_net.hpp"

namespace lasco::models {

enum class Preset { kDesk, kPaper };

Preset preset_from_name(const std::string& s);
const char* preset_name(Preset p);

// Deep pre-norm network (the channel knowledge base).
// paper: 20 blocks, d_model 512, d_ff 2048, 8 heads
// desk:   6 blocks, d_model 128, d_ff  512, 4 heads
ModelConfig lam_config(const chansim::ArrayConfig& arr, Preset preset);

// Shallow post-norm network (the environment plugin).
// paper: 2 blocks, d_model 64, d_ff 256, 4 heads
// desk:  2 blocks, d_model 32, d_ff 128, 2 heads
ModelConfig sam_config(const chansim::ArrayConfig& arr, Preset preset);

// SAM geometry for the size sweep: d_ff = 4*d_model, 2 heads.
ModelConfig sam_config_for_dmodel(const chansim::ArrayConfig& arr, int d_model);

template <typename T = float>
ReconNet<T> build_lam(const chansim::ArrayConfig& arr, Preset preset,
                      uint64_t init_seed) {
  ReconNet<T> net(lam_config(arr, preset), init_seed);
  net.role = ModelRole::kBase;
  return net;
}

template <typename T = float>
ReconNet<T> build_sam(const chansim::ArrayConfig& arr, Preset preset,
                      uint64_t init_seed) {
  ReconNet<T> net(sam_config(arr, preset), init_seed);
  net.role = ModelRole::kReference;
  return net;
}

}  // namespace lasco::models
