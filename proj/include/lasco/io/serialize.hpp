#pragma once

#include <json.hpp>

#include "lasco/chansim/types.hpp"
#include "lasco/models/recon_net.hpp"

// nlohmann ADL hooks for the persisted domain types.

namespace lasco::chansim {

inline void to_json(nlohmann::json& j, const ArrayConfig& a) {
  j = {{"n_tx", a.n_tx},
       {"n_sc", a.n_sc},
       {"carrier_freq_hz", a.carrier_freq_hz},
       {"bandwidth_hz", a.bandwidth_hz},
       {"spacing_over_lambda", a.spacing_over_lambda}};
}

inline void from_json(const nlohmann::json& j, ArrayConfig& a) {
  j.at("n_tx").get_to(a.n_tx);
  j.at("n_sc").get_to(a.n_sc);
  j.at("carrier_freq_hz").get_to(a.carrier_freq_hz);
  j.at("bandwidth_hz").get_to(a.bandwidth_hz);
  j.at("spacing_over_lambda").get_to(a.spacing_over_lambda);
}

inline void to_json(nlohmann::json& j, const EnvironmentSpec& e) {
  j = {{"env_id", e.env_id},
       {"center_x_m", e.center_x_m},
       {"center_y_m", e.center_y_m},
       {"radius_m", e.radius_m},
       {"is_los", e.is_los},
       {"n_clusters", e.n_clusters},
       {"n_subpaths", e.n_subpaths},
       {"mean_aod_rad", e.mean_aod_rad},
       {"angle_spread_rad", e.angle_spread_rad},
       {"cluster_delay_s", e.cluster_delay_s},
       {"cluster_power", e.cluster_power},
       {"rician_k", e.rician_k},
       {"los_aod_rad", e.los_aod_rad},
       {"seed", e.seed}};
}

inline void from_json(const nlohmann::json& j, EnvironmentSpec& e) {
  j.at("env_id").get_to(e.env_id);
  j.at("center_x_m").get_to(e.center_x_m);
  j.at("center_y_m").get_to(e.center_y_m);
  j.at("radius_m").get_to(e.radius_m);
  j.at("is_los").get_to(e.is_los);
  j.at("n_clusters").get_to(e.n_clusters);
  j.at("n_subpaths").get_to(e.n_subpaths);
  j.at("mean_aod_rad").get_to(e.mean_aod_rad);
  j.at("angle_spread_rad").get_to(e.angle_spread_rad);
  j.at("cluster_delay_s").get_to(e.cluster_delay_s);
  j.at("cluster_power").get_to(e.cluster_power);
  j.at("rician_k").get_to(e.rician_k);
  j.at("los_aod_rad").get_to(e.los_aod_rad);
  j.at("seed").get_to(e.seed);
}

}  // namespace lasco::chansim

namespace lasco::models {

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"depth", c.depth},
       {"d_model", c.d_model},
       {"d_ff", c.d_ff},
       {"n_heads", c.n_heads},
       {"norm", c.norm == NormPlacement::kPre ? "pre" : "post"},
       {"input_dim", c.input_dim},
       {"seq_len", c.seq_len}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  j.at("depth").get_to(c.depth);
  j.at("d_model").get_to(c.d_model);
  j.at("d_ff").get_to(c.d_ff);
  j.at("n_heads").get_to(c.n_heads);
  const std::string norm = j.at("norm").get<std::string>();
  LASCO_CHECK(norm == "pre" || norm == "post", "bad norm placement: " + norm);
  c.norm = norm == "pre" ? NormPlacement::kPre : NormPlacement::kPost;
  j.at("input_dim").get_to(c.input_dim);
  j.at("seq_len").get_to(c.seq_len);
}

}  // namespace lasco::models
