#include <set>

#include "lasco/cli/cli.hpp"
#include "lasco/io/file_io.hpp"
#include "lasco/io/serialize.hpp"

namespace lasco::cli {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                    const std::string& scope) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw ConfigError("unknown config key: " + scope + key);
}

}  // namespace

void RunConfig::validate_mode_alpha() const {
  const auto v = collab::variant_from_name(mode);
  if (collab::variant_alpha_learnable(v) && alpha.has_value())
    throw ConfigError("--alpha conflicts with --mode e-lasco (alpha is learnable)");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  nlohmann::json j;
  try {
    const auto bytes = io::read_file(path);
    j = nlohmann::json::parse(
        std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const IoError& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config file parse: ") + e.what());
  }

  reject_unknown(j, {"preset", "seed", "out", "jobs", "array", "data_seed",
                     "samples_per_env", "cell_radius_m", "pretrain_envs",
                     "adapt_envs", "codeword_lens", "sweep_codeword_len",
                     "seeds", "alpha_grid", "sample_counts", "sam_dmodels",
                     "pretrain_epochs", "adapt_max_epochs", "patience",
                     "batch_size", "mode", "alpha", "data_dir", "lam_ckpt",
                     "ref_ckpt", "pxy_ckpt", "env", "codeword_len"},
                 "");
  try {
    if (j.contains("preset")) {
      cfg.suite.preset = models::preset_from_name(j["preset"].get<std::string>());
      cfg.suite.arr = cfg.suite.preset == models::Preset::kPaper
                          ? chansim::ArrayConfig::paper()
                          : chansim::ArrayConfig::desk();
      if (cfg.suite.preset == models::Preset::kPaper)
        cfg.suite.samples_per_env = 10000;
    }
    if (j.contains("array")) {
      reject_unknown(j["array"],
                     {"n_tx", "n_sc", "carrier_freq_hz", "bandwidth_hz",
                      "spacing_over_lambda"},
                     "array.");
      cfg.suite.arr = j["array"].get<chansim::ArrayConfig>();
    }
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    if (j.contains("out")) cfg.out = j["out"].get<std::string>();
    if (j.contains("jobs")) cfg.suite.jobs = j["jobs"].get<int>();
    if (j.contains("data_seed")) cfg.suite.data_seed = j["data_seed"].get<uint64_t>();
    if (j.contains("samples_per_env"))
      cfg.suite.samples_per_env = j["samples_per_env"].get<int>();
    if (j.contains("cell_radius_m"))
      cfg.suite.cell_radius_m = j["cell_radius_m"].get<double>();
    if (j.contains("pretrain_envs"))
      cfg.suite.pretrain_envs = j["pretrain_envs"].get<std::vector<int>>();
    if (j.contains("adapt_envs"))
      cfg.suite.adapt_envs = j["adapt_envs"].get<std::vector<int>>();
    if (j.contains("codeword_lens"))
      cfg.suite.codeword_lens = j["codeword_lens"].get<std::vector<int64_t>>();
    if (j.contains("sweep_codeword_len"))
      cfg.suite.sweep_codeword_len = j["sweep_codeword_len"].get<int64_t>();
    if (j.contains("seeds"))
      cfg.suite.seeds = j["seeds"].get<std::vector<uint64_t>>();
    if (j.contains("alpha_grid"))
      cfg.suite.alpha_grid = j["alpha_grid"].get<std::vector<double>>();
    if (j.contains("sample_counts"))
      cfg.suite.sample_counts = j["sample_counts"].get<std::vector<int64_t>>();
    if (j.contains("sam_dmodels"))
      cfg.suite.sam_dmodels = j["sam_dmodels"].get<std::vector<int>>();
    if (j.contains("pretrain_epochs"))
      cfg.suite.pretrain_epochs = j["pretrain_epochs"].get<int>();
    if (j.contains("adapt_max_epochs"))
      cfg.suite.adapt_max_epochs = j["adapt_max_epochs"].get<int>();
    if (j.contains("patience")) cfg.suite.patience = j["patience"].get<int>();
    if (j.contains("batch_size"))
      cfg.suite.batch_size = j["batch_size"].get<int>();
    if (j.contains("mode")) cfg.mode = j["mode"].get<std::string>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("data_dir")) cfg.data_dir = j["data_dir"].get<std::string>();
    if (j.contains("lam_ckpt")) cfg.lam_ckpt = j["lam_ckpt"].get<std::string>();
    if (j.contains("ref_ckpt")) cfg.ref_ckpt = j["ref_ckpt"].get<std::string>();
    if (j.contains("pxy_ckpt")) cfg.pxy_ckpt = j["pxy_ckpt"].get<std::string>();
    if (j.contains("env")) cfg.env_id = j["env"].get<int>();
    if (j.contains("codeword_len"))
      cfg.codeword_len = j["codeword_len"].get<int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config value: ") + e.what());
  }
}

std::string resolved_config_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["preset"] = models::preset_name(cfg.suite.preset);
  j["seed"] = cfg.seed;
  j["out"] = cfg.out;
  j["jobs"] = cfg.suite.jobs;
  j["array"] = cfg.suite.arr;
  j["data_seed"] = cfg.suite.data_seed;
  j["samples_per_env"] = cfg.suite.samples_per_env;
  j["cell_radius_m"] = cfg.suite.cell_radius_m;
  j["pretrain_envs"] = cfg.suite.pretrain_envs;
  j["adapt_envs"] = cfg.suite.adapt_envs;
  j["codeword_lens"] = cfg.suite.codeword_lens;
  j["sweep_codeword_len"] = cfg.suite.sweep_codeword_len;
  j["seeds"] = cfg.suite.seeds;
  j["alpha_grid"] = cfg.suite.alpha_grid;
  j["sample_counts"] = cfg.suite.sample_counts;
  j["sam_dmodels"] = cfg.suite.sam_dmodels;
  j["pretrain_epochs"] = cfg.suite.pretrain_epochs;
  j["adapt_max_epochs"] = cfg.suite.adapt_max_epochs;
  j["patience"] = cfg.suite.patience;
  j["batch_size"] = cfg.suite.batch_size;
  j["mode"] = cfg.mode;
  if (cfg.alpha) j["alpha"] = *cfg.alpha;
  if (!cfg.data_dir.empty()) j["data_dir"] = cfg.data_dir;
  if (!cfg.lam_ckpt.empty()) j["lam_ckpt"] = cfg.lam_ckpt;
  if (!cfg.ref_ckpt.empty()) j["ref_ckpt"] = cfg.ref_ckpt;
  if (!cfg.pxy_ckpt.empty()) j["pxy_ckpt"] = cfg.pxy_ckpt;
  if (cfg.env_id != 0) j["env"] = cfg.env_id;
  if (cfg.codeword_len) j["codeword_len"] = *cfg.codeword_len;
  return j.dump(2) + "\n";
}

}  // namespace lasco::cli
