#pragma once

#include <optional>
#include <string>

#include "lasco/harness/experiments.hpp"

namespace lasco::cli {

// Effective run configuration: config-file values overridden by flags. The
// suite block drives the experiment commands; the single-run fields drive
// gen-data / pretrain / adapt / eval.
struct RunConfig {
  harness::DeskSuiteConfig suite = harness::DeskSuiteConfig::defaults();
  std::string out = "out";
  uint64_t seed = 1;

  std::string mode = "lasco";
  std::optional<double> alpha;  // fixed-alpha modes only
  std::string data_dir;
  std::string lam_ckpt, ref_ckpt, pxy_ckpt;
  int env_id = 0;
  int envs_first = 0, envs_last = 0;  // gen-data range
  std::optional<int> n_samples;
  std::optional<int64_t> train_count;
  std::optional<int64_t> codeword_len;

  double effective_alpha() const { return alpha.value_or(0.7); }
  void validate_mode_alpha() const;
};

// Loads a JSON config file; unknown keys are rejected with the offending key
// named. Missing file -> ConfigError.
void apply_config_file(RunConfig& cfg, const std::string& path);

// Serialized effective config (written as resolved-config.json).
std::string resolved_config_json(const RunConfig& cfg);

// exit codes: 0 ok, 2 config error, 3 missing prerequisite, 4 numerical
int run_cli(int argc, const char* const* argv);

}  // namespace lasco::cli
