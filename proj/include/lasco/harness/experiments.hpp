#pragma once

#include <map>
#include <memory>

#include "lasco/harness/harness.hpp"

namespace lasco::harness {

// Desk-scale experiment grid: 8x8 array, 16 pre-training environments,
// 4 adaptation environments, 2000 samples each, LAM 6x128 / SAM 2x32,
// codeword lengths {16, 32}, 3 run seeds.
struct DeskSuiteConfig {
  chansim::ArrayConfig arr = chansim::ArrayConfig::desk();
  std::vector<int> pretrain_envs;  // default 1..16
  std::vector<int> adapt_envs;     // default 101..104
  int samples_per_env = 2000;
  double cell_radius_m = 200.0;
  uint64_t data_seed = 20260809;
  std::vector<int64_t> codeword_lens = {16, 32};
  std::vector<uint64_t> seeds = {1, 2, 3};
  std::vector<double> alpha_grid = {0.1, 0.3, 0.5, 0.7, 0.9, 1.2, 1.5, 2.0};
  std::vector<int64_t> sample_counts = {200, 800, 1600};
  std::vector<int> sam_dmodels = {16, 32, 64};
  int64_t sweep_codeword_len = 32;  // M used by fig6/fig7/fig9
  int pretrain_epochs = 30;
  int adapt_max_epochs = 100;
  int patience = 20;
  int batch_size = 256;
  int jobs = 1;
  models::Preset preset = models::Preset::kDesk;

  static DeskSuiteConfig defaults();
  void validate() const;
};

// One adaptation (or evaluation-only) run with its grid coordinates.
struct RunRow {
  std::string experiment;  // fig5 / fig6 / fig7 / fig9
  std::string mode;        // cli mode name
  int env_id = 0;
  int64_t codeword_len = 0;
  uint64_t seed = 0;
  double alpha = 1.0;   // fixed alpha used (fig6 grid point or tuned value)
  int64_t count = -1;   // fig7 training-sample count
  int dmodel = 0;       // fig9 SAM width (0: preset default)
  AdaptReport rep;
};

struct SuiteTables {
  std::vector<RunRow> rows;
  std::map<int64_t, double> alpha_star;  // per codeword len
  // pseudo-inverse baseline NMSE per (env, M, seed)
  std::map<std::tuple<int, int64_t, uint64_t>, double> pinv_val;
  std::map<std::tuple<int, int64_t, uint64_t>, double> pinv_test;
  // informational: pre-training val NMSE per (M, seed, model name)
  std::map<std::string, double> pretrain_val;
};

class SuiteRunner {
 public:
  SuiteRunner(DeskSuiteConfig cfg, std::string work_dir,
              std::function<void(const std::string&)> log = {});
  ~SuiteRunner();

  void ensure_datasets();
  void ensure_pretrained();
  void run_alpha_sweep();       // fig6 grid (feeds the tuned-alpha runs)
  void run_mode_comparison();   // fig5
  void run_sample_efficiency(); // fig7
  void run_size_sweep();        // fig9
  void write_convergence_cdf(); // fig8
  void run_all();

  const SuiteTables& tables() const { return tables_; }
  const DeskSuiteConfig& config() const { return cfg_; }
  const std::string& work_dir() const { return work_dir_; }

  double tuned_alpha(int64_t codeword_len);

  // Recomputes one grid run (writing its cache entry); determinism probe.
  void rerun_single(int env_id, int64_t m, uint64_t seed, double alpha);

 private:
  struct Pretrained {
    std::shared_ptr<models::ReconNetF> lam;
    std::map<int, std::shared_ptr<models::ReconNetF>> sams;  // by d_model
  };

  const chansim::Dataset& dataset(int env_id);
  const feedback::ProjectionCodec& codec(int64_t m, uint64_t seed);
  Pretrained& pretrained(int64_t m, uint64_t seed);
  const EnvTokens& env_tokens(int env_id, int64_t m, uint64_t seed);
  const FrozenOutputs& frozen(int env_id, int64_t m, uint64_t seed, int dmodel);

  // Runs (or loads from the run cache) one adaptation and records it.
  const AdaptReport& run_adapt(const std::string& experiment,
                               const std::string& mode_label, RunRow row);
  void record_eval_only(const std::string& experiment, const std::string& mode,
                        int64_t m, uint64_t seed);
  void run_batch(std::vector<std::function<void()>> tasks);
  void write_summary(const std::string& experiment);
  void log(const std::string& s);

  DeskSuiteConfig cfg_;
  std::string work_dir_;
  std::function<void(const std::string&)> log_;
  SuiteTables tables_;
  std::map<std::string, bool> done_;  // stages already run

  std::map<int, chansim::Dataset> datasets_;
  std::map<std::pair<int64_t, uint64_t>, feedback::ProjectionCodec> codecs_;
  std::map<std::pair<int64_t, uint64_t>, Pretrained> pretrained_;
  std::map<std::tuple<int, int64_t, uint64_t>, EnvTokens> env_tokens_;
  std::map<std::tuple<int, int64_t, uint64_t, int>, FrozenOutputs> frozen_;
};

// ---- acceptance criteria over the suite tables ----

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

// ids: subset of {6..10} to evaluate; empty = all.
std::vector<CriterionResult> evaluate_trend_criteria(const SuiteTables& t,
                                                     const DeskSuiteConfig& cfg,
                                                     std::span<const int> ids = {});

}  // namespace lasco::harness
