#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lasco/chansim/chansim.hpp"
#include "lasco/collab/collab.hpp"
#include "lasco/feedback/codec.hpp"
#include "lasco/models/checkpoint.hpp"
#include "lasco/models/presets.hpp"
#include "lasco/nn/adamw.hpp"
#include "lasco/nn/schedule.hpp"

namespace lasco::harness {

// ---- early exit rule ----

struct StopScan {
  int best_epoch = 0;  // 1-based epoch with the lowest value
  int stop_epoch = 0;  // epoch after which training halts
  bool censored = false;  // patience never fired within the trace
};

// Reference scan of the patience rule over a complete trace: stop at the
// epoch where the value has not improved for `patience` consecutive epochs.
StopScan scan_trace(std::span<const double> trace, int patience);

// Incremental form used by the training loops; equivalent to scan_trace.
class EarlyStopMonitor {
 public:
  explicit EarlyStopMonitor(int patience) : patience_(patience) {}
  // Returns true when training should stop after this epoch. improved() tells
  // whether the last observation set a new best.
  bool observe(double val);
  bool improved() const { return improved_; }
  int best_epoch() const { return best_epoch_; }
  double best_value() const { return best_; }
  int epoch() const { return epoch_; }

 private:
  int patience_;
  int epoch_ = 0;
  int wait_ = 0;
  int best_epoch_ = 0;
  double best_ = 0.0;
  bool has_best_ = false;
  bool improved_ = false;
};

// ---- tokenization ----

// x: coarse reconstructions (pseudo-inverse of the codewords) as model input
// tokens, y: ground-truth tokens. Shapes [n, seq, 2*n_tx].
struct SplitTokens {
  nn::TensorF x, y;
  int64_t n = 0;
};

void realvec_to_tokens(const float* v, int n_tx, int n_sc, float* tokens);
void tokens_to_realvec(const float* tokens, int n_tx, int n_sc, float* v);

// dst = src rows selected by ids (first axis)
void gather_rows(const nn::TensorF& src, std::span<const int64_t> ids,
                 nn::TensorF& dst);

SplitTokens tokenize_split(const chansim::Dataset& ds,
                           std::span<const uint32_t> idx,
                           const feedback::ProjectionCodec& codec);

struct EnvTokens {
  SplitTokens train, val, test;
  int env_id = 0;
  int n_tx = 0, n_sc = 0;
  double pinv_val_nmse = 0.0;  // NMSE(H, H_in) on the validation split
  double pinv_test_nmse = 0.0;
};

EnvTokens tokenize_env(const chansim::Dataset& ds,
                       const feedback::ProjectionCodec& codec);

// ---- training configuration ----

struct TrainConfig {
  int batch_size = 256;
  int max_epochs = 100;
  double warmup_fraction = 0.05;
  nn::LrSchedule::Kind schedule = nn::LrSchedule::Kind::kConstant;
  double lr_init = 0.0;
  double lr_peak = 1e-3;
  double lr_final = 1e-5;
  int patience = 20;
  uint64_t seed = 1;

  void validate() const;

  static TrainConfig pretrain_defaults(int epochs, uint64_t seed);
  static TrainConfig adapt_defaults(uint64_t seed);
};

// ---- reports ----

struct AdaptReport {
  int env_id = 0;
  std::string mode;
  int64_t codeword_len = 0;
  uint64_t seed = 0;
  double alpha_init = 1.0;
  double alpha_final = 1.0;
  std::vector<double> val_trace;
  int epochs_to_converge = 0;
  int stop_epoch = 0;
  bool censored = false;
  double test_nmse = 0.0;
  double test_nmse_db = 0.0;
  double test_gcs = 0.0;
  int64_t n_train = 0;
  bool frozen_ok = true;
};

std::string adapt_report_csv(const AdaptReport& r);
std::string trace_csv(const AdaptReport& r);

struct EvalRow {
  int env_id = 0;
  double nmse = 0.0;
  double nmse_db = 0.0;
  double gcs = 0.0;
};

struct EvalReport {
  std::string mode;
  int64_t codeword_len = 0;
  std::vector<EvalRow> rows;
  double mean_nmse = 0.0;
  double mean_nmse_db = 0.0;
  double mean_gcs = 0.0;

  void finalize();  // recompute aggregates from rows
};

std::string eval_report_csv(const EvalReport& r);

// ---- pre-training (step 1) ----

struct PretrainOutcome {
  models::ReconNetF lam;
  models::ReconNetF sam;
  std::vector<double> lam_val_trace, sam_val_trace;
  int lam_best_epoch = 0, sam_best_epoch = 0;
  double baseline_val_nmse = 0.0;  // pseudo-inverse NMSE on the val split
};

// Trains the base LAM and reference SAM side by side on the same batch
// stream with a warmup-cosine schedule; keeps each model's best-val weights.
PretrainOutcome pretrain(const models::ModelConfig& lam_cfg,
                         const models::ModelConfig& sam_cfg,
                         const chansim::Dataset& mixed,
                         const feedback::ProjectionCodec& codec,
                         const TrainConfig& cfg,
                         const std::function<void(const std::string&)>& log = {});

// General form: any number of models share the batch stream. The model name
// seeds its init, so a model trains to the same weights whether or not other
// models ride along.
struct PretrainSpec {
  models::ModelConfig cfg;
  std::string name;  // "lam", "sam", "sam_d16", ...
};

struct PretrainMultiOutcome {
  std::vector<models::ReconNetF> nets;
  std::vector<std::vector<double>> val_traces;
  std::vector<int> best_epochs;
  double baseline_val_nmse = 0.0;
};

PretrainMultiOutcome pretrain_multi(
    std::span<const PretrainSpec> specs, const chansim::Dataset& mixed,
    const feedback::ProjectionCodec& codec, const TrainConfig& cfg,
    const std::function<void(const std::string&)>& log = {});

// ---- environment adaptation (step 2) ----

struct FrozenOutputs {
  nn::TensorF base_train, base_val, base_test;
  nn::TensorF ref_train, ref_val, ref_test;
  bool has_base = false, has_ref = false;
};

// Frozen-model forwards are constant across adaptation epochs, so they are
// computed once per environment and shared by every run on it.
FrozenOutputs compute_frozen_outputs(const models::ReconNetF* base,
                                     const models::ReconNetF* ref,
                                     const EnvTokens& env, int batch_size);

struct AdaptTask {
  collab::ModeSpec mode;
  int env_id = 0;
  int64_t codeword_len = 0;
  uint64_t seed = 1;
  int64_t train_count = -1;  // -1: full train split
  TrainConfig train;
};

struct AdaptOutcome {
  AdaptReport report;
  models::ReconNetF proxy;
};

AdaptOutcome adapt(const AdaptTask& task, const EnvTokens& env,
                   const models::ReconNetF* base, const models::ReconNetF* ref,
                   const FrozenOutputs* frozen = nullptr);

// ---- evaluation ----

using ReconFn = std::function<nn::TensorF(const nn::TensorF&)>;

EvalRow evaluate_fn(const ReconFn& recon, const SplitTokens& split, int n_tx,
                    int env_id, int batch_size);

EvalRow evaluate_mode(const collab::ModeSpec& mode,
                      const models::ReconNetF* base,
                      const models::ReconNetF* proxy,
                      const models::ReconNetF* ref, double alpha,
                      const SplitTokens& split, int n_tx, int env_id,
                      int batch_size);

// forward in batches (frozen network)
nn::TensorF batched_forward(const models::ReconNetF& net, const nn::TensorF& x,
                            int batch_size);

}  // namespace lasco::harness
