#include "lasco/harness/experiments.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <thread>

#include "lasco/io/file_io.hpp"
#include "lasco/io/serialize.hpp"
#include "lasco/kernels/dispatch.hpp"

namespace fs = std::filesystem;

namespace lasco::harness {

namespace {

std::string fd(double x) { return io::format_double(x); }

nlohmann::json report_to_json(const AdaptReport& r) {
  return {{"env_id", r.env_id},
          {"mode", r.mode},
          {"codeword_len", r.codeword_len},
          {"seed", r.seed},
          {"alpha_init", r.alpha_init},
          {"alpha_final", r.alpha_final},
          {"val_trace", r.val_trace},
          {"epochs_to_converge", r.epochs_to_converge},
          {"stop_epoch", r.stop_epoch},
          {"censored", r.censored},
          {"test_nmse", r.test_nmse},
          {"test_nmse_db", r.test_nmse_db},
          {"test_gcs", r.test_gcs},
          {"n_train", r.n_train},
          {"frozen_ok", r.frozen_ok}};
}

AdaptReport report_from_json(const nlohmann::json& j) {
  AdaptReport r;
  j.at("env_id").get_to(r.env_id);
  j.at("mode").get_to(r.mode);
  j.at("codeword_len").get_to(r.codeword_len);
  j.at("seed").get_to(r.seed);
  j.at("alpha_init").get_to(r.alpha_init);
  j.at("alpha_final").get_to(r.alpha_final);
  j.at("val_trace").get_to(r.val_trace);
  j.at("epochs_to_converge").get_to(r.epochs_to_converge);
  j.at("stop_epoch").get_to(r.stop_epoch);
  j.at("censored").get_to(r.censored);
  j.at("test_nmse").get_to(r.test_nmse);
  j.at("test_nmse_db").get_to(r.test_nmse_db);
  j.at("test_gcs").get_to(r.test_gcs);
  j.at("n_train").get_to(r.n_train);
  j.at("frozen_ok").get_to(r.frozen_ok);
  return r;
}

}  // namespace

DeskSuiteConfig DeskSuiteConfig::defaults() {
  DeskSuiteConfig c;
  for (int i = 1; i <= 16; ++i) c.pretrain_envs.push_back(i);
  for (int i = 101; i <= 104; ++i) c.adapt_envs.push_back(i);
  return c;
}

void DeskSuiteConfig::validate() const {
  arr.validate();
  LASCO_CHECK(pretrain_envs.size() >= 2, "need at least 2 pre-training envs");
  LASCO_CHECK(!adapt_envs.empty(), "need at least 1 adaptation env");
  LASCO_CHECK(samples_per_env >= 10, "samples_per_env below split minimum");
  LASCO_CHECK(!codeword_lens.empty() && !seeds.empty(), "empty grid");
  LASCO_CHECK(pretrain_epochs >= 1 && adapt_max_epochs >= 1, "bad epoch counts");
  LASCO_CHECK(jobs >= 1, "jobs must be >= 1");
  for (int64_t m : codeword_lens)
    LASCO_CHECK(m >= 1 && m <= arr.real_dim(), "codeword length out of range");
}

SuiteRunner::SuiteRunner(DeskSuiteConfig cfg, std::string work_dir,
                         std::function<void(const std::string&)> log)
    : cfg_(std::move(cfg)), work_dir_(std::move(work_dir)), log_(std::move(log)) {
  cfg_.validate();
  io::ensure_dir(work_dir_);
}

SuiteRunner::~SuiteRunner() = default;

void SuiteRunner::log(const std::string& s) {
  if (log_) log_(s);
}

const chansim::Dataset& SuiteRunner::dataset(int env_id) {
  auto it = datasets_.find(env_id);
  if (it != datasets_.end()) return it->second;
  const std::string path =
      work_dir_ + "/datasets/env_" + std::to_string(env_id) + ".lds";
  if (io::file_exists(path)) {
    log("loading dataset env " + std::to_string(env_id));
    auto ds = chansim::load_dataset(path);
    LASCO_CHECK(ds.arr == cfg_.arr && static_cast<int>(ds.samples.size()) ==
                                          cfg_.samples_per_env,
                "cached dataset does not match suite config: " + path);
    return datasets_.emplace(env_id, std::move(ds)).first->second;
  }
  log("generating dataset env " + std::to_string(env_id));
  const auto env = chansim::sample_environment(env_id, cfg_.cell_radius_m,
                                               cfg_.data_seed, cfg_.arr);
  auto ds = chansim::generate_dataset(env, cfg_.samples_per_env, cfg_.arr);
  chansim::save_dataset(ds, path);
  return datasets_.emplace(env_id, std::move(ds)).first->second;
}

const feedback::ProjectionCodec& SuiteRunner::codec(int64_t m, uint64_t seed) {
  const auto key = std::make_pair(m, seed);
  auto it = codecs_.find(key);
  if (it != codecs_.end()) return it->second;
  auto c = feedback::ProjectionCodec::build(
      m, cfg_.arr.real_dim(),
      nn::derive_seed(seed, "codec", static_cast<uint64_t>(m)));
  return codecs_.emplace(key, std::move(c)).first->second;
}

SuiteRunner::Pretrained& SuiteRunner::pretrained(int64_t m, uint64_t seed) {
  const auto key = std::make_pair(m, seed);
  auto it = pretrained_.find(key);
  if (it != pretrained_.end()) return it->second;

  const int default_d = models::sam_config(cfg_.arr, cfg_.preset).d_model;
  std::vector<int> dmodels{default_d};
  if (m == cfg_.sweep_codeword_len)
    for (int d : cfg_.sam_dmodels)
      if (d != default_d) dmodels.push_back(d);

  const std::string dir = work_dir_ + "/checkpoints/m" + std::to_string(m) +
                          "_s" + std::to_string(seed) + "_e" +
                          std::to_string(cfg_.pretrain_epochs);
  const auto sam_name = [&](int d) {
    return d == default_d ? std::string("sam")
                          : "sam_d" + std::to_string(d);
  };
  const auto ckpt_path = [&](const std::string& name) {
    return dir + "/" + name + ".ckpt";
  };

  const auto& cdc = codec(m, seed);
  Pretrained entry;

  std::vector<PretrainSpec> missing;
  if (!io::file_exists(ckpt_path("lam")))
    missing.push_back({models::lam_config(cfg_.arr, cfg_.preset), "lam"});
  for (int d : dmodels)
    if (!io::file_exists(ckpt_path(sam_name(d))))
      missing.push_back({d == default_d
                             ? models::sam_config(cfg_.arr, cfg_.preset)
                             : models::sam_config_for_dmodel(cfg_.arr, d),
                         sam_name(d)});

  if (!missing.empty()) {
    // the mixed pool is shared across run seeds
    std::vector<chansim::Dataset> parts;
    for (int e : cfg_.pretrain_envs) parts.push_back(dataset(e));
    const auto mixed =
        chansim::mix_datasets(parts, nn::derive_seed(cfg_.data_seed, "mix"));

    TrainConfig tc = TrainConfig::pretrain_defaults(cfg_.pretrain_epochs, seed);
    tc.batch_size = cfg_.batch_size;
    log("pre-training m=" + std::to_string(m) + " seed=" +
        std::to_string(seed) + " models=" + std::to_string(missing.size()));
    auto outcome = pretrain_multi(missing, mixed, cdc, tc, [&](const std::string& s) {
      log("  " + s);
    });

    nlohmann::json traces;
    for (size_t i = 0; i < missing.size(); ++i) {
      models::CheckpointMeta meta;
      meta.codec = cdc.key();
      meta.role = missing[i].name == "lam" ? "base" : "reference";
      meta.train_seed = seed;
      meta.epochs = cfg_.pretrain_epochs;
      meta.dataset_ids = cfg_.pretrain_envs;
      models::save_checkpoint(outcome.nets[i], meta, ckpt_path(missing[i].name));
      traces[missing[i].name] = {{"val_trace", outcome.val_traces[i]},
                                 {"best_epoch", outcome.best_epochs[i]}};
    }
    traces["pinv_val_nmse"] = outcome.baseline_val_nmse;
    io::write_file_atomic(dir + "/pretrain.json", traces.dump(2) + "\n");
  }

  {
    auto loaded = models::load_checkpoint(ckpt_path("lam"), std::nullopt, cdc.key());
    entry.lam = std::make_shared<models::ReconNetF>(std::move(loaded.net));
    entry.lam->role = models::ModelRole::kBase;
    entry.lam->freeze();
  }
  for (int d : dmodels) {
    auto loaded =
        models::load_checkpoint(ckpt_path(sam_name(d)), std::nullopt, cdc.key());
    auto net = std::make_shared<models::ReconNetF>(std::move(loaded.net));
    net->role = models::ModelRole::kReference;
    net->freeze();
    entry.sams[d] = std::move(net);
  }

  if (io::file_exists(dir + "/pretrain.json")) {
    const auto bytes = io::read_file(dir + "/pretrain.json");
    const auto j = nlohmann::json::parse(std::string(
        reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    for (auto& [name, val] : j.items()) {
      if (name == "pinv_val_nmse") continue;
      const auto& trace = val.at("val_trace");
      double best = 1e300;
      for (double v : trace) best = std::min(best, v);
      tables_.pretrain_val["m" + std::to_string(m) + "_s" +
                           std::to_string(seed) + "_" + name] = best;
    }
  }
  return pretrained_.emplace(key, std::move(entry)).first->second;
}

const EnvTokens& SuiteRunner::env_tokens(int env_id, int64_t m, uint64_t seed) {
  const auto key = std::make_tuple(env_id, m, seed);
  auto it = env_tokens_.find(key);
  if (it != env_tokens_.end()) return it->second;
  auto tok = tokenize_env(dataset(env_id), codec(m, seed));
  tables_.pinv_val[key] = tok.pinv_val_nmse;
  tables_.pinv_test[key] = tok.pinv_test_nmse;
  return env_tokens_.emplace(key, std::move(tok)).first->second;
}

const FrozenOutputs& SuiteRunner::frozen(int env_id, int64_t m, uint64_t seed,
                                         int dmodel) {
  const auto key = std::make_tuple(env_id, m, seed, dmodel);
  auto it = frozen_.find(key);
  if (it != frozen_.end()) return it->second;
  auto& pre = pretrained(m, seed);
  const auto& env = env_tokens(env_id, m, seed);
  auto f = compute_frozen_outputs(pre.lam.get(), pre.sams.at(dmodel).get(), env,
                                  cfg_.batch_size);
  return frozen_.emplace(key, std::move(f)).first->second;
}

const AdaptReport& SuiteRunner::run_adapt(const std::string& experiment,
                                          const std::string& mode_label,
                                          RunRow row) {
  const int default_d = models::sam_config(cfg_.arr, cfg_.preset).d_model;
  const int dmodel = row.dmodel == 0 ? default_d : row.dmodel;
  const int64_t full_train =
      static_cast<int64_t>(cfg_.samples_per_env) -
      2 * (static_cast<int64_t>(cfg_.samples_per_env) / 10);
  int64_t count = row.count;
  if (count == full_train) count = -1;  // full split: no truncation

  std::string key = row.mode + "_env" + std::to_string(row.env_id) + "_m" +
                    std::to_string(row.codeword_len) + "_s" +
                    std::to_string(row.seed) + "_a" + fd(row.alpha);
  if (count >= 0) key += "_n" + std::to_string(count);
  if (dmodel != default_d) key += "_d" + std::to_string(dmodel);

  const std::string cache_path = work_dir_ + "/runs/" + key + ".json";
  AdaptReport rep;
  if (io::file_exists(cache_path)) {
    const auto bytes = io::read_file(cache_path);
    rep = report_from_json(nlohmann::json::parse(
        std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size())));
  } else {
    const auto variant = collab::variant_from_name(row.mode);
    auto& pre = pretrained(row.codeword_len, row.seed);
    const auto& env = env_tokens(row.env_id, row.codeword_len, row.seed);
    const auto& frz = frozen(row.env_id, row.codeword_len, row.seed, dmodel);

    AdaptTask task;
    task.mode = collab::ModeSpec{variant, row.alpha, false};
    task.env_id = row.env_id;
    task.codeword_len = row.codeword_len;
    task.seed = row.seed;
    task.train_count = count;
    task.train = TrainConfig::adapt_defaults(row.seed);
    task.train.batch_size = cfg_.batch_size;
    task.train.max_epochs = cfg_.adapt_max_epochs;
    task.train.patience = cfg_.patience;

    log("adapt " + key);
    auto outcome = adapt(task, env, pre.lam.get(), pre.sams.at(dmodel).get(), &frz);
    rep = std::move(outcome.report);
    io::write_file_atomic(cache_path, report_to_json(rep).dump(2) + "\n");
  }

  // experiment view files: {experiment}/{mode}/{env}/{M}/{seed}.csv
  const std::string view_dir = work_dir_ + "/" + experiment + "/" + mode_label +
                               "/" + std::to_string(row.env_id) + "/" +
                               std::to_string(row.codeword_len);
  io::write_file_atomic(view_dir + "/" + std::to_string(row.seed) + ".csv",
                        adapt_report_csv(rep));
  io::write_file_atomic(
      view_dir + "/" + std::to_string(row.seed) + ".trace.csv", trace_csv(rep));

  row.experiment = experiment;
  row.rep = rep;
  tables_.rows.push_back(std::move(row));
  return tables_.rows.back().rep;
}

void SuiteRunner::record_eval_only(const std::string& experiment,
                                   const std::string& mode, int64_t m,
                                   uint64_t seed) {
  const int default_d = models::sam_config(cfg_.arr, cfg_.preset).d_model;
  for (int env_id : cfg_.adapt_envs) {
    const auto& env = env_tokens(env_id, m, seed);
    const auto& frz = frozen(env_id, m, seed, default_d);
    const nn::TensorF& y_hat =
        mode == "pretrained-lam" ? frz.base_test : frz.ref_test;

    AdaptReport rep;
    rep.env_id = env_id;
    rep.mode = mode;
    rep.codeword_len = m;
    rep.seed = seed;
    rep.test_nmse = collab::batch_nmse(env.test.y, y_hat);
    rep.test_nmse_db = collab::to_db(rep.test_nmse);
    rep.test_gcs = collab::batch_gcs(env.test.y, y_hat, env.n_tx);

    const std::string view_dir = work_dir_ + "/" + experiment + "/" + mode +
                                 "/" + std::to_string(env_id) + "/" +
                                 std::to_string(m);
    io::write_file_atomic(view_dir + "/" + std::to_string(seed) + ".csv",
                          adapt_report_csv(rep));

    RunRow row;
    row.experiment = experiment;
    row.mode = mode;
    row.env_id = env_id;
    row.codeword_len = m;
    row.seed = seed;
    row.rep = std::move(rep);
    tables_.rows.push_back(std::move(row));
  }
}

void SuiteRunner::run_batch(std::vector<std::function<void()>> tasks) {
  if (cfg_.jobs <= 1 || tasks.size() <= 1) {
    for (auto& t : tasks) t();
    return;
  }
  // runs in parallel, kernels single-threaded; results are deterministic
  // because every task owns its seeds and writes its own slot
  const int saved = kernels::thread_count();
  kernels::set_thread_count(1);
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  const int n = std::min<int>(cfg_.jobs, static_cast<int>(tasks.size()));
  for (int i = 0; i < n; ++i)
    pool.emplace_back([&] {
      for (;;) {
        const size_t t = next.fetch_add(1);
        if (t >= tasks.size()) return;
        tasks[t]();
      }
    });
  for (auto& t : pool) t.join();
  kernels::set_thread_count(saved);
}

void SuiteRunner::ensure_datasets() {
  for (int e : cfg_.pretrain_envs) dataset(e);
  for (int e : cfg_.adapt_envs) dataset(e);
}

void SuiteRunner::ensure_pretrained() {
  for (int64_t m : cfg_.codeword_lens)
    for (uint64_t s : cfg_.seeds) pretrained(m, s);
}

void SuiteRunner::run_alpha_sweep() {
  if (done_["fig6"]) return;
  done_["fig6"] = true;
  for (int64_t m : cfg_.codeword_lens)
    for (double a : cfg_.alpha_grid)
      for (int env : cfg_.adapt_envs)
        for (uint64_t s : cfg_.seeds) {
          RunRow row;
          row.mode = "lasco";
          row.env_id = env;
          row.codeword_len = m;
          row.seed = s;
          row.alpha = a;
          run_adapt("fig6", "lasco-a" + fd(a), row);
        }

  // tuned alpha per codeword length: argmin of the seed/env mean NMSE
  for (int64_t m : cfg_.codeword_lens) {
    double best_alpha = cfg_.alpha_grid.front();
    double best = 1e300;
    for (double a : cfg_.alpha_grid) {
      double acc = 0.0;
      int n = 0;
      for (const auto& r : tables_.rows)
        if (r.experiment == "fig6" && r.codeword_len == m && r.alpha == a) {
          acc += r.rep.test_nmse;
          ++n;
        }
      const double mean = acc / std::max(1, n);
      if (mean < best) {
        best = mean;
        best_alpha = a;
      }
    }
    tables_.alpha_star[m] = best_alpha;
    log("alpha* (m=" + std::to_string(m) + ") = " + fd(best_alpha));
  }
  write_summary("fig6");
}

void SuiteRunner::run_mode_comparison() {
  if (done_["fig5"]) return;
  run_alpha_sweep();
  done_["fig5"] = true;

  for (int64_t m : cfg_.codeword_lens)
    for (uint64_t s : cfg_.seeds) {
      record_eval_only("fig5", "pretrained-lam", m, s);
      record_eval_only("fig5", "pretrained-sam", m, s);
    }

  for (int64_t m : cfg_.codeword_lens)
    for (int env : cfg_.adapt_envs)
      for (uint64_t s : cfg_.seeds) {
        for (const char* mode :
             {"lasco", "e-lasco", "finetuned-sam", "baseline-a",
              "variant-lasco"}) {
          RunRow row;
          row.mode = mode;
          row.env_id = env;
          row.codeword_len = m;
          row.seed = s;
          row.alpha = std::string(mode) == "lasco" ? tables_.alpha_star.at(m)
                                                   : 1.0;
          run_adapt("fig5", mode, row);
        }
      }
  write_summary("fig5");
}

void SuiteRunner::run_sample_efficiency() {
  if (done_["fig7"]) return;
  run_alpha_sweep();
  done_["fig7"] = true;
  const int64_t m = cfg_.sweep_codeword_len;
  for (int64_t count : cfg_.sample_counts)
    for (int env : cfg_.adapt_envs)
      for (uint64_t s : cfg_.seeds)
        for (const char* mode : {"lasco", "finetuned-sam", "baseline-a"}) {
          RunRow row;
          row.mode = mode;
          row.env_id = env;
          row.codeword_len = m;
          row.seed = s;
          row.count = count;
          row.alpha = std::string(mode) == "lasco" ? tables_.alpha_star.at(m)
                                                   : 1.0;
          run_adapt("fig7", std::string(mode) + "-n" + std::to_string(count),
                    row);
        }
  write_summary("fig7");
}

void SuiteRunner::run_size_sweep() {
  if (done_["fig9"]) return;
  done_["fig9"] = true;
  const int64_t m = cfg_.sweep_codeword_len;
  for (int d : cfg_.sam_dmodels)
    for (int env : cfg_.adapt_envs)
      for (uint64_t s : cfg_.seeds) {
        RunRow row;
        row.mode = "e-lasco";
        row.env_id = env;
        row.codeword_len = m;
        row.seed = s;
        row.dmodel = d;
        run_adapt("fig9", "e-lasco-d" + std::to_string(d), row);
      }
  write_summary("fig9");
}

void SuiteRunner::write_convergence_cdf() {
  run_mode_comparison();
  // empirical CDF of epochs-to-converge per mode over (env, M, seed) runs;
  // censored runs are reported past max_epochs
  std::map<std::string, std::vector<std::pair<int, bool>>> per_mode;
  for (const auto& r : tables_.rows)
    if (r.experiment == "fig5" && !r.rep.val_trace.empty())
      per_mode[r.mode].push_back({r.rep.epochs_to_converge, r.rep.censored});

  std::string csv = "mode,epochs_to_converge,censored,cum_fraction\n";
  nlohmann::json summary;
  for (auto& [mode, runs] : per_mode) {
    std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) {
      const int ea = a.second ? 1 << 20 : a.first;
      const int eb = b.second ? 1 << 20 : b.first;
      return ea < eb;
    });
    const double n = static_cast<double>(runs.size());
    std::vector<int> effective;
    for (size_t i = 0; i < runs.size(); ++i) {
      csv += mode + "," + std::to_string(runs[i].first) + "," +
             (runs[i].second ? "1" : "0") + "," +
             fd(static_cast<double>(i + 1) / n) + "\n";
      effective.push_back(runs[i].second ? cfg_.adapt_max_epochs + 1
                                         : runs[i].first);
    }
    const double median =
        effective.size() % 2 == 1
            ? effective[effective.size() / 2]
            : 0.5 * (effective[effective.size() / 2 - 1] +
                     effective[effective.size() / 2]);
    summary[mode] = {{"runs", runs.size()}, {"median_epochs", median}};
  }
  io::ensure_dir(work_dir_ + "/fig8");
  io::write_file_atomic(work_dir_ + "/fig8/cdf.csv", csv);
  io::write_file_atomic(work_dir_ + "/fig8/summary.json", summary.dump(2) + "\n");
}

void SuiteRunner::run_all() {
  ensure_datasets();
  ensure_pretrained();
  run_alpha_sweep();
  run_mode_comparison();
  run_sample_efficiency();
  run_size_sweep();
  write_convergence_cdf();
}

double SuiteRunner::tuned_alpha(int64_t codeword_len) {
  run_alpha_sweep();
  return tables_.alpha_star.at(codeword_len);
}

void SuiteRunner::rerun_single(int env_id, int64_t m, uint64_t seed,
                               double alpha) {
  RunRow row;
  row.mode = "lasco";
  row.env_id = env_id;
  row.codeword_len = m;
  row.seed = seed;
  row.alpha = alpha;
  run_adapt("recheck", "lasco-a" + fd(alpha), row);
}

void SuiteRunner::write_summary(const std::string& experiment) {
  nlohmann::json j;
  j["experiment"] = experiment;
  // per (mode label-ish grouping) aggregate over env x seed
  std::map<std::string, std::pair<double, int>> nmse_acc;
  std::map<std::string, std::pair<double, int>> gcs_acc;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : tables_.rows) {
    if (r.experiment != experiment) continue;
    std::string g = r.mode + "/m" + std::to_string(r.codeword_len);
    if (experiment == "fig6") g += "/a" + fd(r.alpha);
    if (experiment == "fig7") g += "/n" + std::to_string(r.count);
    if (experiment == "fig9") g += "/d" + std::to_string(r.dmodel);
    auto& na = nmse_acc[g];
    na.first += r.rep.test_nmse;
    na.second += 1;
    auto& ga = gcs_acc[g];
    ga.first += r.rep.test_gcs;
    ga.second += 1;
    rows.push_back(report_to_json(r.rep));
  }
  nlohmann::json agg;
  for (const auto& [g, acc] : nmse_acc) {
    const double mean = acc.first / acc.second;
    agg[g] = {{"mean_nmse", mean},
              {"mean_nmse_db", collab::to_db(mean)},
              {"mean_gcs", gcs_acc[g].first / gcs_acc[g].second},
              {"runs", acc.second}};
  }
  j["aggregates"] = agg;
  if (experiment == "fig6") {
    nlohmann::json a;
    for (const auto& [m, alpha] : tables_.alpha_star)
      a["m" + std::to_string(m)] = alpha;
    j["alpha_star"] = a;
  }
  j["runs"] = rows;
  io::ensure_dir(work_dir_ + "/" + experiment);
  io::write_file_atomic(work_dir_ + "/" + experiment + "/summary.json",
                        j.dump(2) + "\n");
}

}  // namespace lasco::harness
