#include <CLI11.hpp>
#include <iostream>

#include "lasco/cli/cli.hpp"
#include "lasco/io/file_io.hpp"
#include "lasco/io/serialize.hpp"

namespace lasco::cli {

namespace {

std::pair<int, int> parse_env_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const int one = std::stoi(s);
    return {one, one};
  }
  const int a = std::stoi(s.substr(0, dots));
  const int b = std::stoi(s.substr(dots + 2));
  if (b < a) throw ConfigError("bad env range: " + s);
  return {a, b};
}

void echo_resolved(const RunConfig& cfg) {
  io::ensure_dir(cfg.out);
  io::write_file_atomic(cfg.out + "/resolved-config.json",
                        resolved_config_json(cfg));
}

chansim::Dataset load_env_dataset(const RunConfig& cfg, int env_id) {
  const std::string path =
      cfg.data_dir + "/env_" + std::to_string(env_id) + ".lds";
  if (!io::file_exists(path))
    throw PrerequisiteError("dataset not found: " + path +
                            " (generate it with `lasco gen-data`)");
  return chansim::load_dataset(path);
}

feedback::ProjectionCodec codec_from_key(const feedback::CodecKey& key) {
  return feedback::ProjectionCodec::build(key.codeword_len, key.dim, key.seed);
}

int cmd_gen_data(const RunConfig& cfg) {
  echo_resolved(cfg);
  const int n = cfg.n_samples.value_or(cfg.suite.samples_per_env);
  for (int id = cfg.envs_first; id <= cfg.envs_last; ++id) {
    const auto env = chansim::sample_environment(id, cfg.suite.cell_radius_m,
                                                 cfg.suite.data_seed,
                                                 cfg.suite.arr);
    const auto ds = chansim::generate_dataset(env, n, cfg.suite.arr);
    const std::string path = cfg.out + "/env_" + std::to_string(id) + ".lds";
    chansim::save_dataset(ds, path);
    std::cout << "wrote " << path << " (" << n << " samples, "
              << (env.is_los ? "LOS" : "NLOS") << ")\n";
  }
  return 0;
}

int cmd_pretrain(const RunConfig& cfg) {
  echo_resolved(cfg);
  std::vector<chansim::Dataset> parts;
  for (int id = cfg.envs_first; id <= cfg.envs_last; ++id)
    parts.push_back(load_env_dataset(cfg, id));
  const auto mixed =
      chansim::mix_datasets(parts, nn::derive_seed(cfg.suite.data_seed, "mix"));

  const int64_t m = cfg.codeword_len.value_or(32);
  const auto codec = feedback::ProjectionCodec::build(
      m, cfg.suite.arr.real_dim(),
      nn::derive_seed(cfg.seed, "codec", static_cast<uint64_t>(m)));

  harness::TrainConfig tc =
      harness::TrainConfig::pretrain_defaults(cfg.suite.pretrain_epochs, cfg.seed);
  tc.batch_size = cfg.suite.batch_size;
  const auto out = harness::pretrain(
      models::lam_config(cfg.suite.arr, cfg.suite.preset),
      models::sam_config(cfg.suite.arr, cfg.suite.preset), mixed, codec, tc,
      [](const std::string& s) { std::cerr << s << "\n"; });

  models::CheckpointMeta meta;
  meta.codec = codec.key();
  meta.train_seed = cfg.seed;
  meta.epochs = cfg.suite.pretrain_epochs;
  for (int id = cfg.envs_first; id <= cfg.envs_last; ++id)
    meta.dataset_ids.push_back(id);
  meta.role = "base";
  models::save_checkpoint(out.lam, meta, cfg.out + "/lam.ckpt");
  meta.role = "reference";
  models::save_checkpoint(out.sam, meta, cfg.out + "/sam.ckpt");

  nlohmann::json rep = {{"lam_val_trace", out.lam_val_trace},
                        {"sam_val_trace", out.sam_val_trace},
                        {"lam_best_epoch", out.lam_best_epoch},
                        {"sam_best_epoch", out.sam_best_epoch},
                        {"pinv_val_nmse", out.baseline_val_nmse}};
  io::write_file_atomic(cfg.out + "/pretrain.json", rep.dump(2) + "\n");
  std::cout << "pretrained lam.ckpt sam.ckpt (best val NMSE "
            << io::format_double(out.lam_val_trace[static_cast<size_t>(
                   out.lam_best_epoch - 1)])
            << " / "
            << io::format_double(out.sam_val_trace[static_cast<size_t>(
                   out.sam_best_epoch - 1)])
            << ", pinv " << io::format_double(out.baseline_val_nmse) << ")\n";
  return 0;
}

int cmd_adapt(const RunConfig& cfg) {
  cfg.validate_mode_alpha();
  echo_resolved(cfg);
  const auto variant = collab::variant_from_name(cfg.mode);
  if (!collab::variant_trains_proxy(variant))
    throw ConfigError("mode " + cfg.mode + " has no adaptation step");

  if (cfg.ref_ckpt.empty())
    throw PrerequisiteError("--ref-ckpt is required (pre-trained SAM)");
  auto ref = models::load_checkpoint(cfg.ref_ckpt);
  std::optional<models::LoadedCheckpoint> lam;
  if (collab::variant_uses_base(variant)) {
    if (cfg.lam_ckpt.empty())
      throw PrerequisiteError("--lam-ckpt is required for mode " + cfg.mode);
    lam = models::load_checkpoint(cfg.lam_ckpt);
    if (!(lam->meta.codec == ref.meta.codec))
      throw MismatchError("lam and ref checkpoints use different codecs");
  }
  const auto codec = codec_from_key(ref.meta.codec);
  const auto ds = load_env_dataset(cfg, cfg.env_id);
  const auto env = harness::tokenize_env(ds, codec);

  ref.net.freeze();
  if (lam) lam->net.freeze();

  harness::AdaptTask task;
  const double alpha = variant == collab::Variant::kElasco
                           ? 1.0
                           : cfg.effective_alpha();
  task.mode = collab::ModeSpec{variant, alpha, false};
  task.env_id = cfg.env_id;
  task.codeword_len = codec.codeword_len();
  task.seed = cfg.seed;
  task.train_count = cfg.train_count.value_or(-1);
  task.train = harness::TrainConfig::adapt_defaults(cfg.seed);
  task.train.batch_size = cfg.suite.batch_size;
  task.train.max_epochs = cfg.suite.adapt_max_epochs;
  task.train.patience = cfg.suite.patience;

  auto outcome = harness::adapt(task, env, lam ? &lam->net : nullptr, &ref.net);

  io::write_file_atomic(cfg.out + "/report.csv",
                        harness::adapt_report_csv(outcome.report));
  io::write_file_atomic(cfg.out + "/trace.csv",
                        harness::trace_csv(outcome.report));
  models::CheckpointMeta meta;
  meta.codec = codec.key();
  meta.role = "proxy";
  meta.train_seed = cfg.seed;
  meta.epochs = outcome.report.stop_epoch;
  meta.dataset_ids = {cfg.env_id};
  const std::string pxy =
      cfg.pxy_ckpt.empty() ? cfg.out + "/pxy.ckpt" : cfg.pxy_ckpt;
  models::save_checkpoint(outcome.proxy, meta, pxy);
  std::cout << "adapted env " << cfg.env_id << " mode " << cfg.mode
            << ": test NMSE " << io::format_double(outcome.report.test_nmse_db)
            << " dB, GCS " << io::format_double(outcome.report.test_gcs)
            << ", epochs " << outcome.report.epochs_to_converge
            << (outcome.report.censored ? " (censored)" : "") << ", alpha "
            << io::format_double(outcome.report.alpha_final) << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  cfg.validate_mode_alpha();
  echo_resolved(cfg);
  const auto variant = collab::variant_from_name(cfg.mode);

  std::optional<models::LoadedCheckpoint> lam, ref, pxy;
  if (collab::variant_uses_base(variant)) {
    if (cfg.lam_ckpt.empty()) throw PrerequisiteError("--lam-ckpt required");
    lam = models::load_checkpoint(cfg.lam_ckpt);
  }
  if (collab::variant_uses_ref(variant) ||
      variant == collab::Variant::kPretrainedSam) {
    if (cfg.ref_ckpt.empty()) throw PrerequisiteError("--ref-ckpt required");
    ref = models::load_checkpoint(cfg.ref_ckpt);
  }
  if (collab::variant_trains_proxy(variant)) {
    if (cfg.pxy_ckpt.empty()) throw PrerequisiteError("--pxy-ckpt required");
    pxy = models::load_checkpoint(cfg.pxy_ckpt);
  }

  const models::LoadedCheckpoint& any = lam   ? *lam
                                        : ref ? *ref
                                              : *pxy;
  const auto codec = codec_from_key(any.meta.codec);
  const auto ds = load_env_dataset(cfg, cfg.env_id);
  const auto env = harness::tokenize_env(ds, codec);

  double alpha = cfg.effective_alpha();
  if (variant == collab::Variant::kElasco && pxy &&
      pxy->net.params().has("collab.alpha"))
    alpha = pxy->net.params().at("collab.alpha").value.v[0];

  const models::ReconNetF* proxy_net =
      pxy ? &pxy->net
          : (variant == collab::Variant::kPretrainedSam ? &ref->net : nullptr);
  const auto row = harness::evaluate_mode(
      collab::ModeSpec{variant, alpha, false}, lam ? &lam->net : nullptr,
      proxy_net, ref ? &ref->net : nullptr, alpha, env.test, env.n_tx,
      cfg.env_id, cfg.suite.batch_size);

  harness::EvalReport rep;
  rep.mode = cfg.mode;
  rep.codeword_len = codec.codeword_len();
  rep.rows.push_back(row);
  rep.finalize();
  io::write_file_atomic(cfg.out + "/eval.csv", harness::eval_report_csv(rep));
  std::cout << "eval env " << cfg.env_id << " mode " << cfg.mode << ": NMSE "
            << io::format_double(row.nmse_db) << " dB, GCS "
            << io::format_double(row.gcs) << " (pinv baseline "
            << io::format_double(collab::to_db(env.pinv_test_nmse)) << " dB)\n";
  return 0;
}

harness::DeskSuiteConfig suite_for(const RunConfig& cfg) {
  harness::DeskSuiteConfig s = cfg.suite;
  s.validate();
  return s;
}

void print_criteria(const harness::SuiteRunner& runner,
                    std::span<const int> ids) {
  const auto results = harness::evaluate_trend_criteria(
      runner.tables(), runner.config(), ids);
  for (const auto& r : results)
    std::cout << "[trend] criterion " << r.id << " (" << r.name << "): "
              << (r.pass ? "holds" : "does not hold") << " — " << r.detail
              << "\n";
}

int cmd_suite(const RunConfig& cfg, const std::string& stage,
              bool pretrain_first) {
  echo_resolved(cfg);
  harness::SuiteRunner runner(suite_for(cfg), cfg.out, [](const std::string& s) {
    std::cerr << "[suite] " << s << "\n";
  });

  if (!pretrain_first) {
    // fail early with an actionable message when checkpoints are absent
    for (int64_t m : runner.config().codeword_lens)
      for (uint64_t s : runner.config().seeds) {
        const std::string path =
            cfg.out + "/checkpoints/m" + std::to_string(m) + "_s" +
            std::to_string(s) + "_e" +
            std::to_string(runner.config().pretrain_epochs) + "/lam.ckpt";
        if (!io::file_exists(path))
          throw PrerequisiteError(
              "missing pre-trained checkpoint " + path +
              "; rerun with --pretrain-first to build it");
      }
  }

  std::vector<int> criteria_ids;
  if (stage == "fig5") {
    runner.run_mode_comparison();
    criteria_ids = {6};
  } else if (stage == "fig6") {
    runner.run_alpha_sweep();
    criteria_ids = {7};
  } else if (stage == "fig7") {
    runner.run_sample_efficiency();
    criteria_ids = {8};
  } else if (stage == "fig8") {
    runner.write_convergence_cdf();
    criteria_ids = {9};
  } else if (stage == "fig9") {
    runner.run_size_sweep();
    criteria_ids = {10};
  } else if (stage == "all") {
    runner.run_all();
    criteria_ids = {6, 7, 8, 9, 10};
  } else {
    throw ConfigError("unknown reproduction suite: " + stage);
  }
  // trend checks are reported, not gating
  print_criteria(runner, criteria_ids);
  std::cout << "artifacts under " << cfg.out << "\n";
  return 0;
}

int cmd_inspect(const std::string& path) {
  const auto loaded = models::load_checkpoint(path);
  const auto& m = loaded.meta;
  std::cout << "checkpoint: " << path << "\n"
            << "  role: " << m.role << "\n"
            << "  model: depth=" << m.config.depth
            << " d_model=" << m.config.d_model << " d_ff=" << m.config.d_ff
            << " heads=" << m.config.n_heads << " norm="
            << (m.config.norm == models::NormPlacement::kPre ? "pre" : "post")
            << " input_dim=" << m.config.input_dim
            << " seq_len=" << m.config.seq_len << "\n"
            << "  codec: M=" << m.codec.codeword_len << " dim=" << m.codec.dim
            << " seed=" << m.codec.seed << "\n"
            << "  training: seed=" << m.train_seed << " epochs=" << m.epochs
            << " datasets=[";
  for (size_t i = 0; i < m.dataset_ids.size(); ++i)
    std::cout << (i ? "," : "") << m.dataset_ids[i];
  std::cout << "]\n  parameters: " << loaded.net.param_count() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  try {
    // phase 1: config file, so flags can override it
    RunConfig cfg;
    for (int i = 1; i + 1 < argc; ++i)
      if (std::string(argv[i]) == "--config") apply_config_file(cfg, argv[i + 1]);

    CLI::App app{"LASCO: large and small model collaboration for CSI feedback"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file");

    const auto add_common = [&](CLI::App* sub) {
      sub->add_option("--config", config_path, "JSON config file");
      sub->add_option_function<uint64_t>(
          "--seed", [&](const uint64_t& v) { cfg.seed = v; });
      sub->add_option_function<std::string>(
          "--out", [&](const std::string& v) { cfg.out = v; });
      sub->add_option_function<int>(
          "--jobs", [&](const int& v) { cfg.suite.jobs = v; });
      sub->add_option_function<std::string>(
          "--preset", [&](const std::string& v) {
            cfg.suite.preset = models::preset_from_name(v);
            cfg.suite.arr = cfg.suite.preset == models::Preset::kPaper
                                ? chansim::ArrayConfig::paper()
                                : chansim::ArrayConfig::desk();
            if (cfg.suite.preset == models::Preset::kPaper)
              cfg.suite.samples_per_env = 10000;
          });
    };

    std::string envs_range = "1..16";
    std::string repro_stage;
    std::string inspect_path;
    bool pretrain_first = false;

    auto* gen = app.add_subcommand("gen-data", "generate CSI datasets");
    add_common(gen);
    gen->add_option("--envs", envs_range, "environment id range A..B");
    gen->add_option_function<int>(
        "--samples", [&](const int& v) { cfg.n_samples = v; });

    auto* pre = app.add_subcommand("pretrain", "pre-train base LAM + reference SAM");
    add_common(pre);
    pre->add_option("--envs", envs_range, "environment id range A..B");
    pre->add_option_function<std::string>(
        "--data", [&](const std::string& v) { cfg.data_dir = v; });
    pre->add_option_function<int64_t>(
        "--codeword-len", [&](const int64_t& v) { cfg.codeword_len = v; });
    pre->add_option_function<int>(
        "--epochs", [&](const int& v) { cfg.suite.pretrain_epochs = v; });
    pre->add_option_function<int>(
        "--batch-size", [&](const int& v) { cfg.suite.batch_size = v; });

    const auto add_run_opts = [&](CLI::App* sub) {
      sub->add_option_function<std::string>(
          "--mode", [&](const std::string& v) { cfg.mode = v; });
      sub->add_option_function<double>(
          "--alpha", [&](const double& v) { cfg.alpha = v; });
      sub->add_option_function<std::string>(
          "--data", [&](const std::string& v) { cfg.data_dir = v; });
      sub->add_option_function<int>(
          "--env", [&](const int& v) { cfg.env_id = v; });
      sub->add_option_function<std::string>(
          "--lam-ckpt", [&](const std::string& v) { cfg.lam_ckpt = v; });
      sub->add_option_function<std::string>(
          "--ref-ckpt", [&](const std::string& v) { cfg.ref_ckpt = v; });
      sub->add_option_function<std::string>(
          "--pxy-ckpt", [&](const std::string& v) { cfg.pxy_ckpt = v; });
    };

    auto* adapt = app.add_subcommand("adapt", "environment adaptation (step 2)");
    add_common(adapt);
    add_run_opts(adapt);
    adapt->add_option_function<int64_t>(
        "--train-count", [&](const int64_t& v) { cfg.train_count = v; });
    adapt->add_option_function<int>(
        "--max-epochs", [&](const int& v) { cfg.suite.adapt_max_epochs = v; });
    adapt->add_option_function<int>(
        "--patience", [&](const int& v) { cfg.suite.patience = v; });
    adapt->add_option_function<int>(
        "--batch-size", [&](const int& v) { cfg.suite.batch_size = v; });

    auto* ev = app.add_subcommand("eval", "evaluate a mode on an environment");
    add_common(ev);
    add_run_opts(ev);

    auto* sa = app.add_subcommand("sweep-alpha", "alpha grid sweep");
    add_common(sa);
    auto* ss = app.add_subcommand("sweep-samples", "sample-efficiency sweep");
    add_common(ss);
    auto* sz = app.add_subcommand("sweep-size", "SAM size sweep");
    add_common(sz);
    auto* cdf = app.add_subcommand("cdf", "convergence-epoch CDF");
    add_common(cdf);

    auto* repro = app.add_subcommand("repro", "run a reproduction suite");
    add_common(repro);
    repro->add_option("suite", repro_stage, "fig5|fig6|fig7|fig8|fig9|all")
        ->required();
    repro->add_flag("--pretrain-first", pretrain_first,
                    "pre-train missing checkpoints before the experiment");

    auto* insp = app.add_subcommand("inspect-ckpt", "print checkpoint header");
    insp->add_option("file", inspect_path, "checkpoint file")->required();

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e);
      return rc == 0 ? 0 : 2;
    }

    if (gen->parsed() || pre->parsed()) {
      const auto range = parse_env_range(envs_range);
      cfg.envs_first = range.first;
      cfg.envs_last = range.second;
    }

    if (gen->parsed()) return cmd_gen_data(cfg);
    if (pre->parsed()) return cmd_pretrain(cfg);
    if (adapt->parsed()) return cmd_adapt(cfg);
    if (ev->parsed()) return cmd_eval(cfg);
    if (sa->parsed()) return cmd_suite(cfg, "fig6", true);
    if (ss->parsed()) return cmd_suite(cfg, "fig7", true);
    if (sz->parsed()) return cmd_suite(cfg, "fig9", true);
    if (cdf->parsed()) return cmd_suite(cfg, "fig8", true);
    if (repro->parsed()) return cmd_suite(cfg, repro_stage, pretrain_first);
    if (insp->parsed()) return cmd_inspect(inspect_path);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const PrerequisiteError& e) {
    std::cerr << "missing prerequisite: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lasco::cli
