#include <doctest.h>
#include <zlib.h>

#include <cstring>
#include <filesystem>

#include "lasco/harness/harness.hpp"
#include "lasco/io/file_io.hpp"
#include "lasco/models/checkpoint.hpp"
#include "lasco/models/presets.hpp"
#include "testutil/gradcheck.hpp"

using namespace lasco;
using namespace lasco::models;

namespace {

nn::TensorF random_input(const ModelConfig& cfg, int batch, uint64_t seed) {
  nn::Rng rng(seed);
  nn::TensorF x({batch, cfg.seq_len, cfg.input_dim});
  for (auto& v : x.v) v = static_cast<float>(rng.normal());
  return x;
}

}  // namespace

TEST_CASE("presets: paper and desk dimensions") {
  const auto arr_p = chansim::ArrayConfig::paper();
  const auto lam_p = lam_config(arr_p, Preset::kPaper);
  CHECK(lam_p.depth == 20);
  CHECK(lam_p.d_model == 512);
  CHECK(lam_p.d_ff == 2048);
  CHECK(lam_p.norm == NormPlacement::kPre);
  CHECK(lam_p.input_dim == 64);
  CHECK(lam_p.seq_len == 32);

  const auto sam_p = sam_config(arr_p, Preset::kPaper);
  CHECK(sam_p.depth == 2);
  CHECK(sam_p.d_model == 64);
  CHECK(sam_p.d_ff == 256);
  CHECK(sam_p.norm == NormPlacement::kPost);

  const auto arr_d = chansim::ArrayConfig::desk();
  const auto lam_d = lam_config(arr_d, Preset::kDesk);
  CHECK(lam_d.depth == 6);
  CHECK(lam_d.d_model == 128);
  CHECK(lam_d.d_ff == 512);
  CHECK(lam_d.norm == NormPlacement::kPre);

  const auto sam_d = sam_config(arr_d, Preset::kDesk);
  CHECK(sam_d.depth == 2);
  CHECK(sam_d.d_model == 32);
  CHECK(sam_d.d_ff == 128);
  CHECK(sam_d.norm == NormPlacement::kPost);
}

TEST_CASE("parameter count matches the closed form; SAM is under 5% of LAM") {
  for (auto preset : {Preset::kDesk, Preset::kPaper}) {
    const auto arr = preset == Preset::kDesk ? chansim::ArrayConfig::desk()
                                             : chansim::ArrayConfig::paper();
    const auto lam_cfg = lam_config(arr, preset);
    const auto sam_cfg = sam_config(arr, preset);
    const ReconNetF lam(lam_cfg, 1);
    const ReconNetF sam(sam_cfg, 2);
    CHECK(lam.param_count() == expected_param_count(lam_cfg));
    CHECK(sam.param_count() == expected_param_count(sam_cfg));
    CHECK(sam.param_count() * 20 < lam.param_count());
  }
  // closed form spot check at the desk scale:
  // embed 16*128+128, pos 8*128, 6 blocks, final norm, head 128*16+16
  const auto cfg = lam_config(chansim::ArrayConfig::desk(), Preset::kDesk);
  const int64_t block = 2 * 256 + 4 * (128 * 128 + 128) + 128 * 512 + 512 +
                        512 * 128 + 128;
  CHECK(expected_param_count(cfg) ==
        2176 + 1024 + 6 * block + 256 + 2064);
}

TEST_CASE("forward: shape, determinism, batch independence") {
  const auto arr = chansim::ArrayConfig::desk();
  const auto cfg = sam_config(arr, Preset::kDesk);
  const ReconNetF net(cfg, 77);

  const auto x = random_input(cfg, 3, 5);
  const auto y1 = net.forward(x);
  const auto y2 = net.forward(x);
  CHECK(y1.shape == x.shape);
  CHECK(y1.v == y2.v);

  // two identical rows in a batch produce identical outputs
  nn::TensorF xx({2, cfg.seq_len, cfg.input_dim});
  const int64_t per = cfg.seq_len * cfg.input_dim;
  std::copy_n(x.data(), per, xx.data());
  std::copy_n(x.data(), per, xx.data() + per);
  const auto yy = net.forward(xx);
  for (int64_t i = 0; i < per; ++i) CHECK(yy.v[i] == yy.v[i + per]);

  // same seed builds the same net
  const ReconNetF net2(cfg, 77);
  CHECK(net2.param_hash() == net.param_hash());
  const ReconNetF net3(cfg, 78);
  CHECK(net3.param_hash() != net.param_hash());

  // frozen forward never mutates parameters
  const uint64_t h0 = net.param_hash();
  (void)net.forward(x);
  CHECK(net.param_hash() == h0);
}

TEST_CASE("clone: bit-equal outputs, isolated updates") {
  const auto arr = chansim::ArrayConfig::desk();
  const auto cfg = sam_config(arr, Preset::kDesk);
  ReconNetF src(cfg, 3);
  auto clone = src.clone();
  const auto x = random_input(cfg, 2, 9);
  CHECK(clone.forward(x).v == src.forward(x).v);

  auto clone2 = clone.clone();
  CHECK(clone2.forward(x).v == src.forward(x).v);

  // perturb the clone; the source must not move
  const uint64_t src_hash = src.param_hash();
  clone.params().at("head.b").value.v[0] += 1.0f;
  CHECK(src.param_hash() == src_hash);
  CHECK(clone.param_hash() != src_hash);
  CHECK(clone.forward(x).v != src.forward(x).v);
}

TEST_CASE("tokenization helpers: round trip through the token layout") {
  nn::Rng rng(8);
  const int n_tx = 3, n_sc = 5;
  std::vector<float> v(static_cast<size_t>(2 * n_tx * n_sc));
  for (auto& x : v) x = static_cast<float>(rng.normal());
  std::vector<float> tokens(v.size()), back(v.size());
  harness::realvec_to_tokens(v.data(), n_tx, n_sc, tokens.data());
  harness::tokens_to_realvec(tokens.data(), n_tx, n_sc, back.data());
  CHECK(back == v);
}

TEST_CASE("full model gradient check at the desk-minimal config") {
  ModelConfig cfg;
  cfg.depth = 2;
  cfg.d_model = 8;
  cfg.d_ff = 16;
  cfg.n_heads = 2;
  cfg.input_dim = 4;  // n_tx = 2
  cfg.seq_len = 2;    // n_sc = 2
  for (auto placement : {NormPlacement::kPre, NormPlacement::kPost}) {
    cfg.norm = placement;
    ReconNetD net(cfg, 11);
    auto x = testutil::random_tensor({2, cfg.seq_len, cfg.input_dim}, 21);
    const auto target = testutil::random_tensor({2, cfg.seq_len, cfg.input_dim}, 22);

    const auto loss_value = [&] {
      const auto y = net.forward(x);
      double l = 0;
      for (size_t i = 0; i < y.v.size(); ++i) {
        const double r = y.v[i] - target.v[i];
        l += r * r;
      }
      return l;
    };

    ReconNetD::Cache cache;
    net.params().zero_grads();
    const auto y = net.forward_cached(x, cache);
    nn::TensorD dy(y.shape);
    for (size_t i = 0; i < y.v.size(); ++i)
      dy.v[i] = 2.0 * (y.v[i] - target.v[i]);
    nn::TensorD dx;
    net.backward(cache, dy, &dx);

    testutil::FdProblem fp;
    fp.add(x, dx);
    for (auto& p : net.params().items()) fp.add(p.value, p.grad);
    CHECK(fp.run(loss_value) < 1e-3);
  }
}

TEST_CASE("checkpoint: round trip is bit-exact; errors are distinct") {
  const auto arr = chansim::ArrayConfig::desk();
  const auto cfg = sam_config(arr, Preset::kDesk);
  ReconNetF net(cfg, 15);
  net.role = ModelRole::kReference;

  CheckpointMeta meta;
  meta.codec = {32, arr.real_dim(), 123};
  meta.role = "reference";
  meta.train_seed = 15;
  meta.epochs = 7;
  meta.dataset_ids = {1, 2, 3};

  const std::string path = "/tmp/lasco_test_ckpt.bin";
  save_checkpoint(net, meta, path);

  const auto loaded = load_checkpoint(path);
  CHECK(loaded.meta.role == "reference");
  CHECK(loaded.meta.epochs == 7);
  CHECK(loaded.meta.codec.codeword_len == 32);
  CHECK(loaded.meta.dataset_ids == std::vector<int>{1, 2, 3});
  CHECK(loaded.net.config() == cfg);
  const auto x = random_input(cfg, 2, 4);
  CHECK(loaded.net.forward(x).v == net.forward(x).v);
  CHECK(loaded.net.param_hash() == net.param_hash());

  // truncated file -> corrupt
  auto bytes = io::read_file(path);
  auto cut = bytes;
  cut.resize(bytes.size() - 9);
  io::write_file_atomic(path, cut.data(), cut.size());
  CHECK_THROWS_AS(load_checkpoint(path), CorruptFileError);

  // flipped byte -> corrupt (CRC)
  auto flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x01;
  io::write_file_atomic(path, flipped.data(), flipped.size());
  CHECK_THROWS_AS(load_checkpoint(path), CorruptFileError);

  // version bump -> version mismatch (recompute the trailing CRC)
  auto vbump = bytes;
  vbump[8] = 2;
  {
    const uint32_t crc = static_cast<uint32_t>(
        crc32(0L, vbump.data(), static_cast<uInt>(vbump.size() - 4)));
    std::memcpy(vbump.data() + vbump.size() - 4, &crc, 4);
  }
  io::write_file_atomic(path, vbump.data(), vbump.size());
  CHECK_THROWS_AS(load_checkpoint(path), VersionMismatchError);

  // config mismatch -> distinct error
  io::write_file_atomic(path, bytes.data(), bytes.size());
  ModelConfig other = cfg;
  other.input_dim = 2 * (arr.n_tx + 1);
  CHECK_THROWS_AS(load_checkpoint(path, other), MismatchError);
  feedback::CodecKey wrong{16, arr.real_dim(), 123};
  CHECK_THROWS_AS(load_checkpoint(path, cfg, wrong), MismatchError);

  // missing file -> prerequisite
  CHECK_THROWS_AS(load_checkpoint("/tmp/does_not_exist.ckpt"), PrerequisiteError);

  std::filesystem::remove(path);
}
