#include "lasco/models/checkpoint.hpp"

#include <zlib.h>

#include <cstring>

#include "lasco/io/file_io.hpp"
#include "lasco/io/serialize.hpp"

namespace lasco::models {

namespace {

constexpr char kMagic[8] = {'L', 'A', 'S', 'C', 'O', 'C', 'K', '1'};
constexpr uint32_t kVersion = 1;
constexpr uint8_t kDtypeF32 = 0;

uint32_t crc_of(const uint8_t* data, size_t n) {
  return static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

nlohmann::json meta_to_json(const CheckpointMeta& m) {
  return {{"config", m.config},
          {"codec",
           {{"codeword_len", m.codec.codeword_len},
            {"dim", m.codec.dim},
            {"seed", m.codec.seed}}},
          {"role", m.role},
          {"train_seed", m.train_seed},
          {"epochs", m.epochs},
          {"dataset_ids", m.dataset_ids}};
}

CheckpointMeta meta_from_json(const nlohmann::json& j) {
  CheckpointMeta m;
  m.config = j.at("config").get<ModelConfig>();
  m.codec.codeword_len = j.at("codec").at("codeword_len").get<int64_t>();
  m.codec.dim = j.at("codec").at("dim").get<int64_t>();
  m.codec.seed = j.at("codec").at("seed").get<uint64_t>();
  m.role = j.at("role").get<std::string>();
  m.train_seed = j.at("train_seed").get<uint64_t>();
  m.epochs = j.at("epochs").get<int64_t>();
  m.dataset_ids = j.at("dataset_ids").get<std::vector<int>>();
  return m;
}

}  // namespace

void save_checkpoint(const ReconNet<float>& net, const CheckpointMeta& meta,
                     const std::string& path) {
  std::vector<uint8_t> buf;
  const auto raw = [&buf](const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    buf.insert(buf.end(), b, b + n);
  };
  const auto u32 = [&raw](uint32_t x) { raw(&x, 4); };
  const auto u64 = [&raw](uint64_t x) { raw(&x, 8); };

  raw(kMagic, 8);
  u32(kVersion);

  CheckpointMeta m = meta;
  m.config = net.config();
  const std::string meta_s = meta_to_json(m).dump();
  u32(static_cast<uint32_t>(meta_s.size()));
  raw(meta_s.data(), meta_s.size());

  const auto& items = net.params().items();
  u32(static_cast<uint32_t>(items.size()));
  for (const auto& p : items) {
    u32(static_cast<uint32_t>(p.name.size()));
    raw(p.name.data(), p.name.size());
    buf.push_back(kDtypeF32);
    u32(static_cast<uint32_t>(p.value.ndim()));
    for (int i = 0; i < p.value.ndim(); ++i)
      u64(static_cast<uint64_t>(p.value.dim(i)));
    raw(p.value.v.data(), p.value.v.size() * sizeof(float));
  }
  u32(crc_of(buf.data(), buf.size()));
  io::write_file_atomic(path, buf.data(), buf.size());
}

LoadedCheckpoint load_checkpoint(
    const std::string& path, const std::optional<ModelConfig>& expect_config,
    const std::optional<feedback::CodecKey>& expect_codec) {
  std::vector<uint8_t> buf;
  try {
    buf = io::read_file(path);
  } catch (const IoError&) {
    throw PrerequisiteError("checkpoint not found: " + path);
  }
  if (buf.size() < 16) throw CorruptFileError("checkpoint too short: " + path);

  const uint32_t stored_crc =
      *reinterpret_cast<const uint32_t*>(buf.data() + buf.size() - 4);
  if (crc_of(buf.data(), buf.size() - 4) != stored_crc)
    throw CorruptFileError("checkpoint CRC mismatch: " + path);

  size_t pos = 0;
  const auto raw = [&](void* p, size_t n) {
    if (pos + n > buf.size() - 4)
      throw CorruptFileError("checkpoint truncated: " + path);
    std::memcpy(p, buf.data() + pos, n);
    pos += n;
  };
  const auto u32 = [&] {
    uint32_t x;
    raw(&x, 4);
    return x;
  };
  const auto u64 = [&] {
    uint64_t x;
    raw(&x, 8);
    return x;
  };

  char magic[8];
  raw(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw CorruptFileError("not a checkpoint file: " + path);
  const uint32_t version = u32();
  if (version != kVersion)
    throw VersionMismatchError("checkpoint version " + std::to_string(version) +
                               " unsupported");

  const uint32_t meta_len = u32();
  std::string meta_s(meta_len, '\0');
  raw(meta_s.data(), meta_len);
  CheckpointMeta meta;
  try {
    meta = meta_from_json(nlohmann::json::parse(meta_s));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(std::string("bad checkpoint metadata: ") + e.what());
  }

  if (expect_config && !(meta.config == *expect_config))
    throw MismatchError("checkpoint model config mismatch: " + path);
  if (expect_codec && !(meta.codec == *expect_codec))
    throw MismatchError("checkpoint codec mismatch: " + path);

  nn::ParameterSet<float> ps;
  const uint32_t n_tensors = u32();
  for (uint32_t i = 0; i < n_tensors; ++i) {
    const uint32_t name_len = u32();
    std::string name(name_len, '\0');
    raw(name.data(), name_len);
    uint8_t dtype;
    raw(&dtype, 1);
    if (dtype != kDtypeF32)
      throw CorruptFileError("unknown tensor dtype in checkpoint");
    const uint32_t ndim = u32();
    std::vector<int64_t> shape(ndim);
    for (auto& d : shape) d = static_cast<int64_t>(u64());
    auto& p = ps.add(name, shape);
    raw(p.value.v.data(), p.value.v.size() * sizeof(float));
  }
  if (pos != buf.size() - 4)
    throw CorruptFileError("trailing bytes in checkpoint: " + path);

  LoadedCheckpoint out{meta, ReconNet<float>(meta.config, std::move(ps))};
  out.net.role = role_from_name(meta.role);
  return out;
}

CheckpointMeta read_checkpoint_meta(const std::string& path) {
  return load_checkpoint(path).meta;
}

}  // namespace lasco::models
