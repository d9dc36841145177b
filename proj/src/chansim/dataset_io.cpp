#include <cstring>

#include "lasco/chansim/chansim.hpp"
#include "lasco/io/file_io.hpp"
#include "lasco/io/serialize.hpp"

namespace lasco::chansim {

namespace {

constexpr char kMagic[8] = {'L', 'A', 'S', 'C', 'O', 'D', 'S', '1'};
constexpr uint32_t kVersion = 1;

struct Writer {
  std::vector<uint8_t> buf;
  void raw(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    buf.insert(buf.end(), b, b + n);
  }
  void u32(uint32_t x) { raw(&x, 4); }
};

struct Reader {
  const std::vector<uint8_t>& buf;
  size_t pos = 0;
  explicit Reader(const std::vector<uint8_t>& b) : buf(b) {}
  void raw(void* p, size_t n) {
    if (pos + n > buf.size())
      throw CorruptFileError("dataset file truncated");
    std::memcpy(p, buf.data() + pos, n);
    pos += n;
  }
  uint32_t u32() {
    uint32_t x;
    raw(&x, 4);
    return x;
  }
};

void write_idx(Writer& w, const std::vector<uint32_t>& idx) {
  w.u32(static_cast<uint32_t>(idx.size()));
  w.raw(idx.data(), idx.size() * 4);
}

std::vector<uint32_t> read_idx(Reader& r, uint32_t n_samples) {
  const uint32_t n = r.u32();
  std::vector<uint32_t> idx(n);
  r.raw(idx.data(), static_cast<size_t>(n) * 4);
  for (uint32_t i : idx)
    if (i >= n_samples) throw CorruptFileError("split index out of range");
  return idx;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  Writer w;
  w.raw(kMagic, 8);
  w.u32(kVersion);
  w.u32(static_cast<uint32_t>(ds.arr.n_tx));
  w.u32(static_cast<uint32_t>(ds.arr.n_sc));
  w.u32(static_cast<uint32_t>(ds.samples.size()));

  nlohmann::json meta = {{"env", ds.env}, {"array", ds.arr}, {"env_id", ds.env_id}};
  const std::string meta_s = meta.dump();
  w.u32(static_cast<uint32_t>(meta_s.size()));
  w.raw(meta_s.data(), meta_s.size());

  // float32 (re, im) pairs, antenna-major subcarrier-minor, one sample after
  // another; matches the row-major complex buffer byte for byte
  for (const auto& s : ds.samples)
    w.raw(s.h.data(), s.h.size() * sizeof(std::complex<float>));

  write_idx(w, ds.train_idx);
  write_idx(w, ds.val_idx);
  write_idx(w, ds.test_idx);

  io::write_file_atomic(path, w.buf.data(), w.buf.size());
}

Dataset load_dataset(const std::string& path) {
  const auto buf = io::read_file(path);
  Reader r(buf);

  char magic[8];
  r.raw(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw CorruptFileError("not a dataset file: " + path);
  const uint32_t version = r.u32();
  if (version != kVersion)
    throw VersionMismatchError("unsupported dataset version");

  Dataset ds;
  const uint32_t n_tx = r.u32();
  const uint32_t n_sc = r.u32();
  const uint32_t n_samples = r.u32();

  const uint32_t meta_len = r.u32();
  std::string meta_s(meta_len, '\0');
  r.raw(meta_s.data(), meta_len);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_s);
    ds.env = meta.at("env").get<EnvironmentSpec>();
    ds.arr = meta.at("array").get<ArrayConfig>();
    ds.env_id = meta.at("env_id").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(std::string("bad dataset metadata: ") + e.what());
  }
  if (ds.arr.n_tx != static_cast<int>(n_tx) ||
      ds.arr.n_sc != static_cast<int>(n_sc))
    throw CorruptFileError("dataset header disagrees with metadata");
  ds.source_envs = {ds.env_id};

  ds.samples.resize(n_samples);
  const size_t per = static_cast<size_t>(n_tx) * n_sc;
  for (auto& s : ds.samples) {
    s.h.resize(per);
    r.raw(s.h.data(), per * sizeof(std::complex<float>));
    s.h_realvec = vectorize_channel(s.h, ds.arr.n_tx, ds.arr.n_sc);
  }

  ds.train_idx = read_idx(r, n_samples);
  ds.val_idx = read_idx(r, n_samples);
  ds.test_idx = read_idx(r, n_samples);
  if (r.pos != buf.size())
    throw CorruptFileError("trailing bytes in dataset file");
  return ds;
}

}  // namespace lasco::chansim
