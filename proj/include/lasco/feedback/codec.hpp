#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lasco/chansim/types.hpp"

namespace lasco::feedback {

struct CodecKey {
  int64_t codeword_len = 0;
  int64_t dim = 0;
  uint64_t seed = 0;
  bool operator==(const CodecKey&) const = default;
};

// Frozen random projection front end. A has i.i.d. Gaussian entries with
// variance 1/M; the Moore-Penrose pseudo-inverse A^T (A A^T)^{-1} is computed
// once in double precision and cached, with float32 copies for the training
// path.
class ProjectionCodec {
 public:
  // Throws NumericalError (reporting the seed) if A A^T is numerically
  // singular or the pseudo-inverse identity fails to hold.
  static ProjectionCodec build(int64_t codeword_len, int64_t dim, uint64_t seed);

  int64_t codeword_len() const { return m_; }
  int64_t dim() const { return dim_; }
  uint64_t seed() const { return seed_; }
  CodecKey key() const { return {m_, dim_, seed_}; }

  // s = A v
  void compress(std::span<const float> v, std::span<float> s) const;
  void compress(std::span<const double> v, std::span<double> s) const;

  // v = A^+ s (minimum-norm least-squares preimage)
  void reconstruct(std::span<const float> s, std::span<float> v) const;
  void reconstruct(std::span<const double> s, std::span<double> v) const;

  const std::vector<double>& a() const { return a64_; }
  const std::vector<double>& a_pinv() const { return pinv64_; }

 private:
  int64_t m_ = 0, dim_ = 0;
  uint64_t seed_ = 0;
  std::vector<double> a64_, pinv64_;  // row-major M x dim and dim x M
  std::vector<float> a32_, pinv32_;
};

// --- spec operations on CSI samples ---

// [Re column-major ; Im column-major] of H
std::vector<float> vec_real(const chansim::CsiSample& s);
chansim::CsiSample devec_real(const std::vector<float>& v, int n_tx, int n_sc);

std::vector<float> compress(const chansim::CsiSample& s,
                            const ProjectionCodec& codec);

// H_in as a real vector in the vec_real layout
std::vector<float> coarse_reconstruct(std::span<const float> codeword,
                                      const ProjectionCodec& codec);

// gamma = 2 n_tx n_sc / M; codec dimension must match the array
double compression_ratio(const ProjectionCodec& codec,
                         const chansim::ArrayConfig& arr);

}  // namespace lasco::feedback
