#include "lasco/feedback/codec.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>

#include "lasco/nn/rng.hpp"

namespace lasco::feedback {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                            Eigen::RowMajor>;

template <typename T>
void matvec(const std::vector<T>& m, int64_t rows, int64_t cols,
            std::span<const T> x, std::span<T> y) {
  LASCO_CHECK_SHAPE(static_cast<int64_t>(x.size()) == cols,
                    "codec: input length mismatch");
  LASCO_CHECK_SHAPE(static_cast<int64_t>(y.size()) == rows,
                    "codec: output length mismatch");
  for (int64_t r = 0; r < rows; ++r) {
    T acc = T(0);
    const T* row = m.data() + r * cols;
    for (int64_t c = 0; c < cols; ++c) acc += row[c] * x[static_cast<size_t>(c)];
    y[static_cast<size_t>(r)] = acc;
  }
}

}  // namespace

ProjectionCodec ProjectionCodec::build(int64_t codeword_len, int64_t dim,
                                       uint64_t seed) {
  LASCO_CHECK(codeword_len >= 1 && codeword_len <= dim,
              "codec requires 1 <= M <= dim");
  ProjectionCodec c;
  c.m_ = codeword_len;
  c.dim_ = dim;
  c.seed_ = seed;

  c.a64_.resize(static_cast<size_t>(codeword_len * dim));
  nn::Rng rng(nn::derive_seed(seed, "codec", static_cast<uint64_t>(codeword_len),
                              static_cast<uint64_t>(dim)));
  const double std = 1.0 / std::sqrt(static_cast<double>(codeword_len));
  for (auto& x : c.a64_) x = rng.normal(0.0, std);

  Eigen::Map<const MatRM> a(c.a64_.data(), codeword_len, dim);
  const MatRM gram = a * a.transpose();
  Eigen::LLT<MatRM> llt(gram);
  if (llt.info() != Eigen::Success)
    throw NumericalError("codec: A A^T numerically singular (seed " +
                         std::to_string(seed) + ")");
  // A^+ = A^T (A A^T)^{-1}, via the SPD solve (A A^T) X = A
  const MatRM x = llt.solve(a);
  c.pinv64_.resize(static_cast<size_t>(dim * codeword_len));
  Eigen::Map<MatRM> pinv(c.pinv64_.data(), dim, codeword_len);
  pinv = x.transpose();

  const double rel =
      (a * pinv * a - a).norm() / a.norm();
  if (!(rel < 1e-6))
    throw NumericalError("codec: pseudo-inverse identity failed (seed " +
                         std::to_string(seed) + ", rel " + std::to_string(rel) +
                         ")");

  c.a32_.assign(c.a64_.begin(), c.a64_.end());
  c.pinv32_.assign(c.pinv64_.begin(), c.pinv64_.end());
  return c;
}

void ProjectionCodec::compress(std::span<const float> v,
                               std::span<float> s) const {
  matvec(a32_, m_, dim_, v, s);
}

void ProjectionCodec::compress(std::span<const double> v,
                               std::span<double> s) const {
  matvec(a64_, m_, dim_, v, s);
}

void ProjectionCodec::reconstruct(std::span<const float> s,
                                  std::span<float> v) const {
  matvec(pinv32_, dim_, m_, s, v);
}

void ProjectionCodec::reconstruct(std::span<const double> s,
                                  std::span<double> v) const {
  matvec(pinv64_, dim_, m_, s, v);
}

std::vector<float> vec_real(const chansim::CsiSample& s) {
  LASCO_CHECK_SHAPE(!s.h_realvec.empty(), "vec_real: empty sample");
  return s.h_realvec;
}

chansim::CsiSample devec_real(const std::vector<float>& v, int n_tx, int n_sc) {
  chansim::CsiSample s;
  s.h = chansim::devectorize_channel(v, n_tx, n_sc);
  s.h_realvec = v;
  return s;
}

std::vector<float> compress(const chansim::CsiSample& s,
                            const ProjectionCodec& codec) {
  std::vector<float> out(static_cast<size_t>(codec.codeword_len()));
  codec.compress(std::span<const float>(s.h_realvec), std::span<float>(out));
  return out;
}

std::vector<float> coarse_reconstruct(std::span<const float> codeword,
                                      const ProjectionCodec& codec) {
  std::vector<float> v(static_cast<size_t>(codec.dim()));
  codec.reconstruct(codeword, std::span<float>(v));
  return v;
}

double compression_ratio(const ProjectionCodec& codec,
                         const chansim::ArrayConfig& arr) {
  LASCO_CHECK_SHAPE(codec.dim() == arr.real_dim(),
                    "codec dimension does not match array");
  return static_cast<double>(arr.real_dim()) /
         static_cast<double>(codec.codeword_len());
}

}  // namespace lasco::feedback
