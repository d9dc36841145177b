#include "lasco/collab/collab.hpp"

#include "lasco/kernels/kernels.hpp"

namespace lasco::collab {

template <typename T>
void combine_modified(const nn::Tensor<T>& y_base, const nn::Tensor<T>& y_pxy,
                      const nn::Tensor<T>& y_ref, double alpha,
                      nn::Tensor<T>& out) {
  LASCO_CHECK_SHAPE(y_base.same_shape(y_pxy) && y_base.same_shape(y_ref),
                    "combine: shape mismatch");
  if (!out.same_shape(y_pxy)) out.resize(y_pxy.shape);
  const T a = static_cast<T>(alpha);
  const T* b = y_base.data();
  const T* p = y_pxy.data();
  const T* r = y_ref.data();
  T* o = out.data();
  const int64_t n = y_pxy.size();
  for (int64_t i = 0; i < n; ++i) o[i] = a * b[i] + (p[i] - a * r[i]);
}

template void combine_modified<float>(const nn::Tensor<float>&,
                                      const nn::Tensor<float>&,
                                      const nn::Tensor<float>&, double,
                                      nn::Tensor<float>&);
template void combine_modified<double>(const nn::Tensor<double>&,
                                       const nn::Tensor<double>&,
                                       const nn::Tensor<double>&, double,
                                       nn::Tensor<double>&);

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kPretrainedLam: return "pretrained-lam";
    case Variant::kPretrainedSam: return "pretrained-sam";
    case Variant::kFinetunedSam: return "finetuned-sam";
    case Variant::kBaselineA: return "baseline-a";
    case Variant::kLasco: return "lasco";
    case Variant::kElasco: return "e-lasco";
    case Variant::kVariantLasco: return "variant-lasco";
  }
  return "?";
}

Variant variant_from_name(const std::string& s) {
  for (Variant v : {Variant::kPretrainedLam, Variant::kPretrainedSam,
                    Variant::kFinetunedSam, Variant::kBaselineA, Variant::kLasco,
                    Variant::kElasco, Variant::kVariantLasco})
    if (s == variant_name(v)) return v;
  throw ConfigError("unknown mode: " + s);
}

bool variant_uses_base(Variant v) {
  switch (v) {
    case Variant::kPretrainedSam:
    case Variant::kFinetunedSam:
      return false;
    default:
      return true;
  }
}

bool variant_uses_ref(Variant v) {
  return v == Variant::kLasco || v == Variant::kElasco;
}

bool variant_trains_proxy(Variant v) {
  switch (v) {
    case Variant::kPretrainedLam:
    case Variant::kPretrainedSam:
      return false;
    default:
      return true;
  }
}

bool variant_alpha_learnable(Variant v) { return v == Variant::kElasco; }

template <typename T>
nn::Tensor<T> mode_combine(const ModeSpec& mode, const nn::Tensor<T>* y_base,
                           const nn::Tensor<T>& y_pxy,
                           const nn::Tensor<T>* y_ref, double alpha) {
  nn::Tensor<T> out;
  switch (mode.variant) {
    case Variant::kPretrainedLam:
      LASCO_CHECK(y_base, "mode needs the base model output");
      out = *y_base;
      return out;
    case Variant::kPretrainedSam:
    case Variant::kFinetunedSam:
      out = y_pxy;
      return out;
    case Variant::kBaselineA:
    case Variant::kVariantLasco: {
      LASCO_CHECK(y_base, "mode needs the base model output");
      LASCO_CHECK_SHAPE(y_base->same_shape(y_pxy), "combine: shape mismatch");
      out.resize(y_pxy.shape);
      kernels::add(out.size(), y_base->data(), y_pxy.data(), out.data());
      return out;
    }
    case Variant::kLasco:
    case Variant::kElasco: {
      LASCO_CHECK(y_base && y_ref, "mode needs base and reference outputs");
      if (mode.legacy17) {
        // legacy law: base + alpha * (pxy - ref)
        out.resize(y_pxy.shape);
        const T a = static_cast<T>(alpha);
        for (int64_t i = 0; i < out.size(); ++i)
          out.v[static_cast<size_t>(i)] =
              y_base->v[static_cast<size_t>(i)] +
              a * (y_pxy.v[static_cast<size_t>(i)] -
                   y_ref->v[static_cast<size_t>(i)]);
        return out;
      }
      combine_modified(*y_base, y_pxy, *y_ref, alpha, out);
      return out;
    }
  }
  throw Error("unreachable mode");
}

template nn::Tensor<float> mode_combine<float>(const ModeSpec&,
                                               const nn::Tensor<float>*,
                                               const nn::Tensor<float>&,
                                               const nn::Tensor<float>*, double);
template nn::Tensor<double> mode_combine<double>(const ModeSpec&,
                                                 const nn::Tensor<double>*,
                                                 const nn::Tensor<double>&,
                                                 const nn::Tensor<double>*,
                                                 double);

}  // namespace lasco::collab
