#include <doctest.h>

#include <cmath>

#include "lasco/collab/collab.hpp"
#include "lasco/models/presets.hpp"
#include "testutil/gradcheck.hpp"

using namespace lasco;
using namespace lasco::collab;
using nn::TensorD;
using nn::TensorF;
using testutil::random_tensor;

namespace {

TensorF random_f(std::vector<int64_t> shape, uint64_t seed) {
  return random_tensor(std::move(shape), seed).cast<float>();
}

models::ModelConfig tiny_cfg(models::NormPlacement norm) {
  models::ModelConfig cfg;
  cfg.depth = 1;
  cfg.d_model = 8;
  cfg.d_ff = 16;
  cfg.n_heads = 2;
  cfg.input_dim = 4;
  cfg.seq_len = 2;
  cfg.norm = norm;
  return cfg;
}

}  // namespace

TEST_CASE("combine laws: exact limits on random tensors") {
  const auto base = random_f({4, 3, 6}, 1);
  const auto pxy = random_f({4, 3, 6}, 2);
  const auto ref = random_f({4, 3, 6}, 3);

  TensorF lasco_out, mod_out;
  combine_lasco(base, pxy, ref, lasco_out);
  combine_modified(base, pxy, ref, 1.0, mod_out);
  CHECK(lasco_out.v == mod_out.v);  // same kernel, same bits

  // alpha = 0: exactly the proxy output
  combine_modified(base, pxy, ref, 0.0, mod_out);
  CHECK(mod_out.v == pxy.v);

  // pxy == ref, alpha = 1: exactly the base output
  combine_modified(base, ref, ref, 1.0, mod_out);
  CHECK(mod_out.v == base.v);

  // shift vanishes in the lasco law too
  combine_lasco(base, ref, ref, mod_out);
  CHECK(mod_out.v == base.v);

  // elementwise identity: alpha*b + (p - alpha*r)
  const float alpha = 0.6f;
  combine_modified(base, pxy, ref, alpha, mod_out);
  for (size_t i = 0; i < mod_out.v.size(); ++i)
    CHECK(mod_out.v[i] == alpha * base.v[i] + (pxy.v[i] - alpha * ref.v[i]));

  // base = 0 at alpha = 1: pxy - ref
  TensorF zero({4, 3, 6});
  combine_modified(zero, pxy, ref, 1.0, mod_out);
  for (size_t i = 0; i < mod_out.v.size(); ++i)
    CHECK(mod_out.v[i] == pxy.v[i] - ref.v[i]);

  TensorF bad({2, 2});
  CHECK_THROWS_AS(combine_modified(base, pxy, bad, 1.0, mod_out), ShapeError);
}

TEST_CASE("nmse: trivial identities and the zero-norm error") {
  const auto h = random_tensor({32}, 4);
  CHECK(nmse<double>(h.v, h.v) == 0.0);

  std::vector<double> zero(h.v.size(), 0.0);
  CHECK(nmse<double>(h.v, zero) == doctest::Approx(1.0));

  std::vector<double> twice(h.v.size());
  for (size_t i = 0; i < h.v.size(); ++i) twice[i] = 2.0 * h.v[i];
  CHECK(nmse<double>(h.v, twice) == doctest::Approx(1.0));

  CHECK_THROWS(nmse<double>(zero, zero));
  CHECK(to_db(1.0) == doctest::Approx(0.0));
  CHECK(to_db(0.1) == doctest::Approx(-10.0));
}

TEST_CASE("gcs: identity, scale/phase invariance, orthogonality, zero column") {
  const int n_tx = 4, n_sc = 3;
  nn::Rng rng(6);
  std::vector<double> h(static_cast<size_t>(2 * n_tx * n_sc));
  for (auto& x : h) x = rng.normal();

  CHECK(gcs_realvec<double>(h, h, n_tx, n_sc) == doctest::Approx(1.0).epsilon(1e-12));

  // global complex scale c e^{j phi} leaves the metric at 1
  const double c = 2.7, phi = 1.1;
  std::vector<double> scaled(h.size());
  const size_t n = static_cast<size_t>(n_tx) * n_sc;
  for (size_t i = 0; i < n; ++i) {
    const double re = h[i], im = h[n + i];
    scaled[i] = c * (re * std::cos(phi) - im * std::sin(phi));
    scaled[n + i] = c * (re * std::sin(phi) + im * std::cos(phi));
  }
  CHECK(gcs_realvec<double>(h, scaled, n_tx, n_sc) ==
        doctest::Approx(1.0).epsilon(1e-10));

  // orthogonal columns score 0: h = e1 per column, hat = e2 per column
  std::vector<double> e1(h.size(), 0.0), e2(h.size(), 0.0);
  for (int s = 0; s < n_sc; ++s) {
    e1[static_cast<size_t>(s) * n_tx + 0] = 1.0;
    e2[static_cast<size_t>(s) * n_tx + 1] = 1.0;
  }
  CHECK(gcs_realvec<double>(e1, e2, n_tx, n_sc) == doctest::Approx(0.0));

  // zero column -> error
  std::vector<double> zero(h.size(), 0.0);
  CHECK_THROWS(gcs_realvec<double>(h, zero, n_tx, n_sc));

  // token layout agrees with the realvec layout
  std::vector<double> ht(h.size()), st(h.size());
  // realvec -> token reshuffle (doubles)
  for (int s = 0; s < n_sc; ++s)
    for (int t = 0; t < n_tx; ++t) {
      ht[static_cast<size_t>(s) * 2 * n_tx + t] = h[static_cast<size_t>(s) * n_tx + t];
      ht[static_cast<size_t>(s) * 2 * n_tx + n_tx + t] =
          h[n + static_cast<size_t>(s) * n_tx + t];
      st[static_cast<size_t>(s) * 2 * n_tx + t] =
          scaled[static_cast<size_t>(s) * n_tx + t];
      st[static_cast<size_t>(s) * 2 * n_tx + n_tx + t] =
          scaled[n + static_cast<size_t>(s) * n_tx + t];
    }
  CHECK(gcs_tokens<double>(ht, st, n_tx, n_sc) ==
        doctest::Approx(gcs_realvec<double>(h, scaled, n_tx, n_sc)).epsilon(1e-12));
}

TEST_CASE("mode names and structure") {
  CHECK(variant_from_name("lasco") == Variant::kLasco);
  CHECK(variant_from_name("e-lasco") == Variant::kElasco);
  CHECK(variant_name(Variant::kVariantLasco) == std::string("variant-lasco"));
  CHECK_THROWS_AS(variant_from_name("nope"), ConfigError);
  CHECK(variant_alpha_learnable(Variant::kElasco));
  CHECK_FALSE(variant_alpha_learnable(Variant::kLasco));
  CHECK(variant_uses_ref(Variant::kLasco));
  CHECK_FALSE(variant_uses_ref(Variant::kVariantLasco));
  CHECK_FALSE(variant_uses_base(Variant::kFinetunedSam));
}

TEST_CASE("forward_mode: trivial identities") {
  const auto base = random_f({2, 2, 4}, 7);
  const auto pxy = random_f({2, 2, 4}, 8);
  const auto ref = random_f({2, 2, 4}, 9);
  TensorF zero({2, 2, 4});

  // lasco with pxy == ref at alpha 1 equals the base output
  const auto y1 = mode_combine(ModeSpec{Variant::kLasco, 1.0, false}, &base,
                               ref, &ref, 1.0);
  CHECK(y1.v == base.v);

  // baseline-a with a zero SAM equals the base output
  const TensorF* no_ref = nullptr;
  const auto y2 = mode_combine(ModeSpec{Variant::kBaselineA, 1.0, false}, &base,
                               zero, no_ref, 1.0);
  CHECK(y2.v == base.v);

  // variant-lasco adds base and proxy
  const auto y3 = mode_combine(ModeSpec{Variant::kVariantLasco, 1.0, false},
                               &base, pxy, no_ref, 1.0);
  for (size_t i = 0; i < y3.v.size(); ++i)
    CHECK(y3.v[i] == base.v[i] + pxy.v[i]);

  // missing handle is an error
  const TensorF* no_base = nullptr;
  CHECK_THROWS(mode_combine(ModeSpec{Variant::kLasco, 1.0, false}, no_base, pxy,
                            &ref, 1.0));
}

TEST_CASE("adapt_batch_loss: values and alpha gradient directions") {
  const auto h = random_tensor({3, 2, 4}, 11);
  const auto base = random_tensor({3, 2, 4}, 12);
  const auto pxy = random_tensor({3, 2, 4}, 13);
  const auto ref = random_tensor({3, 2, 4}, 14);

  // perfect combination: loss 0, all gradients 0
  {
    TensorD combined;
    combine_modified(base, pxy, ref, 0.8, combined);
    const auto bl = adapt_batch_loss(ModeSpec{Variant::kLasco, 0.8, false},
                                     combined, &base, pxy, &ref, 0.8);
    CHECK(bl.loss == doctest::Approx(0.0));
    for (double g : bl.d_pxy.v) CHECK(g == 0.0);
    CHECK(bl.d_alpha == doctest::Approx(0.0));
  }

  // finite-difference check of d_alpha (double precision)
  {
    const double alpha0 = 0.63;
    const auto loss_at = [&](double a) {
      TensorD c;
      combine_modified(base, pxy, ref, a, c);
      double l = 0;
      const int64_t batch = h.dim(0);
      for (size_t i = 0; i < c.v.size(); ++i) {
        const double r = c.v[i] - h.v[i];
        l += r * r;
      }
      return l / batch;
    };
    const auto bl = adapt_batch_loss(ModeSpec{Variant::kElasco, alpha0, false},
                                     h, &base, pxy, &ref, alpha0);
    const double hstep = 1e-6;
    const double fd = (loss_at(alpha0 + hstep) - loss_at(alpha0 - hstep)) /
                      (2.0 * hstep);
    CHECK(bl.d_alpha == doctest::Approx(fd).epsilon(1e-5));
    CHECK(bl.loss == doctest::Approx(loss_at(alpha0)).epsilon(1e-12));
  }

  // alpha = 0 reduces to plain proxy fine-tuning
  {
    const auto bl = adapt_batch_loss(ModeSpec{Variant::kLasco, 0.0, false}, h,
                                     &base, pxy, &ref, 0.0);
    double expect = 0;
    for (size_t i = 0; i < h.v.size(); ++i) {
      const double r = pxy.v[i] - h.v[i];
      expect += r * r;
    }
    CHECK(bl.loss == doctest::Approx(expect / h.dim(0)).epsilon(1e-12));
  }
}

TEST_CASE("loss_l1 / loss_adapt: frozen contract and proxy gradients") {
  const auto cfg = tiny_cfg(models::NormPlacement::kPost);
  models::ReconNetD base_net(tiny_cfg(models::NormPlacement::kPre), 1);
  models::ReconNetD ref_net(cfg, 2);
  models::ReconNetD pxy_net(cfg, 2);  // clone-equivalent init

  const auto h = random_tensor({3, cfg.seq_len, cfg.input_dim}, 21);
  const auto h_in = random_tensor({3, cfg.seq_len, cfg.input_dim}, 22);

  // unfrozen base/ref is an error
  CHECK_THROWS(loss_l1(h, h_in, base_net, pxy_net, ref_net));
  base_net.freeze();
  ref_net.freeze();

  const uint64_t base_hash = base_net.param_hash();
  const uint64_t ref_hash = ref_net.param_hash();

  // pxy == ref, so the shift cancels; with the base output as the target the
  // loss is exactly zero
  {
    const TensorD target = base_net.forward(h_in);
    pxy_net.params().zero_grads();
    const double l = loss_l1(target, h_in, base_net, pxy_net, ref_net);
    CHECK(l == doctest::Approx(0.0).epsilon(1e-10));
  }

  // gradients w.r.t. pxy parameters match finite differences
  {
    pxy_net.params().zero_grads();
    const double l0 = loss_l1(h, h_in, base_net, pxy_net, ref_net);
    CHECK(l0 > 0.0);
    testutil::FdProblem fp;
    for (auto& p : pxy_net.params().items()) fp.add(p.value, p.grad);
    const double err = fp.run([&] {
      models::ReconNetD probe = pxy_net;
      probe.params().zero_grads();
      return loss_l1(h, h_in, base_net, probe, ref_net);
    });
    CHECK(err < 1e-4);
  }

  // loss_adapt: alpha gradient matches finite differences at rel 1e-5
  {
    AlphaParam alpha{0.7, true, 0.7};
    double d_alpha = 0.0;
    pxy_net.params().zero_grads();
    const double l0 = loss_adapt(h, h_in, base_net, pxy_net, ref_net, alpha,
                                 &d_alpha);
    const double hstep = 1e-6;
    AlphaParam up{alpha.value + hstep, true, 0.7};
    AlphaParam down{alpha.value - hstep, true, 0.7};
    models::ReconNetD probe = pxy_net;
    const double lu = loss_adapt(h, h_in, base_net, probe, ref_net, up, nullptr);
    const double ld = loss_adapt(h, h_in, base_net, probe, ref_net, down, nullptr);
    const double fd = (lu - ld) / (2.0 * hstep);
    CHECK(d_alpha == doctest::Approx(fd).epsilon(1e-5));
    CHECK(l0 > 0.0);
  }

  // frozen models accumulated no gradients and kept their bytes
  for (const auto& p : base_net.params().items()) CHECK(p.grad.size() == 0);
  for (const auto& p : ref_net.params().items()) CHECK(p.grad.size() == 0);
  CHECK(base_net.param_hash() == base_hash);
  CHECK(ref_net.param_hash() == ref_hash);
}
