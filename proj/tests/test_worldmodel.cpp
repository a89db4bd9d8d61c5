#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "playkit/worldmodel.hpp"
#include "test_util.hpp"

using namespace playkit;
using testutil::random_batch;
using testutil::random_mat;

namespace {

RssmDims tiny_dims() {
  RssmDims d;
  d.obs = 64;
  d.embed = 8;
  d.hidden = 8;
  d.deter = 8;
  d.stoch = 4;
  d.change = 64;
  return d;
}

}  // namespace

TEST_CASE("encode is deterministic with the contracted width") {
  auto wm = WorldModel<double>::create(RssmDims{}, 11);
  Rng rng(0);
  const auto obs = random_mat<double>(wm.dims.obs, 3, rng, 0.0, 1.0);
  const auto e1 = wm.encode(obs);
  const auto e2 = wm.encode(obs);
  CHECK(e1 == e2);
  CHECK(e1.rows() == 128);
  CHECK(e1.cols() == 3);
  CHECK_THROWS_AS(wm.encode(random_mat<double>(7, 1, rng)), RuntimeError);
}

TEST_CASE("distinct observations give distinct embeddings after random init") {
  auto wm = WorldModel<double>::create(RssmDims{}, 12);
  Rng rng(1);
  for (int i = 0; i < 5; ++i) {
    auto a = random_mat<double>(wm.dims.obs, 1, rng, 0.0, 1.0);
    auto b = a;
    // Flip > 5% of pixels.
    for (int k = 0; k < wm.dims.obs / 10; ++k) {
      const int j = rng.uniform_int(wm.dims.obs);
      b(j, 0) = 1.0 - b(j, 0);
    }
    CHECK(wm.encode(a) != wm.encode(b));
  }
}

TEST_CASE("posterior step: seeded sampling, std floor, finiteness guard") {
  auto wm = WorldModel<double>::create(tiny_dims(), 13);
  Rng rng(2);
  const auto s0 = wm.initial(2);
  const auto act = random_mat<double>(wm.dims.action, 2, rng);
  const auto emb = random_mat<double>(wm.dims.embed, 2, rng);
  const auto eps = wm.normal_matrix(wm.dims.stoch, 2, 99);

  const auto a = wm.posterior_step(s0, act, emb, eps);
  const auto b = wm.posterior_step(s0, act, emb, eps);
  CHECK(a.z == b.z);
  CHECK(a.z_std.minCoeff() >= kStdFloor);
  CHECK((a.z - (a.z_mean + a.z_std.cwiseProduct(eps))).cwiseAbs().maxCoeff() <
        1e-15);

  auto bad = emb;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(wm.posterior_step(s0, act, bad, eps), RuntimeError);
}

TEST_CASE("prior and posterior share the identical recurrent update") {
  auto wm = WorldModel<double>::create(tiny_dims(), 14);
  Rng rng(3);
  const auto s0 = wm.initial(1);
  const auto act = random_mat<double>(wm.dims.action, 1, rng);
  const auto emb = random_mat<double>(wm.dims.embed, 1, rng);
  const auto eps = wm.normal_matrix(wm.dims.stoch, 1, 5);
  const auto post = wm.posterior_step(s0, act, emb, eps);
  const auto prior = wm.prior_step(s0, act, &eps);
  CHECK(post.h == prior.h);
}

TEST_CASE("zeroed gaussian heads make the KL vanish on any input") {
  auto wm = WorldModel<double>::create(tiny_dims(), 15);
  // Zero both stats heads and tie their biases: q and p become the same
  // Gaussian for every input, so KL(q||p) = 0.
  Rng rng(4);
  Mat<double> bias = random_mat<double>(2 * wm.dims.stoch, 1, rng);
  for (const char* prefix : {"prior", "post"}) {
    for (auto& e : wm.params.entries) {
      if (e.name.find(prefix) != 0) continue;
      if (e.name.find(".w") != std::string::npos) e.w.setZero();
      if (e.name.find(".b") != std::string::npos && e.w.rows() == bias.rows())
        e.w = bias;
    }
  }
  const auto s0 = wm.initial(3);
  const auto act = random_mat<double>(wm.dims.action, 3, rng);
  const auto emb = random_mat<double>(wm.dims.embed, 3, rng);
  const auto eps = wm.normal_matrix(wm.dims.stoch, 3, 6);
  const auto post = wm.posterior_step(s0, act, emb, eps);
  const auto prior = wm.prior_step(s0, act, &eps);
  const auto kl = gaussian_kl(post.z_mean, post.z_std, prior.z_mean, prior.z_std);
  CHECK(kl.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("gaussian KL identities") {
  Rng rng(5);
  const auto m = random_mat<double>(4, 3, rng);
  const auto s = random_mat<double>(4, 3, rng, 0.2, 1.0);
  CHECK(gaussian_kl(m, s, m, s).cwiseAbs().maxCoeff() < 1e-15);
  const auto m2 = random_mat<double>(4, 3, rng);
  const auto s2 = random_mat<double>(4, 3, rng, 0.2, 1.0);
  CHECK(gaussian_kl(m, s, m2, s2).sum() >= 0.0);
}

TEST_CASE("decoders and the change head keep their contracts") {
  auto wm = WorldModel<double>::create(tiny_dims(), 16);
  Rng rng(6);
  auto s = wm.initial(2);
  s.h = random_mat<double>(wm.dims.deter, 2, rng);
  s.z = random_mat<double>(wm.dims.stoch, 2, rng);
  const auto img = wm.decode_image(s);
  CHECK(img.rows() == wm.dims.obs);
  const auto emb = wm.decode_embed(s);
  CHECK(emb.rows() == wm.dims.embed);
  const auto p = wm.predict_change(s);
  CHECK(p.minCoeff() > 0.0);
  CHECK(p.maxCoeff() < 1.0);
  const auto norm = wm.expected_change_norm(s);
  CHECK(norm.minCoeff() >= 0.0);
  CHECK(norm.maxCoeff() <= 1.0);
  CHECK(std::abs(norm(0) - p.col(0).mean()) < 1e-12);
}

TEST_CASE("imagine returns one latent per action, deterministically") {
  auto wm = WorldModel<double>::create(tiny_dims(), 17);
  Rng rng(7);
  const auto s0 = wm.initial(2);
  std::vector<Mat<double>> actions;
  for (int t = 0; t < 6; ++t)
    actions.push_back(random_mat<double>(wm.dims.action, 2, rng));
  const auto a = wm.imagine(s0, actions, 123);
  const auto b = wm.imagine(s0, actions, 123);
  CHECK(a.size() == 6);
  for (size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].z == b[t].z);
    const auto norms = wm.expected_change_norm(a[t]);
    for (int j = 0; j < norms.size(); ++j) {
      CHECK(std::isfinite(norms(j)));
      CHECK(norms(j) >= 0.0);
      CHECK(norms(j) <= 1.0);
    }
  }
  CHECK_THROWS_AS(wm.imagine(s0, {}, 1), RuntimeError);
}

TEST_CASE("beta scales the KL term out of the total") {
  auto wm = WorldModel<double>::create(tiny_dims(), 18);
  Rng rng(8);
  const auto batch = random_batch<double>(wm.dims, 4, 2, rng);

  WmTrainConfig with_kl;
  with_kl.beta = 1.0;
  with_kl.free_nats = 0.0;
  WmTrainConfig no_kl = with_kl;
  no_kl.beta = 0.0;

  Tape<double> t1, t2;
  WmLosses l1, l2;
  wm_build_loss(t1, wm, batch, with_kl, 55, &l1);
  wm_build_loss(t2, wm, batch, no_kl, 55, &l2);
  CHECK(l2.total ==
        doctest::Approx(l2.recon + l2.embed + l2.change_nll).epsilon(1e-12));
  CHECK(l1.total == doctest::Approx(l2.total + l1.kl).epsilon(1e-9));
  CHECK(l1.kl >= 0.0);
}

TEST_CASE("training loss gradient matches finite differences (width 8)") {
  auto wm = WorldModel<double>::create(width8_dims(), 19);
  Rng rng(9);
  const auto batch = random_batch<double>(wm.dims, 3, 2, rng);
  WmTrainConfig cfg;
  Rng pick(10);
  const auto res = testutil::wm_gradient_check(wm, batch, cfg, 77, 25, pick);
  CHECK(res.max_rel_error < 1e-4);
}

TEST_CASE("200 training steps reduce the smoothed loss on a fixed dataset") {
  RssmDims d = tiny_dims();
  auto wm = WorldModel<float>::create(d, 20);
  Rng rng(11);
  const auto batch = random_batch<float>(d, 6, 4, rng);
  WmTrainConfig cfg;
  Adam<float> opt(cfg.adam);
  std::vector<double> totals;
  for (int s = 0; s < 200; ++s) {
    const auto losses = wm_train_step(wm, opt, batch, cfg, 1000 + s);
    REQUIRE(losses.finite);
    CHECK(losses.kl >= 0.0);
    totals.push_back(losses.total);
  }
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 10; ++i) {
    first += totals[i];
    last += totals[totals.size() - 10 + i];
  }
  CHECK(last < first);
  CHECK(wm.params.all_finite());
}

TEST_CASE("checkpoint round trip reproduces forward outputs bit for bit") {
  const std::string path = "wm_roundtrip.ckpt";
  auto wm = WorldModel<float>::create(tiny_dims(), 21);
  Rng rng(12);
  // A couple of training steps so the params are not at init.
  const auto batch = random_batch<float>(wm.dims, 3, 2, rng);
  Adam<float> opt;
  wm_train_step(wm, opt, batch, WmTrainConfig{}, 3);
  wm.save(path);
  const auto back = WorldModel<float>::load(path);
  std::filesystem::remove(path);

  const auto obs = random_mat<float>(wm.dims.obs, 2, rng, 0.0, 1.0);
  CHECK(wm.encode(obs) == back.encode(obs));
  auto s = wm.initial(2);
  const auto act = random_mat<float>(wm.dims.action, 2, rng);
  const auto eps = wm.normal_matrix(wm.dims.stoch, 2, 9);
  const auto s1 = wm.posterior_step(s, act, wm.encode(obs), eps);
  const auto s2 = back.posterior_step(s, act, back.encode(obs), eps);
  CHECK(s1.h == s2.h);
  CHECK(s1.z == s2.z);
  CHECK(wm.decode_image(s1) == back.decode_image(s2));
  CHECK(wm.predict_change(s1) == back.predict_change(s2));
}

TEST_CASE("overfitting a static zero-change sequence drives predictions down") {
  RssmDims d = tiny_dims();
  auto wm = WorldModel<float>::create(d, 22);
  Rng rng(13);
  // One static sequence, zero change labels everywhere.
  WmBatch<float> batch;
  const auto frame = random_mat<float>(d.obs, 1, rng, 0.0, 1.0);
  for (int t = 0; t < 6; ++t) {
    batch.obs.push_back(frame);
    batch.act.push_back(Mat<float>::Zero(d.action, 1));
    batch.change.push_back(Mat<float>::Zero(d.change, 1));
  }
  WmTrainConfig cfg;
  Adam<float> opt(cfg.adam);
  for (int s = 0; s < 300; ++s) wm_train_step(wm, opt, batch, cfg, 2000 + s);

  // Filter the sequence and check the change head mean probability.
  auto s = wm.initial(1);
  double mean_prob = 0.0;
  for (int t = 0; t < 6; ++t) {
    const auto eps = Mat<float>::Zero(d.stoch, 1);
    s = wm.posterior_step(s, batch.act[t], wm.encode(batch.obs[t]), eps);
    mean_prob += wm.predict_change(s).mean();
  }
  mean_prob /= 6.0;
  CHECK(mean_prob < 0.05);
}

TEST_CASE("a non-finite loss rolls the update back") {
  auto wm = WorldModel<float>::create(tiny_dims(), 23);
  Rng rng(14);
  auto batch = random_batch<float>(wm.dims, 3, 2, rng);
  batch.obs[1](0, 0) = std::numeric_limits<float>::infinity();
  const auto before = wm.params.entries[0].w;
  Adam<float> opt;
  const auto losses = wm_train_step(wm, opt, batch, WmTrainConfig{}, 5);
  CHECK_FALSE(losses.finite);
  CHECK(!losses.diagnostic.empty());
  CHECK(wm.params.entries[0].w == before);
}
