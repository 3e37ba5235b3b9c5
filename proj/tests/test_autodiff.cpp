#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "dqrb/autodiff.hpp"
#include "gradcheck.hpp"

namespace ad = dqrb::ad;
using dqrb::Rng;
using testutil::check_gradients;
using testutil::randm;

TEST_CASE("gradients match central differences for every op") {
  Rng rng(20240601);
  ad::Mat a0 = randm(rng, 3, 4), b0 = randm(rng, 3, 4);
  ad::Mat w0 = randm(rng, 2, 3), bias0 = randm(rng, 2, 1);
  ad::Mat qa0 = randm(rng, 4, 5), qb0 = randm(rng, 4, 5);
  ad::Mat target = randm(rng, 2, 4);

  SUBCASE("matmul, add_bias, tanh, mse") {
    check_gradients(
        [&](const std::vector<ad::Tensor>& p) {
          auto y = ad::tanh(ad::add_bias(ad::matmul(p[0], p[1]), p[2]));
          return ad::mse(y, target);
        },
        {ad::param(w0, "w"), ad::param(a0, "a"), ad::param(bias0, "b")});
  }

  SUBCASE("add, sub, scale, hadamard") {
    check_gradients(
        [&](const std::vector<ad::Tensor>& p) {
          auto y = ad::hadamard(ad::add(p[0], p[1]), ad::scale(ad::sub(p[0], p[1]), 0.7));
          return ad::mse(y, ad::Mat::Zero(3, 4));
        },
        {ad::param(a0, "a"), ad::param(b0, "b")});
  }

  SUBCASE("concat_rows and slice_rows") {
    check_gradients(
        [&](const std::vector<ad::Tensor>& p) {
          auto cat = ad::concat_rows({p[0], p[1]});
          auto y = ad::hadamard(ad::slice_rows(cat, 1, 3), ad::slice_rows(cat, 2, 3));
          return ad::mse(y, ad::Mat::Zero(3, 4));
        },
        {ad::param(a0, "a"), ad::param(b0, "b")});
  }

  SUBCASE("tanhshrink") {
    check_gradients(
        [&](const std::vector<ad::Tensor>& p) {
          return ad::mse(ad::tanhshrink(p[0]), target.replicate(1, 1).topRows(2));
        },
        {ad::param(randm(rng, 2, 4, -2.0, 2.0), "a")});
  }

  SUBCASE("relu away from the kink") {
    ad::Mat x = randm(rng, 3, 4);
    for (long j = 0; j < 4; ++j)
      for (long i = 0; i < 3; ++i)
        if (std::abs(x(i, j)) < 0.05) x(i, j) = 0.1;
    check_gradients(
        [&](const std::vector<ad::Tensor>& p) {
          return ad::mse(ad::relu(p[0]), ad::Mat::Zero(3, 4));
        },
        {ad::param(x, "a")});
  }

  SUBCASE("sigmoid and softmax") {
    check_gradients(
        [&](const std::vector<ad::Tensor>& p) {
          auto y = ad::hadamard(ad::softmax(p[0]), ad::sigmoid(p[1]));
          return ad::mse(y, ad::Mat::Zero(3, 4));
        },
        {ad::param(a0, "a"), ad::param(b0, "b")});
  }

  SUBCASE("quatmul and quatconj") {
    check_gradients(
        [&](const std::vector<ad::Tensor>& p) {
          auto y = ad::quatmul(ad::quatmul(p[0], ad::quatconj(p[1])), p[0]);
          return ad::mse(y, ad::Mat::Zero(4, 5));
        },
        {ad::param(qa0, "a"), ad::param(qb0, "b")});
  }

  SUBCASE("colsum, sqrt_eltwise, div_colbcast, mul_colbcast") {
    check_gradients(
        [&](const std::vector<ad::Tensor>& p) {
          auto sq = ad::hadamard(p[0], p[0]);
          auto n = ad::sqrt_eltwise(ad::colsum(sq), 1e-12);
          auto unit = ad::div_colbcast(p[0], n);
          auto back = ad::mul_colbcast(unit, n);
          return ad::add(ad::mse(unit, ad::Mat::Zero(4, 5)),
                         ad::mse(back, ad::Mat::Zero(4, 5)));
        },
        {ad::param(qa0, "a")});
  }

  SUBCASE("cross_entropy from logits") {
    std::vector<int> targets = {2, 0, 4, 1};
    check_gradients(
        [&](const std::vector<ad::Tensor>& p) {
          return ad::cross_entropy(ad::matmul(p[0], p[1]), targets);
        },
        {ad::param(randm(rng, 5, 3), "w"), ad::param(randm(rng, 3, 4), "x")});
  }

  SUBCASE("binary_cross_entropy from logits") {
    std::vector<double> targets = {1.0, 0.0, 1.0, 0.0, 1.0};
    check_gradients(
        [&](const std::vector<ad::Tensor>& p) {
          return ad::binary_cross_entropy(ad::matmul(p[0], p[1]), targets);
        },
        {ad::param(randm(rng, 1, 3), "w"), ad::param(randm(rng, 3, 5), "x")});
  }

  SUBCASE("dropout with a replayed mask") {
    check_gradients(
        [&](const std::vector<ad::Tensor>& p) {
          Rng mask_rng(7);  // same seed per rebuild keeps the mask fixed
          auto y = ad::dropout(p[0], 0.3, true, mask_rng);
          return ad::mse(y, ad::Mat::Zero(3, 4));
        },
        {ad::param(a0, "a")});
  }

  SUBCASE("shared subexpression used twice") {
    check_gradients(
        [&](const std::vector<ad::Tensor>& p) {
          auto t = ad::tanh(p[0]);
          return ad::mse(ad::hadamard(t, t), ad::Mat::Zero(3, 4));
        },
        {ad::param(a0, "a")});
  }
}

TEST_CASE("cross_entropy of uniform logits is log K and softmax columns sum to 1") {
  auto logits = ad::constant(ad::Mat::Zero(7, 3));
  auto loss = ad::cross_entropy(logits, {0, 3, 6});
  CHECK(std::abs(loss.value()(0, 0) - std::log(7.0)) < 1e-12);

  Rng rng(5);
  auto s = ad::softmax(ad::constant(randm(rng, 6, 9, -30.0, 30.0)));
  for (long j = 0; j < 9; ++j) {
    CHECK(std::abs(s.value().col(j).sum() - 1.0) < 1e-12);
    CHECK(s.value().col(j).minCoeff() >= 0.0);
  }

  // Saturated logits stay finite thanks to the fused log-softmax.
  ad::Mat big = ad::Mat::Zero(3, 1);
  big(0, 0) = 1000.0;
  auto l2 = ad::cross_entropy(ad::constant(big), {1});
  CHECK(std::isfinite(l2.value()(0, 0)));
  CHECK(l2.value()(0, 0) > 900.0);
}

TEST_CASE("sgd converges on a quadratic bowl") {
  Rng rng(99);
  ad::Mat target = randm(rng, 2, 2);
  auto w = ad::param(randm(rng, 2, 2), "w");
  ad::Sgd opt{{w}, {.lr = 0.1}};
  double loss_val = 1.0;
  for (int epoch = 0; epoch < 200; ++epoch) {
    opt.zero_grad();
    auto loss = ad::mse(w, target);
    ad::backward(loss);
    opt.step(epoch);
    loss_val = loss.value()(0, 0);
  }
  CHECK(loss_val < 1e-6);
}

TEST_CASE("dropout keeps the expectation and respects eval mode") {
  Rng rng(123);
  auto x = ad::constant(ad::Mat::Ones(1, 100000));
  auto y = ad::dropout(x, 0.3, true, rng);
  double mean = y.value().mean();
  CHECK(std::abs(mean - 1.0) < 0.01);
  // Kept entries are exactly scaled by 1/(1-p).
  for (long j = 0; j < 100; ++j) {
    double v = y.value()(0, j);
    CHECK((v == 0.0 || std::abs(v - 1.0 / 0.7) < 1e-15));
  }

  Rng rng2(123);
  auto z = ad::dropout(x, 0.3, false, rng2);
  CHECK((z.value() - x.value()).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(ad::dropout(x, 1.0, true, rng2), dqrb::ConfigError);
  CHECK_THROWS_AS(ad::dropout(x, -0.1, true, rng2), dqrb::ConfigError);
}

TEST_CASE("learning-rate schedules are positive and non-increasing") {
  ad::Sgd none{{}, {.lr = 0.05, .schedule = ad::Schedule::kNone}};
  ad::Sgd expo{{}, {.lr = 0.05, .schedule = ad::Schedule::kExponential, .gamma = 0.9995}};
  ad::Sgd step{{}, {.lr = 0.05, .schedule = ad::Schedule::kStep, .step_every = 1000,
                    .step_factor = 0.5}};
  double prev_n = 1e30, prev_e = 1e30, prev_s = 1e30;
  for (int epoch = 0; epoch < 5000; ++epoch) {
    double ln = none.lr_at(epoch), le = expo.lr_at(epoch), ls = step.lr_at(epoch);
    CHECK(ln > 0.0);
    CHECK(le > 0.0);
    CHECK(ls > 0.0);
    CHECK(ln <= prev_n);
    CHECK(le <= prev_e);
    CHECK(ls <= prev_s);
    prev_n = ln;
    prev_e = le;
    prev_s = ls;
  }
  CHECK(none.lr_at(4999) == 0.05);
  CHECK(std::abs(expo.lr_at(1) - 0.05 * 0.9995) < 1e-15);
  CHECK(std::abs(step.lr_at(999) - 0.05) < 1e-15);
  CHECK(std::abs(step.lr_at(1000) - 0.025) < 1e-15);
  CHECK(std::abs(step.lr_at(2500) - 0.0125) < 1e-15);
}

TEST_CASE("training is bit-identical for a fixed seed") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    auto w = ad::param(randm(rng, 4, 4), "w");
    auto b = ad::param(randm(rng, 4, 1), "b");
    ad::Mat x = randm(rng, 4, 16);
    std::vector<int> targets;
    for (int j = 0; j < 16; ++j) targets.push_back(static_cast<int>(rng.uniform() * 4));
    ad::Sgd opt{{w, b}, {.lr = 0.05, .schedule = ad::Schedule::kExponential}};
    for (int epoch = 0; epoch < 50; ++epoch) {
      opt.zero_grad();
      auto h = ad::dropout(ad::tanh(ad::add_bias(ad::matmul(w, ad::constant(x)), b)), 0.2,
                           true, rng);
      ad::backward(ad::cross_entropy(h, targets));
      opt.step(epoch);
    }
    return std::make_pair(w.value(), b.value());
  };
  auto [w1, b1] = run(42);
  auto [w2, b2] = run(42);
  CHECK((w1 - w2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((b1 - b2).cwiseAbs().maxCoeff() == 0.0);
  auto [w3, b3] = run(43);
  CHECK((w1 - w3).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("parameter gradients accumulate across backward calls until zeroed") {
  auto w = ad::param(ad::Mat::Ones(2, 2), "w");
  ad::Sgd opt{{w}, {}};
  opt.zero_grad();
  ad::backward(ad::mse(w, ad::Mat::Zero(2, 2)));
  ad::Mat once = w.grad();
  ad::backward(ad::mse(w, ad::Mat::Zero(2, 2)));
  CHECK((w.grad() - 2.0 * once).cwiseAbs().maxCoeff() < 1e-15);
  opt.zero_grad();
  CHECK(w.grad().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("shape violations throw") {
  auto a = ad::constant(ad::Mat::Zero(2, 3));
  auto b = ad::constant(ad::Mat::Zero(2, 3));
  auto q = ad::constant(ad::Mat::Zero(4, 3));
  CHECK_THROWS_AS(ad::matmul(a, b), dqrb::ShapeError);
  CHECK_THROWS_AS(ad::add(a, ad::constant(ad::Mat::Zero(3, 2))), dqrb::ShapeError);
  CHECK_THROWS_AS(ad::add_bias(a, ad::constant(ad::Mat::Zero(3, 1))), dqrb::ShapeError);
  CHECK_THROWS_AS(ad::slice_rows(a, 1, 3), dqrb::ShapeError);
  CHECK_THROWS_AS(ad::quatmul(a, a), dqrb::ShapeError);
  CHECK_THROWS_AS(ad::quatconj(a), dqrb::ShapeError);
  CHECK_THROWS_AS(ad::div_colbcast(a, ad::constant(ad::Mat::Zero(1, 2))), dqrb::ShapeError);
  CHECK_THROWS_AS(ad::concat_rows({a, ad::constant(ad::Mat::Zero(2, 2))}), dqrb::ShapeError);
  CHECK_THROWS_AS(ad::cross_entropy(a, {0, 1}), dqrb::ShapeError);
  CHECK_THROWS_AS(ad::cross_entropy(a, {0, 1, 5}), dqrb::ShapeError);
  CHECK_THROWS_AS(ad::binary_cross_entropy(q, {0.0, 1.0, 0.0}), dqrb::ShapeError);
  CHECK_THROWS_AS(ad::mse(a, ad::Mat::Zero(2, 2)), dqrb::ShapeError);
  CHECK_THROWS_AS(ad::backward(a), dqrb::ShapeError);
}

TEST_CASE("checkpoints roundtrip and reject mismatched metadata") {
  Rng rng(7);
  auto w = ad::param(randm(rng, 3, 5), "layer0.w");
  auto b = ad::param(randm(rng, 3, 1), "layer0.b");
  std::vector<ad::Tensor> params = {w, b};
  std::string text = ad::checkpoint_to_json(params, "demo");

  auto w2 = ad::param(ad::Mat::Zero(3, 5), "layer0.w");
  auto b2 = ad::param(ad::Mat::Zero(3, 1), "layer0.b");
  std::vector<ad::Tensor> loaded = {w2, b2};
  ad::checkpoint_from_json(text, "demo", loaded);
  CHECK((w2.value() - w.value()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((b2.value() - b.value()).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(ad::checkpoint_from_json(text, "other", loaded), dqrb::SchemaError);
  CHECK_THROWS_AS(ad::checkpoint_from_json("{not json", "demo", loaded), dqrb::SchemaError);

  std::string tampered = text;
  auto pos = tampered.find("\"version\":1");
  REQUIRE(pos != std::string::npos);
  tampered.replace(pos, 11, "\"version\":9");
  CHECK_THROWS_AS(ad::checkpoint_from_json(tampered, "demo", loaded), dqrb::SchemaError);

  auto wbad = ad::param(ad::Mat::Zero(5, 3), "layer0.w");
  std::vector<ad::Tensor> bad = {wbad, b2};
  CHECK_THROWS_AS(ad::checkpoint_from_json(text, "demo", bad), dqrb::ShapeError);

  auto stray = ad::param(ad::Mat::Zero(3, 5), "layer1.w");
  std::vector<ad::Tensor> renamed = {stray, b2};
  CHECK_THROWS_AS(ad::checkpoint_from_json(text, "demo", renamed), dqrb::SchemaError);
}
