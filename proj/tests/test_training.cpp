#include <doctest.h>

#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "core/sampling.hpp"
#include "core/training.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace puon;

namespace {

struct Instance {
  test::SynthData data;
  ModelParams params;
  TrainingSet pu;
  PnTrainingSet pn;
};

Instance make_instance(std::size_t h, std::size_t m, std::size_t n,
                       Readout readout, std::uint64_t seed) {
  Instance inst{test::make_synthetic({.n_drugs = m, .n_diseases = n, .clusters = 2,
                                      .density = 0.25, .seed = seed}),
                {}, {}, {}};
  const auto& r = inst.data.matrix;
  inst.params = init_params(h, m, n, 0.5, seed + 1, readout);
  inst.params.b1.setConstant(0.3);
  inst.params.b2.setConstant(-0.2);
  inst.params.b = 0.1;
  const std::size_t ratio = std::max<std::size_t>(1, r.zeros() / r.ones() / 2);
  inst.pu = build_pu_training_set(r, ratio, estimate_class_prior(r), seed);
  inst.pn = build_pn_training_set(r, ratio, seed);
  return inst;
}

}  // namespace

TEST_CASE("cross entropy") {
  CHECK(cross_entropy(0.5, 1) == doctest::Approx(std::log(2.0)));
  CHECK(cross_entropy(0.9, 0) == doctest::Approx(2.302585093));
  CHECK(cross_entropy(1 - 1e-7, 1) == doctest::Approx(1e-7).epsilon(1e-3));
  CHECK(std::isfinite(cross_entropy(0.0, 1)));
  CHECK(std::isfinite(cross_entropy(1.0, 0)));
  CHECK(cross_entropy(0.0, 1) == doctest::Approx(-std::log(1e-7)));
}

TEST_CASE("PU risk values") {
  const std::vector<double> half(4, 0.5);
  const auto r = pu_risk(half, half, half, 0.3, false);
  CHECK(r.total == doctest::Approx(std::log(2.0)));

  const std::vector<double> u{0.1, 0.4, 0.7};
  const auto zero_prior = pu_risk(half, half, u, 0.0, false);
  CHECK(zero_prior.total ==
        doctest::Approx((-std::log(0.9) - std::log(0.6) - std::log(0.3)) / 3));

  const std::vector<double> pp{0.8}, pn{0.8}, uu{0.2};
  const auto hand = pu_risk(pp, pn, uu, 0.1, false);
  CHECK(hand.total == doctest::Approx(0.1 * -std::log(0.8) - 0.1 * -std::log(0.2) +
                                      -std::log(0.8)));
  CHECK(hand.total == doctest::Approx(hand.term_pos_as_pos + hand.term_pos_as_neg +
                                      hand.term_unl_as_neg).epsilon(1e-12));

  CHECK_THROWS_AS(pu_risk({}, pn, uu, 0.1, false), Error);
  CHECK_THROWS_AS(pu_risk(pp, pn, {}, 0.1, false), Error);
}

TEST_CASE("negative-class risk can go below zero without correction") {
  const std::vector<double> pp2{0.99}, pn2{0.99}, u2{0.01};
  const auto low = pu_risk(pp2, pn2, u2, 0.5, false);
  CHECK(low.term_pos_as_neg + low.term_unl_as_neg < 0);
  CHECK(pu_risk(pp2, pn2, u2, 0.5, true).total ==
        doctest::Approx(low.term_pos_as_pos));
}

TEST_CASE("PN loss") {
  const std::vector<double> half(3, 0.5);
  CHECK(pn_loss(half, half) == doctest::Approx(std::log(2.0)));
  const std::vector<double> pos{0.9}, neg{0.2, 0.4};
  CHECK(pn_loss(pos, neg) ==
        doctest::Approx((-std::log(0.9) - std::log(0.8) - std::log(0.6)) / 3));
  const std::vector<double> perfect_pos{1.0}, perfect_neg{0.0};
  CHECK(pn_loss(perfect_pos, perfect_neg) < 1e-6);
  CHECK_THROWS_AS(pn_loss({}, neg), Error);
}

TEST_CASE("batch risk matches the pair-by-pair oracle") {
  for (Readout readout : {Readout::kBilinear, Readout::kFlattened, Readout::kInnerProduct}) {
    const auto inst = make_instance(4, 6, 5, readout, 21);
    const ModelContext ctx(inst.data.matrix, inst.data.drug_sim);
    TrainConfig cfg;
    const auto pu = make_batch(inst.pu, cfg);
    CHECK(compute_risk(inst.params, ctx, pu).total ==
          doctest::Approx(test::naive_risk(inst.params, inst.data.matrix, inst.data.drug_sim, pu))
              .epsilon(1e-12));
    const auto pn = make_batch(inst.pn, cfg);
    CHECK(compute_risk(inst.params, ctx, pn).total ==
          doctest::Approx(test::naive_risk(inst.params, inst.data.matrix, inst.data.drug_sim, pn))
              .epsilon(1e-12));
  }
}

TEST_CASE("analytic gradients match central differences") {
  std::uint64_t seed = 100;
  for (Readout readout : {Readout::kBilinear, Readout::kFlattened, Readout::kInnerProduct})
    for (Loss loss : {Loss::kPu, Loss::kPn})
      for (bool nn : {false, true}) {
        CAPTURE(to_string(readout));
        CAPTURE(to_string(loss));
        CAPTURE(nn);
        const auto inst = make_instance(4, 6, 5, readout, seed++);
        const ModelContext ctx(inst.data.matrix, inst.data.drug_sim);
        TrainConfig cfg;
        cfg.nn_correction = nn;
        const Batch batch = loss == Loss::kPu ? make_batch(inst.pu, cfg)
                                              : make_batch(inst.pn, cfg);
        const auto [risk, analytic] = compute_gradients(inst.params, ctx, batch);
        const auto numeric = test::finite_difference_gradients(
            inst.params, inst.data.matrix, inst.data.drug_sim, batch, 1e-5);
        CHECK(test::max_relative_error(analytic, numeric) < 1e-4);
      }
}

TEST_CASE("zero readout: only the bias moves") {
  auto inst = make_instance(4, 6, 5, Readout::kBilinear, 5);
  inst.params.P.setZero();
  inst.params.Q.setZero();
  inst.params.b = 0.0;
  const ModelContext ctx(inst.data.matrix, inst.data.drug_sim);
  const auto batch = make_batch(inst.pn, TrainConfig{});
  const auto [risk, g] = compute_gradients(inst.params, ctx, batch);
  CHECK(g.W.isZero());
  CHECK(g.V.isZero());
  CHECK(g.b1.isZero());
  CHECK(g.b2.isZero());
  // Mean residual of a constant 0.5 prediction.
  const double np = static_cast<double>(inst.pn.positives.size());
  const double nn = static_cast<double>(inst.pn.negatives.size());
  CHECK(g.b == doctest::Approx((np * (0.5 - 1) + nn * 0.5) / (np + nn)).epsilon(1e-12));
}

TEST_CASE("duplicating every sample leaves gradients unchanged") {
  const auto inst = make_instance(4, 8, 6, Readout::kBilinear, 33);
  const ModelContext ctx(inst.data.matrix, inst.data.drug_sim);
  TrainingSet doubled = inst.pu;
  auto dup = [](std::vector<Pair>& v) { v.insert(v.end(), v.begin(), v.end()); };
  dup(doubled.pos_as_pos);
  dup(doubled.pos_as_neg);
  dup(doubled.unl_as_neg);
  const auto [r1, g1] = compute_gradients(inst.params, ctx, make_batch(inst.pu, TrainConfig{}));
  const auto [r2, g2] = compute_gradients(inst.params, ctx, make_batch(doubled, TrainConfig{}));
  CHECK(r1.total == doctest::Approx(r2.total).epsilon(1e-12));
  CHECK(test::max_relative_error(g1, g2) < 1e-12);
}

TEST_CASE("non-finite parameters are reported") {
  auto inst = make_instance(3, 6, 5, Readout::kBilinear, 8);
  inst.params.P(0) = std::nan("");
  const ModelContext ctx(inst.data.matrix, inst.data.drug_sim);
  try {
    compute_gradients(inst.params, ctx, make_batch(inst.pu, TrainConfig{}));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumeric);
  }
}

TEST_CASE("training") {
  const auto data = test::make_synthetic({.n_drugs = 30, .n_diseases = 20, .clusters = 3, .seed = 12});
  const auto& r = data.matrix;
  const auto pu = build_pu_training_set(r, 5, estimate_class_prior(r), 1);
  TrainConfig cfg;
  cfg.h = 8;
  cfg.seed = 4;

  SUBCASE("learning rate zero leaves the initial parameters") {
    cfg.learning_rate = 0;
    cfg.epochs = 1;
    for (Optimizer o : {Optimizer::kGradientDescent, Optimizer::kMomentum, Optimizer::kAdam}) {
      cfg.optimizer = o;
      const auto res = train({r, data.drug_sim, pu}, cfg);
      CHECK(res.params == init_params(8, r.n_drugs(), r.n_diseases(), cfg.alpha, cfg.seed, cfg.readout));
      CHECK(res.history.size() == 1);
    }
  }
  SUBCASE("deterministic") {
    cfg.epochs = 20;
    const auto a = train({r, data.drug_sim, pu}, cfg);
    const auto b = train({r, data.drug_sim, pu}, cfg);
    CHECK(a.params == b.params);
  }
  SUBCASE("log lines") {
    cfg.epochs = 3;
    cfg.patience = 0;
    std::ostringstream log;
    train({r, data.drug_sim, pu}, cfg, &log);
    std::istringstream in(log.str());
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
      CHECK(std::count(line.begin(), line.end(), '\t') == 4);
      ++lines;
    }
    CHECK(lines == 3);
  }
  SUBCASE("mini-batches and resampling run") {
    cfg.epochs = 5;
    cfg.unl_ratio = 5;
    cfg.batch_size = 64;
    cfg.resample_each_epoch = true;
    const auto res = train({r, data.drug_sim, pu}, cfg);
    CHECK(res.params.all_finite());
    const auto pn = build_pn_training_set(r, 5, 1);
    cfg.loss = Loss::kPn;
    CHECK(train({r, data.drug_sim, pn}, cfg).params.all_finite());
  }
  SUBCASE("early stopping") {
    cfg.learning_rate = 0;
    cfg.epochs = 100;
    cfg.patience = 5;
    CHECK(train({r, data.drug_sim, pu}, cfg).history.size() == 6);
  }
}

TEST_CASE("toy training risk mostly decreases") {
  const AssociationMatrix r(4, 4, {1, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 1});
  const SimilarityMatrix sim(4, {1, 0.8, 0.1, 0.1, 0.8, 1, 0.2, 0.1, 0.1, 0.2, 1, 0.7, 0.1, 0.1, 0.7, 1});
  const auto pu = build_pu_training_set(r, 1, estimate_class_prior(r), 2);
  TrainConfig cfg;
  cfg.h = 4;
  cfg.epochs = 200;
  cfg.patience = 0;
  cfg.learning_rate = 0.01;
  const auto res = train({r, sim, pu}, cfg);
  REQUIRE(res.history.size() == 200);
  int down = 0;
  for (std::size_t t = 1; t < res.history.size(); ++t)
    down += res.history[t].total < res.history[t - 1].total;
  CHECK(down >= 0.9 * 199);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.h = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.pi_p_override = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.learning_rate = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK(parse_loss("pn") == Loss::kPn);
  CHECK(parse_optimizer("gd") == Optimizer::kGradientDescent);
  CHECK_THROWS_AS(parse_loss("nnpu"), Error);
}
