#include "core/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>

#include "core/dataio.hpp"
#include "core/error.hpp"
#include "core/model.hpp"
#include "core/rng.hpp"
#include "core/sampling.hpp"
#include "core/training.hpp"

namespace puon {

namespace {

std::string format(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

AssociationMatrix random_matrix(std::size_t m, std::size_t n, double density,
                                Rng& rng) {
  std::vector<std::uint8_t> e(m * n, 0);
  for (auto& v : e) v = rng.uniform() < density ? 1 : 0;
  // At least one 1 and one 0, so both pools exist.
  const std::size_t one = rng.below(e.size());
  const std::size_t zero = (one + 1 + rng.below(e.size() - 1)) % e.size();
  e[one] = 1;
  e[zero] = 0;
  return AssociationMatrix(m, n, std::move(e));
}

SimilarityMatrix random_similarity(std::size_t dim, Rng& rng) {
  std::vector<double> e(dim * dim, 0.0);
  for (std::size_t a = 0; a < dim; ++a) {
    e[a * dim + a] = 1.0;
    for (std::size_t b = a + 1; b < dim; ++b)
      e[a * dim + b] = e[b * dim + a] = rng.uniform(0.0, 0.95);
  }
  return SimilarityMatrix(dim, std::move(e));
}

// Visits every trainable scalar of params together with its gradient slot.
void for_each_scalar(ModelParams& p, const Gradients& g,
                     const std::function<void(const char*, double&, double)>& fn) {
  auto visit = [&](const char* name, auto& t, const auto& gt) {
    for (Eigen::Index k = 0; k < t.size(); ++k) fn(name, t.data()[k], gt.data()[k]);
  };
  visit("W", p.W, g.W);
  visit("b1", p.b1, g.b1);
  visit("V", p.V, g.V);
  visit("b2", p.b2, g.b2);
  visit("P", p.P, g.P);
  visit("Q", p.Q, g.Q);
  visit("flat", p.flat, g.flat);
  fn("b", p.b, g.b);
}

}  // namespace

CheckResult check_gradients(std::size_t instances, std::uint64_t seed) {
  constexpr double kStep = 1e-5;
  constexpr double kTolerance = 1e-4;
  const std::size_t hs[] = {2, 4, 8};
  const Readout readouts[] = {Readout::kBilinear, Readout::kFlattened,
                              Readout::kInnerProduct};
  double worst = 0.0;
  Rng rng(seed);
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t m = 2 + rng.below(9), n = 2 + rng.below(9);
    const std::size_t h = hs[t % 3];
    const Readout readout = readouts[(t / 3) % 3];
    const Loss loss = (t / 9) % 2 ? Loss::kPn : Loss::kPu;

    // Redraw until ratio 1 is feasible.
    AssociationMatrix r = random_matrix(m, n, 0.3, rng);
    while (r.zeros() < r.ones()) r = random_matrix(m, n, 0.3, rng);
    const SimilarityMatrix sim = random_similarity(m, rng);
    ModelParams p = init_params(h, m, n, rng.uniform(0.0, 1.0), rng.next(), readout);
    for (Eigen::Index k = 0; k < p.b1.size(); ++k) p.b1(k) = rng.uniform(-1, 1);
    for (Eigen::Index k = 0; k < p.b2.size(); ++k) p.b2(k) = rng.uniform(-1, 1);
    p.b = rng.uniform(-1, 1);

    TrainConfig cfg;
    const std::size_t ratio = std::max<std::size_t>(1, r.zeros() / r.ones() / 2);
    const auto batch_seed = rng.next();
    TrainingSet pu;
    PnTrainingSet pn;
    Batch batch;
    if (loss == Loss::kPu) {
      pu = build_pu_training_set(r, ratio, estimate_class_prior(r), batch_seed);
      batch = make_batch(pu, cfg);
    } else {
      pn = build_pn_training_set(r, ratio, batch_seed);
      batch = make_batch(pn, cfg);
    }
    const ModelContext ctx(r, sim);
    const auto [risk, analytic] = compute_gradients(p, ctx, batch);

    struct Acc { double diff2 = 0, a2 = 0, n2 = 0; };
    std::map<std::string, Acc> acc;
    ModelParams probe = p;
    for_each_scalar(probe, analytic, [&](const char* name, double& w, double g) {
      const double saved = w;
      w = saved + kStep;
      const double up = compute_risk(probe, ctx, batch).total;
      w = saved - kStep;
      const double down = compute_risk(probe, ctx, batch).total;
      w = saved;
      const double numeric = (up - down) / (2 * kStep);
      auto& a = acc[name];
      a.diff2 += (g - numeric) * (g - numeric);
      a.a2 += g * g;
      a.n2 += numeric * numeric;
    });
    for (const auto& [name, a] : acc) {
      const double denom = std::max({std::sqrt(a.a2), std::sqrt(a.n2), 1e-7});
      worst = std::max(worst, std::sqrt(a.diff2) / denom);
    }
  }
  return {"gradient finite-difference agreement", worst < kTolerance,
          format("max relative error %.3e over %.0f instances (tolerance 1e-4)",
                 worst, static_cast<double>(instances))};
}

CheckResult check_mixture_identity(std::size_t populations, std::uint64_t seed) {
  double worst = 0.0;
  Rng rng(seed);
  for (std::size_t t = 0; t < populations; ++t) {
    const std::size_t m = 3 + rng.below(8), n = 3 + rng.below(8);
    const AssociationMatrix labels = random_matrix(m, n, 0.2 + 0.5 * rng.uniform(), rng);
    const SimilarityMatrix sim = random_similarity(m, rng);
    const ModelParams p = init_params(4, m, n, 0.5, rng.next(), Readout::kBilinear);

    // Population = every pair; expectations are exact means over it.
    double sum_pos = 0, sum_neg = 0;
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double loss0 = cross_entropy(predict(p, labels, sim, i, j), 0);
        if (labels.at(i, j)) { sum_pos += loss0; ++n_pos; }
        else { sum_neg += loss0; ++n_neg; }
      }
    const double size = static_cast<double>(m * n);
    const double pi = static_cast<double>(n_pos) / size;
    const double direct = (1 - pi) * (sum_neg / static_cast<double>(n_neg));
    const double pu_style = (sum_pos + sum_neg) / size - pi * (sum_pos / static_cast<double>(n_pos));
    worst = std::max(worst, std::abs(direct - pu_style));
  }
  return {"mixture identity (1-pi) R_n^- = R_u^- - pi R_p^-", worst <= 1e-12,
          format("max abs difference %.3e over %.0f populations (tolerance 1e-12)",
                 worst, static_cast<double>(populations))};
}

CheckResult check_outer_inner_identity(std::size_t trials, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t h = 1 + rng.below(64);
    Eigen::VectorXd d(h), s(h);
    for (std::size_t a = 0; a < h; ++a) {
      d(a) = rng.uniform(-1, 1);
      s(a) = rng.uniform(-1, 1);
    }
    worst = std::max(worst, std::abs(outer_product(d, s).trace() - d.dot(s)));
  }

  bool flat_exact = true;
  for (std::size_t t = 0; t < 20 && flat_exact; ++t) {
    const std::size_t m = 2 + rng.below(6), n = 2 + rng.below(6), h = 1 + rng.below(8);
    const AssociationMatrix r = random_matrix(m, n, 0.4, rng);
    const SimilarityMatrix sim = random_similarity(m, rng);
    ModelParams p = init_params(h, m, n, 0.0, rng.next(), Readout::kFlattened);
    p.flat = Eigen::MatrixXd::Identity(h, h);
    p.b = rng.uniform(-1, 1);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        flat_exact &= predict(p, r, sim, i, j) == predict_mf(p, r, i, j);
  }
  return {"outer/inner diagonal identity", worst <= 1e-10 && flat_exact,
          format("max |trace - dot| %.3e over %.0f pairs; identity-weight flattened readout ",
                 worst, static_cast<double>(trials)) +
              (flat_exact ? "matches inner product exactly" : "DIFFERS from inner product")};
}

CheckResult check_sampling_counts() {
  struct Row { const char* name; std::size_t m, n, n_p, expected; };
  // Per-fold positives and label-0 totals of the four benchmarks. Ldataset's
  // own 598x269 grid holds fewer zeros than 10 N_p, so it gets wider rows.
  const Row rows[] = {{"Gottlieb", 593, 313, 1740, 19140},
                      {"Cdataset", 663, 409, 2279, 25069},
                      {"DNdataset", 1490, 4516, 908, 9988},
                      {"Ldataset", 598, 400, 16575, 182325}};
  bool ok = true;
  std::string detail;
  for (const Row& row : rows) {
    Rng rng(row.n_p);
    std::vector<std::uint8_t> e(row.m * row.n, 0);
    std::size_t placed = 0;
    while (placed < row.n_p) {
      auto& v = e[rng.below(e.size())];
      if (!v) { v = 1; ++placed; }
    }
    const AssociationMatrix r(row.m, row.n, std::move(e));
    const TrainingSet set = build_pu_training_set(r, 10, estimate_class_prior(r), 7);
    const std::size_t total = set.pos_as_neg.size() + set.unl_as_neg.size();
    ok &= total == row.expected && set.pos_as_pos.size() == row.n_p;
    detail += std::string(detail.empty() ? "" : ", ") + row.name + " " +
              std::to_string(total) + "/" + std::to_string(row.expected);
  }
  return {"training pool sizes", ok, detail};
}

std::vector<CheckResult> run_self_checks(std::uint64_t seed) {
  return {check_gradients(100, seed), check_mixture_identity(20, seed),
          check_outer_inner_identity(1000, seed), check_sampling_counts()};
}

}  // namespace puon
