#include <doctest.h>

#include <cmath>

#include "core/error.hpp"
#include "core/metrics.hpp"
#include "core/rng.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace puon;

namespace {

using Labels = std::vector<std::uint8_t>;

// Scores on a coarse grid so ties are common.
void random_instance(Rng& rng, std::size_t size, std::vector<double>& s, Labels& l) {
  s.resize(size);
  l.resize(size);
  for (std::size_t t = 0; t < size; ++t) {
    s[t] = std::floor(rng.uniform() * 20) / 20;
    l[t] = rng.uniform() < 0.3;
  }
  l[0] = 1;
  l[1] = 0;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("AUC") {
  CHECK(auc(std::vector{0.9, 0.8, 0.1}, Labels{1, 1, 0}) == 1.0);
  CHECK(auc(std::vector{0.4, 0.4, 0.4, 0.4}, Labels{1, 0, 1, 0}) == 0.5);
  CHECK(code_of([] { auc(std::vector{0.1, 0.2}, Labels{1, 1}); }) ==
        ErrorCode::kUndefinedMetric);

  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> s;
    Labels l;
    random_instance(rng, 2 + rng.below(199), s, l);
    CHECK(auc(s, l) == test::brute_force_auc(s, l));
  }
}

TEST_CASE("AUC is invariant under monotone transforms") {
  Rng rng(2);
  std::vector<double> s;
  Labels l;
  random_instance(rng, 120, s, l);
  std::vector<double> t(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) t[k] = std::exp(3 * s[k]) - 7;
  CHECK(auc(s, l) == auc(t, l));
  CHECK(aupr(s, l) == aupr(t, l));
}

TEST_CASE("AUPR") {
  CHECK(aupr(std::vector{0.9, 0.8, 0.1}, Labels{1, 1, 0}) == 1.0);
  CHECK(aupr(std::vector{0.9, 0.8, 0.7, 0.1}, Labels{0, 0, 0, 1}) ==
        doctest::Approx(0.25));
  CHECK(code_of([] { aupr(std::vector{0.1}, Labels{0}); }) ==
        ErrorCode::kUndefinedMetric);

  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> s;
    Labels l;
    random_instance(rng, 2 + rng.below(199), s, l);
    CHECK(std::abs(aupr(s, l) - test::threshold_aupr(s, l)) <= 1e-12);
  }
}

TEST_CASE("F1") {
  CHECK(f1(std::vector{0.9, 0.8, 0.1}, Labels{1, 1, 0}, 0.5) == 1.0);
  CHECK(f1(std::vector{0.2, 0.3, 0.1}, Labels{1, 1, 0}, 0.5) == 0.0);
  // TP 2, FP 1, FN 1.
  CHECK(f1(std::vector{0.9, 0.8, 0.7, 0.1}, Labels{1, 1, 0, 1}, 0.5) ==
        doctest::Approx(2.0 / 3.0));
  CHECK(max_f1(std::vector{0.9, 0.8, 0.7, 0.1}, Labels{1, 1, 0, 1}) ==
        doctest::Approx(6.0 / 7.0));
}

TEST_CASE("hit ratio on a three-disease toy") {
  const AssociationMatrix masked(2, 3, {0, 0, 0, 1, 0, 0});
  Eigen::MatrixXd scores(2, 3);
  scores << 0.9, 0.5, 0.5, 0.99, 0.7, 0.8;
  // Drug 0 ranks 0, 1, 2 (1 before 2 on the tie); drug 1 ranks 2, 1.
  const std::vector<Pair> test{{0, 1}, {1, 2}};
  CHECK(hit_ratio_at_k(scores, masked, test, 1) == 0.5);
  CHECK(hit_ratio_at_k(scores, masked, test, 2) == 1.0);
  CHECK(code_of([&] { hit_ratio_at_k(scores, masked, test, 3); }) == ErrorCode::kConfig);
  CHECK(hit_ratio_at_k(scores, masked, test, 3, false) == 1.0);
  CHECK(code_of([&] { hit_ratio_at_k(scores, masked, test, 0); }) == ErrorCode::kConfig);

  const std::vector<Pair> first{{0, 0}};
  CHECK(hit_ratio_at_k(scores, masked, first, 1) == 1.0);
}

TEST_CASE("hit ratio with K = n is one") {
  const AssociationMatrix masked(2, 4, {0, 0, 0, 0, 1, 0, 0, 0});
  Eigen::MatrixXd scores(2, 4);
  scores << 0.1, 0.2, 0.3, 0.4, 0, 0, 0, 0;
  const std::vector<Pair> test{{0, 0}};
  CHECK(hit_ratio_at_k(scores, masked, test, 4) == 1.0);
  CHECK(hit_ratio_at_k(scores, masked, test, 3) == 0.0);
}

TEST_CASE("perfect scorer") {
  const auto data = test::make_synthetic({.seed = 8});
  const auto folds = kfold_split(data.matrix, 5, 1);
  const auto& fold = folds[0];
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(data.matrix.n_drugs(), data.matrix.n_diseases());
  for (const Pair& q : fold.test_positives) scores(q.drug, q.disease) = 1;
  const auto rep = evaluate_scores(scores, data.matrix, fold, {});
  CHECK(rep.auc == 1.0);
  CHECK(rep.aupr == 1.0);
  CHECK(rep.f1 == 1.0);
  CHECK(rep.hr.at(10) == 1.0);
  CHECK(rep.n_test_pos == fold.test_positives.size());
  CHECK(rep.n_test_neg == data.matrix.zeros());
}

TEST_CASE("random scorer sits near one half") {
  const auto data = test::make_synthetic({.n_drugs = 40, .n_diseases = 30, .seed = 9});
  const auto fold = kfold_split(data.matrix, 5, 2)[0];
  double total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Eigen::MatrixXd scores(40, 30);
    for (Eigen::Index k = 0; k < scores.size(); ++k) scores.data()[k] = rng.uniform();
    const auto rep = evaluate_scores(scores, data.matrix, fold, {});
    total += rep.auc;
    CHECK(rep.hr.at(10) <= rep.hr.at(20));
    CHECK(rep.hr.at(20) <= rep.hr.at(30));
  }
  CHECK(std::abs(total / 20 - 0.5) <= 0.1);
}
