#include "core/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "core/error.hpp"

namespace puon {

namespace {

void check_inputs(std::span<const double> scores,
                  std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size())
    fail(ErrorCode::kShape, "scores and labels differ in length");
}

std::size_t count_positive(std::span<const std::uint8_t> labels) {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](auto l) { return l != 0; }));
}

// Indices sorted by score descending; stable so equal scores keep input order.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return idx;
}

double f1_from_counts(double tp, double fp, double fn) {
  if (tp == 0.0) return 0.0;
  const double precision = tp / (tp + fp);
  const double recall = tp / (tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double auc(std::span<const double> scores,
           std::span<const std::uint8_t> labels) {
  check_inputs(scores, labels);
  const std::size_t n_pos = count_positive(labels);
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    fail(ErrorCode::kUndefinedMetric, "AUC needs both classes");

  // Walk score groups in ascending order; each positive beats every negative
  // in earlier groups and ties half of those in its own group.
  auto order = descending_order(scores);
  std::reverse(order.begin(), order.end());
  double wins = 0.0;
  std::size_t neg_below = 0;
  for (std::size_t a = 0; a < order.size();) {
    std::size_t b = a;
    std::size_t pos_here = 0, neg_here = 0;
    while (b < order.size() && scores[order[b]] == scores[order[a]]) {
      (labels[order[b]] ? pos_here : neg_here) += 1;
      ++b;
    }
    wins += static_cast<double>(pos_here) * static_cast<double>(neg_below) +
            0.5 * static_cast<double>(pos_here) * static_cast<double>(neg_here);
    neg_below += neg_here;
    a = b;
  }
  return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double aupr(std::span<const double> scores,
            std::span<const std::uint8_t> labels) {
  check_inputs(scores, labels);
  const std::size_t n_pos = count_positive(labels);
  if (n_pos == 0) fail(ErrorCode::kUndefinedMetric, "AUPR needs a positive");

  const auto order = descending_order(scores);
  double area = 0.0, prev_recall = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t a = 0; a < order.size();) {
    std::size_t b = a;
    while (b < order.size() && scores[order[b]] == scores[order[a]]) {
      tp += labels[order[b]] ? 1 : 0;
      ++b;
    }
    seen = b;
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision =
        static_cast<double>(tp) / static_cast<double>(seen);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    a = b;
  }
  return area;
}

double f1(std::span<const double> scores, std::span<const std::uint8_t> labels,
          double threshold) {
  check_inputs(scores, labels);
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t t = 0; t < scores.size(); ++t) {
    const bool predicted = scores[t] >= threshold;
    if (labels[t]) {
      (predicted ? tp : fn) += 1;
    } else if (predicted) {
      fp += 1;
    }
  }
  return f1_from_counts(tp, fp, fn);
}

double max_f1(std::span<const double> scores,
              std::span<const std::uint8_t> labels) {
  check_inputs(scores, labels);
  const double n_pos = static_cast<double>(count_positive(labels));
  const auto order = descending_order(scores);
  double best = 0.0, tp = 0.0, fp = 0.0;
  for (std::size_t a = 0; a < order.size();) {
    std::size_t b = a;
    while (b < order.size() && scores[order[b]] == scores[order[a]]) {
      (labels[order[b]] ? tp : fp) += 1;
      ++b;
    }
    best = std::max(best, f1_from_counts(tp, fp, n_pos - tp));
    a = b;
  }
  return best;
}

double hit_ratio_at_k(const Eigen::MatrixXd& scores,
                      const AssociationMatrix& masked,
                      std::span<const Pair> test_positives, std::size_t k,
                      bool strict) {
  if (k < 1) fail(ErrorCode::kConfig, "HR@K needs K >= 1");
  if (test_positives.empty())
    fail(ErrorCode::kUndefinedMetric, "HR@K needs at least one test pair");
  if (static_cast<std::size_t>(scores.rows()) != masked.n_drugs() ||
      static_cast<std::size_t>(scores.cols()) != masked.n_diseases())
    fail(ErrorCode::kShape, "score matrix does not match association matrix");

  std::size_t hits = 0;
  for (const Pair& q : test_positives) {
    const std::size_t i = q.drug, j = q.disease;
    const double s = scores(i, j);
    std::size_t candidates = 0, ahead = 0;
    for (std::size_t c = 0; c < masked.n_diseases(); ++c) {
      if (masked.at(i, c)) continue;
      ++candidates;
      const double v = scores(i, c);
      if (v > s || (v == s && c < j)) ++ahead;
    }
    if (strict && k > candidates)
      fail(ErrorCode::kConfig, "K = " + std::to_string(k) + " exceeds the " +
                                   std::to_string(candidates) +
                                   " candidate diseases of drug " +
                                   std::to_string(i));
    if (ahead < k) ++hits;
  }
  return static_cast<double>(hits) /
         static_cast<double>(test_positives.size());
}

MetricsReport evaluate_scores(const Eigen::MatrixXd& scores,
                              const AssociationMatrix& source,
                              const FoldSplit& fold, const EvalConfig& cfg) {
  std::vector<double> s;
  std::vector<std::uint8_t> labels;
  s.reserve(fold.test_positives.size() + source.zeros());
  labels.reserve(s.capacity());
  for (const Pair& q : fold.test_positives) {
    s.push_back(scores(q.drug, q.disease));
    labels.push_back(1);
  }
  for (std::size_t i = 0; i < source.n_drugs(); ++i)
    for (std::size_t j = 0; j < source.n_diseases(); ++j)
      if (!source.at(i, j)) {
        s.push_back(scores(i, j));
        labels.push_back(0);
      }

  MetricsReport rep;
  rep.n_test_pos = fold.test_positives.size();
  rep.n_test_neg = s.size() - rep.n_test_pos;
  rep.auc = auc(s, labels);
  rep.aupr = aupr(s, labels);
  rep.f1 = f1(s, labels, cfg.f1_threshold);
  rep.f1_max = max_f1(s, labels);
  for (std::size_t k : cfg.hr_ks)
    rep.hr[k] = hit_ratio_at_k(scores, fold.masked_matrix, fold.test_positives,
                               k, /*strict=*/false);
  return rep;
}

MetricsReport evaluate_fold(const ModelParams& params, const FoldSplit& fold,
                            const AssociationMatrix& source,
                            const SimilarityMatrix& drug_sim,
                            const EvalConfig& cfg) {
  const ModelContext ctx(fold.masked_matrix, drug_sim);
  return evaluate_scores(score_all(params, ctx), source, fold, cfg);
}

}  // namespace puon
