#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "core/dataio.hpp"
#include "core/model.hpp"

namespace puon {

struct MetricsReport {
  double auc = 0.0;
  double aupr = 0.0;
  double f1 = 0.0;      // at the configured threshold
  double f1_max = 0.0;  // best over all score thresholds
  std::map<std::size_t, double> hr;
  std::size_t n_test_pos = 0;
  std::size_t n_test_neg = 0;
};

struct EvalConfig {
  double f1_threshold = 0.5;
  std::vector<std::size_t> hr_ks = {10, 20, 30};
};

// Mann-Whitney statistic; ties count one half.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Step-wise area under the precision-recall curve, thresholds descending,
// tied scores entering together.
double aupr(std::span<const double> scores,
            std::span<const std::uint8_t> labels);

// Predicted positive iff score >= threshold. No predicted positives gives 0.
double f1(std::span<const double> scores, std::span<const std::uint8_t> labels,
          double threshold);
double max_f1(std::span<const double> scores,
              std::span<const std::uint8_t> labels);

// Fraction of test pairs (i, j) whose disease j lands in the top K of drug
// i's candidates: diseases not positive for i in `masked`, ranked by score
// descending, ties to the lower disease index. With `strict`, K larger than
// a drug's candidate count is an error; otherwise such a pair is a hit.
double hit_ratio_at_k(const Eigen::MatrixXd& scores,
                      const AssociationMatrix& masked,
                      std::span<const Pair> test_positives, std::size_t k,
                      bool strict = true);

// Test positives against every pair that is 0 in `source`.
MetricsReport evaluate_scores(const Eigen::MatrixXd& scores,
                              const AssociationMatrix& source,
                              const FoldSplit& fold, const EvalConfig& cfg);

MetricsReport evaluate_fold(const ModelParams& params, const FoldSplit& fold,
                            const AssociationMatrix& source,
                            const SimilarityMatrix& drug_sim,
                            const EvalConfig& cfg);

}  // namespace puon
