#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "core/dataio.hpp"
#include "core/model.hpp"
#include "core/sampling.hpp"

namespace puon {

enum class Loss { kPu, kPn };
enum class Optimizer { kGradientDescent, kMomentum, kAdam };

std::string_view to_string(Loss l);
Loss parse_loss(std::string_view s);
std::string_view to_string(Optimizer o);
Optimizer parse_optimizer(std::string_view s);

struct TrainConfig {
  std::size_t h = 64;
  double learning_rate = 1e-3;
  std::size_t epochs = 1000;
  std::size_t patience = 50;  // epochs without training-risk improvement; 0 = off
  std::size_t unl_ratio = 10;  // also the negative ratio for the PN loss
  double alpha = 0.5;
  std::optional<double> pi_p_override;
  Readout readout = Readout::kBilinear;
  Loss loss = Loss::kPu;
  bool nn_correction = false;
  std::uint64_t seed = 0;
  double clamp_eps = 1e-7;
  Optimizer optimizer = Optimizer::kAdam;
  double momentum = 0.9;
  std::size_t batch_size = 0;  // 0 = full batch
  bool resample_each_epoch = false;

  void validate() const;
};

// total = term_pos_as_pos + term_pos_as_neg + term_unl_as_neg, except under
// nn_correction where the two negative-label terms enter as max(0, sum).
struct RiskValue {
  double total = 0.0;
  double term_pos_as_pos = 0.0;  // pi_p * R_p^+
  double term_pos_as_neg = 0.0;  // -pi_p * R_p^-
  double term_unl_as_neg = 0.0;  // R_u^-
};

struct Gradients {
  Eigen::MatrixXd W;
  Eigen::VectorXd b1;
  Eigen::MatrixXd V;
  Eigen::VectorXd b2;
  Eigen::VectorXd P;
  Eigen::VectorXd Q;
  Eigen::MatrixXd flat;
  double b = 0.0;

  static Gradients zeros_like(const ModelParams& p);
};

// Binary cross-entropy with the prediction clamped to [eps, 1-eps].
double cross_entropy(double pred, int label, double eps = 1e-7);

RiskValue pu_risk(std::span<const double> preds_pp,
                  std::span<const double> preds_pn,
                  std::span<const double> preds_u, double pi_p,
                  bool nn_correction, double eps = 1e-7);

// Mean cross-entropy over the union of both pools.
double pn_loss(std::span<const double> preds_pos,
               std::span<const double> preds_neg, double eps = 1e-7);

// One evaluation batch. For the PN loss `pos_as_pos` holds the positives,
// `unl_as_neg` the sampled negatives, and `pos_as_neg` stays empty.
struct Batch {
  std::span<const Pair> pos_as_pos;
  std::span<const Pair> pos_as_neg;
  std::span<const Pair> unl_as_neg;
  double pi_p = 0.0;
  Loss loss = Loss::kPu;
  bool nn_correction = false;
  double clamp_eps = 1e-7;
};

Batch make_batch(const TrainingSet& set, const TrainConfig& cfg);
Batch make_batch(const PnTrainingSet& set, const TrainConfig& cfg);

RiskValue compute_risk(const ModelParams& p, const ModelContext& ctx,
                       const Batch& batch);

// Reverse-mode gradients of the batch risk w.r.t. every trainable tensor.
std::pair<RiskValue, Gradients> compute_gradients(const ModelParams& p,
                                                  const ModelContext& ctx,
                                                  const Batch& batch);

struct TrainProblem {
  const AssociationMatrix& masked;
  const SimilarityMatrix& drug_sim;
  std::variant<TrainingSet, PnTrainingSet> pools;
};

struct TrainResult {
  ModelParams params;
  std::vector<RiskValue> history;  // risk at the start of each epoch
};

// `log`, when given, receives one tab-separated line per epoch.
TrainResult train(const TrainProblem& problem, const TrainConfig& cfg,
                  std::ostream* log = nullptr);

}  // namespace puon
