#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "core/dataio.hpp"
#include "core/rng.hpp"

namespace puon {

// The three pools of the PU objective. Risk weights: pos_as_pos +pi_p
// (label 1), pos_as_neg -pi_p (label 0), unl_as_neg +1 (label 0).
struct TrainingSet {
  std::vector<Pair> pos_as_pos;
  std::vector<Pair> pos_as_neg;
  std::vector<Pair> unl_as_neg;
  double pi_p = 0.0;
};

struct PnTrainingSet {
  std::vector<Pair> positives;
  std::vector<Pair> negatives;
};

// Training positive density unless overridden; always in (0,1).
double estimate_class_prior(const AssociationMatrix& masked,
                            std::optional<double> override_value = {});

TrainingSet build_pu_training_set(const AssociationMatrix& masked,
                                  std::size_t unl_ratio, double pi_p,
                                  std::uint64_t seed);

PnTrainingSet build_pn_training_set(const AssociationMatrix& masked,
                                    std::size_t neg_ratio, std::uint64_t seed);

// Uniform sample of `count` distinct 0-entries, in draw order.
std::vector<Pair> sample_zero_entries(const AssociationMatrix& masked,
                                      std::size_t count, Rng& rng);

}  // namespace puon
