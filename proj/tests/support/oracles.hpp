#pragma once

// Independent test-side reference computations. Nothing here calls the
// library's scoring, metric or risk code; only its data types are shared.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "core/dataio.hpp"
#include "core/model.hpp"
#include "core/training.hpp"

namespace puon::test {

// Pairwise count over every (positive, negative) pair, ties worth 1/2.
double brute_force_auc(std::span<const double> scores,
                       std::span<const std::uint8_t> labels);

// Enumerates every distinct score as a ">= t" threshold, highest first,
// and sums precision times recall increment.
double threshold_aupr(std::span<const double> scores,
                      std::span<const std::uint8_t> labels);

// Straight-line forward pass written out with scalar loops.
double naive_probability(const ModelParams& p, const AssociationMatrix& r,
                         const SimilarityMatrix& drug_sim, std::size_t i,
                         std::size_t j);

// Risk of a batch evaluated pair by pair through naive_probability.
double naive_risk(const ModelParams& p, const AssociationMatrix& r,
                  const SimilarityMatrix& drug_sim, const Batch& batch);

// Central differences of naive_risk over every trainable scalar, returned in
// the layout of Gradients.
Gradients finite_difference_gradients(const ModelParams& p,
                                      const AssociationMatrix& r,
                                      const SimilarityMatrix& drug_sim,
                                      const Batch& batch, double step);

// max over tensors of ||a - b|| / max(||a||, ||b||, 1e-7).
double max_relative_error(const Gradients& a, const Gradients& b);

}  // namespace puon::test
