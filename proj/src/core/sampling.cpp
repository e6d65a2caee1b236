#include "core/sampling.hpp"

#include <string>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace puon {

double estimate_class_prior(const AssociationMatrix& masked,
                            std::optional<double> override_value) {
  if (override_value) {
    const double v = *override_value;
    if (!(v > 0.0 && v < 1.0))
      fail(ErrorCode::kConfig,
           "class prior override " + std::to_string(v) + " not in (0,1)");
    return v;
  }
  if (masked.zeros() == 0)
    fail(ErrorCode::kConfig, "class prior undefined: matrix has no 0-entries");
  return static_cast<double>(masked.ones()) /
         static_cast<double>(masked.n_drugs() * masked.n_diseases());
}

std::vector<Pair> sample_zero_entries(const AssociationMatrix& masked,
                                      std::size_t count, Rng& rng) {
  if (count > masked.zeros())
    fail(ErrorCode::kConfig, "requested " + std::to_string(count) +
                                 " unlabeled samples but only " +
                                 std::to_string(masked.zeros()) +
                                 " 0-entries exist");
  const auto& e = masked.entries();
  const std::size_t n = masked.n_diseases();
  std::vector<std::uint32_t> zero_idx;
  zero_idx.reserve(masked.zeros());
  for (std::size_t idx = 0; idx < e.size(); ++idx)
    if (!e[idx]) zero_idx.push_back(static_cast<std::uint32_t>(idx));

  // Partial Fisher-Yates: the first `count` slots become the sample.
  std::vector<Pair> out;
  out.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t pick = t + rng.below(zero_idx.size() - t);
    std::swap(zero_idx[t], zero_idx[pick]);
    const std::uint32_t idx = zero_idx[t];
    out.push_back({static_cast<std::uint32_t>(idx / n),
                   static_cast<std::uint32_t>(idx % n)});
  }
  return out;
}

TrainingSet build_pu_training_set(const AssociationMatrix& masked,
                                  std::size_t unl_ratio, double pi_p,
                                  std::uint64_t seed) {
  if (unl_ratio < 1) fail(ErrorCode::kConfig, "unl_ratio must be >= 1");
  if (!(pi_p > 0.0 && pi_p < 1.0))
    fail(ErrorCode::kConfig, "pi_p must lie in (0,1)");

  TrainingSet set;
  set.pi_p = pi_p;
  set.pos_as_pos = masked.positives();
  const std::size_t n_p = set.pos_as_pos.size();

  Rng rng(seed);
  set.pos_as_neg.reserve(n_p);
  for (std::size_t t = 0; t < n_p; ++t)
    set.pos_as_neg.push_back(set.pos_as_pos[rng.below(n_p)]);
  set.unl_as_neg = sample_zero_entries(masked, unl_ratio * n_p, rng);
  return set;
}

PnTrainingSet build_pn_training_set(const AssociationMatrix& masked,
                                    std::size_t neg_ratio, std::uint64_t seed) {
  if (neg_ratio < 1) fail(ErrorCode::kConfig, "neg_ratio must be >= 1");
  PnTrainingSet set;
  set.positives = masked.positives();
  Rng rng(seed);
  set.negatives =
      sample_zero_entries(masked, neg_ratio * set.positives.size(), rng);
  return set;
}

}  // namespace puon
