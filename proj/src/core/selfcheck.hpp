#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace puon {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Analytic gradients against central differences on random small models.
CheckResult check_gradients(std::size_t instances, std::uint64_t seed);
// (1 - pi) R_n^- == R_u^- - pi R_p^- on fully labeled populations.
CheckResult check_mixture_identity(std::size_t populations, std::uint64_t seed);
// trace(d s^T) == <d, s>; identity-weight flattened readout == inner product.
CheckResult check_outer_inner_identity(std::size_t trials, std::uint64_t seed);
// Label-0 pool sizes N_p + 10 N_p for the four benchmark fold sizes.
CheckResult check_sampling_counts();

std::vector<CheckResult> run_self_checks(std::uint64_t seed = 0);

}  // namespace puon
