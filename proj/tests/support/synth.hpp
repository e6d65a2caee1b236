#pragma once

// Planted-structure datasets for tests and the end-to-end smoke runs.
// Drugs and diseases fall into clusters; each drug cluster treats a few
// disease clusters, and drug similarity is high inside a cluster. Drugs and
// diseases also carry log-normal popularity, so degrees are heavy-tailed as
// in curated association tables.

#include <cstdint>
#include <filesystem>
#include <string>

#include "core/dataio.hpp"

namespace puon::test {

struct SynthSpec {
  std::size_t n_drugs = 60;
  std::size_t n_diseases = 40;
  std::size_t clusters = 5;
  std::size_t links_per_cluster = 2;
  double density = 0.05;     // expected fraction of 1-entries
  double block_boost = 8.0;  // odds multiplier on planted blocks
  double popularity = 0.8;   // log-normal sigma of drug / disease weights
  std::uint64_t seed = 1;
};

struct SynthData {
  AssociationMatrix matrix;
  SimilarityMatrix drug_sim;
  SimilarityMatrix disease_sim;
};

SynthData make_synthetic(const SynthSpec& spec);

// Writes association.txt, drug_sim.txt, disease_sim.txt, drug_ids.txt,
// disease_ids.txt and config.json (relative paths) into dir. Returns the
// config path.
std::filesystem::path write_synthetic(const SynthData& data,
                                      const std::filesystem::path& dir,
                                      const std::string& extra_json = "{}");

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace puon::test
