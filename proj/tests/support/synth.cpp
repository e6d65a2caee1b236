#include "support/synth.hpp"

#include <unistd.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "core/rng.hpp"

namespace puon::test {

namespace fs = std::filesystem;

SynthData make_synthetic(const SynthSpec& spec) {
  Rng rng(spec.seed);
  const std::size_t m = spec.n_drugs, n = spec.n_diseases, c = spec.clusters;
  std::vector<std::size_t> drug_cluster(m), disease_cluster(n);
  for (auto& a : drug_cluster) a = rng.below(c);
  for (auto& b : disease_cluster) b = rng.below(c);

  std::vector<std::uint8_t> linked(c * c, 0);
  for (std::size_t a = 0; a < c; ++a)
    for (std::size_t t = 0; t < spec.links_per_cluster; ++t)
      linked[a * c + (a + t) % c] = 1;

  auto lognormal = [&] {
    // Box-Muller; uniform() can return 0, so flip it into (0, 1].
    const double u = 1.0 - rng.uniform(), v = rng.uniform();
    return std::exp(spec.popularity * std::sqrt(-2 * std::log(u)) *
                    std::cos(2 * M_PI * v));
  };
  std::vector<double> drug_w(m), disease_w(n);
  for (auto& w : drug_w) w = lognormal();
  for (auto& w : disease_w) w = lognormal();

  std::vector<double> weight(m * n);
  double total = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const bool on = linked[drug_cluster[i] * c + disease_cluster[j]];
      weight[i * n + j] = drug_w[i] * disease_w[j] * (on ? spec.block_boost : 1.0);
      total += weight[i * n + j];
    }
  const double scale = spec.density * static_cast<double>(m * n) / total;

  std::vector<std::uint8_t> e(m * n, 0);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t row = 0;
    for (std::size_t j = 0; j < n; ++j) {
      e[i * n + j] = rng.uniform() < std::min(1.0, scale * weight[i * n + j]);
      row += e[i * n + j];
    }
    if (row == 0) {
      // Every drug keeps at least one indication; pick it by weight.
      double pick = rng.uniform() * std::accumulate(weight.begin() + i * n,
                                                    weight.begin() + (i + 1) * n, 0.0);
      std::size_t j = 0;
      while (j + 1 < n && (pick -= weight[i * n + j]) > 0) ++j;
      e[i * n + j] = 1;
    }
  }

  auto similarity = [&](const std::vector<std::size_t>& cluster) {
    const std::size_t d = cluster.size();
    std::vector<double> s(d * d, 0.0);
    for (std::size_t a = 0; a < d; ++a) {
      s[a * d + a] = 1.0;
      for (std::size_t b = a + 1; b < d; ++b)
        s[a * d + b] = s[b * d + a] = cluster[a] == cluster[b]
                                          ? rng.uniform(0.5, 0.9)
                                          : rng.uniform(0.0, 0.35);
    }
    return SimilarityMatrix(d, std::move(s));
  };

  std::vector<std::string> drug_ids(m), disease_ids(n);
  for (std::size_t i = 0; i < m; ++i) drug_ids[i] = "DR" + std::to_string(i);
  for (std::size_t j = 0; j < n; ++j) disease_ids[j] = "DS" + std::to_string(j);
  SynthData out{AssociationMatrix(m, n, std::move(e), drug_ids, disease_ids),
                similarity(drug_cluster), similarity(disease_cluster)};
  return out;
}

fs::path write_synthetic(const SynthData& data, const fs::path& dir,
                         const std::string& extra_json) {
  fs::create_directories(dir);
  write_association_matrix(data.matrix, dir / "association.txt");
  write_similarity_matrix(data.drug_sim, dir / "drug_sim.txt");
  write_similarity_matrix(data.disease_sim, dir / "disease_sim.txt");
  auto write_ids = [](const std::vector<std::string>& ids, const fs::path& p) {
    std::ofstream out(p);
    for (const auto& id : ids) out << id << '\n';
  };
  write_ids(data.matrix.drug_ids(), dir / "drug_ids.txt");
  write_ids(data.matrix.disease_ids(), dir / "disease_ids.txt");

  nlohmann::json cfg = {{"dataset", "synthetic"},
                        {"association", "association.txt"},
                        {"drug_sim", "drug_sim.txt"},
                        {"disease_sim", "disease_sim.txt"},
                        {"drug_ids", "drug_ids.txt"},
                        {"disease_ids", "disease_ids.txt"}};
  cfg.update(nlohmann::json::parse(extra_json));
  const fs::path path = dir / "config.json";
  std::ofstream(path) << cfg.dump(2) << '\n';
  return path;
}

fs::path scratch_dir(const std::string& tag) {
  static std::uint64_t counter = 0;
  const fs::path base = fs::temp_directory_path() /
                        ("puon-" + tag + "-" + std::to_string(::getpid()) + "-" +
                         std::to_string(counter++));
  fs::remove_all(base);
  fs::create_directories(base);
  return base;
}

}  // namespace puon::test
