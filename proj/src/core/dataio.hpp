#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace puon {

struct Pair {
  std::uint32_t drug = 0;
  std::uint32_t disease = 0;

  friend bool operator==(const Pair&, const Pair&) = default;
  friend auto operator<=>(const Pair&, const Pair&) = default;
};

// Binary drug x disease association matrix, row-major. At least one entry is
// 1. Immutable once built.
class AssociationMatrix {
 public:
  AssociationMatrix() = default;
  AssociationMatrix(std::size_t n_drugs, std::size_t n_diseases,
                    std::vector<std::uint8_t> entries,
                    std::vector<std::string> drug_ids = {},
                    std::vector<std::string> disease_ids = {});

  std::size_t n_drugs() const { return m_; }
  std::size_t n_diseases() const { return n_; }
  std::size_t ones() const { return ones_; }
  std::size_t zeros() const { return m_ * n_ - ones_; }
  double sparsity() const {
    return 1.0 - static_cast<double>(ones_) / static_cast<double>(m_ * n_);
  }

  bool at(std::size_t drug, std::size_t disease) const {
    return entries_[drug * n_ + disease] != 0;
  }
  bool at(Pair p) const { return at(p.drug, p.disease); }
  std::size_t row_sum(std::size_t drug) const;

  const std::vector<std::uint8_t>& entries() const { return entries_; }
  const std::vector<std::string>& drug_ids() const { return drug_ids_; }
  const std::vector<std::string>& disease_ids() const { return disease_ids_; }

  // All 1-entries in row-major order.
  std::vector<Pair> positives() const;

  // Copy with the given 1-entries zeroed.
  AssociationMatrix masked(const std::vector<Pair>& hidden) const;

  friend bool operator==(const AssociationMatrix&,
                         const AssociationMatrix&) = default;

 private:
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::size_t ones_ = 0;
  std::vector<std::uint8_t> entries_;
  std::vector<std::string> drug_ids_;
  std::vector<std::string> disease_ids_;
};

// Square, symmetric, values in [0,1], diagonal is the row maximum.
class SimilarityMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-9;

  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t dim, std::vector<double> entries);

  static SimilarityMatrix identity(std::size_t dim);

  std::size_t dim() const { return dim_; }
  double at(std::size_t a, std::size_t b) const {
    return entries_[a * dim_ + b];
  }
  const std::vector<double>& entries() const { return entries_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> entries_;
};

struct FoldSplit {
  std::size_t fold_index = 0;
  std::vector<Pair> train_positives;
  std::vector<Pair> test_positives;
  AssociationMatrix masked_matrix;
};

// Plain-text matrix files: one row per line, space/tab separated, no header.
AssociationMatrix load_association_matrix(
    const std::filesystem::path& path,
    const std::filesystem::path& drug_ids_path = {},
    const std::filesystem::path& disease_ids_path = {});
SimilarityMatrix load_similarity_matrix(const std::filesystem::path& path,
                                        std::size_t dim);

void write_association_matrix(const AssociationMatrix& r,
                              const std::filesystem::path& path);
void write_similarity_matrix(const SimilarityMatrix& s,
                             const std::filesystem::path& path);
std::vector<std::string> load_id_file(const std::filesystem::path& path);

// Folds over the 1-entries uniformly; fold sizes differ by at most one.
std::vector<FoldSplit> kfold_split(const AssociationMatrix& r, std::size_t k,
                                   std::uint64_t seed);

// Holds out the single association of every drug with row sum 1.
FoldSplit new_drug_split(const AssociationMatrix& r);

// argmax_{k != i} sim(i, k), lowest index on ties.
std::size_t nearest_neighbor(const SimilarityMatrix& sim, std::size_t i);
std::vector<std::size_t> nearest_neighbors(const SimilarityMatrix& sim);

}  // namespace puon
