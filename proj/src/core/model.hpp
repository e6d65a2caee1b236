#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "core/dataio.hpp"

namespace puon {

// How the interaction between drug and disease factors becomes a logit.
//   kBilinear     P^T E Q + b, E = (d_i + alpha d_k) s_j^T
//   kFlattened    <w, vec(E)> + b, single dense layer over the h*h entries
//   kInnerProduct <d_i, s_j> + b, no neighbour (matrix-factorisation ablation)
enum class Readout { kBilinear, kFlattened, kInnerProduct };

std::string_view to_string(Readout r);
Readout parse_readout(std::string_view s);

using InteractionMatrix = Eigen::MatrixXd;
using SparseAssociation = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct ModelParams {
  std::size_t h = 0;
  std::size_t n_drugs = 0;     // m
  std::size_t n_diseases = 0;  // n
  double alpha = 0.5;          // neighbour weight, not trained
  Readout readout = Readout::kBilinear;

  Eigen::MatrixXd W;     // h x n, drug embedding weights
  Eigen::VectorXd b1;    // h
  Eigen::MatrixXd V;     // h x m, disease embedding weights
  Eigen::VectorXd b2;    // h
  Eigen::VectorXd P;     // h, left memory
  Eigen::VectorXd Q;     // h, right memory
  Eigen::MatrixXd flat;  // h x h, only for kFlattened (0x0 otherwise)
  double b = 0.0;

  bool all_finite() const;
  friend bool operator==(const ModelParams&, const ModelParams&);
};

// Glorot-uniform weights, zero biases.
ModelParams init_params(std::size_t h, std::size_t n_drugs,
                        std::size_t n_diseases, double alpha,
                        std::uint64_t seed, Readout readout);

inline double sigmoid(double z) {
  // Branching keeps exp() from overflowing for large |z|.
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::VectorXd embed_drug(const ModelParams& p, const AssociationMatrix& r,
                           std::size_t i);
Eigen::VectorXd embed_disease(const ModelParams& p, const AssociationMatrix& r,
                              std::size_t j);

InteractionMatrix outer_product(const Eigen::VectorXd& d,
                                const Eigen::VectorXd& s);
InteractionMatrix collaborate(const InteractionMatrix& e_ij,
                              const InteractionMatrix& e_kj, double alpha);

// Logit of the bilinear or flattened readout applied to E.
double readout_logit(const ModelParams& p, const InteractionMatrix& e);

// Single-pair forward pass through every stage; the reference path.
double predict(const ModelParams& p, const AssociationMatrix& r,
               const SimilarityMatrix& drug_sim, std::size_t i, std::size_t j);
double predict_mf(const ModelParams& p, const AssociationMatrix& r,
                  std::size_t i, std::size_t j);

// Data a trained model reads at prediction time: the (masked) association
// matrix in sparse form and each drug's nearest neighbour.
class ModelContext {
 public:
  ModelContext(const AssociationMatrix& r, const SimilarityMatrix& drug_sim);

  const AssociationMatrix& matrix() const { return *r_; }
  const SparseAssociation& sparse() const { return sparse_; }
  const std::vector<std::uint32_t>& neighbor() const { return neighbor_; }

 private:
  const AssociationMatrix* r_;
  SparseAssociation sparse_;
  std::vector<std::uint32_t> neighbor_;
};

// Every drug and disease factor at once (rows are d_i / s_j).
struct Embeddings {
  Eigen::MatrixXd drugs;     // m x h
  Eigen::MatrixXd diseases;  // n x h
};

Embeddings embed_all(const ModelParams& p, const ModelContext& ctx);

// Factored logit for one pair, numerically equal to the reference path.
double fast_logit(const ModelParams& p, const ModelContext& ctx,
                  const Embeddings& emb, std::size_t i, std::size_t j);

// m x n matrix of predicted probabilities.
Eigen::MatrixXd score_all(const ModelParams& p, const ModelContext& ctx);

void save_checkpoint(const ModelParams& p, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace puon
