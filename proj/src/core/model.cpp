#include "core/model.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace puon {

namespace {

constexpr int kCheckpointVersion = 1;
constexpr const char* kCheckpointFormat = "puon-checkpoint";

void glorot_fill(double* data, std::size_t count, std::size_t fan_in,
                 std::size_t fan_out, Rng& rng) {
  const double s =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (std::size_t t = 0; t < count; ++t) data[t] = rng.uniform(-s, s);
}

void check_pair(const ModelParams& p, std::size_t i, std::size_t j) {
  if (i >= p.n_drugs || j >= p.n_diseases)
    fail(ErrorCode::kInvalidArgument,
         "pair (" + std::to_string(i) + "," + std::to_string(j) +
             ") out of range for " + std::to_string(p.n_drugs) + "x" +
             std::to_string(p.n_diseases) + " model");
}

void check_bound(const ModelParams& p, const AssociationMatrix& r) {
  if (r.n_drugs() != p.n_drugs || r.n_diseases() != p.n_diseases)
    fail(ErrorCode::kShape, "model dimensions do not match association matrix");
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double v) { return puon::sigmoid(v); });
}

nlohmann::json tensor_json(const double* data, std::size_t rows,
                           std::size_t cols) {
  nlohmann::json t;
  t["shape"] = {rows, cols};
  t["data"] = std::vector<double>(data, data + rows * cols);
  return t;
}

// Eigen stores column-major; checkpoints hold row-major order.
nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  return tensor_json(rm.data(), static_cast<std::size_t>(m.rows()),
                     static_cast<std::size_t>(m.cols()));
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& t, std::size_t rows,
                                 std::size_t cols, const char* name) {
  const auto shape = t.at("shape").get<std::vector<std::size_t>>();
  const auto data = t.at("data").get<std::vector<double>>();
  if (shape.size() != 2 || shape[0] != rows || shape[1] != cols ||
      data.size() != rows * cols)
    fail(ErrorCode::kShape, std::string("checkpoint tensor ") + name +
                                " has unexpected shape");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t a = 0; a < rows; ++a)
    for (std::size_t c = 0; c < cols; ++c) m(a, c) = data[a * cols + c];
  return m;
}

}  // namespace

std::string_view to_string(Readout r) {
  switch (r) {
    case Readout::kBilinear: return "bilinear";
    case Readout::kFlattened: return "flattened";
    case Readout::kInnerProduct: return "mf";
  }
  return "bilinear";
}

Readout parse_readout(std::string_view s) {
  if (s == "bilinear") return Readout::kBilinear;
  if (s == "flattened") return Readout::kFlattened;
  if (s == "mf") return Readout::kInnerProduct;
  fail(ErrorCode::kConfig, "unknown readout '" + std::string(s) +
                               "' (expected bilinear|flattened|mf)");
}

bool ModelParams::all_finite() const {
  return W.allFinite() && b1.allFinite() && V.allFinite() && b2.allFinite() &&
         P.allFinite() && Q.allFinite() && flat.allFinite() && std::isfinite(b);
}

bool operator==(const ModelParams& x, const ModelParams& y) {
  auto same = [](const auto& a, const auto& c) {
    return a.rows() == c.rows() && a.cols() == c.cols() &&
           (a.size() == 0 || a == c);
  };
  return x.h == y.h && x.n_drugs == y.n_drugs &&
         x.n_diseases == y.n_diseases && x.alpha == y.alpha &&
         x.readout == y.readout && same(x.W, y.W) && same(x.b1, y.b1) &&
         same(x.V, y.V) && same(x.b2, y.b2) && same(x.P, y.P) &&
         same(x.Q, y.Q) && same(x.flat, y.flat) && x.b == y.b;
}

ModelParams init_params(std::size_t h, std::size_t n_drugs,
                        std::size_t n_diseases, double alpha,
                        std::uint64_t seed, Readout readout) {
  if (h < 1) fail(ErrorCode::kConfig, "latent dimension h must be >= 1");
  if (n_drugs < 1 || n_diseases < 1)
    fail(ErrorCode::kShape, "model needs at least one drug and one disease");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    fail(ErrorCode::kConfig, "alpha must be a finite value >= 0");

  ModelParams p;
  p.h = h;
  p.n_drugs = n_drugs;
  p.n_diseases = n_diseases;
  p.alpha = alpha;
  p.readout = readout;

  Rng rng(seed);
  p.W.resize(h, n_diseases);
  glorot_fill(p.W.data(), p.W.size(), n_diseases, h, rng);
  p.V.resize(h, n_drugs);
  glorot_fill(p.V.data(), p.V.size(), n_drugs, h, rng);
  p.P.resize(h);
  glorot_fill(p.P.data(), h, h, 1, rng);
  p.Q.resize(h);
  glorot_fill(p.Q.data(), h, h, 1, rng);
  if (readout == Readout::kFlattened) {
    p.flat.resize(h, h);
    glorot_fill(p.flat.data(), h * h, h * h, 1, rng);
  }
  p.b1 = Eigen::VectorXd::Zero(h);
  p.b2 = Eigen::VectorXd::Zero(h);
  p.b = 0.0;
  return p;
}

Eigen::VectorXd embed_drug(const ModelParams& p, const AssociationMatrix& r,
                           std::size_t i) {
  check_bound(p, r);
  if (i >= p.n_drugs) fail(ErrorCode::kInvalidArgument, "drug index out of range");
  Eigen::VectorXd z = p.b1;
  for (std::size_t j = 0; j < p.n_diseases; ++j)
    if (r.at(i, j)) z += p.W.col(j);
  return sigmoid(z);
}

Eigen::VectorXd embed_disease(const ModelParams& p, const AssociationMatrix& r,
                              std::size_t j) {
  check_bound(p, r);
  if (j >= p.n_diseases)
    fail(ErrorCode::kInvalidArgument, "disease index out of range");
  Eigen::VectorXd z = p.b2;
  for (std::size_t i = 0; i < p.n_drugs; ++i)
    if (r.at(i, j)) z += p.V.col(i);
  return sigmoid(z);
}

InteractionMatrix outer_product(const Eigen::VectorXd& d,
                                const Eigen::VectorXd& s) {
  if (d.size() != s.size())
    fail(ErrorCode::kShape, "outer product of vectors with different lengths");
  return d * s.transpose();
}

InteractionMatrix collaborate(const InteractionMatrix& e_ij,
                              const InteractionMatrix& e_kj, double alpha) {
  if (e_ij.rows() != e_kj.rows() || e_ij.cols() != e_kj.cols())
    fail(ErrorCode::kShape, "interaction matrices differ in shape");
  return e_ij + alpha * e_kj;
}

double readout_logit(const ModelParams& p, const InteractionMatrix& e) {
  switch (p.readout) {
    case Readout::kBilinear:
      return p.P.dot(e * p.Q) + p.b;
    case Readout::kFlattened: {
      // Row-major vec(E) against the weight vector, summed in order.
      double z = 0.0;
      for (Eigen::Index a = 0; a < e.rows(); ++a)
        for (Eigen::Index c = 0; c < e.cols(); ++c) z += p.flat(a, c) * e(a, c);
      return z + p.b;
    }
    case Readout::kInnerProduct:
      return e.trace() + p.b;
  }
  return 0.0;
}

double predict(const ModelParams& p, const AssociationMatrix& r,
               const SimilarityMatrix& drug_sim, std::size_t i, std::size_t j) {
  check_pair(p, i, j);
  if (p.readout == Readout::kInnerProduct) return predict_mf(p, r, i, j);
  if (drug_sim.dim() != p.n_drugs)
    fail(ErrorCode::kShape, "drug similarity does not match model");
  const std::size_t k = nearest_neighbor(drug_sim, i);
  const auto d_i = embed_drug(p, r, i);
  const auto d_k = embed_drug(p, r, k);
  const auto s_j = embed_disease(p, r, j);
  const auto e = collaborate(outer_product(d_i, s_j), outer_product(d_k, s_j),
                             p.alpha);
  return sigmoid(readout_logit(p, e));
}

double predict_mf(const ModelParams& p, const AssociationMatrix& r,
                  std::size_t i, std::size_t j) {
  check_pair(p, i, j);
  const auto d = embed_drug(p, r, i);
  const auto s = embed_disease(p, r, j);
  double z = 0.0;
  for (Eigen::Index a = 0; a < d.size(); ++a) z += d(a) * s(a);
  return sigmoid(z + p.b);
}

ModelContext::ModelContext(const AssociationMatrix& r,
                           const SimilarityMatrix& drug_sim)
    : r_(&r), sparse_(static_cast<Eigen::Index>(r.n_drugs()),
                      static_cast<Eigen::Index>(r.n_diseases())) {
  if (drug_sim.dim() != r.n_drugs())
    fail(ErrorCode::kShape, "drug similarity dim " +
                                std::to_string(drug_sim.dim()) +
                                " does not match " +
                                std::to_string(r.n_drugs()) + " drugs");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(r.ones());
  for (const Pair& q : r.positives())
    trips.emplace_back(q.drug, q.disease, 1.0);
  sparse_.setFromTriplets(trips.begin(), trips.end());

  neighbor_.resize(r.n_drugs());
  if (r.n_drugs() >= 2)
    for (std::size_t i = 0; i < r.n_drugs(); ++i)
      neighbor_[i] = static_cast<std::uint32_t>(nearest_neighbor(drug_sim, i));
}

Embeddings embed_all(const ModelParams& p, const ModelContext& ctx) {
  check_bound(p, ctx.matrix());
  Embeddings emb;
  emb.drugs = ctx.sparse() * p.W.transpose();
  emb.drugs.rowwise() += p.b1.transpose();
  emb.drugs = emb.drugs.unaryExpr([](double v) { return puon::sigmoid(v); });
  emb.diseases = ctx.sparse().transpose() * p.V.transpose();
  emb.diseases.rowwise() += p.b2.transpose();
  emb.diseases =
      emb.diseases.unaryExpr([](double v) { return puon::sigmoid(v); });
  return emb;
}

double fast_logit(const ModelParams& p, const ModelContext& ctx,
                  const Embeddings& emb, std::size_t i, std::size_t j) {
  const auto d_i = emb.drugs.row(i);
  const auto s_j = emb.diseases.row(j);
  switch (p.readout) {
    case Readout::kBilinear: {
      const auto d_k = emb.drugs.row(ctx.neighbor()[i]);
      return (d_i.dot(p.P) + p.alpha * d_k.dot(p.P)) * s_j.dot(p.Q) + p.b;
    }
    case Readout::kFlattened: {
      const Eigen::RowVectorXd u =
          d_i + p.alpha * emb.drugs.row(ctx.neighbor()[i]);
      return u * p.flat * s_j.transpose() + p.b;
    }
    case Readout::kInnerProduct:
      return d_i.dot(s_j) + p.b;
  }
  return 0.0;
}

Eigen::MatrixXd score_all(const ModelParams& p, const ModelContext& ctx) {
  const Embeddings emb = embed_all(p, ctx);
  const auto& nbr = ctx.neighbor();
  Eigen::MatrixXd z;
  if (p.readout == Readout::kInnerProduct) {
    z = emb.drugs * emb.diseases.transpose();
  } else {
    Eigen::MatrixXd u = emb.drugs;
    for (std::size_t i = 0; i < p.n_drugs; ++i)
      u.row(i) += p.alpha * emb.drugs.row(nbr[i]);
    if (p.readout == Readout::kBilinear)
      z = (u * p.P) * (emb.diseases * p.Q).transpose();
    else
      z = u * p.flat * emb.diseases.transpose();
  }
  z.array() += p.b;
  return z.unaryExpr([](double v) { return puon::sigmoid(v); });
}

void save_checkpoint(const ModelParams& p, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["h"] = p.h;
  j["alpha"] = p.alpha;
  j["readout"] = std::string(to_string(p.readout));
  j["n_drugs"] = p.n_drugs;
  j["n_diseases"] = p.n_diseases;
  auto& t = j["tensors"];
  t["W"] = matrix_json(p.W);
  t["b1"] = tensor_json(p.b1.data(), p.h, 1);
  t["V"] = matrix_json(p.V);
  t["b2"] = tensor_json(p.b2.data(), p.h, 1);
  t["P"] = tensor_json(p.P.data(), p.h, 1);
  t["Q"] = tensor_json(p.Q.data(), p.h, 1);
  if (p.readout == Readout::kFlattened) t["flat"] = matrix_json(p.flat);
  t["b"] = tensor_json(&p.b, 1, 1);

  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump() << '\n';
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("format") != kCheckpointFormat)
      fail(ErrorCode::kParse, path.string() + ": not a checkpoint file");
    if (j.at("version") != kCheckpointVersion)
      fail(ErrorCode::kParse, path.string() + ": unsupported checkpoint version");

    ModelParams p;
    p.h = j.at("h").get<std::size_t>();
    p.alpha = j.at("alpha").get<double>();
    p.readout = parse_readout(j.at("readout").get<std::string>());
    p.n_drugs = j.at("n_drugs").get<std::size_t>();
    p.n_diseases = j.at("n_diseases").get<std::size_t>();
    const auto& t = j.at("tensors");
    p.W = matrix_from_json(t.at("W"), p.h, p.n_diseases, "W");
    p.b1 = matrix_from_json(t.at("b1"), p.h, 1, "b1");
    p.V = matrix_from_json(t.at("V"), p.h, p.n_drugs, "V");
    p.b2 = matrix_from_json(t.at("b2"), p.h, 1, "b2");
    p.P = matrix_from_json(t.at("P"), p.h, 1, "P");
    p.Q = matrix_from_json(t.at("Q"), p.h, 1, "Q");
    if (p.readout == Readout::kFlattened)
      p.flat = matrix_from_json(t.at("flat"), p.h, p.h, "flat");
    p.b = matrix_from_json(t.at("b"), 1, 1, "b")(0, 0);
    if (!p.all_finite())
      fail(ErrorCode::kNumeric, path.string() + ": non-finite parameter");
    return p;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

}  // namespace puon
