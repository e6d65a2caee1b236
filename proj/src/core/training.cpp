#include "core/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace puon {

namespace {

struct Group {
  std::span<const Pair> pairs;
  int label;
};

// Per-group predictions, needed twice: for the risk value and, when the
// non-negative correction is active, to decide whether the negative part
// contributes any gradient.
std::vector<double> forward(const ModelParams& p, const ModelContext& ctx,
                            const Embeddings& emb,
                            std::span<const Pair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const Pair& q : pairs)
    out.push_back(sigmoid(fast_logit(p, ctx, emb, q.drug, q.disease)));
  return out;
}

void check_batch(const Batch& b) {
  if (b.loss == Loss::kPu) {
    if (b.pos_as_pos.empty() || b.pos_as_neg.empty() || b.unl_as_neg.empty())
      fail(ErrorCode::kConfig, "PU batch needs all three pools non-empty");
  } else if (b.pos_as_pos.empty() || b.unl_as_neg.empty()) {
    fail(ErrorCode::kConfig, "PN batch needs positives and negatives");
  }
}

RiskValue risk_from_preds(const Batch& b, const std::vector<double>& pp,
                          const std::vector<double>& pn,
                          const std::vector<double>& u) {
  if (b.loss == Loss::kPu)
    return pu_risk(pp, pn, u, b.pi_p, b.nn_correction, b.clamp_eps);
  const double n = static_cast<double>(pp.size() + u.size());
  RiskValue r;
  for (double v : pp) r.term_pos_as_pos += cross_entropy(v, 1, b.clamp_eps);
  for (double v : u) r.term_unl_as_neg += cross_entropy(v, 0, b.clamp_eps);
  r.term_pos_as_pos /= n;
  r.term_unl_as_neg /= n;
  r.total = r.term_pos_as_pos + r.term_unl_as_neg;
  return r;
}

// View of one tensor as a flat array, for the optimizer.
struct Slot {
  double* param;
  const double* grad;
  Eigen::Index size;
};

std::vector<Slot> slots(ModelParams& p, const Gradients& g) {
  std::vector<Slot> s = {
      {p.W.data(), g.W.data(), p.W.size()},
      {p.b1.data(), g.b1.data(), p.b1.size()},
      {p.V.data(), g.V.data(), p.V.size()},
      {p.b2.data(), g.b2.data(), p.b2.size()},
  };
  if (p.readout == Readout::kBilinear) {
    s.push_back({p.P.data(), g.P.data(), p.P.size()});
    s.push_back({p.Q.data(), g.Q.data(), p.Q.size()});
  }
  if (p.readout == Readout::kFlattened)
    s.push_back({p.flat.data(), g.flat.data(), p.flat.size()});
  s.push_back({&p.b, &g.b, 1});
  return s;
}

class OptimizerState {
 public:
  OptimizerState(const TrainConfig& cfg, const ModelParams& p) : cfg_(cfg) {
    ModelParams copy = p;
    const Gradients g = Gradients::zeros_like(p);
    for (const Slot& s : slots(copy, g)) {
      first_.emplace_back(s.size, 0.0);
      second_.emplace_back(s.size, 0.0);
    }
  }

  void step(ModelParams& p, const Gradients& g) {
    ++t_;
    const double lr = cfg_.learning_rate;
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    auto ss = slots(p, g);
    for (std::size_t k = 0; k < ss.size(); ++k) {
      auto& m = first_[k];
      auto& v = second_[k];
      for (Eigen::Index t = 0; t < ss[k].size; ++t) {
        const double grad = ss[k].grad[t];
        double& w = ss[k].param[t];
        switch (cfg_.optimizer) {
          case Optimizer::kGradientDescent:
            w -= lr * grad;
            break;
          case Optimizer::kMomentum:
            m[t] = cfg_.momentum * m[t] + grad;
            w -= lr * m[t];
            break;
          case Optimizer::kAdam:
            m[t] = kBeta1 * m[t] + (1 - kBeta1) * grad;
            v[t] = kBeta2 * v[t] + (1 - kBeta2) * grad * grad;
            w -= lr * (m[t] / bc1) / (std::sqrt(v[t] / bc2) + kEps);
            break;
        }
      }
    }
  }

 private:
  const TrainConfig& cfg_;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
  long t_ = 0;
};

void check_gradients_finite(const Gradients& g) {
  auto check = [](const auto& t, const char* name) {
    if (!t.allFinite())
      fail(ErrorCode::kNumeric, std::string("non-finite gradient in ") + name);
  };
  check(g.W, "W");
  check(g.b1, "b1");
  check(g.V, "V");
  check(g.b2, "b2");
  check(g.P, "P");
  check(g.Q, "Q");
  check(g.flat, "flat");
  if (!std::isfinite(g.b)) fail(ErrorCode::kNumeric, "non-finite gradient in b");
}

// Slice t of `parts` equal slices of `pool`.
std::span<const Pair> slice(const std::vector<Pair>& pool, std::size_t t,
                            std::size_t parts) {
  const std::size_t lo = pool.size() * t / parts;
  const std::size_t hi = pool.size() * (t + 1) / parts;
  return std::span<const Pair>(pool).subspan(lo, hi - lo);
}

}  // namespace

std::string_view to_string(Loss l) { return l == Loss::kPu ? "pu" : "pn"; }

Loss parse_loss(std::string_view s) {
  if (s == "pu") return Loss::kPu;
  if (s == "pn") return Loss::kPn;
  fail(ErrorCode::kConfig, "unknown loss '" + std::string(s) + "' (expected pu|pn)");
}

std::string_view to_string(Optimizer o) {
  switch (o) {
    case Optimizer::kGradientDescent: return "gd";
    case Optimizer::kMomentum: return "momentum";
    case Optimizer::kAdam: return "adam";
  }
  return "adam";
}

Optimizer parse_optimizer(std::string_view s) {
  if (s == "gd") return Optimizer::kGradientDescent;
  if (s == "momentum") return Optimizer::kMomentum;
  if (s == "adam") return Optimizer::kAdam;
  fail(ErrorCode::kConfig,
       "unknown optimizer '" + std::string(s) + "' (expected gd|momentum|adam)");
}

void TrainConfig::validate() const {
  if (h < 1) fail(ErrorCode::kConfig, "h must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    fail(ErrorCode::kConfig, "learning rate must be a finite value >= 0");
  if (epochs < 1) fail(ErrorCode::kConfig, "epochs must be >= 1");
  if (unl_ratio < 1) fail(ErrorCode::kConfig, "unl_ratio must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    fail(ErrorCode::kConfig, "alpha must be a finite value >= 0");
  if (pi_p_override && !(*pi_p_override > 0.0 && *pi_p_override < 1.0))
    fail(ErrorCode::kConfig, "pi_p override must lie in (0,1)");
  if (!(clamp_eps > 0.0 && clamp_eps <= 1e-3))
    fail(ErrorCode::kConfig, "clamp_eps must lie in (0, 1e-3]");
  if (!(momentum >= 0.0 && momentum < 1.0))
    fail(ErrorCode::kConfig, "momentum must lie in [0,1)");
}

Gradients Gradients::zeros_like(const ModelParams& p) {
  Gradients g;
  g.W = Eigen::MatrixXd::Zero(p.W.rows(), p.W.cols());
  g.b1 = Eigen::VectorXd::Zero(p.b1.size());
  g.V = Eigen::MatrixXd::Zero(p.V.rows(), p.V.cols());
  g.b2 = Eigen::VectorXd::Zero(p.b2.size());
  g.P = Eigen::VectorXd::Zero(p.P.size());
  g.Q = Eigen::VectorXd::Zero(p.Q.size());
  g.flat = Eigen::MatrixXd::Zero(p.flat.rows(), p.flat.cols());
  return g;
}

double cross_entropy(double pred, int label, double eps) {
  const double c = std::clamp(pred, eps, 1.0 - eps);
  return label == 1 ? -std::log(c) : -std::log(1.0 - c);
}

RiskValue pu_risk(std::span<const double> preds_pp,
                  std::span<const double> preds_pn,
                  std::span<const double> preds_u, double pi_p,
                  bool nn_correction, double eps) {
  if (preds_pp.empty() || preds_pn.empty() || preds_u.empty())
    fail(ErrorCode::kConfig, "PU risk needs non-empty pools");
  if (preds_pp.size() != preds_pn.size())
    fail(ErrorCode::kConfig, "positive pools differ in size");
  RiskValue r;
  for (double v : preds_pp) r.term_pos_as_pos += cross_entropy(v, 1, eps);
  for (double v : preds_pn) r.term_pos_as_neg += cross_entropy(v, 0, eps);
  for (double v : preds_u) r.term_unl_as_neg += cross_entropy(v, 0, eps);
  const double n_p = static_cast<double>(preds_pp.size());
  r.term_pos_as_pos *= pi_p / n_p;
  r.term_pos_as_neg *= -pi_p / n_p;
  r.term_unl_as_neg /= static_cast<double>(preds_u.size());
  const double negative_part = r.term_pos_as_neg + r.term_unl_as_neg;
  r.total = r.term_pos_as_pos +
            (nn_correction ? std::max(0.0, negative_part) : negative_part);
  return r;
}

double pn_loss(std::span<const double> preds_pos,
               std::span<const double> preds_neg, double eps) {
  if (preds_pos.empty() || preds_neg.empty())
    fail(ErrorCode::kConfig, "PN loss needs positives and negatives");
  double s = 0.0;
  for (double v : preds_pos) s += cross_entropy(v, 1, eps);
  for (double v : preds_neg) s += cross_entropy(v, 0, eps);
  return s / static_cast<double>(preds_pos.size() + preds_neg.size());
}

Batch make_batch(const TrainingSet& set, const TrainConfig& cfg) {
  return Batch{set.pos_as_pos, set.pos_as_neg, set.unl_as_neg, set.pi_p,
               Loss::kPu,      cfg.nn_correction, cfg.clamp_eps};
}

Batch make_batch(const PnTrainingSet& set, const TrainConfig& cfg) {
  return Batch{set.positives, {}, set.negatives, 0.0,
               Loss::kPn,     false, cfg.clamp_eps};
}

RiskValue compute_risk(const ModelParams& p, const ModelContext& ctx,
                       const Batch& batch) {
  check_batch(batch);
  const Embeddings emb = embed_all(p, ctx);
  return risk_from_preds(batch, forward(p, ctx, emb, batch.pos_as_pos),
                         forward(p, ctx, emb, batch.pos_as_neg),
                         forward(p, ctx, emb, batch.unl_as_neg));
}

std::pair<RiskValue, Gradients> compute_gradients(const ModelParams& p,
                                                  const ModelContext& ctx,
                                                  const Batch& batch) {
  check_batch(batch);
  const Embeddings emb = embed_all(p, ctx);
  const Group groups[3] = {{batch.pos_as_pos, 1},
                           {batch.pos_as_neg, 0},
                           {batch.unl_as_neg, 0}};
  std::vector<double> preds[3];
  for (int g = 0; g < 3; ++g) preds[g] = forward(p, ctx, emb, groups[g].pairs);
  const RiskValue risk = risk_from_preds(batch, preds[0], preds[1], preds[2]);

  // d risk / d logit per sample = coef * (pred - label).
  double coef[3];
  if (batch.loss == Loss::kPu) {
    const double n_p = static_cast<double>(batch.pos_as_pos.size());
    coef[0] = batch.pi_p / n_p;
    coef[1] = -batch.pi_p / n_p;
    coef[2] = 1.0 / static_cast<double>(batch.unl_as_neg.size());
    if (batch.nn_correction && risk.term_pos_as_neg + risk.term_unl_as_neg < 0)
      coef[1] = coef[2] = 0.0;
  } else {
    const double n =
        static_cast<double>(batch.pos_as_pos.size() + batch.unl_as_neg.size());
    coef[0] = coef[2] = 1.0 / n;
    coef[1] = 0.0;
  }

  Gradients grad = Gradients::zeros_like(p);
  Eigen::MatrixXd g_drug = Eigen::MatrixXd::Zero(p.n_drugs, p.h);
  Eigen::MatrixXd g_disease = Eigen::MatrixXd::Zero(p.n_diseases, p.h);
  const auto& nbr = ctx.neighbor();

  if (p.readout == Readout::kFlattened) {
    // Gather u = d_i + alpha d_k and s_j for every sample, then use two
    // dense products instead of per-sample h*h work.
    std::size_t total = 0;
    for (const auto& g : groups) total += g.pairs.size();
    Eigen::MatrixXd u(total, p.h), s(total, p.h);
    Eigen::VectorXd gl(total);
    std::vector<Pair> order;
    order.reserve(total);
    std::size_t row = 0;
    for (int g = 0; g < 3; ++g) {
      for (std::size_t t = 0; t < groups[g].pairs.size(); ++t, ++row) {
        const Pair q = groups[g].pairs[t];
        u.row(row) = emb.drugs.row(q.drug) + p.alpha * emb.drugs.row(nbr[q.drug]);
        s.row(row) = emb.diseases.row(q.disease);
        gl(row) = coef[g] * (preds[g][t] - groups[g].label);
        order.push_back(q);
      }
    }
    grad.b = gl.sum();
    grad.flat = (u.array().colwise() * gl.array()).matrix().transpose() * s;
    const Eigen::MatrixXd du = (s * p.flat.transpose()).array().colwise() * gl.array();
    const Eigen::MatrixXd ds = (u * p.flat).array().colwise() * gl.array();
    for (std::size_t r = 0; r < total; ++r) {
      const Pair q = order[r];
      g_drug.row(q.drug) += du.row(r);
      g_drug.row(nbr[q.drug]) += p.alpha * du.row(r);
      g_disease.row(q.disease) += ds.row(r);
    }
  } else {
    for (int g = 0; g < 3; ++g) {
      if (coef[g] == 0.0) continue;
      for (std::size_t t = 0; t < groups[g].pairs.size(); ++t) {
        const Pair q = groups[g].pairs[t];
        const double gl = coef[g] * (preds[g][t] - groups[g].label);
        grad.b += gl;
        const auto d_i = emb.drugs.row(q.drug);
        const auto s_j = emb.diseases.row(q.disease);
        if (p.readout == Readout::kInnerProduct) {
          g_drug.row(q.drug) += gl * s_j;
          g_disease.row(q.disease) += gl * d_i;
          continue;
        }
        const std::size_t k = nbr[q.drug];
        const Eigen::RowVectorXd u = d_i + p.alpha * emb.drugs.row(k);
        const double pu = u.dot(p.P);
        const double qs = s_j.dot(p.Q);
        grad.P += (gl * qs) * u.transpose();
        grad.Q += (gl * pu) * s_j.transpose();
        g_drug.row(q.drug) += (gl * qs) * p.P.transpose();
        g_drug.row(k) += (gl * qs * p.alpha) * p.P.transpose();
        g_disease.row(q.disease) += (gl * pu) * p.Q.transpose();
      }
    }
  }

  // Through the sigmoid embeddings: d = f(W r + b1), s = f(V c + b2).
  const Eigen::MatrixXd pre_drug =
      g_drug.array() * emb.drugs.array() * (1.0 - emb.drugs.array());
  const Eigen::MatrixXd pre_disease =
      g_disease.array() * emb.diseases.array() * (1.0 - emb.diseases.array());
  grad.W = (ctx.sparse().transpose() * pre_drug).transpose();
  grad.b1 = pre_drug.colwise().sum().transpose();
  grad.V = (ctx.sparse() * pre_disease).transpose();
  grad.b2 = pre_disease.colwise().sum().transpose();
  check_gradients_finite(grad);
  return {risk, std::move(grad)};
}

TrainResult train(const TrainProblem& problem, const TrainConfig& cfg,
                  std::ostream* log) {
  cfg.validate();
  const AssociationMatrix& r = problem.masked;
  const ModelContext ctx(r, problem.drug_sim);

  TrainResult result;
  result.params = init_params(cfg.h, r.n_drugs(), r.n_diseases(), cfg.alpha,
                              cfg.seed, cfg.readout);
  ModelParams& params = result.params;
  OptimizerState opt(cfg, params);

  auto pools = problem.pools;
  const double pi_p =
      std::holds_alternative<TrainingSet>(pools)
          ? std::get<TrainingSet>(pools).pi_p
          : 0.0;
  Rng batch_rng(derive_seed(cfg.seed, 0xba7c));

  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.resample_each_epoch && epoch > 0) {
      const auto seed = derive_seed(cfg.seed, 0x5a3b, epoch);
      if (std::holds_alternative<TrainingSet>(pools))
        pools = build_pu_training_set(r, cfg.unl_ratio, pi_p, seed);
      else
        pools = build_pn_training_set(r, cfg.unl_ratio, seed);
    }
    auto full = std::visit([&](auto& s) { return make_batch(s, cfg); }, pools);

    auto diverged = [&](const std::string& why) {
      std::ostringstream msg;
      msg << "training diverged at epoch " << epoch;
      if (!result.history.empty())
        msg << "; last finite epoch " << epoch - 1 << " had risk "
            << result.history.back().total;
      msg << " (" << why << ")";
      fail(ErrorCode::kNumeric, msg.str());
    };

    RiskValue epoch_risk;
    try {
      if (cfg.batch_size == 0) {
        auto [risk, grad] = compute_gradients(params, ctx, full);
        epoch_risk = risk;
        opt.step(params, grad);
      } else {
        // Mini-batches take the same slice index from each shuffled pool, so
        // every batch keeps the pools' proportions.
        std::vector<Pair> a(full.pos_as_pos.begin(), full.pos_as_pos.end());
        std::vector<Pair> b(full.pos_as_neg.begin(), full.pos_as_neg.end());
        std::vector<Pair> c(full.unl_as_neg.begin(), full.unl_as_neg.end());
        batch_rng.shuffle(a);
        batch_rng.shuffle(b);
        batch_rng.shuffle(c);
        const std::size_t total = a.size() + b.size() + c.size();
        const std::size_t parts = std::max<std::size_t>(
            1, std::min({(total + cfg.batch_size - 1) / cfg.batch_size, a.size(),
                         c.size()}));
        epoch_risk = compute_risk(params, ctx, full);
        if (!std::isfinite(epoch_risk.total)) fail(ErrorCode::kNumeric, "non-finite risk");
        for (std::size_t t = 0; t < parts; ++t) {
          Batch mb = full;
          mb.pos_as_pos = slice(a, t, parts);
          mb.pos_as_neg = slice(b, t, parts);
          mb.unl_as_neg = slice(c, t, parts);
          opt.step(params, compute_gradients(params, ctx, mb).second);
        }
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNumeric) throw;
      diverged(e.what());
    }
    if (!std::isfinite(epoch_risk.total)) diverged("non-finite risk");

    if (!params.all_finite())
      fail(ErrorCode::kNumeric,
           "non-finite parameters after epoch " + std::to_string(epoch));
    result.history.push_back(epoch_risk);
    if (log)
      *log << epoch << '\t' << epoch_risk.total << '\t'
           << epoch_risk.term_pos_as_pos << '\t' << epoch_risk.term_pos_as_neg
           << '\t' << epoch_risk.term_unl_as_neg << '\n';

    if (epoch_risk.total < best) {
      best = epoch_risk.total;
      since_best = 0;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

}  // namespace puon
