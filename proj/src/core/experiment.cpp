#include "core/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/sampling.hpp"

namespace puon {

namespace fs = std::filesystem;

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    fail(ErrorCode::kConfig, "invalid value '" + std::string(text) +
                                 "' for " + std::string(key));
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  fail(ErrorCode::kConfig,
       "invalid boolean '" + std::string(text) + "' for " + std::string(key));
}

std::vector<std::size_t> parse_size_list(std::string_view key,
                                         std::string_view text) {
  std::vector<std::size_t> out;
  std::string t(text);
  std::replace_if(t.begin(), t.end(),
                  [](char c) { return c == '[' || c == ']' || c == ','; }, ' ');
  std::size_t pos = 0;
  while (pos < t.size()) {
    while (pos < t.size() && t[pos] == ' ') ++pos;
    std::size_t end = pos;
    while (end < t.size() && t[end] != ' ') ++end;
    if (end > pos)
      out.push_back(parse_number<std::size_t>(key, std::string_view(t).substr(pos, end - pos)));
    pos = end;
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create directory " + p.string());
}

const char* log_header() {
  return "epoch\ttotal\tpos_as_pos\tpos_as_neg\tunl_as_neg\n";
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::kCv: return "cv";
    case Scenario::kNewDrug: return "newdrug";
    case Scenario::kFull: return "full";
  }
  return "cv";
}

Scenario parse_scenario(std::string_view s) {
  if (s == "cv") return Scenario::kCv;
  if (s == "newdrug") return Scenario::kNewDrug;
  if (s == "full") return Scenario::kFull;
  fail(ErrorCode::kConfig,
       "unknown scenario '" + std::string(s) + "' (expected cv|newdrug|full)");
}

void RunConfig::validate() const {
  train.validate();
  if (scenario == Scenario::kCv && k_folds < 2)
    fail(ErrorCode::kConfig, "k_folds must be >= 2");
  if (cv_repeats < 1) fail(ErrorCode::kConfig, "cv_repeats must be >= 1");
  if (jobs < 1) fail(ErrorCode::kConfig, "jobs must be >= 1");
  for (std::size_t k : eval.hr_ks)
    if (k < 1) fail(ErrorCode::kConfig, "hr_ks entries must be >= 1");
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  auto& t = cfg.train;
  if (key == "dataset") cfg.dataset_name = value;
  else if (key == "association") cfg.association = std::string(value);
  else if (key == "drug_sim") cfg.drug_sim = std::string(value);
  else if (key == "disease_sim") cfg.disease_sim = std::string(value);
  else if (key == "drug_ids") cfg.drug_ids = std::string(value);
  else if (key == "disease_ids") cfg.disease_ids = std::string(value);
  else if (key == "scenario") cfg.scenario = parse_scenario(value);
  else if (key == "h") t.h = parse_number<std::size_t>(key, value);
  else if (key == "lr") t.learning_rate = parse_number<double>(key, value);
  else if (key == "epochs") t.epochs = parse_number<std::size_t>(key, value);
  else if (key == "patience") t.patience = parse_number<std::size_t>(key, value);
  else if (key == "unl_ratio") t.unl_ratio = parse_number<std::size_t>(key, value);
  else if (key == "alpha") t.alpha = parse_number<double>(key, value);
  else if (key == "pi_p") {
    if (value == "auto" || value == "null" || value.empty()) t.pi_p_override.reset();
    else t.pi_p_override = parse_number<double>(key, value);
  }
  else if (key == "loss") t.loss = parse_loss(value);
  else if (key == "readout") t.readout = parse_readout(value);
  else if (key == "nn_correction") t.nn_correction = parse_bool(key, value);
  else if (key == "seed") t.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "clamp_eps") t.clamp_eps = parse_number<double>(key, value);
  else if (key == "optimizer") t.optimizer = parse_optimizer(value);
  else if (key == "momentum") t.momentum = parse_number<double>(key, value);
  else if (key == "batch_size") t.batch_size = parse_number<std::size_t>(key, value);
  else if (key == "resample_each_epoch") t.resample_each_epoch = parse_bool(key, value);
  else if (key == "k_folds") cfg.k_folds = parse_number<std::size_t>(key, value);
  else if (key == "cv_repeats") cfg.cv_repeats = parse_number<std::size_t>(key, value);
  else if (key == "output_dir") cfg.output_dir = std::string(value);
  else if (key == "jobs") cfg.jobs = parse_number<std::size_t>(key, value);
  else if (key == "f1_threshold") cfg.eval.f1_threshold = parse_number<double>(key, value);
  else if (key == "hr_ks") cfg.eval.hr_ks = parse_size_list(key, value);
  else if (key == "save_checkpoints") cfg.save_checkpoints = parse_bool(key, value);
  else if (key == "checkpoint") cfg.checkpoint = std::string(value);
  else fail(ErrorCode::kConfig, "unknown setting '" + std::string(key) + "'");
}

void apply_json(RunConfig& cfg, const nlohmann::json& doc) {
  if (!doc.is_object())
    fail(ErrorCode::kConfig, "config document must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const auto& v = it.value();
    if (v.is_null()) apply_setting(cfg, it.key(), "auto");
    else if (v.is_string()) apply_setting(cfg, it.key(), v.get<std::string>());
    else apply_setting(cfg, it.key(), v.dump());
  }
}

void apply_config_file(RunConfig& cfg, const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  apply_json(cfg, doc);
  // Relative data paths in the file resolve against the file's directory.
  const fs::path base = path.parent_path();
  const std::pair<const char*, fs::path*> paths[] = {
      {"association", &cfg.association}, {"drug_sim", &cfg.drug_sim},
      {"disease_sim", &cfg.disease_sim},  {"drug_ids", &cfg.drug_ids},
      {"disease_ids", &cfg.disease_ids},  {"checkpoint", &cfg.checkpoint}};
  for (auto [key, p] : paths)
    if (doc.contains(key) && !p->empty() && p->is_relative()) *p = base / *p;
}

RunConfig load_run_config(const fs::path& path) {
  RunConfig cfg;
  apply_config_file(cfg, path);
  return cfg;
}

nlohmann::json to_json(const RunConfig& cfg) {
  const auto& t = cfg.train;
  nlohmann::json j;
  j["dataset"] = cfg.dataset_name;
  j["association"] = cfg.association.string();
  j["drug_sim"] = cfg.drug_sim.string();
  j["disease_sim"] = cfg.disease_sim.string();
  j["drug_ids"] = cfg.drug_ids.string();
  j["disease_ids"] = cfg.disease_ids.string();
  j["scenario"] = std::string(to_string(cfg.scenario));
  j["h"] = t.h;
  j["lr"] = t.learning_rate;
  j["epochs"] = t.epochs;
  j["patience"] = t.patience;
  j["unl_ratio"] = t.unl_ratio;
  j["alpha"] = t.alpha;
  j["pi_p"] = t.pi_p_override ? nlohmann::json(*t.pi_p_override) : nlohmann::json();
  j["loss"] = std::string(to_string(t.loss));
  j["readout"] = std::string(to_string(t.readout));
  j["nn_correction"] = t.nn_correction;
  j["seed"] = t.seed;
  j["clamp_eps"] = t.clamp_eps;
  j["optimizer"] = std::string(to_string(t.optimizer));
  j["momentum"] = t.momentum;
  j["batch_size"] = t.batch_size;
  j["resample_each_epoch"] = t.resample_each_epoch;
  j["k_folds"] = cfg.k_folds;
  j["cv_repeats"] = cfg.cv_repeats;
  j["output_dir"] = cfg.output_dir.string();
  j["jobs"] = cfg.jobs;
  j["f1_threshold"] = cfg.eval.f1_threshold;
  j["hr_ks"] = cfg.eval.hr_ks;
  j["save_checkpoints"] = cfg.save_checkpoints;
  j["checkpoint"] = cfg.checkpoint.string();
  return j;
}

std::string get_setting(const RunConfig& cfg, std::string_view key) {
  const auto j = to_json(cfg);
  const auto it = j.find(std::string(key));
  if (it == j.end())
    fail(ErrorCode::kConfig, "unknown setting '" + std::string(key) + "'");
  if (it->is_null()) return "auto";
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

std::string fingerprint(const RunConfig& cfg) {
  auto j = to_json(cfg);
  j.erase("output_dir");
  j.erase("jobs");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

Dataset load_dataset(const RunConfig& cfg) {
  auto require = [](const fs::path& p, const char* what) {
    if (p.empty()) fail(ErrorCode::kConfig, std::string("no ") + what + " path configured");
    if (!fs::exists(p))
      fail(ErrorCode::kIo, std::string(what) + " file not found: " + p.string());
  };
  require(cfg.association, "association");
  require(cfg.drug_sim, "drug similarity");
  if (!cfg.disease_sim.empty()) require(cfg.disease_sim, "disease similarity");
  if (!cfg.drug_ids.empty()) require(cfg.drug_ids, "drug id");
  if (!cfg.disease_ids.empty()) require(cfg.disease_ids, "disease id");

  Dataset d;
  d.name = cfg.dataset_name;
  d.matrix = load_association_matrix(cfg.association, cfg.drug_ids, cfg.disease_ids);
  d.drug_sim = load_similarity_matrix(cfg.drug_sim, d.matrix.n_drugs());
  if (!cfg.disease_sim.empty())
    d.disease_sim = load_similarity_matrix(cfg.disease_sim, d.matrix.n_diseases());
  return d;
}

FoldRecord run_split(const RunConfig& cfg, const Dataset& data,
                     const FoldSplit& split, std::uint64_t split_seed,
                     std::ostream* log, ModelParams* trained) {
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(split_seed, split.fold_index, 2);
  const std::uint64_t pool_seed = derive_seed(split_seed, split.fold_index, 1);
  const AssociationMatrix& masked = split.masked_matrix;

  TrainProblem problem{masked, data.drug_sim, TrainingSet{}};
  if (tc.loss == Loss::kPu) {
    const double pi_p = estimate_class_prior(masked, tc.pi_p_override);
    problem.pools = build_pu_training_set(masked, tc.unl_ratio, pi_p, pool_seed);
  } else {
    problem.pools = build_pn_training_set(masked, tc.unl_ratio, pool_seed);
  }
  if (log) *log << log_header();
  TrainResult result = train(problem, tc, log);

  FoldRecord rec;
  rec.dataset = data.name;
  rec.scenario = cfg.scenario;
  rec.seed = split_seed;
  rec.fold = split.fold_index;
  rec.metrics = evaluate_fold(result.params, split, data.matrix, data.drug_sim, cfg.eval);
  rec.epochs_run = result.history.size();
  rec.final_risk = result.history.back().total;
  if (trained) *trained = std::move(result.params);
  return rec;
}

namespace {

struct Task {
  std::size_t repeat;
  std::uint64_t seed;
  const FoldSplit* split;
};

RunSummary run_tasks(const RunConfig& cfg, const Dataset& data,
                     const std::vector<Task>& tasks) {
  RunSummary summary;
  summary.fingerprint = fingerprint(cfg);
  summary.report_dir = cfg.output_dir / "reports" / summary.fingerprint;
  const fs::path log_dir = cfg.output_dir / "logs" / summary.fingerprint;
  const fs::path ckpt_dir = cfg.output_dir / "checkpoints" / summary.fingerprint;
  ensure_dir(summary.report_dir);
  ensure_dir(log_dir);
  if (cfg.save_checkpoints) ensure_dir(ckpt_dir);

  std::vector<FoldRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;

  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      {
        std::lock_guard lock(error_mu);
        if (error) return;
      }
      try {
        const Task& task = tasks[t];
        const std::string stem = std::string(to_string(cfg.scenario)) + "_r" +
                                 std::to_string(task.repeat) + "_f" +
                                 std::to_string(task.split->fold_index);
        std::ofstream log(log_dir / (stem + ".tsv"));
        ModelParams params;
        records[t] = run_split(cfg, data, *task.split, task.seed, &log,
                               cfg.save_checkpoints ? &params : nullptr);
        records[t].repeat = task.repeat;
        if (cfg.save_checkpoints)
          save_checkpoint(params, ckpt_dir / (stem + ".json"));
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };

  const std::size_t n_threads = std::min(cfg.jobs, tasks.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  summary.records = std::move(records);
  write_fold_report(summary.records, summary.fingerprint, cfg.eval.hr_ks,
                    summary.report_dir / "folds.tsv");
  std::ofstream out(summary.report_dir / "summary.json");
  if (!out) fail(ErrorCode::kIo, "cannot write summary in " + summary.report_dir.string());
  out << summarize(summary.records, cfg).dump(2) << '\n';
  return summary;
}

}  // namespace

RunSummary run_cv(const RunConfig& cfg_in, const Dataset& data) {
  RunConfig cfg = cfg_in;
  cfg.scenario = Scenario::kCv;
  cfg.validate();
  std::vector<std::vector<FoldSplit>> splits;
  std::vector<Task> tasks;
  splits.reserve(cfg.cv_repeats);
  for (std::size_t r = 0; r < cfg.cv_repeats; ++r) {
    const std::uint64_t seed = cfg.train.seed + r;
    splits.push_back(kfold_split(data.matrix, cfg.k_folds, seed));
  }
  for (std::size_t r = 0; r < cfg.cv_repeats; ++r)
    for (const auto& f : splits[r]) tasks.push_back({r, cfg.train.seed + r, &f});
  return run_tasks(cfg, data, tasks);
}

RunSummary run_newdrug(const RunConfig& cfg_in, const Dataset& data) {
  RunConfig cfg = cfg_in;
  cfg.scenario = Scenario::kNewDrug;
  cfg.validate();
  const FoldSplit split = new_drug_split(data.matrix);
  std::vector<Task> tasks;
  for (std::size_t r = 0; r < cfg.cv_repeats; ++r)
    tasks.push_back({r, cfg.train.seed + r, &split});
  return run_tasks(cfg, data, tasks);
}

ModelParams train_full(const RunConfig& cfg, const Dataset& data,
                       std::ostream* log) {
  cfg.train.validate();
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.train.seed, 0, 2);
  TrainProblem problem{data.matrix, data.drug_sim, TrainingSet{}};
  const std::uint64_t pool_seed = derive_seed(cfg.train.seed, 0, 1);
  if (tc.loss == Loss::kPu)
    problem.pools = build_pu_training_set(
        data.matrix, tc.unl_ratio,
        estimate_class_prior(data.matrix, tc.pi_p_override), pool_seed);
  else
    problem.pools = build_pn_training_set(data.matrix, tc.unl_ratio, pool_seed);
  if (log) *log << log_header();
  return train(problem, tc, log).params;
}

std::vector<Recommendation> recommend(const ModelParams& params,
                                      const Dataset& data,
                                      const std::vector<std::string>& drug_ids,
                                      std::size_t top_k) {
  const auto& ids = data.matrix.drug_ids();
  std::vector<std::size_t> drugs;
  std::string unknown;
  for (const auto& id : drug_ids) {
    const auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) {
      unknown += (unknown.empty() ? "" : ", ") + id;
      continue;
    }
    drugs.push_back(static_cast<std::size_t>(it - ids.begin()));
  }
  if (!unknown.empty()) fail(ErrorCode::kUnknownId, "unknown drug id(s): " + unknown);
  if (top_k < 1) fail(ErrorCode::kConfig, "top_k must be >= 1");

  const ModelContext ctx(data.matrix, data.drug_sim);
  const Eigen::MatrixXd scores = score_all(params, ctx);
  std::vector<Recommendation> out;
  for (std::size_t i : drugs) {
    std::vector<std::size_t> cand;
    for (std::size_t j = 0; j < data.matrix.n_diseases(); ++j)
      if (!data.matrix.at(i, j)) cand.push_back(j);
    if (top_k > cand.size())
      fail(ErrorCode::kConfig, "top_k = " + std::to_string(top_k) + " exceeds the " +
                                   std::to_string(cand.size()) +
                                   " candidate diseases of drug " + ids[i]);
    std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
      return scores(i, a) > scores(i, b);
    });
    for (std::size_t r = 0; r < top_k; ++r)
      out.push_back({ids[i], i, r + 1, cand[r],
                     data.matrix.disease_ids()[cand[r]], scores(i, cand[r])});
  }
  return out;
}

void write_fold_report(const std::vector<FoldRecord>& records,
                       const std::string& fp,
                       const std::vector<std::size_t>& hr_ks,
                       const fs::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "dataset\tscenario\tseed\trepeat\tfold\tauc\taupr\tf1\tf1_max";
  for (std::size_t k : hr_ks) out << "\thr@" << k;
  out << "\tn_test_pos\tn_test_neg\tepochs\tfinal_risk\tfingerprint\n";
  for (const auto& r : records) {
    const auto& m = r.metrics;
    out << r.dataset << '\t' << to_string(r.scenario) << '\t' << r.seed << '\t'
        << r.repeat << '\t' << r.fold << '\t' << fmt(m.auc) << '\t'
        << fmt(m.aupr) << '\t' << fmt(m.f1) << '\t' << fmt(m.f1_max);
    for (std::size_t k : hr_ks) out << '\t' << fmt(m.hr.at(k));
    out << '\t' << m.n_test_pos << '\t' << m.n_test_neg << '\t' << r.epochs_run
        << '\t' << fmt(r.final_risk) << '\t' << fp << '\n';
  }
}

nlohmann::json summarize(const std::vector<FoldRecord>& records,
                         const RunConfig& cfg) {
  nlohmann::json j;
  j["fingerprint"] = fingerprint(cfg);
  auto settings = to_json(cfg);
  settings.erase("output_dir");
  settings.erase("jobs");
  j["config"] = settings;

  nlohmann::json datasets = nlohmann::json::object();
  for (const auto& r : records) {
    nlohmann::json row = {{"seed", r.seed},
                          {"repeat", r.repeat},
                          {"fold", r.fold},
                          {"auc", r.metrics.auc},
                          {"aupr", r.metrics.aupr},
                          {"f1", r.metrics.f1},
                          {"f1_max", r.metrics.f1_max}};
    for (const auto& [k, v] : r.metrics.hr) row["hr@" + std::to_string(k)] = v;
    row["n_test_pos"] = r.metrics.n_test_pos;
    row["n_test_neg"] = r.metrics.n_test_neg;
    row["epochs"] = r.epochs_run;
    row["final_risk"] = r.final_risk;
    datasets[r.dataset][std::string(to_string(r.scenario))]["records"].push_back(row);
  }
  for (auto& [name, scenarios] : datasets.items()) {
    for (auto& [scenario, entry] : scenarios.items()) {
      const auto& rows = entry["records"];
      nlohmann::json mean = nlohmann::json::object();
      for (const auto& [key, value] : rows.front().items()) {
        if (key == "auc" || key == "aupr" || key == "f1" || key == "f1_max" ||
            key.starts_with("hr@")) {
          double sum = 0.0;
          for (const auto& row : rows) sum += row[key].get<double>();
          mean[key] = sum / static_cast<double>(rows.size());
        }
      }
      entry["mean"] = mean;
    }
  }
  j["datasets"] = datasets;
  return j;
}

}  // namespace puon
