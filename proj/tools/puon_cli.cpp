// puon: cross-validation, new-drug evaluation, recommendation and self checks
// from the command line. Talks to the library only through the C interface.

#include <puon/puon.h>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Failure {
  puon_status status;
  std::string message;
};

void check(puon_status st, const std::string& what) {
  if (st != PUON_OK) throw Failure{st, what + ": " + puon_last_error()};
}

struct ConfigDeleter { void operator()(puon_config* p) const { puon_config_destroy(p); } };
struct DatasetDeleter { void operator()(puon_dataset* p) const { puon_dataset_destroy(p); } };
struct ModelDeleter { void operator()(puon_model* p) const { puon_model_destroy(p); } };
struct RunDeleter { void operator()(puon_run* p) const { puon_run_destroy(p); } };

using ConfigPtr = std::unique_ptr<puon_config, ConfigDeleter>;
using DatasetPtr = std::unique_ptr<puon_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<puon_model, ModelDeleter>;
using RunPtr = std::unique_ptr<puon_run, RunDeleter>;

// Command-line values; anything left unset keeps the config file's value.
struct Overrides {
  std::string config_path;
  std::map<std::string, std::optional<std::string>> values;
  bool nn_correction = false;
  std::vector<std::string> raw;  // --set key=value
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  auto opt = [&](const char* flag, const char* key, const char* help) {
    cmd->add_option_function<std::string>(
        flag, [&o, key](const std::string& v) { o.values[key] = v; }, help);
  };
  opt("--h", "h", "embedding width");
  opt("--lr", "lr", "learning rate");
  opt("--epochs", "epochs", "maximum epochs");
  opt("--alpha", "alpha", "nearest-neighbour weight");
  opt("--pi-p", "pi_p", "class prior, or 'auto' for the training density");
  opt("--unl-ratio", "unl_ratio", "unlabeled samples per positive");
  opt("--loss", "loss", "pu | pn");
  opt("--readout", "readout", "bilinear | flattened | mf");
  opt("--seed", "seed", "base seed");
  opt("--jobs", "jobs", "folds trained concurrently");
  opt("--association", "association", "association matrix file");
  opt("--drug-sim", "drug_sim", "drug similarity file");
  opt("--disease-sim", "disease_sim", "disease similarity file");
  opt("--drug-ids", "drug_ids", "drug identifier file");
  opt("--disease-ids", "disease_ids", "disease identifier file");
  opt("--k-folds", "k_folds", "folds per repeat");
  opt("--repeats", "cv_repeats", "cross-validation repeats / new-drug seeds");
  opt("--output-dir", "output_dir", "root of reports/, logs/, checkpoints/");
  cmd->add_flag("--nn-correction", o.nn_correction, "clip the negative-class risk at zero");
  cmd->add_option("--set", o.raw, "any other config key as key=value");
}

ConfigPtr make_config(const Overrides& o) {
  puon_config* raw = nullptr;
  check(puon_config_create(&raw), "config");
  ConfigPtr cfg(raw);
  if (!o.config_path.empty()) check(puon_config_load(cfg.get(), o.config_path.c_str()), o.config_path);
  for (const auto& kv : o.raw) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Failure{PUON_ERR_CONFIG, "--set expects key=value, got " + kv};
    const std::string key = kv.substr(0, eq);
    check(puon_config_set(cfg.get(), key.c_str(), kv.c_str() + eq + 1), "--set " + key);
  }
  for (const auto& [key, value] : o.values)
    if (value) check(puon_config_set(cfg.get(), key.c_str(), value->c_str()), "--" + key);
  if (o.nn_correction) check(puon_config_set(cfg.get(), "nn_correction", "true"), "--nn-correction");
  return cfg;
}

DatasetPtr load(const puon_config* cfg) {
  puon_dataset* raw = nullptr;
  check(puon_dataset_load(cfg, &raw), "dataset");
  return DatasetPtr(raw);
}

std::string get(const puon_config* cfg, const char* key) {
  size_t needed = 0;
  check(puon_config_get(cfg, key, nullptr, 0, &needed), key);
  std::string s(needed, '\0');
  check(puon_config_get(cfg, key, s.data(), s.size(), nullptr), key);
  s.pop_back();
  return s;
}

std::vector<size_t> hr_ks(const puon_config* cfg) {
  std::string text = get(cfg, "hr_ks");
  for (char& c : text)
    if (c == ',' || c == '[' || c == ']') c = ' ';
  std::istringstream in(text);
  std::vector<size_t> ks;
  for (size_t k; in >> k;) ks.push_back(k);
  return ks;
}

void print_run(const puon_run* run, const std::vector<size_t>& ks) {
  const size_t n = puon_run_count(run);
  std::printf("seed\trepeat\tfold\tauc\taupr\tf1\tf1_max");
  for (size_t k : ks) std::printf("\thr@%zu", k);
  std::printf("\tepochs\n");
  double sum_auc = 0, sum_aupr = 0, sum_f1 = 0;
  for (size_t i = 0; i < n; ++i) {
    puon_fold_metrics m{};
    check(puon_run_metrics(run, i, &m), "metrics");
    std::printf("%llu\t%zu\t%zu\t%.4f\t%.4f\t%.4f\t%.4f",
                static_cast<unsigned long long>(m.seed), m.repeat, m.fold, m.auc,
                m.aupr, m.f1, m.f1_max);
    for (size_t k : ks) {
      double hr = 0;
      check(puon_run_hit_ratio(run, i, k, &hr), "hit ratio");
      std::printf("\t%.4f", hr);
    }
    std::printf("\t%zu\n", m.epochs);
    sum_auc += m.auc;
    sum_aupr += m.aupr;
    sum_f1 += m.f1;
  }
  if (n) {
    const double d = static_cast<double>(n);
    std::printf("mean over %zu records: auc %.4f  aupr %.4f  f1 %.4f\n", n,
                sum_auc / d, sum_aupr / d, sum_f1 / d);
  }
  size_t needed = 0;
  check(puon_run_report_dir(run, nullptr, 0, &needed), "report dir");
  std::string dir(needed, '\0');
  check(puon_run_report_dir(run, dir.data(), dir.size(), nullptr), "report dir");
  dir.pop_back();
  std::printf("reports: %s\n", dir.c_str());
}

int cmd_cv(const Overrides& o) {
  ConfigPtr cfg = make_config(o);
  DatasetPtr data = load(cfg.get());
  puon_run* raw = nullptr;
  check(puon_run_cv(cfg.get(), data.get(), &raw), "cv");
  RunPtr run(raw);
  print_run(run.get(), hr_ks(cfg.get()));
  return 0;
}

int cmd_newdrug(const Overrides& o) {
  ConfigPtr cfg = make_config(o);
  DatasetPtr data = load(cfg.get());
  size_t singles = 0;
  check(puon_dataset_count_single_drugs(data.get(), &singles), "dataset");
  std::printf("held-out associations (single-association drugs): %zu\n", singles);
  puon_run* raw = nullptr;
  check(puon_run_newdrug(cfg.get(), data.get(), &raw), "newdrug");
  RunPtr run(raw);
  print_run(run.get(), hr_ks(cfg.get()));
  return 0;
}

int cmd_recommend(const Overrides& o, const std::vector<std::string>& drugs,
                  size_t top_k, const std::string& out_path,
                  const std::string& save_path) {
  ConfigPtr cfg = make_config(o);
  DatasetPtr data = load(cfg.get());

  puon_model* raw = nullptr;
  const std::string checkpoint = get(cfg.get(), "checkpoint");
  if (!checkpoint.empty())
    check(puon_model_load(checkpoint.c_str(), &raw), "checkpoint");
  else
    check(puon_model_train(cfg.get(), data.get(), nullptr, &raw), "training");
  ModelPtr model(raw);
  if (!save_path.empty()) check(puon_model_save(model.get(), save_path.c_str()), save_path);

  std::vector<const char*> ids;
  for (const auto& d : drugs) ids.push_back(d.c_str());
  std::vector<puon_recommendation> rows(drugs.size() * top_k);
  size_t written = 0;
  check(puon_recommend(model.get(), data.get(), ids.data(), ids.size(), top_k,
                       rows.data(), rows.size(), &written),
        "recommend");

  std::ostringstream text;
  text << "drug\trank\tdisease\tscore\n";
  for (size_t t = 0; t < written; ++t) {
    char score[32];
    std::snprintf(score, sizeof score, "%.6f", rows[t].score);
    text << rows[t].drug_id << '\t' << rows[t].rank << '\t' << rows[t].disease_id
         << '\t' << score << '\n';
  }
  std::cout << text.str();
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out || !(out << text.str()))
      throw Failure{PUON_ERR_IO, "cannot write " + out_path};
  }
  return 0;
}

int cmd_check(const Overrides& o) {
  ConfigPtr cfg = make_config(o);
  const unsigned long long seed = std::stoull(get(cfg.get(), "seed"));
  size_t failed = 0;
  const puon_status st = puon_run_checks(
      seed,
      [](const char* name, int passed, const char* detail, void*) {
        std::printf("%s  %s: %s\n", passed ? "PASS" : "FAIL", name, detail);
        std::fflush(stdout);
      },
      nullptr, &failed);
  if (st == PUON_ERR_CHECK_FAILED) return 1;
  check(st, "check");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PU-learning drug-disease association prediction"};
  app.set_version_flag("--version", std::string(puon_version()));
  app.require_subcommand(1);
  // "--h" is the embedding width, so help is long-form only.
  app.set_help_flag("--help", "print this help and exit");

  Overrides cv_o, nd_o, rec_o, chk_o;
  auto* cv = app.add_subcommand("cv", "repeated k-fold cross-validation");
  add_common(cv, cv_o);
  auto* nd = app.add_subcommand("newdrug", "hold out every single-association drug");
  add_common(nd, nd_o);
  auto* rec = app.add_subcommand("recommend", "rank unknown diseases for given drugs");
  add_common(rec, rec_o);
  std::vector<std::string> drugs;
  size_t top_k = 5;
  std::string out_path, save_path;
  rec->add_option("--drugs", drugs, "drug identifiers")->required()->delimiter(',');
  rec->add_option("--top-k", top_k, "diseases per drug");
  rec->add_option("--out", out_path, "also write the table here");
  rec->add_option("--save-model", save_path, "write the trained model checkpoint");
  auto* chk = app.add_subcommand("check", "numerical self checks");
  add_common(chk, chk_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cv) return cmd_cv(cv_o);
    if (*nd) return cmd_newdrug(nd_o);
    if (*rec) return cmd_recommend(rec_o, drugs, top_k, out_path, save_path);
    if (*chk) return cmd_check(chk_o);
  } catch (const Failure& f) {
    std::fprintf(stderr, "puon: %s (%s)\n", f.message.c_str(), puon_status_string(f.status));
    return 2;
  }
  return 1;
}
