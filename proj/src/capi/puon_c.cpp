#include "puon/puon.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "core/dataio.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/model.hpp"
#include "core/selfcheck.hpp"

struct puon_config {
  puon::RunConfig cfg;
};

struct puon_dataset {
  puon::Dataset data;
};

struct puon_model {
  puon::ModelParams params;
};

struct puon_run {
  puon::RunSummary summary;
};

namespace {

thread_local std::string g_last_error;

puon_status to_status(puon::ErrorCode code) {
  return static_cast<puon_status>(static_cast<int>(code));
}

template <typename Fn>
puon_status guarded(Fn&& fn) {
  try {
    fn();
    return PUON_OK;
  } catch (const puon::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PUON_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PUON_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PUON_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p)
    puon::fail(puon::ErrorCode::kInvalidArgument,
               std::string(what) + " must not be NULL");
}

void copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf) return;
  if (cap < s.size() + 1)
    puon::fail(puon::ErrorCode::kInvalidArgument,
               "buffer of " + std::to_string(cap) + " bytes too small, need " +
                   std::to_string(s.size() + 1));
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

}  // namespace

extern "C" {

const char* puon_version(void) { return "0.1.0"; }

const char* puon_status_string(puon_status status) {
  switch (status) {
    case PUON_OK: return "ok";
    case PUON_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PUON_ERR_IO: return "i/o error";
    case PUON_ERR_PARSE: return "parse error";
    case PUON_ERR_SHAPE: return "shape error";
    case PUON_ERR_VALIDATION: return "validation error";
    case PUON_ERR_CONFIG: return "configuration error";
    case PUON_ERR_NUMERIC: return "numeric error";
    case PUON_ERR_EMPTY_TEST: return "empty test set";
    case PUON_ERR_NO_NEIGHBOR: return "no neighbour";
    case PUON_ERR_UNDEFINED_METRIC: return "undefined metric";
    case PUON_ERR_UNKNOWN_ID: return "unknown identifier";
    case PUON_ERR_CHECK_FAILED: return "check failed";
    case PUON_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* puon_last_error(void) { return g_last_error.c_str(); }

puon_status puon_config_create(puon_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new puon_config{};
  });
}

void puon_config_destroy(puon_config* cfg) { delete cfg; }

puon_status puon_config_load(puon_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg, "cfg");
    require(path, "path");
    puon::RunConfig next = cfg->cfg;
    puon::apply_config_file(next, path);
    cfg->cfg = std::move(next);
  });
}

puon_status puon_config_set(puon_config* cfg, const char* key,
                            const char* value) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    puon::apply_setting(cfg->cfg, key, value);
  });
}

puon_status puon_config_get(const puon_config* cfg, const char* key, char* buf,
                            size_t cap, size_t* needed) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    copy_out(puon::get_setting(cfg->cfg, key), buf, cap, needed);
  });
}

puon_status puon_config_fingerprint(const puon_config* cfg, char out[17]) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    copy_out(puon::fingerprint(cfg->cfg), out, 17, nullptr);
  });
}

puon_status puon_dataset_load(const puon_config* cfg, puon_dataset** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = new puon_dataset{puon::load_dataset(cfg->cfg)};
  });
}

void puon_dataset_destroy(puon_dataset* data) { delete data; }

puon_status puon_dataset_shape(const puon_dataset* data, size_t* n_drugs,
                               size_t* n_diseases, size_t* n_positives) {
  return guarded([&] {
    require(data, "data");
    const auto& r = data->data.matrix;
    if (n_drugs) *n_drugs = r.n_drugs();
    if (n_diseases) *n_diseases = r.n_diseases();
    if (n_positives) *n_positives = r.ones();
  });
}

puon_status puon_dataset_count_single_drugs(const puon_dataset* data,
                                            size_t* out) {
  return guarded([&] {
    require(data, "data");
    require(out, "out");
    const auto& r = data->data.matrix;
    size_t count = 0;
    for (size_t i = 0; i < r.n_drugs(); ++i) count += r.row_sum(i) == 1;
    *out = count;
  });
}

puon_status puon_run_cv(const puon_config* cfg, const puon_dataset* data,
                        puon_run** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(data, "data");
    require(out, "out");
    *out = new puon_run{puon::run_cv(cfg->cfg, data->data)};
  });
}

puon_status puon_run_newdrug(const puon_config* cfg, const puon_dataset* data,
                             puon_run** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(data, "data");
    require(out, "out");
    *out = new puon_run{puon::run_newdrug(cfg->cfg, data->data)};
  });
}

void puon_run_destroy(puon_run* run) { delete run; }

size_t puon_run_count(const puon_run* run) {
  return run ? run->summary.records.size() : 0;
}

puon_status puon_run_metrics(const puon_run* run, size_t index,
                             puon_fold_metrics* out) {
  return guarded([&] {
    require(run, "run");
    require(out, "out");
    if (index >= run->summary.records.size())
      puon::fail(puon::ErrorCode::kInvalidArgument, "record index out of range");
    const auto& r = run->summary.records[index];
    *out = puon_fold_metrics{r.seed,          r.repeat,
                             r.fold,          r.metrics.auc,
                             r.metrics.aupr,  r.metrics.f1,
                             r.metrics.f1_max, r.metrics.n_test_pos,
                             r.metrics.n_test_neg, r.epochs_run,
                             r.final_risk};
  });
}

puon_status puon_run_hit_ratio(const puon_run* run, size_t index, size_t k,
                               double* out) {
  return guarded([&] {
    require(run, "run");
    require(out, "out");
    if (index >= run->summary.records.size())
      puon::fail(puon::ErrorCode::kInvalidArgument, "record index out of range");
    const auto& hr = run->summary.records[index].metrics.hr;
    const auto it = hr.find(k);
    if (it == hr.end())
      puon::fail(puon::ErrorCode::kInvalidArgument,
                 "HR@" + std::to_string(k) + " was not computed");
    *out = it->second;
  });
}

puon_status puon_run_report_dir(const puon_run* run, char* buf, size_t cap,
                                size_t* needed) {
  return guarded([&] {
    require(run, "run");
    copy_out(run->summary.report_dir.string(), buf, cap, needed);
  });
}

puon_status puon_model_train(const puon_config* cfg, const puon_dataset* data,
                             const char* log_path, puon_model** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(data, "data");
    require(out, "out");
    std::ofstream log;
    if (log_path) {
      log.open(log_path);
      if (!log)
        puon::fail(puon::ErrorCode::kIo, std::string("cannot write ") + log_path);
    }
    *out = new puon_model{
        puon::train_full(cfg->cfg, data->data, log_path ? &log : nullptr)};
  });
}

puon_status puon_model_load(const char* path, puon_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new puon_model{puon::load_checkpoint(path)};
  });
}

puon_status puon_model_save(const puon_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    puon::save_checkpoint(model->params, path);
  });
}

void puon_model_destroy(puon_model* model) { delete model; }

puon_status puon_model_predict(const puon_model* model,
                               const puon_dataset* data, size_t drug,
                               size_t disease, double* out) {
  return guarded([&] {
    require(model, "model");
    require(data, "data");
    require(out, "out");
    *out = puon::predict(model->params, data->data.matrix, data->data.drug_sim,
                         drug, disease);
  });
}

puon_status puon_recommend(const puon_model* model, const puon_dataset* data,
                           const char* const* drug_ids, size_t n_drugs,
                           size_t top_k, puon_recommendation* rows, size_t cap,
                           size_t* written) {
  return guarded([&] {
    require(model, "model");
    require(data, "data");
    require(drug_ids, "drug_ids");
    std::vector<std::string> ids;
    for (size_t t = 0; t < n_drugs; ++t) {
      require(drug_ids[t], "drug id");
      ids.emplace_back(drug_ids[t]);
    }
    const auto& p = model->params;
    const auto& r = data->data.matrix;
    if (p.n_drugs != r.n_drugs() || p.n_diseases != r.n_diseases())
      puon::fail(puon::ErrorCode::kShape, "model does not match dataset");
    const auto recs = puon::recommend(p, data->data, ids, top_k);
    if (recs.size() > cap)
      puon::fail(puon::ErrorCode::kInvalidArgument,
                 "output holds " + std::to_string(cap) + " rows, need " +
                     std::to_string(recs.size()));
    require(rows, "rows");
    for (size_t t = 0; t < recs.size(); ++t) {
      const auto& rec = recs[t];
      rows[t] = puon_recommendation{r.drug_ids()[rec.drug].c_str(),
                                    r.disease_ids()[rec.disease].c_str(),
                                    rec.drug,
                                    rec.disease,
                                    rec.rank,
                                    rec.score};
    }
    if (written) *written = recs.size();
  });
}

puon_status puon_run_checks(uint64_t seed, puon_check_callback cb, void* user,
                            size_t* n_failed) {
  size_t failed = 0;
  const puon_status st = guarded([&] {
    for (const auto& c : puon::run_self_checks(seed)) {
      if (!c.passed) ++failed;
      if (cb) cb(c.name.c_str(), c.passed ? 1 : 0, c.detail.c_str(), user);
    }
  });
  if (n_failed) *n_failed = failed;
  if (st != PUON_OK) return st;
  if (failed) {
    g_last_error = std::to_string(failed) + " check(s) failed";
    return PUON_ERR_CHECK_FAILED;
  }
  return PUON_OK;
}

}  // extern "C"
