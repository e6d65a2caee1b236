#include <doctest.h>

#include <puon/puon.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "support/synth.hpp"

namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path dir = puon::test::scratch_dir("capi");
  puon_config* cfg = nullptr;
  puon_dataset* data = nullptr;

  Fixture() {
    const auto synth = puon::test::make_synthetic(
        {.n_drugs = 30, .n_diseases = 20, .clusters = 3, .seed = 7});
    const auto path = puon::test::write_synthetic(synth, dir / "data");
    REQUIRE(puon_config_create(&cfg) == PUON_OK);
    REQUIRE(puon_config_load(cfg, path.string().c_str()) == PUON_OK);
    const std::initializer_list<std::pair<const char*, const char*>> settings = {
        {"h", "8"},       {"epochs", "10"},    {"lr", "0.01"},     {"unl_ratio", "3"},
        {"k_folds", "2"}, {"cv_repeats", "1"}, {"hr_ks", "[1,5]"}};
    for (auto [k, v] : settings)
      REQUIRE(puon_config_set(cfg, k, v) == PUON_OK);
    REQUIRE(puon_config_set(cfg, "output_dir", (dir / "runs").string().c_str()) == PUON_OK);
    REQUIRE(puon_dataset_load(cfg, &data) == PUON_OK);
  }
  ~Fixture() {
    puon_dataset_destroy(data);
    puon_config_destroy(cfg);
    fs::remove_all(dir);
  }
};

}  // namespace

TEST_CASE("status strings and version") {
  CHECK(std::string(puon_version()) == "0.1.0");
  CHECK(std::string(puon_status_string(PUON_OK)) == "ok");
  CHECK(std::string(puon_status_string(PUON_ERR_UNKNOWN_ID)) == "unknown identifier");
}

TEST_CASE("configuration through the C interface") {
  puon_config* cfg = nullptr;
  REQUIRE(puon_config_create(&cfg) == PUON_OK);
  CHECK(puon_config_set(cfg, "h", "12") == PUON_OK);
  size_t needed = 0;
  CHECK(puon_config_get(cfg, "h", nullptr, 0, &needed) == PUON_OK);
  CHECK(needed == 3);
  char buf[8];
  CHECK(puon_config_get(cfg, "h", buf, sizeof buf, nullptr) == PUON_OK);
  CHECK(std::string(buf) == "12");
  char tiny[2];
  CHECK(puon_config_get(cfg, "h", tiny, sizeof tiny, nullptr) == PUON_ERR_INVALID_ARGUMENT);

  CHECK(puon_config_set(cfg, "readout", "conv") == PUON_ERR_CONFIG);
  CHECK(std::string(puon_last_error()).find("conv") != std::string::npos);
  CHECK(puon_config_set(cfg, "nonsense", "1") == PUON_ERR_CONFIG);
  CHECK(puon_config_set(nullptr, "h", "1") == PUON_ERR_INVALID_ARGUMENT);

  char fp[17];
  CHECK(puon_config_fingerprint(cfg, fp) == PUON_OK);
  CHECK(std::strlen(fp) == 16);

  CHECK(puon_config_load(cfg, "/no/such/config.json") == PUON_ERR_IO);
  puon_dataset* data = nullptr;
  CHECK(puon_dataset_load(cfg, &data) == PUON_ERR_CONFIG);
  CHECK(data == nullptr);
  puon_config_destroy(cfg);
  puon_config_destroy(nullptr);
}

TEST_CASE("dataset, runs and models") {
  Fixture f;
  size_t m = 0, n = 0, ones = 0, singles = 0;
  CHECK(puon_dataset_shape(f.data, &m, &n, &ones) == PUON_OK);
  CHECK(m == 30);
  CHECK(n == 20);
  CHECK(ones > 0);
  CHECK(puon_dataset_count_single_drugs(f.data, &singles) == PUON_OK);

  SUBCASE("cv") {
    puon_run* run = nullptr;
    REQUIRE(puon_run_cv(f.cfg, f.data, &run) == PUON_OK);
    CHECK(puon_run_count(run) == 2);
    puon_fold_metrics metrics{};
    CHECK(puon_run_metrics(run, 1, &metrics) == PUON_OK);
    CHECK(metrics.fold == 1);
    CHECK(metrics.auc >= 0.0);
    double hr1 = 0, hr5 = 0;
    CHECK(puon_run_hit_ratio(run, 0, 1, &hr1) == PUON_OK);
    CHECK(puon_run_hit_ratio(run, 0, 5, &hr5) == PUON_OK);
    CHECK(hr1 <= hr5);
    CHECK(puon_run_hit_ratio(run, 0, 7, &hr5) == PUON_ERR_INVALID_ARGUMENT);
    CHECK(puon_run_metrics(run, 2, &metrics) == PUON_ERR_INVALID_ARGUMENT);
    size_t needed = 0;
    CHECK(puon_run_report_dir(run, nullptr, 0, &needed) == PUON_OK);
    std::string dir(needed, '\0');
    CHECK(puon_run_report_dir(run, dir.data(), dir.size(), nullptr) == PUON_OK);
    dir.pop_back();
    CHECK(fs::exists(fs::path(dir) / "summary.json"));
    puon_run_destroy(run);
  }
  SUBCASE("newdrug") {
    puon_run* run = nullptr;
    CHECK(puon_config_set(f.cfg, "cv_repeats", "2") == PUON_OK);
    REQUIRE(puon_run_newdrug(f.cfg, f.data, &run) == PUON_OK);
    CHECK(puon_run_count(run) == 2);
    puon_fold_metrics metrics{};
    CHECK(puon_run_metrics(run, 0, &metrics) == PUON_OK);
    CHECK(metrics.n_test_pos == singles);
    puon_run_destroy(run);
  }
  SUBCASE("train, save, load, predict, recommend") {
    puon_model* model = nullptr;
    const auto log = f.dir / "train.log";
    REQUIRE(puon_model_train(f.cfg, f.data, log.string().c_str(), &model) == PUON_OK);
    CHECK(fs::file_size(log) > 0);
    const auto ckpt = f.dir / "model.json";
    REQUIRE(puon_model_save(model, ckpt.string().c_str()) == PUON_OK);
    puon_model* again = nullptr;
    REQUIRE(puon_model_load(ckpt.string().c_str(), &again) == PUON_OK);
    double a = 0, b = 0;
    CHECK(puon_model_predict(model, f.data, 3, 4, &a) == PUON_OK);
    CHECK(puon_model_predict(again, f.data, 3, 4, &b) == PUON_OK);
    CHECK(a == b);
    CHECK(puon_model_predict(model, f.data, 30, 0, &a) == PUON_ERR_INVALID_ARGUMENT);

    const char* ids[] = {"DR1", "DR2"};
    std::vector<puon_recommendation> rows(6);
    size_t written = 0;
    CHECK(puon_recommend(model, f.data, ids, 2, 3, rows.data(), rows.size(), &written) == PUON_OK);
    CHECK(written == 6);
    CHECK(std::string(rows[0].drug_id) == "DR1");
    CHECK(rows[0].rank == 1);
    CHECK(rows[3].rank == 1);
    CHECK(rows[0].score >= rows[1].score);
    CHECK(puon_recommend(model, f.data, ids, 2, 3, rows.data(), 5, &written) ==
          PUON_ERR_INVALID_ARGUMENT);
    const char* bad[] = {"DR1", "XX"};
    CHECK(puon_recommend(model, f.data, bad, 2, 3, rows.data(), rows.size(), &written) ==
          PUON_ERR_UNKNOWN_ID);
    CHECK(std::string(puon_last_error()).find("XX") != std::string::npos);
    puon_model_destroy(again);
    puon_model_destroy(model);
  }
}

TEST_CASE("missing checkpoint") {
  puon_model* model = nullptr;
  CHECK(puon_model_load("/no/such/model.json", &model) == PUON_ERR_IO);
}
