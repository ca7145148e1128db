#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ctg/error.hpp"
#include "ctg/experiment.hpp"
#include "support/fixtures.hpp"

using namespace ctg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), path.string());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

// Small dataset in the real table's shape, written where the experiment can
// load it.
std::string write_small_csv(const ctg::testing::TempDir& dir) {
    const Dataset full = ctg::testing::make_synthetic_ctg(123);
    std::vector<std::size_t> head(600);
    for (std::size_t i = 0; i < head.size(); ++i) head[i] = i;
    const Dataset small = take_rows(full, head);
    const std::string path = (dir.path() / "data.csv").string();
    write_csv(small, FeatureSchema::ctg(), path);
    return path;
}

ExperimentConfig fast_config(const std::string& data, const fs::path& out) {
    ParamGrid tree_grid;
    tree_grid.axes = {GridAxis{"max_depth", {4}}};
    ParamGrid knn_grid;
    knn_grid.axes = {GridAxis{"k", {3}}};

    ExperimentConfig cfg;
    cfg.data_path = data;
    cfg.out_dir = out.string();
    cfg.seed = 11;
    cfg.cv.folds = 2;
    cfg.models = {ModelKind::decision_tree, ModelKind::knn};
    cfg.grids[ModelKind::decision_tree] = tree_grid;
    cfg.grids[ModelKind::knn] = knn_grid;
    cfg.ensembles = {{ModelKind::decision_tree, ModelKind::knn}};
    return cfg;
}

void run_all_stages(const ExperimentConfig& cfg) {
    Experiment exp(cfg);
    exp.run_prepare();
    exp.run_tune(ModelKind::decision_tree);
    exp.run_tune(ModelKind::knn);
    exp.run_ensemble({ModelKind::decision_tree, ModelKind::knn});
    exp.run_evaluate({});
}

}  // namespace

TEST_CASE("default config covers all trainable kinds and stock ensembles") {
    const ExperimentConfig cfg = default_experiment_config();
    CHECK(cfg.models.size() == 7);
    CHECK(cfg.ensembles.size() == 10);
    CHECK(default_ensembles().size() == 10);
    // the proposed combination ships in the stock list
    bool proposed = false;
    for (const auto& members : cfg.ensembles)
        proposed = proposed ||
                   ensemble_name(members) == "extra_trees+svm";
    CHECK(proposed);
}

TEST_CASE("ensemble names join members with plus signs") {
    CHECK(ensemble_name({ModelKind::extra_trees, ModelKind::svm}) ==
          "extra_trees+svm");
    CHECK(ensemble_name({ModelKind::svm, ModelKind::extra_trees,
                         ModelKind::random_forest}) ==
          "svm+extra_trees+random_forest");
}

TEST_CASE("config parsing is strict about keys and member selection") {
    const auto parse = [](const char* text) {
        return experiment_config_from_json(nlohmann::json::parse(text));
    };
    CHECK_THROWS_AS(parse(R"({"outputs": "x"})"), Error);
    CHECK_THROWS_AS(parse(R"({"models": ["svm", "svm"]})"), Error);
    CHECK_THROWS_AS(parse(R"({"models": ["voting"]})"), Error);
    CHECK_THROWS_AS(parse(R"({"models": []})"), Error);
    // explicit ensemble with a member outside the model list
    CHECK_THROWS_AS(
        parse(R"({"models": ["knn"], "ensembles": [["knn", "svm"]]})"), Error);
    CHECK_THROWS_AS(
        parse(R"({"models": ["knn", "svm"], "ensembles": [["knn"]]})"), Error);

    // listing models without ensembles prunes stock combos to the selection
    const ExperimentConfig pruned =
        parse(R"({"models": ["extra_trees", "svm", "random_forest"]})");
    CHECK(pruned.ensembles.size() == 3);  // et+svm, rf+svm, svm+et+rf
    for (const auto& members : pruned.ensembles)
        for (const ModelKind m : members)
            CHECK(std::count(pruned.models.begin(), pruned.models.end(), m) ==
                  1);

    const ExperimentConfig cfg = parse(R"({
        "data": "in.csv",
        "seed": 9,
        "cv": {"folds": 3},
        "pipeline": {"mode": "leakage_safe", "oversample": true},
        "models": ["knn"]
    })");
    CHECK(cfg.data_path == "in.csv");
    CHECK(cfg.seed == 9);
    CHECK(cfg.cv.folds == 3);
    CHECK(cfg.pipeline.mode == PipelineMode::leakage_safe);
    CHECK(cfg.models == std::vector<ModelKind>{ModelKind::knn});
    CHECK(cfg.ensembles.empty());
}

TEST_CASE("experiment requires an output directory") {
    unsetenv("CTG_OUT_DIR");
    ExperimentConfig cfg = default_experiment_config();
    cfg.data_path = "unused.csv";
    try {
        Experiment exp(cfg);
        FAIL("expected an output-directory error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("CTG_OUT_DIR") != std::string::npos);
    }

    ctg::testing::TempDir dir("exp_env");
    setenv("CTG_OUT_DIR", dir.path().c_str(), 1);
    Experiment exp(cfg);
    CHECK(exp.out_dir() == dir.path());
    unsetenv("CTG_OUT_DIR");
}

TEST_CASE("stages persist artifacts and later stages reload them") {
    ctg::testing::TempDir dir("exp_run");
    const std::string data = write_small_csv(dir);
    const fs::path out = dir.path() / "run";
    const ExperimentConfig cfg = fast_config(data, out);

    Experiment exp(cfg);

    // tuning before preparing reports the missing artifacts
    try {
        exp.run_tune(ModelKind::knn);
        FAIL("expected missing prepared data");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("no prepared data") !=
              std::string::npos);
    }

    const PreparedData prepared = exp.run_prepare();
    CHECK(fs::exists(out / "prepared" / "train.csv"));
    CHECK(fs::exists(out / "prepared" / "test.csv"));
    CHECK(fs::exists(out / "prepared" / "pipeline_log.json"));
    CHECK(fs::exists(out / "prepared" / "standardizer.json"));
    CHECK(prepared.train.X.rows() + prepared.test.X.rows() > 600);  // oversampled

    // evaluating before tuning names the missing model
    try {
        exp.run_evaluate({"decision_tree"});
        FAIL("expected missing model");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("tune it first") != std::string::npos);
    }

    const GridResult tuned = exp.run_tune(ModelKind::decision_tree);
    CHECK(tuned.table.size() == 1);
    exp.run_tune(ModelKind::knn);
    CHECK(fs::exists(out / "grids" / "decision_tree.json"));
    CHECK(fs::exists(out / "models" / "decision_tree.json"));
    CHECK(fs::exists(out / "models" / "knn.json"));

    exp.run_ensemble({ModelKind::decision_tree, ModelKind::knn});
    CHECK(fs::exists(out / "models" / "decision_tree_knn.json"));
    CHECK(exp.model_path("decision_tree+knn").filename() ==
          "decision_tree_knn.json");

    const auto rows = exp.run_evaluate({});
    REQUIRE(rows.size() == 3);  // two models + the configured ensemble
    CHECK(rows[0].name == "decision_tree");
    CHECK(rows[1].name == "knn");
    CHECK(rows[2].name == "decision_tree+knn");
    for (const EvalRow& row : rows) {
        CHECK(row.metrics.accuracy > 50.0);  // far above chance
        CHECK_FALSE(row.proposed);
    }

    CHECK(fs::exists(out / "eval" / "overall.csv"));
    CHECK(fs::exists(out / "eval" / "per_class.csv"));
    CHECK(fs::exists(out / "eval" / "report.txt"));
    CHECK(fs::exists(out / "eval" / "confusion_decision_tree.csv"));
    CHECK(fs::exists(out / "eval" / "predictions_decision_tree_knn.csv"));

    // predictions are 1-based in row ids and class codes
    std::ifstream preds(out / "eval" / "predictions_knn.csv");
    std::string header, first;
    std::getline(preds, header);
    std::getline(preds, first);
    CHECK(header == "row,true,pred");
    CHECK(first.rfind("1,", 0) == 0);
    const char true_code = first[2];
    CHECK(true_code >= '1');
    CHECK(true_code <= '3');

    // a fresh instance rebuilds the report purely from persisted predictions
    const std::string overall = slurp(out / "eval" / "overall.csv");
    const std::string per_class = slurp(out / "eval" / "per_class.csv");
    Experiment reporter(cfg);
    const auto reported = reporter.run_report();
    REQUIRE(reported.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(reported[i].name == rows[i].name);
        CHECK(reported[i].metrics.accuracy ==
              doctest::Approx(rows[i].metrics.accuracy).epsilon(1e-12));
    }
    CHECK(slurp(out / "eval" / "overall.csv") == overall);
    CHECK(slurp(out / "eval" / "per_class.csv") == per_class);
}

TEST_CASE("identical configs reproduce identical artifacts") {
    ctg::testing::TempDir dir("exp_repro");
    const std::string data = write_small_csv(dir);
    const fs::path out_a = dir.path() / "a";
    const fs::path out_b = dir.path() / "b";

    run_all_stages(fast_config(data, out_a));
    run_all_stages(fast_config(data, out_b));

    for (const char* rel : {"prepared/train.csv", "prepared/test.csv",
                            "eval/overall.csv", "eval/per_class.csv",
                            "eval/confusion_knn.csv",
                            "eval/predictions_decision_tree.csv"}) {
        CAPTURE(rel);
        CHECK(slurp(out_a / rel) == slurp(out_b / rel));
    }
}

TEST_CASE("report without persisted predictions is an input error") {
    ctg::testing::TempDir dir("exp_report");
    const std::string data = write_small_csv(dir);
    const ExperimentConfig cfg = fast_config(data, dir.path() / "run");
    Experiment exp(cfg);
    exp.run_prepare();
    try {
        exp.run_report();
        FAIL("expected missing predictions");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("run evaluate first") !=
              std::string::npos);
    }
}
