#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctg/cross_validation.hpp"
#include "ctg/grid_search.hpp"
#include "ctg/ingest.hpp"
#include "ctg/metrics.hpp"
#include "ctg/model.hpp"
#include "ctg/preprocess.hpp"

namespace ctg {

struct ExperimentConfig {
    std::string data_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    PipelineConfig pipeline;
    CvConfig cv;
    std::vector<ModelKind> models;                  // tuning/report order
    std::map<ModelKind, ParamGrid> grids;           // overrides per kind
    std::vector<std::vector<ModelKind>> ensembles;  // member lists
};

// The ten stock two-to-three member combinations, proposed entry included.
const std::vector<std::vector<ModelKind>>& default_ensembles();

ExperimentConfig default_experiment_config();
// Strict: unknown keys are input errors. Pass nlohmann::ordered_json when
// grid axis order in the file matters.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

std::string ensemble_name(const std::vector<ModelKind>& members);  // "a+b"

struct EvalRow {
    std::string name;
    bool proposed = false;  // the extra_trees+svm entry
    MetricsReport metrics;
};

// Orchestrates one output directory: prepared data, tuned models, metric
// tables. Each stage persists everything the next stage needs, so stages can
// run in separate processes.
class Experiment {
public:
    explicit Experiment(ExperimentConfig cfg);

    const ExperimentConfig& config() const { return cfg_; }
    std::filesystem::path out_dir() const { return cfg_.out_dir; }

    // load CSV -> pipeline -> prepared/{train,test}.csv + logs
    PreparedData run_prepare();

    // grid search + refit winner -> grids/<kind>.json, models/<kind>.json
    GridResult run_tune(ModelKind kind);
    void run_tune_all();

    // persist a voting model over already-tuned members
    void run_ensemble(const std::vector<ModelKind>& members);

    // score names (model kinds or "a+b" combos; empty = models + ensembles
    // from config) on the prepared test set; persists predictions and tables
    std::vector<EvalRow> run_evaluate(std::vector<std::string> names);

    // rebuild every table strictly from persisted predictions
    std::vector<EvalRow> run_report();

    std::filesystem::path model_path(const std::string& name) const;

private:
    PreparedData& prepared();
    ModelPtr load_or_assemble(const std::string& name) const;
    void write_eval_tables(const std::vector<EvalRow>& rows,
                           const std::string& heading) const;

    ExperimentConfig cfg_;
    std::string config_hash_;
    std::optional<PreparedData> prepared_;
};

}  // namespace ctg
