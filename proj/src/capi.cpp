#include "ctg/ctg.h"

#include <cctype>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctg/error.hpp"
#include "ctg/experiment.hpp"
#include "ctg/ingest.hpp"
#include "ctg/model_io.hpp"

struct ctg_dataset {
    ctg::Dataset ds;
};

struct ctg_model {
    ctg::ModelFile file;
    ctg::ModelPtr model;
};

struct ctg_experiment {
    ctg::ExperimentConfig cfg;
    std::optional<ctg::Experiment> exp;

    ctg::Experiment& materialize() {
        if (!exp) exp.emplace(cfg);
        return *exp;
    }
};

namespace {

thread_local std::string g_last_error;

template <typename F>
int guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return CTG_OK;
    } catch (const ctg::Error& e) {
        g_last_error = e.what();
        return e.kind() == ctg::ErrorKind::input ? CTG_ERR_INPUT
                                                 : CTG_ERR_RUNTIME;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CTG_ERR_RUNTIME;
    }
}

char* dup_string(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (out) std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

void emit_json(char** slot, const nlohmann::json& doc) {
    if (slot) *slot = dup_string(doc.dump(2));
}

std::vector<std::string> split_any(const std::string& text,
                                   const char* separators) {
    std::vector<std::string> parts;
    std::string current;
    for (const char c : text) {
        if (std::strchr(separators, c)) {
            if (!current.empty()) parts.push_back(std::move(current));
            current.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            current += c;
        }
    }
    if (!current.empty()) parts.push_back(std::move(current));
    return parts;
}

nlohmann::json eval_rows_to_json(const std::vector<ctg::EvalRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const ctg::EvalRow& row : rows)
        out.push_back({{"name", row.name},
                       {"proposed", row.proposed},
                       {"accuracy", row.metrics.accuracy},
                       {"macro_f1", row.metrics.macro.f1},
                       {"weighted_f1", row.metrics.weighted.f1}});
    return out;
}

nlohmann::json tune_summary(const ctg::GridResult& result) {
    return {{"model", ctg::to_string(result.kind)},
            {"points", result.table.size()},
            {"best_params", result.best_params},
            {"best_mean_accuracy", result.best_mean},
            {"elapsed_seconds", result.elapsed_seconds}};
}

}  // namespace

extern "C" {

const char* ctg_version(void) { return "1.0.0"; }

const char* ctg_last_error(void) { return g_last_error.c_str(); }

void ctg_str_free(char* text) { std::free(text); }

/* ---- datasets ------------------------------------------------------- */

int ctg_dataset_load(const char* path, ctg_dataset** out) {
    return guarded([&] {
        if (!path || !out) ctg::throw_input("null argument");
        auto handle = std::make_unique<ctg_dataset>();
        handle->ds = ctg::load_csv(path, ctg::FeatureSchema::ctg());
        *out = handle.release();
    });
}

size_t ctg_dataset_rows(const ctg_dataset* ds) {
    return ds ? ds->ds.rows() : 0;
}

size_t ctg_dataset_features(const ctg_dataset* ds) {
    return ds ? ds->ds.X.cols() : 0;
}

int ctg_dataset_class_count(const ctg_dataset* ds) {
    return ds ? ds->ds.class_count : 0;
}

int ctg_dataset_label(const ctg_dataset* ds, size_t row) {
    if (!ds || row >= ds->ds.y.size()) return -1;
    return ds->ds.y[row] + 1;
}

void ctg_dataset_free(ctg_dataset* ds) { delete ds; }

/* ---- models --------------------------------------------------------- */

int ctg_model_load(const char* path, ctg_model** out) {
    return guarded([&] {
        if (!path || !out) ctg::throw_input("null argument");
        auto handle = std::make_unique<ctg_model>();
        handle->file = ctg::load_model(path);
        handle->model = handle->file.instantiate();
        *out = handle.release();
    });
}

int ctg_model_save(const ctg_model* model, const char* path) {
    return guarded([&] {
        if (!model || !path) ctg::throw_input("null argument");
        ctg::save_model(model->file, path);
    });
}

const char* ctg_model_kind(const ctg_model* model) {
    return model ? ctg::to_string(model->model->kind()) : "";
}

size_t ctg_model_features(const ctg_model* model) {
    return model ? model->model->feature_count() : 0;
}

int ctg_model_predict(const ctg_model* model, const double* rows,
                      size_t n_rows, size_t n_features,
                      int apply_standardizer, int* out_labels) {
    return guarded([&] {
        if (!model || !rows || !out_labels)
            ctg::throw_input("null argument");
        if (n_features != model->model->feature_count())
            ctg::throw_input("row width does not match the model");
        ctg::Matrix X(n_rows, n_features);
        for (size_t i = 0; i < n_rows; ++i)
            for (size_t j = 0; j < n_features; ++j)
                X.at(i, j) = rows[i * n_features + j];
        if (apply_standardizer && model->file.standardizer)
            X = model->file.standardizer->transform(X);
        const ctg::Labels pred = model->model->predict(X);
        for (size_t i = 0; i < pred.size(); ++i)
            out_labels[i] = pred[i] + 1;
    });
}

void ctg_model_free(ctg_model* model) { delete model; }

/* ---- experiments ---------------------------------------------------- */

int ctg_experiment_create(const char* config_json, ctg_experiment** out) {
    return guarded([&] {
        if (!out) ctg::throw_input("null argument");
        auto handle = std::make_unique<ctg_experiment>();
        if (config_json && *config_json) {
            nlohmann::ordered_json doc;
            try {
                doc = nlohmann::ordered_json::parse(config_json);
            } catch (const nlohmann::json::parse_error& e) {
                ctg::throw_input(std::string("config is not valid JSON: ") +
                                 e.what());
            }
            handle->cfg = ctg::experiment_config_from_json(doc);
        } else {
            handle->cfg = ctg::default_experiment_config();
        }
        *out = handle.release();
    });
}

int ctg_experiment_from_file(const char* config_path, ctg_experiment** out) {
    return guarded([&] {
        if (!config_path || !out) ctg::throw_input("null argument");
        auto handle = std::make_unique<ctg_experiment>();
        handle->cfg = ctg::load_experiment_config(config_path);
        *out = handle.release();
    });
}

int ctg_experiment_set(ctg_experiment* exp, const char* key,
                       const char* value) {
    return guarded([&] {
        if (!exp || !key || !value) ctg::throw_input("null argument");
        const std::string k = key;
        if (k == "data") {
            exp->cfg.data_path = value;
        } else if (k == "out" || k == "out_dir") {
            exp->cfg.out_dir = value;
        } else if (k == "seed") {
            std::size_t used = 0;
            const std::string text = value;
            std::uint64_t seed = 0;
            try {
                seed = std::stoull(text, &used);
            } catch (const std::exception&) {
                ctg::throw_input("seed must be an unsigned integer");
            }
            if (used != text.size())
                ctg::throw_input("seed must be an unsigned integer");
            exp->cfg.seed = seed;
        } else if (k == "mode") {
            exp->cfg.pipeline.mode = ctg::pipeline_mode_from_string(value);
        } else {
            ctg::throw_input("unknown config key '" + k + "'");
        }
        exp->exp.reset();
    });
}

int ctg_experiment_prepare(ctg_experiment* exp, char** out_json) {
    return guarded([&] {
        if (!exp) ctg::throw_input("null argument");
        const ctg::PreparedData prepared = exp->materialize().run_prepare();
        emit_json(out_json,
                  {{"mode", ctg::to_string(prepared.mode)},
                   {"train_rows", prepared.train.rows()},
                   {"test_rows", prepared.test.rows()},
                   {"train_class_counts",
                    ctg::class_histogram(prepared.train.y,
                                         prepared.train.class_count)},
                   {"test_class_counts",
                    ctg::class_histogram(prepared.test.y,
                                         prepared.test.class_count)}});
    });
}

int ctg_experiment_tune(ctg_experiment* exp, const char* kind,
                        char** out_json) {
    return guarded([&] {
        if (!exp || !kind) ctg::throw_input("null argument");
        ctg::Experiment& run = exp->materialize();
        const std::string name = kind;
        if (name == "all" || name.empty()) {
            nlohmann::json all = nlohmann::json::array();
            for (const ctg::ModelKind k : run.config().models)
                all.push_back(tune_summary(run.run_tune(k)));
            emit_json(out_json, all);
        } else {
            const ctg::GridResult result =
                run.run_tune(ctg::model_kind_from_string(name));
            emit_json(out_json, tune_summary(result));
        }
    });
}

int ctg_experiment_ensemble(ctg_experiment* exp, const char* members) {
    return guarded([&] {
        if (!exp || !members) ctg::throw_input("null argument");
        std::vector<ctg::ModelKind> kinds;
        for (const std::string& part : split_any(members, "+,"))
            kinds.push_back(ctg::model_kind_from_string(part));
        exp->materialize().run_ensemble(kinds);
    });
}

int ctg_experiment_evaluate(ctg_experiment* exp, const char* names,
                            char** out_json) {
    return guarded([&] {
        if (!exp) ctg::throw_input("null argument");
        std::vector<std::string> wanted;
        if (names && *names) wanted = split_any(names, ",");
        const auto rows = exp->materialize().run_evaluate(std::move(wanted));
        emit_json(out_json, eval_rows_to_json(rows));
    });
}

int ctg_experiment_report(ctg_experiment* exp, char** out_json) {
    return guarded([&] {
        if (!exp) ctg::throw_input("null argument");
        const auto rows = exp->materialize().run_report();
        emit_json(out_json, eval_rows_to_json(rows));
    });
}

void ctg_experiment_free(ctg_experiment* exp) { delete exp; }

}  // extern "C"
