#include "ctg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "ctg/error.hpp"
#include "ctg/model_factory.hpp"
#include "ctg/model_io.hpp"
#include "ctg/rng.hpp"
#include "ctg/voting.hpp"

namespace ctg {

namespace {

namespace fs = std::filesystem;

constexpr const char* kClassNames[] = {"Normal", "Suspect", "Pathological"};

std::string class_name(int c, int class_count) {
    if (class_count == 3) return kClassNames[c];
    return "class" + std::to_string(c);
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string file_stem(const std::string& name) {
    std::string stem = name;
    std::replace(stem.begin(), stem.end(), '+', '_');
    return stem;
}

std::vector<ModelKind> parse_members(const std::string& name) {
    std::vector<ModelKind> members;
    std::stringstream ss(name);
    std::string part;
    while (std::getline(ss, part, '+'))
        members.push_back(model_kind_from_string(part));
    return members;
}

}  // namespace

const std::vector<std::vector<ModelKind>>& default_ensembles() {
    using enum ModelKind;
    static const std::vector<std::vector<ModelKind>> table = {
        {gbt_hist, svm},
        {gbt_exact, svm},
        {extra_trees, svm},
        {random_forest, svm},
        {decision_tree, svm},
        {extra_trees, gbt_hist},
        {decision_tree, extra_trees},
        {gbt_exact, extra_trees},
        {gbt_exact, gbt_hist},
        {svm, extra_trees, random_forest},
    };
    return table;
}

ExperimentConfig default_experiment_config() {
    ExperimentConfig cfg;
    cfg.models.assign(kTrainableKinds.begin(), kTrainableKinds.end());
    cfg.ensembles = default_ensembles();
    return cfg;
}

std::string ensemble_name(const std::vector<ModelKind>& members) {
    std::string name;
    for (const ModelKind kind : members) {
        if (!name.empty()) name += '+';
        name += to_string(kind);
    }
    return name;
}

namespace {

PipelineConfig pipeline_from_json(const nlohmann::json& j, PipelineConfig base) {
    for (const auto& [key, value] : j.items()) {
        if (key == "mode") {
            base.mode = pipeline_mode_from_string(value.get<std::string>());
        } else if (key == "impute") {
            const auto name = value.get<std::string>();
            if (name == "median")
                base.impute = ImputeStrategy::median;
            else if (name == "mean")
                base.impute = ImputeStrategy::mean;
            else
                throw_input("unknown impute strategy '" + name + "'");
        } else if (key == "outlier_rejection") {
            for (const auto& [okey, ovalue] : value.items()) {
                if (okey == "enabled")
                    base.outlier_enabled = ovalue.get<bool>();
                else if (okey == "k")
                    base.outlier_k = ovalue.get<double>();
                else
                    throw_input("unknown outlier_rejection key '" + okey + "'");
            }
        } else if (key == "oversample") {
            base.oversample_enabled = value.get<bool>();
        } else if (key == "train_fraction") {
            base.train_fraction = value.get<double>();
        } else if (key == "stratify_split") {
            base.stratify_split = value.get<bool>();
        } else {
            throw_input("unknown pipeline key '" + key + "'");
        }
    }
    return base;
}

nlohmann::json pipeline_to_json(const PipelineConfig& p) {
    return {{"mode", to_string(p.mode)},
            {"impute", p.impute == ImputeStrategy::median ? "median" : "mean"},
            {"outlier_rejection",
             {{"enabled", p.outlier_enabled}, {"k", p.outlier_k}}},
            {"oversample", p.oversample_enabled},
            {"train_fraction", p.train_fraction},
            {"stratify_split", p.stratify_split}};
}

}  // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg = default_experiment_config();
    if (!j.is_object()) throw_input("experiment config must be a JSON object");
    bool models_listed = false;
    bool ensembles_listed = false;
    for (const auto& [key, value] : j.items()) {
        if (key == "data") {
            cfg.data_path = value.get<std::string>();
        } else if (key == "out_dir") {
            cfg.out_dir = value.get<std::string>();
        } else if (key == "seed") {
            cfg.seed = value.get<std::uint64_t>();
        } else if (key == "pipeline") {
            cfg.pipeline = pipeline_from_json(value, cfg.pipeline);
        } else if (key == "cv") {
            for (const auto& [ckey, cvalue] : value.items()) {
                if (ckey == "folds")
                    cfg.cv.folds = cvalue.get<int>();
                else if (ckey == "stratified")
                    cfg.cv.stratified = cvalue.get<bool>();
                else
                    throw_input("unknown cv key '" + ckey + "'");
            }
        } else if (key == "models") {
            cfg.models.clear();
            for (const auto& name : value)
                cfg.models.push_back(
                    model_kind_from_string(name.get<std::string>()));
            models_listed = true;
        } else if (key == "grids") {
            for (const auto& [name, grid] : value.items())
                cfg.grids[model_kind_from_string(name)] = grid_from_json(grid);
        } else if (key == "ensembles") {
            cfg.ensembles.clear();
            for (const auto& entry : value) {
                std::vector<ModelKind> members;
                for (const auto& name : entry)
                    members.push_back(
                        model_kind_from_string(name.get<std::string>()));
                cfg.ensembles.push_back(std::move(members));
            }
            ensembles_listed = true;
        } else {
            throw_input("unknown config key '" + key + "'");
        }
    }

    if (cfg.models.empty()) throw_input("config selects no models");
    for (const ModelKind kind : cfg.models) {
        if (kind == ModelKind::voting)
            throw_input("voting is not a tunable model kind");
        if (std::count(cfg.models.begin(), cfg.models.end(), kind) > 1)
            throw_input(fmt::format("model '{}' listed twice", to_string(kind)));
    }
    if (models_listed && !ensembles_listed) {
        // keep only stock combinations whose members are all selected
        std::vector<std::vector<ModelKind>> kept;
        for (const auto& members : cfg.ensembles) {
            const bool ok = std::all_of(
                members.begin(), members.end(), [&](ModelKind m) {
                    return std::count(cfg.models.begin(), cfg.models.end(), m) >
                           0;
                });
            if (ok) kept.push_back(members);
        }
        cfg.ensembles = std::move(kept);
    }
    for (const auto& members : cfg.ensembles) {
        if (members.size() < 2)
            throw_input("ensembles need at least 2 members");
        for (const ModelKind m : members)
            if (std::count(cfg.models.begin(), cfg.models.end(), m) == 0)
                throw_input(fmt::format(
                    "ensemble member '{}' is not a selected model",
                    to_string(m)));
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_input("cannot open config file '" + path.string() + "'");
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw_input(fmt::format("config file '{}' is not valid JSON: {}",
                                path.string(), e.what()));
    }
    return experiment_config_from_json(doc);
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json models = nlohmann::json::array();
    for (const ModelKind kind : cfg.models) models.push_back(to_string(kind));
    nlohmann::json grids = nlohmann::json::object();
    for (const auto& [kind, grid] : cfg.grids)
        grids[to_string(kind)] = grid_to_json(grid);
    nlohmann::json ensembles = nlohmann::json::array();
    for (const auto& members : cfg.ensembles) {
        nlohmann::json entry = nlohmann::json::array();
        for (const ModelKind m : members) entry.push_back(to_string(m));
        ensembles.push_back(std::move(entry));
    }
    return {{"data", cfg.data_path},
            {"out_dir", cfg.out_dir},
            {"seed", cfg.seed},
            {"pipeline", pipeline_to_json(cfg.pipeline)},
            {"cv", {{"folds", cfg.cv.folds}, {"stratified", cfg.cv.stratified}}},
            {"models", std::move(models)},
            {"grids", std::move(grids)},
            {"ensembles", std::move(ensembles)}};
}

Experiment::Experiment(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.out_dir.empty()) {
        if (const char* env = std::getenv("CTG_OUT_DIR"))
            cfg_.out_dir = env;
    }
    if (cfg_.out_dir.empty())
        throw_input("no output directory: set out_dir, --out, or CTG_OUT_DIR");
    config_hash_ = fnv1a_hex(experiment_config_to_json(cfg_).dump());
}

std::filesystem::path Experiment::model_path(const std::string& name) const {
    return fs::path(cfg_.out_dir) / "models" / (file_stem(name) + ".json");
}

PreparedData Experiment::run_prepare() {
    if (cfg_.data_path.empty()) throw_input("config has no data path");
    Dataset raw = load_csv(cfg_.data_path, FeatureSchema::ctg());
    const auto warnings = validate_ranges(raw, FeatureSchema::ctg());

    PipelineConfig pipeline = cfg_.pipeline;
    pipeline.master_seed = cfg_.seed;
    PreparedData prepared = run_pipeline(pipeline, raw);

    const fs::path dir = fs::path(cfg_.out_dir) / "prepared";
    fs::create_directories(dir);
    write_csv(prepared.train, FeatureSchema::ctg(), dir / "train.csv");
    write_csv(prepared.test, FeatureSchema::ctg(), dir / "test.csv");

    nlohmann::json steps = nlohmann::json::array();
    for (const StepLog& step : prepared.log)
        steps.push_back({{"step", step.step},
                         {"rows_before", step.rows_before},
                         {"rows_after", step.rows_after},
                         {"detail", step.detail}});
    const auto train_counts =
        class_histogram(prepared.train.y, prepared.train.class_count);
    const auto test_counts =
        class_histogram(prepared.test.y, prepared.test.class_count);
    nlohmann::json log = {{"mode", to_string(prepared.mode)},
                          {"seed", cfg_.seed},
                          {"data", cfg_.data_path},
                          {"rows_loaded", raw.rows()},
                          {"range_warnings", warnings.size()},
                          {"steps", std::move(steps)},
                          {"train_rows", prepared.train.rows()},
                          {"test_rows", prepared.test.rows()},
                          {"train_class_counts", train_counts},
                          {"test_class_counts", test_counts}};
    write_text_atomic(dir / "pipeline_log.json", log.dump(2) + "\n");

    nlohmann::json standardizer = {{"means", prepared.standardizer.means},
                                   {"stds", prepared.standardizer.stds}};
    write_text_atomic(dir / "standardizer.json", standardizer.dump(2) + "\n");

    prepared_ = prepared;
    return prepared;
}

PreparedData& Experiment::prepared() {
    if (prepared_) return *prepared_;
    const fs::path dir = fs::path(cfg_.out_dir) / "prepared";
    if (!fs::exists(dir / "train.csv") || !fs::exists(dir / "test.csv"))
        throw_input("no prepared data under '" + dir.string() +
                    "'; run prepare first");
    PreparedData prepared;
    prepared.train = load_csv(dir / "train.csv", FeatureSchema::ctg());
    prepared.test = load_csv(dir / "test.csv", FeatureSchema::ctg());

    std::ifstream sin(dir / "standardizer.json");
    if (sin) {
        const auto doc = nlohmann::json::parse(sin);
        prepared.standardizer.means =
            doc.at("means").get<std::vector<double>>();
        prepared.standardizer.stds = doc.at("stds").get<std::vector<double>>();
    }
    std::ifstream lin(dir / "pipeline_log.json");
    if (lin) {
        const auto doc = nlohmann::json::parse(lin);
        prepared.mode =
            pipeline_mode_from_string(doc.at("mode").get<std::string>());
    }
    prepared_ = std::move(prepared);
    return *prepared_;
}

GridResult Experiment::run_tune(ModelKind kind) {
    if (kind == ModelKind::voting)
        throw_input("voting is not a tunable model kind");
    PreparedData& data = prepared();

    const ParamGrid grid = cfg_.grids.count(kind) ? cfg_.grids.at(kind)
                                                  : default_grid(kind);
    const std::uint64_t kind_seed =
        derive_seed(cfg_.seed, seed_tag(to_string(kind)));
    GridResult result = grid_search(kind, grid, data.train.X, data.train.y,
                                    data.train.class_count, cfg_.cv, kind_seed);

    const fs::path grid_path = fs::path(cfg_.out_dir) / "grids" /
                               (std::string(to_string(kind)) + ".json");
    write_text_atomic(grid_path, grid_result_to_json(result).dump(2) + "\n");

    const ModelPtr model =
        fit_model(kind, result.best_params, data.train.X, data.train.y,
                  data.train.class_count,
                  derive_seed(kind_seed, seed_tag("refit")));
    ModelFile file =
        model_file_for(*model, cfg_.seed, config_hash_, data.standardizer);
    save_model(file, model_path(to_string(kind)));
    return result;
}

void Experiment::run_tune_all() {
    for (const ModelKind kind : cfg_.models) run_tune(kind);
}

void Experiment::run_ensemble(const std::vector<ModelKind>& members) {
    if (members.size() < 2)
        throw_input("an ensemble needs at least 2 members");
    std::vector<ModelPtr> fitted;
    std::optional<Standardizer> standardizer;
    for (const ModelKind kind : members) {
        const fs::path path = model_path(to_string(kind));
        if (!fs::exists(path))
            throw_input(fmt::format("member model '{}' not found at '{}'",
                                    to_string(kind), path.string()));
        ModelFile file = load_model(path);
        if (!standardizer) standardizer = file.standardizer;
        fitted.push_back(file.instantiate());
    }
    const auto voter = fit_voting(std::move(fitted));
    ModelFile file =
        model_file_for(*voter, cfg_.seed, config_hash_, standardizer);
    save_model(file, model_path(ensemble_name(members)));
}

ModelPtr Experiment::load_or_assemble(const std::string& name) const {
    if (name.find('+') == std::string::npos) {
        const fs::path path = model_path(name);
        if (!fs::exists(path))
            throw_input(fmt::format("model '{}' not found at '{}'; tune it first",
                                    name, path.string()));
        return load_model(path).instantiate();
    }
    const fs::path path = model_path(name);
    if (fs::exists(path)) return load_model(path).instantiate();
    std::vector<ModelPtr> members;
    for (const ModelKind kind : parse_members(name)) {
        const fs::path member_path = model_path(to_string(kind));
        if (!fs::exists(member_path))
            throw_input(fmt::format("member model '{}' not found at '{}'",
                                    to_string(kind), member_path.string()));
        members.push_back(load_model(member_path).instantiate());
    }
    return fit_voting(std::move(members));
}

std::vector<EvalRow> Experiment::run_evaluate(std::vector<std::string> names) {
    if (names.empty()) {
        for (const ModelKind kind : cfg_.models)
            names.emplace_back(to_string(kind));
        for (const auto& members : cfg_.ensembles)
            names.push_back(ensemble_name(members));
    }
    PreparedData& data = prepared();
    const int K = data.test.class_count;

    std::vector<EvalRow> rows;
    const fs::path eval_dir = fs::path(cfg_.out_dir) / "eval";
    for (const std::string& name : names) {
        const ModelPtr model = load_or_assemble(name);
        const Labels pred = model->predict(data.test.X);

        std::string csv = "row,true,pred\n";
        for (std::size_t i = 0; i < pred.size(); ++i)
            csv += fmt::format("{},{},{}\n", i + 1, data.test.y[i] + 1,
                               pred[i] + 1);
        write_text_atomic(
            eval_dir / ("predictions_" + file_stem(name) + ".csv"), csv);

        EvalRow row;
        row.name = name;
        row.proposed = name == "extra_trees+svm";
        row.metrics = evaluate_predictions(data.test.y, pred, K);
        rows.push_back(std::move(row));
    }
    write_eval_tables(rows, "test-set evaluation");
    return rows;
}

std::vector<EvalRow> Experiment::run_report() {
    std::vector<std::string> names;
    for (const ModelKind kind : cfg_.models) names.emplace_back(to_string(kind));
    for (const auto& members : cfg_.ensembles)
        names.push_back(ensemble_name(members));

    const fs::path eval_dir = fs::path(cfg_.out_dir) / "eval";
    std::vector<EvalRow> rows;
    for (const std::string& name : names) {
        const fs::path path =
            eval_dir / ("predictions_" + file_stem(name) + ".csv");
        std::ifstream in(path);
        if (!in)
            throw_input(fmt::format(
                "no persisted predictions for '{}'; run evaluate first", name));
        std::string header;
        std::getline(in, header);
        Labels y_true, y_pred;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto c1 = line.find(',');
            const auto c2 = line.find(',', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos)
                throw_runtime("malformed predictions row in '" + path.string() +
                              "'");
            y_true.push_back(std::stoi(line.substr(c1 + 1, c2 - c1 - 1)) - 1);
            y_pred.push_back(std::stoi(line.substr(c2 + 1)) - 1);
        }
        const int K = std::max(
            3, *std::max_element(y_true.begin(), y_true.end()) + 1);
        EvalRow row;
        row.name = name;
        row.proposed = name == "extra_trees+svm";
        row.metrics = evaluate_predictions(y_true, y_pred, K);
        rows.push_back(std::move(row));
    }
    write_eval_tables(rows, "recomputed from persisted predictions");
    return rows;
}

void Experiment::write_eval_tables(const std::vector<EvalRow>& rows,
                                   const std::string& heading) const {
    const fs::path eval_dir = fs::path(cfg_.out_dir) / "eval";

    std::string overall =
        "model,proposed,accuracy,macro_precision,macro_recall,macro_f1,"
        "weighted_precision,weighted_recall,weighted_f1,test_rows\n";
    for (const EvalRow& row : rows) {
        const MetricsReport& m = row.metrics;
        overall += fmt::format(
            "{},{},{},{},{},{},{},{},{},{}\n", row.name,
            row.proposed ? "yes" : "no", num(m.accuracy), num(m.macro.precision),
            num(m.macro.recall), num(m.macro.f1), num(m.weighted.precision),
            num(m.weighted.recall), num(m.weighted.f1), m.cm.total());
    }
    write_text_atomic(eval_dir / "overall.csv", overall);

    std::string per_class = "model,class,precision,recall,f1,support\n";
    for (const EvalRow& row : rows) {
        const int K = row.metrics.cm.class_count;
        for (int c = 0; c < K; ++c) {
            const ClassMetrics& m =
                row.metrics.per_class[static_cast<std::size_t>(c)];
            per_class += fmt::format("{},{},{},{},{},{}\n", row.name,
                                     class_name(c, K), num(m.precision),
                                     num(m.recall), num(m.f1), m.support);
        }
    }
    write_text_atomic(eval_dir / "per_class.csv", per_class);

    for (const EvalRow& row : rows) {
        const ConfusionMatrix& cm = row.metrics.cm;
        std::string csv = "true\\pred";
        for (int p = 0; p < cm.class_count; ++p)
            csv += "," + class_name(p, cm.class_count);
        csv += "\n";
        for (int t = 0; t < cm.class_count; ++t) {
            csv += class_name(t, cm.class_count);
            for (int p = 0; p < cm.class_count; ++p)
                csv += fmt::format(",{}", cm.at(t, p));
            csv += "\n";
        }
        write_text_atomic(
            eval_dir / ("confusion_" + file_stem(row.name) + ".csv"), csv);
    }

    // human-readable report
    std::string report;
    report += "CTG classification report\n";
    report += "=========================\n";
    report += fmt::format("source: {}\n", heading);
    report += fmt::format("seed: {}\n", cfg_.seed);

    const fs::path log_path =
        fs::path(cfg_.out_dir) / "prepared" / "pipeline_log.json";
    std::ifstream lin(log_path);
    if (lin) {
        const auto log = nlohmann::json::parse(lin);
        report += fmt::format("pipeline mode: {}\n",
                              log.at("mode").get<std::string>());
        report += fmt::format("train rows: {}   test rows: {}\n",
                              log.at("train_rows").get<std::size_t>(),
                              log.at("test_rows").get<std::size_t>());
        const auto test_counts =
            log.at("test_class_counts").get<std::vector<std::size_t>>();
        report += "test class counts:";
        for (std::size_t c = 0; c < test_counts.size(); ++c)
            report += fmt::format(
                " {}={}", class_name(static_cast<int>(c),
                                     static_cast<int>(test_counts.size())),
                test_counts[c]);
        report += "\n\npipeline steps:\n";
        for (const auto& step : log.at("steps"))
            report += fmt::format("  {:<16} {:>6} -> {:<6} {}\n",
                                  step.at("step").get<std::string>(),
                                  step.at("rows_before").get<std::size_t>(),
                                  step.at("rows_after").get<std::size_t>(),
                                  step.at("detail").get<std::string>());
    }

    report += "\noverall metrics (accuracy %, 2 decimals):\n";
    report += fmt::format("  {:<28} {:>9} {:>9} {:>12}\n", "model", "accuracy",
                          "macro_f1", "weighted_f1");
    for (const EvalRow& row : rows) {
        std::string label = row.name;
        if (row.proposed) label += " (proposed)";
        report += fmt::format("  {:<28} {:>9.2f} {:>9.2f} {:>12.2f}\n", label,
                              row.metrics.accuracy, row.metrics.macro.f1,
                              row.metrics.weighted.f1);
    }

    report += "\nper-class metrics (integer percents):\n";
    if (!rows.empty()) {
        const int K = rows.front().metrics.cm.class_count;
        report += fmt::format("  {:<28}", "model");
        for (int c = 0; c < K; ++c)
            report += fmt::format(" | {:^14}", class_name(c, K));
        report += "\n";
        report += fmt::format("  {:<28}", "");
        for (int c = 0; c < K; ++c) report += fmt::format(" | {:^14}", "P   R  F1");
        report += "\n";
        for (const EvalRow& row : rows) {
            report += fmt::format("  {:<28}", row.name);
            for (const ClassMetrics& m : row.metrics.per_class)
                report += fmt::format(" | {:>4}{:>4}{:>4}  ",
                                      std::lround(m.precision),
                                      std::lround(m.recall), std::lround(m.f1));
            report += "\n";
        }
    }

    report += "\nconfusion matrices (rows = true, columns = predicted):\n";
    for (const EvalRow& row : rows) {
        const ConfusionMatrix& cm = row.metrics.cm;
        report += fmt::format("  {}:\n", row.name);
        for (int t = 0; t < cm.class_count; ++t) {
            report += "   ";
            for (int p = 0; p < cm.class_count; ++p)
                report += fmt::format(" {:>6}", cm.at(t, p));
            report += "\n";
        }
    }

    report += "\nnotes:\n";
    report +=
        "  - accuracy = 100 * diagonal / total. A literal micro-averaged\n"
        "    reading of summed one-vs-rest TP+TN over all classes differs\n"
        "    for more than two classes and is not what the tables show.\n";
    report +=
        "  - precision/recall/F1 cells with a 0/0 numerator and denominator\n"
        "    are defined as 0.\n";
    bool flagged = false;
    for (const EvalRow& row : rows) flagged = flagged || row.metrics.zero_division;
    if (flagged)
        report += "  - at least one 0/0 cell was hit in this run.\n";

    write_text_atomic(eval_dir / "report.txt", report);
}

}  // namespace ctg
