// ctg — cardiotocography classification experiment runner.
//
// Thin shell over the C API: parses flags, forwards one stage call, renders
// the returned JSON summary. All computation lives in the shared library.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ctg/ctg.h"

namespace {

int fail(int code) {
    const nlohmann::json record = {
        {"error",
         {{"code", code}, {"message", std::string(ctg_last_error())}}}};
    std::cerr << record.dump() << "\n";
    return code;
}

int fail_input(const std::string& message) {
    const nlohmann::json record = {
        {"error", {{"code", CTG_ERR_INPUT}, {"message", message}}}};
    std::cerr << record.dump() << "\n";
    return CTG_ERR_INPUT;
}

std::string take_json(char* text) {
    std::string out = text ? text : "";
    ctg_str_free(text);
    return out;
}

void print_eval_table(const std::string& json_text) {
    const auto rows = nlohmann::json::parse(json_text);
    std::cout << std::left << std::setw(30) << "model" << std::right
              << std::setw(10) << "accuracy" << std::setw(10) << "macro_f1"
              << std::setw(13) << "weighted_f1" << "\n";
    std::cout << std::string(63, '-') << "\n";
    std::cout << std::fixed << std::setprecision(2);
    for (const auto& row : rows) {
        std::string name = row.at("name").get<std::string>();
        if (row.at("proposed").get<bool>()) name += " *";
        std::cout << std::left << std::setw(30) << name << std::right
                  << std::setw(10) << row.at("accuracy").get<double>()
                  << std::setw(10) << row.at("macro_f1").get<double>()
                  << std::setw(13) << row.at("weighted_f1").get<double>()
                  << "\n";
    }
    std::cout << "(* proposed ensemble)\n";
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += sep;
        out += p;
    }
    return out;
}

struct Handle {
    ctg_experiment* exp = nullptr;
    ~Handle() { ctg_experiment_free(exp); }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cardiotocography fetal-health classification experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("ctg ") + ctg_version());

    std::string config_path;
    std::string data_path;
    std::string out_dir;
    std::string mode;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path,
                   "experiment config JSON (flags override its keys)");
    app.add_option("--data", data_path, "input CSV path");
    app.add_option("--out", out_dir,
                   "output directory (falls back to CTG_OUT_DIR)");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--mode", mode, "paper_faithful | leakage_safe");

    auto* cmd_prepare =
        app.add_subcommand("prepare", "ingest + preprocessing pipeline");

    std::string tune_target = "all";
    auto* cmd_tune =
        app.add_subcommand("tune", "grid search + refit winning model");
    cmd_tune->add_option("model", tune_target, "model kind, or 'all'");

    std::vector<std::string> ensemble_members;
    bool etse = false;
    auto* cmd_ensemble =
        app.add_subcommand("ensemble", "persist a hard-voting model");
    cmd_ensemble->add_option("members", ensemble_members,
                             "member model kinds (at least two)");
    cmd_ensemble->add_flag("--etse", etse,
                           "shorthand for 'extra_trees svm'");

    std::vector<std::string> eval_names;
    auto* cmd_evaluate = app.add_subcommand(
        "evaluate", "score models and ensembles on the prepared test set");
    cmd_evaluate->add_option(
        "names", eval_names,
        "model kinds or 'a+b' combos (default: config models + ensembles)");

    auto* cmd_report = app.add_subcommand(
        "report", "rebuild metric tables from persisted predictions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail_input(e.what());
    }

    Handle handle;
    int rc = config_path.empty()
                 ? ctg_experiment_create(nullptr, &handle.exp)
                 : ctg_experiment_from_file(config_path.c_str(), &handle.exp);
    if (rc != CTG_OK) return fail(rc);

    if (!data_path.empty()) {
        rc = ctg_experiment_set(handle.exp, "data", data_path.c_str());
        if (rc != CTG_OK) return fail(rc);
    }
    if (!out_dir.empty()) {
        rc = ctg_experiment_set(handle.exp, "out", out_dir.c_str());
        if (rc != CTG_OK) return fail(rc);
    }
    if (seed) {
        rc = ctg_experiment_set(handle.exp, "seed",
                                std::to_string(*seed).c_str());
        if (rc != CTG_OK) return fail(rc);
    }
    if (!mode.empty()) {
        rc = ctg_experiment_set(handle.exp, "mode", mode.c_str());
        if (rc != CTG_OK) return fail(rc);
    }

    if (cmd_prepare->parsed()) {
        char* summary = nullptr;
        rc = ctg_experiment_prepare(handle.exp, &summary);
        if (rc != CTG_OK) return fail(rc);
        const auto doc = nlohmann::json::parse(take_json(summary));
        std::cout << "mode: " << doc.at("mode").get<std::string>() << "\n"
                  << "train rows: " << doc.at("train_rows").get<std::size_t>()
                  << "\n"
                  << "test rows: " << doc.at("test_rows").get<std::size_t>()
                  << "\n"
                  << "test class counts: "
                  << doc.at("test_class_counts").dump() << "\n";
        return 0;
    }

    if (cmd_tune->parsed()) {
        char* summary = nullptr;
        rc = ctg_experiment_tune(handle.exp, tune_target.c_str(), &summary);
        if (rc != CTG_OK) return fail(rc);
        auto doc = nlohmann::json::parse(take_json(summary));
        if (!doc.is_array()) doc = nlohmann::json::array({doc});
        for (const auto& entry : doc)
            std::cout << entry.at("model").get<std::string>()
                      << ": best cv accuracy "
                      << std::fixed << std::setprecision(2)
                      << entry.at("best_mean_accuracy").get<double>()
                      << "  params " << entry.at("best_params").dump() << "\n";
        return 0;
    }

    if (cmd_ensemble->parsed()) {
        if (etse) {
            ensemble_members.insert(ensemble_members.begin(),
                                    {"extra_trees", "svm"});
        }
        if (ensemble_members.size() < 2)
            return fail_input("an ensemble needs at least 2 members");
        rc = ctg_experiment_ensemble(handle.exp,
                                     join(ensemble_members, '+').c_str());
        if (rc != CTG_OK) return fail(rc);
        std::cout << "wrote voting model " << join(ensemble_members, '+')
                  << "\n";
        return 0;
    }

    if (cmd_evaluate->parsed()) {
        char* summary = nullptr;
        rc = ctg_experiment_evaluate(
            handle.exp,
            eval_names.empty() ? nullptr : join(eval_names, ',').c_str(),
            &summary);
        if (rc != CTG_OK) return fail(rc);
        print_eval_table(take_json(summary));
        return 0;
    }

    if (cmd_report->parsed()) {
        char* summary = nullptr;
        rc = ctg_experiment_report(handle.exp, &summary);
        if (rc != CTG_OK) return fail(rc);
        print_eval_table(take_json(summary));
        return 0;
    }

    return fail_input("no subcommand given");
}
