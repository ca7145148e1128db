#include "ctg/grid_search.hpp"

#include <chrono>
#include <numeric>

#include <fmt/format.h>

#include "ctg/error.hpp"
#include "ctg/metrics.hpp"
#include "ctg/model_factory.hpp"
#include "ctg/parallel.hpp"
#include "ctg/rng.hpp"

namespace ctg {

std::size_t ParamGrid::size() const {
    std::size_t n = 1;
    for (const GridAxis& axis : axes) n *= axis.values.size();
    return n;
}

nlohmann::json ParamGrid::point(std::size_t index) const {
    nlohmann::json params = nlohmann::json::object();
    std::size_t rest = index;
    for (std::size_t a = axes.size(); a-- > 0;) {
        const GridAxis& axis = axes[a];
        params[axis.name] = axis.values[rest % axis.values.size()];
        rest /= axis.values.size();
    }
    return params;
}

void validate_grid(const ParamGrid& grid) {
    if (grid.axes.empty()) throw_input("grid needs at least one axis");
    for (const GridAxis& axis : grid.axes) {
        if (axis.name.empty()) throw_input("grid axis needs a name");
        if (axis.values.empty())
            throw_input("grid axis '" + axis.name + "' has no values");
    }
}

ParamGrid grid_from_json(const nlohmann::json& j) {
    ParamGrid grid;
    auto add_axis = [&grid](const std::string& name, const nlohmann::json& values) {
        if (!values.is_array())
            throw_input("grid axis '" + name + "' must list its values");
        GridAxis axis;
        axis.name = name;
        for (const auto& v : values) axis.values.push_back(v);
        grid.axes.push_back(std::move(axis));
    };
    if (j.is_array()) {
        for (const auto& entry : j) {
            if (!entry.is_object() || entry.size() != 1)
                throw_input("grid array entries must be single-key objects");
            for (const auto& [name, values] : entry.items())
                add_axis(name, values);
        }
    } else if (j.is_object()) {
        for (const auto& [name, values] : j.items()) add_axis(name, values);
    } else {
        throw_input("grid must be an object or an array of axes");
    }
    validate_grid(grid);
    return grid;
}

nlohmann::json grid_to_json(const ParamGrid& grid) {
    nlohmann::json arr = nlohmann::json::array();
    for (const GridAxis& axis : grid.axes) {
        nlohmann::json entry = nlohmann::json::object();
        entry[axis.name] = axis.values;
        arr.push_back(std::move(entry));
    }
    return arr;
}

ParamGrid default_grid(ModelKind kind) {
    auto axis = [](std::string name,
                   std::initializer_list<nlohmann::json> values) {
        GridAxis a;
        a.name = std::move(name);
        a.values.assign(values.begin(), values.end());
        return a;
    };
    ParamGrid grid;
    switch (kind) {
        case ModelKind::svm:
            grid.axes = {axis("C", {1.0, 10.0, 100.0}),
                         axis("kernel", {"rbf"}),
                         axis("gamma", {"scale", 0.01, 0.1})};
            return grid;
        case ModelKind::decision_tree:
            grid.axes = {axis("max_depth", {nullptr, 10, 20}),
                         axis("criterion", {"gini", "entropy"}),
                         axis("min_samples_leaf", {1, 5})};
            return grid;
        case ModelKind::random_forest:
        case ModelKind::extra_trees:
            grid.axes = {axis("n_estimators", {100, 300}),
                         axis("max_depth", {nullptr, 20}),
                         axis("max_features", {"sqrt"})};
            return grid;
        case ModelKind::gbt_exact:
            grid.axes = {axis("n_rounds", {100, 300}),
                         axis("learning_rate", {0.1, 0.3}),
                         axis("max_depth", {3, 6})};
            return grid;
        case ModelKind::gbt_hist:
            grid.axes = {axis("n_rounds", {100, 300}),
                         axis("learning_rate", {0.1}),
                         axis("max_leaves", {31, 63})};
            return grid;
        case ModelKind::knn:
            grid.axes = {axis("k", {3, 5, 7, 9}),
                         axis("metric", {"euclidean", "manhattan"}),
                         axis("weights", {"uniform", "inverse_distance"})};
            return grid;
        case ModelKind::voting:
            break;
    }
    throw_input("no search grid for model kind '" +
                std::string(to_string(kind)) + "'");
}

namespace {

void slice_rows(const Matrix& X, const Labels& y,
                const std::vector<std::size_t>& idx, Matrix& Xs, Labels& ys) {
    Xs = Matrix(idx.size(), X.cols());
    ys.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto src = X.row(idx[i]);
        std::copy(src.begin(), src.end(), Xs.row(i).begin());
        ys[i] = y[idx[i]];
    }
}

}  // namespace

GridResult grid_search(ModelKind kind, const ParamGrid& grid, const Matrix& X,
                       const Labels& y, int class_count, const CvConfig& cv,
                       std::uint64_t seed) {
    validate_grid(grid);
    if (X.rows() != y.size()) throw_input("feature/label row count mismatch");
    const auto start = std::chrono::steady_clock::now();

    CvConfig cfg = cv;
    cfg.seed = seed;
    const std::vector<FoldSplit> folds = kfold_indices(y, cfg);
    const std::size_t F = folds.size();
    const std::size_t P = grid.size();

    GridResult result;
    result.kind = kind;
    result.table.resize(P);
    for (std::size_t p = 0; p < P; ++p) result.table[p].params = grid.point(p);
    result.fold_validation.reserve(F);
    for (const FoldSplit& f : folds) result.fold_validation.push_back(f.validation);

    std::vector<double> unit_accuracy(P * F, 0.0);
    std::vector<std::string> unit_error(P * F);
    const std::uint64_t base = derive_seed(seed, seed_tag("grid"));

    parallel_for(P * F, [&](std::size_t u) {
        const std::size_t p = u / F;
        const std::size_t f = u % F;
        try {
            Matrix Xtr, Xva;
            Labels ytr, yva;
            slice_rows(X, y, folds[f].train, Xtr, ytr);
            slice_rows(X, y, folds[f].validation, Xva, yva);
            const ModelPtr model =
                fit_model(kind, result.table[p].params, Xtr, ytr, class_count,
                          derive_seed(base, u));
            unit_accuracy[u] =
                accuracy(confusion_matrix(yva, model->predict(Xva), class_count));
        } catch (const std::exception& e) {
            unit_error[u] = e.what();
        }
    });

    for (std::size_t p = 0; p < P; ++p) {
        GridPointResult& point = result.table[p];
        for (std::size_t f = 0; f < F; ++f) {
            const std::size_t u = p * F + f;
            if (!unit_error[u].empty() && !point.failed) {
                point.failed = true;
                point.fail_reason =
                    fmt::format("fold {}: {}", f, unit_error[u]);
            }
        }
        if (point.failed) continue;
        point.fold_accuracy.reserve(F);
        for (std::size_t f = 0; f < F; ++f)
            point.fold_accuracy.push_back(unit_accuracy[p * F + f]);
        point.mean_accuracy =
            std::accumulate(point.fold_accuracy.begin(),
                            point.fold_accuracy.end(), 0.0) /
            static_cast<double>(F);
    }

    bool any = false;
    for (std::size_t p = 0; p < P; ++p) {
        const GridPointResult& point = result.table[p];
        if (point.failed) continue;
        if (!any || point.mean_accuracy > result.best_mean) {
            any = true;
            result.best_index = p;
            result.best_mean = point.mean_accuracy;
            result.best_params = point.params;
        }
    }
    if (!any)
        throw_runtime(fmt::format("all {} grid points failed; first: {}", P,
                                  result.table.front().fail_reason));

    result.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return result;
}

nlohmann::json grid_result_to_json(const GridResult& result) {
    nlohmann::json table = nlohmann::json::array();
    for (const GridPointResult& point : result.table) {
        nlohmann::json row = {{"params", point.params},
                              {"failed", point.failed}};
        if (point.failed) {
            row["reason"] = point.fail_reason;
        } else {
            row["fold_accuracy"] = point.fold_accuracy;
            row["mean_accuracy"] = point.mean_accuracy;
        }
        table.push_back(std::move(row));
    }
    return {{"model", to_string(result.kind)},
            {"table", std::move(table)},
            {"best",
             {{"index", result.best_index},
              {"params", result.best_params},
              {"mean_accuracy", result.best_mean}}},
            {"folds", result.fold_validation},
            {"elapsed_seconds", result.elapsed_seconds}};
}

}  // namespace ctg
