#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctg/cross_validation.hpp"
#include "ctg/matrix.hpp"
#include "ctg/model.hpp"

namespace ctg {

struct GridAxis {
    std::string name;
    std::vector<nlohmann::json> values;
};

// Enumeration is row-major over the declared axis order: the first axis is
// the outermost loop.
struct ParamGrid {
    std::vector<GridAxis> axes;

    std::size_t size() const;
    nlohmann::json point(std::size_t index) const;
};

void validate_grid(const ParamGrid& grid);

// Accepts either an array of one-key objects (order explicit) or a plain
// object parsed as nlohmann::ordered_json upstream.
ParamGrid grid_from_json(const nlohmann::json& j);
nlohmann::json grid_to_json(const ParamGrid& grid);

// The shipped search space per model kind.
ParamGrid default_grid(ModelKind kind);

struct GridPointResult {
    nlohmann::json params;
    std::vector<double> fold_accuracy;  // percent, one per fold
    double mean_accuracy = 0.0;
    bool failed = false;
    std::string fail_reason;
};

struct GridResult {
    ModelKind kind = ModelKind::decision_tree;
    std::vector<GridPointResult> table;  // enumeration order
    std::size_t best_index = 0;
    nlohmann::json best_params;
    double best_mean = 0.0;
    std::vector<std::vector<std::size_t>> fold_validation;  // shared folds
    double elapsed_seconds = 0.0;
};

// Exhaustive search: every point is scored on the same fold layout, so the
// comparison is paired. Equal means resolve to the earlier enumeration
// point. A fold failure marks the point failed with its reason; when every
// point fails the search itself fails.
GridResult grid_search(ModelKind kind, const ParamGrid& grid, const Matrix& X,
                       const Labels& y, int class_count, const CvConfig& cv,
                       std::uint64_t seed);

nlohmann::json grid_result_to_json(const GridResult& result);

}  // namespace ctg
