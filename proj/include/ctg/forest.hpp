#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctg/matrix.hpp"
#include "ctg/model.hpp"
#include "ctg/tree.hpp"

namespace ctg {

struct ForestParams {
    int n_estimators = 100;
    bool bootstrap = true;
    TreeParams tree;
};

void validate_forest_params(const ForestParams& params);

// Bagged trees with per-row majority vote; vote ties go to the lowest class
// id. Each tree gets its own derived seed, so the result is independent of
// how the fit work is scheduled across threads.
class ForestModel final : public Model {
public:
    ForestModel(ModelKind kind, std::vector<std::vector<TreeNode>> trees,
                int class_count, std::size_t feature_count, ForestParams params);

    ModelKind kind() const override { return kind_; }
    int class_count() const override { return class_count_; }
    std::size_t feature_count() const override { return feature_count_; }
    Labels predict(const Matrix& X) const override;
    nlohmann::json payload() const override;

    const std::vector<std::vector<TreeNode>>& trees() const { return trees_; }
    const ForestParams& params() const { return params_; }

private:
    ModelKind kind_;
    std::vector<std::vector<TreeNode>> trees_;
    int class_count_ = 0;
    std::size_t feature_count_ = 0;
    ForestParams params_;
};

std::shared_ptr<ForestModel> fit_forest(ModelKind kind, const Matrix& X,
                                        const Labels& y, int class_count,
                                        const ForestParams& params,
                                        std::uint64_t seed);

// bootstrap resampling, exhaustive threshold search
std::shared_ptr<ForestModel> fit_random_forest(const Matrix& X, const Labels& y,
                                               int class_count,
                                               ForestParams params,
                                               std::uint64_t seed);

// no resampling, one random threshold per candidate feature
std::shared_ptr<ForestModel> fit_extra_trees(const Matrix& X, const Labels& y,
                                             int class_count, ForestParams params,
                                             std::uint64_t seed);

nlohmann::json forest_params_to_json(const ForestParams& params);
// Accepts n_estimators/bootstrap plus any tree parameter at the same level.
ForestParams forest_params_from_json(const nlohmann::json& j, ForestParams base);

}  // namespace ctg
