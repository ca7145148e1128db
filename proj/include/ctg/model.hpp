#pragma once

#include <array>
#include <memory>
#include <span>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ctg/matrix.hpp"

namespace ctg {

// Index of the maximum value; ties resolve to the lowest index. This is the
// one tie rule used by every vote / argmax site in the library.
std::size_t argmax_tiebreak_lowest(std::span<const double> scores);

enum class ModelKind {
    decision_tree,
    random_forest,
    extra_trees,
    knn,
    svm,
    gbt_exact,
    gbt_hist,
    voting,
};

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

// The seven trainable kinds, in report order.
inline constexpr std::array<ModelKind, 7> kTrainableKinds = {
    ModelKind::svm,          ModelKind::gbt_exact,    ModelKind::gbt_hist,
    ModelKind::decision_tree, ModelKind::random_forest, ModelKind::extra_trees,
    ModelKind::knn,
};

// Common estimator contract: immutable after fit, prediction is a pure
// function of (payload, input).
class Model {
public:
    virtual ~Model() = default;

    virtual ModelKind kind() const = 0;
    virtual int class_count() const = 0;
    virtual std::size_t feature_count() const = 0;
    virtual Labels predict(const Matrix& X) const = 0;

    // Kind-specific parameters, sufficient to reconstruct the model.
    virtual nlohmann::json payload() const = 0;
};

using ModelPtr = std::shared_ptr<const Model>;

}  // namespace ctg
