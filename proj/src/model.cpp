#include "ctg/model.hpp"

#include <cmath>
#include <string>

#include "ctg/error.hpp"

namespace ctg {

std::size_t argmax_tiebreak_lowest(std::span<const double> scores) {
    if (scores.empty()) throw_input("empty scores");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return best;
}

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::decision_tree: return "decision_tree";
        case ModelKind::random_forest: return "random_forest";
        case ModelKind::extra_trees: return "extra_trees";
        case ModelKind::knn: return "knn";
        case ModelKind::svm: return "svm";
        case ModelKind::gbt_exact: return "gbt_exact";
        case ModelKind::gbt_hist: return "gbt_hist";
        case ModelKind::voting: return "voting";
    }
    return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
    if (name == "decision_tree") return ModelKind::decision_tree;
    if (name == "random_forest") return ModelKind::random_forest;
    if (name == "extra_trees") return ModelKind::extra_trees;
    if (name == "knn") return ModelKind::knn;
    if (name == "svm") return ModelKind::svm;
    if (name == "gbt_exact") return ModelKind::gbt_exact;
    if (name == "gbt_hist") return ModelKind::gbt_hist;
    if (name == "voting") return ModelKind::voting;
    throw_input("unknown model kind '" + std::string(name) + "'");
}

}  // namespace ctg
