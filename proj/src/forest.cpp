#include "ctg/forest.hpp"

#include <numeric>

#include "ctg/error.hpp"
#include "ctg/parallel.hpp"
#include "ctg/rng.hpp"

namespace ctg {

void validate_forest_params(const ForestParams& params) {
    if (params.n_estimators < 1)
        throw_input("n_estimators must be at least 1");
    validate_tree_params(params.tree);
}

ForestModel::ForestModel(ModelKind kind, std::vector<std::vector<TreeNode>> trees,
                         int class_count, std::size_t feature_count,
                         ForestParams params)
    : kind_(kind),
      trees_(std::move(trees)),
      class_count_(class_count),
      feature_count_(feature_count),
      params_(std::move(params)) {
    if (kind_ != ModelKind::random_forest && kind_ != ModelKind::extra_trees)
        throw_input("forest model kind must be random_forest or extra_trees");
    if (trees_.empty()) throw_input("forest has no trees");
}

Labels ForestModel::predict(const Matrix& X) const {
    if (X.cols() != feature_count_)
        throw_input("forest expects " + std::to_string(feature_count_) +
                    " features, got " + std::to_string(X.cols()));
    Labels out(X.rows());
    std::vector<double> votes(static_cast<std::size_t>(class_count_));
    for (std::size_t r = 0; r < X.rows(); ++r) {
        std::fill(votes.begin(), votes.end(), 0.0);
        for (const auto& tree : trees_)
            votes[static_cast<std::size_t>(tree_predict_row(tree, X.row(r)))] += 1.0;
        out[r] = static_cast<int>(argmax_tiebreak_lowest(votes));
    }
    return out;
}

nlohmann::json ForestModel::payload() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : trees_) trees.push_back(tree_nodes_to_json(tree));
    return {{"class_count", class_count_},
            {"feature_count", feature_count_},
            {"params", forest_params_to_json(params_)},
            {"trees", std::move(trees)}};
}

std::shared_ptr<ForestModel> fit_forest(ModelKind kind, const Matrix& X,
                                        const Labels& y, int class_count,
                                        const ForestParams& params,
                                        std::uint64_t seed) {
    validate_forest_params(params);
    if (X.rows() == 0) throw_input("cannot fit a forest on an empty dataset");
    if (X.rows() != y.size()) throw_input("feature/label row count mismatch");
    class_histogram(y, class_count);

    const std::size_t n = X.rows();
    const std::size_t m = static_cast<std::size_t>(params.n_estimators);
    const std::uint64_t base = derive_seed(seed, seed_tag("tree"));

    std::vector<std::vector<TreeNode>> trees(m);
    parallel_for(m, [&](std::size_t i) {
        const std::uint64_t tree_seed = derive_seed(base, i);
        std::vector<std::size_t> sample(n);
        if (params.bootstrap) {
            Rng draw(derive_seed(tree_seed, seed_tag("bootstrap")));
            for (std::size_t s = 0; s < n; ++s) sample[s] = draw.next_below(n);
        } else {
            std::iota(sample.begin(), sample.end(), 0);
        }
        trees[i] = build_tree(X, y, sample, class_count, params.tree, tree_seed);
    });

    return std::make_shared<ForestModel>(kind, std::move(trees), class_count,
                                         X.cols(), params);
}

std::shared_ptr<ForestModel> fit_random_forest(const Matrix& X, const Labels& y,
                                               int class_count,
                                               ForestParams params,
                                               std::uint64_t seed) {
    params.bootstrap = true;
    params.tree.splitter = SplitterKind::best;
    return fit_forest(ModelKind::random_forest, X, y, class_count, params, seed);
}

std::shared_ptr<ForestModel> fit_extra_trees(const Matrix& X, const Labels& y,
                                             int class_count, ForestParams params,
                                             std::uint64_t seed) {
    params.bootstrap = false;
    params.tree.splitter = SplitterKind::random_threshold;
    return fit_forest(ModelKind::extra_trees, X, y, class_count, params, seed);
}

nlohmann::json forest_params_to_json(const ForestParams& params) {
    nlohmann::json j = tree_params_to_json(params.tree);
    j["n_estimators"] = params.n_estimators;
    j["bootstrap"] = params.bootstrap;
    return j;
}

ForestParams forest_params_from_json(const nlohmann::json& j, ForestParams base) {
    nlohmann::json tree_keys = nlohmann::json::object();
    for (const auto& [key, value] : j.items()) {
        if (key == "n_estimators")
            base.n_estimators = value.get<int>();
        else if (key == "bootstrap")
            base.bootstrap = value.get<bool>();
        else
            tree_keys[key] = value;
    }
    base.tree = tree_params_from_json(tree_keys, base.tree);
    validate_forest_params(base);
    return base;
}

}  // namespace ctg
