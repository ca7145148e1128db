#include "ctg/model_factory.hpp"

#include "ctg/error.hpp"
#include "ctg/forest.hpp"
#include "ctg/gbt.hpp"
#include "ctg/knn.hpp"
#include "ctg/svm.hpp"
#include "ctg/tree.hpp"
#include "ctg/voting.hpp"

namespace ctg {

namespace {

ForestParams forest_defaults(ModelKind kind) {
    ForestParams p;
    p.n_estimators = 100;
    p.tree.max_features = FeatureSubset::sqrt_features;
    if (kind == ModelKind::random_forest) {
        p.bootstrap = true;
        p.tree.splitter = SplitterKind::best;
    } else {
        p.bootstrap = false;
        p.tree.splitter = SplitterKind::random_threshold;
    }
    return p;
}

GbtParams gbt_defaults(GbtVariant variant) {
    GbtParams p;
    if (variant == GbtVariant::exact) {
        p.max_depth = 3;
    } else {
        p.max_leaves = 31;
    }
    return p;
}

struct SvmUserParams {
    SvmParams params;
    bool gamma_scale = true;  // default follows the "scale" convention
};

SvmUserParams svm_params_from_user_json(const nlohmann::json& j) {
    SvmUserParams out;
    for (const auto& [key, value] : j.items()) {
        if (key == "C") {
            out.params.C = value.get<double>();
        } else if (key == "kernel") {
            out.params.kernel.kind =
                kernel_kind_from_string(value.get<std::string>());
        } else if (key == "gamma") {
            if (value.is_string()) {
                if (value.get<std::string>() != "scale")
                    throw_input("gamma must be a number or \"scale\"");
                out.gamma_scale = true;
            } else {
                out.params.kernel.gamma = value.get<double>();
                out.gamma_scale = false;
            }
        } else if (key == "degree") {
            out.params.kernel.degree = value.get<int>();
        } else if (key == "coef0") {
            out.params.kernel.coef0 = value.get<double>();
        } else if (key == "tol") {
            out.params.tol = value.get<double>();
        } else if (key == "max_passes") {
            out.params.max_passes = value.get<int>();
        } else if (key == "max_iter") {
            out.params.max_iter = value.get<int>();
        } else {
            throw_input("unknown svm parameter '" + key + "'");
        }
    }
    return out;
}

Matrix matrix_from_json(const nlohmann::json& rows, std::size_t cols) {
    Matrix m(rows.size(), cols);
    std::size_t r = 0;
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() != cols)
            throw_input("payload matrix row has wrong width");
        std::size_t c = 0;
        for (const auto& v : row) m.at(r, c++) = v.get<double>();
        ++r;
    }
    return m;
}

}  // namespace

ModelPtr fit_model(ModelKind kind, const nlohmann::json& params,
                   const Matrix& X, const Labels& y, int class_count,
                   std::uint64_t seed) {
    if (!params.is_object() && !params.is_null())
        throw_input("model parameters must be a JSON object");
    const nlohmann::json j =
        params.is_null() ? nlohmann::json::object() : params;
    switch (kind) {
        case ModelKind::decision_tree:
            return fit_decision_tree(
                X, y, class_count, tree_params_from_json(j, TreeParams{}), seed);
        case ModelKind::random_forest:
            return fit_random_forest(
                X, y, class_count,
                forest_params_from_json(j, forest_defaults(kind)), seed);
        case ModelKind::extra_trees:
            return fit_extra_trees(
                X, y, class_count,
                forest_params_from_json(j, forest_defaults(kind)), seed);
        case ModelKind::gbt_exact:
            return fit_gbt_exact(
                X, y, class_count,
                gbt_params_from_json(j, gbt_defaults(GbtVariant::exact)), seed);
        case ModelKind::gbt_hist:
            return fit_gbt_hist(
                X, y, class_count,
                gbt_params_from_json(j, gbt_defaults(GbtVariant::hist)), seed);
        case ModelKind::svm: {
            SvmUserParams user = svm_params_from_user_json(j);
            if (user.gamma_scale &&
                user.params.kernel.kind != KernelSpec::Kind::linear)
                user.params.kernel.gamma = gamma_scale(X);
            return fit_svm_ovo(X, y, class_count, user.params, seed);
        }
        case ModelKind::knn:
            return fit_knn(X, y, class_count,
                           knn_params_from_json(j, KnnParams{}));
        case ModelKind::voting:
            throw_input("voting models are assembled from fitted members");
    }
    throw_input("unknown model kind");
}

ModelPtr model_from_payload(ModelKind kind, const nlohmann::json& payload) {
    const int class_count = payload.at("class_count").get<int>();
    const auto feature_count = payload.at("feature_count").get<std::size_t>();
    switch (kind) {
        case ModelKind::decision_tree: {
            TreeParams params =
                tree_params_from_json(payload.at("params"), TreeParams{});
            return std::make_shared<DecisionTreeModel>(
                tree_nodes_from_json(payload.at("nodes")), class_count,
                feature_count, params);
        }
        case ModelKind::random_forest:
        case ModelKind::extra_trees: {
            ForestParams params = forest_params_from_json(
                payload.at("params"), forest_defaults(kind));
            std::vector<std::vector<TreeNode>> trees;
            for (const auto& t : payload.at("trees"))
                trees.push_back(tree_nodes_from_json(t));
            return std::make_shared<ForestModel>(kind, std::move(trees),
                                                 class_count, feature_count,
                                                 params);
        }
        case ModelKind::gbt_exact:
        case ModelKind::gbt_hist: {
            GbtParams params =
                gbt_params_from_json(payload.at("params"), GbtParams{});
            std::vector<std::vector<GbtNode>> trees;
            for (const auto& t : payload.at("trees"))
                trees.push_back(gbt_nodes_from_json(t));
            return std::make_shared<GbtModel>(
                kind, payload.at("base_scores").get<std::vector<double>>(),
                std::move(trees),
                payload.at("training_loss").get<std::vector<double>>(),
                feature_count, params);
        }
        case ModelKind::svm: {
            const nlohmann::json& pj = payload.at("params");
            SvmParams params;
            params.C = pj.at("C").get<double>();
            params.kernel = kernel_spec_from_json(pj.at("kernel"), KernelSpec{});
            params.tol = pj.at("tol").get<double>();
            params.max_passes = pj.at("max_passes").get<int>();
            params.max_iter = pj.at("max_iter").get<int>();
            std::vector<SvmPair> pairs;
            for (const auto& pair : payload.at("pairs")) {
                SvmPair p;
                p.a = pair.at("a").get<int>();
                p.b = pair.at("b").get<int>();
                p.model.bias = pair.at("bias").get<double>();
                p.model.coef = pair.at("coef").get<std::vector<double>>();
                p.model.support =
                    matrix_from_json(pair.at("support"), feature_count);
                p.model.kernel = params.kernel;
                if (p.model.coef.size() != p.model.support.rows())
                    throw_input("svm payload coef/support size mismatch");
                pairs.push_back(std::move(p));
            }
            return std::make_shared<SvmModel>(std::move(pairs), class_count,
                                              feature_count, params);
        }
        case ModelKind::knn: {
            KnnParams params =
                knn_params_from_json(payload.at("params"), KnnParams{});
            return std::make_shared<KnnModel>(
                matrix_from_json(payload.at("X"), feature_count),
                payload.at("y").get<Labels>(), class_count, params);
        }
        case ModelKind::voting: {
            std::vector<ModelPtr> members;
            for (const auto& m : payload.at("members"))
                members.push_back(model_from_payload(
                    model_kind_from_string(m.at("kind").get<std::string>()),
                    m.at("payload")));
            return std::make_shared<VotingModel>(std::move(members));
        }
    }
    throw_input("unknown model kind");
}

}  // namespace ctg
