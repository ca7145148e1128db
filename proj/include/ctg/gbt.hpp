#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctg/matrix.hpp"
#include "ctg/model.hpp"

namespace ctg {

enum class GbtVariant { exact, hist };

struct GbtParams {
    int n_rounds = 100;
    double learning_rate = 0.1;
    double reg_lambda = 1.0;        // L2 penalty on leaf weights
    double min_child_weight = 1e-3; // minimum hessian mass per side
    double min_split_gain = 0.0;    // splits need gain strictly above this
    int max_depth = 3;              // exact variant: level-wise depth cap
    int max_leaves = 31;            // hist variant: leaf-wise leaf cap
    int max_bins = 255;             // hist variant: equal-frequency bins
};

void validate_gbt_params(GbtVariant variant, const GbtParams& params);

struct GbtNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf step, learning rate already applied
};

double split_gain(double gl, double hl, double gr, double hr, double lambda);
double leaf_weight(double g, double h, double lambda);

// Bin edges strictly between observed values, at most `max_bins` bins, every
// bin holding at least one training value. Bin b covers (edge[b-1], edge[b]].
std::vector<double> equal_frequency_edges(std::vector<double> values,
                                          int max_bins);

// Softmax boosting: each round fits one second-order regression tree per
// class on gradients g = p - 1[y==c], h = p(1-p), starting from log-prior
// base scores. Trees are stored round-major (round * class_count + class).
class GbtModel final : public Model {
public:
    GbtModel(ModelKind kind, std::vector<double> base_scores,
             std::vector<std::vector<GbtNode>> trees,
             std::vector<double> training_loss, std::size_t feature_count,
             GbtParams params);

    ModelKind kind() const override { return kind_; }
    int class_count() const override {
        return static_cast<int>(base_scores_.size());
    }
    std::size_t feature_count() const override { return feature_count_; }
    Labels predict(const Matrix& X) const override;
    nlohmann::json payload() const override;

    // Raw additive scores per class, before the argmax.
    Matrix decision_scores(const Matrix& X) const;

    const std::vector<double>& base_scores() const { return base_scores_; }
    const std::vector<std::vector<GbtNode>>& trees() const { return trees_; }
    const std::vector<double>& training_loss() const { return training_loss_; }
    const GbtParams& params() const { return params_; }

private:
    ModelKind kind_;
    std::vector<double> base_scores_;
    std::vector<std::vector<GbtNode>> trees_;
    std::vector<double> training_loss_;  // mean log loss after each round
    std::size_t feature_count_ = 0;
    GbtParams params_;
};

std::shared_ptr<GbtModel> fit_gbt(GbtVariant variant, const Matrix& X,
                                  const Labels& y, int class_count,
                                  const GbtParams& params, std::uint64_t seed);

// level-wise growth, exact splits over presorted columns
std::shared_ptr<GbtModel> fit_gbt_exact(const Matrix& X, const Labels& y,
                                        int class_count, const GbtParams& params,
                                        std::uint64_t seed);

// leaf-wise growth over equal-frequency histograms
std::shared_ptr<GbtModel> fit_gbt_hist(const Matrix& X, const Labels& y,
                                       int class_count, const GbtParams& params,
                                       std::uint64_t seed);

nlohmann::json gbt_params_to_json(const GbtParams& params);
GbtParams gbt_params_from_json(const nlohmann::json& j, GbtParams base);
nlohmann::json gbt_nodes_to_json(const std::vector<GbtNode>& nodes);
std::vector<GbtNode> gbt_nodes_from_json(const nlohmann::json& j);

}  // namespace ctg
