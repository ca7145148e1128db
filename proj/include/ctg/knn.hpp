#pragma once

#include <memory>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "ctg/matrix.hpp"
#include "ctg/model.hpp"

namespace ctg {

enum class KnnMetric { euclidean, manhattan };
enum class KnnWeights { uniform, inverse_distance };

const char* to_string(KnnMetric metric);
KnnMetric knn_metric_from_string(const std::string& name);
const char* to_string(KnnWeights weights);
KnnWeights knn_weights_from_string(const std::string& name);

struct KnnParams {
    int k = 5;
    KnnMetric metric = KnnMetric::euclidean;
    KnnWeights weights = KnnWeights::uniform;
};

double knn_distance(KnnMetric metric, std::span<const double> u,
                    std::span<const double> v);

// Lazy learner: stores the training data verbatim and answers queries by
// exact brute-force search. Neighbor ties on distance go to the lower
// training-row index; with inverse-distance weights an exact match (d = 0)
// short-circuits to that neighbor's label.
class KnnModel final : public Model {
public:
    KnnModel(Matrix X_train, Labels y_train, int class_count, KnnParams params);

    ModelKind kind() const override { return ModelKind::knn; }
    int class_count() const override { return class_count_; }
    std::size_t feature_count() const override { return X_train_.cols(); }
    Labels predict(const Matrix& X) const override;
    nlohmann::json payload() const override;

    const Matrix& X_train() const { return X_train_; }
    const Labels& y_train() const { return y_train_; }
    const KnnParams& params() const { return params_; }

private:
    Matrix X_train_;
    Labels y_train_;
    int class_count_ = 0;
    KnnParams params_;
};

std::shared_ptr<KnnModel> fit_knn(const Matrix& X, const Labels& y,
                                  int class_count, const KnnParams& params);

nlohmann::json knn_params_to_json(const KnnParams& params);
KnnParams knn_params_from_json(const nlohmann::json& j, KnnParams base);

}  // namespace ctg
