#include "ctg/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctg/error.hpp"
#include "ctg/parallel.hpp"

namespace ctg {

const char* to_string(KnnMetric metric) {
    return metric == KnnMetric::euclidean ? "euclidean" : "manhattan";
}

KnnMetric knn_metric_from_string(const std::string& name) {
    if (name == "euclidean") return KnnMetric::euclidean;
    if (name == "manhattan") return KnnMetric::manhattan;
    throw_input("unknown distance metric '" + name + "'");
}

const char* to_string(KnnWeights weights) {
    return weights == KnnWeights::uniform ? "uniform" : "inverse_distance";
}

KnnWeights knn_weights_from_string(const std::string& name) {
    if (name == "uniform") return KnnWeights::uniform;
    if (name == "inverse_distance" || name == "distance")
        return KnnWeights::inverse_distance;
    throw_input("unknown weighting '" + name + "'");
}

double knn_distance(KnnMetric metric, std::span<const double> u,
                    std::span<const double> v) {
    if (u.size() != v.size()) throw_input("distance operands differ in dimension");
    double acc = 0.0;
    if (metric == KnnMetric::euclidean) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double d = u[i] - v[i];
            acc += d * d;
        }
        return std::sqrt(acc);
    }
    for (std::size_t i = 0; i < u.size(); ++i) acc += std::abs(u[i] - v[i]);
    return acc;
}

KnnModel::KnnModel(Matrix X_train, Labels y_train, int class_count,
                   KnnParams params)
    : X_train_(std::move(X_train)),
      y_train_(std::move(y_train)),
      class_count_(class_count),
      params_(params) {
    if (params_.k < 1) throw_input("k must be at least 1");
    if (static_cast<std::size_t>(params_.k) > X_train_.rows())
        throw_input("k exceeds the number of training rows");
    if (X_train_.rows() != y_train_.size())
        throw_input("feature/label row count mismatch");
    class_histogram(y_train_, class_count_);
}

Labels KnnModel::predict(const Matrix& X) const {
    if (X.cols() != X_train_.cols())
        throw_input("knn expects " + std::to_string(X_train_.cols()) +
                    " features, got " + std::to_string(X.cols()));
    const std::size_t n = X_train_.rows();
    const std::size_t k = static_cast<std::size_t>(params_.k);

    Labels out(X.rows());
    parallel_for(X.rows(), [&](std::size_t r) {
        const auto query = X.row(r);
        std::vector<std::pair<double, std::size_t>> dist(n);
        for (std::size_t t = 0; t < n; ++t)
            dist[t] = {knn_distance(params_.metric, X_train_.row(t), query), t};
        std::partial_sort(dist.begin(),
                          dist.begin() + static_cast<std::ptrdiff_t>(k),
                          dist.end());

        if (params_.weights == KnnWeights::inverse_distance &&
            dist[0].first == 0.0) {
            out[r] = y_train_[dist[0].second];
            return;
        }
        std::vector<double> votes(static_cast<std::size_t>(class_count_), 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            const auto cls = static_cast<std::size_t>(y_train_[dist[i].second]);
            votes[cls] += params_.weights == KnnWeights::uniform
                              ? 1.0
                              : 1.0 / dist[i].first;
        }
        out[r] = static_cast<int>(argmax_tiebreak_lowest(votes));
    });
    return out;
}

nlohmann::json KnnModel::payload() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < X_train_.rows(); ++r) {
        const auto row = X_train_.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return {{"class_count", class_count_},
            {"feature_count", X_train_.cols()},
            {"params", knn_params_to_json(params_)},
            {"X", std::move(rows)},
            {"y", y_train_}};
}

std::shared_ptr<KnnModel> fit_knn(const Matrix& X, const Labels& y,
                                  int class_count, const KnnParams& params) {
    return std::make_shared<KnnModel>(X, y, class_count, params);
}

nlohmann::json knn_params_to_json(const KnnParams& params) {
    return {{"k", params.k},
            {"metric", to_string(params.metric)},
            {"weights", to_string(params.weights)}};
}

KnnParams knn_params_from_json(const nlohmann::json& j, KnnParams base) {
    for (const auto& [key, value] : j.items()) {
        if (key == "k")
            base.k = value.get<int>();
        else if (key == "metric")
            base.metric = knn_metric_from_string(value.get<std::string>());
        else if (key == "weights")
            base.weights = knn_weights_from_string(value.get<std::string>());
        else
            throw_input("unknown knn parameter '" + key + "'");
    }
    return base;
}

}  // namespace ctg
