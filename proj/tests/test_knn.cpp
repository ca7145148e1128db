#include <doctest.h>

#include <cmath>
#include <vector>

#include "ctg/error.hpp"
#include "ctg/knn.hpp"
#include "support/fixtures.hpp"

using namespace ctg;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
    Matrix m(0, values.begin()->size());
    for (const auto& row : values) m.append_row(std::vector<double>(row));
    return m;
}

}  // namespace

TEST_CASE("distance functions match hand values") {
    const std::vector<double> u = {0.0, 3.0}, v = {4.0, 0.0};
    CHECK(knn_distance(KnnMetric::euclidean, u, v) == doctest::Approx(5.0));
    CHECK(knn_distance(KnnMetric::manhattan, u, v) == doctest::Approx(7.0));
    CHECK_THROWS_AS(
        knn_distance(KnnMetric::euclidean, u, std::vector<double>{1.0}), Error);
}

TEST_CASE("k=1 recalls the training data exactly") {
    const Dataset ds = ctg::testing::make_blobs(7, 60, 4, 3);
    KnnParams params;
    params.k = 1;
    const auto model = fit_knn(ds.X, ds.y, 3, params);
    CHECK(model->predict(ds.X) == ds.y);
}

TEST_CASE("inverse-distance weighting short-circuits exact matches") {
    // query [0] sits exactly on rows 0 and 1; the lower index (label 2) wins
    const Matrix X = rows({{0.0}, {0.0}, {1.0}});
    const Labels y = {2, 0, 1};
    KnnParams params;
    params.k = 3;
    params.weights = KnnWeights::inverse_distance;
    const auto model = fit_knn(X, y, 3, params);
    CHECK(model->predict(rows({{0.0}})) == Labels{2});
}

TEST_CASE("equal-distance neighbors keep training-row order") {
    const Matrix X = rows({{-1.0}, {1.0}});
    const Labels y = {1, 0};
    KnnParams params;
    params.k = 1;
    const auto model = fit_knn(X, y, 2, params);
    // both rows are at distance 1 from the query; row 0 is the neighbor
    CHECK(model->predict(rows({{0.0}})) == Labels{1});
}

TEST_CASE("uniform vote ties resolve to the lowest class id") {
    const Matrix X = rows({{0.0}, {1.0}});
    const Labels y = {1, 0};
    KnnParams params;
    params.k = 2;
    const auto model = fit_knn(X, y, 2, params);
    CHECK(model->predict(rows({{0.5}})) == Labels{0});
}

TEST_CASE("euclidean and manhattan disagree where the balls differ") {
    // from the origin: row 0 is at L2 3.0 / L1 3.0, row 1 at L2 2.546 /
    // L1 3.6, so the nearest neighbor flips with the metric
    const Matrix X = rows({{3.0, 0.0}, {1.8, 1.8}});
    const Labels y = {0, 1};
    KnnParams params;
    params.k = 1;
    const auto eu = fit_knn(X, y, 2, params);
    params.metric = KnnMetric::manhattan;
    const auto mh = fit_knn(X, y, 2, params);
    const Matrix q = rows({{0.0, 0.0}});
    CHECK(eu->predict(q) == Labels{1});
    CHECK(mh->predict(q) == Labels{0});
}

TEST_CASE("parameter validation") {
    const Matrix X = rows({{0.0}, {1.0}});
    const Labels y = {0, 1};
    KnnParams params;
    params.k = 3;
    CHECK_THROWS_AS(fit_knn(X, y, 2, params), Error);  // k > n
    params.k = 0;
    CHECK_THROWS_AS(fit_knn(X, y, 2, params), Error);
    params.k = 1;
    CHECK_THROWS_AS(fit_knn(X, {0, 5}, 2, params), Error);  // label range

    const auto model = fit_knn(X, y, 2, params);
    CHECK_THROWS_AS(model->predict(rows({{0.0, 1.0}})), Error);  // width
}

TEST_CASE("string conversions accept the common alias") {
    CHECK(knn_metric_from_string("euclidean") == KnnMetric::euclidean);
    CHECK(knn_metric_from_string("manhattan") == KnnMetric::manhattan);
    CHECK_THROWS_AS(knn_metric_from_string("cosine"), Error);
    CHECK(knn_weights_from_string("uniform") == KnnWeights::uniform);
    CHECK(knn_weights_from_string("inverse_distance") ==
          KnnWeights::inverse_distance);
    CHECK(knn_weights_from_string("distance") == KnnWeights::inverse_distance);
    CHECK_THROWS_AS(knn_weights_from_string("gaussian"), Error);
}

TEST_CASE("knn params serialize and merge") {
    KnnParams params;
    params.k = 9;
    params.metric = KnnMetric::manhattan;
    params.weights = KnnWeights::inverse_distance;
    const auto j = knn_params_to_json(params);
    CHECK(j.at("k").get<int>() == 9);
    CHECK(j.at("metric").get<std::string>() == "manhattan");
    CHECK(j.at("weights").get<std::string>() == "inverse_distance");

    const KnnParams back = knn_params_from_json(j, KnnParams{});
    CHECK(back.k == 9);
    CHECK(back.metric == KnnMetric::manhattan);
    CHECK(back.weights == KnnWeights::inverse_distance);

    CHECK_THROWS_AS(knn_params_from_json({{"neighbors", 3}}, KnnParams{}),
                    Error);
}

TEST_CASE("knn separates well-spread blobs") {
    const Dataset train = ctg::testing::make_blobs(21, 150, 5, 3, 0.5);
    KnnParams params;
    params.k = 5;
    const auto model = fit_knn(train.X, train.y, 3, params);
    const Labels pred = model->predict(train.X);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == train.y[i]) ++hit;
    CHECK(static_cast<double>(hit) / static_cast<double>(pred.size()) > 0.9);
}
