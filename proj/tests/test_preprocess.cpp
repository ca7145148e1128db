#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "ctg/error.hpp"
#include "ctg/preprocess.hpp"
#include "support/fixtures.hpp"

using namespace ctg;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix make_matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t cols = rows.begin()->size();
    Matrix m(0, cols);
    for (const auto& r : rows) m.append_row(std::vector<double>(r));
    return m;
}

Dataset one_column_dataset(std::initializer_list<double> values) {
    Dataset ds;
    ds.class_count = 2;
    ds.feature_names = {"f0"};
    ds.X = Matrix(0, 1);
    for (const double v : values) {
        const double row[] = {v};
        ds.X.append_row(row);
        ds.y.push_back(0);
    }
    return ds;
}

}  // namespace

TEST_CASE("standardizer uses population sigma and centers exactly") {
    const Matrix X = make_matrix({{1, 10}, {3, 10}, {5, 10}});
    const Standardizer s = fit_standardizer(X);
    CHECK(s.means == std::vector<double>{3.0, 10.0});
    // population sigma of {1,3,5}: sqrt(8/3)
    CHECK(s.stds[0] == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-15));
    CHECK(s.stds[1] == 0.0);

    const Matrix Z = s.transform(X);
    CHECK(Z.at(0, 0) == doctest::Approx(-2.0 / std::sqrt(8.0 / 3.0)));
    CHECK(Z.at(1, 0) == 0.0);
    // constant columns map to zero instead of dividing by zero
    CHECK(Z.at(0, 1) == 0.0);
    CHECK(Z.at(2, 1) == 0.0);

    CHECK_THROWS_AS(fit_standardizer(Matrix(0, 2)), Error);
    CHECK_THROWS_AS(s.transform(Matrix(1, 3)), Error);
}

TEST_CASE("standardized non-constant columns have mean 0 and sigma 1") {
    const Dataset ds = ctg::testing::make_blobs(3, 200, 4, 3);
    const Standardizer s = fit_standardizer(ds.X);
    const Matrix Z = s.transform(ds.X);
    for (std::size_t c = 0; c < Z.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < Z.rows(); ++r) mean += Z.at(r, c);
        mean /= static_cast<double>(Z.rows());
        double var = 0.0;
        for (std::size_t r = 0; r < Z.rows(); ++r)
            var += (Z.at(r, c) - mean) * (Z.at(r, c) - mean);
        var /= static_cast<double>(Z.rows());
        CHECK(std::abs(mean) <= 1e-9);
        CHECK(std::abs(std::sqrt(var) - 1.0) <= 1e-9);
    }
}

TEST_CASE("median imputation: odd, even, and restricted-row conventions") {
    const Matrix X = make_matrix({{1, 2}, {3, kNaN}, {100, 4}, {kNaN, 6}});

    SUBCASE("median over all rows") {
        const auto stats = impute_statistics(X, ImputeStrategy::median, {}, {});
        CHECK(stats[0] == 3.0);  // odd count {1,3,100}
        CHECK(stats[1] == 4.0);  // odd count {2,4,6}
    }
    SUBCASE("even count averages the middle two") {
        const Matrix even = make_matrix({{1}, {2}, {3}, {10}});
        const auto stats =
            impute_statistics(even, ImputeStrategy::median, {}, {});
        CHECK(stats[0] == 2.5);
    }
    SUBCASE("mean strategy") {
        const auto stats = impute_statistics(X, ImputeStrategy::mean, {}, {});
        CHECK(stats[0] == doctest::Approx((1 + 3 + 100) / 3.0));
        CHECK(stats[1] == doctest::Approx(4.0));
    }
    SUBCASE("fit_rows restricts the statistic") {
        const auto stats =
            impute_statistics(X, ImputeStrategy::median, {0, 1}, {});
        CHECK(stats[0] == 2.0);  // median of {1,3}
        CHECK(stats[1] == 2.0);  // only row 0 observed
    }
    SUBCASE("apply fills exactly the NaN cells") {
        const Matrix filled = impute_missing(X, ImputeStrategy::median);
        CHECK(filled.at(1, 1) == 4.0);
        CHECK(filled.at(3, 0) == 3.0);
        CHECK(filled.at(0, 0) == 1.0);
        CHECK(filled.all_finite());
    }
    SUBCASE("fully missing column is an input error naming the column") {
        const Matrix bad = make_matrix({{1, kNaN}, {2, kNaN}});
        try {
            impute_missing(bad, ImputeStrategy::median, {"alpha", "beta"});
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::input);
            CHECK(std::string(e.what()).find("beta") != std::string::npos);
        }
    }
}

TEST_CASE("outlier rejection uses a strict k-sigma inequality") {
    // Column {0 x9, 1000}: mean 100, population sigma 300, so the extreme
    // row sits at exactly z = 3. A strict comparison keeps it at k = 3
    // and removes it just below.
    Dataset ds = one_column_dataset({0, 0, 0, 0, 0, 0, 0, 0, 0, 1000});

    SUBCASE("z exactly k is kept") {
        const auto [kept, report] = reject_outliers(ds, 3.0);
        CHECK(kept.rows() == 10);
        CHECK(report.removed.empty());
    }
    SUBCASE("z just above k is removed, with the feature named") {
        const auto [kept, report] = reject_outliers(ds, 2.9);
        CHECK(kept.rows() == 9);
        REQUIRE(report.removed.size() == 1);
        CHECK(report.removed[0].row == 9);
        CHECK(report.removed[0].features == std::vector<std::string>{"f0"});
        for (std::size_t r = 0; r < kept.rows(); ++r)
            CHECK(kept.X.at(r, 0) == 0.0);
    }
    SUBCASE("constant columns never trigger") {
        Dataset flat = one_column_dataset({5, 5, 5, 5});
        const auto [kept, report] = reject_outliers(flat, 0.001);
        CHECK(kept.rows() == 4);
    }
    SUBCASE("removing every row is a runtime error") {
        // two-point column: both rows sit at |z| = 1
        Dataset two = one_column_dataset({0, 10});
        CHECK_THROWS_AS(reject_outliers(two, 0.5), Error);
        try {
            reject_outliers(two, 0.5);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::runtime);
        }
    }
    SUBCASE("k must be positive") {
        CHECK_THROWS_AS(reject_outliers(ds, 0.0), Error);
    }
}

TEST_CASE("random oversampling balances to the majority count") {
    Dataset ds = ctg::testing::make_blobs(9, 47, 3, 3);
    // unbalance it: drop most of class 2
    std::vector<std::size_t> keep;
    std::size_t class2 = 0;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        if (ds.y[i] == 2 && ++class2 > 3) continue;
        keep.push_back(i);
    }
    ds = take_rows(ds, keep);
    const auto before = class_histogram(ds.y, 3);
    const std::size_t majority = *std::max_element(before.begin(), before.end());

    const Dataset big = random_oversample(ds, 123);
    const auto after = class_histogram(big.y, 3);
    for (const std::size_t c : after) CHECK(c == majority);

    // originals survive, in order, as a prefix
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        CHECK(big.y[i] == ds.y[i]);
        CHECK(big.X.row(i)[0] == ds.X.row(i)[0]);
    }
    // duplicates are copies of existing rows of the same class, grouped by
    // ascending class id
    int last_class = -1;
    for (std::size_t i = ds.rows(); i < big.rows(); ++i) {
        CHECK(big.y[i] >= last_class);
        last_class = big.y[i];
        bool found = false;
        for (std::size_t j = 0; j < ds.rows() && !found; ++j)
            found = ds.y[j] == big.y[i] && ds.X.row(j)[0] == big.X.row(i)[0] &&
                    ds.X.row(j)[1] == big.X.row(i)[1];
        CHECK(found);
    }

    CHECK(random_oversample(ds, 123).X == big.X);       // deterministic
    CHECK(random_oversample(ds, 124).X != big.X);       // seed-sensitive
}

TEST_CASE("oversampling the CTG class shape yields 3 x 1655 = 4965 rows") {
    const Dataset ds = ctg::testing::make_synthetic_ctg(1);
    const Dataset big = random_oversample(ds, 0);
    CHECK(big.rows() == 4965);
    CHECK(class_histogram(big.y, 3) ==
          std::vector<std::size_t>{1655, 1655, 1655});
}

TEST_CASE("train/test split: floor rule, disjoint cover, sorted indices") {
    const Labels y(100, 0);
    const SplitIndices s = train_test_split(4965, 0.7, 42, false, {});
    CHECK(s.train.size() == 3475);  // floor(4965 * 0.7)
    CHECK(s.test.size() == 1490);

    const SplitIndices t = train_test_split(100, 0.7, 7, false, y);
    CHECK(t.train.size() == 70);
    CHECK(t.test.size() == 30);
    CHECK(std::is_sorted(t.train.begin(), t.train.end()));
    CHECK(std::is_sorted(t.test.begin(), t.test.end()));
    std::set<std::size_t> all(t.train.begin(), t.train.end());
    all.insert(t.test.begin(), t.test.end());
    CHECK(all.size() == 100);
    CHECK(*all.rbegin() == 99);

    // deterministic per seed
    const SplitIndices t2 = train_test_split(100, 0.7, 7, false, y);
    CHECK(t2.train == t.train);
    const SplitIndices t3 = train_test_split(100, 0.7, 8, false, y);
    CHECK(t3.train != t.train);
}

TEST_CASE("stratified split applies the floor rule per class") {
    Labels y;
    for (int i = 0; i < 10; ++i) y.push_back(0);
    for (int i = 0; i < 5; ++i) y.push_back(1);
    const SplitIndices s = train_test_split(15, 0.7, 3, true, y);
    CHECK(s.train.size() == 10);  // floor(10*.7) + floor(5*.7) = 7 + 3
    std::size_t train0 = 0, train1 = 0;
    for (const std::size_t i : s.train) (y[i] == 0 ? train0 : train1)++;
    CHECK(train0 == 7);
    CHECK(train1 == 3);
}

TEST_CASE("split rejects degenerate inputs") {
    CHECK_THROWS_AS(train_test_split(1, 0.7, 0, false, {}), Error);
    CHECK_THROWS_AS(train_test_split(10, 0.0, 0, false, {}), Error);
    CHECK_THROWS_AS(train_test_split(10, 1.0, 0, false, {}), Error);
    CHECK_THROWS_AS(train_test_split(10, 0.05, 0, false, {}), Error);  // empty train
    Labels y(3, 0);
    CHECK_THROWS_AS(train_test_split(10, 0.7, 0, true, y), Error);
}

TEST_CASE("paper_faithful pipeline: oversample and standardize before split") {
    const Dataset ds = ctg::testing::make_synthetic_ctg(4);
    PipelineConfig cfg;
    cfg.mode = PipelineMode::paper_faithful;
    cfg.master_seed = 42;
    const PreparedData prep = run_pipeline(cfg, ds);

    CHECK(prep.train.rows() == 3475);
    CHECK(prep.test.rows() == 1490);
    CHECK(prep.mode == PipelineMode::paper_faithful);

    // standardization happened over the union, so the union is centered
    for (std::size_t c = 0; c < prep.train.X.cols(); ++c) {
        double sum = 0.0, sq = 0.0;
        for (std::size_t r = 0; r < prep.train.rows(); ++r)
            sum += prep.train.X.at(r, c);
        for (std::size_t r = 0; r < prep.test.rows(); ++r)
            sum += prep.test.X.at(r, c);
        const double n = 4965.0;
        const double mean = sum / n;
        for (std::size_t r = 0; r < prep.train.rows(); ++r)
            sq += (prep.train.X.at(r, c) - mean) * (prep.train.X.at(r, c) - mean);
        for (std::size_t r = 0; r < prep.test.rows(); ++r)
            sq += (prep.test.X.at(r, c) - mean) * (prep.test.X.at(r, c) - mean);
        CHECK(std::abs(mean) <= 1e-9);
        CHECK(std::abs(std::sqrt(sq / n) - 1.0) <= 1e-9);
    }

    // step log records the documented order
    REQUIRE(prep.log.size() == 4);
    CHECK(prep.log[0].step == "impute");
    CHECK(prep.log[1].step == "oversample");
    CHECK(prep.log[2].step == "standardize");
    CHECK(prep.log[3].step == "split");

    // byte-level determinism
    const PreparedData again = run_pipeline(cfg, ds);
    CHECK(again.train == prep.train);
    CHECK(again.test == prep.test);
}

TEST_CASE("leakage_safe pipeline: split first, fit everything on train") {
    const Dataset ds = ctg::testing::make_synthetic_ctg(4);
    PipelineConfig cfg;
    cfg.mode = PipelineMode::leakage_safe;
    cfg.master_seed = 42;
    const PreparedData prep = run_pipeline(cfg, ds);

    CHECK(prep.mode == PipelineMode::leakage_safe);
    CHECK(prep.log.front().step == "split");
    CHECK(prep.test.rows() == 638);  // 2126 - floor(2126*0.7)

    // test keeps the raw imbalance: no oversampled duplicates leaked in
    const auto counts = class_histogram(prep.test.y, 3);
    const double n = static_cast<double>(prep.test.rows());
    CHECK(std::abs(counts[0] / n - 1655.0 / 2126.0) < 0.03);
    CHECK(std::abs(counts[1] / n - 295.0 / 2126.0) < 0.03);
    CHECK(std::abs(counts[2] / n - 176.0 / 2126.0) < 0.03);

    // train side is oversampled to balance
    const auto train_counts = class_histogram(prep.train.y, 3);
    CHECK(train_counts[0] == train_counts[1]);
    CHECK(train_counts[1] == train_counts[2]);

    // standardizer was fit on the train side only
    for (std::size_t c = 0; c < 3; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < prep.train.rows(); ++r)
            mean += prep.train.X.at(r, c);
        mean /= static_cast<double>(prep.train.rows());
        CHECK(std::abs(mean) <= 1e-9);
    }
}

TEST_CASE("outlier step participates when enabled") {
    Dataset ds = ctg::testing::make_synthetic_ctg(4);
    PipelineConfig cfg;
    cfg.outlier_enabled = true;
    cfg.outlier_k = 4.0;
    cfg.master_seed = 1;
    const PreparedData prep = run_pipeline(cfg, ds);
    bool saw_outlier_step = false;
    for (const auto& step : prep.log)
        saw_outlier_step = saw_outlier_step || step.step == "reject_outliers";
    CHECK(saw_outlier_step);
}

TEST_CASE("pipeline mode strings round-trip") {
    CHECK(pipeline_mode_from_string("paper_faithful") ==
          PipelineMode::paper_faithful);
    CHECK(pipeline_mode_from_string("leakage_safe") ==
          PipelineMode::leakage_safe);
    CHECK(std::string(to_string(PipelineMode::leakage_safe)) ==
          "leakage_safe");
    CHECK_THROWS_AS(pipeline_mode_from_string("bogus"), Error);
}
