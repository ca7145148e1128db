#include <doctest.h>

#include <algorithm>
#include <set>

#include "ctg/cross_validation.hpp"
#include "ctg/error.hpp"
#include "ctg/rng.hpp"

using namespace ctg;

namespace {

void check_partition(const std::vector<FoldSplit>& folds, std::size_t n) {
    std::set<std::size_t> seen;
    for (const FoldSplit& f : folds) {
        CHECK(std::is_sorted(f.validation.begin(), f.validation.end()));
        CHECK(std::is_sorted(f.train.begin(), f.train.end()));
        CHECK(f.train.size() + f.validation.size() == n);
        for (const std::size_t i : f.validation) {
            CHECK(seen.insert(i).second);  // validation blocks are disjoint
            CHECK(i < n);
        }
        // train is exactly the complement
        std::set<std::size_t> fold_all(f.train.begin(), f.train.end());
        fold_all.insert(f.validation.begin(), f.validation.end());
        CHECK(fold_all.size() == n);
    }
    CHECK(seen.size() == n);  // blocks cover every row
}

}  // namespace

TEST_CASE("unstratified folds partition the rows with sizes within one") {
    Labels y(23, 0);
    CvConfig cfg;
    cfg.folds = 5;
    cfg.stratified = false;
    cfg.seed = 9;
    const auto folds = kfold_indices(y, cfg);
    REQUIRE(folds.size() == 5);
    check_partition(folds, 23);

    // 23 = 5+5+5+4+4, larger blocks first
    std::vector<std::size_t> sizes;
    for (const auto& f : folds) sizes.push_back(f.validation.size());
    CHECK(sizes == std::vector<std::size_t>{5, 5, 5, 4, 4});
}

TEST_CASE("stratified folds balance every class to within one row") {
    Labels y;
    for (int i = 0; i < 17; ++i) y.push_back(0);
    for (int i = 0; i < 9; ++i) y.push_back(1);
    for (int i = 0; i < 5; ++i) y.push_back(2);
    CvConfig cfg;
    cfg.folds = 4;
    cfg.stratified = true;
    cfg.seed = 3;
    const auto folds = kfold_indices(y, cfg);
    REQUIRE(folds.size() == 4);
    check_partition(folds, 31);

    for (int c = 0; c < 3; ++c) {
        std::vector<std::size_t> per_fold;
        for (const auto& f : folds) {
            std::size_t count = 0;
            for (const std::size_t i : f.validation)
                if (y[i] == c) ++count;
            per_fold.push_back(count);
        }
        const auto [lo, hi] =
            std::minmax_element(per_fold.begin(), per_fold.end());
        CHECK(*hi - *lo <= 1);
    }
}

TEST_CASE("fold layout is a pure function of labels and config") {
    Labels y;
    Rng rng(5);
    for (int i = 0; i < 40; ++i) y.push_back(static_cast<int>(rng.next_below(3)));
    CvConfig cfg;
    cfg.folds = 5;
    cfg.seed = 77;

    const auto a = kfold_indices(y, cfg);
    const auto b = kfold_indices(y, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t f = 0; f < a.size(); ++f) {
        CHECK(a[f].validation == b[f].validation);
        CHECK(a[f].train == b[f].train);
    }

    cfg.seed = 78;
    const auto c = kfold_indices(y, cfg);
    bool any_differ = false;
    for (std::size_t f = 0; f < a.size(); ++f)
        any_differ = any_differ || a[f].validation != c[f].validation;
    CHECK(any_differ);
}

TEST_CASE("fold config validation") {
    Labels y(10, 0);
    CvConfig cfg;

    cfg.folds = 1;
    CHECK_THROWS_AS(kfold_indices(y, cfg), Error);

    cfg.folds = 11;
    CHECK_THROWS_AS(kfold_indices(y, cfg), Error);

    // stratified needs every class to fill each fold at least once
    Labels few = {0, 0, 0, 0, 0, 1, 1};
    cfg.folds = 3;
    cfg.stratified = true;
    try {
        kfold_indices(few, cfg);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::input);
        CHECK(std::string(e.what()).find("class 1") != std::string::npos);
    }

    // the same shape passes unstratified
    cfg.stratified = false;
    CHECK_NOTHROW(kfold_indices(few, cfg));
}
