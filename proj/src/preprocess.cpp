#include "ctg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "ctg/error.hpp"
#include "ctg/rng.hpp"

namespace ctg {

const char* to_string(PipelineMode mode) {
    return mode == PipelineMode::paper_faithful ? "paper_faithful" : "leakage_safe";
}

PipelineMode pipeline_mode_from_string(const std::string& name) {
    if (name == "paper_faithful") return PipelineMode::paper_faithful;
    if (name == "leakage_safe") return PipelineMode::leakage_safe;
    throw_input("unknown pipeline mode '" + name + "'");
}

Standardizer fit_standardizer(const Matrix& X) {
    if (X.rows() == 0) throw_input("cannot fit standardizer on an empty matrix");
    const std::size_t n = X.rows(), d = X.cols();
    Standardizer s;
    s.means.assign(d, 0.0);
    s.stds.assign(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < n; ++r) sum += X.at(r, c);
        const double mean = sum / static_cast<double>(n);
        double sq = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double dv = X.at(r, c) - mean;
            sq += dv * dv;
        }
        s.means[c] = mean;
        s.stds[c] = std::sqrt(sq / static_cast<double>(n));
    }
    return s;
}

Matrix Standardizer::transform(const Matrix& X) const {
    if (X.cols() != means.size())
        throw_input(fmt::format("standardizer fitted on {} columns, input has {}",
                                means.size(), X.cols()));
    Matrix out(X.rows(), X.cols());
    for (std::size_t c = 0; c < X.cols(); ++c) {
        const double mean = means[c], sd = stds[c];
        for (std::size_t r = 0; r < X.rows(); ++r) {
            out.at(r, c) = sd > 0.0 ? (X.at(r, c) - mean) / sd : 0.0;
        }
    }
    return out;
}

std::vector<double> impute_statistics(const Matrix& X, ImputeStrategy strategy,
                                      const std::vector<std::size_t>& fit_rows,
                                      const std::vector<std::string>& names) {
    const std::size_t d = X.cols();
    std::vector<double> stats(d, 0.0);
    std::vector<double> column;
    for (std::size_t c = 0; c < d; ++c) {
        column.clear();
        if (fit_rows.empty()) {
            for (std::size_t r = 0; r < X.rows(); ++r) {
                const double v = X.at(r, c);
                if (!std::isnan(v)) column.push_back(v);
            }
        } else {
            for (std::size_t r : fit_rows) {
                const double v = X.at(r, c);
                if (!std::isnan(v)) column.push_back(v);
            }
        }
        if (column.empty()) {
            const std::string name =
                c < names.size() ? names[c] : "col" + std::to_string(c);
            throw_input("column '" + name + "' has no observed values to impute from");
        }
        if (strategy == ImputeStrategy::mean) {
            stats[c] = std::accumulate(column.begin(), column.end(), 0.0) /
                       static_cast<double>(column.size());
        } else {
            std::sort(column.begin(), column.end());
            const std::size_t m = column.size();
            stats[c] = (m % 2 == 1) ? column[m / 2]
                                    : 0.5 * (column[m / 2 - 1] + column[m / 2]);
        }
    }
    return stats;
}

Matrix apply_impute(const Matrix& X, const std::vector<double>& stats) {
    if (stats.size() != X.cols()) throw_input("impute statistics dimension mismatch");
    Matrix out = X;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        for (std::size_t c = 0; c < out.cols(); ++c) {
            if (std::isnan(out.at(r, c))) out.at(r, c) = stats[c];
        }
    }
    return out;
}

Matrix impute_missing(const Matrix& X, ImputeStrategy strategy,
                      const std::vector<std::string>& names) {
    return apply_impute(X, impute_statistics(X, strategy, {}, names));
}

std::pair<Dataset, OutlierReport> reject_outliers(const Dataset& ds, double k) {
    if (k <= 0.0) throw_input("outlier threshold k must be positive");
    if (ds.rows() == 0) throw_input("cannot reject outliers on an empty dataset");

    const Standardizer stats = fit_standardizer(ds.X);
    OutlierReport report;
    std::vector<std::size_t> keep;
    keep.reserve(ds.rows());
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        std::vector<std::string> triggers;
        for (std::size_t c = 0; c < ds.X.cols(); ++c) {
            if (stats.stds[c] <= 0.0) continue;
            if (std::abs(ds.X.at(r, c) - stats.means[c]) > k * stats.stds[c]) {
                triggers.push_back(c < ds.feature_names.size()
                                       ? ds.feature_names[c]
                                       : "col" + std::to_string(c));
            }
        }
        if (triggers.empty()) {
            keep.push_back(r);
        } else {
            report.removed.push_back({r, std::move(triggers)});
        }
    }
    if (keep.empty()) throw_runtime("degenerate outlier threshold: all rows removed");
    return {take_rows(ds, keep), std::move(report)};
}

Dataset random_oversample(const Dataset& ds, std::uint64_t seed) {
    if (ds.rows() == 0) throw_input("cannot oversample an empty dataset");
    const auto counts = class_histogram(ds.y, ds.class_count);
    const std::size_t majority = *std::max_element(counts.begin(), counts.end());

    std::vector<std::vector<std::size_t>> rows_per_class(
        static_cast<std::size_t>(ds.class_count));
    for (std::size_t r = 0; r < ds.rows(); ++r)
        rows_per_class[static_cast<std::size_t>(ds.y[r])].push_back(r);

    std::vector<std::size_t> order(ds.rows());
    std::iota(order.begin(), order.end(), 0);
    const std::uint64_t base = derive_seed(seed, seed_tag("oversample"));
    for (int c = 0; c < ds.class_count; ++c) {
        const auto& members = rows_per_class[static_cast<std::size_t>(c)];
        if (members.empty()) continue;
        Rng rng(derive_seed(base, static_cast<std::uint64_t>(c)));
        for (std::size_t i = members.size(); i < majority; ++i)
            order.push_back(members[rng.next_below(members.size())]);
    }
    return take_rows(ds, order);
}

SplitIndices train_test_split(std::size_t n, double train_fraction,
                              std::uint64_t seed, bool stratify,
                              const Labels& y) {
    if (n < 2) throw_input("need at least 2 rows to split");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw_input(fmt::format("train fraction {} outside (0, 1)", train_fraction));

    SplitIndices split;
    if (!stratify) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        Rng rng(derive_seed(seed, seed_tag("split")));
        rng.shuffle(perm);
        const std::size_t train_size = static_cast<std::size_t>(
            std::floor(static_cast<double>(n) * train_fraction));
        split.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(train_size));
        split.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(train_size), perm.end());
    } else {
        if (y.size() != n) throw_input("stratified split needs labels for every row");
        const int K = y.empty() ? 0 : *std::max_element(y.begin(), y.end()) + 1;
        std::vector<std::vector<std::size_t>> rows_per_class(
            static_cast<std::size_t>(K));
        for (std::size_t r = 0; r < n; ++r)
            rows_per_class[static_cast<std::size_t>(y[r])].push_back(r);
        const std::uint64_t base = derive_seed(seed, seed_tag("split"));
        for (int c = 0; c < K; ++c) {
            auto& members = rows_per_class[static_cast<std::size_t>(c)];
            Rng rng(derive_seed(base, static_cast<std::uint64_t>(c)));
            rng.shuffle(members);
            const std::size_t train_size = static_cast<std::size_t>(std::floor(
                static_cast<double>(members.size()) * train_fraction));
            split.train.insert(split.train.end(), members.begin(),
                               members.begin() + static_cast<std::ptrdiff_t>(train_size));
            split.test.insert(split.test.end(),
                              members.begin() + static_cast<std::ptrdiff_t>(train_size),
                              members.end());
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    if (split.train.empty() || split.test.empty())
        throw_input("split produced an empty side");
    return split;
}

namespace {

std::string counts_string(const Dataset& ds) {
    const auto counts = class_histogram(ds.y, ds.class_count);
    std::string s = "class counts [";
    for (std::size_t c = 0; c < counts.size(); ++c)
        s += (c ? " " : "") + std::to_string(counts[c]);
    return s + "]";
}

std::size_t missing_cells(const Matrix& X) {
    std::size_t count = 0;
    for (double v : X.values())
        if (std::isnan(v)) ++count;
    return count;
}

}  // namespace

PreparedData run_pipeline(const PipelineConfig& config, const Dataset& ds) {
    PreparedData prepared;
    prepared.mode = config.mode;
    auto log = [&prepared](std::string step, std::size_t before, std::size_t after,
                           std::string detail) {
        prepared.log.push_back({std::move(step), before, after, std::move(detail)});
    };

    const char* impute_name =
        config.impute == ImputeStrategy::median ? "median" : "mean";

    if (config.mode == PipelineMode::paper_faithful) {
        Dataset work = ds;
        const std::size_t filled = missing_cells(work.X);
        work.X = impute_missing(work.X, config.impute, work.feature_names);
        log("impute", work.rows(), work.rows(),
            fmt::format("{} strategy, {} cells filled", impute_name, filled));

        if (config.outlier_enabled) {
            auto [kept, report] = reject_outliers(work, config.outlier_k);
            log("reject_outliers", work.rows(), kept.rows(),
                fmt::format("k={}, removed {} rows", config.outlier_k,
                            report.removed.size()));
            work = std::move(kept);
        }

        if (config.oversample_enabled) {
            Dataset balanced = random_oversample(work, config.master_seed);
            log("oversample", work.rows(), balanced.rows(), counts_string(balanced));
            work = std::move(balanced);
        }

        prepared.standardizer = fit_standardizer(work.X);
        work.X = prepared.standardizer.transform(work.X);
        log("standardize", work.rows(), work.rows(), "fit on all rows");

        const SplitIndices split =
            train_test_split(work.rows(), config.train_fraction, config.master_seed,
                             config.stratify_split, work.y);
        prepared.train = take_rows(work, split.train);
        prepared.test = take_rows(work, split.test);
        log("split", work.rows(), prepared.train.rows(),
            fmt::format("train {} / test {}", prepared.train.rows(),
                        prepared.test.rows()));
    } else {
        const SplitIndices split =
            train_test_split(ds.rows(), config.train_fraction, config.master_seed,
                             config.stratify_split, ds.y);
        log("split", ds.rows(), split.train.size(),
            fmt::format("train {} / test {}", split.train.size(), split.test.size()));

        Dataset work = ds;
        const std::size_t filled = missing_cells(work.X);
        const std::vector<double> stats = impute_statistics(
            work.X, config.impute, split.train, work.feature_names);
        work.X = apply_impute(work.X, stats);
        log("impute", work.rows(), work.rows(),
            fmt::format("{} strategy from train rows only, {} cells filled",
                        impute_name, filled));

        prepared.train = take_rows(work, split.train);
        prepared.test = take_rows(work, split.test);

        if (config.outlier_enabled) {
            auto [kept, report] = reject_outliers(prepared.train, config.outlier_k);
            log("reject_outliers", prepared.train.rows(), kept.rows(),
                fmt::format("k={}, removed {} rows (train only)", config.outlier_k,
                            report.removed.size()));
            prepared.train = std::move(kept);
        }

        if (config.oversample_enabled) {
            Dataset balanced = random_oversample(prepared.train, config.master_seed);
            log("oversample", prepared.train.rows(), balanced.rows(),
                counts_string(balanced) + " (train only)");
            prepared.train = std::move(balanced);
        }

        prepared.standardizer = fit_standardizer(prepared.train.X);
        prepared.train.X = prepared.standardizer.transform(prepared.train.X);
        prepared.test.X = prepared.standardizer.transform(prepared.test.X);
        log("standardize", prepared.train.rows(), prepared.train.rows(),
            "fit on train rows only");
    }

    if (!prepared.train.X.all_finite() || !prepared.test.X.all_finite())
        throw_runtime("pipeline produced non-finite feature values");
    return prepared;
}

}  // namespace ctg
