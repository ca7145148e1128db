#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ctg/matrix.hpp"

namespace ctg {

// Per-column affine rescale to zero mean, unit standard deviation.
// Population convention: sigma divides by n.
struct Standardizer {
    std::vector<double> means;
    std::vector<double> stds;

    // (v - mean) / std per cell; columns with std == 0 map to 0.0.
    Matrix transform(const Matrix& X) const;
};

Standardizer fit_standardizer(const Matrix& X);

enum class PipelineMode { paper_faithful, leakage_safe };
enum class ImputeStrategy { median, mean };

const char* to_string(PipelineMode mode);
PipelineMode pipeline_mode_from_string(const std::string& name);

struct PipelineConfig {
    PipelineMode mode = PipelineMode::paper_faithful;
    ImputeStrategy impute = ImputeStrategy::median;
    bool outlier_enabled = false;
    double outlier_k = 3.0;
    bool oversample_enabled = true;
    double train_fraction = 0.7;
    bool stratify_split = false;
    std::uint64_t master_seed = 0;
};

struct StepLog {
    std::string step;
    std::size_t rows_before = 0;
    std::size_t rows_after = 0;
    std::string detail;
};

struct PreparedData {
    Dataset train;
    Dataset test;
    Standardizer standardizer;
    std::vector<StepLog> log;
    PipelineMode mode = PipelineMode::paper_faithful;
};

// Column statistics (median or mean) over non-missing entries; errors on a
// fully-missing column. `fit_rows` restricts the statistic to a row subset
// (empty = all rows), which is how the leakage-safe order imputes from the
// training side only.
std::vector<double> impute_statistics(const Matrix& X, ImputeStrategy strategy,
                                      const std::vector<std::size_t>& fit_rows,
                                      const std::vector<std::string>& names);

// Replaces NaN cells with the given per-column statistic.
Matrix apply_impute(const Matrix& X, const std::vector<double>& stats);

// compute + apply over all rows.
Matrix impute_missing(const Matrix& X, ImputeStrategy strategy,
                      const std::vector<std::string>& names = {});

struct OutlierReport {
    struct RemovedRow {
        std::size_t row;                     // index in the input dataset
        std::vector<std::string> features;   // which features triggered
    };
    std::vector<RemovedRow> removed;
};

// Removes any row with |v - mean_j| > k * sigma_j for some feature j, with
// mean/sigma taken from the input (population sigma; sigma == 0 columns never
// trigger). Errors when every row would be removed.
std::pair<Dataset, OutlierReport> reject_outliers(const Dataset& ds, double k);

// Brings every class up to the majority count by duplicating rows sampled
// uniformly with replacement. Output keeps the originals in order, then the
// duplicates grouped by ascending class id.
Dataset random_oversample(const Dataset& ds, std::uint64_t seed);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Seeded permutation split; train takes floor(n * train_fraction). Stratified
// mode applies the floor rule per class, remainders going to the test side.
// Both returned index lists are sorted ascending.
SplitIndices train_test_split(std::size_t n, double train_fraction,
                              std::uint64_t seed, bool stratify,
                              const Labels& y);

// The full preprocessing pipeline in one of two documented orders.
//
// paper_faithful: impute -> (outliers) -> oversample -> standardize on all
// rows -> split. Oversampling and standardizing before the split leaks
// duplicated minority rows and global statistics into the test set; this
// order exists to reproduce results built that way.
//
// leakage_safe: split -> impute from train stats -> (outliers, train only)
// -> oversample train only -> standardize on train only -> transform both.
PreparedData run_pipeline(const PipelineConfig& config, const Dataset& ds);

}  // namespace ctg
