#include "support/fixtures.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace ctg::testing {

double normal(Rng& rng) {
    const double u1 = 1.0 - rng.next_unit();  // (0, 1]
    const double u2 = rng.next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

Dataset make_synthetic_ctg(std::uint64_t seed) {
    const FeatureSchema& schema = FeatureSchema::ctg();
    const std::size_t d = schema.feature_count();
    const std::size_t counts[3] = {1655, 295, 176};

    // Class offsets in units of the per-feature spread; only the first ten
    // features are informative, the rest is noise around the midpoint.
    const double offsets[3] = {-0.55, 0.45, 1.45};

    Rng rng(derive_seed(seed, seed_tag("synthetic")));
    Dataset ds;
    ds.class_count = 3;
    ds.source = "synthetic";
    ds.X = Matrix(0, d);
    for (const auto& f : schema.features()) ds.feature_names.push_back(f.name);

    std::vector<double> row(d);
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < counts[c]; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                const auto& f = schema.features()[j];
                const double mid = 0.5 * (f.lo + f.hi);
                const double sigma = 0.15 * (f.hi - f.lo) + 1e-3;
                const double shift = j < 10 ? offsets[c] * sigma : 0.0;
                row[j] = mid + shift + sigma * normal(rng);
            }
            ds.X.append_row(row);
            ds.y.push_back(c);
        }
    }

    // Shuffle rows so class order carries no information.
    std::vector<std::size_t> perm(ds.rows());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng shuffle_rng(derive_seed(seed, seed_tag("synthetic.shuffle")));
    shuffle_rng.shuffle(perm);
    return take_rows(ds, perm);
}

Dataset make_blobs(std::uint64_t seed, std::size_t rows, std::size_t cols,
                   int class_count, double spread) {
    Rng rng(derive_seed(seed, seed_tag("blobs")));
    Matrix centers(static_cast<std::size_t>(class_count), cols);
    for (std::size_t c = 0; c < centers.rows(); ++c)
        for (std::size_t j = 0; j < cols; ++j)
            centers.at(c, j) = rng.next_in(-3.0, 3.0);

    Dataset ds;
    ds.class_count = class_count;
    ds.source = "blobs";
    ds.X = Matrix(0, cols);
    for (std::size_t j = 0; j < cols; ++j)
        ds.feature_names.push_back("f" + std::to_string(j));

    std::vector<double> row(cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const int c = static_cast<int>(i % static_cast<std::size_t>(class_count));
        for (std::size_t j = 0; j < cols; ++j)
            row[j] = centers.at(static_cast<std::size_t>(c), j) +
                     spread * normal(rng);
        ds.X.append_row(row);
        ds.y.push_back(c);
    }
    return ds;
}

std::string find_real_ctg_csv() {
    if (const char* env = std::getenv("CTG_DATA")) {
        if (*env && std::filesystem::exists(env)) return env;
    }
    const auto repo_root =
        std::filesystem::path(__FILE__).parent_path().parent_path().parent_path();
    for (const char* name : {"data/ctg.csv", "data/CTG.csv", "data/fetal_health.csv"}) {
        const auto candidate = repo_root / name;
        if (std::filesystem::exists(candidate)) return candidate.string();
    }
    return "";
}

TempDir::TempDir(const std::string& prefix) {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / (prefix + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace ctg::testing
