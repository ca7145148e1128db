#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ctg/ingest.hpp"
#include "ctg/matrix.hpp"
#include "ctg/rng.hpp"

namespace ctg::testing {

// Standard normal deviate (Box-Muller over the library RNG).
double normal(Rng& rng);

// Synthetic table shaped exactly like the cardiotocography export: 2126 rows,
// the 21 schema features, class counts {1655, 295, 176}, rows shuffled.
// Classes sit on separated cluster centers so tuned models reach high-90s
// accuracy, but they are not trivially separable.
Dataset make_synthetic_ctg(std::uint64_t seed);

// Small random clustered task for property tests. Rows are assigned classes
// round-robin, so every class is populated for rows >= class_count.
Dataset make_blobs(std::uint64_t seed, std::size_t rows, std::size_t cols,
                   int class_count, double spread = 1.0);

// Real cardiotocography CSV when one is available: $CTG_DATA first, then
// data/ctg.csv in the repository. Empty string when absent.
std::string find_real_ctg_csv();

// Unique scratch directory, removed recursively on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& prefix = "ctg_test");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const {
        return path_ / name;
    }

private:
    std::filesystem::path path_;
};

}  // namespace ctg::testing
