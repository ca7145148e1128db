#pragma once

#include <cstdint>
#include <vector>

#include "ctg/matrix.hpp"

namespace ctg {

struct CvConfig {
    int folds = 5;
    bool stratified = true;
    std::uint64_t seed = 0;
};

struct FoldSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

// Seeded permutation cut into `folds` validation blocks whose sizes differ by
// at most one; stratified mode applies that rule per class. Index lists come
// back sorted, so fold layouts compare byte-for-byte across runs.
std::vector<FoldSplit> kfold_indices(const Labels& y, const CvConfig& cfg);

}  // namespace ctg
