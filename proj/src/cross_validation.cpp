#include "ctg/cross_validation.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "ctg/error.hpp"
#include "ctg/rng.hpp"

namespace ctg {

namespace {

// Block f of a shuffled sequence of length n: the first n % folds blocks are
// one longer.
std::pair<std::size_t, std::size_t> block_bounds(std::size_t n, int folds,
                                                 int f) {
    const std::size_t base = n / static_cast<std::size_t>(folds);
    const std::size_t extra = n % static_cast<std::size_t>(folds);
    const auto fi = static_cast<std::size_t>(f);
    const std::size_t lo = fi * base + std::min(fi, extra);
    const std::size_t hi = lo + base + (fi < extra ? 1 : 0);
    return {lo, hi};
}

}  // namespace

std::vector<FoldSplit> kfold_indices(const Labels& y, const CvConfig& cfg) {
    const std::size_t n = y.size();
    if (cfg.folds < 2) throw_input("cross-validation needs at least 2 folds");
    if (n < static_cast<std::size_t>(cfg.folds))
        throw_input(fmt::format("{} rows cannot fill {} folds", n, cfg.folds));

    const std::uint64_t base = derive_seed(cfg.seed, seed_tag("folds"));
    std::vector<std::vector<std::size_t>> validation(
        static_cast<std::size_t>(cfg.folds));

    if (!cfg.stratified) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        Rng rng(base);
        rng.shuffle(perm);
        for (int f = 0; f < cfg.folds; ++f) {
            const auto [lo, hi] = block_bounds(n, cfg.folds, f);
            validation[static_cast<std::size_t>(f)].assign(
                perm.begin() + static_cast<std::ptrdiff_t>(lo),
                perm.begin() + static_cast<std::ptrdiff_t>(hi));
        }
    } else {
        const int K = *std::max_element(y.begin(), y.end()) + 1;
        for (int c = 0; c < K; ++c) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i)
                if (y[i] == c) members.push_back(i);
            if (members.size() < static_cast<std::size_t>(cfg.folds))
                throw_input(fmt::format(
                    "class {} has {} rows, fewer than {} folds", c,
                    members.size(), cfg.folds));
            Rng rng(derive_seed(base, static_cast<std::uint64_t>(c)));
            rng.shuffle(members);
            for (int f = 0; f < cfg.folds; ++f) {
                const auto [lo, hi] = block_bounds(members.size(), cfg.folds, f);
                auto& v = validation[static_cast<std::size_t>(f)];
                v.insert(v.end(),
                         members.begin() + static_cast<std::ptrdiff_t>(lo),
                         members.begin() + static_cast<std::ptrdiff_t>(hi));
            }
        }
    }

    std::vector<FoldSplit> out(static_cast<std::size_t>(cfg.folds));
    std::vector<char> in_validation(n, 0);
    for (int f = 0; f < cfg.folds; ++f) {
        auto& split = out[static_cast<std::size_t>(f)];
        split.validation = std::move(validation[static_cast<std::size_t>(f)]);
        std::sort(split.validation.begin(), split.validation.end());
        std::fill(in_validation.begin(), in_validation.end(), 0);
        for (std::size_t i : split.validation) in_validation[i] = 1;
        split.train.reserve(n - split.validation.size());
        for (std::size_t i = 0; i < n; ++i)
            if (!in_validation[i]) split.train.push_back(i);
    }
    return out;
}

}  // namespace ctg
