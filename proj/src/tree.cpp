#include "ctg/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ctg/error.hpp"
#include "ctg/rng.hpp"

namespace ctg {

const char* to_string(SplitCriterion c) {
    return c == SplitCriterion::gini ? "gini" : "entropy";
}

SplitCriterion split_criterion_from_string(const std::string& name) {
    if (name == "gini") return SplitCriterion::gini;
    if (name == "entropy") return SplitCriterion::entropy;
    throw_input("unknown split criterion '" + name + "'");
}

const char* to_string(FeatureSubset f) {
    switch (f) {
        case FeatureSubset::all: return "all";
        case FeatureSubset::sqrt_features: return "sqrt";
        case FeatureSubset::log2_features: return "log2";
    }
    return "all";
}

FeatureSubset feature_subset_from_string(const std::string& name) {
    if (name == "all" || name == "none") return FeatureSubset::all;
    if (name == "sqrt") return FeatureSubset::sqrt_features;
    if (name == "log2") return FeatureSubset::log2_features;
    throw_input("unknown max_features setting '" + name + "'");
}

double gini_impurity(const std::vector<std::size_t>& counts) {
    const double total = static_cast<double>(
        std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    if (total == 0.0) return 0.0;
    double sum_sq = 0.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / total;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

double entropy_impurity(const std::vector<std::size_t>& counts) {
    const double total = static_cast<double>(
        std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    if (total == 0.0) return 0.0;
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return h;
}

void validate_tree_params(const TreeParams& params) {
    if (params.max_depth && *params.max_depth < 1)
        throw_input("max_depth must be at least 1 when set");
    if (params.min_samples_split < 2)
        throw_input("min_samples_split must be at least 2");
    if (params.min_samples_leaf < 1)
        throw_input("min_samples_leaf must be at least 1");
}

std::size_t feature_subset_size(FeatureSubset subset, std::size_t total) {
    if (total == 0) return 0;
    switch (subset) {
        case FeatureSubset::all:
            return total;
        case FeatureSubset::sqrt_features:
            return std::max<std::size_t>(
                1, static_cast<std::size_t>(std::sqrt(static_cast<double>(total))));
        case FeatureSubset::log2_features:
            return std::max<std::size_t>(
                1, static_cast<std::size_t>(std::log2(static_cast<double>(total))));
    }
    return total;
}

namespace {

double impurity(SplitCriterion criterion, const std::vector<std::size_t>& counts) {
    return criterion == SplitCriterion::gini ? gini_impurity(counts)
                                             : entropy_impurity(counts);
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    bool valid = false;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, const Labels& y, int class_count,
                const TreeParams& params, std::uint64_t seed)
        : X_(X), y_(y), class_count_(class_count), params_(params), rng_(seed) {
        all_features_.resize(X.cols());
        std::iota(all_features_.begin(), all_features_.end(), 0);
        subset_size_ = feature_subset_size(params.max_features, X.cols());
    }

    std::vector<TreeNode> build(std::vector<std::size_t> sample) {
        idx_ = std::move(sample);
        nodes_.clear();
        grow(0, idx_.size(), 0);
        return std::move(nodes_);
    }

private:
    int grow(std::size_t lo, std::size_t hi, int depth) {
        const std::size_t n = hi - lo;
        std::vector<std::size_t> counts(static_cast<std::size_t>(class_count_), 0);
        for (std::size_t i = lo; i < hi; ++i)
            ++counts[static_cast<std::size_t>(y_[idx_[i]])];

        const bool pure =
            std::count_if(counts.begin(), counts.end(),
                          [](std::size_t c) { return c > 0; }) <= 1;
        const bool depth_capped =
            params_.max_depth && depth >= *params_.max_depth;
        SplitChoice choice;
        if (!pure && !depth_capped &&
            n >= static_cast<std::size_t>(params_.min_samples_split)) {
            choice = find_split(lo, hi, counts);
        }
        if (!choice.valid) return make_leaf(counts);

        const auto boundary = std::stable_partition(
            idx_.begin() + static_cast<std::ptrdiff_t>(lo),
            idx_.begin() + static_cast<std::ptrdiff_t>(hi),
            [&](std::size_t r) {
                return X_.at(r, static_cast<std::size_t>(choice.feature)) <=
                       choice.threshold;
            });
        const std::size_t mid =
            static_cast<std::size_t>(boundary - idx_.begin());

        const int node = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        nodes_[static_cast<std::size_t>(node)].feature = choice.feature;
        nodes_[static_cast<std::size_t>(node)].threshold = choice.threshold;
        const int left = grow(lo, mid, depth + 1);
        const int right = grow(mid, hi, depth + 1);
        nodes_[static_cast<std::size_t>(node)].left = left;
        nodes_[static_cast<std::size_t>(node)].right = right;
        return node;
    }

    int make_leaf(const std::vector<std::size_t>& counts) {
        TreeNode leaf;
        leaf.class_counts.assign(counts.begin(), counts.end());
        leaf.prediction =
            static_cast<int>(argmax_tiebreak_lowest(leaf.class_counts));
        nodes_.push_back(std::move(leaf));
        return static_cast<int>(nodes_.size()) - 1;
    }

    // Candidate features come out of a partial Fisher-Yates draw and are then
    // sorted, so the lowest-index tie-break is independent of draw order. When
    // every feature is in play the RNG is left untouched.
    const std::vector<int>& candidate_features() {
        if (subset_size_ >= all_features_.size()) return all_features_;
        pool_ = all_features_;
        for (std::size_t i = 0; i < subset_size_; ++i) {
            const std::size_t j = i + rng_.next_below(pool_.size() - i);
            std::swap(pool_[i], pool_[j]);
        }
        pool_.resize(subset_size_);
        std::sort(pool_.begin(), pool_.end());
        return pool_;
    }

    SplitChoice find_split(std::size_t lo, std::size_t hi,
                           const std::vector<std::size_t>& counts) {
        const std::size_t n = hi - lo;
        const double parent = impurity(params_.criterion, counts);
        const auto& features = candidate_features();

        SplitChoice best;
        best.gain = 0.0;
        for (int f : features) {
            if (params_.splitter == SplitterKind::best)
                best_threshold_for(f, lo, hi, n, parent, counts, best);
            else
                random_threshold_for(f, lo, hi, n, parent, counts, best);
        }
        return best;
    }

    void best_threshold_for(int f, std::size_t lo, std::size_t hi, std::size_t n,
                            double parent, const std::vector<std::size_t>& counts,
                            SplitChoice& best) {
        sorted_.clear();
        sorted_.reserve(n);
        for (std::size_t i = lo; i < hi; ++i) {
            const std::size_t r = idx_[i];
            sorted_.emplace_back(X_.at(r, static_cast<std::size_t>(f)), y_[r]);
        }
        std::sort(sorted_.begin(), sorted_.end());

        const std::size_t msl = static_cast<std::size_t>(params_.min_samples_leaf);
        std::vector<std::size_t> left(static_cast<std::size_t>(class_count_), 0);
        std::vector<std::size_t> right = counts;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto cls = static_cast<std::size_t>(sorted_[i].second);
            ++left[cls];
            --right[cls];
            if (sorted_[i].first == sorted_[i + 1].first) continue;
            const std::size_t nl = i + 1, nr = n - nl;
            if (nl < msl || nr < msl) continue;
            double t = 0.5 * (sorted_[i].first + sorted_[i + 1].first);
            if (t == sorted_[i + 1].first) t = sorted_[i].first;
            consider(f, t, nl, nr, left, right, n, parent, best);
        }
    }

    // Extra-trees style: one uniform threshold per candidate feature, drawn in
    // ascending feature order so the RNG stream is reproducible. Constant
    // features consume no draw.
    void random_threshold_for(int f, std::size_t lo, std::size_t hi,
                              std::size_t n, double parent,
                              const std::vector<std::size_t>& counts,
                              SplitChoice& best) {
        double mn = std::numeric_limits<double>::infinity();
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t i = lo; i < hi; ++i) {
            const double v = X_.at(idx_[i], static_cast<std::size_t>(f));
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        if (!(mx > mn)) return;
        double t = rng_.next_in(mn, mx);
        if (!(t < mx)) t = std::nextafter(mx, mn);

        std::vector<std::size_t> left(static_cast<std::size_t>(class_count_), 0);
        for (std::size_t i = lo; i < hi; ++i) {
            const std::size_t r = idx_[i];
            if (X_.at(r, static_cast<std::size_t>(f)) <= t)
                ++left[static_cast<std::size_t>(y_[r])];
        }
        std::vector<std::size_t> right(static_cast<std::size_t>(class_count_), 0);
        std::size_t nl = 0;
        for (std::size_t c = 0; c < left.size(); ++c) {
            right[c] = counts[c] - left[c];
            nl += left[c];
        }
        const std::size_t nr = n - nl;
        const std::size_t msl = static_cast<std::size_t>(params_.min_samples_leaf);
        if (nl < msl || nr < msl) return;
        consider(f, t, nl, nr, left, right, n, parent, best);
    }

    void consider(int f, double t, std::size_t nl, std::size_t nr,
                  const std::vector<std::size_t>& left,
                  const std::vector<std::size_t>& right, std::size_t n,
                  double parent, SplitChoice& best) {
        const double child =
            (static_cast<double>(nl) * impurity(params_.criterion, left) +
             static_cast<double>(nr) * impurity(params_.criterion, right)) /
            static_cast<double>(n);
        const double gain = parent - child;
        if (gain > best.gain) {
            best.feature = f;
            best.threshold = t;
            best.gain = gain;
            best.valid = true;
        }
    }

    const Matrix& X_;
    const Labels& y_;
    int class_count_;
    TreeParams params_;
    Rng rng_;
    std::size_t subset_size_ = 0;
    std::vector<int> all_features_;
    std::vector<int> pool_;
    std::vector<std::size_t> idx_;
    std::vector<std::pair<double, int>> sorted_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

std::vector<TreeNode> build_tree(const Matrix& X, const Labels& y,
                                 const std::vector<std::size_t>& sample,
                                 int class_count, const TreeParams& params,
                                 std::uint64_t seed) {
    validate_tree_params(params);
    if (sample.empty()) throw_input("cannot grow a tree on an empty sample");
    if (X.rows() != y.size()) throw_input("feature/label row count mismatch");
    for (std::size_t r : sample)
        if (r >= X.rows()) throw_input("tree sample index out of range");
    class_histogram(y, class_count);
    TreeBuilder builder(X, y, class_count, params, seed);
    return builder.build(sample);
}

DecisionTreeModel::DecisionTreeModel(std::vector<TreeNode> nodes, int class_count,
                                     std::size_t feature_count, TreeParams params)
    : nodes_(std::move(nodes)),
      class_count_(class_count),
      feature_count_(feature_count),
      params_(std::move(params)) {
    if (nodes_.empty()) throw_input("decision tree has no nodes");
}

int tree_predict_row(const std::vector<TreeNode>& nodes,
                     std::span<const double> row) {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
        node = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold
                   ? nd.left
                   : nd.right;
    }
    return nodes[static_cast<std::size_t>(node)].prediction;
}

int DecisionTreeModel::predict_row(std::span<const double> row) const {
    return tree_predict_row(nodes_, row);
}

Labels DecisionTreeModel::predict(const Matrix& X) const {
    if (X.cols() != feature_count_)
        throw_input("decision tree expects " + std::to_string(feature_count_) +
                    " features, got " + std::to_string(X.cols()));
    Labels out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) out[r] = predict_row(X.row(r));
    return out;
}

nlohmann::json DecisionTreeModel::payload() const {
    return {{"class_count", class_count_},
            {"feature_count", feature_count_},
            {"params", tree_params_to_json(params_)},
            {"nodes", tree_nodes_to_json(nodes_)}};
}

std::shared_ptr<DecisionTreeModel> fit_decision_tree(const Matrix& X,
                                                     const Labels& y,
                                                     int class_count,
                                                     const TreeParams& params,
                                                     std::uint64_t seed) {
    std::vector<std::size_t> sample(X.rows());
    std::iota(sample.begin(), sample.end(), 0);
    return std::make_shared<DecisionTreeModel>(
        build_tree(X, y, sample, class_count, params, seed), class_count,
        X.cols(), params);
}

nlohmann::json tree_params_to_json(const TreeParams& params) {
    nlohmann::json j;
    j["max_depth"] =
        params.max_depth ? nlohmann::json(*params.max_depth) : nlohmann::json();
    j["min_samples_split"] = params.min_samples_split;
    j["min_samples_leaf"] = params.min_samples_leaf;
    j["criterion"] = to_string(params.criterion);
    j["max_features"] = to_string(params.max_features);
    j["splitter"] = params.splitter == SplitterKind::best ? "best" : "random";
    return j;
}

TreeParams tree_params_from_json(const nlohmann::json& j, TreeParams base) {
    for (const auto& [key, value] : j.items()) {
        if (key == "max_depth") {
            if (value.is_null())
                base.max_depth.reset();
            else
                base.max_depth = value.get<int>();
        } else if (key == "min_samples_split") {
            base.min_samples_split = value.get<int>();
        } else if (key == "min_samples_leaf") {
            base.min_samples_leaf = value.get<int>();
        } else if (key == "criterion") {
            base.criterion = split_criterion_from_string(value.get<std::string>());
        } else if (key == "max_features") {
            base.max_features = feature_subset_from_string(value.get<std::string>());
        } else if (key == "splitter") {
            const auto name = value.get<std::string>();
            if (name == "best")
                base.splitter = SplitterKind::best;
            else if (name == "random")
                base.splitter = SplitterKind::random_threshold;
            else
                throw_input("unknown splitter '" + name + "'");
        } else {
            throw_input("unknown tree parameter '" + key + "'");
        }
    }
    validate_tree_params(base);
    return base;
}

nlohmann::json tree_nodes_to_json(const std::vector<TreeNode>& nodes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const TreeNode& nd : nodes) {
        nlohmann::json j = {{"feature", nd.feature},
                            {"threshold", nd.threshold},
                            {"left", nd.left},
                            {"right", nd.right},
                            {"prediction", nd.prediction}};
        if (!nd.class_counts.empty()) j["counts"] = nd.class_counts;
        arr.push_back(std::move(j));
    }
    return arr;
}

std::vector<TreeNode> tree_nodes_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw_input("tree payload has no nodes");
    std::vector<TreeNode> nodes;
    nodes.reserve(j.size());
    const int count = static_cast<int>(j.size());
    for (const auto& item : j) {
        TreeNode nd;
        nd.feature = item.at("feature").get<int>();
        nd.threshold = item.at("threshold").get<double>();
        nd.left = item.at("left").get<int>();
        nd.right = item.at("right").get<int>();
        nd.prediction = item.at("prediction").get<int>();
        if (item.contains("counts"))
            nd.class_counts = item.at("counts").get<std::vector<double>>();
        if (nd.feature >= 0 &&
            (nd.left < 0 || nd.left >= count || nd.right < 0 || nd.right >= count))
            throw_input("tree payload has a dangling child index");
        nodes.push_back(std::move(nd));
    }
    return nodes;
}

}  // namespace ctg
