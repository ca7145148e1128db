#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctg/matrix.hpp"
#include "ctg/model.hpp"

namespace ctg {

enum class SplitCriterion { gini, entropy };
enum class SplitterKind { best, random_threshold };
enum class FeatureSubset { all, sqrt_features, log2_features };

const char* to_string(SplitCriterion c);
SplitCriterion split_criterion_from_string(const std::string& name);
const char* to_string(FeatureSubset f);
FeatureSubset feature_subset_from_string(const std::string& name);

// Impurity of a node described by per-class sample counts. Entropy is in bits
// and treats empty classes as contributing zero.
double gini_impurity(const std::vector<std::size_t>& counts);
double entropy_impurity(const std::vector<std::size_t>& counts);

struct TreeParams {
    std::optional<int> max_depth;  // unset = grow until pure or size limits hit
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    SplitCriterion criterion = SplitCriterion::gini;
    FeatureSubset max_features = FeatureSubset::all;
    SplitterKind splitter = SplitterKind::best;
};

void validate_tree_params(const TreeParams& params);

// Number of candidate features examined per node for `total` input features.
std::size_t feature_subset_size(FeatureSubset subset, std::size_t total);

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int prediction = -1;
    std::vector<double> class_counts;  // populated at leaves
};

class DecisionTreeModel final : public Model {
public:
    DecisionTreeModel(std::vector<TreeNode> nodes, int class_count,
                      std::size_t feature_count, TreeParams params);

    ModelKind kind() const override { return ModelKind::decision_tree; }
    int class_count() const override { return class_count_; }
    std::size_t feature_count() const override { return feature_count_; }
    Labels predict(const Matrix& X) const override;
    nlohmann::json payload() const override;

    int predict_row(std::span<const double> row) const;
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeParams& params() const { return params_; }

private:
    std::vector<TreeNode> nodes_;
    int class_count_ = 0;
    std::size_t feature_count_ = 0;
    TreeParams params_;
};

// Grows a tree over the rows listed in `sample` (duplicates allowed, e.g. a
// bootstrap draw). Splits test `value <= threshold` to go left. Candidate
// thresholds are midpoints between consecutive distinct sorted values; the
// first strictly better gain wins, so equal gains resolve to the lowest
// feature index and then the lowest threshold. The seed only matters when
// the splitter is random or a feature subset is in play.
std::vector<TreeNode> build_tree(const Matrix& X, const Labels& y,
                                 const std::vector<std::size_t>& sample,
                                 int class_count, const TreeParams& params,
                                 std::uint64_t seed);

std::shared_ptr<DecisionTreeModel> fit_decision_tree(const Matrix& X,
                                                     const Labels& y,
                                                     int class_count,
                                                     const TreeParams& params,
                                                     std::uint64_t seed);

// Walks a flattened node array from the root; `nodes` must be non-empty.
int tree_predict_row(const std::vector<TreeNode>& nodes,
                     std::span<const double> row);

nlohmann::json tree_params_to_json(const TreeParams& params);
TreeParams tree_params_from_json(const nlohmann::json& j, TreeParams base);
nlohmann::json tree_nodes_to_json(const std::vector<TreeNode>& nodes);
std::vector<TreeNode> tree_nodes_from_json(const nlohmann::json& j);

}  // namespace ctg
