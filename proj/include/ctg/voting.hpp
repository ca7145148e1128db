#pragma once

#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctg/matrix.hpp"
#include "ctg/model.hpp"

namespace ctg {

// Majority vote across member predictions; ties go to the lowest class id.
Labels hard_vote(const std::vector<Labels>& member_predictions,
                 int class_count);

class VotingModel final : public Model {
public:
    explicit VotingModel(std::vector<ModelPtr> members);

    ModelKind kind() const override { return ModelKind::voting; }
    int class_count() const override { return members_.front()->class_count(); }
    std::size_t feature_count() const override {
        return members_.front()->feature_count();
    }
    Labels predict(const Matrix& X) const override;
    nlohmann::json payload() const override;

    const std::vector<ModelPtr>& members() const { return members_; }

private:
    std::vector<ModelPtr> members_;
};

// Wraps already-fitted members (at least two, same feature space and classes).
std::shared_ptr<VotingModel> fit_voting(std::vector<ModelPtr> members);

}  // namespace ctg
