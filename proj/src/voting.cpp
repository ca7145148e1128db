#include "ctg/voting.hpp"

#include "ctg/error.hpp"

namespace ctg {

Labels hard_vote(const std::vector<Labels>& member_predictions,
                 int class_count) {
    if (member_predictions.size() < 2)
        throw_input("hard voting needs at least 2 members");
    const std::size_t n = member_predictions.front().size();
    for (const Labels& p : member_predictions)
        if (p.size() != n) throw_input("member prediction lengths differ");

    Labels out(n);
    std::vector<double> votes(static_cast<std::size_t>(class_count));
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(votes.begin(), votes.end(), 0.0);
        for (const Labels& p : member_predictions) {
            if (p[i] < 0 || p[i] >= class_count)
                throw_input("vote label out of range");
            votes[static_cast<std::size_t>(p[i])] += 1.0;
        }
        out[i] = static_cast<int>(argmax_tiebreak_lowest(votes));
    }
    return out;
}

VotingModel::VotingModel(std::vector<ModelPtr> members)
    : members_(std::move(members)) {
    if (members_.size() < 2)
        throw_input("voting model needs at least 2 members");
    for (const ModelPtr& m : members_) {
        if (!m) throw_input("voting member is null");
        if (m->class_count() != members_.front()->class_count() ||
            m->feature_count() != members_.front()->feature_count())
            throw_input("voting members disagree on feature space or classes");
    }
}

Labels VotingModel::predict(const Matrix& X) const {
    std::vector<Labels> predictions;
    predictions.reserve(members_.size());
    for (const ModelPtr& m : members_) predictions.push_back(m->predict(X));
    return hard_vote(predictions, class_count());
}

nlohmann::json VotingModel::payload() const {
    nlohmann::json members = nlohmann::json::array();
    for (const ModelPtr& m : members_)
        members.push_back(
            {{"kind", to_string(m->kind())}, {"payload", m->payload()}});
    return {{"class_count", class_count()},
            {"feature_count", feature_count()},
            {"members", std::move(members)}};
}

std::shared_ptr<VotingModel> fit_voting(std::vector<ModelPtr> members) {
    return std::make_shared<VotingModel>(std::move(members));
}

}  // namespace ctg
