#include "ctg/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "ctg/error.hpp"

namespace ctg {

void validate_gbt_params(GbtVariant variant, const GbtParams& params) {
    if (params.n_rounds < 1) throw_input("n_rounds must be at least 1");
    if (!(params.learning_rate > 0.0))
        throw_input("learning_rate must be positive");
    if (params.reg_lambda < 0.0) throw_input("lambda must be non-negative");
    if (params.min_child_weight < 0.0)
        throw_input("min_child_weight must be non-negative");
    if (params.min_split_gain < 0.0)
        throw_input("min_split_gain must be non-negative");
    if (variant == GbtVariant::exact && params.max_depth < 1)
        throw_input("max_depth must be at least 1");
    if (variant == GbtVariant::hist) {
        if (params.max_leaves < 2) throw_input("max_leaves must be at least 2");
        if (params.max_bins < 2 || params.max_bins > 255)
            throw_input("max_bins must be in [2, 255]");
    }
}

double split_gain(double gl, double hl, double gr, double hr, double lambda) {
    const double parent = gl + gr;
    const double hp = hl + hr;
    return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                  parent * parent / (hp + lambda));
}

double leaf_weight(double g, double h, double lambda) {
    return -g / (h + lambda);
}

std::vector<double> equal_frequency_edges(std::vector<double> values,
                                          int max_bins) {
    if (values.empty()) throw_input("cannot bin an empty column");
    if (max_bins < 2) throw_input("max_bins must be at least 2");
    std::sort(values.begin(), values.end());

    std::vector<double> uniq = values;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

    auto midpoint = [](double lo, double hi) {
        double t = 0.5 * (lo + hi);
        if (t == hi) t = lo;  // adjacent doubles: keep hi strictly above the edge
        return t;
    };

    std::vector<double> edges;
    if (uniq.size() <= static_cast<std::size_t>(max_bins)) {
        for (std::size_t i = 0; i + 1 < uniq.size(); ++i)
            edges.push_back(midpoint(uniq[i], uniq[i + 1]));
        return edges;
    }

    const std::size_t n = values.size();
    const std::size_t bins = static_cast<std::size_t>(max_bins);
    for (std::size_t k = 1; k < bins; ++k) {
        const double v = values[k * n / bins];
        const auto it = std::lower_bound(uniq.begin(), uniq.end(), v);
        if (it == uniq.begin()) continue;  // nothing strictly below the cut
        const double edge = midpoint(*(it - 1), v);
        if (edges.empty() || edge > edges.back()) edges.push_back(edge);
    }
    return edges;
}

namespace {

constexpr double kProbFloor = 1e-15;

double predict_into(const std::vector<GbtNode>& nodes,
                    std::span<const double> row) {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const GbtNode& nd = nodes[static_cast<std::size_t>(node)];
        node = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold
                   ? nd.left
                   : nd.right;
    }
    return nodes[static_cast<std::size_t>(node)].value;
}

// ---------------------------------------------------------------- exact ----

struct ExactContext {
    const Matrix* X = nullptr;
    // rows sorted by each feature value, equal values by row index
    std::vector<std::vector<std::size_t>> sorted;
};

ExactContext make_exact_context(const Matrix& X) {
    ExactContext ctx{&X, {}};
    ctx.sorted.resize(X.cols());
    for (std::size_t f = 0; f < X.cols(); ++f) {
        auto& order = ctx.sorted[f];
        order.resize(X.rows());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return X.at(a, f) < X.at(b, f);
                         });
    }
    return ctx;
}

struct NodeStat {
    double g = 0.0;
    double h = 0.0;
};

std::vector<GbtNode> build_exact_tree(const ExactContext& ctx,
                                      const std::vector<double>& g,
                                      const std::vector<double>& h,
                                      const GbtParams& params) {
    const Matrix& X = *ctx.X;
    const std::size_t n = g.size();
    const std::size_t d = X.cols();

    std::vector<GbtNode> nodes(1);
    std::vector<NodeStat> stats(1);
    for (std::size_t i = 0; i < n; ++i) {
        stats[0].g += g[i];
        stats[0].h += h[i];
    }
    std::vector<int> row_node(n, 0);
    std::vector<int> active{0};

    struct Best {
        int feature = -1;
        double threshold = 0.0;
        double gain = 0.0;
    };
    struct Acc {
        double gl = 0.0;
        double hl = 0.0;
        std::size_t count = 0;
        double last = 0.0;
    };

    for (int depth = 0; depth < params.max_depth && !active.empty(); ++depth) {
        std::vector<char> is_active(nodes.size(), 0);
        for (int nd : active) is_active[static_cast<std::size_t>(nd)] = 1;

        std::vector<Best> best(nodes.size());
        for (int nd : active)
            best[static_cast<std::size_t>(nd)].gain = params.min_split_gain;

        std::vector<Acc> acc(nodes.size());
        for (std::size_t f = 0; f < d; ++f) {
            for (int nd : active) acc[static_cast<std::size_t>(nd)] = Acc{};
            for (std::size_t r : ctx.sorted[f]) {
                const int nd = row_node[r];
                if (!is_active[static_cast<std::size_t>(nd)]) continue;
                Acc& a = acc[static_cast<std::size_t>(nd)];
                const double v = X.at(r, f);
                if (a.count > 0 && v > a.last) {
                    const NodeStat& s = stats[static_cast<std::size_t>(nd)];
                    const double gr = s.g - a.gl;
                    const double hr = s.h - a.hl;
                    if (a.hl >= params.min_child_weight &&
                        hr >= params.min_child_weight) {
                        const double gain =
                            split_gain(a.gl, a.hl, gr, hr, params.reg_lambda);
                        Best& b = best[static_cast<std::size_t>(nd)];
                        if (gain > b.gain) {
                            double t = 0.5 * (a.last + v);
                            if (t == v) t = a.last;
                            b.feature = static_cast<int>(f);
                            b.threshold = t;
                            b.gain = gain;
                        }
                    }
                }
                a.gl += g[r];
                a.hl += h[r];
                ++a.count;
                a.last = v;
            }
        }

        std::vector<int> next_active;
        std::vector<char> was_split(nodes.size(), 0);
        for (int nd : active) {
            const Best& b = best[static_cast<std::size_t>(nd)];
            if (b.feature < 0) continue;
            const int left = static_cast<int>(nodes.size());
            nodes.emplace_back();
            nodes.emplace_back();
            stats.emplace_back();
            stats.emplace_back();
            nodes[static_cast<std::size_t>(nd)].feature = b.feature;
            nodes[static_cast<std::size_t>(nd)].threshold = b.threshold;
            nodes[static_cast<std::size_t>(nd)].left = left;
            nodes[static_cast<std::size_t>(nd)].right = left + 1;
            was_split[static_cast<std::size_t>(nd)] = 1;
            next_active.push_back(left);
            next_active.push_back(left + 1);
        }
        for (std::size_t r = 0; r < n; ++r) {
            const int nd = row_node[r];
            if (static_cast<std::size_t>(nd) >= was_split.size() ||
                !was_split[static_cast<std::size_t>(nd)])
                continue;
            const GbtNode& split = nodes[static_cast<std::size_t>(nd)];
            const int child =
                X.at(r, static_cast<std::size_t>(split.feature)) <=
                        split.threshold
                    ? split.left
                    : split.right;
            row_node[r] = child;
            stats[static_cast<std::size_t>(child)].g += g[r];
            stats[static_cast<std::size_t>(child)].h += h[r];
        }
        active = std::move(next_active);
    }

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].feature < 0)
            nodes[i].value = params.learning_rate *
                             leaf_weight(stats[i].g, stats[i].h, params.reg_lambda);
    }
    return nodes;
}

// ----------------------------------------------------------------- hist ----

struct HistContext {
    std::vector<std::vector<double>> edges;        // per feature
    std::vector<std::vector<std::uint8_t>> bins;   // per feature, per row
    std::size_t bin_count(std::size_t f) const { return edges[f].size() + 1; }
};

HistContext make_hist_context(const Matrix& X, int max_bins) {
    HistContext ctx;
    ctx.edges.resize(X.cols());
    ctx.bins.resize(X.cols());
    std::vector<double> column(X.rows());
    for (std::size_t f = 0; f < X.cols(); ++f) {
        for (std::size_t r = 0; r < X.rows(); ++r) column[r] = X.at(r, f);
        ctx.edges[f] = equal_frequency_edges(column, max_bins);
        const auto& edges = ctx.edges[f];
        auto& bins = ctx.bins[f];
        bins.resize(X.rows());
        for (std::size_t r = 0; r < X.rows(); ++r) {
            bins[r] = static_cast<std::uint8_t>(
                std::lower_bound(edges.begin(), edges.end(), X.at(r, f)) -
                edges.begin());
        }
    }
    return ctx;
}

std::vector<GbtNode> build_hist_tree(const HistContext& ctx,
                                     const std::vector<double>& g,
                                     const std::vector<double>& h,
                                     const GbtParams& params) {
    const std::size_t n = g.size();
    const std::size_t d = ctx.edges.size();

    std::vector<GbtNode> nodes(1);
    std::vector<NodeStat> stats(1);
    std::vector<std::vector<std::size_t>> rows(1);
    rows[0].resize(n);
    std::iota(rows[0].begin(), rows[0].end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        stats[0].g += g[i];
        stats[0].h += h[i];
    }

    struct Cand {
        double gain = 0.0;
        int node = -1;
        int feature = -1;
        int bin = -1;
        double threshold = 0.0;
    };
    // Highest gain first; equal gains fall back to node creation order so the
    // growth sequence is fully determined.
    auto worse = [](const Cand& a, const Cand& b) {
        if (a.gain != b.gain) return a.gain < b.gain;
        return a.node > b.node;
    };
    std::priority_queue<Cand, std::vector<Cand>, decltype(worse)> queue(worse);

    std::vector<double> hist_g, hist_h;
    std::vector<std::size_t> hist_n;
    auto evaluate = [&](int node) {
        const auto& members = rows[static_cast<std::size_t>(node)];
        if (members.size() < 2) return;
        const NodeStat& s = stats[static_cast<std::size_t>(node)];
        Cand best;
        best.gain = params.min_split_gain;
        for (std::size_t f = 0; f < d; ++f) {
            const std::size_t bins = ctx.bin_count(f);
            if (bins < 2) continue;
            hist_g.assign(bins, 0.0);
            hist_h.assign(bins, 0.0);
            hist_n.assign(bins, 0);
            const auto& row_bins = ctx.bins[f];
            for (std::size_t r : members) {
                const std::size_t b = row_bins[r];
                hist_g[b] += g[r];
                hist_h[b] += h[r];
                ++hist_n[b];
            }
            double gl = 0.0, hl = 0.0;
            std::size_t nl = 0;
            for (std::size_t b = 0; b + 1 < bins; ++b) {
                gl += hist_g[b];
                hl += hist_h[b];
                nl += hist_n[b];
                if (nl == 0) continue;
                if (nl == members.size()) break;
                const double gr = s.g - gl;
                const double hr = s.h - hl;
                if (hl < params.min_child_weight ||
                    hr < params.min_child_weight)
                    continue;
                const double gain =
                    split_gain(gl, hl, gr, hr, params.reg_lambda);
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = static_cast<int>(f);
                    best.bin = static_cast<int>(b);
                    best.threshold = ctx.edges[f][b];
                }
            }
        }
        if (best.feature >= 0) {
            best.node = node;
            queue.push(best);
        }
    };

    evaluate(0);
    int leaves = 1;
    while (leaves < params.max_leaves && !queue.empty()) {
        const Cand c = queue.top();
        queue.pop();
        const auto node = static_cast<std::size_t>(c.node);
        const int left = static_cast<int>(nodes.size());

        std::vector<std::size_t> left_rows, right_rows;
        NodeStat ls, rs;
        const auto& row_bins = ctx.bins[static_cast<std::size_t>(c.feature)];
        for (std::size_t r : rows[node]) {
            if (static_cast<int>(row_bins[r]) <= c.bin) {
                left_rows.push_back(r);
                ls.g += g[r];
                ls.h += h[r];
            } else {
                right_rows.push_back(r);
                rs.g += g[r];
                rs.h += h[r];
            }
        }

        nodes[node].feature = c.feature;
        nodes[node].threshold = c.threshold;
        nodes[node].left = left;
        nodes[node].right = left + 1;
        nodes.emplace_back();
        nodes.emplace_back();
        stats.push_back(ls);
        stats.push_back(rs);
        rows[node].clear();
        rows[node].shrink_to_fit();
        rows.push_back(std::move(left_rows));
        rows.push_back(std::move(right_rows));
        ++leaves;
        evaluate(left);
        evaluate(left + 1);
    }

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].feature < 0)
            nodes[i].value = params.learning_rate *
                             leaf_weight(stats[i].g, stats[i].h, params.reg_lambda);
    }
    return nodes;
}

}  // namespace

// ------------------------------------------------------------------ fit ----

std::shared_ptr<GbtModel> fit_gbt(GbtVariant variant, const Matrix& X,
                                  const Labels& y, int class_count,
                                  const GbtParams& params,
                                  std::uint64_t /*seed*/) {
    validate_gbt_params(variant, params);
    if (X.rows() == 0) throw_input("cannot fit boosting on an empty dataset");
    if (X.rows() != y.size()) throw_input("feature/label row count mismatch");
    const auto counts = class_histogram(y, class_count);

    const std::size_t n = X.rows();
    const std::size_t K = static_cast<std::size_t>(class_count);

    std::vector<double> base(K);
    for (std::size_t c = 0; c < K; ++c) {
        const double prior =
            static_cast<double>(counts[c]) / static_cast<double>(n);
        base[c] = std::log(std::max(prior, 1e-12));
    }

    std::vector<double> F(n * K);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < K; ++c) F[i * K + c] = base[c];

    ExactContext exact;
    HistContext hist;
    if (variant == GbtVariant::exact)
        exact = make_exact_context(X);
    else
        hist = make_hist_context(X, params.max_bins);

    std::vector<std::vector<GbtNode>> trees;
    trees.reserve(static_cast<std::size_t>(params.n_rounds) * K);
    std::vector<double> losses;
    losses.reserve(static_cast<std::size_t>(params.n_rounds));

    std::vector<double> P(n * K), g(n), h(n), expo(K);
    auto softmax_rows = [&](std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            double m = F[i * K];
            for (std::size_t c = 1; c < K; ++c) m = std::max(m, F[i * K + c]);
            double sum = 0.0;
            for (std::size_t c = 0; c < K; ++c) {
                expo[c] = std::exp(F[i * K + c] - m);
                sum += expo[c];
            }
            for (std::size_t c = 0; c < K; ++c) out[i * K + c] = expo[c] / sum;
        }
    };

    for (int round = 0; round < params.n_rounds; ++round) {
        softmax_rows(P);
        for (std::size_t c = 0; c < K; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = P[i * K + c];
                g[i] = p - (static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0);
                h[i] = p * (1.0 - p);
            }
            std::vector<GbtNode> tree =
                variant == GbtVariant::exact
                    ? build_exact_tree(exact, g, h, params)
                    : build_hist_tree(hist, g, h, params);
            for (std::size_t i = 0; i < n; ++i)
                F[i * K + c] += predict_into(tree, X.row(i));
            trees.push_back(std::move(tree));
        }
        softmax_rows(P);
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = P[i * K + static_cast<std::size_t>(y[i])];
            loss -= std::log(std::max(p, kProbFloor));
        }
        losses.push_back(loss / static_cast<double>(n));
    }

    return std::make_shared<GbtModel>(
        variant == GbtVariant::exact ? ModelKind::gbt_exact : ModelKind::gbt_hist,
        std::move(base), std::move(trees), std::move(losses), X.cols(), params);
}

std::shared_ptr<GbtModel> fit_gbt_exact(const Matrix& X, const Labels& y,
                                        int class_count, const GbtParams& params,
                                        std::uint64_t seed) {
    return fit_gbt(GbtVariant::exact, X, y, class_count, params, seed);
}

std::shared_ptr<GbtModel> fit_gbt_hist(const Matrix& X, const Labels& y,
                                       int class_count, const GbtParams& params,
                                       std::uint64_t seed) {
    return fit_gbt(GbtVariant::hist, X, y, class_count, params, seed);
}

// ---------------------------------------------------------------- model ----

GbtModel::GbtModel(ModelKind kind, std::vector<double> base_scores,
                   std::vector<std::vector<GbtNode>> trees,
                   std::vector<double> training_loss, std::size_t feature_count,
                   GbtParams params)
    : kind_(kind),
      base_scores_(std::move(base_scores)),
      trees_(std::move(trees)),
      training_loss_(std::move(training_loss)),
      feature_count_(feature_count),
      params_(params) {
    if (kind_ != ModelKind::gbt_exact && kind_ != ModelKind::gbt_hist)
        throw_input("boosting model kind must be gbt_exact or gbt_hist");
    if (base_scores_.empty()) throw_input("boosting model has no classes");
    if (trees_.empty() || trees_.size() % base_scores_.size() != 0)
        throw_input("boosting model needs one tree per class per round");
}

Matrix GbtModel::decision_scores(const Matrix& X) const {
    if (X.cols() != feature_count_)
        throw_input("boosting model expects " + std::to_string(feature_count_) +
                    " features, got " + std::to_string(X.cols()));
    const std::size_t K = base_scores_.size();
    Matrix scores(X.rows(), K);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto row = X.row(r);
        for (std::size_t c = 0; c < K; ++c) {
            double s = base_scores_[c];
            for (std::size_t t = c; t < trees_.size(); t += K)
                s += predict_into(trees_[t], row);
            scores.at(r, c) = s;
        }
    }
    return scores;
}

Labels GbtModel::predict(const Matrix& X) const {
    const Matrix scores = decision_scores(X);
    Labels out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r)
        out[r] = static_cast<int>(argmax_tiebreak_lowest(scores.row(r)));
    return out;
}

nlohmann::json GbtModel::payload() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : trees_) trees.push_back(gbt_nodes_to_json(tree));
    return {{"class_count", class_count()},
            {"feature_count", feature_count_},
            {"params", gbt_params_to_json(params_)},
            {"base_scores", base_scores_},
            {"training_loss", training_loss_},
            {"trees", std::move(trees)}};
}

// ----------------------------------------------------------------- json ----

nlohmann::json gbt_params_to_json(const GbtParams& params) {
    return {{"n_rounds", params.n_rounds},
            {"learning_rate", params.learning_rate},
            {"lambda", params.reg_lambda},
            {"min_child_weight", params.min_child_weight},
            {"min_split_gain", params.min_split_gain},
            {"max_depth", params.max_depth},
            {"max_leaves", params.max_leaves},
            {"max_bins", params.max_bins}};
}

GbtParams gbt_params_from_json(const nlohmann::json& j, GbtParams base) {
    for (const auto& [key, value] : j.items()) {
        if (key == "n_rounds")
            base.n_rounds = value.get<int>();
        else if (key == "learning_rate")
            base.learning_rate = value.get<double>();
        else if (key == "lambda")
            base.reg_lambda = value.get<double>();
        else if (key == "min_child_weight")
            base.min_child_weight = value.get<double>();
        else if (key == "min_split_gain")
            base.min_split_gain = value.get<double>();
        else if (key == "max_depth")
            base.max_depth = value.get<int>();
        else if (key == "max_leaves")
            base.max_leaves = value.get<int>();
        else if (key == "max_bins")
            base.max_bins = value.get<int>();
        else
            throw_input("unknown boosting parameter '" + key + "'");
    }
    return base;
}

nlohmann::json gbt_nodes_to_json(const std::vector<GbtNode>& nodes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const GbtNode& nd : nodes) {
        arr.push_back({{"feature", nd.feature},
                       {"threshold", nd.threshold},
                       {"left", nd.left},
                       {"right", nd.right},
                       {"value", nd.value}});
    }
    return arr;
}

std::vector<GbtNode> gbt_nodes_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw_input("boosting payload has no nodes");
    std::vector<GbtNode> nodes;
    nodes.reserve(j.size());
    const int count = static_cast<int>(j.size());
    for (const auto& item : j) {
        GbtNode nd;
        nd.feature = item.at("feature").get<int>();
        nd.threshold = item.at("threshold").get<double>();
        nd.left = item.at("left").get<int>();
        nd.right = item.at("right").get<int>();
        nd.value = item.at("value").get<double>();
        if (nd.feature >= 0 &&
            (nd.left < 0 || nd.left >= count || nd.right < 0 || nd.right >= count))
            throw_input("boosting payload has a dangling child index");
        nodes.push_back(nd);
    }
    return nodes;
}

}  // namespace ctg
