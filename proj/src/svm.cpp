#include "ctg/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ctg/error.hpp"
#include "ctg/parallel.hpp"
#include "ctg/rng.hpp"

namespace ctg {

const char* to_string(KernelSpec::Kind kind) {
    switch (kind) {
        case KernelSpec::Kind::linear: return "linear";
        case KernelSpec::Kind::rbf: return "rbf";
        case KernelSpec::Kind::poly: return "poly";
    }
    return "rbf";
}

KernelSpec::Kind kernel_kind_from_string(const std::string& name) {
    if (name == "linear") return KernelSpec::Kind::linear;
    if (name == "rbf") return KernelSpec::Kind::rbf;
    if (name == "poly") return KernelSpec::Kind::poly;
    throw_input("unknown kernel '" + name + "'");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> u,
                   std::span<const double> v) {
    if (u.size() != v.size()) throw_input("kernel operands differ in dimension");
    switch (spec.kind) {
        case KernelSpec::Kind::linear: {
            double dot = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
            return dot;
        }
        case KernelSpec::Kind::rbf: {
            if (!(spec.gamma > 0.0)) throw_input("rbf kernel needs gamma > 0");
            double sq = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double d = u[i] - v[i];
                sq += d * d;
            }
            return std::exp(-spec.gamma * sq);
        }
        case KernelSpec::Kind::poly: {
            if (!(spec.gamma > 0.0)) throw_input("poly kernel needs gamma > 0");
            double dot = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
            return std::pow(spec.gamma * dot + spec.coef0, spec.degree);
        }
    }
    throw_input("unknown kernel kind");
}

double gamma_scale(const Matrix& X) {
    if (X.rows() == 0 || X.cols() == 0)
        throw_input("cannot derive gamma from an empty matrix");
    const auto& v = X.values();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    const double d = static_cast<double>(X.cols());
    return var > 0.0 ? 1.0 / (d * var) : 1.0 / d;
}

void validate_svm_params(const SvmParams& params) {
    if (!(params.C > 0.0)) throw_input("C must be positive");
    if (!(params.tol > 0.0)) throw_input("tol must be positive");
    if (params.max_passes < 1) throw_input("max_passes must be at least 1");
    if (params.max_iter < 1) throw_input("max_iter must be at least 1");
    if (params.kernel.kind != KernelSpec::Kind::linear &&
        !(params.kernel.gamma > 0.0))
        throw_input("kernel gamma must be positive");
    if (params.kernel.kind == KernelSpec::Kind::poly && params.kernel.degree < 1)
        throw_input("poly kernel degree must be at least 1");
}

double BinarySvmModel::decision(std::span<const double> row) const {
    double f = -bias;
    for (std::size_t i = 0; i < coef.size(); ++i)
        f += coef[i] * kernel_eval(kernel, support.row(i), row);
    return f;
}

namespace {

constexpr double kAlphaChange = 1e-8;  // moves below this do not count
constexpr std::size_t kGramCacheLimit = 3000;
constexpr std::size_t kObjectiveTrackLimit = 256;

class SmoSolver {
public:
    SmoSolver(const Matrix& X, const Labels& y, const SvmParams& params,
              std::uint64_t seed, BinaryFitDiagnostics* diag)
        : X_(X),
          y_(y),
          params_(params),
          rng_(seed),
          diag_(diag),
          n_(X.rows()),
          alpha_(X.rows(), 0.0),
          u_(X.rows(), 0.0) {
        if (n_ <= kGramCacheLimit) {
            gram_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i) {
                gram_[i * n_ + i] = kernel_eval(params_.kernel, X_.row(i), X_.row(i));
                for (std::size_t j = i + 1; j < n_; ++j) {
                    const double k =
                        kernel_eval(params_.kernel, X_.row(i), X_.row(j));
                    gram_[i * n_ + j] = k;
                    gram_[j * n_ + i] = k;
                }
            }
        }
        track_objective_ = diag_ != nullptr && n_ <= kObjectiveTrackLimit;
    }

    BinarySvmModel solve() {
        int quiet = 0;
        int sweep = 0;
        bool converged = false;
        while (sweep < params_.max_iter) {
            sweep_changed_ = false;
            for (std::size_t i = 0; i < n_; ++i) examine(i);
            ++sweep;
            if (sweep_changed_) {
                quiet = 0;
                continue;
            }
            if (++quiet < params_.max_passes) continue;
            // Settle on the reported bias convention (margin-SV average);
            // the shift can uncover residual violations, in which case the
            // sweeps resume with the new bias.
            shift_bias(finalized_bias());
            if (kkt_clean()) {
                converged = true;
                break;
            }
            quiet = 0;
        }
        if (!converged)
            throw_runtime(fmt::format(
                "SMO did not converge within {} sweeps (n={}, C={})",
                params_.max_iter, n_, params_.C));

        if (diag_) {
            diag_->alpha = alpha_;
            diag_->sweeps = sweep;
            if (track_objective_) diag_->objective = std::move(objective_);
        }
        return extract_model();
    }

private:
    double kval(std::size_t i, std::size_t j) const {
        if (!gram_.empty()) return gram_[i * n_ + j];
        return kernel_eval(params_.kernel, X_.row(i), X_.row(j));
    }

    bool at_bound(std::size_t i) const {
        return alpha_[i] <= 0.0 || alpha_[i] >= params_.C;
    }

    void examine(std::size_t i2) {
        const double y2 = y_[i2];
        const double e2 = u_[i2] - y2;
        const double r2 = e2 * y2;
        const bool violates = (r2 < -params_.tol && alpha_[i2] < params_.C) ||
                              (r2 > params_.tol && alpha_[i2] > 0.0);
        if (!violates) return;

        // second-choice heuristic over non-bound rows
        std::size_t best = n_;
        double best_gap = -1.0;
        for (std::size_t j = 0; j < n_; ++j) {
            if (j == i2 || at_bound(j)) continue;
            const double gap = std::abs((u_[j] - y_[j]) - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = j;
            }
        }
        if (best < n_ && take_step(best, i2)) return;

        std::size_t start = rng_.next_below(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t j = (start + k) % n_;
            if (j == i2 || at_bound(j)) continue;
            if (take_step(j, i2)) return;
        }
        start = rng_.next_below(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t j = (start + k) % n_;
            if (j == i2) continue;
            if (take_step(j, i2)) return;
        }
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double a1 = alpha_[i1], a2 = alpha_[i2];
        const double y1 = y_[i1], y2 = y_[i2];
        const double e1 = u_[i1] - y1, e2 = u_[i2] - y2;
        const double s = y1 * y2;
        const double C = params_.C;

        double L, H;
        if (y1 != y2) {
            L = std::max(0.0, a2 - a1);
            H = std::min(C, C + a2 - a1);
        } else {
            L = std::max(0.0, a1 + a2 - C);
            H = std::min(C, a1 + a2);
        }
        if (L >= H) return false;

        const double k11 = kval(i1, i1), k12 = kval(i1, i2), k22 = kval(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;
        double a2new;
        if (eta > 0.0) {
            a2new = a2 + y2 * (e1 - e2) / eta;
            a2new = std::clamp(a2new, L, H);
        } else {
            // flat or concave direction: evaluate the objective at both ends
            const double f1 = y1 * (u_[i1] - y1 + bias_) - a1 * k11 - s * a2 * k12;
            const double f2 = y2 * (u_[i2] - y2 + bias_) - s * a1 * k12 - a2 * k22;
            const double l1 = a1 + s * (a2 - L);
            const double h1 = a1 + s * (a2 - H);
            const double lobj = l1 * f1 + L * f2 + 0.5 * l1 * l1 * k11 +
                                0.5 * L * L * k22 + s * L * l1 * k12;
            const double hobj = h1 * f1 + H * f2 + 0.5 * h1 * h1 * k11 +
                                0.5 * H * H * k22 + s * H * h1 * k12;
            if (lobj < hobj - 1e-12)
                a2new = L;
            else if (lobj > hobj + 1e-12)
                a2new = H;
            else
                return false;
        }
        if (a2new < kAlphaChange) a2new = 0.0;
        if (a2new > C - kAlphaChange) a2new = C;
        if (std::abs(a2new - a2) <= kAlphaChange) return false;

        double a1new = a1 + s * (a2 - a2new);
        if (a1new < kAlphaChange) a1new = 0.0;
        if (a1new > C - kAlphaChange) a1new = C;

        const double d1 = y1 * (a1new - a1), d2 = y2 * (a2new - a2);
        const double b1 = e1 + d1 * k11 + d2 * k12 + bias_;
        const double b2 = e2 + d1 * k12 + d2 * k22 + bias_;
        double bnew;
        if (a1new > 0.0 && a1new < C)
            bnew = b1;
        else if (a2new > 0.0 && a2new < C)
            bnew = b2;
        else
            bnew = 0.5 * (b1 + b2);
        const double db = bnew - bias_;

        for (std::size_t i = 0; i < n_; ++i)
            u_[i] += d1 * kval(i1, i) + d2 * kval(i2, i) - db;
        alpha_[i1] = a1new;
        alpha_[i2] = a2new;
        bias_ = bnew;
        sweep_changed_ = true;
        if (track_objective_) objective_.push_back(dual_objective());
        return true;
    }

    double dual_objective() const {
        double w = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (alpha_[i] == 0.0) continue;
            w += alpha_[i];
            for (std::size_t j = 0; j < n_; ++j) {
                if (alpha_[j] == 0.0) continue;
                w -= 0.5 * alpha_[i] * alpha_[j] * y_[i] * y_[j] * kval(i, j);
            }
        }
        return w;
    }

    double finalized_bias() const {
        // g_i is the decision value without the bias term
        double margin_sum = 0.0;
        std::size_t margin_count = 0;
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n_; ++i) {
            const double g = u_[i] + bias_;
            const double target = g - y_[i];
            if (alpha_[i] > 0.0 && alpha_[i] < params_.C) {
                margin_sum += target;
                ++margin_count;
            } else if ((y_[i] < 0 && alpha_[i] == 0.0) ||
                       (y_[i] > 0 && alpha_[i] == params_.C)) {
                lo = std::max(lo, target);
            } else {
                hi = std::min(hi, target);
            }
        }
        if (margin_count > 0)
            return margin_sum / static_cast<double>(margin_count);
        if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
        if (std::isfinite(lo)) return lo;
        if (std::isfinite(hi)) return hi;
        return bias_;
    }

    void shift_bias(double bias) {
        const double delta = bias_ - bias;
        if (delta == 0.0) return;
        for (double& u : u_) u += delta;
        bias_ = bias;
    }

    bool kkt_clean() const {
        for (std::size_t i = 0; i < n_; ++i) {
            const double r = u_[i] * y_[i] - 1.0;
            if (r < -params_.tol && alpha_[i] < params_.C) return false;
            if (r > params_.tol && alpha_[i] > 0.0) return false;
        }
        return true;
    }

    BinarySvmModel extract_model() const {
        BinarySvmModel model;
        model.kernel = params_.kernel;
        model.bias = bias_;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n_; ++i)
            if (alpha_[i] > 0.0) ++count;
        model.support = Matrix(count, X_.cols());
        model.coef.reserve(count);
        std::size_t at = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (alpha_[i] <= 0.0) continue;
            const auto src = X_.row(i);
            std::copy(src.begin(), src.end(), model.support.row(at).begin());
            model.coef.push_back(alpha_[i] * y_[i]);
            ++at;
        }
        return model;
    }

    const Matrix& X_;
    const Labels& y_;
    SvmParams params_;
    Rng rng_;
    BinaryFitDiagnostics* diag_;
    std::size_t n_;
    std::vector<double> alpha_;
    std::vector<double> u_;  // decision values including the current bias
    std::vector<double> gram_;
    std::vector<double> objective_;
    double bias_ = 0.0;
    bool sweep_changed_ = false;
    bool track_objective_ = false;
};

}  // namespace

BinarySvmModel fit_binary_smo(const Matrix& X, const Labels& y,
                              const SvmParams& params, std::uint64_t seed,
                              BinaryFitDiagnostics* diag) {
    validate_svm_params(params);
    if (X.rows() != y.size()) throw_input("feature/label row count mismatch");
    if (X.rows() < 2) throw_input("need at least 2 rows to fit an SVM");
    bool has_pos = false, has_neg = false;
    for (int label : y) {
        if (label == 1)
            has_pos = true;
        else if (label == -1)
            has_neg = true;
        else
            throw_input("binary SVM labels must be -1 or +1");
    }
    if (!has_pos || !has_neg)
        throw_input("binary SVM needs both classes present");
    SmoSolver solver(X, y, params, seed, diag);
    return solver.solve();
}

SvmModel::SvmModel(std::vector<SvmPair> pairs, int class_count,
                   std::size_t feature_count, SvmParams params)
    : pairs_(std::move(pairs)),
      class_count_(class_count),
      feature_count_(feature_count),
      params_(params) {
    const std::size_t expected =
        static_cast<std::size_t>(class_count_) *
        static_cast<std::size_t>(class_count_ - 1) / 2;
    if (class_count_ < 2 || pairs_.size() != expected)
        throw_input("one-vs-one SVM needs K(K-1)/2 pair models");
}

Labels SvmModel::predict(const Matrix& X) const {
    if (X.cols() != feature_count_)
        throw_input("svm expects " + std::to_string(feature_count_) +
                    " features, got " + std::to_string(X.cols()));
    Labels out(X.rows());
    std::vector<double> votes(static_cast<std::size_t>(class_count_));
    std::vector<double> margins(static_cast<std::size_t>(class_count_));
    for (std::size_t r = 0; r < X.rows(); ++r) {
        std::fill(votes.begin(), votes.end(), 0.0);
        std::fill(margins.begin(), margins.end(), 0.0);
        for (const SvmPair& pair : pairs_) {
            const double f = pair.model.decision(X.row(r));
            const int winner = f > 0.0 ? pair.b : pair.a;
            votes[static_cast<std::size_t>(winner)] += 1.0;
            margins[static_cast<std::size_t>(winner)] += std::abs(f);
        }
        int best = 0;
        for (int c = 1; c < class_count_; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            const auto bi = static_cast<std::size_t>(best);
            if (votes[ci] > votes[bi] ||
                (votes[ci] == votes[bi] && margins[ci] > margins[bi]))
                best = c;
        }
        out[r] = best;
    }
    return out;
}

nlohmann::json SvmModel::payload() const {
    nlohmann::json pairs = nlohmann::json::array();
    for (const SvmPair& pair : pairs_) {
        nlohmann::json support = nlohmann::json::array();
        for (std::size_t r = 0; r < pair.model.support.rows(); ++r) {
            const auto row = pair.model.support.row(r);
            support.push_back(std::vector<double>(row.begin(), row.end()));
        }
        pairs.push_back({{"a", pair.a},
                         {"b", pair.b},
                         {"bias", pair.model.bias},
                         {"coef", pair.model.coef},
                         {"support", std::move(support)}});
    }
    return {{"class_count", class_count_},
            {"feature_count", feature_count_},
            {"params", svm_params_to_json(params_)},
            {"pairs", std::move(pairs)}};
}

std::shared_ptr<SvmModel> fit_svm_ovo(const Matrix& X, const Labels& y,
                                      int class_count, const SvmParams& params,
                                      std::uint64_t seed) {
    validate_svm_params(params);
    if (class_count < 2) throw_input("one-vs-one SVM needs at least 2 classes");
    if (X.rows() != y.size()) throw_input("feature/label row count mismatch");
    class_histogram(y, class_count);

    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < class_count; ++a)
        for (int b = a + 1; b < class_count; ++b) pairs.emplace_back(a, b);

    const std::uint64_t base = derive_seed(seed, seed_tag("svm.pair"));
    std::vector<SvmPair> fitted(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t p) {
        const auto [a, b] = pairs[p];
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < X.rows(); ++r)
            if (y[r] == a || y[r] == b) rows.push_back(r);

        Matrix sub(rows.size(), X.cols());
        Labels sub_y(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto src = X.row(rows[i]);
            std::copy(src.begin(), src.end(), sub.row(i).begin());
            sub_y[i] = y[rows[i]] == a ? -1 : 1;
        }
        fitted[p].a = a;
        fitted[p].b = b;
        fitted[p].model = fit_binary_smo(sub, sub_y, params, derive_seed(base, p));
    });

    return std::make_shared<SvmModel>(std::move(fitted), class_count, X.cols(),
                                      params);
}

nlohmann::json kernel_spec_to_json(const KernelSpec& spec) {
    return {{"kind", to_string(spec.kind)},
            {"gamma", spec.gamma},
            {"degree", spec.degree},
            {"coef0", spec.coef0}};
}

KernelSpec kernel_spec_from_json(const nlohmann::json& j, KernelSpec base) {
    for (const auto& [key, value] : j.items()) {
        if (key == "kind")
            base.kind = kernel_kind_from_string(value.get<std::string>());
        else if (key == "gamma")
            base.gamma = value.get<double>();
        else if (key == "degree")
            base.degree = value.get<int>();
        else if (key == "coef0")
            base.coef0 = value.get<double>();
        else
            throw_input("unknown kernel parameter '" + key + "'");
    }
    return base;
}

nlohmann::json svm_params_to_json(const SvmParams& params) {
    return {{"C", params.C},
            {"kernel", kernel_spec_to_json(params.kernel)},
            {"tol", params.tol},
            {"max_passes", params.max_passes},
            {"max_iter", params.max_iter}};
}

}  // namespace ctg
