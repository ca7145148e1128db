#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctg/matrix.hpp"
#include "ctg/model.hpp"

namespace ctg {

struct KernelSpec {
    enum class Kind { linear, rbf, poly };
    Kind kind = Kind::rbf;
    double gamma = 1.0;  // rbf/poly
    int degree = 3;      // poly
    double coef0 = 0.0;  // poly
};

const char* to_string(KernelSpec::Kind kind);
KernelSpec::Kind kernel_kind_from_string(const std::string& name);

double kernel_eval(const KernelSpec& spec, std::span<const double> u,
                   std::span<const double> v);

// The "scale" convention: 1 / (d * population variance of all entries),
// falling back to 1/d for constant inputs.
double gamma_scale(const Matrix& X);

struct SvmParams {
    double C = 1.0;
    KernelSpec kernel;
    double tol = 1e-3;    // KKT tolerance
    int max_passes = 10;  // consecutive quiet sweeps that count as converged
    int max_iter = 1000;  // sweep safety cap
};

void validate_svm_params(const SvmParams& params);

struct BinarySvmModel {
    Matrix support;            // support vector rows (alpha > 0 only)
    std::vector<double> coef;  // alpha_i * y_i per support vector
    double bias = 0.0;         // f(x) = sum coef_i K(sv_i, x) - bias
    KernelSpec kernel;

    double decision(std::span<const double> row) const;
};

struct BinaryFitDiagnostics {
    std::vector<double> alpha;      // full alpha in training-row order
    std::vector<double> objective;  // dual value after each accepted update
                                    // (recorded only when n <= 256)
    int sweeps = 0;
};

// Platt-style SMO with an error cache and the max |E1 - E2| second choice.
// A sweep visits every row; convergence is `max_passes` consecutive sweeps
// with no alpha moving by more than 1e-8, followed by a KKT check under the
// final bias convention (margin-SV average). Exceeding max_iter sweeps
// raises a runtime error with the sweep count in the message.
BinarySvmModel fit_binary_smo(const Matrix& X, const Labels& y,
                              const SvmParams& params, std::uint64_t seed,
                              BinaryFitDiagnostics* diag = nullptr);

struct SvmPair {
    int a = 0;  // lower class id, mapped to y = -1
    int b = 0;  // higher class id, mapped to y = +1
    BinarySvmModel model;
};

// One-vs-one multiclass: K(K-1)/2 pair models, votes first, then summed
// winning |decision value|, then lowest class id.
class SvmModel final : public Model {
public:
    SvmModel(std::vector<SvmPair> pairs, int class_count,
             std::size_t feature_count, SvmParams params);

    ModelKind kind() const override { return ModelKind::svm; }
    int class_count() const override { return class_count_; }
    std::size_t feature_count() const override { return feature_count_; }
    Labels predict(const Matrix& X) const override;
    nlohmann::json payload() const override;

    const std::vector<SvmPair>& pairs() const { return pairs_; }
    const SvmParams& params() const { return params_; }

private:
    std::vector<SvmPair> pairs_;
    int class_count_ = 0;
    std::size_t feature_count_ = 0;
    SvmParams params_;
};

std::shared_ptr<SvmModel> fit_svm_ovo(const Matrix& X, const Labels& y,
                                      int class_count, const SvmParams& params,
                                      std::uint64_t seed);

nlohmann::json kernel_spec_to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const nlohmann::json& j, KernelSpec base);
nlohmann::json svm_params_to_json(const SvmParams& params);

}  // namespace ctg
