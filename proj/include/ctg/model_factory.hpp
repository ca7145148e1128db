#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

#include "ctg/matrix.hpp"
#include "ctg/model.hpp"

namespace ctg {

// Fits one model of the given kind. `params` overrides the kind's defaults;
// unknown keys are input errors. SVM accepts gamma as a number or the string
// "scale" (resolved against the training matrix).
ModelPtr fit_model(ModelKind kind, const nlohmann::json& params,
                   const Matrix& X, const Labels& y, int class_count,
                   std::uint64_t seed);

// Rebuilds a fitted model from its payload (the inverse of Model::payload()).
ModelPtr model_from_payload(ModelKind kind, const nlohmann::json& payload);

}  // namespace ctg
