#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctg/matrix.hpp"

namespace ctg {

// Row = true class, column = predicted class.
struct ConfusionMatrix {
    int class_count = 0;
    std::vector<std::size_t> counts;  // K*K, row-major

    std::size_t at(int t, int p) const {
        return counts[static_cast<std::size_t>(t) *
                          static_cast<std::size_t>(class_count) +
                      static_cast<std::size_t>(p)];
    }
    std::size_t& at(int t, int p) {
        return counts[static_cast<std::size_t>(t) *
                          static_cast<std::size_t>(class_count) +
                      static_cast<std::size_t>(p)];
    }
    std::size_t total() const;
    std::size_t trace() const;
    std::size_t row_sum(int t) const;
    std::size_t col_sum(int p) const;

    bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_matrix(const Labels& y_true, const Labels& y_pred,
                                 int class_count);

// 100 * trace / total.
double accuracy(const ConfusionMatrix& cm);

// All metric values are percentages. 0/0 cells define to 0 and set the flag.
struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    bool zero_division = false;
};

struct AverageMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm);
AverageMetrics macro_avg(const std::vector<ClassMetrics>& per_class);
AverageMetrics weighted_avg(const std::vector<ClassMetrics>& per_class);

struct MetricsReport {
    ConfusionMatrix cm;
    std::vector<ClassMetrics> per_class;
    AverageMetrics macro;
    AverageMetrics weighted;
    double accuracy = 0.0;
    bool zero_division = false;  // any 0/0 cell anywhere
};

MetricsReport evaluate_predictions(const Labels& y_true, const Labels& y_pred,
                                   int class_count);

nlohmann::json metrics_to_json(const MetricsReport& report);

}  // namespace ctg
