#include "ctg/metrics.hpp"

#include <numeric>

#include "ctg/error.hpp"

namespace ctg {

std::size_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t t = 0;
    for (int c = 0; c < class_count; ++c) t += at(c, c);
    return t;
}

std::size_t ConfusionMatrix::row_sum(int t) const {
    std::size_t s = 0;
    for (int p = 0; p < class_count; ++p) s += at(t, p);
    return s;
}

std::size_t ConfusionMatrix::col_sum(int p) const {
    std::size_t s = 0;
    for (int t = 0; t < class_count; ++t) s += at(t, p);
    return s;
}

ConfusionMatrix confusion_matrix(const Labels& y_true, const Labels& y_pred,
                                 int class_count) {
    if (y_true.size() != y_pred.size())
        throw_input("true/predicted label lengths differ");
    if (class_count < 1) throw_input("class_count must be at least 1");
    ConfusionMatrix cm;
    cm.class_count = class_count;
    cm.counts.assign(static_cast<std::size_t>(class_count) *
                         static_cast<std::size_t>(class_count),
                     0);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 0 || y_true[i] >= class_count || y_pred[i] < 0 ||
            y_pred[i] >= class_count)
            throw_input("label out of range at row " + std::to_string(i));
        ++cm.at(y_true[i], y_pred[i]);
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0) throw_input("cannot compute accuracy of an empty matrix");
    return 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(total);
}

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw_input("cannot compute metrics of an empty matrix");
    std::vector<ClassMetrics> out(static_cast<std::size_t>(cm.class_count));
    for (int c = 0; c < cm.class_count; ++c) {
        ClassMetrics& m = out[static_cast<std::size_t>(c)];
        const double tp = static_cast<double>(cm.at(c, c));
        const double fp = static_cast<double>(cm.col_sum(c)) - tp;
        const double fn = static_cast<double>(cm.row_sum(c)) - tp;
        m.support = cm.row_sum(c);
        if (tp + fp > 0.0) {
            m.precision = 100.0 * tp / (tp + fp);
        } else {
            m.zero_division = true;
        }
        if (tp + fn > 0.0) {
            m.recall = 100.0 * tp / (tp + fn);
        } else {
            m.zero_division = true;
        }
        if (m.precision + m.recall > 0.0) {
            m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        } else {
            m.zero_division = true;
        }
    }
    return out;
}

AverageMetrics macro_avg(const std::vector<ClassMetrics>& per_class) {
    if (per_class.empty()) throw_input("macro average needs at least one class");
    AverageMetrics avg;
    for (const ClassMetrics& m : per_class) {
        avg.precision += m.precision;
        avg.recall += m.recall;
        avg.f1 += m.f1;
    }
    const double k = static_cast<double>(per_class.size());
    avg.precision /= k;
    avg.recall /= k;
    avg.f1 /= k;
    return avg;
}

AverageMetrics weighted_avg(const std::vector<ClassMetrics>& per_class) {
    double total = 0.0;
    for (const ClassMetrics& m : per_class)
        total += static_cast<double>(m.support);
    if (total == 0.0) throw_input("weighted average needs non-zero support");
    AverageMetrics avg;
    for (const ClassMetrics& m : per_class) {
        const double w = static_cast<double>(m.support);
        avg.precision += m.precision * w;
        avg.recall += m.recall * w;
        avg.f1 += m.f1 * w;
    }
    avg.precision /= total;
    avg.recall /= total;
    avg.f1 /= total;
    return avg;
}

MetricsReport evaluate_predictions(const Labels& y_true, const Labels& y_pred,
                                   int class_count) {
    MetricsReport report;
    report.cm = confusion_matrix(y_true, y_pred, class_count);
    report.per_class = per_class_metrics(report.cm);
    report.macro = macro_avg(report.per_class);
    report.weighted = weighted_avg(report.per_class);
    report.accuracy = accuracy(report.cm);
    for (const ClassMetrics& m : report.per_class)
        report.zero_division = report.zero_division || m.zero_division;
    return report;
}

nlohmann::json metrics_to_json(const MetricsReport& report) {
    nlohmann::json per_class = nlohmann::json::array();
    for (const ClassMetrics& m : report.per_class) {
        per_class.push_back({{"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"support", m.support},
                             {"zero_division", m.zero_division}});
    }
    nlohmann::json cm = nlohmann::json::array();
    for (int t = 0; t < report.cm.class_count; ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (int p = 0; p < report.cm.class_count; ++p)
            row.push_back(report.cm.at(t, p));
        cm.push_back(std::move(row));
    }
    return {{"accuracy", report.accuracy},
            {"per_class", std::move(per_class)},
            {"macro",
             {{"precision", report.macro.precision},
              {"recall", report.macro.recall},
              {"f1", report.macro.f1}}},
            {"weighted",
             {{"precision", report.weighted.precision},
              {"recall", report.weighted.recall},
              {"f1", report.weighted.f1}}},
            {"confusion", std::move(cm)},
            {"zero_division", report.zero_division}};
}

}  // namespace ctg
