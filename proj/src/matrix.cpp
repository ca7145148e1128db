#include "ctg/matrix.hpp"

#include <cmath>

#include "ctg/error.hpp"

namespace ctg {

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::vector<std::size_t> class_histogram(const Labels& y, int class_count) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);
    for (int label : y) {
        if (label < 0 || label >= class_count)
            throw_input("label " + std::to_string(label) + " outside [0, " +
                        std::to_string(class_count) + ")");
        ++counts[static_cast<std::size_t>(label)];
    }
    return counts;
}

Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.class_count = ds.class_count;
    out.feature_names = ds.feature_names;
    out.source = ds.source;
    out.X = Matrix(0, ds.X.cols());
    out.y.reserve(idx.size());
    for (std::size_t r : idx) {
        out.X.append_row(ds.X.row(r));
        out.y.push_back(ds.y[r]);
    }
    return out;
}

}  // namespace ctg
