#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ctg {

// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) {
        return {data_.data() + r * cols_, cols_};
    }

    const std::vector<double>& values() const { return data_; }
    std::vector<double>& values() { return data_; }

    void append_row(std::span<const double> v) {
        data_.insert(data_.end(), v.begin(), v.end());
        ++rows_;
    }

    bool all_finite() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Class labels, zero-based.
using Labels = std::vector<int>;

struct Dataset {
    Matrix X;
    Labels y;
    int class_count = 0;
    std::vector<std::string> feature_names;
    std::string source;  // provenance: file path or generator note

    std::size_t rows() const { return X.rows(); }

    bool operator==(const Dataset&) const = default;
};

// Per-class label counts; every label must be < class_count.
std::vector<std::size_t> class_histogram(const Labels& y, int class_count);

// New dataset holding the given rows, in the given order.
Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& idx);

}  // namespace ctg
