#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ctg/matrix.hpp"

namespace ctg {

struct FeatureDescriptor {
    std::string name;         // canonical short name
    std::string description;
    double lo = 0.0;          // descriptive range, used for warnings only
    double hi = 0.0;
    std::vector<std::string> aliases;  // normalized alternates seen in the wild
};

// Column schema for the cardiotocography table: 21 predictors plus the
// three-level target. Header matching is case-insensitive and ignores
// punctuation/whitespace, so "fetal_health" and "NSP" both name the target.
class FeatureSchema {
public:
    static const FeatureSchema& ctg();

    const std::vector<FeatureDescriptor>& features() const { return features_; }
    std::size_t feature_count() const { return features_.size(); }

    // Index of the feature a (raw) header names, -1 if none.
    int match_feature(const std::string& header) const;
    bool is_target(const std::string& header) const;
    bool is_dropped(const std::string& header) const;

    const std::string& target_name() const { return target_name_; }

private:
    std::vector<FeatureDescriptor> features_;
    std::string target_name_;
    std::vector<std::string> target_aliases_;
    std::vector<std::string> drop_aliases_;  // alternate labelings, never predictors
};

// Lowercase, alphanumeric-only view of a header cell.
std::string normalize_header(const std::string& header);

// Loads a CSV file against the schema. Columns may appear in any order and
// unknown columns are ignored; the result is always in schema order. Target
// values {1,2,3} are remapped to {0,1,2}. Blank cells become NaN missing
// markers for the preprocessing stage to fill.
Dataset load_csv(const std::string& path, const FeatureSchema& schema);
Dataset parse_csv(std::istream& in, const FeatureSchema& schema,
                  const std::string& source_name);

// Serializes in schema order with the target back in 1..3 coding; load_csv of
// the output reproduces the dataset exactly.
void write_csv(const Dataset& ds, const FeatureSchema& schema,
               const std::string& path);

// Counts per class id, zero-filled for absent classes.
std::map<int, std::size_t> class_distribution(const Dataset& ds);

struct RangeWarning {
    std::size_t row = 0;  // zero-based data row
    std::string feature;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// One warning per (row, feature) outside the schema's descriptive range.
// Never mutates or rejects data; outlier handling is a pipeline concern.
std::vector<RangeWarning> validate_ranges(const Dataset& ds,
                                          const FeatureSchema& schema);

}  // namespace ctg
