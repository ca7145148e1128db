#include "ctg/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "ctg/error.hpp"

namespace ctg {

namespace {

FeatureDescriptor fd(std::string name, std::string description, double lo,
                     double hi, std::vector<std::string> aliases) {
    return FeatureDescriptor{std::move(name), std::move(description), lo, hi,
                             std::move(aliases)};
}

}  // namespace

const FeatureSchema& FeatureSchema::ctg() {
    static const FeatureSchema schema = [] {
        FeatureSchema s;
        s.features_ = {
            fd("LB", "baseline fetal heart rate (bpm)", 106, 160, {"baselinevalue"}),
            fd("AC", "accelerations per second", 0, 0.019, {"accelerations"}),
            fd("FM", "fetal movements per second", 0, 0.481, {"fetalmovement"}),
            fd("UC", "uterine contractions per second", 0, 0.015, {"uterinecontractions"}),
            fd("DL", "light decelerations per second", 0, 0.015, {"lightdecelerations"}),
            fd("DS", "severe decelerations per second", 0, 0.001, {"severedecelerations"}),
            fd("DP", "prolonged decelerations per second", 0, 0.005,
               {"prolongueddecelerations", "prolongeddecelerations"}),
            fd("ASTV", "percent of time with abnormal short-term variability", 12, 87,
               {"abnormalshorttermvariability"}),
            fd("MSTV", "mean short-term variability", 0.2, 7,
               {"meanvalueofshorttermvariability"}),
            fd("ALTV", "percent of time with abnormal long-term variability", 0, 91,
               {"percentageoftimewithabnormallongtermvariability"}),
            fd("MLTV", "mean long-term variability", 0, 50.7,
               {"meanvalueoflongtermvariability"}),
            fd("Width", "FHR histogram width", 3, 180, {"histogramwidth"}),
            fd("Min", "FHR histogram minimum", 50, 159, {"histogrammin"}),
            fd("Max", "FHR histogram maximum", 122, 238, {"histogrammax"}),
            fd("Nmax", "FHR histogram peak count", 0, 18, {"histogramnumberofpeaks"}),
            fd("Nzeros", "FHR histogram zero count", 0, 10,
               {"histogramnumberofzeroes", "histogramnumberofzeros"}),
            fd("Mode", "FHR histogram mode", 60, 187, {"histogrammode"}),
            fd("Mean", "FHR histogram mean", 73, 182, {"histogrammean"}),
            fd("Median", "FHR histogram median", 77, 186, {"histogrammedian"}),
            fd("Variance", "FHR histogram variance", 0, 269, {"histogramvariance"}),
            fd("Tendency", "FHR histogram tendency", -1, 1, {"histogramtendency"}),
        };
        s.target_name_ = "NSP";
        s.target_aliases_ = {"nsp", "fetalhealth"};
        // The 10-level FHR pattern code is an alternate labeling of the same
        // exams; keeping it as a predictor would leak a second ground truth.
        s.drop_aliases_ = {"class"};
        return s;
    }();
    return schema;
}

std::string normalize_header(const std::string& header) {
    std::string out;
    out.reserve(header.size());
    for (char c : header) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) out.push_back(static_cast<char>(std::tolower(u)));
    }
    return out;
}

int FeatureSchema::match_feature(const std::string& header) const {
    const std::string norm = normalize_header(header);
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (norm == normalize_header(features_[i].name)) return static_cast<int>(i);
        for (const auto& a : features_[i].aliases) {
            if (norm == a) return static_cast<int>(i);
        }
    }
    return -1;
}

bool FeatureSchema::is_target(const std::string& header) const {
    const std::string norm = normalize_header(header);
    return std::find(target_aliases_.begin(), target_aliases_.end(), norm) !=
           target_aliases_.end();
}

bool FeatureSchema::is_dropped(const std::string& header) const {
    const std::string norm = normalize_header(header);
    return std::find(drop_aliases_.begin(), drop_aliases_.end(), norm) !=
           drop_aliases_.end();
}

namespace {

// Splits one CSV record. Handles double-quoted fields; no embedded newlines.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Strict numeric parse; returns false unless the whole cell is consumed.
bool parse_number(const std::string& cell, double& out) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end != begin && *end == '\0';
}

}  // namespace

Dataset parse_csv(std::istream& in, const FeatureSchema& schema,
                  const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line))
        throw_input(source_name + ": empty file, expected a header row");

    const std::vector<std::string> header = split_csv_line(line);
    const std::size_t d = schema.feature_count();
    std::vector<int> column_role(header.size(), -2);  // -2 ignore, -1 target, >=0 feature
    std::vector<int> feature_column(d, -1);
    int target_column = -1;

    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = trim(header[c]);
        if (schema.is_target(name)) {
            if (target_column >= 0)
                throw_input(source_name + ": duplicate target column '" + name + "'");
            target_column = static_cast<int>(c);
            column_role[c] = -1;
            continue;
        }
        if (schema.is_dropped(name)) continue;
        int f = schema.match_feature(name);
        if (f >= 0) {
            if (feature_column[static_cast<std::size_t>(f)] >= 0)
                throw_input(source_name + ": duplicate column '" +
                            schema.features()[static_cast<std::size_t>(f)].name + "'");
            feature_column[static_cast<std::size_t>(f)] = static_cast<int>(c);
            column_role[c] = f;
        }
    }

    for (std::size_t f = 0; f < d; ++f) {
        if (feature_column[f] < 0)
            throw_input(source_name + ": missing required column '" +
                        schema.features()[f].name + "'");
    }
    if (target_column < 0)
        throw_input(source_name + ": missing target column '" +
                    schema.target_name() + "'");

    Dataset ds;
    ds.class_count = 3;
    ds.source = source_name;
    for (const auto& f : schema.features()) ds.feature_names.push_back(f.name);
    ds.X = Matrix(0, d);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> row(d);
    std::size_t data_row = 0;  // 1-based in error messages
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++data_row;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw_input(fmt::format("{}: row {} has {} cells, header has {}",
                                    source_name, data_row, cells.size(),
                                    header.size()));
        for (std::size_t f = 0; f < d; ++f) {
            const std::string cell = trim(cells[static_cast<std::size_t>(feature_column[f])]);
            if (cell.empty()) {
                row[f] = nan;  // missing marker
                continue;
            }
            double v;
            if (!parse_number(cell, v))
                throw_input(fmt::format("{}: non-numeric cell at row {}, column {}",
                                        source_name, data_row,
                                        schema.features()[f].name));
            row[f] = v;
        }
        const std::string target_cell =
            trim(cells[static_cast<std::size_t>(target_column)]);
        double t;
        if (target_cell.empty() || !parse_number(target_cell, t))
            throw_input(fmt::format("{}: non-numeric target at row {}", source_name,
                                    data_row));
        if (t != 1.0 && t != 2.0 && t != 3.0)
            throw_input(fmt::format("{}: target value {} at row {} outside {{1,2,3}}",
                                    source_name, t, data_row));
        ds.X.append_row(row);
        ds.y.push_back(static_cast<int>(t) - 1);
    }
    return ds;
}

Dataset load_csv(const std::string& path, const FeatureSchema& schema) {
    std::ifstream in(path);
    if (!in) throw_input("file not found: " + path);
    return parse_csv(in, schema, path);
}

void write_csv(const Dataset& ds, const FeatureSchema& schema,
               const std::string& path) {
    std::ofstream out(path);
    if (!out) throw_input("cannot open for writing: " + path);
    for (std::size_t f = 0; f < schema.feature_count(); ++f)
        out << schema.features()[f].name << ',';
    out << schema.target_name() << '\n';
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        for (std::size_t c = 0; c < ds.X.cols(); ++c) {
            const double v = ds.X.at(r, c);
            if (std::isnan(v)) {
                out << ',';  // blank = missing
            } else {
                out << fmt::format("{:.17g},", v);
            }
        }
        out << ds.y[r] + 1 << '\n';
    }
    if (!out) throw_runtime("write failed: " + path);
}

std::map<int, std::size_t> class_distribution(const Dataset& ds) {
    std::map<int, std::size_t> counts;
    for (int c = 0; c < ds.class_count; ++c) counts[c] = 0;
    for (int label : ds.y) ++counts[label];
    return counts;
}

std::vector<RangeWarning> validate_ranges(const Dataset& ds,
                                          const FeatureSchema& schema) {
    std::vector<RangeWarning> warnings;
    const std::size_t d = std::min<std::size_t>(ds.X.cols(), schema.feature_count());
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        for (std::size_t f = 0; f < d; ++f) {
            const auto& desc = schema.features()[f];
            const double v = ds.X.at(r, f);
            if (std::isnan(v)) continue;
            if (v < desc.lo || v > desc.hi)
                warnings.push_back({r, desc.name, v, desc.lo, desc.hi});
        }
    }
    return warnings;
}

}  // namespace ctg
