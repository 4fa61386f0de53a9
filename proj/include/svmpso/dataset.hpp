#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "svmpso/common.hpp"
#include "svmpso/rng.hpp"

namespace svmpso {

struct SampleView {
    std::span<const double> features;
    int label;  // +1 or -1
};

/// Two-class dataset: contiguous feature rows plus +/-1 labels.
class Dataset {
public:
    Dataset() = default;
    Dataset(Matrix features, std::vector<int> labels)
        : features_(std::move(features)), labels_(std::move(labels)) {
        if (features_.rows() != labels_.size())
            throw std::invalid_argument("Dataset: row/label count mismatch");
        for (int y : labels_)
            if (y != 1 && y != -1)
                throw std::invalid_argument("Dataset: labels must be +1/-1");
    }

    std::size_t size() const { return labels_.size(); }
    std::size_t dim() const { return features_.cols(); }

    SampleView sample(std::size_t i) const { return {features_.row(i), labels_[i]}; }
    std::span<const double> features_of(std::size_t i) const { return features_.row(i); }
    int label(std::size_t i) const { return labels_[i]; }

    const Matrix& features() const { return features_; }
    const std::vector<int>& labels() const { return labels_; }

    std::size_t count_of(int label) const {
        std::size_t n = 0;
        for (int y : labels_)
            if (y == label)
                ++n;
        return n;
    }
    bool has_both_classes() const { return count_of(+1) > 0 && count_of(-1) > 0; }

    Dataset subset(const std::vector<std::size_t>& indices) const {
        Matrix f(indices.size(), dim());
        std::vector<int> y(indices.size());
        for (std::size_t r = 0; r < indices.size(); ++r) {
            auto src = features_.row(indices[r]);
            std::copy(src.begin(), src.end(), f.row(r).begin());
            y[r] = labels_[indices[r]];
        }
        return Dataset(std::move(f), std::move(y));
    }

private:
    Matrix features_;
    std::vector<int> labels_;
};

struct LoadOptions {
    std::string label_column;   // header name, or 0-based column index
    std::string positive_label; // raw value mapped to +1; the other value maps to -1
    bool has_header = true;
};

struct SplitSpec {
    double train_fraction = 0.75;
    std::uint64_t seed = 1;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace detail

/// Loads a two-class CSV. Every non-label column is parsed as a numeric
/// feature; the label column may hold arbitrary text with exactly two
/// distinct values. Features come back un-normalized.
inline Dataset load_csv(const std::string& path, const LoadOptions& opt) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open dataset file: " + path);

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    long label_idx = -1;

    if (opt.has_header) {
        if (!std::getline(in, line))
            throw DataError(path + ": empty file");
        ++line_no;
        header = detail::split_csv_line(line);
        for (std::size_t i = 0; i < header.size(); ++i)
            if (detail::trim(header[i]) == opt.label_column)
                label_idx = static_cast<long>(i);
    }
    if (label_idx < 0) {
        // fall back to a 0-based column index
        try {
            std::size_t pos = 0;
            label_idx = std::stol(opt.label_column, &pos);
            if (pos != opt.label_column.size())
                label_idx = -1;
        } catch (...) {
            label_idx = -1;
        }
        if (label_idx < 0)
            throw ConfigError("label column '" + opt.label_column + "' not found in " + path);
    }

    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    std::map<std::string, std::size_t> label_values;
    std::size_t ncols = header.empty() ? 0 : header.size();

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        auto fields = detail::split_csv_line(line);
        if (ncols == 0)
            ncols = fields.size();
        if (fields.size() != ncols)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(ncols) + " columns, got " +
                            std::to_string(fields.size()));
        if (static_cast<std::size_t>(label_idx) >= fields.size())
            throw ConfigError("label column index " + std::to_string(label_idx) +
                              " out of range in " + path);
        std::vector<double> feats;
        feats.reserve(ncols - 1);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (static_cast<long>(i) == label_idx)
                continue;
            auto v = parse_double(detail::trim(fields[i]));
            if (!v)
                throw DataError(path + ":" + std::to_string(line_no) +
                                ": malformed numeric value '" + fields[i] + "'");
            feats.push_back(*v);
        }
        std::string lab = detail::trim(fields[label_idx]);
        label_values[lab]++;
        raw_labels.push_back(lab);
        rows.push_back(std::move(feats));
    }

    if (rows.empty())
        throw DataError(path + ": no data rows");
    if (label_values.size() != 2) {
        std::string seen;
        for (auto& [k, v] : label_values)
            seen += (seen.empty() ? "" : ", ") + k;
        throw DataError(path + ": expected exactly 2 label values, found " +
                        std::to_string(label_values.size()) + " {" + seen + "}");
    }
    if (!label_values.count(opt.positive_label))
        throw ConfigError("positive label '" + opt.positive_label + "' absent from " + path);

    Matrix f(rows.size(), rows[0].size());
    std::vector<int> y(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy(rows[r].begin(), rows[r].end(), f.row(r).begin());
        y[r] = raw_labels[r] == opt.positive_label ? +1 : -1;
    }
    return Dataset(std::move(f), std::move(y));
}

/// Feature-only CSV (no label column); used by `predict` on unlabeled data.
inline Matrix load_feature_csv(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open dataset file: " + path);
    std::string line;
    std::size_t line_no = 0;
    if (has_header) {
        std::getline(in, line);
        ++line_no;
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        auto fields = detail::split_csv_line(line);
        std::vector<double> feats;
        feats.reserve(fields.size());
        for (auto& fstr : fields) {
            auto v = parse_double(detail::trim(fstr));
            if (!v)
                throw DataError(path + ":" + std::to_string(line_no) +
                                ": malformed numeric value '" + fstr + "'");
            feats.push_back(*v);
        }
        if (!rows.empty() && feats.size() != rows[0].size())
            throw DataError(path + ":" + std::to_string(line_no) + ": ragged row");
        rows.push_back(std::move(feats));
    }
    if (rows.empty())
        throw DataError(path + ": no data rows");
    Matrix f(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy(rows[r].begin(), rows[r].end(), f.row(r).begin());
    return f;
}

/// Per-characteristic min/max bounds used for [0,1] scaling. Saved models
/// keep a copy so raw inputs can be scaled identically at predict time.
struct FeatureScaling {
    std::vector<double> lo, hi;

    std::size_t dim() const { return lo.size(); }
    double apply_one(double v, std::size_t l) const {
        return hi[l] > lo[l] ? (v - lo[l]) / (hi[l] - lo[l]) : 0.0;
    }
};

inline FeatureScaling fit_scaling(const Matrix& f) {
    const std::size_t q = f.cols();
    FeatureScaling s;
    s.lo.assign(q, std::numeric_limits<double>::infinity());
    s.hi.assign(q, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < f.rows(); ++i) {
        auto row = f.row(i);
        for (std::size_t l = 0; l < q; ++l) {
            s.lo[l] = std::min(s.lo[l], row[l]);
            s.hi[l] = std::max(s.hi[l], row[l]);
        }
    }
    for (std::size_t l = 0; l < q; ++l)
        if (!std::isfinite(s.lo[l]) || !std::isfinite(s.hi[l]))
            throw DataError("normalize: non-finite values in characteristic " + std::to_string(l));
    return s;
}

inline Matrix apply_scaling(const Matrix& f, const FeatureScaling& s) {
    if (f.cols() != s.dim())
        throw DataError("scaling dimension mismatch: " + std::to_string(s.dim()) +
                        " bounds vs " + std::to_string(f.cols()) + " characteristics");
    Matrix out(f.rows(), f.cols());
    for (std::size_t i = 0; i < f.rows(); ++i) {
        auto row = f.row(i);
        for (std::size_t l = 0; l < f.cols(); ++l)
            out(i, l) = s.apply_one(row[l], l);
    }
    return out;
}

/// Per-characteristic min-max scaling onto [0,1]. Constant characteristics
/// map to 0. Idempotent: applying it twice changes nothing. When `fitted`
/// is given, the bounds used are written there.
inline Dataset normalize(const Dataset& ds, FeatureScaling* fitted = nullptr) {
    FeatureScaling s = fit_scaling(ds.features());
    Matrix f = apply_scaling(ds.features(), s);
    if (fitted)
        *fitted = std::move(s);
    return Dataset(std::move(f), ds.labels());
}

/// Seed-deterministic stratified split. Per-class train counts follow the
/// largest-remainder rule so both sides stay within one sample of the
/// global class proportions and |train| = round(fraction * size) exactly.
inline std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw ConfigError("train_fraction must lie in (0,1)");
    if (ds.count_of(+1) < 2 || ds.count_of(-1) < 2)
        throw DataError("stratified split needs at least 2 samples per class");

    std::array<std::vector<std::size_t>, 2> by_class;  // [0] -> +1, [1] -> -1
    for (std::size_t i = 0; i < ds.size(); ++i)
        by_class[ds.label(i) == +1 ? 0 : 1].push_back(i);

    Rng rng(spec.seed);
    for (auto& idx : by_class)  // Fisher-Yates, fixed class order
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.index(i)]);

    const auto target = static_cast<std::size_t>(std::llround(spec.train_fraction * ds.size()));
    std::array<double, 2> ideal{spec.train_fraction * by_class[0].size(),
                                spec.train_fraction * by_class[1].size()};
    std::array<std::size_t, 2> take{static_cast<std::size_t>(ideal[0]),
                                    static_cast<std::size_t>(ideal[1])};
    // hand out the remainder by largest fractional part
    while (take[0] + take[1] < target) {
        int c = (ideal[0] - take[0]) >= (ideal[1] - take[1]) ? 0 : 1;
        if (take[c] >= by_class[c].size())
            c = 1 - c;
        if (take[c] >= by_class[c].size())
            break;
        ++take[c];
    }
    for (int c : {0, 1})
        take[c] = std::min(take[c], by_class[c].size() - 1);  // keep both classes in test

    std::vector<std::size_t> train_idx, test_idx;
    for (int c : {0, 1}) {
        train_idx.insert(train_idx.end(), by_class[c].begin(), by_class[c].begin() + take[c]);
        test_idx.insert(test_idx.end(), by_class[c].begin() + take[c], by_class[c].end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {ds.subset(train_idx), ds.subset(test_idx)};
}

/// Debug output: normalized features with a trailing +1/-1 `label` column.
inline void dump_csv(const Dataset& ds, std::ostream& out) {
    for (std::size_t l = 0; l < ds.dim(); ++l)
        out << 'f' << l + 1 << ',';
    out << "label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto row = ds.features_of(i);
        for (double v : row)
            out << format_double(v) << ',';
        out << (ds.label(i) > 0 ? "+1" : "-1") << '\n';
    }
}

/// Synthetic 2D linearly separable set; stand-in for the unavailable "Test"
/// benchmark file, not a reproduction of it. Points are uniform in the unit
/// square with a clear band of width 2*margin around the line x + y = 1.
inline Dataset make_separable_2d(std::size_t n, std::uint64_t seed, double margin = 0.12) {
    if (n < 4)
        throw ConfigError("make_separable_2d: need at least 4 samples");
    Rng rng(seed);
    Matrix f(n, 2);
    std::vector<int> y(n);
    const double root2 = std::sqrt(2.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (;;) {
            double a = rng.uniform(0.0, 1.0), b = rng.uniform(0.0, 1.0);
            double signed_dist = (a + b - 1.0) / root2;
            if (std::abs(signed_dist) < margin)
                continue;  // inside the separation band, redraw
            f(i, 0) = a;
            f(i, 1) = b;
            y[i] = signed_dist > 0 ? +1 : -1;
            break;
        }
    }
    // both classes present even for tiny n: flip the first two if needed
    Dataset ds(std::move(f), std::move(y));
    if (!ds.has_both_classes())
        return make_separable_2d(n, seed + 1, margin);
    return ds;
}

}  // namespace svmpso
