#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "conenet/error.hpp"
#include "conenet/rng.hpp"
#include "conenet/tensor.hpp"

namespace conenet {

struct Dataset {
    Matrix features;                  // n_features x n_samples
    std::vector<std::size_t> labels;  // one per sample, each < class_count
    std::size_t class_count = 0;
    std::string name;

    [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
    [[nodiscard]] std::size_t feature_count() const noexcept { return features.rows(); }

    [[nodiscard]] std::vector<std::size_t> class_histogram() const {
        std::vector<std::size_t> counts(class_count, 0);
        for (auto l : labels) ++counts[l];
        return counts;
    }

    /// Subset of the given sample indices, in order.
    [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const {
        Dataset out{features.select_cols(indices), {}, class_count, name};
        out.labels.reserve(indices.size());
        for (auto i : indices) out.labels.push_back(labels[i]);
        return out;
    }

    void check() const {
        if (features.cols() != labels.size()) throw DimensionError("dataset feature/label count mismatch");
        for (auto l : labels) {
            if (l >= class_count) throw ValidationError("label " + std::to_string(l) + " >= class count");
        }
        if (!features.all_finite()) throw ValidationError("dataset features contain non-finite values");
    }
};

/// The four XOR corners in truth-table order, labels 0, 1, 1, 0.
inline Dataset make_xor() {
    return Dataset{Matrix{{0, 0, 1, 1}, {0, 1, 0, 1}}, {0, 1, 1, 0}, 2, "xor"};
}

struct AnnulusSpec {
    std::size_t n_per_class = 500;
    double inner_radius = 1.0;
    double ring_lo = 1.5;
    double ring_hi = 2.5;
};

/// Class 0: uniform in the disk of radius inner_radius. Class 1: uniform in the
/// ring [ring_lo, ring_hi]. Samples alternate class 0, class 1. Area-uniform
/// radii come from inverting the radial CDF: r = sqrt(lo^2 + u (hi^2 - lo^2)).
inline Dataset make_annulus(const AnnulusSpec& spec, std::uint64_t seed) {
    if (!(spec.inner_radius > 0.0 && spec.inner_radius < spec.ring_lo && spec.ring_lo < spec.ring_hi)) {
        throw ValidationError("annulus radii must satisfy 0 < inner < ring_lo < ring_hi");
    }
    if (spec.n_per_class == 0) throw ValidationError("annulus needs at least one point per class");
    Rng rng(seed);
    const std::size_t n = 2 * spec.n_per_class;
    Dataset ds{Matrix(2, n), std::vector<std::size_t>(n), 2, "annulus"};
    auto sample = [&](double lo, double hi) {
        const double r = std::sqrt(lo * lo + rng.uniform() * (hi * hi - lo * lo));
        const double theta = 2.0 * std::numbers::pi * rng.uniform();
        return std::pair{r * std::cos(theta), r * std::sin(theta)};
    };
    for (std::size_t k = 0; k < spec.n_per_class; ++k) {
        // Strict inequality on the disk: r = inner_radius * sqrt(u) with u < 1.
        const auto [x0, y0] = sample(0.0, spec.inner_radius);
        ds.features(0, 2 * k) = x0;
        ds.features(1, 2 * k) = y0;
        ds.labels[2 * k] = 0;
        const auto [x1, y1] = sample(spec.ring_lo, spec.ring_hi);
        ds.features(0, 2 * k + 1) = x1;
        ds.features(1, 2 * k + 1) = y1;
        ds.labels[2 * k + 1] = 1;
    }
    return ds;
}

// ---------------------------------------------------------------------------
// CIFAR-10 binary batches: records of 3073 bytes, one label byte (0..9)
// followed by 1024 red, 1024 green and 1024 blue bytes of a 32x32 image.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kCifarImageBytes = 3072;
inline constexpr std::size_t kCifarRecordBytes = kCifarImageBytes + 1;
inline constexpr std::size_t kCifarClasses = 10;

namespace detail {
inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("error reading " + path.string());
    return bytes;
}
}  // namespace detail

/// Appends the records of one batch file to `out`, pixels scaled to [0, 1].
/// `max_per_class` caps how many samples of each class `out` may hold in total.
inline void append_cifar10_binary(const std::filesystem::path& path, std::optional<std::size_t> max_per_class,
                                  Dataset& out) {
    const auto bytes = detail::read_file(path);
    if (bytes.size() % kCifarRecordBytes != 0) {
        throw FormatError(path.string() + ": size " + std::to_string(bytes.size()) + " is not a multiple of " +
                              std::to_string(kCifarRecordBytes),
                          bytes.size() - bytes.size() % kCifarRecordBytes);
    }
    const std::size_t records = bytes.size() / kCifarRecordBytes;
    auto counts = out.class_count == 0 ? std::vector<std::size_t>(kCifarClasses, 0) : out.class_histogram();
    out.class_count = kCifarClasses;

    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < records; ++r) {
        const auto label = bytes[r * kCifarRecordBytes];
        if (label >= kCifarClasses) {
            throw FormatError(path.string() + ": record " + std::to_string(r) + " has label " +
                                  std::to_string(label) + " > 9",
                              r * kCifarRecordBytes);
        }
        if (max_per_class && counts[label] >= *max_per_class) continue;
        ++counts[label];
        keep.push_back(r);
    }

    const std::size_t old_n = out.size();
    Matrix features(kCifarImageBytes, old_n + keep.size());
    for (std::size_t i = 0; i < kCifarImageBytes; ++i) {
        for (std::size_t j = 0; j < old_n; ++j) features(i, j) = out.features(i, j);
    }
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const std::uint8_t* rec = bytes.data() + keep[k] * kCifarRecordBytes;
        out.labels.push_back(rec[0]);
        for (std::size_t i = 0; i < kCifarImageBytes; ++i) {
            features(i, old_n + k) = static_cast<double>(rec[i + 1]) / 255.0;
        }
    }
    out.features = std::move(features);
}

inline Dataset load_cifar10_binary(const std::filesystem::path& path,
                                   std::optional<std::size_t> max_per_class = std::nullopt) {
    Dataset ds{Matrix(kCifarImageBytes, 0), {}, 0, "cifar10"};
    append_cifar10_binary(path, max_per_class, ds);
    return ds;
}

struct CifarSplit {
    Dataset train;
    Dataset test;
};

/// Reads data_batch_1..5.bin and test_batch.bin from `dir`.
inline CifarSplit load_cifar10_dir(const std::filesystem::path& dir, std::optional<std::size_t> train_per_class,
                                   std::optional<std::size_t> test_per_class) {
    if (!std::filesystem::is_directory(dir)) throw IoError("CIFAR-10 directory not found: " + dir.string());
    CifarSplit split{Dataset{Matrix(kCifarImageBytes, 0), {}, 0, "cifar10-train"},
                     Dataset{Matrix(kCifarImageBytes, 0), {}, 0, "cifar10-test"}};
    for (int b = 1; b <= 5; ++b) {
        const auto file = dir / ("data_batch_" + std::to_string(b) + ".bin");
        if (!std::filesystem::exists(file)) throw IoError("missing CIFAR-10 batch: " + file.string());
        if (train_per_class && split.train.size() >= *train_per_class * kCifarClasses) break;
        append_cifar10_binary(file, train_per_class, split.train);
    }
    const auto test_file = dir / "test_batch.bin";
    if (!std::filesystem::exists(test_file)) throw IoError("missing CIFAR-10 batch: " + test_file.string());
    append_cifar10_binary(test_file, test_per_class, split.test);
    return split;
}

// ---------------------------------------------------------------------------
// CSV and preprocessing
// ---------------------------------------------------------------------------

namespace detail {
inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}
}  // namespace detail

/// Numeric CSV with a header row. `label_column` is a header name, or a zero-based
/// index when no header matches. Labels must be non-negative integers; the class
/// count is max label + 1. Row numbers in errors count the header as row 1.
inline Dataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV file " + path.string(), 1, 1);
    const auto header = detail::split_commas(line);
    std::optional<std::size_t> label_index;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (detail::trim(header[c]) == label_column) label_index = c;
    }
    if (!label_index) {
        std::size_t idx = 0;
        const auto [ptr, ec] = std::from_chars(label_column.data(), label_column.data() + label_column.size(), idx);
        if (ec != std::errc() || ptr != label_column.data() + label_column.size() || idx >= header.size()) {
            throw ValidationError("label column '" + label_column + "' not found in " + path.string());
        }
        label_index = idx;
    }

    const std::size_t n_cols = header.size();
    std::vector<double> values;  // sample-major
    std::vector<std::size_t> labels;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_commas(line);
        if (cells.size() != n_cols) {
            throw ParseError("expected " + std::to_string(n_cols) + " cells, found " + std::to_string(cells.size()),
                             row, std::min(cells.size(), n_cols) + 1);
        }
        for (std::size_t c = 0; c < n_cols; ++c) {
            const auto cell = detail::trim(cells[c]);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
                throw ParseError("non-numeric cell '" + std::string(cell) + "'", row, c + 1);
            }
            if (c == *label_index) {
                if (v < 0.0 || v != std::floor(v)) throw ParseError("label is not a non-negative integer", row, c + 1);
                labels.push_back(static_cast<std::size_t>(v));
            } else {
                values.push_back(v);
            }
        }
    }
    const std::size_t n = labels.size();
    const std::size_t f = n_cols - 1;
    Dataset ds{Matrix(f, n), std::move(labels), 0, path.stem().string()};
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < f; ++i) ds.features(i, j) = values[j * f + i];
    }
    for (auto l : ds.labels) ds.class_count = std::max(ds.class_count, l + 1);
    return ds;
}

struct TrainTestSplit {
    Dataset train;
    Dataset test;
};

/// Shuffles sample indices with `seed`; the first round(fraction * n) go to train.
inline TrainTestSplit split(const Dataset& ds, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("split fraction must lie in (0, 1)");
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.size())));
    if (n_train == 0 || n_train == ds.size()) throw ValidationError("split leaves one side empty");
    const std::span<const std::size_t> all(order);
    return {ds.subset(all.first(n_train)), ds.subset(all.subspan(n_train))};
}

struct NormalizedSplit {
    Dataset train;
    Dataset test;
    std::vector<double> mean;
    std::vector<double> stddev;
    /// Features whose training variance was zero; their std was clamped to 1.
    std::vector<std::size_t> clamped_features;
};

/// Standardizes both splits with per-feature training mean and population std.
inline NormalizedSplit normalize(const Dataset& train, const Dataset& test) {
    if (train.feature_count() != test.feature_count()) throw DimensionError("train/test feature counts differ");
    if (train.size() == 0) throw ValidationError("cannot normalize with an empty training set");
    NormalizedSplit out{train, test, std::vector<double>(train.feature_count()),
                        std::vector<double>(train.feature_count()), {}};
    const auto n = static_cast<double>(train.size());
    for (std::size_t i = 0; i < train.feature_count(); ++i) {
        double mean = 0.0;
        for (double v : train.features.row(i)) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : train.features.row(i)) var += (v - mean) * (v - mean);
        double sd = std::sqrt(var / n);
        if (sd == 0.0) {
            sd = 1.0;
            out.clamped_features.push_back(i);
        }
        out.mean[i] = mean;
        out.stddev[i] = sd;
        for (std::size_t j = 0; j < out.train.size(); ++j) out.train.features(i, j) = (train.features(i, j) - mean) / sd;
        for (std::size_t j = 0; j < out.test.size(); ++j) out.test.features(i, j) = (test.features(i, j) - mean) / sd;
    }
    return out;
}

}  // namespace conenet
