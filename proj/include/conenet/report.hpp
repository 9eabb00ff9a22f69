#pragma once

// Text and image outputs. CSV dialect: comma separated, '.' decimal point,
// one header row, LF line endings. Reals are written in the shortest form
// that reads back to the same double (std::to_chars), so reruns are
// byte-identical and files round-trip exactly.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "conenet/error.hpp"
#include "conenet/experiments.hpp"
#include "conenet/geometry.hpp"

namespace conenet {

inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

/// Writes to a sibling temporary and renames, so a failed write leaves no partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoError("error writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at " + path.string());
    }
}

inline std::string activation_label(const Activation& act) {
    std::string s(kind_name(act.kind));
    if (act.kind == Kind::ParameterizedCone) s += "(beta=" + format_real(act.cone_beta) + ")";
    return s;
}

inline std::string summary_csv(std::span<const TrialStats> rows) {
    std::ostringstream out;
    out << "activation,mean,median,std,best,worst,trials,failed\n";
    for (const auto& r : rows) {
        out << activation_label(r.activation);
        if (r.summary) {
            const auto& s = *r.summary;
            out << ',' << format_real(s.mean) << ',' << format_real(s.median) << ',' << format_real(s.std_dev) << ','
                << format_real(s.best) << ',' << format_real(s.worst);
        } else {
            out << ",nan,nan,nan,nan,nan";
        }
        out << ',' << r.trials.size() << ',' << r.failed_count() << '\n';
    }
    return out.str();
}

inline std::string trials_csv(std::span<const TrialStats> rows) {
    std::ostringstream out;
    out << "activation,trial,seed,status,test_acc\n";
    for (const auto& r : rows) {
        for (const auto& t : r.trials) {
            out << activation_label(r.activation) << ',' << t.index << ',' << t.seed << ','
                << (t.failed ? "diverged" : "ok") << ',' << (t.failed ? "nan" : format_real(t.test_accuracy)) << '\n';
        }
    }
    return out.str();
}

inline std::string curve_csv(std::span<const EpochRecord> curve) {
    std::ostringstream out;
    out << "epoch,train_loss,train_acc,test_acc\n";
    for (const auto& e : curve) {
        out << e.epoch << ',' << format_real(e.train_loss) << ',' << format_real(e.train_acc) << ','
            << format_real(e.test_acc) << '\n';
    }
    return out.str();
}

/// Human-readable five-statistic table.
inline std::string summary_table(std::span<const TrialStats> rows) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-24s %8s %8s %8s %8s %8s\n", "activation", "mean", "median", "std", "best",
                  "worst");
    out << line;
    for (const auto& r : rows) {
        if (r.summary) {
            const auto& s = *r.summary;
            std::snprintf(line, sizeof line, "%-24s %8.4f %8.4f %8.4f %8.4f %8.4f", activation_label(r.activation).c_str(),
                          s.mean, s.median, s.std_dev, s.best, s.worst);
        } else {
            std::snprintf(line, sizeof line, "%-24s %8s %8s %8s %8s %8s", activation_label(r.activation).c_str(), "-",
                          "-", "-", "-", "-");
        }
        out << line;
        if (r.failed_count() > 0) out << "  (" << r.failed_count() << " diverged)";
        out << '\n';
    }
    return out.str();
}

/// Writes summary.csv, trials.csv and curves/<activation>_trial<k>.csv under `dir`.
inline void write_experiment(const std::filesystem::path& dir, std::span<const TrialStats> rows) {
    write_file_atomic(dir / "summary.csv", summary_csv(rows));
    write_file_atomic(dir / "trials.csv", trials_csv(rows));
    for (const auto& r : rows) {
        for (const auto& t : r.trials) {
            const auto name = std::string(kind_name(r.activation.kind)) + "_trial" + std::to_string(t.index) + ".csv";
            write_file_atomic(dir / "curves" / name, curve_csv(t.curve));
        }
    }
}

/// One CSV row per grid row, class indices as integers. No header (the grid is a matrix).
inline std::string grid_csv(const RegionGrid& grid) {
    std::string out;
    for (std::size_t r = 0; r < grid.rows; ++r) {
        for (std::size_t c = 0; c < grid.cols; ++c) {
            if (c) out += ',';
            out += std::to_string(grid.at(r, c));
        }
        out += '\n';
    }
    return out;
}

/// Binary P5 PGM; class k of C maps to gray floor(255 k / (C - 1)).
inline std::string grid_pgm(const RegionGrid& grid) {
    std::string out = "P5 " + std::to_string(grid.cols) + " " + std::to_string(grid.rows) + " 255\n";
    const std::size_t denom = grid.class_count > 1 ? grid.class_count - 1 : 1;
    for (auto k : grid.cells) out += static_cast<char>(static_cast<unsigned char>(255 * k / denom));
    return out;
}

}  // namespace conenet
