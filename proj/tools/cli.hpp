#pragma once

// Subcommands of the `conenet` tool. Kept in a header so the test suites can
// drive the exact same code path in-process.
//
// Exit codes: 0 success, 1 configuration or I/O error, 2 usage error.
// Settings resolve as: flags, then the --config file (key=value lines, with
// [subcommand] sections), then built-in defaults. Outputs are staged in
// memory and written atomically only after every input has been validated.

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "conenet/conenet.hpp"

namespace conenet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

/// Bad flag values found after parsing; maps to exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

inline std::filesystem::path default_out_dir() {
    if (const char* env = std::getenv("CONENET_OUT_DIR"); env && *env) return env;
    return ".";
}

inline std::vector<std::string> split_list(const std::string& text, char sep = ',') {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double parse_real(const std::string& text, const std::string& what) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw UsageError("invalid number '" + text + "' in " + what);
    }
    return v;
}

inline Activation parse_activation(const std::string& name, double beta) {
    const auto kind = try_parse_kind(name);
    if (!kind) throw UsageError("unknown activation '" + name + "'; valid names: " + valid_kind_names());
    if (!(beta > 0.0)) throw UsageError("--cone-beta must be positive");
    return Activation(*kind, beta);
}

inline std::vector<Activation> parse_activations(const std::string& list, double beta) {
    std::vector<Activation> out;
    for (const auto& name : split_list(list)) out.push_back(parse_activation(name, beta));
    if (out.empty()) throw UsageError("no activation names given");
    return out;
}

inline Bounds parse_bounds(const std::string& text) {
    const auto parts = split_list(text);
    if (parts.size() != 4) throw UsageError("--bounds expects xmin,xmax,ymin,ymax");
    Bounds b{parse_real(parts[0], "--bounds"), parse_real(parts[1], "--bounds"), parse_real(parts[2], "--bounds"),
             parse_real(parts[3], "--bounds")};
    if (!(b.xmin < b.xmax) || !(b.ymin < b.ymax)) throw UsageError("--bounds do not form a nonempty rectangle");
    return b;
}

/// "kind:w1,w2:b", e.g. "cone:1,0:0".
inline NeuronGeometry parse_analytic_neuron(const std::string& text, double beta) {
    const auto parts = split_list(text, ':');
    if (parts.size() != 3) throw UsageError("--analytic expects kind:w1,w2:b");
    std::vector<double> w;
    for (const auto& v : split_list(parts[1])) w.push_back(parse_real(v, "--analytic weights"));
    if (w.size() != 2) throw UsageError("--analytic needs exactly two weights for a planar raster");
    const double b = parse_real(parts[2], "--analytic bias");
    try {
        return NeuronGeometry(std::move(w), b, parse_activation(parts[0], beta));
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
}

inline void write_output(const std::string& path, const std::string& contents, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << contents;
    } else {
        write_file_atomic(path, contents);
    }
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Train/test pair named by a --dataset value: xor, annulus, csv:PATH or cifar:DIR.
struct DatasetOptions {
    std::string spec = "annulus";
    std::string label_column = "label";
    double split_fraction = 0.8;
    bool normalize = false;
    std::size_t per_class = 500;
    std::size_t test_per_class = 100;
    std::uint64_t data_seed = 7;
};

inline TrainTestSplit load_dataset(const DatasetOptions& opts) {
    if (opts.spec == "xor") {
        auto ds = make_xor();
        return {ds, ds};
    }
    TrainTestSplit pair;
    if (opts.spec == "annulus") {
        AnnulusConfig ac;
        ac.data_seed = opts.data_seed;
        auto [train_set, test_set] = annulus_datasets(ac);
        pair = {std::move(train_set), std::move(test_set)};
    } else if (opts.spec.rfind("csv:", 0) == 0) {
        if (!(opts.split_fraction > 0.0 && opts.split_fraction < 1.0)) throw UsageError("--split must lie in (0, 1)");
        pair = split(load_csv(opts.spec.substr(4), opts.label_column), opts.split_fraction, opts.data_seed);
    } else if (opts.spec.rfind("cifar:", 0) == 0) {
        auto data = load_cifar10_dir(opts.spec.substr(6), opts.per_class, opts.test_per_class);
        pair = {std::move(data.train), std::move(data.test)};
    } else {
        throw UsageError("unknown --dataset '" + opts.spec + "'; use xor, annulus, csv:PATH or cifar:DIR");
    }
    if (opts.normalize) {
        auto n = normalize(pair.train, pair.test);
        return {std::move(n.train), std::move(n.test)};
    }
    return pair;
}

inline void add_dataset_options(CLI::App* cmd, DatasetOptions& opts) {
    cmd->add_option("--dataset", opts.spec, "xor | annulus | csv:PATH | cifar:DIR")->capture_default_str();
    cmd->add_option("--label-column", opts.label_column, "CSV label column (name or index)")->capture_default_str();
    cmd->add_option("--split", opts.split_fraction, "CSV train fraction")->capture_default_str();
    cmd->add_flag("--normalize", opts.normalize, "standardize features with training statistics");
    cmd->add_option("--per-class", opts.per_class, "CIFAR training images per class")->capture_default_str();
    cmd->add_option("--test-per-class", opts.test_per_class, "CIFAR test images per class")->capture_default_str();
    cmd->add_option("--data-seed", opts.data_seed, "seed for dataset generation and splitting")->capture_default_str();
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dense networks with cone-like activations: experiments, curves and decision regions."};
    app.name("conenet");
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value settings file; flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);

    double cone_beta = 1.0;
    std::string out_dir = default_out_dir().string();
    unsigned threads = 1;
    app.add_option("--cone-beta", cone_beta, "exponent for parameterized-cone")->capture_default_str();

    // curves
    auto* curves = app.add_subcommand("curves", "Tabulate activations and derivatives");
    std::string curve_kinds = "relu,cone,parabolic-cone";
    double zmin = -3.0, zmax = 3.0;
    std::size_t steps = 601;
    std::string curve_out;
    curves->add_option("--kinds", curve_kinds, "comma-separated activation names")->capture_default_str();
    curves->add_option("--zmin", zmin)->capture_default_str();
    curves->add_option("--zmax", zmax)->capture_default_str();
    curves->add_option("--steps", steps)->capture_default_str();
    curves->add_option("--out", curve_out, "output CSV (default stdout)");

    // xor
    auto* xor_cmd = app.add_subcommand("xor", "Single-neuron XOR experiment");
    XorConfig xc;
    std::string xor_kind = "cone";
    xor_cmd->add_option("--kind", xor_kind)->capture_default_str();
    xor_cmd->add_option("--trials", xc.trials)->capture_default_str();
    xor_cmd->add_option("--epochs", xc.epochs)->capture_default_str();
    xor_cmd->add_option("--lr", xc.lr)->capture_default_str();
    xor_cmd->add_option("--seed", xc.base_seed, "base seed; trial k uses seed+k")->capture_default_str();
    xor_cmd->add_option("--out-dir", out_dir)->capture_default_str();
    xor_cmd->add_option("--threads", threads)->capture_default_str();

    // annulus
    auto* annulus = app.add_subcommand("annulus", "Disk-inside-ring experiment");
    AnnulusConfig ac;
    std::string annulus_kind = "cone";
    annulus->add_option("--kind", annulus_kind)->capture_default_str();
    annulus->add_option("--hidden", ac.hidden)->capture_default_str();
    annulus->add_option("--trials", ac.trials)->capture_default_str();
    annulus->add_option("--epochs", ac.epochs)->capture_default_str();
    annulus->add_option("--lr", ac.lr)->capture_default_str();
    annulus->add_option("--batch", ac.batch_size, "minibatch size, 0 = full batch")->capture_default_str();
    annulus->add_option("--n-per-class", ac.data.n_per_class)->capture_default_str();
    annulus->add_option("--inner-radius", ac.data.inner_radius)->capture_default_str();
    annulus->add_option("--ring-lo", ac.data.ring_lo)->capture_default_str();
    annulus->add_option("--ring-hi", ac.data.ring_hi)->capture_default_str();
    annulus->add_option("--data-seed", ac.data_seed)->capture_default_str();
    annulus->add_option("--seed", ac.base_seed)->capture_default_str();
    annulus->add_option("--out-dir", out_dir)->capture_default_str();
    annulus->add_option("--threads", threads)->capture_default_str();

    // bench
    auto* bench = app.add_subcommand("bench", "CIFAR-10 subset benchmark");
    BenchConfig bc;
    std::string bench_data;
    std::string bench_kinds = "relu,leaky-relu,cone,parabolic-cone";
    bench->add_option("--data", bench_data, "directory with CIFAR-10 binary batches")->required();
    bench->add_option("--kinds", bench_kinds)->capture_default_str();
    bench->add_option("--width", bc.width)->capture_default_str();
    bench->add_option("--train-per-class", bc.train_per_class)->capture_default_str();
    bench->add_option("--test-per-class", bc.test_per_class)->capture_default_str();
    bench->add_option("--epochs", bc.epochs)->capture_default_str();
    bench->add_option("--lr", bc.lr)->capture_default_str();
    bench->add_option("--batch", bc.batch_size)->capture_default_str();
    bench->add_option("--trials", bc.trials)->capture_default_str();
    bench->add_option("--seed", bc.base_seed)->capture_default_str();
    bench->add_option("--out-dir", out_dir)->capture_default_str();
    bench->add_option("--threads", threads)->capture_default_str();

    // boundary
    auto* boundary = app.add_subcommand("boundary", "Rasterize decision regions");
    std::string model_path, analytic, bounds_text = "-1,3,-1,3", format = "csv", boundary_out;
    std::size_t resolution = 101;
    double tol = kDefaultBoundaryTol;
    auto* model_opt = boundary->add_option("--model", model_path, "trained model file");
    auto* analytic_opt = boundary->add_option("--analytic", analytic, "single neuron kind:w1,w2:b");
    model_opt->excludes(analytic_opt);
    boundary->add_option("--bounds", bounds_text, "xmin,xmax,ymin,ymax")->capture_default_str();
    boundary->add_option("--resolution", resolution)->capture_default_str();
    boundary->add_option("--format", format)->check(CLI::IsMember({"csv", "pgm"}))->capture_default_str();
    boundary->add_option("--tol", tol, "boundary band for --analytic")->capture_default_str();
    boundary->add_option("--out", boundary_out, "output file (default stdout)");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train one network and save it");
    DatasetOptions train_data;
    std::string train_kind = "cone", hidden_text = "2", train_model, train_curve;
    TrainConfig tc;
    tc.epochs = 500;
    tc.batch_size = 0;
    tc.adam.lr = 0.01;
    std::uint64_t train_seed = 1;
    add_dataset_options(train_cmd, train_data);
    train_cmd->add_option("--kind", train_kind)->capture_default_str();
    train_cmd->add_option("--hidden", hidden_text, "comma-separated hidden widths")->capture_default_str();
    train_cmd->add_option("--epochs", tc.epochs)->capture_default_str();
    train_cmd->add_option("--lr", tc.adam.lr)->capture_default_str();
    train_cmd->add_option("--batch", tc.batch_size, "0 = full batch")->capture_default_str();
    train_cmd->add_option("--seed", train_seed)->capture_default_str();
    train_cmd->add_option("--model", train_model, "output model file")->required();
    train_cmd->add_option("--curve", train_curve, "optional per-epoch CSV");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Accuracy of a saved model");
    DatasetOptions eval_data;
    std::string eval_model;
    add_dataset_options(eval_cmd, eval_data);
    eval_cmd->add_option("--model", eval_model)->required();

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.emplace_back("conenet");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "conenet: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*curves) {
            const auto acts = parse_activations(curve_kinds, cone_beta);
            if (!(zmin < zmax)) throw UsageError("--zmin must be below --zmax");
            if (steps < 2) throw UsageError("--steps must be at least 2");
            std::ostringstream csv;
            csv << "z";
            for (const auto& a : acts) csv << ",g_" << kind_name(a.kind) << ",dg_" << kind_name(a.kind);
            csv << '\n';
            for (std::size_t i = 0; i < steps; ++i) {
                const double z = lattice(zmin, zmax, i, steps);
                csv << format_real(z);
                for (const auto& a : acts) csv << ',' << format_real(forward(a, z)) << ',' << format_real(derivative(a, z));
                csv << '\n';
            }
            write_output(curve_out, csv.str(), out);
        } else if (*xor_cmd) {
            xc.activation = parse_activation(xor_kind, cone_beta);
            xc.threads = threads;
            const std::vector<TrialStats> rows{xor_experiment(xc)};
            write_experiment(std::filesystem::path(out_dir), rows);
            out << summary_table(rows);
        } else if (*annulus) {
            ac.activation = parse_activation(annulus_kind, cone_beta);
            ac.threads = threads;
            if (ac.hidden == 0) throw UsageError("--hidden must be >= 1");
            const std::vector<TrialStats> rows{annulus_experiment(ac)};
            write_experiment(std::filesystem::path(out_dir), rows);
            out << summary_table(rows);
        } else if (*bench) {
            bc.activations = parse_activations(bench_kinds, cone_beta);
            bc.data_dir = bench_data;
            bc.threads = threads;
            const auto rows = subset_benchmark(bc);
            write_experiment(std::filesystem::path(out_dir), rows);
            out << summary_table(rows);
        } else if (*boundary) {
            if (model_path.empty() == analytic.empty()) throw UsageError("give exactly one of --model or --analytic");
            const auto bounds = parse_bounds(bounds_text);
            if (resolution < 2) throw UsageError("--resolution must be at least 2");
            const RegionGrid grid = analytic.empty()
                                        ? raster_regions(load(read_bytes(model_path)), bounds, resolution)
                                        : raster_regions(parse_analytic_neuron(analytic, cone_beta), bounds, resolution, tol);
            write_output(boundary_out, format == "pgm" ? grid_pgm(grid) : grid_csv(grid), out);
        } else if (*train_cmd) {
            const auto act = parse_activation(train_kind, cone_beta);
            std::vector<std::size_t> widths;
            for (const auto& w : split_list(hidden_text)) {
                const double v = parse_real(w, "--hidden");
                if (v < 1.0 || v != std::floor(v)) throw UsageError("--hidden widths must be positive integers");
                widths.push_back(static_cast<std::size_t>(v));
            }
            if (widths.empty()) throw UsageError("--hidden needs at least one width");
            if (tc.epochs == 0) throw UsageError("--epochs must be >= 1");
            auto data = load_dataset(train_data);
            std::vector<std::size_t> all{data.train.feature_count()};
            all.insert(all.end(), widths.begin(), widths.end());
            all.push_back(std::max(data.train.class_count, data.test.class_count));
            Rng rng(train_seed);
            auto net = Network::make(all, act, rng);
            const auto curve = train(net, data.train, data.test, tc, rng);
            const auto bytes = save(net);
            write_file_atomic(train_model, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
            if (!train_curve.empty()) write_file_atomic(train_curve, curve_csv(curve));
            out << "train_acc " << format_real(accuracy(net, data.train)) << "\ntest_acc "
                << format_real(curve.back().test_acc) << '\n';
        } else if (*eval_cmd) {
            const auto net = load(read_bytes(eval_model));
            const auto data = load_dataset(eval_data);
            out << "train_acc " << format_real(accuracy(net, data.train)) << "\ntest_acc "
                << format_real(accuracy(net, data.test)) << '\n';
        }
    } catch (const UsageError& e) {
        err << "conenet: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "conenet: " << e.what() << "\n";
        return kExitError;
    }
    return kExitOk;
}

}  // namespace conenet::cli
