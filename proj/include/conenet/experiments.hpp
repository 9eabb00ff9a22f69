#pragma once

// Seeded multi-trial training. Trial k of an experiment uses seed base_seed + k
// for both weight initialization and minibatch shuffling, so (config, base_seed)
// fixes every reported number. Trials may run on several threads; each owns its
// network, optimizer and generator, and results are stored by trial index.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "conenet/activations.hpp"
#include "conenet/data.hpp"
#include "conenet/error.hpp"
#include "conenet/network.hpp"
#include "conenet/optim.hpp"
#include "conenet/rng.hpp"
#include "conenet/stats.hpp"

namespace conenet {

enum class Optimizer { Adam, Sgd };

struct TrainConfig {
    std::size_t epochs = 30;
    /// 0 means full batch.
    std::size_t batch_size = 128;
    Optimizer optimizer = Optimizer::Adam;
    AdamConfig adam;  // adam.lr is also the SGD learning rate
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;  // sample-weighted mean of the minibatch losses seen during the epoch
    double train_acc = 0.0;   // accuracy of those same minibatch forward passes
    double test_acc = 0.0;    // after the epoch's last update
};

inline double accuracy(const Network& net, const Dataset& ds) {
    if (ds.size() == 0) return 0.0;
    const auto predicted = predict_classes(net, ds.features);
    std::size_t correct = 0;
    for (std::size_t j = 0; j < predicted.size(); ++j) correct += predicted[j] == ds.labels[j];
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

/// Trains `net` in place and returns one record per epoch. Throws
/// TrainingDivergedError when a loss or gradient turns non-finite.
inline std::vector<EpochRecord> train(Network& net, const Dataset& train_set, const Dataset& test_set,
                                      const TrainConfig& cfg, Rng& rng) {
    if (cfg.epochs == 0) throw ValidationError("epochs must be >= 1");
    if (train_set.size() == 0) throw ValidationError("training set is empty");
    if (train_set.feature_count() != net.input_dim() || train_set.class_count > net.class_count()) {
        throw DimensionError("dataset does not fit the network");
    }
    const std::size_t n = train_set.size();
    const std::size_t batch = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
    const bool full_batch = batch == n;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Full-batch training never reorders, so its data matrix is built once.
    const Matrix full_onehot = full_batch ? one_hot(train_set.labels, net.class_count()) : Matrix();

    std::optional<Adam> adam;
    if (cfg.optimizer == Optimizer::Adam) adam.emplace(cfg.adam);

    std::vector<EpochRecord> curve;
    curve.reserve(cfg.epochs);
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (!full_batch) rng.shuffle(std::span<std::size_t>(order));
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t count = std::min(batch, n - start);
            LossAndGrads lg;
            std::vector<std::size_t> labels;
            try {
                if (full_batch) {
                    lg = loss_and_grads(net, train_set.features, full_onehot);
                } else {
                    const std::span<const std::size_t> idx(order.data() + start, count);
                    labels.reserve(count);
                    for (auto i : idx) labels.push_back(train_set.labels[i]);
                    lg = loss_and_grads(net, train_set.features.select_cols(idx), one_hot(labels, net.class_count()));
                }
            } catch (const NonFiniteLayerError& e) {
                throw TrainingDivergedError("forward pass blew up in epoch " + std::to_string(epoch), e.layer());
            }
            if (!std::isfinite(lg.loss)) throw TrainingDivergedError("non-finite loss", net.layers().size() - 1);
            loss_sum += lg.loss * static_cast<double>(count);
            const auto predicted = argmax_columns(lg.trace.probabilities);
            const auto& truth = full_batch ? train_set.labels : labels;
            for (std::size_t j = 0; j < count; ++j) correct += predicted[j] == truth[j];

            if (adam) {
                adam->step(net, lg.grads);
            } else {
                sgd_step(net, lg.grads, cfg.adam.lr);
            }
        }
        double test_acc = 0.0;
        try {
            test_acc = accuracy(net, test_set);
        } catch (const NonFiniteLayerError& e) {
            throw TrainingDivergedError("test evaluation blew up in epoch " + std::to_string(epoch), e.layer());
        }
        curve.push_back(EpochRecord{epoch, loss_sum / static_cast<double>(n),
                                    static_cast<double>(correct) / static_cast<double>(n), test_acc});
    }
    return curve;
}

struct ExperimentConfig {
    std::string name;
    std::vector<std::size_t> hidden_widths{10};
    Activation activation{Kind::Cone};
    TrainConfig train;
    InitOptions init;
    std::size_t trials = 5;
    std::uint64_t base_seed = 0;
    /// 0 picks std::thread::hardware_concurrency().
    unsigned threads = 1;

    void check() const {
        if (trials == 0) throw ValidationError("trial count must be >= 1");
        if (train.epochs == 0) throw ValidationError("epochs must be >= 1");
        if (hidden_widths.empty()) throw ValidationError("need at least one hidden layer");
        for (auto w : hidden_widths) {
            if (w == 0) throw ValidationError("layer widths must be positive");
        }
        validate(activation);
    }
};

struct TrialResult {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string failure;
    double test_accuracy = 0.0;
    std::vector<EpochRecord> curve;
    Network network;
};

struct TrialStats {
    std::string name;
    Activation activation;
    std::vector<TrialResult> trials;
    /// Over the non-failed trials; absent if every trial failed.
    std::optional<Summary> summary;

    [[nodiscard]] std::vector<double> accuracies() const {
        std::vector<double> out;
        for (const auto& t : trials) {
            if (!t.failed) out.push_back(t.test_accuracy);
        }
        return out;
    }
    [[nodiscard]] std::size_t failed_count() const {
        return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const auto& t) { return t.failed; }));
    }
};

inline TrialResult run_trial(const ExperimentConfig& cfg, const Dataset& train_set, const Dataset& test_set,
                             std::size_t index) {
    TrialResult result;
    result.index = index;
    result.seed = cfg.base_seed + index;
    Rng rng(result.seed);
    std::vector<std::size_t> widths{train_set.feature_count()};
    widths.insert(widths.end(), cfg.hidden_widths.begin(), cfg.hidden_widths.end());
    widths.push_back(train_set.class_count);
    result.network = Network::make(widths, cfg.activation, rng, cfg.init);
    try {
        result.curve = train(result.network, train_set, test_set, cfg.train, rng);
        result.test_accuracy = result.curve.back().test_acc;
    } catch (const TrainingDivergedError& e) {
        result.failed = true;
        result.failure = e.what();
    }
    return result;
}

inline TrialStats run_trials(const ExperimentConfig& cfg, const Dataset& train_set, const Dataset& test_set) {
    cfg.check();
    train_set.check();
    test_set.check();
    TrialStats stats{cfg.name, cfg.activation, std::vector<TrialResult>(cfg.trials), std::nullopt};

    unsigned threads = cfg.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : cfg.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.trials));
    if (threads <= 1) {
        for (std::size_t k = 0; k < cfg.trials; ++k) stats.trials[k] = run_trial(cfg, train_set, test_set, k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(threads);
        {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t) {
                pool.emplace_back([&, t] {
                    try {
                        for (std::size_t k = next++; k < cfg.trials; k = next++) {
                            stats.trials[k] = run_trial(cfg, train_set, test_set, k);
                        }
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                });
            }
        }
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    const auto acc = stats.accuracies();
    if (!acc.empty()) stats.summary = summarize(acc);
    return stats;
}

// ---------------------------------------------------------------------------
// Experiment designs
// ---------------------------------------------------------------------------

struct XorConfig {
    Activation activation{Kind::Cone};
    std::size_t trials = 5;
    std::size_t epochs = 5000;
    /// Large on purpose: from about half of all initializations the four points fall on one
    /// side of the cone kink, where the model is linear and plain steps settle at loss ln 2.
    double lr = 1.0;
    InitOptions init;
    std::uint64_t base_seed = 1;
    unsigned threads = 1;
};

/// 2 inputs -> one hidden unit of the given activation -> 2-class softmax, full-batch Adam.
inline TrialStats xor_experiment(const XorConfig& xc) {
    ExperimentConfig cfg;
    cfg.name = "xor";
    cfg.hidden_widths = {1};
    cfg.activation = xc.activation;
    cfg.train.epochs = xc.epochs;
    cfg.train.batch_size = 0;
    cfg.train.adam.lr = xc.lr;
    cfg.init = xc.init;
    cfg.trials = xc.trials;
    cfg.base_seed = xc.base_seed;
    cfg.threads = xc.threads;
    const auto ds = make_xor();
    return run_trials(cfg, ds, ds);
}

struct AnnulusConfig {
    Activation activation{Kind::Cone};
    std::size_t hidden = 2;
    std::size_t trials = 5;
    std::size_t epochs = 500;
    double lr = 0.01;
    std::size_t batch_size = 0;
    InitOptions init;
    AnnulusSpec data;
    std::uint64_t data_seed = 7;
    std::uint64_t base_seed = 1;
    unsigned threads = 1;
};

/// The test set is a second, independently seeded draw of the same distribution.
inline std::pair<Dataset, Dataset> annulus_datasets(const AnnulusConfig& ac) {
    return {make_annulus(ac.data, ac.data_seed), make_annulus(ac.data, ac.data_seed + 0x9E3779B97F4A7C15ULL)};
}

/// 2 inputs -> `hidden` units -> 2-class softmax.
inline TrialStats annulus_experiment(const AnnulusConfig& ac) {
    if (ac.hidden == 0) throw ValidationError("hidden width must be >= 1");
    ExperimentConfig cfg;
    cfg.name = "annulus";
    cfg.hidden_widths = {ac.hidden};
    cfg.activation = ac.activation;
    cfg.train.epochs = ac.epochs;
    cfg.train.batch_size = ac.batch_size;
    cfg.train.adam.lr = ac.lr;
    cfg.init = ac.init;
    cfg.trials = ac.trials;
    cfg.base_seed = ac.base_seed;
    cfg.threads = ac.threads;
    const auto [train_set, test_set] = annulus_datasets(ac);
    return run_trials(cfg, train_set, test_set);
}

struct BenchConfig {
    std::filesystem::path data_dir;
    std::vector<Activation> activations{Kind::ReLU, Kind::LeakyReLU, Kind::Cone, Kind::ParabolicCone};
    std::size_t width = 10;
    std::size_t train_per_class = 500;
    std::size_t test_per_class = 100;
    std::size_t epochs = 30;
    double lr = 1e-4;
    std::size_t batch_size = 128;
    std::size_t trials = 5;
    std::uint64_t base_seed = 1;
    unsigned threads = 1;
};

/// One TrialStats per requested activation; the MLP is 3072 -> width -> 10.
/// The subset is the first train_per_class / test_per_class images of each class
/// in file order.
inline std::vector<TrialStats> subset_benchmark(const BenchConfig& bc) {
    if (bc.activations.empty()) throw ValidationError("no activations requested");
    const auto data = load_cifar10_dir(bc.data_dir, bc.train_per_class, bc.test_per_class);
    std::vector<TrialStats> table;
    for (const auto& act : bc.activations) {
        ExperimentConfig cfg;
        cfg.name = "cifar10-subset";
        cfg.hidden_widths = {bc.width};
        cfg.activation = act;
        cfg.train.epochs = bc.epochs;
        cfg.train.batch_size = bc.batch_size;
        cfg.train.adam.lr = bc.lr;
        cfg.trials = bc.trials;
        cfg.base_seed = bc.base_seed;
        cfg.threads = bc.threads;
        table.push_back(run_trials(cfg, data.train, data.test));
    }
    return table;
}

}  // namespace conenet
