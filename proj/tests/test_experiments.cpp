#include <gtest/gtest.h>

#include <cmath>

#include "conenet/experiments.hpp"
#include "conenet/report.hpp"
#include "conenet/stats.hpp"

using namespace conenet;

TEST(Summarize, FiveValues) {
    const double acc[] = {0.3, 0.1, 0.5, 0.2, 0.4};
    const auto s = summarize(acc);
    EXPECT_NEAR(s.mean, 0.3, 1e-15);
    EXPECT_EQ(s.median, 0.3);
    EXPECT_EQ(s.best, 0.5);
    EXPECT_EQ(s.worst, 0.1);
    EXPECT_NEAR(s.std_dev, std::sqrt(0.02), 1e-15);  // population divisor
}

TEST(Summarize, SingleValueAndEvenCount) {
    const double one[] = {0.7};
    EXPECT_EQ(summarize(one).std_dev, 0.0);
    const double even[] = {0.9, 0.1, 0.5, 0.3};
    EXPECT_DOUBLE_EQ(summarize(even).median, 0.4);
    EXPECT_THROW(summarize(std::span<const double>{}), ValidationError);
}

TEST(Summarize, OrderInvariants) {
    Rng rng(1);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> v(1 + rng.below(9));
        for (double& x : v) x = rng.uniform();
        const auto s = summarize(v);
        ASSERT_LE(s.worst, s.median);
        ASSERT_LE(s.median, s.best);
        ASSERT_LE(s.worst, s.mean + 1e-15);
        ASSERT_LE(s.mean, s.best + 1e-15);
        ASSERT_GE(s.std_dev, 0.0);
    }
}

TEST(Train, CurveHasOneRecordPerEpochAndLossFalls) {
    AnnulusConfig ac;
    const auto [train_set, test_set] = annulus_datasets(ac);
    Rng rng(3);
    const std::size_t widths[] = {2, 2, 2};
    auto net = Network::make(widths, Activation(Kind::ParabolicCone), rng);
    TrainConfig cfg;
    cfg.epochs = 40;
    cfg.batch_size = 50;
    cfg.adam.lr = 0.01;
    const auto curve = train(net, train_set, test_set, cfg, rng);
    ASSERT_EQ(curve.size(), 40u);
    EXPECT_EQ(curve.front().epoch, 1u);
    double first = 0, last = 0;
    for (int i = 0; i < 5; ++i) {
        first += curve[i].train_loss;
        last += curve[35 + i].train_loss;
    }
    EXPECT_LT(last, first);
}

TEST(Train, SgdOptionMovesParameters) {
    const auto ds = make_xor();
    Rng rng(1);
    const std::size_t widths[] = {2, 2, 2};
    auto net = Network::make(widths, Activation(Kind::Tanh), rng);
    const auto before = net;
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 0;
    cfg.optimizer = Optimizer::Sgd;
    cfg.adam.lr = 0.1;
    train(net, ds, ds, cfg, rng);
    EXPECT_NE(net, before);
}

TEST(Train, DivergenceIsReported) {
    const auto ds = make_xor();
    // Huge weights push LiSHT outputs to overflow.
    Network net({DenseLayer{Matrix{{1e200, 1e200}}, Matrix{{0}}, Kind::LiSHT},
                 DenseLayer{Matrix{{1e200}, {-1e200}}, Matrix(2, 1), Kind::Identity}});
    Rng rng(1);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 0;
    EXPECT_THROW(train(net, ds, ds, cfg, rng), TrainingDivergedError);
}

TEST(RunTrials, SeedsAndDeterminism) {
    ExperimentConfig cfg;
    cfg.hidden_widths = {3};
    cfg.activation = Kind::Cone;
    cfg.train.epochs = 20;
    cfg.train.batch_size = 0;
    cfg.train.adam.lr = 0.05;
    cfg.trials = 3;
    cfg.base_seed = 40;
    const auto ds = make_xor();
    const auto a = run_trials(cfg, ds, ds);
    const auto b = run_trials(cfg, ds, ds);
    ASSERT_EQ(a.trials.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(a.trials[k].seed, 40 + k);
        EXPECT_EQ(a.trials[k].network, b.trials[k].network);
    }
    EXPECT_EQ(summary_csv(std::span(&a, 1)), summary_csv(std::span(&b, 1)));
    EXPECT_EQ(*a.summary, summarize(a.accuracies()));
}

TEST(RunTrials, ThreadedMatchesSerial) {
    AnnulusConfig ac;
    ac.epochs = 30;
    ac.trials = 4;
    ac.threads = 1;
    const auto serial = annulus_experiment(ac);
    ac.threads = 3;
    const auto threaded = annulus_experiment(ac);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(serial.trials[k].network, threaded.trials[k].network);
        EXPECT_EQ(serial.trials[k].test_accuracy, threaded.trials[k].test_accuracy);
    }
}

TEST(RunTrials, AllDivergedLeavesNoSummary) {
    ExperimentConfig cfg;
    cfg.hidden_widths = {1};
    cfg.activation = Kind::ParabolicCone;
    cfg.train.epochs = 50;
    cfg.train.batch_size = 0;
    cfg.train.optimizer = Optimizer::Sgd;
    cfg.train.adam.lr = 1e6;  // blows up in a handful of steps
    cfg.trials = 2;
    const auto ds = make_xor();
    const auto stats = run_trials(cfg, ds, ds);
    EXPECT_EQ(stats.failed_count(), 2u);
    EXPECT_FALSE(stats.summary.has_value());
    EXPECT_NE(summary_csv(std::span(&stats, 1)).find(",nan,nan,nan,nan,nan,2,2"), std::string::npos);
    EXPECT_NE(trials_csv(std::span(&stats, 1)).find("diverged"), std::string::npos);
}

TEST(RunTrials, RejectsInvalidConfig) {
    ExperimentConfig cfg;
    cfg.trials = 0;
    const auto ds = make_xor();
    EXPECT_THROW(run_trials(cfg, ds, ds), ValidationError);
    cfg.trials = 1;
    cfg.train.epochs = 0;
    EXPECT_THROW(run_trials(cfg, ds, ds), ValidationError);
    cfg.train.epochs = 1;
    cfg.hidden_widths = {0};
    EXPECT_THROW(run_trials(cfg, ds, ds), ValidationError);
}

TEST(XorExperiment, ReluNeverSolvesXor) {
    XorConfig xc;
    xc.activation = Kind::ReLU;
    xc.epochs = 1000;
    xc.trials = 5;
    const auto stats = xor_experiment(xc);
    EXPECT_LE(stats.summary->best, 0.75);
}

TEST(BenchExperiment, MissingDataIsIoError) {
    BenchConfig bc;
    bc.data_dir = "/nonexistent/cifar-dir";
    EXPECT_THROW(subset_benchmark(bc), IoError);
}

TEST(Report, ShortestRoundTripFormatting) {
    EXPECT_EQ(format_real(0.1), "0.1");
    EXPECT_EQ(format_real(1.0), "1");
    EXPECT_EQ(format_real(-2.5e-7), "-2.5e-07");
    const double v = 0.1 + 0.2;
    EXPECT_EQ(std::stod(format_real(v)), v);
}

TEST(Report, CurveCsvLayout) {
    const EpochRecord rows[] = {{1, 0.5, 0.25, 0.75}, {2, 0.25, 1.0, 1.0}};
    EXPECT_EQ(curve_csv(rows), "epoch,train_loss,train_acc,test_acc\n1,0.5,0.25,0.75\n2,0.25,1,1\n");
}

TEST(Report, PgmGrayLevels) {
    const RegionGrid grid{1, 3, 3, {0, 1, 2}};
    const auto pgm = grid_pgm(grid);
    EXPECT_EQ(pgm.substr(0, 11), "P5 3 1 255\n");
    EXPECT_EQ(static_cast<unsigned char>(pgm[11]), 0);
    EXPECT_EQ(static_cast<unsigned char>(pgm[12]), 127);
    EXPECT_EQ(static_cast<unsigned char>(pgm[13]), 255);
}
