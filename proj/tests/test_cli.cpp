#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using conenet::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "conenet_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST(Curves, ConeOnThreePoints) {
    const auto r = invoke({"curves", "--kinds", "cone", "--zmin", "0", "--zmax", "2", "--steps", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "z,g_cone,dg_cone\n0,0,1\n1,1,0\n2,0,-1\n");
}

TEST(Curves, ParabolicConeAgreesWithConeAtSharedPoints) {
    const auto r =
        invoke({"curves", "--kinds", "cone,parabolic-cone", "--zmin", "0", "--zmax", "2", "--steps", "3"});
    ASSERT_EQ(r.code, 0);
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0], "z,g_cone,dg_cone,g_parabolic-cone,dg_parabolic-cone");
    EXPECT_EQ(rows[1], "0,0,1,0,2");
    EXPECT_EQ(rows[2], "1,1,0,1,0");
    EXPECT_EQ(rows[3], "2,0,-1,0,-2");
}

TEST(Curves, UnknownKindIsUsageErrorListingNames) {
    const auto r = invoke({"curves", "--kinds", "cone,bogus"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("parabolic-cone"), std::string::npos);
}

TEST(Curves, BadRangeIsUsageError) {
    EXPECT_EQ(invoke({"curves", "--zmin", "1", "--zmax", "0"}).code, 2);
    EXPECT_EQ(invoke({"curves", "--steps", "1"}).code, 2);
}

TEST(Usage, UnknownFlagsAndMissingSubcommand) {
    EXPECT_EQ(invoke({"curves", "--frobnicate", "1"}).code, 2);
    EXPECT_EQ(invoke({}).code, 2);
    EXPECT_EQ(invoke({"nonsense"}).code, 2);
    EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Xor, PrintsTableAndWritesFiles) {
    const auto dir = fresh_dir("xor");
    const auto r = invoke({"xor", "--kind", "cone", "--trials", "5", "--epochs", "300", "--out-dir", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 2u);
    std::istringstream row(rows[1]);
    std::string name;
    row >> name;
    EXPECT_EQ(name, "cone");
    int numbers = 0;
    for (double v; row >> v;) ++numbers;
    EXPECT_EQ(numbers, 5);
    EXPECT_TRUE(fs::exists(dir / "summary.csv"));
    EXPECT_TRUE(fs::exists(dir / "trials.csv"));
    for (int k = 0; k < 5; ++k) EXPECT_TRUE(fs::exists(dir / "curves" / ("cone_trial" + std::to_string(k) + ".csv")));
    EXPECT_EQ(lines(slurp(dir / "curves" / "cone_trial0.csv")).size(), 301u);
}

TEST(Xor, RerunsAreByteIdentical) {
    const auto a = fresh_dir("xor_a");
    const auto b = fresh_dir("xor_b");
    for (const auto& d : {a, b}) {
        ASSERT_EQ(invoke({"xor", "--trials", "3", "--epochs", "200", "--seed", "9", "--out-dir", d.string()}).code, 0);
    }
    EXPECT_EQ(slurp(a / "summary.csv"), slurp(b / "summary.csv"));
    EXPECT_EQ(slurp(a / "trials.csv"), slurp(b / "trials.csv"));
    EXPECT_EQ(slurp(a / "curves" / "cone_trial2.csv"), slurp(b / "curves" / "cone_trial2.csv"));
}

TEST(Annulus, RunsWithSmallBudget) {
    const auto dir = fresh_dir("annulus");
    const auto r = invoke({"annulus", "--kind", "parabolic-cone", "--hidden", "2", "--trials", "2", "--epochs", "20",
                           "--n-per-class", "50", "--out-dir", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(slurp(dir / "summary.csv")).size(), 2u);
}

TEST(Bench, MissingDataDirectoryExitsOneWithPath) {
    const auto dir = fresh_dir("bench");
    const auto r = invoke({"bench", "--data", "/no/such/cifar", "--out-dir", dir.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("/no/such/cifar"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "summary.csv"));
}

TEST(Boundary, AnalyticConeStripCsvAndPgmAgree) {
    const auto dir = fresh_dir("boundary");
    const auto csv_path = dir / "grid.csv";
    const auto pgm_path = dir / "grid.pgm";
    const std::vector<std::string> common{"boundary", "--analytic", "cone:1,0:0", "--bounds", "-1,3,-1,3",
                                          "--resolution", "101"};
    auto args = common;
    args.insert(args.end(), {"--format", "csv", "--out", csv_path.string()});
    ASSERT_EQ(invoke(args).code, 0);
    args = common;
    args.insert(args.end(), {"--format", "pgm", "--out", pgm_path.string()});
    ASSERT_EQ(invoke(args).code, 0);

    const auto rows = lines(slurp(csv_path));
    ASSERT_EQ(rows.size(), 101u);
    const auto pgm = slurp(pgm_path);
    const std::string header = "P5 101 101 255\n";
    ASSERT_EQ(pgm.substr(0, header.size()), header);
    ASSERT_EQ(pgm.size(), header.size() + 101 * 101);

    for (std::size_t r = 0; r < 101; ++r) {
        std::istringstream cells(rows[r]);
        std::string cell;
        for (std::size_t c = 0; c < 101; ++c) {
            ASSERT_TRUE(std::getline(cells, cell, ','));
            const int label = std::stoi(cell);
            // Pointwise oracle: x = -1 + 4c/100, positive iff 0 < x < 2.
            const double x = -1.0 + 4.0 * static_cast<double>(c) / 100.0;
            const int expected = (x > 0.0 && x < 2.0) ? 2 : (x == 0.0 || x == 2.0) ? 1 : 0;
            ASSERT_EQ(label, expected) << r << "," << c;
            const auto gray = static_cast<unsigned char>(pgm[header.size() + r * 101 + c]);
            ASSERT_EQ(gray, 255 * label / 2);
        }
    }
}

TEST(Boundary, ModelFileAndErrors) {
    const auto dir = fresh_dir("boundary_model");
    const auto model = dir / "xor.model";
    ASSERT_EQ(invoke({"train", "--dataset", "xor", "--kind", "parabolic-cone", "--hidden", "1", "--epochs", "300",
                      "--lr", "0.05", "--model", model.string()})
                  .code,
              0);
    const auto r = invoke({"boundary", "--model", model.string(), "--bounds", "-0.5,1.5,-0.5,1.5", "--resolution",
                           "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out).size(), 3u);

    const auto garbage = dir / "garbage.model";
    std::ofstream(garbage) << "not a model";
    EXPECT_EQ(invoke({"boundary", "--model", garbage.string()}).code, 1);
    EXPECT_EQ(invoke({"boundary", "--analytic", "cone:1,0:0", "--bounds", "3,1,0,1"}).code, 2);
    EXPECT_EQ(invoke({"boundary", "--analytic", "cone:1,0"}).code, 2);
    EXPECT_EQ(invoke({"boundary"}).code, 2);
}

TEST(Boundary, UsageErrorLeavesNoFile) {
    const auto dir = fresh_dir("boundary_usage");
    const auto out = dir / "grid.csv";
    EXPECT_EQ(invoke({"boundary", "--analytic", "cone:1,0:0", "--resolution", "1", "--out", out.string()}).code, 2);
    EXPECT_FALSE(fs::exists(out));
}

TEST(TrainEval, RoundTripThroughModelFile) {
    const auto dir = fresh_dir("train_eval");
    const auto model = dir / "annulus.model";
    const auto curve = dir / "curve.csv";
    const auto t = invoke({"train", "--dataset", "annulus", "--kind", "parabolic-cone", "--hidden", "2", "--epochs",
                           "100", "--lr", "0.05", "--model", model.string(), "--curve", curve.string()});
    ASSERT_EQ(t.code, 0) << t.err;
    EXPECT_EQ(lines(slurp(curve)).size(), 101u);
    const auto e = invoke({"eval", "--dataset", "annulus", "--model", model.string()});
    ASSERT_EQ(e.code, 0) << e.err;
    EXPECT_EQ(lines(e.out)[1], lines(t.out)[1]);  // identical test accuracy
}

TEST(TrainEval, CsvDatasetWithNormalization) {
    const auto dir = fresh_dir("train_csv");
    const auto data = dir / "points.csv";
    {
        std::ofstream out(data);
        out << "x,y,label\n";
        for (int i = 0; i < 60; ++i) out << i << "," << (i % 5) << "," << (i < 30 ? 0 : 1) << "\n";
    }
    const auto model = dir / "m.model";
    const std::vector<std::string> ds{"--dataset", "csv:" + data.string(), "--normalize", "--split", "0.75"};
    std::vector<std::string> train_args{"train", "--kind", "cone", "--hidden", "3", "--epochs", "200", "--lr", "0.05",
                                        "--model", model.string()};
    train_args.insert(train_args.end(), ds.begin(), ds.end());
    const auto t = invoke(train_args);
    ASSERT_EQ(t.code, 0) << t.err;
    std::vector<std::string> eval_args{"eval", "--model", model.string()};
    eval_args.insert(eval_args.end(), ds.begin(), ds.end());
    const auto e = invoke(eval_args);
    ASSERT_EQ(e.code, 0) << e.err;
    EXPECT_EQ(e.out, t.out);
}

TEST(Config, FileValuesApplyAndFlagsOverride) {
    const auto dir = fresh_dir("config");
    const auto cfg = dir / "run.ini";
    std::ofstream(cfg) << "[curves]\nkinds=\"parabolic-cone\"\nzmin=0\nzmax=2\nsteps=3\n";
    auto r = invoke({"--config", cfg.string(), "curves"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out)[0], "z,g_parabolic-cone,dg_parabolic-cone");
    EXPECT_EQ(lines(r.out).size(), 4u);
    r = invoke({"--config", cfg.string(), "curves", "--steps", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out).size(), 6u);

    const auto bad = dir / "bad.ini";
    std::ofstream(bad) << "[curves]\nunknown_key=3\n";
    EXPECT_EQ(invoke({"--config", bad.string(), "curves"}).code, 2);
}

TEST(Env, DefaultOutputDirectory) {
    const auto dir = fresh_dir("env_out");
    ::setenv("CONENET_OUT_DIR", dir.string().c_str(), 1);
    const auto r = invoke({"xor", "--trials", "1", "--epochs", "10"});
    ::unsetenv("CONENET_OUT_DIR");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "summary.csv"));
}
