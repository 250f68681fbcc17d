#include "qphase/cli.hpp"
#include "qphase/emit.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using qphase::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

struct Csv {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

Csv parse_csv(const std::string& text) {
    Csv csv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) csv.comments.push_back(line.substr(2));
        else if (csv.header.empty()) csv.header = split(line);
        else csv.rows.push_back(split(line));
    }
    return csv;
}

bool has_comment(const Csv& csv, const std::string& text) {
    for (const auto& c : csv.comments) {
        if (c == text) return true;
    }
    return false;
}

} // namespace

TEST(Cli, PaulThermalIsFlat) {
    const Result r = invoke({"paul", "--state", "thermal:beta=0.693", "--grid", "256"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Csv csv = parse_csv(r.out);
    EXPECT_EQ(csv.header, (std::vector<std::string>{"phi", "density"}));
    ASSERT_EQ(csv.rows.size(), 256u);
    for (const auto& row : csv.rows) EXPECT_NEAR(std::stod(row[1]), 0.1592, 1e-4);
    EXPECT_TRUE(has_comment(csv, "command=paul"));
    EXPECT_TRUE(has_comment(csv, "grid=256"));
    EXPECT_TRUE(has_comment(csv, "cutoff=39"));
}

TEST(Cli, RatioTableEchoesSeed) {
    const Result r = invoke({"table1", "--samples", "1000", "--seed", "42", "--phi", "0.3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Csv csv = parse_csv(r.out);
    EXPECT_EQ(csv.header, (std::vector<std::string>{"s", "eps", "phi", "mean", "max_dev", "n_samples", "seed"}));
    EXPECT_EQ(csv.rows.size(), 25u);
    EXPECT_TRUE(has_comment(csv, "seed=42"));
    EXPECT_TRUE(has_comment(csv, "samples=1000"));
    EXPECT_TRUE(has_comment(csv, "normalization=table"));
    for (const auto& row : csv.rows) EXPECT_EQ(row[6], "42");
}

TEST(Cli, RatioTableIndependentOfThreads) {
    const Result a = invoke({"table1", "--samples", "300", "--seed", "7"});
    const Result b = invoke({"table1", "--samples", "300", "--seed", "7", "--threads", "4"});
    const Result c = invoke({"table1", "--samples", "300", "--seed", "7"});
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out, c.out);
}

TEST(Cli, ChecksPass) {
    const Result r = invoke({"checks"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    const Csv csv = parse_csv(r.out);
    EXPECT_EQ(csv.header, (std::vector<std::string>{"name", "passed", "value", "threshold"}));
    EXPECT_GE(csv.rows.size(), 10u);
    for (const auto& row : csv.rows) EXPECT_EQ(row[1], "1") << row[0];
}

TEST(Cli, SchemasPerCommand) {
    struct Case {
        std::vector<std::string> args;
        std::vector<std::string> header;
        std::size_t rows;
    };
    const std::vector<Case> cases{
        {{"pb", "--state", "coherent:r=1,psi=0", "--s", "30", "--grid", "64"}, {"phi", "density"}, 64},
        {{"pb-discrete", "--state", "random:dim=3,seed=1", "--s", "4"}, {"t", "theta", "probability"}, 5},
        {{"amplified-pb", "--state", "fock:n=1", "--s", "10", "--eps", "0.1", "--grid", "32"}, {"phi", "density"}, 32},
        {{"amplify", "--state", "fock:n=0", "--kappa", "2", "--format", "csv"}, {"m", "n", "re", "im"}, 0},
        {{"attenuate", "--state", "fock:n=2", "--lambda", "0.5"}, {"m", "n", "re", "im"}, 9},
        {{"ratio", "--state", "random:dim=2,seed=5", "--s", "100", "--eps", "0.1"},
         {"s", "eps", "phi", "mean", "max_dev", "n_samples", "seed"}, 1},
        {{"fig1a", "--grid", "128"}, {"phi", "paul_r0.5", "pb_r0.5", "paul_r2", "pb_r2"}, 128},
        {{"fig1b"}, {"s_plus_1", "t", "phi", "ratio"}, 27},
        {{"nonlinear"}, {"s", "eps", "kappa", "closed_form", "numerical"}, 3},
    };
    for (const auto& c : cases) {
        const Result r = invoke(c.args);
        ASSERT_EQ(r.code, 0) << c.args[0] << ": " << r.err;
        const Csv csv = parse_csv(r.out);
        EXPECT_EQ(csv.header, c.header) << c.args[0];
        if (c.rows > 0) EXPECT_EQ(csv.rows.size(), c.rows) << c.args[0];
    }
}

TEST(Cli, AttenuatedFockStateIsBinomial) {
    const Csv csv = parse_csv(invoke({"attenuate", "--state", "fock:n=2", "--lambda", "0.5"}).out);
    // diag: (1/4, 1/2, 1/4)
    EXPECT_NEAR(std::stod(csv.rows[0][2]), 0.25, 1e-15);
    EXPECT_NEAR(std::stod(csv.rows[4][2]), 0.5, 1e-15);
    EXPECT_NEAR(std::stod(csv.rows[8][2]), 0.25, 1e-15);
}

TEST(Cli, RatioEchoesRandomSeed) {
    const Csv csv = parse_csv(invoke({"ratio", "--state", "random:dim=2,seed=5", "--s", "10000", "--eps", "0.1"}).out);
    ASSERT_EQ(csv.rows.size(), 1u);
    EXPECT_EQ(csv.rows[0][6], "5");
    EXPECT_NEAR(std::stod(csv.rows[0][3]), 1.0, 0.01);
}

TEST(Cli, JsonRoundTrip) {
    const Result csv_run = invoke({"fig1a", "--grid", "64"});
    const Result json_run = invoke({"fig1a", "--grid", "64", "--format", "json"});
    ASSERT_EQ(json_run.code, 0);
    const auto doc = nlohmann::json::parse(json_run.out);
    ASSERT_TRUE(doc.contains("meta"));
    ASSERT_TRUE(doc.contains("rows"));
    EXPECT_EQ(doc["meta"]["command"], "fig1a");
    EXPECT_EQ(doc["meta"]["terms"], 100);
    const Csv csv = parse_csv(csv_run.out);
    ASSERT_EQ(doc["rows"].size(), csv.rows.size());
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        for (std::size_t c = 0; c < csv.header.size(); ++c) {
            const double from_json = doc["rows"][i][csv.header[c]].get<double>();
            EXPECT_EQ(from_json, std::strtod(csv.rows[i][c].c_str(), nullptr));
        }
    }
}

TEST(Cli, EmitterSerialisesExactly) {
    qphase::Table t;
    t.add_meta("label", std::string("a,\"b\"\nc"));
    t.columns = {"x", "n", "name"};
    const double tricky = 0.1 + 0.2;
    t.rows.push_back({tricky, std::int64_t{-3}, std::string("q\"r")});
    t.rows.push_back({std::nan(""), std::int64_t{0}, std::string("")});
    std::ostringstream js;
    qphase::write_table(t, qphase::Format::json, js);
    const auto doc = nlohmann::json::parse(js.str());
    EXPECT_EQ(doc["rows"][0]["x"].get<double>(), tricky);
    EXPECT_EQ(doc["rows"][0]["n"].get<int>(), -3);
    EXPECT_EQ(doc["rows"][0]["name"], "q\"r");
    EXPECT_TRUE(doc["rows"][1]["x"].is_null());
    EXPECT_EQ(doc["meta"]["label"], "a,\"b\"\nc");

    std::ostringstream csv;
    qphase::write_table(t, qphase::Format::csv, csv);
    EXPECT_NE(csv.str().find("0.30000000000000004,-3,\"q\"\"r\""), std::string::npos);
    EXPECT_EQ(qphase::format_double(1.0 / 3.0), "0.33333333333333331");
    EXPECT_THROW(qphase::parse_format("xml"), std::invalid_argument);
}

TEST(Cli, WritesToFile) {
    const auto path = std::filesystem::temp_directory_path() / "qphase_cli_test.csv";
    const Result r = invoke({"nonlinear", "--out", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    EXPECT_EQ(buf.str(), invoke({"nonlinear"}).out);
    std::filesystem::remove(path);

    const Result bad = invoke({"nonlinear", "--out", "/nonexistent-dir/x.csv"});
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("/nonexistent-dir/x.csv"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    const std::vector<std::vector<std::string>> bad{
        {"frobnicate"},
        {},
        {"paul"},
        {"paul", "--state", "coherent:r=oops,psi=0"},
        {"paul", "--state", "squeezed:r=1"},
        {"paul", "--state", "thermal:beta=1", "--bogus", "3"},
        {"amplified-pb", "--state", "fock:n=1", "--s", "10", "--eps", "0"},
        {"amplified-pb", "--state", "fock:n=1", "--s", "10", "--eps", "-0.5"},
        {"amplify", "--state", "fock:n=1", "--kappa", "0.5"},
        {"attenuate", "--state", "fock:n=1", "--lambda", "1.5"},
        {"paul", "--state", "fock:n=1", "--format", "xml"},
        {"amplified-pb", "--state", "fock:n=1", "--s", "10", "--kappa", "2", "--normalization", "table"},
    };
    for (const auto& args : bad) {
        const Result r = invoke(args);
        EXPECT_EQ(r.code, 2) << (args.empty() ? "<none>" : args[0]) << " " << r.err;
        EXPECT_FALSE(r.err.empty());
    }
}

TEST(Cli, HelpExitsCleanly) {
    EXPECT_EQ(invoke({"--help"}).code, 0);
    EXPECT_EQ(invoke({"paul", "--help"}).code, 0);
}

TEST(Cli, TruncationWarningsAreEmitted) {
    const Result r = invoke({"paul", "--state", "coherent:r=3,psi=0", "--cutoff", "6", "--grid", "16"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Csv csv = parse_csv(r.out);
    bool warned = false;
    for (const auto& c : csv.comments) warned = warned || c.rfind("warning: state tail mass", 0) == 0;
    EXPECT_TRUE(warned);
}

TEST(Cli, IdenticalArgsGiveIdenticalBytes) {
    const std::vector<std::string> args{"amplified-pb", "--state", "random:dim=3,seed=9", "--s", "50", "--eps", "0.05",
                                        "--format", "json"};
    EXPECT_EQ(invoke(args).out, invoke(args).out);
}
