#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "cli.hpp"
#include "hetfb/errors.hpp"

using namespace hetfb;
using namespace hetfb::cli;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "hetfb_cli_tests" / name;
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path)
{
    std::vector<std::vector<std::string>> rows;
    std::stringstream in(slurp(path));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        rows.push_back(cells);
    }
    return rows;
}

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "hetfb");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

// E[log2(1 + snr X)] for X the largest of k unit exponentials, integrated
// against its density.
double max_rate_oracle(double snr, int k)
{
    auto f = [&](double x) {
        const double q = std::exp(-x);
        return std::log2(1.0 + snr * x) * k * q * std::pow(1.0 - q, k - 1);
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, 0.0, std::numeric_limits<double>::infinity(), 20, 1e-13);
}

} // namespace

TEST_CASE("config layering and overrides")
{
    json doc = default_config();
    const RunConfig base = resolve_config(doc);
    CHECK(base.sys.num_rbs == 64);
    CHECK(base.sys.snr == doctest::Approx(10.0));
    CHECK_FALSE(base.impairments.has_value());

    apply_assignment(doc, "snr_db=20");
    apply_assignment(doc, "model=correlated");
    apply_assignment(doc, "clusters=[{\"eta\": 2, \"users\": 3}]");
    CHECK(doc.at("model") == "correlated");
    doc["model"] = "subband_fading";
    apply_assignment(doc, "alpha=0.9");
    const RunConfig cfg = resolve_config(doc);
    CHECK(cfg.sys.snr == doctest::Approx(100.0));
    CHECK(cfg.sys.clusters.size() == 1);
    REQUIRE(cfg.impairments.has_value());
    CHECK(cfg.impairments->delay_corr == 0.9);
    CHECK(cfg.impairments->est_error_var == 0.0);
    CHECK(cfg.resolved.at("alpha") == 0.9);

    CHECK_THROWS_AS(apply_assignment(doc, "snr"), ValidationError);
    CHECK_THROWS_AS(apply_assignment(doc, "=3"), ValidationError);
    CHECK_THROWS_AS(apply_assignment(doc, "nrbs=3"), ValidationError);
    CHECK_THROWS_AS(merge_config(doc, json::array({1}), "test"), ValidationError);

    json bad = default_config();
    bad["clusters"] = json::array({{{"eta", 1}, {"users", 2}, {"weight", 1}}});
    CHECK_THROWS_AS(resolve_config(bad), ValidationError);
    bad = default_config();
    bad["trials"] = 1;
    CHECK_THROWS_AS(resolve_config(bad), ValidationError);
    bad = default_config();
    bad["seed"] = -1;
    CHECK_THROWS_AS(resolve_config(bad), ValidationError);
    bad = default_config();
    bad["model"] = "rayleigh";
    CHECK_THROWS_AS(resolve_config(bad), ValidationError);
    bad = default_config();
    bad["beta1"] = 1.5;
    CHECK_THROWS_AS(resolve_config(bad), ValidationError);
    bad = default_config();
    bad["model"] = "correlated";
    bad["subcarriers_per_rb"] = 3;
    CHECK_THROWS_AS(resolve_config(bad), ValidationError);
}

TEST_CASE("list and range parsing")
{
    const auto s2 = parse_real_list("0:0.005:0.1");
    CHECK(s2.size() == 21);
    CHECK(s2.back() == doctest::Approx(0.1));
    const auto alpha = parse_real_list("0.9:0.005:0.99");
    CHECK(alpha.size() == 19);
    CHECK(alpha.back() == doctest::Approx(0.99));
    CHECK(parse_int_list("5:1:50").size() == 46);
    CHECK(parse_int_list("10,20,40") == std::vector<int>{10, 20, 40});
    CHECK_THROWS_AS(parse_real_list(""), ValidationError);
    CHECK_THROWS_AS(parse_real_list("1:0:2"), ValidationError);
    CHECK_THROWS_AS(parse_real_list("2:1:1"), ValidationError);
    CHECK_THROWS_AS(parse_real_list("1,x"), ValidationError);
    CHECK_THROWS_AS(parse_int_list("1.5"), ValidationError);
}

TEST_CASE("cell formatting")
{
    CHECK(format_cell(Cell{1.0 / 3.0}) == "0.333333333333");
    CHECK(format_cell(Cell{123456789.123456789}) == "123456789.123");
    CHECK(format_cell(Cell{-0.0}) == "0");
    CHECK(format_cell(Cell{1e-20}) == "1e-20");
    CHECK(format_cell(Cell{42LL}) == "42");
    CHECK(format_cell(Cell{std::string("joint")}) == "joint");
}

TEST_CASE("emit writes data files and one manifest")
{
    const auto dir = scratch_dir("emit");
    Invocation inv;
    inv.command = "analytic";
    inv.stem = "analytic";
    inv.config = default_config();
    inv.seed = 12345678901234ULL;
    inv.timestamp = "2000-01-01T00:00:00Z";

    CHECK_THROWS_AS(emit({}, Format::csv, dir, inv), ValidationError);
    Table empty("sum_rate", {"K", "sum_rate"});
    CHECK_THROWS_AS(emit({empty}, Format::csv, dir, inv), ValidationError);
    Table unknown("sum_rate", {"K", "volume"});
    unknown.add({1LL, 2.0});
    CHECK_THROWS_AS(emit({unknown}, Format::csv, dir, inv), std::logic_error);
    CHECK_THROWS_AS(empty.add({1LL}), std::logic_error);

    Table t("sum_rate", {"K", "M", "sum_rate", "std_error"});
    const std::vector<double> rates{std::acos(-1.0), 1.0 / 7.0, 2.5e-13};
    for (std::size_t i = 0; i < rates.size(); ++i) {
        t.add({static_cast<long long>(i + 1), 2LL, rates[i], rates[i] / 100.0});
    }
    const auto e = emit({t}, Format::csv, dir, inv);
    REQUIRE(e.data_files.size() == 1);
    const auto rows = read_csv(e.data_files[0]);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == t.columns);
    for (const auto& name : rows[0]) {
        CHECK_FALSE(column_description(name).empty());
    }
    for (std::size_t i = 0; i < rates.size(); ++i) {
        CHECK(std::stoll(rows[i + 1][0]) == static_cast<long long>(i + 1));
        const double back = std::stod(rows[i + 1][2]);
        CHECK(std::abs(back - rates[i]) <= 5e-12 * std::abs(rates[i]));
        CHECK(format_cell(Cell{back}) == rows[i + 1][2]);
    }

    const json manifest = json::parse(slurp(e.manifest));
    CHECK(manifest.at("seed").get<std::uint64_t>() == inv.seed);
    CHECK(manifest.at("config") == inv.config);
    REQUIRE(manifest.at("outputs").size() == 1);
    CHECK(manifest.at("outputs")[0].at("path") == e.data_files[0].filename().string());
    CHECK(manifest.at("outputs")[0].at("columns").size() == 4);

    // JSON data carries the same 12-digit values and names its manifest
    const auto j = emit({t}, Format::json, dir, inv);
    const json data = json::parse(slurp(j.data_files[0]));
    CHECK(data.at("manifest") == e.manifest.filename().string());
    CHECK(format_cell(Cell{data.at("rows")[1].at("sum_rate").get<double>()}) == rows[2][2]);

    Table second("cross_validation", {"quantity", "z"});
    second.add({std::string("sum_rate"), 0.5});
    const auto two = emit({t, second}, Format::csv, dir, inv);
    CHECK(two.data_files[0].filename() == "analytic_sum_rate.csv");
    CHECK(two.data_files[1].filename() == "analytic_cross_validation.csv");
}

TEST_CASE("full-feedback analytic rate equals the single-cluster maximum rate")
{
    const auto dir = scratch_dir("full");
    const auto r = invoke({"analytic", "--full-feedback", "--users", "1,4,13,20", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto rows = read_csv(dir / "analytic.csv");
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == std::vector<std::string>{"K", "M", "sum_rate", "full_feedback_rate"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][1] == "16");
        CHECK(rows[i][2] == rows[i][3]);
        const double oracle = max_rate_oracle(10.0, std::stoi(rows[i][0]));
        CHECK(std::abs(std::stod(rows[i][2]) - oracle) <= 1e-9);
    }
}

TEST_CASE("figure defaults follow the captions")
{
    const auto etas = [](const json& doc) {
        std::vector<int> out;
        for (const auto& c : doc.at("clusters")) {
            out.push_back(c.at("eta").get<int>());
        }
        return out;
    };
    for (const auto& id : figure_ids()) {
        CAPTURE(id);
        const json doc = figure_config(id);
        CHECK(doc.at("snr_db") == 10.0);
        CHECK_NOTHROW(resolve_config(doc));
    }
    const json f1 = figure_config("1");
    CHECK(f1.at("model") == "correlated");
    CHECK(f1.at("subcarriers") == 256);
    CHECK(f1.at("n_rbs") == 32);
    CHECK(f1.at("taps") == 16);
    CHECK(f1.at("delay_spread") == 4.0);
    for (const char* id : {"3", "4a", "4b"}) {
        CHECK(figure_config(id).at("n_rbs") == 64);
        CHECK(etas(figure_config(id)) == std::vector<int>{1, 4});
    }
    for (const char* id : {"5", "8"}) {
        CHECK(etas(figure_config(id)) == std::vector<int>{1, 2, 4, 8});
    }
    for (const char* id : {"3", "6", "8"}) {
        CHECK(figure_config(id).at("alpha") == 0.98);
        CHECK(figure_config(id).at("est_err_var") == 0.01);
    }
    const json f3 = figure_config("3");
    CHECK(f3.at("clusters")[0].at("users") == 10);
    CHECK(f3.at("clusters")[1].at("users") == 10);
    const json f7 = figure_config("7");
    CHECK(f7.at("clusters")[0].at("users") == 10);
    CHECK_FALSE(f7.contains("alpha"));
    CHECK_THROWS_AS(figure_config("2"), ValidationError);
}

TEST_CASE("figure 4a table")
{
    const auto dir = scratch_dir("fig4a");
    const auto r = invoke({"figure", "4a", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto rows = read_csv(dir / "figure_4a.csv");
    REQUIRE(rows.size() == 1 + 46 * 2);
    CHECK(rows[0] == std::vector<std::string>{"K", "gamma", "M_exact", "M_approx"});
    CHECK(rows[1][0] == "5");
    CHECK(rows[1][1] == "0.9");
    CHECK(rows[2][1] == "0.99");
    CHECK(rows.back()[0] == "50");
    const json manifest = json::parse(slurp(dir / "figure_4a.manifest.json"));
    CHECK(manifest.at("command") == "figure 4a");
    CHECK(manifest.at("config").at("n_rbs") == 64);
}

TEST_CASE("simulate is reproducible and reports its seed")
{
    const auto a = scratch_dir("sim_a");
    const auto b = scratch_dir("sim_b");
    for (const auto& dir : {a, b}) {
        const auto r = invoke({"simulate", "--trials", "1000", "--seed", "7", "--set", "workers=2", "--set",
                               "alpha=0.98", "--set", "est_err_var=0.01", "--out", dir.string()});
        REQUIRE(r.code == 0);
    }
    CHECK(slurp(a / "simulate.csv") == slurp(b / "simulate.csv"));
    const json manifest = json::parse(slurp(a / "simulate.manifest.json"));
    CHECK(manifest.at("seed") == 7);
    CHECK(manifest.at("config").at("trials") == 1000);
    const auto rows = read_csv(a / "simulate.csv");
    CHECK(rows[0] == std::vector<std::string>{"quantity", "estimate", "std_error", "trials"});
    CHECK(rows.size() == 8);

    const auto c = scratch_dir("sim_c");
    REQUIRE(invoke({"simulate", "--trials", "1000", "--seed", "7", "--set", "workers=1", "--set", "alpha=0.98",
                    "--set", "est_err_var=0.01", "--out", c.string()})
                .code == 0);
    CHECK(slurp(a / "simulate.csv") == slurp(c / "simulate.csv"));
}

TEST_CASE("error records and exit codes")
{
    const auto dir = scratch_dir("errors");
    auto r = invoke({"analytic", "--set", "best_m=0", "--out", dir.string()});
    CHECK(r.code == validation_failure);
    const json rec = json::parse(r.err);
    CHECK(rec.at("error") == "validation");
    CHECK(rec.at("exit_code") == 2);
    CHECK(r.out.empty());

    r = invoke({"figure", "9"});
    CHECK(r.code == validation_failure);
    r = invoke({"analytic", "--betas", "0.5", "--out", dir.string()});
    CHECK(r.code == validation_failure);
    r = invoke({"figure", "4a", "--with-simulation", "--out", dir.string()});
    CHECK(r.code == validation_failure);
    r = invoke({"analytic", "--format", "xml", "--out", dir.string()});
    CHECK(r.code == validation_failure);
    r = invoke({"simulate", "--set", "model=correlated", "--set", "n_rbs=32", "--set", "best_m=1", "--set",
                "alpha=0.9", "--trials", "10", "--out", dir.string()});
    CHECK(r.code == validation_failure);
    r = invoke({"min-m", "--gammas", "1.5", "--out", dir.string()});
    CHECK(r.code == validation_failure);

    const auto blocked = dir / "file";
    std::filesystem::create_directories(dir);
    std::ofstream(blocked) << "x";
    r = invoke({"analytic", "--out", (blocked / "sub").string()});
    CHECK(r.code == io_failure);
    CHECK(json::parse(r.err).at("error") == "io");
}

TEST_CASE("goodput tables over a beta grid")
{
    const auto dir = scratch_dir("betas");
    const auto r = invoke({"analytic", "--set", "alpha=0.98", "--set", "est_err_var=0.01", "--set", "best_m=16",
                           "--set", "clusters=[{\"eta\":1,\"users\":10}]", "--betas", "0.1:0.2:0.9", "--out",
                           dir.string()});
    REQUIRE(r.code == 0);
    const auto rows = read_csv(dir / "analytic.csv");
    REQUIRE(rows.size() == 6);
    CHECK(rows[0][2] == "beta0");
    CHECK(rows[1][2] == "1");
    CHECK(rows[1][3] == "0.1");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(std::stod(rows[i][4]) > 0.0);
        CHECK(std::stod(rows[i][5]) >= 0.0);
    }
}
