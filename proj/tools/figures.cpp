#include <cmath>

#include "cli.hpp"
#include "commands_support.hpp"
#include "hetfb/analytic.hpp"
#include "hetfb/errors.hpp"

namespace hetfb::cli {

using nlohmann::json;

namespace {

json clusters_json(std::initializer_list<int> etas, int users_each)
{
    json out = json::array();
    for (int eta : etas) {
        out.push_back({{"eta", eta}, {"users", users_each}});
    }
    return out;
}

long long ll(int x)
{
    return x;
}

// Figure grids. Only the swept quantities are fixed here; everything else
// comes from the layered config.
const std::vector<int> fig1_subbands{1, 2, 4};
const std::vector<int> fig1_best_ms{2, 4};
const std::vector<double> fig3_snr_db{10.0, 20.0};
const std::vector<int> fig3_best_ms{2, 4, 16};
const std::vector<double> fig4_gammas{0.9, 0.99};
const std::vector<int> fig4b_users{10, 20, 30, 40, 50};
const std::vector<int> fig5_best_ms{2, 4};
const std::vector<int> fig5_homogeneous{1, 8};
const std::vector<int> fig6_users{10, 20, 40};
constexpr double fig6_beta0_scale = 10.0;
constexpr double fig8_gamma = 0.99;

std::vector<int> int_range(int first, int step, int last)
{
    std::vector<int> out;
    for (int k = first; k <= last; k += step) {
        out.push_back(k);
    }
    return out;
}

CommandResult figure1(const RunConfig& cfg)
{
    if (cfg.model != montecarlo::ChannelModel::correlated) {
        throw ValidationError("figure 1 uses the correlated channel model");
    }
    const auto users = int_range(2, 2, 30);
    const auto pts = montecarlo::correlated_sum_rate_sweep(cfg.correlated, cfg.sys.num_rbs, cfg.sys.snr,
                                                           fig1_subbands, fig1_best_ms, users, cfg.trials,
                                                           cfg.seed, cfg.workers);
    Table t{"sum_rate", {"eta", "M", "K", "sum_rate", "std_error", "trials"}};
    for (const auto& p : pts) {
        t.add({ll(p.subband_size), ll(p.best_m), ll(p.users), p.rate.mean, p.rate.se,
               static_cast<long long>(p.rate.trials)});
    }
    t.metadata = {{"x", "K"}, {"y", "sum_rate"}, {"group_by", {"eta", "M"}}};
    CommandResult r;
    r.tables.push_back(std::move(t));
    r.options = {{"eta", fig1_subbands}, {"M", fig1_best_ms}, {"K", users}};
    return r;
}

CommandResult figure3(const RunConfig& cfg)
{
    require_subband_fading(cfg);
    const ImpairmentParams& imp = require_impairments(cfg, "figure 3");
    const auto betas = parse_real_list("0.01:0.01:0.99");
    Table t{"goodput", {"snr_db", "M", "method", "beta1", "goodput"}};
    // beta1 runs where the Jensen curve is a guaranteed upper bound
    nlohmann::json concave = nlohmann::json::object();
    for (double snr_db : fig3_snr_db) {
        nlohmann::json runs = nlohmann::json::array();
        for (const auto& run : goodput::jensen_concavity_region(imp, db_to_linear(snr_db))) {
            runs.push_back({run.lo, run.hi});
        }
        concave[format_cell(snr_db)] = runs;
        SystemConfig s = cfg.sys;
        s.snr = db_to_linear(snr_db);
        for (int m : fig3_best_ms) {
            s.base_best_m = m;
            s.validate();
            for (double b : betas) {
                t.add({snr_db, ll(m), std::string("numerical"), b,
                       goodput::variable_rate_metrics(s, imp, b).goodput});
            }
        }
        // Jensen at full feedback
        s.base_best_m = s.full_feedback_m();
        for (double b : betas) {
            t.add({snr_db, ll(s.base_best_m), std::string("jensen"), b,
                   goodput::variable_rate_metrics(s, imp, b, goodput::RateMode::jensen).goodput});
        }
    }
    t.metadata = {{"x", "beta1"},
                  {"y", "goodput"},
                  {"group_by", {"snr_db", "M", "method"}},
                  {"jensen_concave_beta1", concave}};
    CommandResult r;
    r.tables.push_back(std::move(t));
    r.options = {{"snr_db", fig3_snr_db}, {"M", fig3_best_ms}, {"beta1", betas}};
    return r;
}

CommandResult figure4a(const RunConfig& cfg)
{
    MinMOptions opt;
    opt.users = int_range(5, 1, 50);
    opt.gammas = fig4_gammas;
    auto r = min_m(cfg, opt);
    r.tables[0].series = "min_m";
    return r;
}

CommandResult figure4b(const RunConfig& cfg)
{
    require_subband_fading(cfg);
    if (cfg.sys.num_clusters() != 2) {
        throw ValidationError("figure 4b needs exactly two clusters");
    }
    const auto fractions = parse_real_list("0.1:0.1:0.9");
    const double gamma = fig4_gammas.back();
    Table t{"min_m", {"K", "k1_fraction", "K1", "K2", "M_exact"}};
    for (int k : fig4b_users) {
        for (double f : fractions) {
            SystemConfig s = cfg.sys;
            const auto split = split_users_two(k, f);
            s.clusters[0].num_users = split[0];
            s.clusters[1].num_users = split[1];
            s.validate();
            t.add({ll(k), f, ll(split[0]), ll(split[1]), ll(analytic::minimum_best_m(s, gamma).exact)});
        }
    }
    t.metadata = {{"x", "k1_fraction"}, {"y", "M_exact"}, {"group_by", {"K"}}};
    CommandResult r;
    r.tables.push_back(std::move(t));
    r.options = {{"K", fig4b_users}, {"k1_fraction", fractions}, {"gamma", gamma}};
    return r;
}

CommandResult figure5(const RunConfig& cfg)
{
    const auto users = int_range(8, 8, 64);
    Table t{"sum_rate", {"M", "K", "strategy", "subband_size", "reports", "sum_rate", "std_error", "trials"}};
    for (int m : fig5_best_ms) {
        for (int k : users) {
            SystemConfig s = with_users(cfg.sys, k);
            s.base_best_m = m;
            s.validate();
            for (const auto& row : montecarlo::compare_feedback_designs(s, fig5_homogeneous, cfg.trials, cfg.seed,
                                                                        cfg.workers)) {
                t.add({ll(m), ll(k), row.strategy, ll(row.subband_size), ll(row.reports), row.rate.mean,
                       row.rate.se, static_cast<long long>(row.rate.trials)});
            }
        }
    }
    t.metadata = {{"x", "K"}, {"y", "sum_rate"}, {"group_by", {"M", "strategy", "subband_size"}}};
    CommandResult r;
    r.tables.push_back(std::move(t));
    r.options = {{"M", fig5_best_ms}, {"K", users}, {"homogeneous_subband_sizes", fig5_homogeneous}};
    return r;
}

CommandResult figure6(const RunConfig& cfg, bool with_simulation)
{
    require_subband_fading(cfg);
    const ImpairmentParams& imp = require_impairments(cfg, "figure 6");
    const auto betas = parse_real_list("0.05:0.05:1");
    std::vector<std::string> columns{"K",          "beta",         "beta0",           "beta1",
                                     "fixed_goodput", "fixed_outage", "variable_goodput", "variable_outage"};
    if (with_simulation) {
        for (const char* c : {"sim_fixed_goodput", "sim_fixed_goodput_se", "sim_fixed_outage", "sim_fixed_outage_se",
                              "sim_variable_goodput", "sim_variable_goodput_se", "sim_variable_outage",
                              "sim_variable_outage_se"}) {
            columns.emplace_back(c);
        }
    }
    Table t{"goodput", columns};
    for (int k : fig6_users) {
        const SystemConfig s = with_users(cfg.sys, k);
        for (double b : betas) {
            const double beta0 = fig6_beta0_scale * b;
            const auto fixed = goodput::fixed_rate_metrics(s, imp, beta0);
            const auto variable = goodput::variable_rate_metrics(s, imp, b);
            std::vector<Cell> row{ll(k),          b,          beta0, b, fixed.goodput, fixed.outage,
                                  variable.goodput, variable.outage};
            if (with_simulation) {
                auto spec = cfg.experiment();
                spec.sys = s;
                spec.strategy = {beta0, b};
                const auto e = montecarlo::run_imperfect(spec);
                for (const auto* est : {&e.fixed_rate.goodput, &e.fixed_rate.outage, &e.variable_rate.goodput,
                                        &e.variable_rate.outage}) {
                    row.emplace_back(est->mean);
                    row.emplace_back(est->se);
                }
            }
            t.add(std::move(row));
        }
    }
    t.metadata = {{"x", "beta"}, {"group_by", {"K"}}};
    CommandResult r;
    r.tables.push_back(std::move(t));
    r.options = {{"K", fig6_users}, {"beta", betas}, {"beta0_scale", fig6_beta0_scale},
                 {"with_simulation", with_simulation}};
    return r;
}

CommandResult figure7(const RunConfig& cfg)
{
    require_subband_fading(cfg);
    const auto s2s = est_err_var_grid();
    const auto alphas = alpha_grid();
    Table t{"optimum", {"est_err_var", "alpha", "beta0_opt", "beta1_opt", "fixed_goodput_full",
                        "variable_goodput_full", "jensen_concave"}};
    for (double s2 : s2s) {
        for (double alpha : alphas) {
            const ImpairmentParams imp{s2, alpha};
            const auto o0 = goodput::optimize_beta0(cfg.sys, imp, std::nullopt);
            const auto o1 = goodput::optimize_beta1(cfg.sys, imp, std::nullopt);
            t.add({s2, alpha, o0.beta0, o1.beta1, o0.goodput, o1.goodput,
                   static_cast<long long>(goodput::jensen_integrand_concave(o1.beta1, imp, cfg.sys.snr))});
        }
    }
    t.metadata = {{"x", "est_err_var"}, {"y", {"beta0_opt", "beta1_opt"}}, {"group_by", {"alpha"}}};
    CommandResult r;
    r.tables.push_back(std::move(t));
    r.options = {{"est_err_var", s2s}, {"alpha", alphas}};
    return r;
}

CommandResult figure8(const RunConfig& cfg)
{
    require_subband_fading(cfg);
    const ImpairmentParams& imp = require_impairments(cfg, "figure 8");
    const auto users = int_range(8, 8, 64);
    Table t{"goodput", {"K", "M_matched", "beta0_opt", "beta1_opt", "fixed_goodput", "variable_goodput",
                        "fixed_goodput_full", "variable_goodput_full"}};
    for (int k : users) {
        SystemConfig s = with_users(cfg.sys, k);
        const auto o0 = goodput::optimize_beta0(s, imp, fig8_gamma);
        const auto o1 = goodput::optimize_beta1(s, imp, fig8_gamma);
        s.base_best_m = o1.matched_m;
        t.add({ll(k), ll(o1.matched_m), o0.beta0, o1.beta1, goodput::fixed_rate_metrics(s, imp, o0.beta0).goodput,
               goodput::variable_rate_metrics(s, imp, o1.beta1).goodput, o0.goodput, o1.goodput});
    }
    t.metadata = {{"x", "K"}, {"y", {"fixed_goodput", "variable_goodput"}}};
    CommandResult r;
    r.tables.push_back(std::move(t));
    r.options = {{"K", users}, {"gamma", fig8_gamma}};
    return r;
}

} // namespace

const std::vector<std::string>& figure_ids()
{
    static const std::vector<std::string> ids{"1", "3", "4a", "4b", "5", "6", "7", "8"};
    return ids;
}

json figure_config(const std::string& id)
{
    json doc = default_config();
    doc["n_rbs"] = 64;
    doc["snr_db"] = 10.0;
    if (id == "1") {
        doc["model"] = "correlated";
        doc["n_rbs"] = 32;
        doc["subcarriers"] = 256;
        doc["subcarriers_per_rb"] = 8;
        doc["taps"] = 16;
        doc["delay_spread"] = 4.0;
        doc["clusters"] = clusters_json({1}, 30);
        doc["best_m"] = 2;
    } else if (id == "3") {
        doc["clusters"] = clusters_json({1, 4}, 10);
        doc["alpha"] = 0.98;
        doc["est_err_var"] = 0.01;
    } else if (id == "4a" || id == "4b") {
        doc["clusters"] = clusters_json({1, 4}, 5);
    } else if (id == "5") {
        doc["clusters"] = clusters_json({1, 2, 4, 8}, 10);
    } else if (id == "6") {
        doc["clusters"] = clusters_json({1}, 10);
        doc["best_m"] = 64;
        doc["alpha"] = 0.98;
        doc["est_err_var"] = 0.01;
    } else if (id == "7") {
        doc["clusters"] = clusters_json({1}, 10);
        doc["best_m"] = 64;
    } else if (id == "8") {
        doc["clusters"] = clusters_json({1, 2, 4, 8}, 2);
        doc["alpha"] = 0.98;
        doc["est_err_var"] = 0.01;
    } else {
        throw ValidationError("unknown figure '" + id + "'");
    }
    return doc;
}

CommandResult figure(const std::string& id, const RunConfig& cfg, const FigureOptions& opt)
{
    if (opt.with_simulation && id != "6") {
        throw ValidationError("--with-simulation applies to figure 6 only");
    }
    CommandResult r;
    if (id == "1") {
        r = figure1(cfg);
    } else if (id == "3") {
        r = figure3(cfg);
    } else if (id == "4a") {
        r = figure4a(cfg);
    } else if (id == "4b") {
        r = figure4b(cfg);
    } else if (id == "5") {
        r = figure5(cfg);
    } else if (id == "6") {
        r = figure6(cfg, opt.with_simulation);
    } else if (id == "7") {
        r = figure7(cfg);
    } else if (id == "8") {
        r = figure8(cfg);
    } else {
        throw ValidationError("unknown figure '" + id + "'");
    }
    r.options["figure"] = id;
    return r;
}

} // namespace hetfb::cli
