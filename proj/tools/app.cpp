#include <ostream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "hetfb/errors.hpp"

namespace hetfb::cli {

using nlohmann::json;

namespace {

int report(std::ostream& err, int code, const char* kind, const std::string& message)
{
    err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
    return code;
}

std::optional<std::vector<double>> real_list(const std::string& text)
{
    if (text.empty()) {
        return std::nullopt;
    }
    return parse_real_list(text);
}

std::optional<std::vector<int>> int_list(const std::string& text)
{
    if (text.empty()) {
        return std::nullopt;
    }
    return parse_int_list(text);
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Heterogeneous best-M feedback: simulation, analysis and figure data", "hetfb"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> assignments;
    std::string out_dir = ".";
    long trials = 0;
    std::uint64_t seed = 0;
    std::string format = "csv";
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--set", assignments, "override one config key (key=value), repeatable")->allow_extra_args(false);
    app.add_option("--out", out_dir, "output directory");
    auto* trials_opt = app.add_option("--trials", trials, "Monte Carlo trials");
    auto* seed_opt = app.add_option("--seed", seed, "master seed");
    app.add_option("--format", format, "data file format")->check(CLI::IsMember({"csv", "json"}));

    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates for the configured system");
    SimulateOptions sim_opt;
    sim->add_flag("--cross-validate", sim_opt.cross_validate, "compare against the analytic engine");

    auto* ana = app.add_subcommand("analytic", "sum rate, or goodput and outage with impairments");
    AnalyticOptions ana_opt;
    std::string ana_users, ana_betas, rate_mode = "quadrature";
    ana->add_flag("--full-feedback", ana_opt.full_feedback, "every user reports every subband");
    ana->add_option("--users", ana_users, "total user counts (list or start:step:stop), split evenly");
    ana->add_option("--betas", ana_betas, "beta1 grid; beta0 = scale * beta1");
    ana->add_option("--beta0-scale", ana_opt.beta0_scale, "beta0 / beta1 on the --betas grid");
    ana->add_option("--rate-mode", rate_mode, "variable-rate evaluation")
        ->check(CLI::IsMember({"quadrature", "jensen"}));

    auto* mm = app.add_subcommand("min-m", "smallest M reaching a fraction of the full-feedback rate");
    MinMOptions mm_opt;
    std::string mm_users, mm_gammas;
    mm->add_option("--users", mm_users, "total user counts, split evenly");
    mm->add_option("--gammas", mm_gammas, "target fractions (default 0.9,0.99)");

    auto* opt = app.add_subcommand("optimize", "optimal threshold and backoff over impairment grids");
    OptimizeOptions opt_opt;
    std::string opt_s2, opt_alpha;
    opt->add_option("--est-err-vars", opt_s2, "estimation error variances");
    opt->add_option("--alphas", opt_alpha, "delay correlations");
    opt->add_option("--gamma", opt_opt.gamma, "sum-rate fraction for the matched M");

    auto* fig = app.add_subcommand("figure", "data series of one figure");
    std::string figure_id;
    FigureOptions fig_opt;
    fig->add_option("id", figure_id, "figure")->required()->check(CLI::IsMember(figure_ids()));
    fig->add_flag("--with-simulation", fig_opt.with_simulation, "figure 6: add Monte Carlo columns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        return report(err, validation_failure, "validation", e.what());
    }

    try {
        json doc = fig->parsed() ? figure_config(figure_id) : default_config();
        if (!config_path.empty()) {
            merge_config(doc, load_config_file(config_path), config_path);
        }
        for (const auto& a : assignments) {
            apply_assignment(doc, a);
        }
        if (trials_opt->count() > 0) {
            doc["trials"] = trials;
        }
        if (seed_opt->count() > 0) {
            doc["seed"] = seed;
        }
        const RunConfig cfg = resolve_config(doc);

        Invocation inv;
        CommandResult result;
        if (sim->parsed()) {
            inv.command = inv.stem = "simulate";
            result = simulate(cfg, sim_opt);
        } else if (ana->parsed()) {
            inv.command = inv.stem = "analytic";
            ana_opt.users = int_list(ana_users);
            ana_opt.betas = real_list(ana_betas);
            ana_opt.rate_mode = rate_mode == "jensen" ? goodput::RateMode::jensen : goodput::RateMode::quadrature;
            result = analytic_tables(cfg, ana_opt);
        } else if (mm->parsed()) {
            inv.command = "min-m";
            inv.stem = "min_m";
            mm_opt.users = int_list(mm_users);
            if (!mm_gammas.empty()) {
                mm_opt.gammas = parse_real_list(mm_gammas);
            }
            result = min_m(cfg, mm_opt);
        } else if (opt->parsed()) {
            inv.command = inv.stem = "optimize";
            opt_opt.est_err_vars = real_list(opt_s2);
            opt_opt.alphas = real_list(opt_alpha);
            result = optimize(cfg, opt_opt);
        } else {
            inv.command = "figure " + figure_id;
            inv.stem = "figure_" + figure_id;
            result = figure(figure_id, cfg, fig_opt);
        }
        inv.config = cfg.resolved;
        inv.options = result.options;
        inv.seed = cfg.seed;
        inv.timestamp = utc_timestamp();

        const auto emitted = emit(result.tables, format == "json" ? Format::json : Format::csv, out_dir, inv);
        json files = json::array();
        for (const auto& f : emitted.data_files) {
            files.push_back(f.string());
        }
        out << json{{"manifest", emitted.manifest.string()}, {"data", files}}.dump() << '\n';
        if (result.flagged) {
            return report(err, cross_validation_flag, "cross_validation",
                          "simulation deviates from the analytic value by more than 3 standard errors");
        }
        return ok;
    } catch (const IoError& e) {
        return report(err, io_failure, "io", e.what());
    } catch (const NumericalError& e) {
        return report(err, numerical_failure, "numerical", e.what());
    } catch (const std::invalid_argument& e) {
        return report(err, validation_failure, "validation", e.what());
    } catch (const std::domain_error& e) {
        return report(err, validation_failure, "validation", e.what());
    } catch (const json::exception& e) {
        return report(err, validation_failure, "validation", e.what());
    } catch (const std::exception& e) {
        return report(err, io_failure, "internal", e.what());
    }
}

} // namespace hetfb::cli
