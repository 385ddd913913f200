#include "cli.hpp"
#include "commands_support.hpp"
#include "hetfb/analytic.hpp"
#include "hetfb/errors.hpp"

namespace hetfb::cli {

using nlohmann::json;

SystemConfig with_users(const SystemConfig& sys, int users)
{
    if (users < 1) {
        throw ValidationError("user counts must be at least 1");
    }
    SystemConfig out = sys;
    const auto split = split_users(users, sys.num_clusters());
    for (int g = 0; g < sys.num_clusters(); ++g) {
        out.clusters[g].num_users = split[g];
    }
    out.validate();
    return out;
}

void require_subband_fading(const RunConfig& cfg)
{
    if (cfg.model != montecarlo::ChannelModel::subband_fading) {
        throw ValidationError("the analytic engine covers the subband fading model only");
    }
}

const ImpairmentParams& require_impairments(const RunConfig& cfg, const std::string& what)
{
    if (!cfg.impairments) {
        throw ValidationError(what + " needs impairments: set alpha and/or est_err_var");
    }
    return *cfg.impairments;
}

namespace {

void add_estimate(Table& t, const std::string& quantity, const montecarlo::EstimateWithError& e)
{
    t.add({quantity, e.mean, e.se, static_cast<long long>(e.trials)});
}

} // namespace

CommandResult simulate(const RunConfig& cfg, const SimulateOptions& opt)
{
    const auto spec = cfg.experiment();
    CommandResult result;
    Table est{"estimates", {"quantity", "estimate", "std_error", "trials"}};
    if (!spec.impairments) {
        add_estimate(est, "sum_rate", montecarlo::run_perfect(spec));
    } else {
        const auto e = montecarlo::run_imperfect(spec);
        add_estimate(est, "fixed_goodput", e.fixed_rate.goodput);
        add_estimate(est, "fixed_outage", e.fixed_rate.outage);
        add_estimate(est, "fixed_conditional_outage", e.fixed_rate.conditional_outage);
        add_estimate(est, "variable_goodput", e.variable_rate.goodput);
        add_estimate(est, "variable_outage", e.variable_rate.outage);
        add_estimate(est, "variable_conditional_outage", e.variable_rate.conditional_outage);
        add_estimate(est, "scheduling_outage", e.scheduling_outage);
    }
    est.metadata = {{"model", cfg.resolved.at("model")}};
    result.tables.push_back(std::move(est));

    if (opt.cross_validate) {
        Table x{"cross_validation", {"quantity", "empirical", "std_error", "analytic", "z", "flagged"}};
        for (const auto& c : montecarlo::cross_validate(spec)) {
            x.add({c.quantity, c.empirical, c.standard_error, c.analytic, c.z, c.flagged ? 1LL : 0LL});
            result.flagged = result.flagged || c.flagged;
        }
        x.metadata = {{"threshold", 3.0}};
        result.tables.push_back(std::move(x));
    }
    result.options = {{"cross_validate", opt.cross_validate}};
    return result;
}

CommandResult analytic_tables(const RunConfig& cfg, const AnalyticOptions& opt)
{
    require_subband_fading(cfg);
    std::vector<SystemConfig> systems;
    if (opt.users) {
        for (int k : *opt.users) {
            systems.push_back(with_users(cfg.sys, k));
        }
    } else {
        systems.push_back(cfg.sys);
    }
    if (opt.full_feedback) {
        for (auto& s : systems) {
            s.base_best_m = s.full_feedback_m();
        }
    }

    CommandResult result;
    result.options = {{"full_feedback", opt.full_feedback},
                      {"rate_mode", opt.rate_mode == goodput::RateMode::jensen ? "jensen" : "quadrature"}};
    if (opt.users) {
        result.options["users"] = *opt.users;
    }
    if (!cfg.impairments) {
        if (opt.betas) {
            throw ValidationError("--betas needs impairments: set alpha and/or est_err_var");
        }
        Table t{"sum_rate", {"K", "M", "sum_rate", "full_feedback_rate"}};
        for (const auto& s : systems) {
            t.add({static_cast<long long>(s.total_users()), static_cast<long long>(s.base_best_m),
                   analytic::average_sum_rate(s), analytic::i1(s.snr, s.total_users())});
        }
        t.metadata = {{"x", "K"}, {"y", "sum_rate"}};
        result.tables.push_back(std::move(t));
        return result;
    }

    const ImpairmentParams imp = *cfg.impairments;
    std::vector<goodput::StrategyParams> strategies;
    if (opt.betas) {
        for (double b : *opt.betas) {
            strategies.push_back({opt.beta0_scale * b, b});
        }
        result.options["betas"] = *opt.betas;
        result.options["beta0_scale"] = opt.beta0_scale;
    } else {
        strategies.push_back(cfg.strategy);
    }
    for (const auto& st : strategies) {
        st.validate();
    }
    Table t{"goodput",
            {"K", "M", "beta0", "beta1", "fixed_goodput", "fixed_outage", "variable_goodput", "variable_outage"}};
    for (const auto& s : systems) {
        for (const auto& st : strategies) {
            const auto fixed = goodput::fixed_rate_metrics(s, imp, st.beta0);
            const auto variable = goodput::variable_rate_metrics(s, imp, st.beta1, opt.rate_mode);
            t.add({static_cast<long long>(s.total_users()), static_cast<long long>(s.base_best_m), st.beta0,
                   st.beta1, fixed.goodput, fixed.outage, variable.goodput, variable.outage});
        }
    }
    t.metadata = {{"x", "beta1"}, {"group_by", {"K", "M"}}};
    result.tables.push_back(std::move(t));
    return result;
}

CommandResult min_m(const RunConfig& cfg, const MinMOptions& opt)
{
    require_subband_fading(cfg);
    CommandResult result;
    Table t{"min_m", {"K", "gamma", "M_exact", "M_approx"}};
    const std::vector<int> users = opt.users ? *opt.users : std::vector<int>{cfg.sys.total_users()};
    for (int k : users) {
        const SystemConfig s = opt.users ? with_users(cfg.sys, k) : cfg.sys;
        for (double gamma : opt.gammas) {
            const auto m = analytic::minimum_best_m(s, gamma);
            t.add({static_cast<long long>(k), gamma, static_cast<long long>(m.exact),
                   static_cast<long long>(m.approx)});
        }
    }
    t.metadata = {{"x", "K"}, {"group_by", {"gamma"}}};
    result.tables.push_back(std::move(t));
    result.options = {{"gammas", opt.gammas}};
    if (opt.users) {
        result.options["users"] = *opt.users;
    }
    return result;
}

std::vector<double> est_err_var_grid()
{
    return parse_real_list("0:0.005:0.1");
}

std::vector<double> alpha_grid()
{
    return parse_real_list("0.9:0.005:0.99");
}

CommandResult optimize(const RunConfig& cfg, const OptimizeOptions& opt)
{
    require_subband_fading(cfg);
    const auto pick = [&](const std::optional<std::vector<double>>& given, double configured,
                          std::vector<double> (*fallback)()) {
        if (given) {
            return *given;
        }
        return cfg.impairments ? std::vector<double>{configured} : fallback();
    };
    const ImpairmentParams base = cfg.impairments.value_or(ImpairmentParams{});
    const auto s2s = pick(opt.est_err_vars, base.est_error_var, est_err_var_grid);
    const auto alphas = pick(opt.alphas, base.delay_corr, alpha_grid);

    // the matched M depends on the perfect-feedback sum rates only
    const int matched = analytic::minimum_best_m(cfg.sys, opt.gamma).exact;
    SystemConfig at_m = cfg.sys;
    at_m.base_best_m = matched;

    CommandResult result;
    Table t{"optimum",
            {"est_err_var", "alpha", "beta0_opt", "fixed_goodput_full", "beta1_opt", "variable_goodput_full",
             "M_matched", "fixed_goodput", "variable_goodput", "jensen_concave"}};
    for (double s2 : s2s) {
        for (double alpha : alphas) {
            const ImpairmentParams imp{s2, alpha};
            const auto o0 = goodput::optimize_beta0(cfg.sys, imp, std::nullopt);
            const auto o1 = goodput::optimize_beta1(cfg.sys, imp, std::nullopt);
            t.add({s2, alpha, o0.beta0, o0.goodput, o1.beta1, o1.goodput, static_cast<long long>(matched),
                   goodput::fixed_rate_metrics(at_m, imp, o0.beta0).goodput,
                   goodput::variable_rate_metrics(at_m, imp, o1.beta1).goodput,
                   static_cast<long long>(goodput::jensen_integrand_concave(o1.beta1, imp, cfg.sys.snr))});
        }
    }
    t.metadata = {{"x", "est_err_var"}, {"group_by", {"alpha"}}};
    result.tables.push_back(std::move(t));
    result.options = {{"est_err_vars", s2s}, {"alphas", alphas}, {"gamma", opt.gamma}};
    return result;
}

} // namespace hetfb::cli
