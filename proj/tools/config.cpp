#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "hetfb/errors.hpp"

namespace hetfb::cli {

using nlohmann::json;

namespace {

const std::set<std::string>& known_keys()
{
    static const std::set<std::string> keys{
        "n_rbs", "clusters", "best_m",      "snr_db",      "alpha",        "est_err_var", "beta0",
        "beta1", "trials",   "seed",        "workers",     "model",        "subcarriers", "subcarriers_per_rb",
        "taps",  "delay_spread"};
    return keys;
}

[[noreturn]] void type_error(const std::string& key, const char* what)
{
    throw ValidationError("config key '" + key + "' must be " + what);
}

long long get_integer(const json& v, const std::string& key)
{
    if (!v.is_number_integer()) {
        type_error(key, "an integer");
    }
    return v.get<long long>();
}

int get_int(const json& v, const std::string& key)
{
    const long long x = get_integer(v, key);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        type_error(key, "an integer in the int range");
    }
    return static_cast<int>(x);
}

double get_real(const json& v, const std::string& key)
{
    if (!v.is_number()) {
        type_error(key, "a number");
    }
    return v.get<double>();
}

std::vector<Cluster> get_clusters(const json& v)
{
    if (!v.is_array()) {
        type_error("clusters", "a list of {\"eta\": int, \"users\": int} objects");
    }
    std::vector<Cluster> out;
    for (const json& c : v) {
        if (!c.is_object() || c.size() != 2 || !c.contains("eta") || !c.contains("users")) {
            type_error("clusters", "a list of {\"eta\": int, \"users\": int} objects");
        }
        out.push_back({get_int(c.at("eta"), "clusters.eta"), get_int(c.at("users"), "clusters.users")});
    }
    return out;
}

double parse_real(const std::string& token)
{
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(token, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != token.size() || !std::isfinite(x)) {
        throw ValidationError("not a number: '" + token + "'");
    }
    return x;
}

} // namespace

json default_config()
{
    return json{{"n_rbs", 64},
                {"clusters", json::array({{{"eta", 1}, {"users", 10}}, {{"eta", 4}, {"users", 10}}})},
                {"best_m", 2},
                {"snr_db", 10.0},
                {"beta0", 1.0},
                {"beta1", 0.5},
                {"trials", 100000},
                {"seed", 1},
                {"workers", 0},
                {"model", "subband_fading"},
                {"subcarriers", 256},
                {"subcarriers_per_rb", 8},
                {"taps", 16},
                {"delay_spread", 4.0}};
}

void merge_config(json& doc, const json& layer, const std::string& origin)
{
    if (!layer.is_object()) {
        throw ValidationError(origin + ": config must be a JSON object");
    }
    for (const auto& [key, value] : layer.items()) {
        if (known_keys().count(key) == 0) {
            throw ValidationError(origin + ": unknown config key '" + key + "'");
        }
        doc[key] = value;
    }
}

json load_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config file " + path.string());
    }
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        throw ValidationError(path.string() + ": not valid JSON");
    }
    return doc;
}

void apply_assignment(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ValidationError("--set expects key=value, got '" + assignment + "'");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        value = text;
    }
    merge_config(doc, json{{key, value}}, "--set");
}

RunConfig resolve_config(const json& doc)
{
    for (const auto& [key, value] : doc.items()) {
        if (known_keys().count(key) == 0) {
            throw ValidationError("unknown config key '" + key + "'");
        }
    }
    const json defaults = default_config();
    const auto at = [&](const std::string& key) -> const json& {
        return doc.contains(key) ? doc.at(key) : defaults.at(key);
    };

    RunConfig cfg;
    cfg.sys.num_rbs = get_int(at("n_rbs"), "n_rbs");
    cfg.sys.clusters = get_clusters(at("clusters"));
    cfg.sys.base_best_m = get_int(at("best_m"), "best_m");
    cfg.sys.snr = db_to_linear(get_real(at("snr_db"), "snr_db"));
    cfg.sys.validate();

    if (doc.contains("alpha") || doc.contains("est_err_var")) {
        ImpairmentParams imp;
        if (doc.contains("est_err_var")) {
            imp.est_error_var = get_real(doc.at("est_err_var"), "est_err_var");
        }
        if (doc.contains("alpha")) {
            imp.delay_corr = get_real(doc.at("alpha"), "alpha");
        }
        imp.validate_ranges();
        cfg.impairments = imp;
    }

    cfg.strategy.beta0 = get_real(at("beta0"), "beta0");
    cfg.strategy.beta1 = get_real(at("beta1"), "beta1");
    cfg.strategy.validate();

    const long long trials = get_integer(at("trials"), "trials");
    if (trials < 2) {
        throw ValidationError("trials must be at least 2");
    }
    cfg.trials = static_cast<long>(trials);
    const json& seed = at("seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
        type_error("seed", "a nonnegative integer");
    }
    cfg.seed = seed.get<std::uint64_t>();
    cfg.workers = get_int(at("workers"), "workers");
    if (cfg.workers < 0) {
        throw ValidationError("workers must be nonnegative");
    }

    const json& model = at("model");
    if (model == "subband_fading") {
        cfg.model = montecarlo::ChannelModel::subband_fading;
    } else if (model == "correlated") {
        cfg.model = montecarlo::ChannelModel::correlated;
    } else {
        type_error("model", "\"subband_fading\" or \"correlated\"");
    }
    cfg.correlated.num_subcarriers = get_int(at("subcarriers"), "subcarriers");
    cfg.correlated.subcarriers_per_rb = get_int(at("subcarriers_per_rb"), "subcarriers_per_rb");
    const int taps = get_int(at("taps"), "taps");
    const double spread = get_real(at("delay_spread"), "delay_spread");
    if (taps < 1) {
        throw ValidationError("taps must be at least 1");
    }
    if (!(spread > 0.0)) {
        throw ValidationError("delay_spread must be positive");
    }
    cfg.correlated.pdp = pdp_exponential(taps, spread);
    if (cfg.model == montecarlo::ChannelModel::correlated) {
        cfg.experiment().validate();
    }

    cfg.resolved = defaults;
    for (const auto& [key, value] : doc.items()) {
        cfg.resolved[key] = value;
    }
    return cfg;
}

montecarlo::ExperimentSpec RunConfig::experiment() const
{
    montecarlo::ExperimentSpec spec;
    spec.model = model;
    spec.sys = sys;
    if (model == montecarlo::ChannelModel::correlated) {
        spec.correlated = correlated;
    }
    spec.impairments = impairments;
    spec.strategy = strategy;
    spec.trials = trials;
    spec.seed = seed;
    spec.workers = workers;
    return spec;
}

std::vector<double> parse_real_list(const std::string& text)
{
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream in(text);
        std::string token;
        while (std::getline(in, token, ':')) {
            parts.push_back(parse_real(token));
        }
        if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0]) {
            throw ValidationError("range must be start:step:stop with step > 0, got '" + text + "'");
        }
        // points are start + i step, so the grid does not drift
        const auto n = static_cast<long>(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9)) + 1;
        if (n > 1000000) {
            throw ValidationError("range '" + text + "' has too many points");
        }
        for (long i = 0; i < n; ++i) {
            out.push_back(parts[0] + static_cast<double>(i) * parts[1]);
        }
        return out;
    }
    std::stringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        out.push_back(parse_real(token));
    }
    if (out.empty()) {
        throw ValidationError("empty list");
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& text)
{
    std::vector<int> out;
    for (double x : parse_real_list(text)) {
        const double r = std::round(x);
        if (std::abs(x - r) > 1e-9 || std::abs(r) > 1e9) {
            throw ValidationError("expected integers in '" + text + "'");
        }
        out.push_back(static_cast<int>(r));
    }
    return out;
}

} // namespace hetfb::cli
