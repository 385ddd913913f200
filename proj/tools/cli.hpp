#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hetfb/channel.hpp"
#include "hetfb/goodput.hpp"
#include "hetfb/montecarlo.hpp"
#include "hetfb/system.hpp"

namespace hetfb::cli {

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exit codes of the `hetfb` executable.
enum ExitCode { ok = 0, io_failure = 1, validation_failure = 2, numerical_failure = 3, cross_validation_flag = 4 };

// ---- configuration -------------------------------------------------------

/// Keys accepted in config files and --set overrides, with defaults.
nlohmann::json default_config();

/// Copies the keys of `layer` into `doc`; unknown keys are rejected.
void merge_config(nlohmann::json& doc, const nlohmann::json& layer, const std::string& origin);

nlohmann::json load_config_file(const std::filesystem::path& path);

/// Applies one `key=value` override. The value is parsed as JSON and taken
/// as a plain string when that fails.
void apply_assignment(nlohmann::json& doc, const std::string& assignment);

/// Typed, validated view of a resolved config document.
struct RunConfig {
    SystemConfig sys;
    std::optional<ImpairmentParams> impairments; // present iff alpha or est_err_var is set
    goodput::StrategyParams strategy;
    long trials = 100000;
    std::uint64_t seed = 1;
    int workers = 0;
    montecarlo::ChannelModel model = montecarlo::ChannelModel::subband_fading;
    CorrelatedChannelConfig correlated;
    nlohmann::json resolved;

    montecarlo::ExperimentSpec experiment() const;
};

RunConfig resolve_config(const nlohmann::json& doc);

/// "a,b,c" or an inclusive range "start:step:stop".
std::vector<double> parse_real_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

// ---- results -------------------------------------------------------------

using Cell = std::variant<long long, double, std::string>;

struct Table {
    Table(std::string series_name, std::vector<std::string> header)
        : series(std::move(series_name)), columns(std::move(header))
    {
    }

    std::string series;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    nlohmann::json metadata = nlohmann::json::object();

    void add(std::vector<Cell> row);
};

/// Description of a known output column; throws std::out_of_range for
/// names outside the dictionary.
const std::string& column_description(const std::string& name);

/// 12 significant digits for reals.
std::string format_cell(const Cell& cell);

enum class Format { csv, json };

struct Invocation {
    std::string command;   // e.g. "figure 4a"
    std::string stem;      // output file stem, e.g. "figure_4a"
    nlohmann::json config; // resolved config echo
    nlohmann::json options = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::string timestamp;
};

struct Emitted {
    std::vector<std::filesystem::path> data_files;
    std::filesystem::path manifest;
};

/// Writes one data file per table plus the manifest that lists them all.
Emitted emit(const std::vector<Table>& tables, Format format, const std::filesystem::path& out_dir,
             const Invocation& inv);

std::string utc_timestamp();

// ---- subcommands ---------------------------------------------------------

struct SimulateOptions {
    bool cross_validate = false;
};

struct AnalyticOptions {
    bool full_feedback = false;
    std::optional<std::vector<int>> users;
    std::optional<std::vector<double>> betas;
    double beta0_scale = 10.0;
    goodput::RateMode rate_mode = goodput::RateMode::quadrature;
};

struct MinMOptions {
    std::optional<std::vector<int>> users;
    std::vector<double> gammas{0.9, 0.99};
};

struct OptimizeOptions {
    std::optional<std::vector<double>> est_err_vars;
    std::optional<std::vector<double>> alphas;
    double gamma = 0.99;
};

struct FigureOptions {
    bool with_simulation = false; // figure 6
};

struct CommandResult {
    std::vector<Table> tables;
    nlohmann::json options = nlohmann::json::object();
    bool flagged = false; // cross-validation found |z| > 3
};

CommandResult simulate(const RunConfig& cfg, const SimulateOptions& opt);
CommandResult analytic_tables(const RunConfig& cfg, const AnalyticOptions& opt);
CommandResult min_m(const RunConfig& cfg, const MinMOptions& opt);
CommandResult optimize(const RunConfig& cfg, const OptimizeOptions& opt);

const std::vector<std::string>& figure_ids();
/// Config defaults of one figure, layered under --config and --set.
nlohmann::json figure_config(const std::string& id);
CommandResult figure(const std::string& id, const RunConfig& cfg, const FigureOptions& opt);

/// Entry point of the executable. Writes a one-line JSON summary to `out`
/// on success and a JSON error record to `err` on failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hetfb::cli
