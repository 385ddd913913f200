#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>

#include "cli.hpp"
#include "hetfb/errors.hpp"

#ifndef HETFB_VERSION
#define HETFB_VERSION "0.0.0"
#endif

namespace hetfb::cli {

using nlohmann::json;

namespace {

const std::map<std::string, std::string>& dictionary()
{
    static const std::map<std::string, std::string> d{
        {"K", "total number of users"},
        {"K1", "users in the first cluster"},
        {"K2", "users in the second cluster"},
        {"k1_fraction", "requested share of users in the first cluster"},
        {"M", "best-M value of the cluster with the largest subband"},
        {"M_exact", "smallest M whose sum rate reaches gamma of the full-feedback rate"},
        {"M_approx", "the same from the multiuser-diversity approximation"},
        {"M_matched", "smallest M reaching gamma of the full-feedback sum rate"},
        {"gamma", "target fraction of the full-feedback sum rate"},
        {"eta", "subband size in resource blocks"},
        {"snr_db", "average SNR in dB"},
        {"est_err_var", "channel estimation error variance"},
        {"alpha", "correlation between estimated and actual channel (feedback delay)"},
        {"beta", "normalized rate parameter: beta1 = beta, beta0 = scale * beta"},
        {"beta0", "fixed-rate CQI threshold"},
        {"beta1", "variable-rate backoff factor"},
        {"beta0_opt", "threshold maximizing the full-feedback fixed-rate goodput"},
        {"beta1_opt", "backoff maximizing the full-feedback Jensen goodput"},
        {"method", "numerical (quadrature) or jensen"},
        {"jensen_concave", "1 when the rate integrand is concave and nondecreasing at beta1_opt, so the Jensen goodput is an upper bound"},
        {"sum_rate", "average sum rate per resource block, bits/s/Hz"},
        {"full_feedback_rate", "E[log2(1 + snr X)] for X the largest of K unit exponentials"},
        {"std_error", "standard error of the Monte Carlo mean"},
        {"trials", "Monte Carlo trials"},
        {"quantity", "name of the estimated quantity"},
        {"estimate", "Monte Carlo mean"},
        {"empirical", "Monte Carlo mean"},
        {"analytic", "analytic value"},
        {"z", "(empirical - analytic) / std_error"},
        {"flagged", "1 when |z| > 3"},
        {"strategy", "feedback design: joint, homogeneous or separate"},
        {"subband_size", "subband size of the homogeneous design (0 otherwise)"},
        {"reports", "CQI reports per user (homogeneous) or base M"},
        {"goodput", "average goodput per resource block, bits/s/Hz"},
        {"fixed_goodput", "fixed-rate goodput per resource block, bits/s/Hz"},
        {"fixed_outage", "P(block scheduled and fixed-rate transmission fails)"},
        {"variable_goodput", "variable-rate goodput per resource block, bits/s/Hz"},
        {"variable_outage", "P(block scheduled and variable-rate transmission fails)"},
        {"fixed_goodput_full", "fixed-rate goodput at full feedback"},
        {"variable_goodput_full", "variable-rate Jensen goodput at full feedback"},
        {"sim_fixed_goodput", "simulated fixed-rate goodput"},
        {"sim_fixed_goodput_se", "standard error of sim_fixed_goodput"},
        {"sim_fixed_outage", "simulated fixed-rate outage"},
        {"sim_fixed_outage_se", "standard error of sim_fixed_outage"},
        {"sim_variable_goodput", "simulated variable-rate goodput"},
        {"sim_variable_goodput_se", "standard error of sim_variable_goodput"},
        {"sim_variable_outage", "simulated variable-rate outage"},
        {"sim_variable_outage_se", "standard error of sim_variable_outage"},
    };
    return d;
}

json cell_json(const Cell& cell)
{
    if (const auto* i = std::get_if<long long>(&cell)) {
        return *i;
    }
    if (const auto* s = std::get_if<std::string>(&cell)) {
        return *s;
    }
    // round through the 12-digit text so both formats carry the same value
    return std::stod(format_cell(cell));
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << text;
    out.close();
    if (!out) {
        throw IoError("write to " + path.string() + " failed");
    }
}

} // namespace

void Table::add(std::vector<Cell> row)
{
    if (row.size() != columns.size()) {
        throw std::logic_error("row width does not match the header of " + series);
    }
    rows.push_back(std::move(row));
}

const std::string& column_description(const std::string& name)
{
    return dictionary().at(name);
}

std::string format_cell(const Cell& cell)
{
    if (const auto* i = std::get_if<long long>(&cell)) {
        return std::to_string(*i);
    }
    if (const auto* s = std::get_if<std::string>(&cell)) {
        return *s;
    }
    const double x = std::get<double>(cell);
    if (x == 0.0) {
        return "0"; // no "-0"
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Emitted emit(const std::vector<Table>& tables, Format format, const std::filesystem::path& out_dir,
             const Invocation& inv)
{
    if (tables.empty()) {
        throw ValidationError("emit: no results to write");
    }
    for (const Table& t : tables) {
        if (t.rows.empty()) {
            throw ValidationError("emit: series '" + t.series + "' is empty");
        }
        for (const std::string& c : t.columns) {
            if (dictionary().count(c) == 0) {
                throw std::logic_error("column '" + c + "' is missing from the dictionary");
            }
        }
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
    }

    const std::string ext = format == Format::csv ? ".csv" : ".json";
    const std::string manifest_name = inv.stem + ".manifest.json";
    Emitted result;
    json outputs = json::array();
    for (const Table& t : tables) {
        const std::string name = (tables.size() == 1 ? inv.stem : inv.stem + "_" + t.series) + ext;
        std::string text;
        if (format == Format::csv) {
            for (std::size_t c = 0; c < t.columns.size(); ++c) {
                text += (c ? "," : "") + t.columns[c];
            }
            text += '\n';
            for (const auto& row : t.rows) {
                for (std::size_t c = 0; c < row.size(); ++c) {
                    text += (c ? "," : "") + format_cell(row[c]);
                }
                text += '\n';
            }
        } else {
            json rows = json::array();
            for (const auto& row : t.rows) {
                json r = json::object();
                for (std::size_t c = 0; c < row.size(); ++c) {
                    r[t.columns[c]] = cell_json(row[c]);
                }
                rows.push_back(std::move(r));
            }
            json doc{{"manifest", manifest_name}, {"series", t.series}, {"columns", t.columns}, {"rows", rows}};
            text = doc.dump(2) + '\n';
        }
        const auto path = out_dir / name;
        write_file(path, text);
        result.data_files.push_back(path);

        json columns = json::array();
        for (const std::string& c : t.columns) {
            columns.push_back({{"name", c}, {"description", column_description(c)}});
        }
        outputs.push_back({{"path", name},
                           {"series", t.series},
                           {"rows", t.rows.size()},
                           {"columns", columns},
                           {"metadata", t.metadata}});
    }

    const json manifest{{"artifact", "hetfb"},
                        {"version", HETFB_VERSION},
                        {"timestamp", inv.timestamp},
                        {"command", inv.command},
                        {"seed", inv.seed},
                        {"format", format == Format::csv ? "csv" : "json"},
                        {"config", inv.config},
                        {"options", inv.options},
                        {"outputs", outputs}};
    result.manifest = out_dir / manifest_name;
    write_file(result.manifest, manifest.dump(2) + '\n');
    return result;
}

} // namespace hetfb::cli
