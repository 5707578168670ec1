#pragma once

// Shared plumbing of the command-line tool: option groups, resolved
// configuration, tabular and JSON output, and the error-to-exit-code map.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cdl/dos.hpp"
#include "cdl/mdl.hpp"
#include "cdl/optimizer.hpp"
#include "cdl/quality.hpp"

namespace cli
{

using json = nlohmann::ordered_json;

inline constexpr const char* tool_version = "1.0.0";

enum ExitCode
{
    exit_ok = 0,
    exit_usage = 1,
    exit_data = 2,
    exit_numeric = 3,
    exit_validation_failed = 4,
};

// Bad flag values detected after parsing; exit code 1.
class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct ModelFlags
{
    std::string method = "modularity";
    double gamma = 1;
    bool dc = false;
    bool flat_degree_prior = false;
    double beta_max = 0;
    std::int64_t bmax = 0;
    std::int64_t ein_stride = 0;
    unsigned threads = 0;

    cdl::Method to_method() const;
    cdl::GridOptions grid_options() const;
    cdl::DlOptions dl_options() const;
    json to_json() const;
};

struct SearchFlags
{
    std::uint64_t seed = 1;
    int restarts = 8;
    std::string init = "singletons";
    int max_sweeps = 200;

    cdl::OptimizerConfig config(unsigned threads) const;
    json to_json() const;
};

struct OutputFlags
{
    std::string out; // empty: stdout
    std::string format = "json";
};

void add_model_flags(CLI::App* app, ModelFlags& f, bool allow_pp = true);
void add_search_flags(CLI::App* app, SearchFlags& f);
void add_output_flags(CLI::App* app, OutputFlags& f, const std::string& default_format);

// N and E from --N with either --E or --avg-k.
struct SizeFlags
{
    std::int64_t N = 0;
    std::int64_t E = 0;
    double avg_k = 0;

    // Throws UsageError unless exactly one of E and avg_k is set.
    std::int64_t edges() const;
    json to_json() const;
};

void add_size_flags(CLI::App* app, SizeFlags& f);

// Column-named rows of numbers, strings, booleans or nulls.
struct Table
{
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;

    void add(std::vector<json> row);
    json to_json() const;
    void write_csv(std::ostream& out, const json& config) const;
};

// Writes doc to --out or stdout. CSV emits `table` under a "# {config}"
// line; JSON emits doc, which must already contain the config.
void emit(const OutputFlags& out, const json& doc, const Table* table = nullptr);

json method_json(const cdl::Method& m);
json dl_report_json(const cdl::DlReport& r);
json partition_json(const cdl::Partition& p);

cdl::Graph load_graph(const std::string& path, bool permissive, json* load_info = nullptr);

void register_analysis(CLI::App& app);
void register_sample(CLI::App& app);
void register_optimize(CLI::App& app);
void register_validate(CLI::App& app);

// Set by each subcommand callback; read by main.
extern int command_exit_code;

} // namespace cli
