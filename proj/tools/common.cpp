#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cdl/error.hpp"

namespace cli
{

int command_exit_code = exit_ok;

cdl::Method ModelFlags::to_method() const
{
    cdl::Method m;
    m.kind = cdl::parse_method_name(method);
    m.gamma = gamma;
    m.degree_corrected = dc;
    if (m.kind != cdl::MethodKind::Modularity && gamma != 1)
        throw UsageError("--gamma applies to modularity only");
    if (m.kind == cdl::MethodKind::PlantedPartition && dc)
        throw UsageError("--dc has no planted-partition variant");
    if (!(gamma > 0) || !std::isfinite(gamma))
        throw UsageError("--gamma must be positive");
    return m;
}

cdl::GridOptions ModelFlags::grid_options() const
{
    cdl::GridOptions g;
    g.b_max = bmax;
    g.ein_stride = ein_stride;
    g.threads = threads;
    return g;
}

cdl::DlOptions ModelFlags::dl_options() const
{
    if (beta_max < 0 || !std::isfinite(beta_max))
        throw UsageError("--beta-max must be nonnegative");
    if (bmax < 0 || ein_stride < 0)
        throw UsageError("--bmax and --ein-stride must be nonnegative");
    cdl::DlOptions o;
    o.grid = grid_options();
    o.beta_max = beta_max;
    o.flat_degree_prior = flat_degree_prior;
    return o;
}

json ModelFlags::to_json() const
{
    json j;
    j["method"] = method;
    j["gamma"] = gamma;
    j["dc"] = dc;
    j["flat_degree_prior"] = flat_degree_prior;
    j["beta_max"] = beta_max;
    j["bmax"] = bmax;
    j["ein_stride"] = ein_stride;
    j["threads"] = threads;
    return j;
}

cdl::OptimizerConfig SearchFlags::config(unsigned threads) const
{
    cdl::OptimizerConfig c;
    c.restarts = restarts;
    c.seed = seed;
    c.max_sweeps = max_sweeps;
    c.threads = threads;
    if (init == "singletons")
        c.init = cdl::InitKind::Singletons;
    else if (init == "random")
        c.init = cdl::InitKind::RandomGroups;
    else if (init == "agglomerative")
        c.init = cdl::InitKind::Agglomerative;
    else
        throw UsageError("unknown --init " + init);
    if (restarts < 1 || max_sweeps < 1)
        throw UsageError("--restarts and --max-sweeps must be >= 1");
    return c;
}

json SearchFlags::to_json() const
{
    json j;
    j["seed"] = seed;
    j["restarts"] = restarts;
    j["init"] = init;
    j["max_sweeps"] = max_sweeps;
    return j;
}

void add_model_flags(CLI::App* app, ModelFlags& f, bool allow_pp)
{
    std::vector<std::string> methods{"modularity", "infomap"};
    if (allow_pp)
        methods.push_back("pp");
    app->add_option("--method", f.method, "quality function")
        ->check(CLI::IsMember(methods))
        ->capture_default_str();
    app->add_option("--gamma", f.gamma, "modularity resolution")->capture_default_str();
    app->add_flag("--dc", f.dc, "degree-corrected implicit model");
    app->add_flag("--flat-degree-prior", f.flat_degree_prior,
                  "flat multiset prior on the degree sequence");
    app->add_option("--beta-max", f.beta_max, "largest beta searched (0: 1000 N)")
        ->capture_default_str();
    app->add_option("--bmax", f.bmax, "largest group count on the lattice (0: N)")
        ->capture_default_str();
    app->add_option("--ein-stride", f.ein_stride, "E_in sampling stride (0: max(1, E/5000))")
        ->capture_default_str();
    app->add_option("--threads", f.threads, "worker threads (0: all cores)")
        ->capture_default_str();
}

void add_search_flags(CLI::App* app, SearchFlags& f)
{
    app->add_option("--seed", f.seed, "random seed")->capture_default_str();
    app->add_option("--restarts", f.restarts, "optimizer restarts")->capture_default_str();
    app->add_option("--init", f.init, "initial partition")
        ->check(CLI::IsMember({"singletons", "random", "agglomerative"}))
        ->capture_default_str();
    app->add_option("--max-sweeps", f.max_sweeps, "sweeps per local-move phase")
        ->capture_default_str();
}

void add_output_flags(CLI::App* app, OutputFlags& f, const std::string& default_format)
{
    f.format = default_format;
    app->add_option("--out", f.out, "output file (default: stdout)");
    app->add_option("--format", f.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
}

std::int64_t SizeFlags::edges() const
{
    if (N < 2)
        throw UsageError("--N must be >= 2");
    bool has_e = E > 0, has_k = avg_k > 0;
    if (has_e == has_k)
        throw UsageError("give exactly one of --E and --avg-k");
    std::int64_t e = has_e ? E : std::llround(double(N) * avg_k / 2);
    if (e < 1 || double(e) > double(N) * double(N - 1) / 2)
        throw UsageError("edge count must lie in [1, N(N-1)/2]");
    return e;
}

json SizeFlags::to_json() const
{
    json j;
    j["N"] = N;
    j["E"] = edges();
    if (avg_k > 0)
        j["avg_k"] = avg_k;
    return j;
}

void add_size_flags(CLI::App* app, SizeFlags& f)
{
    app->add_option("--N", f.N, "number of nodes")->required();
    app->add_option("--E", f.E, "number of edges");
    app->add_option("--avg-k", f.avg_k, "average degree (E = round(N <k> / 2))");
}

void Table::add(std::vector<json> row)
{
    if (row.size() != columns.size())
        throw std::logic_error("table row width does not match its columns");
    rows.push_back(std::move(row));
}

json Table::to_json() const
{
    json j;
    j["columns"] = columns;
    j["rows"] = json::array();
    for (const auto& r : rows)
        j["rows"].push_back(r);
    return j;
}

namespace
{

std::string csv_cell(const json& v)
{
    if (v.is_null())
        return "";
    if (v.is_string())
    {
        std::string s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos)
            return s;
        std::string q = "\"";
        for (char c : s)
            q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    if (v.is_boolean())
        return v.get<bool>() ? "true" : "false";
    if (v.is_number_float())
    {
        std::ostringstream o;
        o.precision(17);
        o << v.get<double>();
        return o.str();
    }
    return v.dump();
}

} // namespace

void Table::write_csv(std::ostream& out, const json& config) const
{
    out << "# " << config.dump() << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& r : rows)
    {
        for (std::size_t i = 0; i < r.size(); ++i)
            out << (i ? "," : "") << csv_cell(r[i]);
        out << '\n';
    }
}

void emit(const OutputFlags& out, const json& doc, const Table* table)
{
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out.out.empty())
    {
        file.open(out.out, std::ios::binary);
        if (!file)
            throw cdl::ValidationError("cannot write " + out.out);
        os = &file;
    }
    if (out.format == "csv")
    {
        if (!table)
            throw UsageError("this output has no CSV form; use --format json");
        table->write_csv(*os, doc.value("config", json::object()));
    }
    else
        *os << doc.dump(2) << '\n';
    if (!*os)
        throw cdl::ValidationError("write failed");
}

json method_json(const cdl::Method& m)
{
    json j;
    j["name"] = cdl::method_name(m.kind);
    j["gamma"] = m.gamma;
    j["degree_corrected"] = m.degree_corrected;
    return j;
}

json dl_report_json(const cdl::DlReport& r)
{
    json j;
    j["sigma_nats"] = r.sigma;
    j["beta_star"] = r.beta_star ? json(*r.beta_star) : json(nullptr);
    j["W"] = r.W;
    j["mean_W_at_beta"] = r.beta_star ? json(r.mean_W_at_beta) : json(nullptr);
    j["method"] = method_json(r.method);
    json comp = json::object();
    for (const auto& [name, v] : r.components)
        comp[name] = v;
    j["components"] = comp;
    json base;
    base["sigma_er"] = r.baselines.sigma_er;
    base["sigma_er_with_prior"] = r.baselines.sigma_er_with_prior;
    base["sigma_cm"] = r.baselines.sigma_cm;
    base["sigma_pp"] = r.baselines.sigma_pp ? json(*r.baselines.sigma_pp) : json(nullptr);
    j["baselines"] = base;
    j["overfit"] = {{"er", r.overfit_er}, {"cm", r.overfit_cm}};
    j["flags"] = r.flags;
    j["grid"] = r.grid_config.empty() ? json(nullptr) : json::parse(r.grid_config);
    return j;
}

json partition_json(const cdl::Partition& p)
{
    json j;
    j["num_groups"] = p.num_groups();
    j["sizes"] = std::vector<std::int64_t>(p.sizes().begin(), p.sizes().end());
    return j;
}

cdl::Graph load_graph(const std::string& path, bool permissive, json* load_info)
{
    cdl::LoadStats stats;
    cdl::LoadOptions opts;
    opts.permissive = permissive;
    cdl::Graph g = cdl::load_edge_list_file(path, opts, &stats);
    if (load_info)
    {
        (*load_info)["path"] = path;
        (*load_info)["N"] = g.num_nodes();
        (*load_info)["E"] = g.num_edges();
        (*load_info)["dropped_self_loops"] = stats.dropped_self_loops;
        (*load_info)["dropped_duplicates"] = stats.dropped_duplicates;
    }
    return g;
}

} // namespace cli
