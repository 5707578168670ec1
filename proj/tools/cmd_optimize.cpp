// optimize, gamma-scan, compare.

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "cdl/error.hpp"
#include "cdl/metrics.hpp"
#include "cdl/parallel.hpp"

namespace cli
{

namespace
{

json base_config(const std::string& subcommand)
{
    json c;
    c["subcommand"] = subcommand;
    c["version"] = tool_version;
    return c;
}

void write_partition_to(const std::string& path, const cdl::Graph& g, const cdl::Partition& p)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw cdl::ValidationError("cannot write " + path);
    cdl::write_partition(f, g, p);
    if (!f)
        throw cdl::ValidationError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// optimize

struct OptimizeArgs
{
    std::string edges;
    ModelFlags model;
    SearchFlags search;
    OutputFlags out;
    std::vector<double> anneal;
    std::string partition_out;
    bool with_dl = false;
    bool permissive = false;
};

void run_optimize(const OptimizeArgs& a)
{
    cdl::Method m = a.model.to_method();
    cdl::OptimizerConfig cfg = a.search.config(a.model.threads);
    cfg.anneal = a.anneal;
    for (double b : cfg.anneal)
        if (!(b > 0) || !std::isfinite(b))
            throw UsageError("--anneal entries must be positive");

    json config = base_config("optimize");
    json info;
    cdl::Graph g = load_graph(a.edges, a.permissive, &info);
    config["inputs"] = {{"graph", info}};
    config["model"] = a.model.to_json();
    config["search"] = a.search.to_json();
    config["anneal"] = a.anneal;
    config["with_dl"] = a.with_dl;
    config["partition_out"] = a.partition_out.empty() ? json(nullptr) : json(a.partition_out);

    cdl::OptResult r = cdl::maximize_quality(g, m, cfg);
    if (!a.partition_out.empty())
        write_partition_to(a.partition_out, g, r.partition);

    json doc;
    doc["config"] = config;
    doc["W"] = r.W;
    doc["B"] = r.partition.num_groups();
    doc["B_e"] = cdl::effective_b(r.partition);
    doc["sweeps"] = r.sweeps;
    doc["restart"] = r.restart;
    doc["restart_W"] = r.restart_W;
    doc["trace"] = r.trace;
    doc["partition"] = partition_json(r.partition);
    doc["dl"] = nullptr;
    if (a.with_dl)
        doc["dl"] = dl_report_json(cdl::description_length(g, r.partition, m, a.model.dl_options()));

    Table t{{"restart", "W", "winner"}, {}};
    for (std::size_t i = 0; i < r.restart_W.size(); ++i)
        t.add({i, r.restart_W[i], int(i) == r.restart});
    emit(a.out, doc, &t);
}

// ---------------------------------------------------------------------------
// gamma-scan

struct GammaScanArgs
{
    std::string edges;
    ModelFlags model;
    SearchFlags search;
    OutputFlags out;
    std::vector<double> gammas;
    std::string partition_out;
    bool best_of_dc = false;
    bool permissive = false;
};

void run_gamma_scan(const GammaScanArgs& a)
{
    if (a.model.method != "modularity")
        throw UsageError("gamma-scan scans modularity; use --method modularity");
    if (a.model.gamma != 1)
        throw UsageError("--gamma does not apply to gamma-scan; use --gammas");
    std::vector<double> gammas = a.gammas.empty() ? cdl::default_gamma_grid() : a.gammas;
    for (double gm : gammas)
        if (!(gm > 0) || !std::isfinite(gm))
            throw UsageError("--gammas must be positive");
    cdl::OptimizerConfig cfg = a.search.config(a.model.threads);
    cdl::GammaScanOptions opts;
    opts.dl = a.model.dl_options();
    opts.best_of_dc = a.best_of_dc;
    if (a.model.dc)
        throw UsageError("gamma-scan compares plain and corrected codes through --best-of-dc");

    json config = base_config("gamma-scan");
    json info;
    cdl::Graph g = load_graph(a.edges, a.permissive, &info);
    config["inputs"] = {{"graph", info}};
    config["model"] = a.model.to_json();
    config["search"] = a.search.to_json();
    config["gammas"] = gammas;
    config["best_of_dc"] = a.best_of_dc;
    config["partition_out"] = a.partition_out.empty() ? json(nullptr) : json(a.partition_out);

    cdl::GammaScan scan = cdl::gamma_scan(g, gammas, cfg, opts);
    const auto& best = scan.records[scan.selected];
    if (!a.partition_out.empty())
        write_partition_to(a.partition_out, g, best.partition);

    Table t{{"gamma", "Q", "sigma", "B", "B_e", "degree_corrected", "out_of_range", "selected"},
            {}};
    for (std::size_t i = 0; i < scan.records.size(); ++i)
    {
        const auto& r = scan.records[i];
        t.add({r.gamma, r.Q, r.sigma, r.B, r.B_e, r.degree_corrected, r.out_of_range,
               i == scan.selected});
    }
    config["sigma_er"] = cdl::sigma_er(std::int64_t(g.num_nodes()), std::int64_t(g.num_edges()));
    json doc;
    doc["config"] = config;
    doc["table"] = t.to_json();
    doc["selected"] = {{"index", scan.selected},
                       {"gamma", best.gamma},
                       {"sigma", best.sigma},
                       {"B", best.B},
                       {"B_e", best.B_e},
                       {"partition", partition_json(best.partition)}};
    emit(a.out, doc, &t);
}

// ---------------------------------------------------------------------------
// compare

struct ManifestEntry
{
    std::string path;
    std::vector<std::string> tags;
};

// One network per line: a path followed by optional whitespace-separated
// tags. '#' starts a comment. Relative paths resolve against the manifest.
std::vector<ManifestEntry> read_manifest(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw cdl::ValidationError("cannot open " + path);
    std::string dir;
    if (auto slash = path.rfind('/'); slash != std::string::npos)
        dir = path.substr(0, slash + 1);
    std::vector<ManifestEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        std::istringstream ss(line);
        ManifestEntry e;
        if (!(ss >> e.path))
            continue;
        if (e.path[0] != '/')
            e.path = dir + e.path;
        for (std::string tag; ss >> tag;)
            e.tags.push_back(tag);
        out.push_back(std::move(e));
    }
    if (out.empty())
        throw cdl::ParseError("manifest lists no networks", lineno);
    return out;
}

struct MethodOutcome
{
    bool ok = false;
    double sigma = 0, W = 0, B_e = 0;
    std::int64_t B = 0;
    bool overfit_er = false, overfit_cm = false;
    std::string error;
};

struct NetworkOutcome
{
    std::int64_t N = 0, E = 0;
    double sigma_er = 0, sigma_cm = 0;
    std::string error; // load failure
    std::vector<MethodOutcome> methods;
};

struct CompareArgs
{
    std::string manifest;
    std::vector<std::string> methods{"modularity", "infomap", "pp"};
    ModelFlags model;
    SearchFlags search;
    OutputFlags out;
    bool permissive = false;
};

cdl::Method compare_method(const std::string& name, const ModelFlags& f)
{
    cdl::Method m;
    m.kind = cdl::parse_method_name(name);
    if (m.kind == cdl::MethodKind::Modularity)
        m.gamma = f.gamma;
    m.degree_corrected = f.dc && m.kind != cdl::MethodKind::PlantedPartition;
    return m;
}

void run_compare(const CompareArgs& a)
{
    if (a.methods.empty())
        throw UsageError("--methods must not be empty");
    for (const auto& name : a.methods)
        if (name != "modularity" && name != "infomap" && name != "pp")
            throw UsageError("unknown method " + name);
    if (!(a.model.gamma > 0))
        throw UsageError("--gamma must be positive");
    cdl::DlOptions dl_opts = a.model.dl_options();
    cdl::OptimizerConfig cfg = a.search.config(1);
    dl_opts.grid.threads = 1;

    auto entries = read_manifest(a.manifest);
    json config = base_config("compare");
    config["inputs"] = {{"manifest", a.manifest}};
    config["methods"] = a.methods;
    config["model"] = a.model.to_json();
    config["search"] = a.search.to_json();

    std::vector<NetworkOutcome> results(entries.size());
    cdl::parallel_for(entries.size(), a.model.threads, [&](std::size_t i) {
        NetworkOutcome& res = results[i];
        res.methods.resize(a.methods.size());
        cdl::Graph g;
        try
        {
            g = load_graph(entries[i].path, a.permissive);
            res.N = std::int64_t(g.num_nodes());
            res.E = std::int64_t(g.num_edges());
            cdl::Baselines base = cdl::baselines(g);
            res.sigma_er = base.sigma_er;
            res.sigma_cm = base.sigma_cm;
        }
        catch (const std::exception& e)
        {
            res.error = e.what();
            return;
        }
        for (std::size_t k = 0; k < a.methods.size(); ++k)
        {
            MethodOutcome& mo = res.methods[k];
            try
            {
                cdl::Method m = compare_method(a.methods[k], a.model);
                // Same seed as `cdl optimize`, so rows reproduce per network.
                cdl::OptResult opt = cdl::maximize_quality(g, m, cfg);
                cdl::DlReport dl = cdl::description_length(g, opt.partition, m, dl_opts);
                mo.sigma = dl.sigma;
                mo.W = opt.W;
                mo.B = std::int64_t(opt.partition.num_groups());
                mo.B_e = cdl::effective_b(opt.partition);
                mo.overfit_er = dl.overfit_er;
                mo.overfit_cm = dl.overfit_cm;
                mo.ok = true;
            }
            catch (const std::exception& e)
            {
                mo.error = e.what();
            }
        }
    });

    Table t{{"network", "tags", "method", "N", "E", "sqrt_2E", "W", "sigma", "sigma_er",
             "sigma_cm", "compression_ratio", "B", "B_e", "overfit_er", "overfit_cm", "error"},
            {}};
    const std::size_t M = a.methods.size();
    std::vector<std::vector<std::int64_t>> wins(M, std::vector<std::int64_t>(M, 0)),
        pairs(M, std::vector<std::int64_t>(M, 0));
    std::vector<double> ratio_sum(M, 0);
    std::vector<std::int64_t> ratio_n(M, 0), over_er(M, 0), over_cm(M, 0), failed(M, 0);
    for (std::size_t i = 0; i < entries.size(); ++i)
    {
        const auto& res = results[i];
        std::string tags;
        for (const auto& tag : entries[i].tags)
            tags += (tags.empty() ? "" : " ") + tag;
        for (std::size_t k = 0; k < M; ++k)
        {
            const auto& mo = res.methods[k];
            const std::string err = !res.error.empty() ? res.error : mo.error;
            if (!mo.ok)
            {
                ++failed[k];
                t.add({entries[i].path, tags, a.methods[k], res.N, res.E,
                       res.E ? json(std::sqrt(2. * double(res.E))) : json(nullptr), nullptr,
                       nullptr, res.error.empty() ? json(res.sigma_er) : json(nullptr),
                       res.error.empty() ? json(res.sigma_cm) : json(nullptr), nullptr, nullptr,
                       nullptr, nullptr, nullptr, err});
                continue;
            }
            const double ratio = mo.sigma / res.sigma_er;
            ratio_sum[k] += ratio;
            ++ratio_n[k];
            over_er[k] += mo.overfit_er;
            over_cm[k] += mo.overfit_cm;
            t.add({entries[i].path, tags, a.methods[k], res.N, res.E,
                   std::sqrt(2. * double(res.E)), mo.W, mo.sigma, res.sigma_er, res.sigma_cm,
                   ratio, mo.B, mo.B_e, mo.overfit_er, mo.overfit_cm, nullptr});
        }
        for (std::size_t p = 0; p < M; ++p)
            for (std::size_t q = 0; q < M; ++q)
                if (p != q && res.methods[p].ok && res.methods[q].ok)
                {
                    ++pairs[p][q];
                    wins[p][q] += res.methods[p].sigma < res.methods[q].sigma;
                }
    }

    // win_fraction[p][q]: share of networks where p's code is strictly shorter.
    json win = json::array();
    for (std::size_t p = 0; p < M; ++p)
    {
        json row = json::array();
        for (std::size_t q = 0; q < M; ++q)
            row.push_back(p == q || pairs[p][q] == 0
                              ? json(nullptr)
                              : json(double(wins[p][q]) / double(pairs[p][q])));
        win.push_back(row);
    }
    std::vector<std::size_t> order(M);
    for (std::size_t k = 0; k < M; ++k)
        order[k] = k;
    auto mean_ratio = [&](std::size_t k) {
        return ratio_n[k] ? ratio_sum[k] / double(ratio_n[k]) : HUGE_VAL;
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](auto x, auto y) { return mean_ratio(x) < mean_ratio(y); });
    json ranking = json::array();
    for (std::size_t rank = 0; rank < M; ++rank)
    {
        std::size_t k = order[rank];
        ranking.push_back({{"rank", rank + 1},
                           {"method", a.methods[k]},
                           {"mean_compression_ratio",
                            ratio_n[k] ? json(mean_ratio(k)) : json(nullptr)},
                           {"networks", ratio_n[k]},
                           {"overfit_er", over_er[k]},
                           {"overfit_cm", over_cm[k]},
                           {"failed", failed[k]}});
    }

    json doc;
    doc["config"] = config;
    doc["table"] = t.to_json();
    doc["win_fraction"] = {{"methods", a.methods}, {"matrix", win}};
    doc["ranking"] = ranking;
    emit(a.out, doc, &t);
}

} // namespace

void register_optimize(CLI::App& app)
{
    {
        auto a = std::make_shared<OptimizeArgs>();
        auto* sub = app.add_subcommand("optimize", "maximize a quality function");
        sub->add_option("edges", a->edges, "edge list")->required();
        add_model_flags(sub, a->model);
        add_search_flags(sub, a->search);
        add_output_flags(sub, a->out, "json");
        sub->add_option("--anneal", a->anneal, "Metropolis beta schedule, one sweep each")
            ->delimiter(',');
        sub->add_option("--partition-out", a->partition_out, "write the best partition here");
        sub->add_flag("--with-dl", a->with_dl, "also report the description length");
        sub->add_flag("--permissive", a->permissive, "drop self-loops and duplicate edges");
        sub->callback([a] { run_optimize(*a); });
    }
    {
        auto a = std::make_shared<GammaScanArgs>();
        auto* sub = app.add_subcommand("gamma-scan", "select the resolution that compresses most");
        sub->add_option("edges", a->edges, "edge list")->required();
        add_model_flags(sub, a->model, false);
        add_search_flags(sub, a->search);
        add_output_flags(sub, a->out, "json");
        sub->add_option("--gammas", a->gammas, "resolutions (default: 25 points on [0.01, 100])")
            ->delimiter(',');
        sub->add_option("--partition-out", a->partition_out, "write the selected partition here");
        sub->add_flag("--best-of-dc", a->best_of_dc,
                      "score each resolution with the better of plain and degree-corrected");
        sub->add_flag("--permissive", a->permissive, "drop self-loops and duplicate edges");
        sub->callback([a] { run_gamma_scan(*a); });
    }
    {
        auto a = std::make_shared<CompareArgs>();
        auto* sub = app.add_subcommand("compare", "compare methods over a corpus of networks");
        sub->add_option("manifest", a->manifest, "one edge-list path per line, optional tags")
            ->required();
        sub->add_option("--methods", a->methods, "methods to compare")
            ->delimiter(',')
            ->capture_default_str();
        add_model_flags(sub, a->model);
        add_search_flags(sub, a->search);
        add_output_flags(sub, a->out, "json");
        sub->add_flag("--permissive", a->permissive, "drop self-loops and duplicate edges");
        sub->callback([a] { run_compare(*a); });
    }
}

} // namespace cli
