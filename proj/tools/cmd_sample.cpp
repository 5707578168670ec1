// sample: planted instances of an implicit model or of the planted partition.

#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <memory>

#include "cdl/error.hpp"
#include "cdl/instances.hpp"

namespace cli
{

namespace
{

struct SampleArgs
{
    SizeFlags size;
    ModelFlags model;
    std::uint64_t seed = 1;
    double beta = std::nan("");
    double beta_per_n = std::nan("");
    std::int64_t pp_B = 0;
    std::int64_t pp_ein = -1;
    int count = 1;
    std::string prefix;
};

void write_file(const std::string& path, const std::string& body)
{
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << body))
        throw cdl::ValidationError("cannot write " + path);
}

json meta_json(const cdl::InstanceMeta& m)
{
    json j;
    j["beta"] = m.beta ? json(*m.beta) : json(nullptr);
    j["method"] = m.method ? method_json(*m.method) : json(nullptr);
    j["N"] = m.N;
    j["E"] = m.E;
    j["B"] = m.B;
    j["E_in"] = m.E_in;
    j["seed"] = m.seed;
    j["equal_sizes"] = m.equal_sizes;
    return j;
}

void run_sample(const SampleArgs& a)
{
    const bool pp = a.pp_B > 0 || a.pp_ein >= 0;
    const bool has_beta = !std::isnan(a.beta), has_bpn = !std::isnan(a.beta_per_n);
    if (a.count < 1)
        throw UsageError("--count must be >= 1");
    if (a.prefix.empty())
        throw UsageError("--out prefix is required");
    const std::int64_t N = a.size.N, E = a.size.edges();

    json config;
    config["subcommand"] = "sample";
    config["version"] = tool_version;
    config["size"] = a.size.to_json();
    config["seed"] = a.seed;
    config["count"] = a.count;
    config["out"] = a.prefix;

    std::unique_ptr<cdl::PlantedGrid> grid;
    double beta = 0;
    if (pp)
    {
        if (a.pp_B < 1 || a.pp_ein < 0)
            throw UsageError("--pp needs both --B and --E-in");
        if (has_beta || has_bpn)
            throw UsageError("--beta does not apply to planted-partition samples");
        config["pp"] = {{"B", a.pp_B}, {"E_in", a.pp_ein}};
    }
    else
    {
        cdl::Method m = a.model.to_method();
        if (!m.has_planted_form())
            throw UsageError("sample --method pp needs --B and --E-in");
        if (m.degree_corrected)
            throw UsageError("degree-corrected instances are not sampled");
        if (has_beta == has_bpn)
            throw UsageError("give exactly one of --beta and --beta-per-n");
        beta = has_beta ? a.beta : a.beta_per_n * double(N);
        if (!std::isfinite(beta))
            throw UsageError("beta must be finite");
        config["model"] = a.model.to_json();
        config["beta"] = beta;
        grid = std::make_unique<cdl::PlantedGrid>(N, E, m, a.model.grid_options());
        config["grid"] = json::parse(grid->config_json());
    }

    json files = json::array();
    for (int i = 0; i < a.count; ++i)
    {
        const std::uint64_t seed = a.count == 1 ? a.seed : cdl::derive_seed(a.seed, i);
        cdl::InstanceSample s = pp ? cdl::sample_pp(N, a.pp_B, E, a.pp_ein, seed)
                                   : cdl::sample_instance(*grid, beta, seed);
        const std::string stem =
            a.count == 1 ? a.prefix : a.prefix + "_" + std::to_string(i);
        std::ostringstream edges, part;
        cdl::write_edge_list(edges, s.graph);
        cdl::write_partition(part, s.graph, s.partition);
        write_file(stem + ".edges", edges.str());
        write_file(stem + ".part", part.str());
        json meta;
        meta["instance"] = meta_json(s.meta);
        meta["index"] = i;
        meta["config"] = config;
        write_file(stem + ".json", meta.dump(2) + "\n");
        files.push_back({{"edges", stem + ".edges"},
                         {"partition", stem + ".part"},
                         {"meta", stem + ".json"},
                         {"instance", meta_json(s.meta)}});
    }
    json doc;
    doc["config"] = config;
    doc["instances"] = files;
    std::cout << doc.dump(2) << '\n';
}

} // namespace

void register_sample(CLI::App& app)
{
    auto a = std::make_shared<SampleArgs>();
    auto* sub = app.add_subcommand("sample", "sample planted instances");
    add_size_flags(sub, a->size);
    add_model_flags(sub, a->model, false);
    sub->add_option("--seed", a->seed, "random seed")->capture_default_str();
    sub->add_option("--beta", a->beta, "inverse temperature");
    sub->add_option("--beta-per-n", a->beta_per_n, "inverse temperature divided by N");
    auto* pp = sub->add_flag("--pp", "sample the planted partition directly");
    sub->add_option("--B", a->pp_B, "planted groups (with --pp)")->needs(pp);
    sub->add_option("--E-in", a->pp_ein, "planted internal edges (with --pp)")->needs(pp);
    sub->add_option("--count", a->count, "instances")->capture_default_str();
    sub->add_option("--out", a->prefix, "output prefix: PREFIX.edges, .part, .json")->required();
    sub->callback([a, pp] {
        if (pp->count() > 0 && (a->pp_B < 1 || a->pp_ein < 0))
            throw UsageError("--pp needs both --B and --E-in");
        run_sample(*a);
    });
}

} // namespace cli
