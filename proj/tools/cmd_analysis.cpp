// dl, dos, priors, feasibility.

#include "cli.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "cdl/error.hpp"
#include "cdl/mdl.hpp"
#include "cdl/priors.hpp"

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

json nullable(double x)
{
    return std::isfinite(x) ? json(x) : json(nullptr);
}

// ---------------------------------------------------------------------------
// dl

struct DlArgs
{
    std::string edges, partition;
    ModelFlags model;
    OutputFlags out;
    bool best_of_dc = false;
    bool permissive = false;
};

void run_dl(const DlArgs& a)
{
    cdl::Method m = a.model.to_method();
    cdl::DlOptions opts = a.model.dl_options();
    json config = base_config("dl");
    json inputs;
    cdl::Graph g = load_graph(a.edges, a.permissive, &inputs["graph"]);
    cdl::Partition p = cdl::load_partition_file(a.partition, g);
    inputs["partition"] = {{"path", a.partition}, {"num_groups", p.num_groups()}};
    config["inputs"] = inputs;
    config["model"] = a.model.to_json();
    config["best_of_dc"] = a.best_of_dc;

    cdl::DlReport r = a.best_of_dc ? cdl::description_length_best_of(g, p, m, opts)
                                   : cdl::description_length(g, p, m, opts);
    json doc = dl_report_json(r);
    doc["config"] = config;
    if (a.out.format == "csv")
    {
        Table t{{"component", "nats"}, {}};
        for (const auto& [name, v] : r.components)
            t.add({name, v});
        t.add({"sigma", r.sigma});
        emit(a.out, doc, &t);
    }
    else
        emit(a.out, doc);
}

// ---------------------------------------------------------------------------
// dos

struct DosArgs
{
    SizeFlags size;
    ModelFlags model;
    OutputFlags out;
    std::size_t bins = 100;
    double beta = 0;
    bool by_b = false;
    bool relative_to_er = false;
    std::string graph;
};

void run_dos(const DosArgs& a)
{
    cdl::Method m = a.model.to_method();
    if (!m.has_planted_form())
        throw UsageError("dos needs a method with an implicit model (modularity or infomap)");
    if (m.degree_corrected && a.graph.empty())
        throw UsageError("--dc needs --graph for the degree sequence");
    if (a.bins < 1)
        throw UsageError("--bins must be >= 1");
    if (!std::isfinite(a.beta))
        throw UsageError("--beta must be finite");

    json config = base_config("dos");
    std::int64_t N = 0, E = 0;
    std::optional<cdl::DegreeStats> ds;
    if (!a.graph.empty())
    {
        json info;
        cdl::Graph g = load_graph(a.graph, false, &info);
        config["inputs"] = {{"graph", info}};
        N = std::int64_t(g.num_nodes());
        E = std::int64_t(g.num_edges());
        ds = cdl::degree_stats(g);
    }
    else
    {
        config["size"] = a.size.to_json();
        N = a.size.N;
        E = a.size.edges();
    }
    config["N"] = N;
    config["E"] = E;
    config["model"] = a.model.to_json();
    config["bins"] = a.bins;
    config["beta"] = a.beta;
    config["by_b"] = a.by_b;
    config["relative_to_er"] = a.relative_to_er;

    cdl::ImplicitModel model(N, E, m, a.model.dl_options(), ds ? &*ds : nullptr);
    const cdl::PlantedGrid& grid = model.grid();
    cdl::DosHistogram h = cdl::dos_histogram(grid, a.bins, a.beta, a.beta != 0);
    const double s_er = cdl::sigma_er(N, E);
    // Relative values subtract the bare random-graph code length.
    const double ref = a.relative_to_er ? s_er : 0;
    config["grid"] = json::parse(grid.config_json());
    config["sigma_er"] = s_er;

    Table t;
    t.columns = {"W_bin_center", "W_lo", "W_hi", "log_xi", "mean_B", "sigma", "beta_star",
                 "beta_clamped", "sigma_er"};
    if (a.by_b)
        for (auto b : h.b_values)
            t.columns.push_back("log_xi_B" + std::to_string(b));
    for (std::size_t k = 0; k < h.bins(); ++k)
    {
        const double w = h.center(k);
        double sigma = std::numeric_limits<double>::quiet_NaN();
        json beta_star = nullptr;
        bool clamped = false;
        if (std::isfinite(h.log_xi[k]))
        {
            cdl::DlReport r = model.describe(w);
            sigma = r.sigma;
            beta_star = *r.beta_star;
            clamped = r.has_flag("beta_clamped_high") || r.has_flag("beta_clamped_low");
        }
        std::vector<json> row{w,
                              h.edges[k],
                              h.edges[k + 1],
                              nullable(h.log_xi[k] - ref),
                              nullable(h.mean_b[k]),
                              nullable(sigma - ref),
                              beta_star,
                              clamped,
                              s_er - ref};
        if (a.by_b)
            for (double v : h.log_xi_b[k])
                row.push_back(nullable(v - ref));
        t.add(std::move(row));
    }
    json doc;
    doc["config"] = config;
    doc["table"] = t.to_json();
    emit(a.out, doc, &t);
}

// ---------------------------------------------------------------------------
// priors

struct BetaFlags
{
    std::vector<double> betas;
    double from = 0, to = 0;
    int steps = 0;
    bool per_n = false;
    bool log_spacing = false;

    // Explicit list, or `steps` points on [from, to]; multiplied by N when
    // per_n.
    std::vector<double> resolve(std::int64_t N, std::vector<double> fallback) const
    {
        std::vector<double> out = betas;
        if (!out.empty() && steps > 0)
            throw UsageError("give either --betas or --beta-from/--beta-to/--beta-steps");
        if (out.empty() && steps > 0)
        {
            if (!(to >= from) || (log_spacing && !(from > 0)))
                throw UsageError("invalid beta range");
            for (int i = 0; i < steps; ++i)
            {
                double t = steps == 1 ? 0 : double(i) / (steps - 1);
                out.push_back(log_spacing ? from * std::pow(to / from, t) : from + t * (to - from));
            }
        }
        if (out.empty())
            return fallback; // already absolute
        for (double& b : out)
        {
            if (!std::isfinite(b))
                throw UsageError("betas must be finite");
            if (per_n)
                b *= double(N);
        }
        return out;
    }

    json to_json() const
    {
        json j;
        j["betas"] = betas;
        j["beta_from"] = from;
        j["beta_to"] = to;
        j["beta_steps"] = steps;
        j["beta_per_n"] = per_n;
        j["log_spacing"] = log_spacing;
        return j;
    }
};

void add_beta_flags(CLI::App* app, BetaFlags& f)
{
    app->add_option("--betas", f.betas, "explicit beta values")->delimiter(',');
    app->add_option("--beta-from", f.from, "first beta of a range");
    app->add_option("--beta-to", f.to, "last beta of a range");
    app->add_option("--beta-steps", f.steps, "number of betas in the range");
    app->add_flag("--log-spacing", f.log_spacing, "geometric spacing of the range");
    app->add_flag("--beta-per-n", f.per_n, "betas are given as beta / N");
}

// beta / N from 10^-1 to 10^3, 81 points.
std::vector<double> default_betas(std::int64_t N)
{
    std::vector<double> out;
    for (int i = 0; i <= 80; ++i)
        out.push_back(double(N) * std::pow(10., -1 + 4. * i / 80));
    return out;
}

json transition_json(const std::optional<cdl::Transition>& t, std::int64_t N)
{
    if (!t)
        return nullptr;
    return {{"beta_star", t->beta_star},     {"beta_star_per_n", t->beta_star / double(N)},
            {"beta_lo", t->beta_lo},         {"beta_hi", t->beta_hi},
            {"b_below", t->b_below},         {"b_above", t->b_above}};
}

struct PriorsArgs
{
    SizeFlags size;
    ModelFlags model;
    OutputFlags out;
    BetaFlags beta;
    std::string kind = "curve";
    std::size_t bins = 100;
    double near_transition = 0;
    bool find_transition = false;
};

void run_priors(const PriorsArgs& a)
{
    cdl::Method m = a.model.to_method();
    if (!m.has_planted_form())
        throw UsageError("priors need a method with an implicit model (modularity or infomap)");
    if (m.degree_corrected)
        throw UsageError("priors are tabulated for the plain model only");
    if (a.bins < 1)
        throw UsageError("--bins must be >= 1");
    if (a.near_transition < 0 || a.near_transition >= 1)
        throw UsageError("--near-transition must lie in [0, 1)");
    const std::int64_t N = a.size.N, E = a.size.edges();

    json config = base_config("priors");
    config["size"] = a.size.to_json();
    config["model"] = a.model.to_json();
    config["kind"] = a.kind;
    config["bins"] = a.bins;
    config["beta_flags"] = a.beta.to_json();
    config["near_transition"] = a.near_transition;

    cdl::PlantedGrid grid(N, E, m, a.model.grid_options());
    config["grid"] = json::parse(grid.config_json());

    std::optional<cdl::Transition> tr;
    if (a.find_transition || a.near_transition > 0)
        tr = cdl::find_transition(grid, default_betas(N));
    config["transition"] = transition_json(tr, N);

    std::vector<double> betas;
    if (a.near_transition > 0)
    {
        if (!tr)
            throw cdl::NumericError("no discontinuous transition found for --near-transition");
        // Five points spanning beta* (1 -/+ fraction).
        for (int i = -2; i <= 2; ++i)
            betas.push_back(tr->beta_star * (1 + a.near_transition * i / 2));
    }
    else
        betas = a.beta.resolve(N, default_betas(N));
    config["resolved_betas"] = betas;

    Table t;
    if (a.kind == "conditional")
    {
        cdl::ConditionalB c = cdl::conditional_b_given_w(grid, a.bins);
        t.columns = {"W_bin_center", "W_lo", "W_hi", "mean_B"};
        for (std::size_t k = 0; k + 1 < c.edges.size(); ++k)
            t.add({(c.edges[k] + c.edges[k + 1]) / 2, c.edges[k], c.edges[k + 1],
                   nullable(c.mean_b[k])});
    }
    else
    {
        cdl::PriorCurveOptions po;
        po.w_bins = a.kind == "w" ? a.bins : 0;
        po.b_table = a.kind == "b";
        cdl::PriorCurve pc = cdl::prior_curves(grid, betas, po);
        if (a.kind == "curve")
        {
            t.columns = {"beta", "beta_per_n", "mean_W", "mean_B", "log_Z", "B_star"};
            for (std::size_t i = 0; i < pc.beta.size(); ++i)
                t.add({pc.beta[i], pc.beta[i] / double(N), pc.mean_W[i], pc.mean_B[i],
                       pc.log_Z[i], cdl::b_star(pc.beta[i], grid)});
        }
        else if (a.kind == "w")
        {
            t.columns = {"beta", "W_bin_center", "W_lo", "W_hi", "p_W"};
            for (std::size_t i = 0; i < pc.beta.size(); ++i)
                for (std::size_t k = 0; k + 1 < pc.w_edges.size(); ++k)
                    t.add({pc.beta[i], (pc.w_edges[k] + pc.w_edges[k + 1]) / 2, pc.w_edges[k],
                           pc.w_edges[k + 1], pc.p_W[i][k]});
        }
        else
        {
            t.columns = {"beta", "B", "p_B", "p_B_span", "local_max"};
            json modes = json::array();
            for (std::size_t i = 0; i < pc.beta.size(); ++i)
            {
                auto peaks = cdl::local_maxima(pc.p_B[i]);
                std::vector<bool> is_peak(pc.b_values.size(), false);
                json mode_b = json::array();
                for (auto j : peaks)
                {
                    is_peak[j] = true;
                    mode_b.push_back(pc.b_values[j]);
                }
                modes.push_back({{"beta", pc.beta[i]}, {"modes_B", mode_b}});
                for (std::size_t j = 0; j < pc.b_values.size(); ++j)
                    t.add({pc.beta[i], pc.b_values[j], pc.p_B[i][j], pc.p_B_span[i][j],
                           bool(is_peak[j])});
            }
            config["modes"] = modes;
        }
    }
    json doc;
    doc["config"] = config;
    doc["table"] = t.to_json();
    emit(a.out, doc, &t);
}

// ---------------------------------------------------------------------------
// feasibility

struct FeasibilityArgs
{
    SizeFlags size;
    ModelFlags model;
    OutputFlags out;
    BetaFlags beta;
    std::vector<double> gammas{0.5, 1, 2, 5};
};

void run_feasibility(const FeasibilityArgs& a)
{
    if (a.model.method != "modularity")
        throw UsageError("feasibility scans modularity resolutions; use --method modularity");
    if (a.gammas.empty())
        throw UsageError("--gammas must not be empty");
    for (double g : a.gammas)
        if (!(g > 0) || !std::isfinite(g))
            throw UsageError("--gammas must be positive");
    const std::int64_t N = a.size.N, E = a.size.edges();
    const double avg_k = 2. * double(E) / double(N);
    std::vector<double> betas = a.beta.resolve(N, default_betas(N));

    json config = base_config("feasibility");
    config["size"] = a.size.to_json();
    config["model"] = a.model.to_json();
    config["gammas"] = a.gammas;
    config["beta_flags"] = a.beta.to_json();
    config["resolved_betas"] = betas;
    // B_star >= N / 10 marks the singleton-like phase where the planted
    // picture carries no finite group count.
    config["finite_b_limit"] = N / 10;

    Table t{{"gamma", "beta", "beta_per_n", "E_in_star", "B_star", "W_star", "ein_frac",
             "detectability", "above_detectability", "finite"},
            {}};
    json grids = json::array();
    for (double gamma : a.gammas)
    {
        cdl::PlantedGrid grid(N, E, cdl::Method::modularity(gamma), a.model.grid_options());
        grids.push_back(json::parse(grid.config_json()));
        cdl::FeasibilityCurve fc = cdl::feasibility_curve(grid, betas);
        for (const auto& pt : fc.points)
        {
            const double frac = double(pt.E_in_star) / double(E);
            const double det = cdl::detectability_ein_fraction(pt.B_star, avg_k);
            t.add({gamma, pt.beta, pt.beta / double(N), pt.E_in_star, pt.B_star, pt.W_star, frac,
                   det, frac > det, pt.B_star < N / 10});
        }
    }
    config["grids"] = grids;
    json doc;
    doc["config"] = config;
    doc["table"] = t.to_json();
    emit(a.out, doc, &t);
}

} // namespace

void register_analysis(CLI::App& app)
{
    {
        auto a = std::make_shared<DlArgs>();
        auto* sub = app.add_subcommand("dl", "description length of a partitioned network");
        sub->add_option("edges", a->edges, "edge list")->required();
        sub->add_option("partition", a->partition, "partition file")->required();
        add_model_flags(sub, a->model);
        add_output_flags(sub, a->out, "json");
        sub->add_flag("--best-of-dc", a->best_of_dc,
                      "report the smaller of the plain and degree-corrected code lengths");
        sub->add_flag("--permissive", a->permissive, "drop self-loops and duplicate edges");
        sub->callback([a] { run_dl(*a); });
    }
    {
        auto a = std::make_shared<DosArgs>();
        auto* sub = app.add_subcommand("dos", "density of states and description length curve");
        add_size_flags(sub, a->size);
        sub->get_option("--N")->required(false);
        add_model_flags(sub, a->model, false);
        add_output_flags(sub, a->out, "csv");
        sub->add_option("--bins", a->bins, "W bins")->capture_default_str();
        sub->add_option("--beta", a->beta, "beta of the weighted joint histogram")
            ->capture_default_str();
        sub->add_flag("--by-b", a->by_b, "per-B columns");
        sub->add_flag("--relative-to-er", a->relative_to_er,
                      "subtract the random-graph code length");
        sub->add_option("--graph", a->graph, "edge list fixing N, E and the degrees");
        sub->callback([a] {
            if (a->graph.empty() && a->size.N == 0)
                throw UsageError("give --N or --graph");
            run_dos(*a);
        });
    }
    {
        auto a = std::make_shared<PriorsArgs>();
        auto* sub = app.add_subcommand("priors", "implicit priors on W and B");
        add_size_flags(sub, a->size);
        add_model_flags(sub, a->model, false);
        add_output_flags(sub, a->out, "csv");
        add_beta_flags(sub, a->beta);
        sub->add_option("--kind", a->kind, "table kind")
            ->check(CLI::IsMember({"curve", "b", "w", "conditional"}))
            ->capture_default_str();
        sub->add_option("--bins", a->bins, "W bins")->capture_default_str();
        sub->add_option("--near-transition", a->near_transition,
                        "tabulate at beta* (1 +- this fraction) instead of --betas");
        sub->add_flag("--find-transition", a->find_transition,
                      "locate the discontinuous transition and echo it");
        sub->callback([a] { run_priors(*a); });
    }
    {
        auto a = std::make_shared<FeasibilityArgs>();
        auto* sub = app.add_subcommand("feasibility", "maximum-weight states against detectability");
        add_size_flags(sub, a->size);
        add_model_flags(sub, a->model, false);
        add_output_flags(sub, a->out, "csv");
        add_beta_flags(sub, a->beta);
        sub->add_option("--gammas", a->gammas, "modularity resolutions")
            ->delimiter(',')
            ->capture_default_str();
        sub->callback([a] { run_feasibility(*a); });
    }
}

} // namespace cli
