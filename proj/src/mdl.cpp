#include "cdl/mdl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/toms748_solve.hpp>

#include "cdl/error.hpp"
#include "cdl/numeric.hpp"

namespace cdl
{

namespace
{

double pairs(std::int64_t N)
{
    return double(N) * double(N - 1) / 2;
}

void require_edges(std::int64_t E)
{
    if (E < 1)
        throw DomainError("description length needs at least one edge");
}

double sum_components(const std::vector<std::pair<std::string, double>>& c)
{
    double s = 0;
    for (const auto& [name, v] : c)
        s += v;
    return s;
}

void add_flag(DlReport& r, const std::string& f)
{
    if (!r.has_flag(f))
        r.flags.push_back(f);
}

} // namespace

bool DlReport::has_flag(const std::string& f) const
{
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

double e_prior(std::int64_t N)
{
    return std::log1p(pairs(N));
}

double sigma_er(std::int64_t N, std::int64_t E)
{
    if (N < 1 || E < 0 || double(E) > pairs(N))
        throw DomainError("sigma_er needs 0 <= E <= C(N,2)");
    return log_binomial(pairs(N), double(E));
}

std::vector<std::pair<std::string, double>> degree_prior_terms(const DegreeStats& ds, bool flat)
{
    if (flat)
        return {{"degree_multiset_prior", log_multiset(ds.N(), 2 * ds.E)}};
    double hist = log_factorial(double(ds.N()));
    for (const auto& [k, count] : ds.eta)
        hist -= log_factorial(double(count));
    return {{"degree_partition_prior", log_q_partitions(2 * ds.E, ds.N())},
            {"degree_histogram_prior", hist}};
}

double sigma_cm(const DegreeStats& ds)
{
    require_edges(ds.E);
    // B = 1 collapse of the degree-corrected count: pairings of 2E stubs
    // divided by the stub relabelings within each node.
    double graph = log_factorial(double(2 * ds.E)) - log_double_factorial_even(2 * ds.E) -
                   sum_log_degree_factorials(ds);
    return graph + sum_components(degree_prior_terms(ds, false)) + e_prior(ds.N());
}

double sigma_cm(const Graph& g)
{
    return sigma_cm(degree_stats(g));
}

double sigma_pp(const Graph& g, const Partition& p)
{
    require_edges(g.num_edges());
    return planted_partition_dl(block_summary(g, p));
}

Baselines baselines(const Graph& g, const Partition* p)
{
    Baselines b;
    b.sigma_er = sigma_er(g.num_nodes(), g.num_edges());
    b.sigma_er_with_prior = b.sigma_er + e_prior(g.num_nodes());
    b.sigma_cm = sigma_cm(g);
    if (p)
        b.sigma_pp = sigma_pp(g, *p);
    return b;
}

// ---------------------------------------------------------------------------

ImplicitModel::ImplicitModel(std::int64_t N, std::int64_t E, Method m, DlOptions opts,
                             const DegreeStats* ds)
    : _N(N), _E(E), _method(m), _opts(std::move(opts))
{
    m.validate();
    require_edges(E);
    if (!m.has_planted_form())
        throw DomainError("method '" + method_name(m.kind) + "' has no implicit model");
    _beta_max = _opts.beta_max > 0 ? _opts.beta_max : 1e3 * double(N);
    if (!std::isfinite(_beta_max))
        throw DomainError("beta_max must be finite");
    if (m.degree_corrected)
    {
        if (!ds)
            throw DomainError("degree-corrected model needs degree statistics");
        if (ds->N() != N || ds->E != E)
            throw DomainError("degree statistics do not match (N, E)");
        _k = ds->k;
        _degree_terms = degree_prior_terms(*ds, _opts.flat_degree_prior);
        _q_approximate = !_opts.flat_degree_prior && !q_partitions_is_exact(2 * E);
    }
    _e_prior = e_prior(N);
    _grid = std::make_unique<PlantedGrid>(N, E, m, _opts.grid, m.degree_corrected ? ds : nullptr);
}

bool ImplicitModel::matches(const DegreeStats& ds) const
{
    if (ds.N() != _N || ds.E != _E)
        return false;
    return !_method.degree_corrected || ds.k == _k;
}

BetaFit ImplicitModel::fit_beta(double W) const
{
    if (!std::isfinite(W))
        throw DomainError("quality value must be finite");
    BetaFit fit;
    const double lo = beta_min(), hi = beta_max();
    const double f_lo = mean_quality(lo, *_grid) - W;
    if (f_lo >= 0)
    {
        // W at or below the prior mean at the lower end.
        fit.beta = lo;
        fit.mean_W = f_lo + W;
        fit.clamped_low = f_lo > 0;
        return fit;
    }
    const double f_hi = mean_quality(hi, *_grid) - W;
    if (f_hi <= 0)
    {
        fit.beta = hi;
        fit.mean_W = f_hi + W;
        fit.clamped_high = f_hi < 0;
        return fit;
    }
    // <W>_beta is nondecreasing; toms748 with a bracket-width stop keeps
    // every iterate a valid bracket, and the endpoint with the smaller
    // residual is returned.
    const double residual_tol = 1e-9 * std::max(1., std::abs(W));
    double best_beta = lo, best_f = f_lo;
    auto f = [&](double beta) {
        double v = mean_quality(beta, *_grid) - W;
        if (std::abs(v) < std::abs(best_f))
        {
            best_f = v;
            best_beta = beta;
        }
        return v;
    };
    auto stop = [&](double a, double b) {
        return std::abs(best_f) <= residual_tol ||
               std::abs(b - a) <= 4 * std::numeric_limits<double>::epsilon() *
                                      std::max(std::abs(a), std::abs(b));
    };
    std::uintmax_t iters = 300;
    boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, stop, iters);
    fit.beta = best_beta;
    fit.mean_W = best_f + W;
    return fit;
}

double ImplicitModel::sigma_at(double beta, double W) const
{
    return -beta * W + log_partition_function(beta, *_grid) + _e_prior +
           sum_components(_degree_terms);
}

DlReport ImplicitModel::describe(double W) const
{
    DlReport r;
    r.method = _method;
    r.W = W;
    BetaFit fit = fit_beta(W);
    r.beta_star = fit.beta;
    r.mean_W_at_beta = fit.mean_W;
    const double log_z = log_partition_function(fit.beta, *_grid);
    r.components.emplace_back("beta_W", -fit.beta * W);
    r.components.emplace_back(_method.degree_corrected ? "log_Z_dc" : "log_Z", log_z);
    r.components.emplace_back("E_prior", _e_prior);
    for (const auto& t : _degree_terms)
        r.components.push_back(t);
    r.sigma = sum_components(r.components);
    if (fit.clamped_high)
        add_flag(r, "beta_clamped_high");
    if (fit.clamped_low)
        add_flag(r, "beta_clamped_low");
    if (_q_approximate)
        add_flag(r, "q_partitions_approximate");
    if (_method.kind == MethodKind::Infomap)
        add_flag(r, "infomap_degree_entropy_omitted");
    r.grid_config = _grid->config_json();
    return r;
}

// ---------------------------------------------------------------------------

namespace
{

void attach_baselines(DlReport& r, const Graph& g, const Partition& p)
{
    r.baselines = baselines(g, &p);
    r.overfit_er = r.sigma > r.baselines.sigma_er;
    r.overfit_cm = r.sigma > r.baselines.sigma_cm;
}

DlReport planted_partition_report(const Graph& g, const Partition& p)
{
    BlockSummary s = block_summary(g, p);
    PlantedPartitionTerms t = planted_partition_terms(s);
    DlReport r;
    r.method = Method::planted_partition();
    r.components = {{"graph", t.graph},         {"labels", t.labels},
                    {"composition", t.composition}, {"B_prior", t.b_prior},
                    {"E_in_prior", t.ein_prior}, {"E_prior", t.e_prior}};
    r.sigma = sum_components(r.components);
    r.W = -r.sigma;
    r.mean_W_at_beta = r.W;
    attach_baselines(r, g, p);
    return r;
}

} // namespace

DlReport description_length(const Graph& g, const Partition& p, const ImplicitModel& model)
{
    require_edges(g.num_edges());
    if (std::int64_t(g.num_nodes()) != model.N() || std::int64_t(g.num_edges()) != model.E())
        throw DomainError("graph size does not match the implicit model");
    if (model.method().degree_corrected && !model.matches(degree_stats(g)))
        throw DomainError("graph degree sequence does not match the degree-corrected model");
    double W = quality(block_summary(g, p), model.method());
    DlReport r = model.describe(W);
    attach_baselines(r, g, p);
    return r;
}

DlReport description_length(const Graph& g, const Partition& p, const Method& m,
                            const DlOptions& opts)
{
    m.validate();
    require_edges(g.num_edges());
    if (m.kind == MethodKind::PlantedPartition)
    {
        if (m.degree_corrected)
            throw DomainError("the planted-partition method has no degree-corrected variant");
        return planted_partition_report(g, p);
    }
    std::optional<DegreeStats> ds;
    if (m.degree_corrected)
        ds = degree_stats(g);
    ImplicitModel model(g.num_nodes(), g.num_edges(), m, opts, ds ? &*ds : nullptr);
    return description_length(g, p, model);
}

DlReport description_length_best_of(const Graph& g, const Partition& p, Method m,
                                    const DlOptions& opts)
{
    if (m.kind == MethodKind::PlantedPartition)
        return description_length(g, p, m, opts);
    m.degree_corrected = false;
    DlReport plain = description_length(g, p, m, opts);
    m.degree_corrected = true;
    DlReport dc = description_length(g, p, m, opts);
    return dc.sigma < plain.sigma ? dc : plain;
}

} // namespace cdl
