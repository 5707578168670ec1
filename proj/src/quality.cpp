#include "cdl/quality.hpp"

#include <algorithm>
#include <cmath>

#include "cdl/error.hpp"
#include "cdl/numeric.hpp"

namespace cdl
{

void Method::validate() const
{
    if (kind == MethodKind::Modularity && !(gamma > 0))
        throw DomainError("modularity resolution must be positive, got " +
                          std::to_string(gamma));
}

std::string method_name(MethodKind kind)
{
    switch (kind)
    {
    case MethodKind::Modularity:
        return "modularity";
    case MethodKind::Infomap:
        return "infomap";
    case MethodKind::PlantedPartition:
        return "pp";
    }
    return "?";
}

MethodKind parse_method_name(const std::string& name)
{
    if (name == "modularity")
        return MethodKind::Modularity;
    if (name == "infomap")
        return MethodKind::Infomap;
    if (name == "pp")
        return MethodKind::PlantedPartition;
    throw DomainError("unknown method '" + name + "'");
}

namespace
{

void require_edges(std::int64_t E)
{
    if (E < 1)
        throw NumericError("quality undefined for a graph without edges");
}

} // namespace

double modularity(const BlockSummary& s, double gamma)
{
    require_edges(s.E);
    double two_e = 2. * double(s.E);
    double q = 0;
    for (std::int64_t r = 0; r < s.B; ++r)
    {
        double er = double(s.e_r[r]);
        q += double(s.e_rr[r]) - gamma * er * er / two_e;
    }
    return q / two_e;
}

double infomap_score(const BlockSummary& s)
{
    require_edges(s.E);
    double two_e = 2. * double(s.E);
    double exit_terms = 0, module_terms = 0;
    for (std::int64_t r = 0; r < s.B; ++r)
    {
        exit_terms += xlogx(double(s.e_r[r] - s.e_rr[r]) / two_e);
        module_terms += xlogx(double(2 * s.e_r[r] - s.e_rr[r]) / two_e);
    }
    // 1 - sum e_rr/2E counted exactly as (E - E_in)/E
    double out = double(s.E - s.E_in) / double(s.E);
    return -xlogx(out) + 2 * exit_terms - module_terms;
}

PlantedPartitionTerms planted_partition_terms(const BlockSummary& s)
{
    double N = double(s.N());
    double E = double(s.E);
    double within = 0, sq = 0, log_sizes = 0;
    for (auto n : s.n_r)
    {
        double dn = double(n);
        within += dn * (dn - 1) / 2;
        sq += dn * dn;
        log_sizes += log_factorial(dn);
    }
    double between = (N * N - sq) / 2;
    PlantedPartitionTerms t;
    t.graph = log_binomial(within, double(s.E_in)) + log_binomial(between, E - double(s.E_in));
    if (t.graph == neg_inf)
        throw InfeasibleError("planted partition: edge counts exceed pair capacity");
    t.labels = log_factorial(N) - log_sizes;
    t.composition = log_binomial(N - 1, double(s.B) - 1);
    t.b_prior = std::log(N);
    t.ein_prior = std::log(E + 1);
    t.e_prior = std::log(N * (N - 1) / 2 + 1);
    return t;
}

double planted_partition_dl(const BlockSummary& s)
{
    return planted_partition_terms(s).total();
}

double quality(const BlockSummary& s, const Method& m)
{
    switch (m.kind)
    {
    case MethodKind::Modularity:
        return modularity(s, m.gamma);
    case MethodKind::Infomap:
        return infomap_score(s);
    case MethodKind::PlantedPartition:
        return -planted_partition_dl(s);
    }
    return 0;
}

double q_pp(double E_in, std::int64_t E, double B, double gamma)
{
    return E_in / double(E) - gamma / B;
}

double l_pp(double E_in, std::int64_t E, double B)
{
    double dE = double(E);
    double out = (dE - E_in) / dE;
    double module = (2 * dE - E_in) / dE;
    double t1 = -xlogx(out);
    double t2 = out > 0 ? 2 * out * std::log(out / B) : 0.;
    double t3 = -module * std::log(module / B);
    return t1 + t2 + t3;
}

double w_pp(double E_in, std::int64_t E, double B, const Method& m)
{
    switch (m.kind)
    {
    case MethodKind::Modularity:
        return q_pp(E_in, E, B, m.gamma);
    case MethodKind::Infomap:
        return l_pp(E_in, E, B);
    case MethodKind::PlantedPartition:
        break;
    }
    throw DomainError("planted-partition method has no planted quality form");
}

double ein_from_q(double Q, std::int64_t E, double B, double gamma)
{
    double e_in = double(E) * (Q + gamma / B);
    // absorb rounding at the boundaries
    double slack = 1e-12 * double(E);
    if (e_in < -slack || e_in > double(E) + slack)
        throw InfeasibleError("modularity " + std::to_string(Q) +
                              " infeasible at B = " + std::to_string(B));
    return std::clamp(e_in, 0., double(E));
}

double ein_from_l(double L, std::int64_t E, double B, double tol)
{
    double dE = double(E);
    double lo_val = l_pp(0, E, B), hi_val = l_pp(dE, E, B);
    if (L < lo_val - 1e-12 || L > hi_val + 1e-12)
        throw InfeasibleError("Infomap score " + std::to_string(L) + " outside [" +
                              std::to_string(lo_val) + ", " + std::to_string(hi_val) +
                              "] at B = " + std::to_string(B));
    if (L <= lo_val)
        return 0.;
    if (L >= hi_val)
        return dE;
    double lo = 0, hi = 1;
    for (int it = 0; it < 200 && hi - lo > tol; ++it)
    {
        double mid = (lo + hi) / 2;
        if (l_pp(mid * dE, E, B) < L)
            lo = mid;
        else
            hi = mid;
    }
    double x = (lo + hi) / 2;
    if (!(hi - lo <= tol))
        throw NumericError("ein_from_l: bisection did not reach tolerance (bracket [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "])");
    return x * dE;
}

} // namespace cdl
