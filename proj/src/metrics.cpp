#include "cdl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "cdl/error.hpp"
#include "cdl/numeric.hpp"
#include "cdl/optimizer.hpp"
#include "cdl/parallel.hpp"
#include "cdl/quality.hpp"

namespace cdl
{

namespace
{

void require_same_size(const Partition& a, const Partition& b)
{
    if (a.num_nodes() != b.num_nodes())
        throw ValidationError("partitions cover different numbers of nodes");
}

std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t> contingency(const Partition& a,
                                                                            const Partition& b)
{
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t> t;
    for (std::size_t v = 0; v < a.num_nodes(); ++v)
        ++t[{a[v], b[v]}];
    return t;
}

// Minimum-cost perfect assignment on a square matrix (shortest augmenting
// paths with potentials, O(n^3)). Returns the column of each row.
std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<std::int64_t>>& cost)
{
    const std::size_t n = cost.size();
    const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
    // 1-based rows and columns; index 0 is the virtual source.
    std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0);
    std::vector<std::size_t> row_of(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i)
    {
        row_of[0] = i;
        std::size_t j0 = 0;
        std::vector<std::int64_t> min_v(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do
        {
            used[j0] = 1;
            std::size_t i0 = row_of[j0], j1 = 0;
            std::int64_t delta = inf;
            for (std::size_t j = 1; j <= n; ++j)
            {
                if (used[j])
                    continue;
                std::int64_t cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < min_v[j])
                {
                    min_v[j] = cur;
                    way[j] = j0;
                }
                if (min_v[j] < delta)
                {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j)
            {
                if (used[j])
                {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                }
                else
                    min_v[j] -= delta;
            }
            j0 = j1;
        } while (row_of[j0] != 0);
        do
        {
            std::size_t j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> col_of(n);
    for (std::size_t j = 1; j <= n; ++j)
        col_of[row_of[j] - 1] = j - 1;
    return col_of;
}

// Sums are taken relative to the first value, so constant data give exactly
// that value and zero variance.
double mean_of(std::span<const double> x)
{
    double s = 0;
    for (double v : x)
        s += v - x[0];
    return x[0] + s / double(x.size());
}

double sample_variance(std::span<const double> x, double mean)
{
    double s = 0, d_mean = mean - x[0];
    for (double v : x)
    {
        double d = (v - x[0]) - d_mean;
        s += d * d;
    }
    return s / double(x.size() - 1);
}

// Equiprobable multinomial over `cells` bins by sequential binomials.
void multinomial_equal(std::int64_t trials, std::size_t cells, std::mt19937_64& rng,
                       std::vector<std::int64_t>& out)
{
    out.assign(cells, 0);
    std::int64_t left = trials;
    for (std::size_t k = 0; k + 1 < cells && left > 0; ++k)
    {
        std::binomial_distribution<std::int64_t> draw(left, 1. / double(cells - k));
        out[k] = draw(rng);
        left -= out[k];
    }
    out[cells - 1] += left;
}

} // namespace

// ---------------------------------------------------------------------------
// Overlap and mutual information

Overlap overlap(const Partition& a, const Partition& b, std::size_t exact_limit)
{
    require_same_size(a, b);
    Overlap o;
    if (a.num_nodes() == 0)
    {
        o.value = 1;
        return o;
    }
    auto table = contingency(a, b);
    std::int64_t matched = 0;
    std::size_t n = std::max(a.num_groups(), b.num_groups());
    if (n <= exact_limit)
    {
        std::vector<std::vector<std::int64_t>> cost(n, std::vector<std::int64_t>(n, 0));
        for (auto& [rs, c] : table)
            cost[rs.first][rs.second] = -c;
        auto col = min_cost_assignment(cost);
        for (std::size_t r = 0; r < n; ++r)
            matched -= cost[r][col[r]];
    }
    else
    {
        std::vector<std::pair<std::int64_t, std::pair<std::uint32_t, std::uint32_t>>> cells;
        for (auto& [rs, c] : table)
            cells.push_back({c, rs});
        std::sort(cells.begin(), cells.end(), [](const auto& x, const auto& y) {
            return x.first != y.first ? x.first > y.first : x.second < y.second;
        });
        std::vector<char> row_used(a.num_groups(), 0), col_used(b.num_groups(), 0);
        for (auto& [c, rs] : cells)
            if (!row_used[rs.first] && !col_used[rs.second])
            {
                row_used[rs.first] = col_used[rs.second] = 1;
                matched += c;
            }
        o.approximate = true;
    }
    o.value = double(matched) / double(a.num_nodes());
    return o;
}

double max_overlap(const Partition& a, const Partition& b)
{
    return overlap(a, b).value;
}

double partition_entropy(const Partition& p)
{
    double N = double(p.num_nodes()), h = 0;
    for (auto n : p.sizes())
        h -= xlogx(double(n) / N);
    return h;
}

double mutual_information(const Partition& a, const Partition& b)
{
    require_same_size(a, b);
    double N = double(a.num_nodes()), mi = 0;
    auto sa = a.sizes(), sb = b.sizes();
    for (auto& [rs, c] : contingency(a, b))
    {
        double n = double(c);
        mi += n / N * std::log(N * n / (double(sa[rs.first]) * double(sb[rs.second])));
    }
    return std::max(mi, 0.);
}

double expected_mutual_information(const Partition& a, const Partition& b)
{
    require_same_size(a, b);
    const std::int64_t N = std::int64_t(a.num_nodes());
    const double dN = double(N), log_fact_N = log_factorial(dN);
    double emi = 0;
    for (auto ai : a.sizes())
        for (auto bj : b.sizes())
        {
            double fixed = log_factorial(double(ai)) + log_factorial(double(bj)) +
                           log_factorial(double(N - ai)) + log_factorial(double(N - bj)) -
                           log_fact_N;
            for (std::int64_t n = std::max<std::int64_t>(1, ai + bj - N); n <= std::min(ai, bj); ++n)
            {
                double dn = double(n);
                double log_p = fixed - log_factorial(dn) - log_factorial(double(ai - n)) -
                               log_factorial(double(bj - n)) -
                               log_factorial(double(N - ai - bj + n));
                emi += dn / dN * std::log(dN * dn / (double(ai) * double(bj))) * std::exp(log_p);
            }
        }
    return emi;
}

double ami(const Partition& a, const Partition& b)
{
    require_same_size(a, b);
    bool trivial_a = a.num_groups() <= 1, trivial_b = b.num_groups() <= 1;
    if (trivial_a && trivial_b)
        return 1;
    if (trivial_a || trivial_b)
        return 0;
    double mi = mutual_information(a, b), emi = expected_mutual_information(a, b);
    double denom = std::max(partition_entropy(a), partition_entropy(b)) - emi;
    if (std::abs(denom) < 1e-15)
        return a == b ? 1. : 0.;
    return (mi - emi) / denom;
}

ComparisonRecord compare_partitions(const Partition& a, const Partition& b)
{
    ComparisonRecord r;
    Overlap o = overlap(a, b);
    r.overlap = o.value;
    r.overlap_approximate = o.approximate;
    r.ami = ami(a, b);
    r.B_e_first = effective_b(a);
    r.B_e_second = effective_b(b);
    return r;
}

// ---------------------------------------------------------------------------
// KL estimate

KlEstimate kl_estimate(const InstanceSampler& sampler, const SigmaEvaluator& sigma_p,
                       const SigmaEvaluator& sigma_q, std::int64_t samples, std::uint64_t seed,
                       unsigned threads)
{
    if (samples < 2)
        throw DomainError("kl_estimate needs at least two samples");
    KlEstimate k;
    k.values.assign(std::size_t(samples), std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> errors(static_cast<std::size_t>(samples));
    parallel_for(std::size_t(samples), threads, [&](std::size_t i) {
        try
        {
            InstanceSample s = sampler(derive_seed(seed, i));
            double p = sigma_p(s.graph, s.partition);
            double q = sigma_q(s.graph, s.partition);
            if (!std::isfinite(p) || !std::isfinite(q))
                throw NumericError("nonfinite description length");
            k.values[i] = q - p;
        }
        catch (const std::exception& e)
        {
            errors[i] = e.what();
        }
    });
    std::vector<double> ok;
    for (std::size_t i = 0; i < k.values.size(); ++i)
    {
        if (std::isnan(k.values[i]))
        {
            ++k.excluded;
            k.errors.push_back("sample " + std::to_string(i) + ": " + errors[i]);
        }
        else
            ok.push_back(k.values[i]);
    }
    if (ok.size() < 2)
        throw NumericError("kl_estimate: fewer than two samples could be evaluated");
    k.S = std::int64_t(ok.size());
    k.mean = mean_of(ok);
    k.standard_error = std::sqrt(sample_variance(ok, k.mean) / double(ok.size()));
    return k;
}

// ---------------------------------------------------------------------------
// Monte Carlo checks

double appendix_q_mean(std::int64_t E, std::int64_t B, std::int64_t E_in, double gamma)
{
    double b = double(B), e = double(E);
    return double(E_in) / e - gamma / b * (1 + (b - 1) / (2 * e));
}

QMoments appendix_q_moments(std::int64_t E, std::int64_t B, std::int64_t E_in, double gamma,
                            std::int64_t trials, std::uint64_t seed, unsigned threads)
{
    if (trials < 1000)
        throw DomainError("appendix_q_moments needs at least 1000 trials");
    if (B < 1 || E < 1 || E_in < 0 || E_in > E)
        throw DomainError("appendix_q_moments needs B >= 1, E >= 1 and 0 <= E_in <= E");
    constexpr std::size_t chunk = 1024;
    std::size_t chunks = (std::size_t(trials) + chunk - 1) / chunk;
    std::vector<double> q(static_cast<std::size_t>(trials));
    const double two_e = 2. * double(E), base = double(E_in) / double(E);
    parallel_for(chunks, threads, [&](std::size_t c) {
        std::mt19937_64 rng(derive_seed(seed, c));
        std::vector<std::int64_t> e_r;
        std::size_t end = std::min(q.size(), (c + 1) * chunk);
        for (std::size_t t = c * chunk; t < end; ++t)
        {
            multinomial_equal(2 * E, std::size_t(B), rng, e_r);
            double sq = 0;
            for (auto x : e_r)
                sq += double(x) * double(x);
            q[t] = base - gamma * sq / (two_e * two_e);
        }
    });
    QMoments m;
    m.trials = trials;
    m.mean_Q = mean_of(q);
    m.var_Q = sample_variance(q, m.mean_Q);
    m.standard_error = std::sqrt(m.var_Q / double(trials));
    return m;
}

double infomap_score_from_mixing(std::span<const std::int64_t> diagonal,
                                 std::span<const std::int64_t> upper, std::int64_t E)
{
    BlockSummary s;
    s.B = std::int64_t(diagonal.size());
    s.E = E;
    s.e_rr.assign(diagonal.begin(), diagonal.end());
    s.e_r = s.e_rr;
    std::int64_t twice_in = 0;
    for (auto d : diagonal)
        twice_in += d;
    s.E_in = twice_in / 2;
    std::size_t k = 0;
    for (std::size_t r = 0; r < diagonal.size(); ++r)
        for (std::size_t t = r + 1; t < diagonal.size(); ++t, ++k)
        {
            s.e_r[r] += upper[k];
            s.e_r[t] += upper[k];
        }
    return infomap_score(s);
}

std::vector<LGridPoint> default_l_grid()
{
    std::vector<LGridPoint> grid;
    for (std::int64_t N : {100, 1000, 10000, 100000})
        for (std::int64_t B : {2, 20, 200})
            for (double k : {5., 20., 100.})
                for (double f : {0.05, 0.5, 0.95})
                    if (B <= N / 2 && k < double(N))
                        grid.push_back({N, B, k, f});
    return grid;
}

LVarianceTable appendix_l_variance(std::span<const LGridPoint> grid, std::int64_t trials,
                                   std::uint64_t seed, unsigned threads)
{
    if (trials < 2)
        throw DomainError("appendix_l_variance needs at least two trials");
    for (const auto& p : grid)
        if (p.N < 100 || p.N > 100000 || p.B < 2 || p.B > 200 || p.avg_k < 5 ||
            p.avg_k > 100 || p.ein_frac < 0.05 || p.ein_frac > 0.95)
            throw DomainError("appendix_l_variance: grid point outside the scanned ranges");
    LVarianceTable table;
    table.points.resize(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        const auto& g = grid[i];
        LVariancePoint& p = table.points[i];
        p.N = g.N;
        p.B = g.B;
        p.avg_k = g.avg_k;
        p.ein_frac = g.ein_frac;
        p.E = std::llround(double(g.N) * g.avg_k / 2);
        p.E_in = std::llround(g.ein_frac * double(p.E));
        std::mt19937_64 rng(derive_seed(seed, i));
        std::vector<std::int64_t> diagonal, upper;
        std::size_t pairs = std::size_t(g.B * (g.B - 1) / 2);
        std::vector<double> L(static_cast<std::size_t>(trials));
        for (auto& l : L)
        {
            multinomial_equal(2 * p.E_in, std::size_t(g.B), rng, diagonal);
            multinomial_equal(p.E - p.E_in, pairs, rng, upper);
            l = infomap_score_from_mixing(diagonal, upper, p.E);
        }
        p.mean_L = mean_of(L);
        p.var_L = sample_variance(L, p.mean_L);
    });
    // Least squares of ln var on ln E over points with positive variance.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : table.points)
    {
        if (!(p.var_L > 0))
            continue;
        double x = std::log(double(p.E)), y = std::log(p.var_L);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++table.fitted;
    }
    double n = double(table.fitted);
    table.slope = table.fitted >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx)
                                    : std::numeric_limits<double>::quiet_NaN();
    return table;
}

} // namespace cdl
