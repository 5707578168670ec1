#include "cdl/dos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>

#include <json.hpp>

#include "cdl/error.hpp"
#include "cdl/numeric.hpp"
#include "cdl/parallel.hpp"

namespace cdl
{

namespace
{

void check_state(std::int64_t N, std::int64_t E, double E_in, double B)
{
    if (N < 1 || E < 0)
        throw DomainError("lattice requires N >= 1 and E >= 0");
    if (!(E_in >= 0) || E_in > double(E))
        throw DomainError("E_in must lie in [0, E], got " + std::to_string(E_in));
    if (!(B >= 1) || B > double(N))
        throw DomainError("B must lie in [1, N], got " + std::to_string(B));
}

constexpr std::size_t materialize_budget = 20'000'000;

} // namespace

double log_omega(std::int64_t N, std::int64_t E, double E_in, double B)
{
    check_state(N, E, E_in, B);
    double dN = double(N);
    double nb = dN / B;
    double within = dN * (nb - 1) / 2;
    double between = dN * nb * (B - 1) / 2;
    return log_binomial(within, E_in) + log_binomial(between, double(E) - E_in) +
           log_factorial(dN) - B * log_factorial(nb);
}

double log_omega_dc(std::int64_t N, std::int64_t E, double E_in, double B,
                    double sum_log_k_factorial)
{
    check_state(N, E, E_in, B);
    double out = double(E) - E_in;
    double pairs = B * (B - 1) / 2;
    double between = 0;
    if (out > 0)
    {
        if (!(pairs > 0))
            return neg_inf;
        between = out * std::log(pairs);
    }
    double dN = double(N);
    return B * log_factorial(2. * double(E) / B) + E_in * std::log(B) + between -
           (E_in * std::numbers::ln2 + log_factorial(E_in)) - log_factorial(out) +
           log_factorial(dN) - B * log_factorial(dN / B) - sum_log_k_factorial;
}

double sum_log_degree_factorials(const DegreeStats& ds)
{
    double s = 0;
    for (auto [k, eta] : ds.eta)
        s += double(eta) * log_factorial(double(k));
    return s;
}

double log_omega_dc(std::int64_t N, std::int64_t E, double E_in, double B,
                    const DegreeStats& ds)
{
    return log_omega_dc(N, E, E_in, B, sum_log_degree_factorials(ds));
}

std::vector<std::int64_t> default_b_grid(std::int64_t b_max, std::int64_t N,
                                         std::int64_t b_dense, double ratio)
{
    if (b_max < 1 || b_max > N)
        throw DomainError("B grid upper end must lie in [1, N]");
    if (b_dense < 1 || !(ratio > 1))
        throw DomainError("B grid needs b_dense >= 1 and ratio > 1");

    bool mirror = (b_max == N);
    std::int64_t limit = mirror ? std::max<std::int64_t>(1, N / 2) : b_max;

    std::vector<std::int64_t> low;
    for (std::int64_t b = 1; b <= std::min(b_dense, limit); ++b)
        low.push_back(b);
    double b = double(low.back());
    while (true)
    {
        b *= ratio;
        std::int64_t bi = std::max(low.back() + 1, std::int64_t(std::llround(b)));
        b = std::max(b, double(bi));
        if (bi > limit)
            break;
        low.push_back(bi);
    }

    std::set<std::int64_t> all(low.begin(), low.end());
    if (mirror)
        for (auto v : low)
            all.insert(N + 1 - v);
    all.insert(b_max);
    return {all.begin(), all.end()};
}

PlantedGrid::PlantedGrid(std::int64_t N, std::int64_t E, Method m, GridOptions opts,
                         const DegreeStats* dc)
    : _N(N), _E(E), _method(m), _opts(std::move(opts))
{
    m.validate();
    if (!m.has_planted_form())
        throw DomainError("method '" + method_name(m.kind) + "' has no planted lattice");
    if (N < 1 || E < 1)
        throw NumericError("lattice requires N >= 1 and E >= 1");
    if (double(E) > double(N) * double(N - 1) / 2)
        throw DomainError("E exceeds the number of node pairs");
    if (m.degree_corrected)
    {
        if (!dc)
            throw DomainError("degree-corrected lattice needs degree statistics");
        if (dc->N() != N || dc->E != E)
            throw ValidationError("degree statistics do not match (N, E)");
        _sum_log_kfact = sum_log_degree_factorials(*dc);
    }

    _stride = _opts.ein_stride > 0 ? _opts.ein_stride : std::max<std::int64_t>(1, E / 5000);
    if (!(_opts.boundary_refinement > 0))
        throw DomainError("boundary refinement must be positive");

    if (!_opts.b_values.empty())
    {
        _b = _opts.b_values;
        std::sort(_b.begin(), _b.end());
        _b.erase(std::unique(_b.begin(), _b.end()), _b.end());
        if (_b.front() < 1 || _b.back() > N)
            throw DomainError("explicit B grid must lie in [1, N]");
    }
    else
    {
        std::int64_t b_max = _opts.b_max > 0 ? std::min(_opts.b_max, N) : N;
        _b = default_b_grid(b_max, N, _opts.b_dense, _opts.b_ratio);
    }

    bool materialize = _opts.storage == StorageMode::Materialized;
    if (_opts.storage == StorageMode::Auto)
        materialize = _b.size() * std::size_t(E / _stride + 1) <= materialize_budget;
    if (materialize)
    {
        std::vector<GridRow> rows(_b.size());
        parallel_for(_b.size(), _opts.threads, [&](std::size_t i) { rows[i] = build_row(_b[i]); });
        _rows = std::move(rows);
    }
}

std::size_t PlantedGrid::num_cells() const
{
    std::size_t n = 0;
    GridRow scratch;
    for (std::size_t i = 0; i < _b.size(); ++i)
        n += row(i, scratch).ein.size();
    return n;
}

std::optional<std::pair<std::int64_t, std::int64_t>>
PlantedGrid::feasible_range(std::int64_t B) const
{
    if (B < 1 || B > _N)
        return std::nullopt;
    if (degree_corrected())
    {
        if (B == 1)
            return std::pair{_E, _E};
        return std::pair{std::int64_t(0), _E};
    }
    double dN = double(_N), dB = double(B);
    double cap_in = dN * (dN / dB - 1) / 2;
    double cap_out = dN * (dN / dB) * (dB - 1) / 2;
    constexpr double eps = 1e-9;
    std::int64_t lo = std::max<std::int64_t>(0, std::int64_t(std::ceil(double(_E) - cap_out - eps)));
    std::int64_t hi = std::min<std::int64_t>(_E, std::int64_t(std::floor(cap_in + eps)));
    if (lo > hi)
        return std::nullopt;
    return std::pair{lo, hi};
}

double PlantedGrid::log_weight(double E_in, double B) const
{
    if (degree_corrected())
        return log_omega_dc(_N, _E, E_in, B, _sum_log_kfact);
    return log_omega(_N, _E, E_in, B);
}

double PlantedGrid::quality(double E_in, double B) const
{
    return w_pp(E_in, _E, B, _method);
}

GridRow PlantedGrid::build_row(std::int64_t B) const
{
    GridRow r;
    r.B = B;
    auto range = feasible_range(B);
    if (!range)
        return r;
    auto [lo, hi] = *range;
    double kappa = _opts.boundary_refinement;
    for (std::int64_t x = lo;;)
    {
        r.ein.push_back(double(x));
        if (x == hi)
            break;
        std::int64_t d = std::min(x - lo, hi - x);
        auto step = std::int64_t(std::floor(std::sqrt(kappa * double(d))));
        step = std::clamp<std::int64_t>(step, 1, _stride);
        x = std::min(x + step, hi);
    }
    double dB = double(B);
    r.log_omega.reserve(r.ein.size());
    r.w.reserve(r.ein.size());
    for (double e : r.ein)
    {
        r.log_omega.push_back(log_weight(e, dB));
        r.w.push_back(quality(e, dB));
    }
    return r;
}

const GridRow& PlantedGrid::row(std::size_t i, GridRow& scratch) const
{
    if (!_rows.empty())
        return _rows[i];
    scratch = build_row(_b[i]);
    return scratch;
}

std::string PlantedGrid::config_json() const
{
    nlohmann::ordered_json j;
    j["N"] = _N;
    j["E"] = _E;
    j["method"] = method_name(_method.kind);
    j["gamma"] = _method.gamma;
    j["dc"] = _method.degree_corrected;
    j["b_min"] = _b.front();
    j["b_max"] = _b.back();
    j["b_rows"] = _b.size();
    j["b_dense"] = _opts.b_dense;
    j["b_ratio"] = _opts.b_ratio;
    j["explicit_b_grid"] = !_opts.b_values.empty();
    j["ein_stride"] = _stride;
    j["boundary_refinement"] = _opts.boundary_refinement;
    j["materialized"] = materialized();
    return j.dump();
}

namespace
{

struct RowSum
{
    double log_mass = neg_inf;
    double mean_w = 0;
    double mean_ein = 0;
};

// Log-linear sum over the integers of one row at inverse temperature beta.
RowSum sum_row(const GridRow& r, double beta)
{
    RowSum out;
    std::size_t n = r.ein.size();
    if (n == 0)
        return out;
    std::vector<double> lm(n), mw(n), me(n);
    for (std::size_t j = 0; j < n; ++j)
    {
        double fa = beta * r.w[j] + r.log_omega[j];
        lm[j] = fa;
        mw[j] = r.w[j];
        me[j] = r.ein[j];
        if (j + 1 == n)
            break;
        auto L = std::int64_t(r.ein[j + 1] - r.ein[j]);
        double fb = beta * r.w[j + 1] + r.log_omega[j + 1];
        if (L == 1 || fa == neg_inf || fb == neg_inf)
            continue;
        double s = (fb - fa) / double(L);
        double tbar = geometric_mean_index(s, L);
        lm[j] = fa + log_geometric_sum(s, L);
        mw[j] = r.w[j] + (r.w[j + 1] - r.w[j]) * tbar / double(L);
        me[j] = r.ein[j] + tbar;
    }
    out.log_mass = log_sum_exp(lm);
    if (out.log_mass == neg_inf)
        return out;
    for (std::size_t j = 0; j < n; ++j)
    {
        double p = std::exp(lm[j] - out.log_mass);
        out.mean_w += p * mw[j];
        out.mean_ein += p * me[j];
    }
    return out;
}

// Span of integers [B_i, B_{i+1}) represented by row i, given the row log
// masses: log-linear interpolation, or the row alone beside an empty row.
struct Span
{
    double log_factor = 0; // ln sum_t exp(s t)
    double tbar = 0;       // mean offset t
    double L = 1;
};

Span row_span(const std::vector<std::int64_t>& b, const std::vector<double>& M, std::size_t i)
{
    Span sp;
    if (i + 1 == b.size() || M[i] == neg_inf || M[i + 1] == neg_inf)
        return sp;
    std::int64_t L = b[i + 1] - b[i];
    double s = (M[i + 1] - M[i]) / double(L);
    sp.log_factor = log_geometric_sum(s, L);
    sp.tbar = geometric_mean_index(s, L);
    sp.L = double(L);
    return sp;
}

} // namespace

Evaluation evaluate(double beta, const PlantedGrid& grid)
{
    if (!std::isfinite(beta))
        throw DomainError("beta must be finite");
    std::size_t R = grid.num_rows();
    std::vector<RowSum> rows(R);
    parallel_for(R, grid.options().threads, [&](std::size_t i) {
        GridRow scratch;
        rows[i] = sum_row(grid.row(i, scratch), beta);
    });

    const auto& b = grid.b_values();
    Evaluation ev;
    ev.beta = beta;
    ev.row_log_mass.resize(R);
    ev.row_mean_w.resize(R);
    ev.row_log_span_mass.resize(R);
    for (std::size_t i = 0; i < R; ++i)
    {
        ev.row_log_mass[i] = rows[i].log_mass;
        ev.row_mean_w[i] = rows[i].mean_w;
    }
    std::vector<Span> spans(R);
    for (std::size_t i = 0; i < R; ++i)
    {
        spans[i] = row_span(b, ev.row_log_mass, i);
        ev.row_log_span_mass[i] = ev.row_log_mass[i] + spans[i].log_factor;
    }
    ev.log_Z = log_sum_exp(ev.row_log_span_mass);
    if (ev.log_Z == neg_inf)
        throw NumericError("lattice has no feasible state");
    for (std::size_t i = 0; i < R; ++i)
    {
        if (ev.row_log_span_mass[i] == neg_inf)
            continue;
        double p = std::exp(ev.row_log_span_mass[i] - ev.log_Z);
        double frac = spans[i].tbar / spans[i].L;
        double w = rows[i].mean_w, e = rows[i].mean_ein;
        if (spans[i].L > 1)
        {
            w += (rows[i + 1].mean_w - rows[i].mean_w) * frac;
            e += (rows[i + 1].mean_ein - rows[i].mean_ein) * frac;
        }
        ev.mean_W += p * w;
        ev.mean_ein += p * e;
        ev.mean_B += p * (double(b[i]) + spans[i].tbar);
    }
    return ev;
}

double log_partition_function(double beta, const PlantedGrid& grid)
{
    return evaluate(beta, grid).log_Z;
}

double mean_quality(double beta, const PlantedGrid& grid)
{
    return evaluate(beta, grid).mean_W;
}

namespace
{

struct RowBest
{
    std::int64_t E_in = 0;
    double f = neg_inf;
};

// Exact integer maximizer of the concave beta W + ln Omega along E_in.
RowBest best_in_row(const PlantedGrid& grid, double beta, std::int64_t B)
{
    RowBest best;
    auto range = grid.feasible_range(B);
    if (!range)
        return best;
    double dB = double(B);
    auto f = [&](std::int64_t x) {
        double e = double(x);
        return beta * grid.quality(e, dB) + grid.log_weight(e, dB);
    };
    auto [l, h] = *range;
    while (l < h)
    {
        std::int64_t m = l + (h - l) / 2;
        if (f(m + 1) > f(m))
            l = m + 1;
        else
            h = m;
    }
    best.E_in = l;
    best.f = f(l);
    return best;
}

struct Candidate
{
    std::int64_t B = 0;
    RowBest best;
};

bool better(const Candidate& a, const Candidate& b)
{
    return a.best.f > b.best.f || (a.best.f == b.best.f && a.B < b.B && b.best.f > neg_inf);
}

// Best integer B strictly inside (lo, hi), coarse-to-fine for wide windows.
Candidate refine_b(const PlantedGrid& grid, double beta, std::int64_t lo, std::int64_t hi)
{
    constexpr std::int64_t full_scan = 2048;
    constexpr std::int64_t probes = 64;
    Candidate best;
    std::int64_t a = lo + 1, z = hi - 1;
    while (a <= z && z - a + 1 > full_scan)
    {
        double step = double(z - a) / double(probes - 1);
        Candidate local;
        for (std::int64_t k = 0; k < probes; ++k)
        {
            std::int64_t B = a + std::int64_t(std::llround(step * double(k)));
            Candidate c{B, best_in_row(grid, beta, B)};
            if (better(c, local))
                local = c;
        }
        auto width = std::int64_t(std::ceil(step)) + 1;
        a = std::max(a, local.B - width);
        z = std::min(z, local.B + width);
        if (better(local, best))
            best = local;
    }
    for (std::int64_t B = a; B <= z; ++B)
    {
        Candidate c{B, best_in_row(grid, beta, B)};
        if (better(c, best))
            best = c;
    }
    return best;
}

} // namespace

ArgmaxState argmax_state(double beta, const PlantedGrid& grid)
{
    if (!std::isfinite(beta))
        throw DomainError("beta must be finite");
    const auto& b = grid.b_values();
    std::size_t R = b.size();
    std::vector<Candidate> coarse(R);
    parallel_for(R, grid.options().threads, [&](std::size_t i) {
        coarse[i] = {b[i], best_in_row(grid, beta, b[i])};
    });

    std::vector<std::size_t> order(R);
    for (std::size_t i = 0; i < R; ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return better(coarse[x], coarse[y]); });
    if (R == 0 || coarse[order[0]].best.f == neg_inf)
        throw NumericError("lattice has no feasible state");

    Candidate best = coarse[order[0]];
    constexpr std::size_t refine_rows = 3;
    for (std::size_t k = 0; k < std::min(refine_rows, R); ++k)
    {
        std::size_t i = order[k];
        if (coarse[i].best.f == neg_inf)
            break;
        if (i > 0)
        {
            Candidate c = refine_b(grid, beta, b[i - 1], b[i]);
            if (better(c, best))
                best = c;
        }
        if (i + 1 < R)
        {
            Candidate c = refine_b(grid, beta, b[i], b[i + 1]);
            if (better(c, best))
                best = c;
        }
    }

    ArgmaxState s;
    s.B_star = best.B;
    s.E_in_star = best.best.E_in;
    s.W_star = grid.quality(double(s.E_in_star), double(s.B_star));
    s.log_weight = best.best.f;
    return s;
}

namespace
{

struct BinMap
{
    double lo, width;
    std::size_t bins;

    std::size_t operator()(double w) const
    {
        double k = std::floor((w - lo) / width);
        if (!(k >= 0))
            return 0;
        return std::min(bins - 1, std::size_t(k));
    }
};

// Log masses of one row split into W bins. Sub-ranges of each E_in interval
// are assigned whole, so bin masses partition the row mass exactly.
std::vector<double> bin_row(const GridRow& r, double beta, bool unweight, const BinMap& bin)
{
    std::vector<double> out(bin.bins, neg_inf);
    std::size_t n = r.ein.size();
    auto f_at = [&](std::size_t j) {
        double f = beta * r.w[j] + r.log_omega[j];
        return unweight ? f - beta * r.w[j] : f;
    };
    for (std::size_t j = 0; j < n; ++j)
    {
        double fa = f_at(j);
        std::int64_t L = (j + 1 < n) ? std::int64_t(r.ein[j + 1] - r.ein[j]) : 1;
        double fb = (j + 1 < n) ? f_at(j + 1) : fa;
        if (L == 1 || fa == neg_inf || fb == neg_inf)
        {
            std::size_t k = bin(r.w[j]);
            out[k] = log_add(out[k], fa);
            continue;
        }
        double s = (fb - fa) / double(L);
        double wa = r.w[j], dw = r.w[j + 1] - r.w[j];
        auto w_at = [&](std::int64_t t) { return wa + dw * double(t) / double(L); };
        for (std::int64_t t0 = 0; t0 < L;)
        {
            std::size_t k = bin(w_at(t0));
            std::int64_t t1 = L;
            if (dw > 0 && k + 1 < bin.bins)
            {
                double edge = bin.lo + double(k + 1) * bin.width;
                t1 = std::int64_t(std::ceil((edge - wa) * double(L) / dw));
            }
            else if (dw < 0 && k > 0)
            {
                double edge = bin.lo + double(k) * bin.width;
                t1 = std::int64_t(std::floor((edge - wa) * double(L) / dw)) + 1;
            }
            t1 = std::clamp(t1, t0 + 1, L);
            out[k] = log_add(out[k], fa + s * double(t0) + log_geometric_sum(s, t1 - t0));
            t0 = t1;
        }
    }
    return out;
}

} // namespace

DosHistogram dos_histogram(const PlantedGrid& grid, std::size_t bins, double beta, bool unweight)
{
    if (bins < 2)
        throw DomainError("histogram needs at least 2 bins");
    if (!std::isfinite(beta))
        throw DomainError("beta must be finite");
    std::size_t R = grid.num_rows();
    const auto& b = grid.b_values();

    // W range over feasible samples
    std::vector<std::pair<double, double>> ranges(R, {std::numeric_limits<double>::infinity(),
                                                      -std::numeric_limits<double>::infinity()});
    parallel_for(R, grid.options().threads, [&](std::size_t i) {
        GridRow scratch;
        const GridRow& r = grid.row(i, scratch);
        for (double w : r.w)
        {
            ranges[i].first = std::min(ranges[i].first, w);
            ranges[i].second = std::max(ranges[i].second, w);
        }
    });
    double wmin = std::numeric_limits<double>::infinity(), wmax = -wmin;
    for (auto [lo, hi] : ranges)
    {
        wmin = std::min(wmin, lo);
        wmax = std::max(wmax, hi);
    }
    if (!(wmin <= wmax))
        throw NumericError("lattice has no feasible state");
    if (wmax - wmin < 1e-12)
        wmax = wmin + 1e-12;
    BinMap bin{wmin, (wmax - wmin) / double(bins), bins};

    std::vector<std::vector<double>> per_row(R);
    parallel_for(R, grid.options().threads, [&](std::size_t i) {
        GridRow scratch;
        per_row[i] = bin_row(grid.row(i, scratch), beta, unweight, bin);
    });

    std::vector<double> M(R);
    for (std::size_t i = 0; i < R; ++i)
        M[i] = log_sum_exp(per_row[i]);
    std::vector<Span> spans(R);
    for (std::size_t i = 0; i < R; ++i)
        spans[i] = row_span(b, M, i);

    DosHistogram h;
    h.beta = beta;
    h.b_values = b;
    h.edges.resize(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k)
        h.edges[k] = wmin + bin.width * double(k);
    h.edges[bins] = wmax;
    h.log_xi.assign(bins, neg_inf);
    h.mean_b.assign(bins, std::numeric_limits<double>::quiet_NaN());
    h.log_xi_b.assign(bins, std::vector<double>(R, neg_inf));

    std::vector<double> terms(R);
    for (std::size_t k = 0; k < bins; ++k)
    {
        for (std::size_t i = 0; i < R; ++i)
        {
            h.log_xi_b[k][i] = per_row[i][k];
            terms[i] = per_row[i][k] + spans[i].log_factor;
        }
        h.log_xi[k] = log_sum_exp(terms);
        if (h.log_xi[k] == neg_inf)
            continue;
        double mb = 0;
        for (std::size_t i = 0; i < R; ++i)
            if (terms[i] > neg_inf)
                mb += std::exp(terms[i] - h.log_xi[k]) * (double(b[i]) + spans[i].tbar);
        h.mean_b[k] = mb;
    }
    return h;
}

void write_dos_csv(std::ostream& out, const DosHistogram& h, const PlantedGrid& grid,
                   bool with_b, double log_ref)
{
    auto cfg = nlohmann::ordered_json::parse(grid.config_json());
    cfg["bins"] = h.bins();
    cfg["beta"] = h.beta;
    cfg["log_reference"] = log_ref;
    out << "# " << cfg.dump() << '\n';
    out << "W_bin_center,W_lo,W_hi,log_xi,mean_B";
    if (with_b)
        for (auto B : h.b_values)
            out << ",log_xi_B" << B;
    out << '\n';
    out.precision(17);
    for (std::size_t k = 0; k < h.bins(); ++k)
    {
        out << h.center(k) << ',' << h.edges[k] << ',' << h.edges[k + 1] << ','
            << h.log_xi[k] - log_ref << ',' << h.mean_b[k];
        if (with_b)
            for (double v : h.log_xi_b[k])
                out << ',' << v - log_ref;
        out << '\n';
    }
}

} // namespace cdl
