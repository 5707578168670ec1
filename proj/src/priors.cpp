#include "cdl/priors.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <utility>

#include "cdl/error.hpp"
#include "cdl/numeric.hpp"

namespace cdl
{

std::vector<std::size_t> local_maxima(std::span<const double> p, double floor)
{
    std::vector<std::size_t> out;
    if (p.empty())
        return out;
    double cut = floor * *std::max_element(p.begin(), p.end());
    for (std::size_t i = 0; i < p.size(); ++i)
    {
        if (p[i] <= cut)
            continue;
        bool left = i == 0 || p[i] > p[i - 1];
        bool right = i + 1 == p.size() || p[i] > p[i + 1];
        if (left && right)
            out.push_back(i);
    }
    return out;
}

PriorCurve prior_curves(const PlantedGrid& grid, std::span<const double> betas,
                        const PriorCurveOptions& opts)
{
    PriorCurve c;
    if (opts.b_table)
        c.b_values = grid.b_values();
    for (double beta : betas)
    {
        Evaluation ev = evaluate(beta, grid);
        c.beta.push_back(beta);
        c.mean_W.push_back(ev.mean_W);
        c.mean_B.push_back(ev.mean_B);
        c.log_Z.push_back(ev.log_Z);
        if (opts.b_table)
        {
            std::vector<double> point(ev.row_log_mass.size()), span(point.size());
            for (std::size_t i = 0; i < point.size(); ++i)
            {
                point[i] = std::exp(ev.row_log_mass[i] - ev.log_Z);
                span[i] = ev.row_log_span_mass[i] - ev.log_Z;
            }
            // Normalize the spans by their own sum so that rounding in ln Z
            // does not leak into the table.
            double norm = log_sum_exp(span);
            for (double& s : span)
                s = std::exp(s - norm);
            c.p_B.push_back(std::move(point));
            c.p_B_span.push_back(std::move(span));
        }
        if (opts.w_bins > 0)
        {
            DosHistogram h = dos_histogram(grid, opts.w_bins, beta);
            if (c.w_edges.empty())
                c.w_edges = h.edges;
            double norm = log_sum_exp(h.log_xi);
            std::vector<double> p(h.bins());
            for (std::size_t k = 0; k < p.size(); ++k)
                p[k] = std::exp(h.log_xi[k] - norm);
            c.p_W.push_back(std::move(p));
        }
    }
    return c;
}

ConditionalB conditional_b_given_w(const PlantedGrid& grid, std::size_t bins, double beta)
{
    DosHistogram h = dos_histogram(grid, bins, beta, true);
    return {std::move(h.edges), std::move(h.mean_b)};
}

std::int64_t b_star(double beta, const PlantedGrid& grid)
{
    return argmax_state(beta, grid).B_star;
}

namespace
{

bool is_jump(std::int64_t a, std::int64_t b)
{
    auto [lo, hi] = std::minmax(a, b);
    return double(hi) >= transition_jump_ratio * double(lo);
}

} // namespace

std::optional<Transition> locate_transition(const PlantedGrid& grid, double beta_lo,
                                            double beta_hi, double rel_width)
{
    if (!(beta_lo < beta_hi) || !std::isfinite(beta_lo) || !std::isfinite(beta_hi))
        throw DomainError("transition bracket must be finite with lo < hi");
    if (!(rel_width > 0))
        throw DomainError("relative width must be positive");
    std::int64_t b_lo = b_star(beta_lo, grid), b_hi = b_star(beta_hi, grid);
    if (!is_jump(b_lo, b_hi))
        return std::nullopt;
    while (beta_hi - beta_lo > rel_width * std::max(std::abs(beta_lo), std::abs(beta_hi)))
    {
        double mid = beta_lo + (beta_hi - beta_lo) / 2;
        if (mid <= beta_lo || mid >= beta_hi)
            break;
        std::int64_t b_mid = b_star(mid, grid);
        bool left = is_jump(b_lo, b_mid), right = is_jump(b_mid, b_hi);
        if (left && !right)
            std::tie(beta_hi, b_hi) = std::pair{mid, b_mid};
        else if (right && !left)
            std::tie(beta_lo, b_lo) = std::pair{mid, b_mid};
        else if (left && right)
        {
            // Jumps on both sides: follow the larger one.
            double left_ratio = double(std::max(b_lo, b_mid)) / double(std::min(b_lo, b_mid));
            double right_ratio = double(std::max(b_mid, b_hi)) / double(std::min(b_mid, b_hi));
            if (left_ratio >= right_ratio)
                std::tie(beta_hi, b_hi) = std::pair{mid, b_mid};
            else
                std::tie(beta_lo, b_lo) = std::pair{mid, b_mid};
        }
        else
            return std::nullopt; // the change splits into sub-threshold steps
    }
    return Transition{beta_lo + (beta_hi - beta_lo) / 2, beta_lo, beta_hi, b_lo, b_hi};
}

std::optional<Transition> find_transition(const PlantedGrid& grid, std::span<const double> betas,
                                          double rel_width)
{
    if (betas.size() < 2)
        return std::nullopt;
    std::int64_t prev = b_star(betas[0], grid);
    for (std::size_t i = 1; i < betas.size(); ++i)
    {
        if (!(betas[i] > betas[i - 1]))
            throw DomainError("transition scan needs increasing betas");
        std::int64_t cur = b_star(betas[i], grid);
        if (is_jump(prev, cur))
            if (auto t = locate_transition(grid, betas[i - 1], betas[i], rel_width))
                return t;
        prev = cur;
    }
    return std::nullopt;
}

FeasibilityCurve feasibility_curve(const PlantedGrid& grid, std::span<const double> betas)
{
    FeasibilityCurve c;
    c.method = grid.method();
    for (double beta : betas)
    {
        ArgmaxState a = argmax_state(beta, grid);
        if (!c.points.empty() && c.points.back().B_star == a.B_star &&
            c.points.back().E_in_star == a.E_in_star)
            continue;
        c.points.push_back({beta, a.E_in_star, a.B_star, a.W_star});
    }
    return c;
}

double detectability_ein_fraction(std::int64_t B, double avg_k)
{
    if (B < 1 || !(avg_k > 0))
        throw DomainError("detectability needs B >= 1 and <k> > 0");
    double b = double(B);
    return 1 / b + (b - 1) / (b * std::sqrt(avg_k));
}

} // namespace cdl
