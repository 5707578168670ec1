#pragma once

// Implicit priors of a quality function's generative model: marginals of W
// and B at fixed beta, the beta-free conditional <B | W>, the location of the
// discontinuous transition in the maximum-weight state, and the feasible
// (E_in, B) region traced by that state.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cdl/dos.hpp"

namespace cdl
{

struct PriorCurveOptions
{
    std::size_t w_bins = 0; // > 0: also tabulate P(W | beta) over this many bins
    bool b_table = false;   // also tabulate P(B | beta) per grid row
};

struct PriorCurve
{
    std::vector<double> beta;
    std::vector<double> mean_W;
    std::vector<double> mean_B;
    std::vector<double> log_Z;

    // P(W | beta) per bin; rows indexed like beta. Empty unless requested.
    std::vector<double> w_edges;
    std::vector<std::vector<double>> p_W;

    // P(B = b_values[i] | beta) for the integer B of each grid row, and the
    // mass of the integer span [b_values[i], b_values[i+1]) it stands for.
    // The span masses sum to one.
    std::vector<std::int64_t> b_values;
    std::vector<std::vector<double>> p_B;
    std::vector<std::vector<double>> p_B_span;
};

// Indices of strict local maxima of a probability sequence (ends count
// when they exceed their single neighbour), ignoring entries below
// floor * max.
std::vector<std::size_t> local_maxima(std::span<const double> p, double floor = 1e-6);

PriorCurve prior_curves(const PlantedGrid& grid, std::span<const double> betas,
                        const PriorCurveOptions& opts = {});

struct ConditionalB
{
    std::vector<double> edges;  // bins + 1
    std::vector<double> mean_b; // NaN for empty bins
};

// <B | W> from Xi(W, B) / Xi(W). Accumulated with weight exp(beta W) and
// unweighted again, so the result does not depend on beta.
ConditionalB conditional_b_given_w(const PlantedGrid& grid, std::size_t bins, double beta = 0);

// B of the maximum-weight state at beta.
std::int64_t b_star(double beta, const PlantedGrid& grid);

struct Transition
{
    double beta_star = 0;   // midpoint of the final bracket
    double beta_lo = 0;     // B_star(beta_lo) = b_below
    double beta_hi = 0;     // B_star(beta_hi) = b_above
    std::int64_t b_below = 0;
    std::int64_t b_above = 0;
};

inline constexpr double transition_jump_ratio = 4;

// Bisects [beta_lo, beta_hi] on the jump in B_star until the bracket's
// relative width is below rel_width. nullopt when the endpoints' B_star do
// not differ by transition_jump_ratio or more, or when the change resolves
// into steps smaller than that (no discontinuity).
std::optional<Transition> locate_transition(const PlantedGrid& grid, double beta_lo,
                                            double beta_hi, double rel_width = 1e-6);

// Scans increasing betas for the first adjacent pair whose B_star differ by
// transition_jump_ratio and bisects it.
std::optional<Transition> find_transition(const PlantedGrid& grid, std::span<const double> betas,
                                          double rel_width = 1e-6);

struct FeasibilityPoint
{
    double beta = 0;
    std::int64_t E_in_star = 0;
    std::int64_t B_star = 0;
    double W_star = 0;
};

struct FeasibilityCurve
{
    Method method;
    std::vector<FeasibilityPoint> points; // consecutive duplicate states removed
};

FeasibilityCurve feasibility_curve(const PlantedGrid& grid, std::span<const double> betas);

// E_in / E at the planted-partition detectability threshold:
// 1/B + (B - 1) / (B sqrt(<k>)).
double detectability_ein_fraction(std::int64_t B, double avg_k);

} // namespace cdl
