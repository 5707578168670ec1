#pragma once

// Partition comparison, Monte Carlo estimates of description-length
// overheads between models, and the Monte Carlo checks of the fluctuations
// of modularity and of the map equation in random mixing matrices.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cdl/graph.hpp"
#include "cdl/instances.hpp"

namespace cdl
{

// Above this many groups on either side the overlap uses a greedy matching.
inline constexpr std::size_t overlap_exact_limit = 2000;

struct Overlap
{
    double value = 0;
    bool approximate = false; // greedy matching, a lower bound on the optimum
};

// Largest fraction of nodes whose labels agree under a bijection between the
// groups of the two partitions. Throws ValidationError on size mismatch.
Overlap overlap(const Partition& a, const Partition& b,
                std::size_t exact_limit = overlap_exact_limit);
double max_overlap(const Partition& a, const Partition& b);

// Adjusted mutual information with max(H_a, H_b) normalization and the
// expected MI of the permutation model. Two single-group partitions compare
// as 1; one single-group partition against a finer one gives 0.
double ami(const Partition& a, const Partition& b);

// Mutual information and entropies in nats.
double mutual_information(const Partition& a, const Partition& b);
double partition_entropy(const Partition& p);
double expected_mutual_information(const Partition& a, const Partition& b);

struct ComparisonRecord
{
    double overlap = 0;
    bool overlap_approximate = false;
    double ami = 0;
    double B_e_first = 0;
    double B_e_second = 0;
};

ComparisonRecord compare_partitions(const Partition& a, const Partition& b);

// Description-length overhead of encoding samples of P with the code of Q.
struct KlEstimate
{
    double mean = 0;           // nats
    double standard_error = 0; // of the mean
    std::int64_t S = 0;        // samples that entered the mean
    std::int64_t excluded = 0; // samples where an evaluator threw
    std::vector<double> values; // per-sample sigma_Q - sigma_P, NaN when excluded
    std::vector<std::string> errors; // messages of the excluded samples
};

using InstanceSampler = std::function<InstanceSample(std::uint64_t seed)>;
using SigmaEvaluator = std::function<double(const Graph&, const Partition&)>;

// Sample i is drawn with derive_seed(seed, i). Throws DomainError for
// samples < 2 and NumericError when fewer than two samples survive.
KlEstimate kl_estimate(const InstanceSampler& sampler, const SigmaEvaluator& sigma_p,
                       const SigmaEvaluator& sigma_q, std::int64_t samples, std::uint64_t seed,
                       unsigned threads = 0);

struct QMoments
{
    double mean_Q = 0;
    double var_Q = 0; // unbiased sample variance
    double standard_error = 0;
    std::int64_t trials = 0;
};

// Q = E_in/E - gamma sum_r e_r^2 / (2E)^2 with e_r multinomial over 2E
// endpoints and B equiprobable groups. Throws DomainError for trials < 1000,
// B < 1, E < 1 or E_in outside [0, E].
QMoments appendix_q_moments(std::int64_t E, std::int64_t B, std::int64_t E_in, double gamma,
                            std::int64_t trials, std::uint64_t seed, unsigned threads = 0);

// First-order mean of Q over that ensemble: E_in/E - (gamma/B)(1 + (B-1)/2E).
double appendix_q_mean(std::int64_t E, std::int64_t B, std::int64_t E_in, double gamma);

struct LVariancePoint
{
    std::int64_t N = 0;
    std::int64_t B = 0;
    double avg_k = 0;
    double ein_frac = 0;
    std::int64_t E = 0;
    std::int64_t E_in = 0;
    double mean_L = 0;
    double var_L = 0;
};

struct LVarianceTable
{
    std::vector<LVariancePoint> points;
    double slope = 0;          // least squares of ln var_L on ln E
    std::int64_t fitted = 0;   // points with var_L > 0
};

struct LGridPoint
{
    std::int64_t N;
    std::int64_t B;
    double avg_k;
    double ein_frac;
};

// N in {1e2, 1e3, 1e4, 1e5}, B in {2, 20, 200} (B <= N / 2), <k> in
// {5, 20, 100} (<k> < N), E_in/E in {0.05, 0.5, 0.95}.
std::vector<LGridPoint> default_l_grid();

// Variance of the map-equation score over random mixing matrices at each
// point: E = round(N <k> / 2), E_in = round(ein_frac E); the B diagonal
// cells share 2 E_in endpoints multinomially and the B(B-1)/2 off-diagonal
// cells share E - E_in edges multinomially. Throws DomainError outside
// N in [1e2, 1e5], B in [2, 200], <k> in [5, 100], E_in/E in [0.05, 0.95],
// or for trials < 2.
LVarianceTable appendix_l_variance(std::span<const LGridPoint> grid, std::int64_t trials,
                                   std::uint64_t seed, unsigned threads = 0);

// The score from a symmetric mixing matrix given as its diagonal e_rr (twice
// the internal edges) and the upper triangle row by row.
double infomap_score_from_mixing(std::span<const std::int64_t> diagonal,
                                 std::span<const std::int64_t> upper, std::int64_t E);

} // namespace cdl
