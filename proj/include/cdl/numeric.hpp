#pragma once

// Log-space special functions and combinatorial counts.
//
// All values are natural logarithms ("nats"). A count of zero is represented
// by -infinity; no function here returns +infinity or NaN for valid input.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <gmpxx.h>

namespace cdl
{

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// ln Gamma(n + 1), real-valued extension of ln n!.
double log_factorial(double n);

// ln C(n, k) via log-gamma; -inf when k > n.
double log_binomial(double n, double k);

// ln C(n + m - 1, m): number of n-tuples of non-negative integers summing to m.
double log_multiset(std::int64_t n, std::int64_t m);

// ln m!! for even m, i.e. ln(2^{m/2} (m/2)!).
double log_double_factorial_even(std::int64_t m);

// x ln x with the convention 0 ln 0 = 0.
inline double xlogx(double x)
{
    return x > 0 ? x * std::log(x) : 0.;
}

// ---------------------------------------------------------------------------
// Restricted integer partitions q(m, n): partitions of m into at most n parts.

// Largest m for which log_q_partitions() is exact.
inline constexpr std::int64_t q_exact_limit = 100000;

// Exact q(m, n) as a big integer. Throws DomainError for m > q_exact_limit.
mpz_class q_partitions_exact(std::int64_t m, std::int64_t n);

// ln q(m, n). Exact (big-integer) for m <= q_exact_limit, Szekeres asymptotic
// otherwise; see q_partitions_is_exact().
double log_q_partitions(std::int64_t m, std::int64_t n);

// Asymptotic ln q(m, n), exposed for testing against the exact values.
double log_q_partitions_approx(std::int64_t m, std::int64_t n);

inline bool q_partitions_is_exact(std::int64_t m) { return m <= q_exact_limit; }

// Dense table of q(m, n) for 0 <= m <= max_m, 0 <= n <= max_n, filled by the
// recursion q(m, n) = q(m, n-1) + q(m-n, n).
class PartitionCountTable
{
public:
    PartitionCountTable(std::int64_t max_m, std::int64_t max_n);

    std::int64_t max_m() const { return _max_m; }
    std::int64_t max_n() const { return _max_n; }

    const mpz_class& exact(std::int64_t m, std::int64_t n) const;
    double log_q(std::int64_t m, std::int64_t n) const;

private:
    std::int64_t _max_m, _max_n;
    std::vector<mpz_class> _q; // row-major in m
};

// ---------------------------------------------------------------------------
// Log-sum-exp.

// ln sum_i exp(x_i). Two passes: max shift, then a pairwise (tree) sum of
// the shifted exponentials in left-to-right block order. Empty input gives
// -inf. The result depends only on the input order.
double log_sum_exp(std::span<const double> xs);

// ln(exp(a) + exp(b)).
inline double log_add(double a, double b)
{
    if (a < b)
        std::swap(a, b);
    if (b == neg_inf)
        return a;
    return a + std::log1p(std::exp(b - a));
}

// ln sum_{t=0}^{L-1} exp(s t) for L >= 1.
double log_geometric_sum(double s, std::int64_t L);

// Mean of t under weights exp(s t), t = 0..L-1.
double geometric_mean_index(double s, std::int64_t L);

// Dilogarithm Li2(x) for x in [0, 1].
double dilog(double x);

} // namespace cdl
