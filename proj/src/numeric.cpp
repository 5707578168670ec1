#include "cdl/numeric.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "cdl/error.hpp"

namespace cdl
{

namespace
{

// glibc's std::lgamma writes the global signgam; the _r variant is reentrant.
double lgamma_reentrant(double x)
{
    int sign;
    return ::lgamma_r(x, &sign);
}

// log of a positive big integer
double log_mpz(const mpz_class& x)
{
    if (sgn(x) <= 0)
        return neg_inf;
    long exp2;
    double mant = mpz_get_d_2exp(&exp2, x.get_mpz_t());
    return std::log(mant) + double(exp2) * std::numbers::ln2;
}

// Partition numbers p(0..m), grown on demand and shared between callers.
class PartitionNumbers
{
public:
    const std::vector<mpz_class>& upto(std::int64_t m)
    {
        std::lock_guard lock(_mutex);
        if (std::int64_t(_p.size()) <= m)
            extend(m);
        return _p;
    }

private:
    void extend(std::int64_t m)
    {
        if (_p.empty())
            _p.emplace_back(1);
        _p.reserve(m + 1);
        for (std::int64_t j = std::int64_t(_p.size()); j <= m; ++j)
        {
            // Euler's pentagonal number recurrence
            mpz_class acc = 0;
            for (std::int64_t k = 1;; ++k)
            {
                std::int64_t g1 = k * (3 * k - 1) / 2;
                if (g1 > j)
                    break;
                std::int64_t g2 = k * (3 * k + 1) / 2;
                if (k % 2 == 1)
                {
                    acc += _p[j - g1];
                    if (g2 <= j)
                        acc += _p[j - g2];
                }
                else
                {
                    acc -= _p[j - g1];
                    if (g2 <= j)
                        acc -= _p[j - g2];
                }
            }
            _p.push_back(std::move(acc));
        }
    }

    std::mutex _mutex;
    std::vector<mpz_class> _p;
};

PartitionNumbers& partition_numbers()
{
    static PartitionNumbers instance;
    return instance;
}

// q(v, t) for all v <= m, parts limited to t, computed part by part.
std::vector<mpz_class> q_direct(std::int64_t m, std::int64_t n)
{
    std::vector<mpz_class> a(m + 1, 0);
    a[0] = 1;
    for (std::int64_t k = 1; k <= n; ++k)
        for (std::int64_t j = k; j <= m; ++j)
            a[j] += a[j - k];
    return a;
}

// q(m, n) for sqrt(m) < n < m via inclusion-exclusion over parts > n:
//   prod_{k<=n} 1/(1-x^k) = prod_{k>n} (1-x^k) * sum_j p(j) x^j,
// where the coefficient of x^s in prod_{k>n}(1-x^k) is
// sum_t (-1)^t q(s - t n - t(t+1)/2, t).
mpz_class q_inclusion_exclusion(std::int64_t m, std::int64_t n)
{
    const auto& p = partition_numbers().upto(m);

    mpz_class total = p[m];
    // row[v] = q(v, t), advanced in t
    std::vector<mpz_class> row(m + 1, 0);
    row[0] = 1;
    for (std::int64_t t = 1;; ++t)
    {
        std::int64_t shift = t * n + t * (t + 1) / 2;
        if (shift > m)
            break;
        for (std::int64_t v = t; v <= m; ++v)
            row[v] += row[v - t];
        mpz_class term = 0;
        for (std::int64_t v = 0; v + shift <= m; ++v)
            term += row[v] * p[m - shift - v];
        if (t % 2 == 1)
            total -= term;
        else
            total += term;
    }
    return total;
}

} // namespace

double log_factorial(double n)
{
    if (!(n >= 0))
        throw DomainError("log_factorial: negative argument " + std::to_string(n));
    return lgamma_reentrant(n + 1);
}

double log_binomial(double n, double k)
{
    if (!(n >= 0) || !(k >= 0))
        throw DomainError("log_binomial: negative argument");
    if (k > n)
        return neg_inf;
    if (k == 0 || k == n)
        return 0.;
    return lgamma_reentrant(n + 1) - lgamma_reentrant(k + 1) -
           lgamma_reentrant(n - k + 1);
}

double log_multiset(std::int64_t n, std::int64_t m)
{
    if (n < 1 || m < 0)
        throw DomainError("log_multiset: requires n >= 1, m >= 0");
    return log_binomial(double(n + m - 1), double(m));
}

double log_double_factorial_even(std::int64_t m)
{
    if (m < 0 || m % 2 != 0)
        throw DomainError("log_double_factorial_even: argument must be even and >= 0");
    double h = double(m / 2);
    return h * std::numbers::ln2 + lgamma_reentrant(h + 1);
}

mpz_class q_partitions_exact(std::int64_t m, std::int64_t n)
{
    if (m < 0 || n < 0)
        throw DomainError("q_partitions_exact: negative argument");
    if (m > q_exact_limit)
        throw DomainError("q_partitions_exact: m exceeds exact limit");
    if (m == 0)
        return 1;
    if (n == 0)
        return 0;

    static std::mutex cache_mutex;
    static std::map<std::pair<std::int64_t, std::int64_t>, mpz_class> cache;

    n = std::min(n, m);
    {
        std::lock_guard lock(cache_mutex);
        auto it = cache.find({m, n});
        if (it != cache.end())
            return it->second;
    }

    mpz_class q;
    if (n == m)
        q = partition_numbers().upto(m)[m];
    else if (n * n <= m)
        q = q_direct(m, n)[m];
    else
        q = q_inclusion_exclusion(m, n);

    std::lock_guard lock(cache_mutex);
    cache.emplace(std::pair{m, n}, q);
    return q;
}

double log_q_partitions_approx(std::int64_t m, std::int64_t n)
{
    if (m <= 0 || n < 1)
        return 0.;
    n = std::min(n, m);
    double dm = double(m), dn = double(n);
    if (dn < std::pow(dm, 0.25))
        return log_binomial(dm - 1, dn - 1) - log_factorial(dn);

    // Szekeres: v solves v = u sqrt(Li2(1 - e^{-v})), u = n / sqrt(m)
    double u = dn / std::sqrt(dm);
    double v = u;
    for (int i = 0; i < 1000; ++i)
    {
        double nv = u * std::sqrt(dilog(-std::expm1(-v)));
        bool done = std::abs(nv - v) < 1e-12;
        v = nv;
        if (done)
            break;
    }
    double lf = std::log(v) - std::log1p(-std::exp(-v) * (1 + u * u / 2)) / 2 -
                1.5 * std::numbers::ln2 - std::log(u) - std::log(std::numbers::pi);
    double g = 2 * v / u - u * std::log1p(-std::exp(-v));
    return lf - std::log(dm) + std::sqrt(dm) * g;
}

double log_q_partitions(std::int64_t m, std::int64_t n)
{
    if (m < 0 || n < 1)
        throw DomainError("log_q_partitions: requires m >= 0, n >= 1");
    if (q_partitions_is_exact(m))
        return log_mpz(q_partitions_exact(m, n));
    return log_q_partitions_approx(m, n);
}

PartitionCountTable::PartitionCountTable(std::int64_t max_m, std::int64_t max_n)
    : _max_m(max_m), _max_n(max_n)
{
    if (max_m < 0 || max_n < 0)
        throw DomainError("PartitionCountTable: negative size");
    _q.resize((max_m + 1) * (max_n + 1));
    auto at = [&](std::int64_t m, std::int64_t n) -> mpz_class& {
        return _q[m * (_max_n + 1) + n];
    };
    for (std::int64_t m = 0; m <= max_m; ++m)
    {
        at(m, 0) = (m == 0) ? 1 : 0;
        for (std::int64_t n = 1; n <= max_n; ++n)
        {
            at(m, n) = at(m, n - 1);
            if (m >= n)
                at(m, n) += at(m - n, n);
        }
    }
}

const mpz_class& PartitionCountTable::exact(std::int64_t m, std::int64_t n) const
{
    if (m < 0 || n < 0 || m > _max_m || n > _max_n)
        throw DomainError("PartitionCountTable: index out of range");
    return _q[m * (_max_n + 1) + n];
}

double PartitionCountTable::log_q(std::int64_t m, std::int64_t n) const
{
    return log_mpz(exact(m, n));
}

namespace
{

// pairwise sum of exp(x_i - shift) over [begin, end)
double pairwise_exp_sum(const double* x, std::size_t count, double shift)
{
    constexpr std::size_t block = 32;
    if (count <= block)
    {
        double s = 0;
        for (std::size_t i = 0; i < count; ++i)
            s += std::exp(x[i] - shift);
        return s;
    }
    std::size_t half = count / 2;
    return pairwise_exp_sum(x, half, shift) +
           pairwise_exp_sum(x + half, count - half, shift);
}

} // namespace

double log_sum_exp(std::span<const double> xs)
{
    if (xs.empty())
        return neg_inf;
    double mx = *std::max_element(xs.begin(), xs.end());
    if (mx == neg_inf)
        return neg_inf;
    return mx + std::log(pairwise_exp_sum(xs.data(), xs.size(), mx));
}

double log_geometric_sum(double s, std::int64_t L)
{
    if (L <= 1)
        return L == 1 ? 0. : neg_inf;
    double dL = double(L);
    if (std::abs(s) * dL < 1e-8)
        return std::log(dL) + s * (dL - 1) / 2;
    if (s > 0)
        // factor out the largest term, e^{s(L-1)}
        return s * (dL - 1) + std::log(-std::expm1(-s * dL)) - std::log(-std::expm1(-s));
    return std::log(-std::expm1(s * dL)) - std::log(-std::expm1(s));
}

double geometric_mean_index(double s, std::int64_t L)
{
    if (L <= 1)
        return 0.;
    double dL = double(L);
    if (std::abs(s) * dL < 1e-6)
        return (dL - 1) / 2 + s * (dL * dL - 1) / 12;
    if (s > 0)
        return (dL - 1) - geometric_mean_index(-s, L);
    // s < 0: r = e^s < 1, mean = r/(1-r) - L r^L / (1 - r^L)
    return 1. / std::expm1(-s) - dL / std::expm1(-s * dL);
}

double dilog(double x)
{
    if (x < 0 || x > 1)
        throw DomainError("dilog: argument outside [0, 1]");
    constexpr double zeta2 = std::numbers::pi * std::numbers::pi / 6;
    if (x == 1)
        return zeta2;
    if (x > 0.5)
        return zeta2 - std::log(x) * std::log1p(-x) - dilog(1 - x);
    double term = x, sum = 0;
    for (int k = 1; k < 200; ++k)
    {
        double c = term / (double(k) * k);
        sum += c;
        if (c < 1e-18 * sum)
            break;
        term *= x;
    }
    return sum;
}

} // namespace cdl
