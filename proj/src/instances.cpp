#include "cdl/instances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_set>
#include <vector>

#include "cdl/error.hpp"

namespace cdl
{

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    // splitmix64 finalizer over a golden-ratio stride
    std::uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace
{

using Rng = std::mt19937_64;

std::uint64_t pair_key(node_t u, node_t v)
{
    return (std::uint64_t(u) << 32) | v;
}

// Offset t in [0, n(n-1)/2) to the t-th pair (a < b) of n items in
// lexicographic order.
std::pair<std::uint64_t, std::uint64_t> decode_pair(std::uint64_t t, std::uint64_t n)
{
    // rows a hold n-1-a pairs; find a with start(a) <= t < start(a+1)
    auto start = [n](std::uint64_t a) { return a * (2 * n - a - 1) / 2; };
    double nd = double(n);
    auto a = std::uint64_t(std::max(0., std::floor(nd - 0.5 -
                                                   std::sqrt((nd - 0.5) * (nd - 0.5) - 2 * double(t)))));
    while (a > 0 && start(a) > t)
        --a;
    while (start(a + 1) <= t)
        ++a;
    return {a, a + 1 + (t - start(a))};
}

struct Groups
{
    std::vector<std::vector<node_t>> members;
    std::vector<std::int64_t> label; // per node
    std::int64_t big = 0;             // groups [0, big) have size + 1 members
    std::int64_t size = 0;            // floor(N / B)
};

Groups assign_groups(std::int64_t N, std::int64_t B, Rng& rng)
{
    std::vector<node_t> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), node_t(0));
    std::shuffle(order.begin(), order.end(), rng);
    Groups g;
    g.size = N / B;
    g.big = N % B;
    g.members.resize(std::size_t(B));
    g.label.resize(std::size_t(N));
    std::size_t pos = 0;
    for (std::int64_t r = 0; r < B; ++r)
    {
        std::int64_t n_r = g.size + (r < g.big ? 1 : 0);
        auto& m = g.members[std::size_t(r)];
        m.assign(order.begin() + std::ptrdiff_t(pos), order.begin() + std::ptrdiff_t(pos + n_r));
        std::sort(m.begin(), m.end());
        for (node_t v : m)
            g.label[v] = r;
        pos += std::size_t(n_r);
    }
    return g;
}

std::uint64_t within_capacity(const Groups& g)
{
    auto c2 = [](std::uint64_t n) { return n * (n - (n > 0)) / 2; };
    std::uint64_t B = g.members.size();
    return std::uint64_t(g.big) * c2(std::uint64_t(g.size) + 1) +
           (B - std::uint64_t(g.big)) * c2(std::uint64_t(g.size));
}

// k distinct pairs out of the full class list, by partial Fisher-Yates.
void take_from_list(std::vector<Edge>& all, std::uint64_t k, Rng& rng, std::vector<Edge>& out)
{
    for (std::uint64_t i = 0; i < k; ++i)
    {
        std::uniform_int_distribution<std::uint64_t> pick(i, all.size() - 1);
        std::swap(all[i], all[pick(rng)]);
        out.push_back(all[i]);
    }
}

void sample_within(const Groups& g, std::uint64_t k, Rng& rng, std::vector<Edge>& out)
{
    std::uint64_t cap = within_capacity(g);
    if (k == 0)
        return;
    if (2 * k > cap)
    {
        // dense: the class is at most 2k pairs, list it
        std::vector<Edge> all;
        all.reserve(cap);
        for (const auto& m : g.members)
            for (std::size_t a = 0; a < m.size(); ++a)
                for (std::size_t b = a + 1; b < m.size(); ++b)
                    all.emplace_back(m[a], m[b]);
        take_from_list(all, k, rng, out);
        return;
    }
    // Uniform pair index over all within-group pairs, decoded to (group, a, b).
    std::uint64_t s = std::uint64_t(g.size);
    std::uint64_t big_pairs = (s + 1) * s / 2, small_pairs = s * (s - (s > 0)) / 2;
    std::uint64_t big_total = std::uint64_t(g.big) * big_pairs;
    std::uniform_int_distribution<std::uint64_t> pick(0, cap - 1);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(std::size_t(2 * k));
    while (seen.size() < k)
    {
        std::uint64_t t = pick(rng);
        std::uint64_t r, off, n;
        if (t < big_total)
            r = t / big_pairs, off = t % big_pairs, n = s + 1;
        else
            r = std::uint64_t(g.big) + (t - big_total) / small_pairs,
            off = (t - big_total) % small_pairs, n = s;
        auto [a, b] = decode_pair(off, n);
        const auto& m = g.members[r];
        node_t u = m[a], v = m[b];
        if (seen.insert(pair_key(u, v)).second)
            out.emplace_back(u, v);
    }
}

void sample_between(const Groups& g, std::int64_t N, std::uint64_t k, Rng& rng,
                    std::vector<Edge>& out)
{
    std::uint64_t n = std::uint64_t(N);
    std::uint64_t cap = n * (n - 1) / 2 - within_capacity(g);
    if (k == 0)
        return;
    if (2 * k > cap)
    {
        std::vector<Edge> all;
        all.reserve(cap);
        for (node_t u = 0; u < n; ++u)
            for (node_t v = u + 1; v < n; ++v)
                if (g.label[u] != g.label[v])
                    all.emplace_back(u, v);
        take_from_list(all, k, rng, out);
        return;
    }
    // Uniform over all pairs, rejecting within-group ones; at least half of
    // all pairs are between groups whenever B >= 2.
    std::uniform_int_distribution<std::uint64_t> pick(0, n * (n - 1) / 2 - 1);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(std::size_t(2 * k));
    while (seen.size() < k)
    {
        auto [a, b] = decode_pair(pick(rng), n);
        node_t u = node_t(a), v = node_t(b);
        if (g.label[u] == g.label[v])
            continue;
        if (seen.insert(pair_key(u, v)).second)
            out.emplace_back(u, v);
    }
}

} // namespace

InstanceSample sample_pp(std::int64_t N, std::int64_t B, std::int64_t E, std::int64_t E_in,
                         std::uint64_t seed)
{
    if (N < 1 || B < 1 || B > N)
        throw DomainError("sample needs 1 <= B <= N");
    if (E < 0 || E_in < 0 || E_in > E)
        throw DomainError("sample needs 0 <= E_in <= E");
    if (N > std::int64_t(std::numeric_limits<node_t>::max()))
        throw DomainError("N exceeds the node index range");
    Rng rng(seed);
    Groups groups = assign_groups(N, B, rng);
    std::uint64_t n = std::uint64_t(N);
    std::uint64_t cap_in = within_capacity(groups), cap_out = n * (n - 1) / 2 - cap_in;
    if (std::uint64_t(E_in) > cap_in || std::uint64_t(E - E_in) > cap_out)
        throw InfeasibleError("not enough distinct within- or between-group pairs");

    std::vector<Edge> edges;
    edges.reserve(std::size_t(E));
    sample_within(groups, std::uint64_t(E_in), rng, edges);
    sample_between(groups, N, std::uint64_t(E - E_in), rng, edges);
    std::sort(edges.begin(), edges.end());

    InstanceSample s{Graph(std::size_t(N), std::move(edges)), Partition(groups.label), {}};
    s.meta.N = N;
    s.meta.E = E;
    s.meta.B = B;
    s.meta.E_in = E_in;
    s.meta.seed = seed;
    s.meta.equal_sizes = groups.big == 0;
    return s;
}

InstanceSample sample_instance(const PlantedGrid& grid, double beta, std::uint64_t seed)
{
    ArgmaxState a = argmax_state(beta, grid);
    InstanceSample s = sample_pp(grid.N(), a.B_star, grid.E(), a.E_in_star, seed);
    s.meta.beta = beta;
    s.meta.method = grid.method();
    return s;
}

} // namespace cdl
