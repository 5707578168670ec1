#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "cdl/error.hpp"
#include "cdl/instances.hpp"
#include "cdl/mdl.hpp"
#include "cdl/optimizer.hpp"
#include "test_util.hpp"

using namespace cdl;

namespace
{

// Every set partition of n nodes as a restricted growth string.
void for_each_set_partition(std::size_t n, const std::function<void(const std::vector<std::int64_t>&)>& fn)
{
    std::vector<std::int64_t> a(n, 0);
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t i, std::int64_t top) {
        if (i == n)
        {
            fn(a);
            return;
        }
        for (std::int64_t l = 0; l <= top + 1; ++l)
        {
            a[i] = l;
            rec(i + 1, std::max(top, l));
        }
    };
    if (n == 0)
        return;
    rec(1, 0);
}

std::optional<double> full_quality(const Graph& g, const std::vector<std::int64_t>& labels,
                                   const Method& m)
{
    try
    {
        return quality(block_summary(g, Partition(labels)), m);
    }
    catch (const InfeasibleError&)
    {
        return std::nullopt;
    }
}

double brute_force_max(const Graph& g, const Method& m)
{
    double best = -INFINITY;
    for_each_set_partition(g.num_nodes(), [&](const std::vector<std::int64_t>& l) {
        if (auto w = full_quality(g, l, m))
            best = std::max(best, *w);
    });
    return best;
}

Graph random_sparse(std::size_t n, std::size_t e, std::mt19937_64& rng)
{
    std::uniform_int_distribution<node_t> node(0, node_t(n - 1));
    std::set<std::pair<node_t, node_t>> seen;
    std::vector<Edge> edges;
    while (edges.size() < e)
    {
        node_t u = node(rng), v = node(rng);
        if (u == v)
            continue;
        if (u > v)
            std::swap(u, v);
        if (seen.insert({u, v}).second)
            edges.emplace_back(u, v);
    }
    return Graph(n, std::move(edges));
}

std::vector<std::int64_t> key(const Partition& p)
{
    return {p.labels().begin(), p.labels().end()};
}

const std::vector<Method>& all_methods()
{
    static const std::vector<Method> ms{Method::modularity(), Method::modularity(0.5),
                                        Method::modularity(2.5), Method::infomap(),
                                        Method::planted_partition()};
    return ms;
}

} // namespace

TEST(SetPartitions, BellNumbers)
{
    std::vector<std::size_t> bell{1, 2, 5, 15, 52, 203, 877};
    for (std::size_t n = 1; n <= 7; ++n)
    {
        std::size_t count = 0;
        for_each_set_partition(n, [&](const std::vector<std::int64_t>&) { ++count; });
        EXPECT_EQ(count, bell[n - 1]);
    }
}

TEST(Objective, StateMatchesFullEvaluation)
{
    std::mt19937_64 rng(3);
    Graph g = random_sparse(40, 90, rng);
    for (const Method& m : all_methods())
    {
        Partition p = random_partition(40, 6, rng);
        std::vector<std::int64_t> l = key(p);
        PartitionState st(g, m, l);
        EXPECT_NEAR(st.W(), quality(block_summary(g, p), m), 1e-9) << method_name(m.kind);
        EXPECT_EQ(st.num_groups(), std::int64_t(p.num_groups()));
    }
}

TEST(Maximize, TwoTrianglesBruteForce)
{
    Graph g = load_edge_list_file(fixture_path("two_triangles.edges"));
    double best = brute_force_max(g, Method::modularity());
    EXPECT_NEAR(best, 5. / 14, 1e-12);
    OptResult r = maximize_quality(g, Method::modularity());
    EXPECT_NEAR(r.W, 5. / 14, 1e-12);
    EXPECT_EQ(r.partition.num_groups(), 2u);
    EXPECT_EQ(r.partition[0], r.partition[1]);
    EXPECT_EQ(r.partition[0], r.partition[2]);
    EXPECT_NE(r.partition[2], r.partition[3]);
}

TEST(Maximize, RecoversCliqueRing)
{
    // Four K5 joined in a ring by single edges.
    std::vector<Edge> edges;
    for (node_t c = 0; c < 4; ++c)
    {
        for (node_t i = 0; i < 5; ++i)
            for (node_t j = i + 1; j < 5; ++j)
                edges.emplace_back(5 * c + i, 5 * c + j);
        edges.emplace_back(5 * c + 4, (5 * (c + 1)) % 20);
    }
    Graph g(20, edges);
    for (const Method& m : {Method::modularity(), Method::infomap(), Method::planted_partition()})
    {
        OptResult r = maximize_quality(g, m);
        ASSERT_EQ(r.partition.num_groups(), 4u) << method_name(m.kind);
        for (node_t v = 0; v < 20; ++v)
            EXPECT_EQ(r.partition[v], r.partition[5 * (v / 5)]);
    }
}

TEST(Maximize, PlantedPartitionBeatsPlantedLabels)
{
    // Neither singletons nor one group is a good start for this objective;
    // the optimum must still code the sample at least as well as the truth.
    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        InstanceSample s = sample_pp(200, 4, 1000, 800, seed);
        OptResult r = maximize_quality(s.graph, Method::planted_partition());
        EXPECT_GE(r.W, -sigma_pp(s.graph, s.partition) - 1e-9) << seed;
        EXPECT_EQ(r.partition.num_groups(), 4u) << seed;
    }
}

TEST(Maximize, RandomGraphHasPositiveModularity)
{
    std::mt19937_64 rng(17);
    Graph g = random_graph(1000, 5. / 999, rng);
    OptimizerConfig cfg;
    cfg.restarts = 4;
    OptResult r = maximize_quality(g, Method::modularity(), cfg);
    EXPECT_GT(r.partition.num_groups(), 1u);
    EXPECT_GT(r.W, 0);
    EXPECT_NEAR(r.W, modularity(block_summary(g, r.partition), 1), 1e-12);
}

TEST(Maximize, TraceIsMonotone)
{
    std::mt19937_64 rng(5);
    auto [g, planted] = planted_graph(300, 6, 1200, 800, rng);
    for (const Method& m : all_methods())
    {
        for (InitKind init : {InitKind::Singletons, InitKind::RandomGroups, InitKind::Agglomerative})
        {
            OptimizerConfig cfg;
            cfg.restarts = 2;
            cfg.init = init;
            OptResult r = maximize_quality(g, m, cfg);
            ASSERT_FALSE(r.trace.empty());
            for (std::size_t i = 1; i < r.trace.size(); ++i)
                EXPECT_GE(r.trace[i], r.trace[i - 1] - 1e-9 * std::max(1., std::abs(r.trace[i])))
                    << method_name(m.kind) << " sweep " << i;
            EXPECT_NEAR(r.trace.back(), r.W, 1e-9 * std::max(1., std::abs(r.W)));
            EXPECT_EQ(r.restart_W[std::size_t(r.restart)], r.W);
        }
    }
}

TEST(Maximize, ExhaustiveOptimalityOnSmallGraphs)
{
    std::mt19937_64 rng(2024);
    int fixtures = 0;
    for (std::size_t n = 5; n <= 7; ++n)
        for (std::size_t e : {std::size_t(6), std::size_t(8), std::size_t(10)})
            for (int rep = 0; rep < 2; ++rep)
            {
                Graph g = random_sparse(n, e, rng);
                ++fixtures;
                for (const Method& m : all_methods())
                {
                    double best = brute_force_max(g, m);
                    OptimizerConfig cfg;
                    cfg.restarts = 8;
                    cfg.seed = std::uint64_t(fixtures);
                    OptResult r = maximize_quality(g, m, cfg);
                    EXPECT_NEAR(r.W, best, 1e-9 * std::max(1., std::abs(best)))
                        << method_name(m.kind) << " gamma " << m.gamma << " n " << n << " e "
                        << e;
                }
            }
    EXPECT_EQ(fixtures, 18);
}

TEST(Maximize, DeterministicAcrossThreadCounts)
{
    std::mt19937_64 rng(8);
    auto [g, planted] = planted_graph(400, 8, 1600, 1000, rng);
    OptimizerConfig one, many;
    one.threads = 1;
    many.threads = 4;
    OptResult a = maximize_quality(g, Method::infomap(), one);
    OptResult b = maximize_quality(g, Method::infomap(), many);
    EXPECT_EQ(a.partition, b.partition);
    EXPECT_EQ(a.restart_W, b.restart_W);
}

TEST(Maximize, InvalidConfig)
{
    Graph g = load_edge_list_file(fixture_path("two_triangles.edges"));
    OptimizerConfig cfg;
    cfg.restarts = 0;
    EXPECT_THROW(maximize_quality(g, Method::modularity(), cfg), DomainError);
    cfg = {};
    cfg.anneal = {1, -2};
    EXPECT_THROW(maximize_quality(g, Method::modularity(), cfg), DomainError);
    EXPECT_THROW(maximize_quality(Graph(3, {}), Method::modularity()), DomainError);
}

TEST(PartitionState, MoveDeltasMatchFullEvaluation)
{
    std::mt19937_64 rng(99);
    Graph g = random_sparse(120, 300, rng);
    for (const Method& m : all_methods())
    {
        Partition start = random_partition(120, 8, rng);
        PartitionState st(g, m, key(start));
        std::uniform_int_distribution<std::size_t> node(0, 119);
        int checked = 0;
        for (int step = 0; step < 2000; ++step)
        {
            std::size_t v = node(rng);
            auto groups = st.nonempty_groups();
            std::uint32_t s = groups[std::uniform_int_distribution<std::size_t>(0, groups.size() - 1)(rng)];
            if (step % 7 == 0 && st.empty_group())
                s = *st.empty_group();
            double predicted = st.W_after_move(v, s);
            std::vector<std::int64_t> l(st.labels().begin(), st.labels().end());
            l[v] = s;
            auto full = full_quality(g, l, m);
            if (!full)
                continue;
            ASSERT_NEAR(predicted, *full, 1e-9 * std::max(1., std::abs(*full)))
                << method_name(m.kind) << " step " << step;
            st.move(v, s);
            ASSERT_NEAR(st.W(), *full, 1e-9 * std::max(1., std::abs(*full)));
            ++checked;
        }
        EXPECT_GT(checked, 1000);
    }
}

TEST(PartitionState, MergeDeltasMatchFullEvaluation)
{
    std::mt19937_64 rng(7);
    Graph g = random_sparse(60, 150, rng);
    for (const Method& m : all_methods())
    {
        PartitionState st(g, m, key(random_partition(60, 12, rng)));
        while (st.num_groups() > 1)
        {
            auto groups = st.nonempty_groups();
            std::uint32_t r = groups[0], s = groups[1];
            std::int64_t e_rs = 0;
            for (auto [u, v] : g.edges())
            {
                auto a = st.label(u), b = st.label(v);
                if ((a == r && b == s) || (a == s && b == r))
                    ++e_rs;
            }
            double predicted = st.W_after_merge(r, s, e_rs);
            st.merge(r, s, e_rs);
            std::vector<std::int64_t> l(st.labels().begin(), st.labels().end());
            auto full = full_quality(g, l, m);
            ASSERT_TRUE(full);
            EXPECT_NEAR(predicted, *full, 1e-9 * std::max(1., std::abs(*full)));
            EXPECT_NEAR(st.W(), *full, 1e-9 * std::max(1., std::abs(*full)));
        }
    }
}

TEST(PartitionState, FuzzTenThousandMovesOnAggregate)
{
    // Moves on an aggregated graph agree with moving every member node.
    std::mt19937_64 rng(31);
    Graph g = random_sparse(200, 700, rng);
    for (const Method& m : all_methods())
    {
        auto base = std::make_shared<const WeightedGraph>(WeightedGraph::from_graph(g));
        Objective obj(m, 200, 700);
        std::vector<std::uint32_t> coarse(200);
        for (std::size_t v = 0; v < 200; ++v)
            coarse[v] = std::uint32_t(v % 50);
        auto agg = std::make_shared<const WeightedGraph>(base->aggregate(coarse, 50));
        std::vector<std::uint32_t> labels(50);
        for (std::size_t i = 0; i < 50; ++i)
            labels[i] = std::uint32_t(i % 10);
        PartitionState st(agg, obj, labels);
        std::uniform_int_distribution<std::size_t> super(0, 49);
        std::uniform_int_distribution<std::uint32_t> grp(0, 49);
        double worst = 0;
        int checked = 0;
        for (int step = 0; step < 10000; ++step)
        {
            std::size_t v = super(rng);
            std::uint32_t s = grp(rng);
            double predicted = st.W_after_move(v, s);
            std::vector<std::int64_t> l(200);
            for (std::size_t u = 0; u < 200; ++u)
                l[u] = coarse[u] == v ? std::int64_t(s) : std::int64_t(st.label(coarse[u]));
            auto full = full_quality(g, l, m);
            if (!full)
                continue;
            worst = std::max(worst, std::abs(predicted - *full) / std::max(1., std::abs(*full)));
            st.move(v, s);
            ++checked;
        }
        EXPECT_LE(worst, 1e-9) << method_name(m.kind);
        EXPECT_GT(checked, 5000);
    }
}

TEST(Posterior, ZeroBetaIsUniformOverSetPartitions)
{
    Graph g = load_edge_list_file(fixture_path("path4.edges"));
    PosteriorConfig cfg;
    cfg.sweeps = 30000;
    cfg.thin = 5;
    cfg.seed = 4;
    auto samples = posterior_sample(g, Method::modularity(), 0, cfg);
    std::map<std::vector<std::int64_t>, int> counts;
    for (const auto& p : samples)
        counts[key(p)]++;
    ASSERT_EQ(counts.size(), 15u);
    double expected = double(samples.size()) / 15, chi2 = 0;
    for (auto& [k, c] : counts)
        chi2 += (c - expected) * (c - expected) / expected;
    // 14 degrees of freedom; 36.12 is the 0.999 quantile.
    EXPECT_LT(chi2, 36.12);
}

TEST(Posterior, MarginalsMatchEnumeration)
{
    Graph g = load_edge_list_file(fixture_path("path4.edges"));
    for (const Method& m : {Method::modularity(), Method::infomap()})
    {
        double beta = m.kind == MethodKind::Modularity ? 4 : 1;
        std::map<std::vector<std::int64_t>, double> exact;
        double z = 0;
        for_each_set_partition(4, [&](const std::vector<std::int64_t>& l) {
            double w = std::exp(beta * *full_quality(g, l, m));
            exact[l] = w;
            z += w;
        });
        PosteriorConfig cfg;
        cfg.sweeps = 40000;
        cfg.thin = 4;
        cfg.seed = 12;
        auto samples = posterior_sample(g, m, beta, cfg);
        std::map<std::vector<std::int64_t>, int> counts;
        for (const auto& p : samples)
            counts[key(p)]++;
        double n = double(samples.size());
        // Co-membership marginals of the three edges and of the end nodes.
        for (auto [a, b] : {std::pair{0, 1}, {1, 2}, {2, 3}, {0, 3}})
        {
            double p = 0, f = 0;
            for (auto& [l, w] : exact)
                if (l[std::size_t(a)] == l[std::size_t(b)])
                    p += w / z;
            for (auto& [l, c] : counts)
                if (l[std::size_t(a)] == l[std::size_t(b)])
                    f += c / n;
            EXPECT_NEAR(f, p, 3 * std::sqrt(p * (1 - p) / n))
                << method_name(m.kind) << " pair " << a << b;
        }
    }
}

TEST(Posterior, ConcentratesAtLargeBeta)
{
    Graph g = load_edge_list_file(fixture_path("two_triangles.edges"));
    PosteriorConfig cfg;
    cfg.sweeps = 2000;
    cfg.burn_in = 500;
    auto samples = posterior_sample(g, Method::modularity(), 500, cfg);
    int at_best = 0;
    for (const auto& p : samples)
        if (std::abs(modularity(block_summary(g, p), 1) - 5. / 14) < 1e-12)
            ++at_best;
    EXPECT_GT(double(at_best) / double(samples.size()), 0.99);
}

TEST(EffectiveB, Values)
{
    EXPECT_NEAR(effective_b(Partition(std::vector<std::int64_t>{0, 0, 0, 1, 1, 1})), 2, 1e-12);
    std::vector<std::int64_t> skewed(1000, 0);
    skewed.back() = 1;
    EXPECT_NEAR(effective_b(Partition(skewed)), 1.0079, 1e-4);
    EXPECT_NEAR(effective_b(Partition::trivial(10)), 1, 1e-12);
}

TEST(GammaScan, DefaultGrid)
{
    auto grid = default_gamma_grid();
    ASSERT_EQ(grid.size(), 25u);
    EXPECT_NEAR(grid.front(), 0.01, 1e-15);
    EXPECT_NEAR(grid.back(), 100, 1e-10);
    EXPECT_NEAR(grid[12], 1, 1e-12);
}

TEST(GammaScan, SelectsMinimumAndRecoversPlantedGroups)
{
    std::mt19937_64 rng(10);
    auto [g, planted] = planted_graph(1000, 10, 5000, 4000, rng);
    OptimizerConfig cfg;
    cfg.restarts = 2;
    auto grid = default_gamma_grid();
    GammaScan scan = gamma_scan(g, grid, cfg);
    ASSERT_EQ(scan.records.size(), grid.size());
    EXPECT_FALSE(scan.records[scan.selected].out_of_range);
    for (const auto& r : scan.records)
    {
        if (!r.out_of_range)
            EXPECT_GE(r.sigma, scan.records[scan.selected].sigma);
        EXPECT_NEAR(r.B_e, effective_b(r.partition), 1e-12);
    }
    const auto& best = scan.records[scan.selected];
    EXPECT_NEAR(best.B_e, 10, 1.5);
    EXPECT_THROW(gamma_scan(g, std::span<const double>{}, cfg), DomainError);
}

TEST(GammaScan, RandomGraphDegeneratesToOneGroup)
{
    std::mt19937_64 rng(10);
    Graph g = random_graph(500, 5. / 499, rng);
    OptimizerConfig cfg;
    cfg.restarts = 2;
    auto grid = default_gamma_grid();
    GammaScan scan = gamma_scan(g, grid, cfg);
    // Isolated nodes may keep their own groups; B_e discounts them.
    EXPECT_LT(scan.records[scan.selected].B_e, 1.2);
}

TEST(GammaScan, ManyGroupsNeedLargerResolution)
{
    // 150 planted groups exceed sqrt(2E) ~ 89: gamma = 1 finds too few,
    // the most compressive gamma comes close.
    std::mt19937_64 rng(10);
    auto [g, planted] = planted_graph(2000, 150, 4000, 3600, rng);
    OptimizerConfig cfg;
    cfg.restarts = 2;
    auto grid = default_gamma_grid();
    GammaScan scan = gamma_scan(g, grid, cfg);
    const auto& at_one = scan.records[12];
    ASSERT_NEAR(at_one.gamma, 1, 1e-12);
    EXPECT_LT(double(at_one.B), std::sqrt(2. * 4000));
    EXPECT_NEAR(scan.records[scan.selected].B_e, 150, 0.15 * 150);
}
