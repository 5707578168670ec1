#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "cdl/dos.hpp"
#include "cdl/error.hpp"
#include "cdl/mdl.hpp"
#include "cdl/numeric.hpp"
#include "test_util.hpp"

using namespace cdl;

namespace
{

double component_sum(const DlReport& r)
{
    double s = 0;
    for (const auto& [name, v] : r.components)
        s += v;
    return s;
}

// Partitions of m into at most n parts, by direct recursion on the largest part.
long long count_partitions(int m, int n, int largest)
{
    if (m == 0)
        return 1;
    if (n == 0)
        return 0;
    long long c = 0;
    for (int part = std::min(m, largest); part >= 1; --part)
        c += count_partitions(m - part, n - 1, part);
    return c;
}

struct PlantedFixture
{
    Graph g;
    Partition p;
};

const PlantedFixture& strong_planted()
{
    // N = 1000, B = 10, <k> = 10, E_in / E = 0.9.
    static const PlantedFixture f = [] {
        std::mt19937_64 rng(11);
        auto [g, p] = planted_graph(1000, 10, 5000, 4500, rng);
        return PlantedFixture{std::move(g), std::move(p)};
    }();
    return f;
}

} // namespace

TEST(SigmaEr, ExactValues)
{
    EXPECT_NEAR(sigma_er(4, 2), std::log(15.), 1e-14);
    EXPECT_EQ(sigma_er(10, 0), 0.);
    // ln C(4950, 250) from an arbitrary-precision evaluation.
    EXPECT_NEAR(sigma_er(100, 250), 986.344212701838057, 1e-9);
    EXPECT_THROW(sigma_er(4, 7), DomainError);
}

TEST(SigmaCm, SingleEdge)
{
    Graph g(2, {{0, 1}});
    EXPECT_NEAR(sigma_cm(g), 2 * std::log(2.), 1e-12);
}

TEST(SigmaCm, TwoTrianglesTermByTerm)
{
    Graph g = load_edge_list_file(fixture_path("two_triangles.edges"));
    // Degrees (2,2,3,3,2,2), 2E = 14, eta_2 = 4, eta_3 = 2.
    double pairing = std::lgamma(15.) - (7 * std::log(2.) + std::lgamma(8.)) -
                     (4 * std::log(2.) + 2 * std::log(6.));
    double histogram = std::log(720. / (24. * 2.));
    double q = std::log(double(count_partitions(14, 6, 14)));
    double e_prior_term = std::log(16.);
    EXPECT_NEAR(sigma_cm(g), pairing + histogram + q + e_prior_term, 1e-10);
}

TEST(SigmaCm, RegularGraphHasNoHistogramCost)
{
    std::vector<Edge> ring;
    for (node_t i = 0; i < 8; ++i)
        ring.emplace_back(i, (i + 1) % 8);
    auto terms = degree_prior_terms(degree_stats(Graph(8, ring)), false);
    ASSERT_EQ(terms.size(), 2u);
    EXPECT_EQ(terms[1].first, "degree_histogram_prior");
    EXPECT_NEAR(terms[1].second, 0., 1e-12);
}

TEST(DegreePrior, FlatIsMultisetOverStubs)
{
    Graph g = load_edge_list_file(fixture_path("two_triangles.edges"));
    auto terms = degree_prior_terms(degree_stats(g), true);
    ASSERT_EQ(terms.size(), 1u);
    // multiset(6, 14) = C(19, 14) = 11628.
    EXPECT_NEAR(terms[0].second, std::log(11628.), 1e-10);
}

TEST(DescriptionLength, TwoTrianglesComponentsSum)
{
    Graph g = load_edge_list_file(fixture_path("two_triangles.edges"));
    Partition p = load_partition_file(fixture_path("two_triangles.part"), g);
    for (Method m : {Method::modularity(), Method::modularity(1, true), Method::infomap(),
                     Method::infomap(true), Method::planted_partition()})
    {
        DlReport r = description_length(g, p, m);
        EXPECT_GT(r.sigma, 0) << method_name(m.kind);
        EXPECT_NEAR(component_sum(r), r.sigma, 1e-9);
        EXPECT_EQ(r.method, m);
    }
}

TEST(DescriptionLength, PlantedPartitionMethodIsSigmaPp)
{
    Graph g = load_edge_list_file(fixture_path("two_triangles.edges"));
    Partition p = load_partition_file(fixture_path("two_triangles.part"), g);
    DlReport r = description_length(g, p, Method::planted_partition());
    EXPECT_FALSE(r.beta_star);
    EXPECT_NEAR(r.sigma, sigma_pp(g, p), 1e-12);
    EXPECT_NEAR(r.W, -r.sigma, 1e-12);
    ASSERT_TRUE(r.baselines.sigma_pp);
    EXPECT_NEAR(*r.baselines.sigma_pp, r.sigma, 1e-12);
}

TEST(DescriptionLength, RejectsEmptyGraph)
{
    Graph g(3, {});
    EXPECT_THROW(description_length(g, Partition::trivial(3), Method::modularity()), DomainError);
}

TEST(DescriptionLength, SingleGroupSliceIsTheRandomGraphCount)
{
    std::mt19937_64 rng(3);
    Graph g = random_graph(1000, 5. / 999, rng);
    std::int64_t N = 1000, E = std::int64_t(g.num_edges());
    EXPECT_NEAR(log_omega(N, E, double(E), 1), sigma_er(N, E), 1e-9 * sigma_er(N, E));
    DlReport r = description_length(g, Partition::trivial(1000), Method::modularity());
    EXPECT_EQ(r.W, 0.);
    // ln Z(beta) >= the B = 1 term for every beta.
    EXPECT_GE(r.sigma, r.baselines.sigma_er_with_prior);
}

// Single-group partition of an ER graph: the description length is expected
// to land within 1% of the random-graph code with its E prior.
TEST(DescriptionLength, RandomGraphSingleGroupNearRandomGraphCode)
{
    std::mt19937_64 rng(3);
    Graph g = random_graph(1000, 5. / 999, rng);
    DlReport r = description_length(g, Partition::trivial(1000), Method::modularity());
    double target = r.baselines.sigma_er_with_prior;
    EXPECT_NEAR(r.sigma, target, 0.01 * target)
        << "sigma " << r.sigma << " beta* " << *r.beta_star;
}

TEST(DescriptionLength, StrongPlantedStructureCompresses)
{
    const auto& f = strong_planted();
    DlReport r = description_length(f.g, f.p, Method::modularity());
    EXPECT_LT(r.sigma, r.baselines.sigma_er);
    EXPECT_FALSE(r.overfit_er);
    ASSERT_TRUE(r.baselines.sigma_pp);
    EXPECT_LT(*r.baselines.sigma_pp, r.baselines.sigma_er);
}

TEST(DescriptionLength, BetaSolvesMeanAndMinimizesSigma)
{
    const auto& f = strong_planted();
    std::mt19937_64 rng(5);
    Graph er = random_graph(600, 6. / 599, rng);
    Partition er_part = random_partition(600, 4, rng);
    struct Case
    {
        const Graph* g;
        const Partition* p;
        Method m;
    };
    for (const Case& c : {Case{&f.g, &f.p, Method::modularity()},
                          Case{&f.g, &f.p, Method::infomap()},
                          Case{&f.g, &f.p, Method::modularity(2, true)},
                          Case{&er, &er_part, Method::modularity()}})
    {
        std::optional<DegreeStats> ds;
        if (c.m.degree_corrected)
            ds = degree_stats(*c.g);
        ImplicitModel model(std::int64_t(c.g->num_nodes()), std::int64_t(c.g->num_edges()),
                            c.m, {}, ds ? &*ds : nullptr);
        DlReport r = description_length(*c.g, *c.p, model);
        ASSERT_TRUE(r.beta_star);
        ASSERT_FALSE(r.has_flag("beta_clamped_high"));
        ASSERT_FALSE(r.has_flag("beta_clamped_low"));
        double beta = *r.beta_star;
        EXPECT_LE(std::abs(mean_quality(beta, model.grid()) - r.W),
                  1e-6 * std::max(1., std::abs(r.W)));
        EXPECT_NEAR(model.sigma_at(beta, r.W), r.sigma, 1e-9 * r.sigma);
        for (double frac : {0.01, 0.1})
            for (double sign : {-1., 1.})
            {
                double other = beta + sign * frac * std::abs(beta);
                EXPECT_LE(r.sigma, model.sigma_at(other, r.W) + 1e-9 * r.sigma)
                    << method_name(c.m.kind) << " beta " << beta << " vs " << other;
            }
    }
}

TEST(DescriptionLength, LabelPermutationInvariance)
{
    const auto& f = strong_planted();
    ImplicitModel model(1000, std::int64_t(f.g.num_edges()), Method::modularity());
    DlReport base = description_length(f.g, f.p, model);
    std::vector<std::int64_t> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 3; ++trial)
    {
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::int64_t> relabeled(1000);
        for (std::size_t i = 0; i < 1000; ++i)
            relabeled[i] = 100 + 7 * perm[std::size_t(f.p[i])];
        DlReport r = description_length(f.g, Partition(relabeled), model);
        EXPECT_NEAR(r.sigma, base.sigma, 1e-9);
    }
}

TEST(DescriptionLength, ReusedModelMatchesDirectCall)
{
    const auto& f = strong_planted();
    ImplicitModel model(1000, std::int64_t(f.g.num_edges()), Method::infomap());
    DlReport a = description_length(f.g, f.p, model);
    DlReport b = description_length(f.g, f.p, Method::infomap());
    EXPECT_EQ(a.sigma, b.sigma);
    EXPECT_TRUE(a.has_flag("infomap_degree_entropy_omitted"));
}

TEST(DescriptionLength, FixedBetaOrderFollowsQuality)
{
    const auto& f = strong_planted();
    std::mt19937_64 rng(13);
    Partition other = random_partition(1000, 10, rng);
    DegreeStats ds = degree_stats(f.g);
    std::int64_t E = std::int64_t(f.g.num_edges());
    for (bool dc : {false, true})
    {
        Method m = Method::modularity(1, dc);
        ImplicitModel model(1000, E, m, {}, dc ? &ds : nullptr);
        double w1 = quality(block_summary(f.g, f.p), m);
        double w2 = quality(block_summary(f.g, other), m);
        ASSERT_GT(w1, w2);
        for (double beta : {10., 1000., 20000.})
            EXPECT_LT(model.sigma_at(beta, w1), model.sigma_at(beta, w2));
    }
}

TEST(DescriptionLength, BestOfPicksSmaller)
{
    const auto& f = strong_planted();
    DlReport plain = description_length(f.g, f.p, Method::modularity());
    DlReport dc = description_length(f.g, f.p, Method::modularity(1, true));
    DlReport best = description_length_best_of(f.g, f.p, Method::modularity());
    EXPECT_EQ(best.sigma, std::min(plain.sigma, dc.sigma));
    EXPECT_EQ(best.method.degree_corrected, dc.sigma < plain.sigma);
}

TEST(ImplicitModelTest, ClampsOutsideReachableRange)
{
    ImplicitModel model(200, 800, Method::modularity(), {.beta_max = 1e4});
    BetaFit high = model.fit_beta(0.999);
    EXPECT_TRUE(high.clamped_high);
    EXPECT_EQ(high.beta, 1e4);
    BetaFit low = model.fit_beta(-0.5);
    EXPECT_TRUE(low.clamped_low);
    EXPECT_EQ(low.beta, 0.);
    DlReport r = model.describe(0.999);
    EXPECT_TRUE(r.has_flag("beta_clamped_high"));
    EXPECT_NEAR(component_sum(r), r.sigma, 1e-9);
}

TEST(ImplicitModelTest, NegativeBetaWhenAllowed)
{
    DlOptions opts;
    opts.allow_negative_beta = true;
    opts.beta_max = 1e4;
    ImplicitModel model(200, 800, Method::modularity(), opts);
    double w = mean_quality(-50., model.grid());
    BetaFit fit = model.fit_beta(w);
    EXPECT_FALSE(fit.clamped_low);
    EXPECT_LE(std::abs(fit.mean_W - w), 1e-6 * std::max(1., std::abs(w)));
    // <W> is nearly flat in beta this far below zero; beta itself is loose.
    EXPECT_NEAR(fit.beta, -50., 0.5);
}

TEST(ImplicitModelTest, DegreeCorrectedNeedsMatchingDegrees)
{
    const auto& f = strong_planted();
    std::int64_t E = std::int64_t(f.g.num_edges());
    EXPECT_THROW(ImplicitModel(1000, E, Method::modularity(1, true)), DomainError);
    std::mt19937_64 rng(17);
    auto [other, part] = planted_graph(1000, 10, 5000, 4500, rng);
    DegreeStats ds = degree_stats(other);
    ImplicitModel model(1000, E, Method::modularity(1, true), {}, &ds);
    EXPECT_THROW(description_length(f.g, f.p, model), DomainError);
    EXPECT_NO_THROW(description_length(other, part, model));
}
