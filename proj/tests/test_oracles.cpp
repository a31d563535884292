#include "support.hpp"

using namespace loopsoup;
using loopsoup::testing::rel_near;

TEST(ExpectationIdentity, Examples)
{
    for (const auto& g : {fixtures::g1(), fixtures::g2(), fixtures::g3()}) {
        OrientedEdgeFunction one(g);
        auto chi0 = zero_vertex_function(g);
        EXPECT_TRUE(rel_near(expectation_identity(g, one, chi0).real(), 1.0));
    }
    auto g1 = fixtures::g1();
    std::vector<double> chi1{1.0};
    auto v = expectation_identity(g1, OrientedEdgeFunction(g1), chi1);
    EXPECT_TRUE(rel_near(v.real(), 0.5));
    EXPECT_EQ(v.method, OracleMethod::eq1);
    auto g2 = fixtures::g2();
    EXPECT_TRUE(rel_near(expectation_identity(g2, OrientedEdgeFunction(g2, 0.0), zero_vertex_function(g2)).real(), 0.75));
    std::vector<double> bad{-0.1, 0.0};
    EXPECT_THROW(expectation_identity(g2, OrientedEdgeFunction(g2), bad), DomainError);
}

TEST(ExpectationIdentity, FirstDerivativesGiveGreen)
{
    auto g3 = fixtures::g3();
    auto gm = green(g3);
    const double h = 1e-6;
    OrientedEdgeFunction q(g3);
    q.set(g3, 0, 1, 1.0 - h);
    double d = (1.0 - expectation_identity(g3, q, zero_vertex_function(g3)).real()) / h;
    EXPECT_NEAR(d, gm(1, 0), 1e-5);
    std::vector<double> chi{h, 0.0, 0.0};
    d = (1.0 - expectation_identity(g3, OrientedEdgeFunction(g3), chi).real()) / h;
    EXPECT_NEAR(d, gm(0, 0), 1e-5);
}

TEST(FermionicPairing, Examples)
{
    auto g2 = fixtures::g2();
    auto one = constant_edge_function(g2, 1.0);
    EXPECT_TRUE(rel_near(fermionic_pairing(g2, one, one).real(), 1.0));
    auto b = one;
    b[0] = 0.0;
    EXPECT_TRUE(rel_near(fermionic_pairing(g2, b, one).real(), 2.0 / 3.0));
    EXPECT_EQ(fermionic_pairing(g2, one, constant_edge_function(g2, 0.0)).real(), 0.0);
}

TEST(FermionicPairing, IndicatorsRecoverTreeProbability)
{
    auto g3 = fixtures::g3();
    for (const auto& wt : enumerate_rooted_trees(g3)) {
        auto b = constant_edge_function(g3, 1.0);
        auto c = constant_edge_function(g3, 1.0);
        for (EdgeIndex a = 0; a < g3.num_augmented_edges(); ++a) {
            if (wt.tree.contains_augmented(g3, a))
                b[a] = 0.0;
            else
                c[a] = 0.0;
        }
        EXPECT_TRUE(rel_near(fermionic_pairing(g3, b, c).real(), tree_probability(g3, wt.tree)));
    }
}

TEST(BetaOracle, PartitionClosedForm)
{
    auto g2 = fixtures::g2();
    for (double beta : {0.25, 0.5, 0.75})
        EXPECT_TRUE(rel_near(thm1_partition(g2, beta).real(), 2.0 / 3.0 + 1.0 / (4.0 - beta * beta)));
    EXPECT_TRUE(rel_near(thm1_partition(g2, 0.5).real(), 14.0 / 15.0));
    EXPECT_NEAR(thm1_partition(g2, 1.0 - 1e-9).real(), 1.0, 1e-8);
    for (double beta : {0.1, 0.5, 0.9})
        EXPECT_TRUE(rel_near(thm1_partition(fixtures::g1(), beta).real(), 1.0));
    EXPECT_THROW(thm1_partition(g2, 1.0), DomainError);
    EXPECT_THROW(thm1_partition(g2, 0.0), DomainError);
}

TEST(BetaOracle, PartitionMonotoneInBeta)
{
    for (const auto& g : {fixtures::g2(), fixtures::g3()}) {
        double prev = 0.0;
        for (int k = 1; k < 20; ++k) {
            double z = thm1_partition(g, 0.05 * k).real();
            EXPECT_GE(z, prev);
            prev = z;
        }
    }
}

TEST(BetaOracle, Expectation)
{
    for (const auto& g : {fixtures::g2(), fixtures::g3()}) {
        auto one = constant_edge_function(g, 1.0);
        EXPECT_TRUE(rel_near(thm1_expectation(g, 0.3, one, one, OrientedEdgeFunction(g), zero_vertex_function(g)).real(), 1.0));
    }
    auto g2 = fixtures::g2();
    auto one = constant_edge_function(g2, 1.0);
    EXPECT_TRUE(rel_near(
        thm1_expectation(g2, 0.5, one, one, OrientedEdgeFunction(g2, 0.0), zero_vertex_function(g2)).real(),
        45.0 / 56.0));
    auto b = constant_edge_function(g2, 0.0);
    b[0] = 1.0;
    EXPECT_TRUE(rel_near(thm1_expectation(g2, 0.5, b, one, OrientedEdgeFunction(g2), zero_vertex_function(g2)).real(),
                         2.0 / 7.0));
}

TEST(BetaOracle, NearOneFactorizes)
{
    auto g3 = fixtures::g3();
    OrientedEdgeFunction q(g3);
    q.set(g3, 0, 1, 0.7);
    q.set(g3, 1, 0, 0.3);
    std::vector<double> chi{0.2, 0.0, 0.4};
    auto b = constant_edge_function(g3, 0.5);
    auto c = constant_edge_function(g3, 0.8);
    double joint = thm1_expectation(g3, 1.0 - 1e-9, b, c, q, chi).real();
    double product = expectation_identity(g3, q, chi).real() * fermionic_pairing(g3, b, c).real();
    EXPECT_NEAR(joint, product, 1e-7);
}

TEST(BetaOracle, TreeMarginal)
{
    auto p = thm1_tree_marginal(fixtures::g2(), 0.5);
    auto trees = enumerate_rooted_trees(fixtures::g2());
    for (std::size_t k = 0; k < trees.size(); ++k) {
        bool off = !trees[k].tree.contains_edge(fixtures::g2(), 0);
        EXPECT_TRUE(rel_near(p[k], off ? 4.0 / 14.0 : 5.0 / 14.0));
    }
}

TEST(BetaOracle, SeriesCoefficient)
{
    auto c = thm1_partition_series(fixtures::g2(), 1, 1e-4);
    EXPECT_NEAR(c[0], 1.0, 1e-12);
    EXPECT_NEAR(c[1], -2.0 / 9.0, 1e-3);
}

TEST(Bstar, Partition)
{
    auto g2 = fixtures::g2();
    EXPECT_TRUE(rel_near(bstar_partition(g2, 1.0).real(), 11.0 / 15.0));
    EXPECT_NEAR(bstar_partition(g2, 1e-10).real(), 1.0, 1e-8);
    EXPECT_TRUE(rel_near(bstar_partition(fixtures::g1(), 2.0).real(), 1.0));
    EXPECT_THROW(bstar_partition(g2, 0.0), DomainError);
    auto p = bstar_tree_marginal(g2, 1.0);
    auto trees = enumerate_rooted_trees(g2);
    for (std::size_t k = 0; k < trees.size(); ++k) {
        bool star = trees[k].tree.attached_to_root(0) && trees[k].tree.attached_to_root(1);
        EXPECT_TRUE(rel_near(p[k], star ? 5.0 / 11.0 : 3.0 / 11.0));
    }
}

TEST(CoverIdentity, Fixtures)
{
    auto z2 = FiniteGroup::cyclic(2);
    auto g2 = fixtures::g2();
    auto g3 = fixtures::g3();
    EXPECT_NEAR(cover_identity(g3, z2, ConnectionRep(g3, z2), OrientedEdgeFunction(g3), zero_vertex_function(g3)).real(),
                1.0, 1e-12);
    ConnectionRep m2(g2, z2);
    m2.set(g2, z2, 0, 1, 1);
    EXPECT_TRUE(rel_near(cover_identity(g2, z2, m2, OrientedEdgeFunction(g2), zero_vertex_function(g2)).real(), 1.0));
    ConnectionRep m3(g3, z2);
    m3.set(g3, z2, 0, 1, 1);
    auto v = cover_identity(g3, z2, m3, OrientedEdgeFunction(g3), zero_vertex_function(g3));
    EXPECT_TRUE(rel_near(v.real(), 0.8));
    EXPECT_EQ(v.method, OracleMethod::eq4);
}

TEST(CoverIdentity, OneIffTrivialHolonomy)
{
    auto g3 = fixtures::g3();
    Loop abc{{0, 1, 2}, {1, 1, 1}};
    for (const auto& grp : {FiniteGroup::cyclic(2), FiniteGroup::cyclic(3), FiniteGroup::symmetric3()}) {
        for (Element x = 0; x < grp.order(); ++x)
            for (Element y = 0; y < grp.order(); ++y) {
                ConnectionRep m(g3, grp);
                m.set_augmented(0, x);
                m.set_augmented(2, y);
                double v = cover_identity(g3, grp, m, OrientedEdgeFunction(g3), zero_vertex_function(g3)).real();
                EXPECT_GT(v, 0.0);
                EXPECT_LE(v, 1.0 + 1e-12);
                bool trivial = holonomy(g3, grp, m, abc).index == grp.identity_class();
                EXPECT_EQ(std::abs(v - 1.0) < 1e-10, trivial);
            }
    }
}

TEST(CoverIdentity, ReadingsDifferByTrivialFactor)
{
    auto g3 = fixtures::g3();
    auto z3 = FiniteGroup::cyclic(3);
    ConnectionRep m(g3, z3);
    m.set(g3, z3, 1, 2, 1);
    OrientedEdgeFunction q(g3);
    q.set(g3, 0, 1, 0.7);
    q.set(g3, 1, 0, 0.3);
    std::vector<double> chi{0.1, 0.4, 0.0};
    double joint = cover_identity(g3, z3, m, q, chi).real();
    double thinned = cover_thinned_identity(g3, z3, m, q, chi).real();
    double factor = cover_identity(g3, z3, m, OrientedEdgeFunction(g3), zero_vertex_function(g3)).real();
    EXPECT_TRUE(rel_near(joint, thinned * factor));
}

TEST(Bstar, ExpectationNormalizedAndSmallB)
{
    auto g3 = fixtures::g3();
    EXPECT_TRUE(rel_near(bstar_expectation(g3, 0.7, OrientedEdgeFunction(g3), zero_vertex_function(g3)).real(), 1.0));
    OrientedEdgeFunction q(g3, 0.4);
    std::vector<double> chi{0.2, 0.0, 0.1};
    EXPECT_NEAR(bstar_expectation(g3, 1e-9, q, chi).real(), expectation_identity(g3, q, chi).real(), 1e-7);
}

TEST(LoopMass, MatchesSoupCount)
{
    EXPECT_EQ(loop_mass(fixtures::g1()), 0.0);
    auto g3 = fixtures::g3();
    EXPECT_NEAR(loop_mass(g3), 3.0 * std::log(3.0) - std::log(16.0), 1e-12);
    RngStream rng(1);
    std::vector<double> n;
    for (int i = 0; i < 20000; ++i)
        n.push_back(static_cast<double>(sample_soup(g3, rng).loops.size()));
    EXPECT_TRUE(loopsoup::testing::within_se(mean_and_se(n), loop_mass(g3), 4.0));
}
