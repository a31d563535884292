#include "support.hpp"

#include <random>

using namespace loopsoup;
using loopsoup::testing::rel_near;
using loopsoup::testing::within_se;

namespace
{

// g3 edges: ab = 0, bc = 1, ca = 2 (stored c -> a).
ConnectionRep flip_ab(const WeightedGraph& g, const FiniteGroup& z2)
{
    ConnectionRep m(g, z2);
    m.set(g, z2, 0, 1, 1);
    return m;
}

std::vector<Element> conductance_values(const ConnectionRep& m)
{
    return {m.values().begin(), m.values().begin() + static_cast<std::ptrdiff_t>(m.num_edges())};
}

Loop random_closed_walk(const WeightedGraph& g, std::mt19937_64& gen, std::size_t steps)
{
    std::uniform_int_distribution<std::size_t> pick_v(0, g.num_vertices() - 1);
    Loop l;
    while (true) {
        l.skeleton = {pick_v(gen)};
        for (std::size_t k = 1; k < steps; ++k) {
            const auto& nb = g.neighbors(l.skeleton.back());
            std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
            l.skeleton.push_back(nb[pick(gen)].vertex);
        }
        if (g.find_edge(l.skeleton.back(), l.skeleton.front()))
            break;
    }
    l.holding.assign(l.skeleton.size(), 1.0);
    return l;
}

ConnectionRep random_connection(const WeightedGraph& g, const FiniteGroup& grp, std::mt19937_64& gen)
{
    std::uniform_int_distribution<Element> pick(0, grp.order() - 1);
    ConnectionRep m(g, grp);
    for (EdgeIndex a = 0; a < g.num_augmented_edges(); ++a)
        if (g.has_augmented_edge(a))
            m.set_augmented(a, pick(gen));
    return m;
}

std::vector<Element> random_gauge(const WeightedGraph& g, const FiniteGroup& grp, std::mt19937_64& gen)
{
    std::uniform_int_distribution<Element> pick(0, grp.order() - 1);
    std::vector<Element> h(g.num_vertices());
    for (auto& v : h)
        v = pick(gen);
    return h;
}

} // namespace

TEST(Group, BuiltinsAndClasses)
{
    auto z2 = FiniteGroup::cyclic(2);
    EXPECT_EQ(z2.order(), 2u);
    EXPECT_EQ(z2.num_classes(), 2u);
    auto s3 = FiniteGroup::symmetric3();
    EXPECT_EQ(s3.order(), 6u);
    EXPECT_EQ(s3.num_classes(), 3u);
    for (Element a = 0; a < 6; ++a)
        EXPECT_EQ(s3.mul(a, s3.inverse(a)), s3.identity());
    std::size_t total = 0;
    for (std::size_t c = 0; c < s3.num_classes(); ++c)
        total += s3.conjugacy_class(c).size();
    EXPECT_EQ(total, 6u);
    for (std::size_t n = 1; n <= 6; ++n)
        EXPECT_EQ(FiniteGroup::cyclic(n).num_classes(), n);
}

TEST(Group, RejectsBadTables)
{
    EXPECT_THROW(FiniteGroup::from_table({{0, 1}, {1, 1}}, 0, "x"), DomainError);
    EXPECT_THROW(FiniteGroup::from_table({{0, 1}, {1, 0}}, 1, "x"), DomainError);
    EXPECT_THROW(FiniteGroup::from_table({{0, 1}, {1, 2}}, 0, "x"), DomainError);
    EXPECT_THROW(FiniteGroup::from_table({{0, 1, 2}, {1, 0, 2}}, 0, "x"), DomainError);
    // Latin square with identity that is not associative.
    EXPECT_THROW(FiniteGroup::from_table({{0, 1, 2, 3, 4},
                                          {1, 0, 3, 4, 2},
                                          {2, 4, 0, 1, 3},
                                          {3, 2, 4, 0, 1},
                                          {4, 3, 1, 2, 0}},
                                         0, "loop"),
                 DomainError);
}

TEST(Group, Distributions)
{
    auto z3 = FiniteGroup::cyclic(3);
    EXPECT_NO_THROW(check_symmetric_distribution(z3, uniform_distribution(z3)));
    EXPECT_NO_THROW(check_symmetric_distribution(z3, delta_identity(z3)));
    EXPECT_THROW(check_symmetric_distribution(z3, {0.5, 0.5, 0.0}), DomainError);
    EXPECT_THROW(check_symmetric_distribution(z3, {0.5, 0.5}), DomainError);
    EXPECT_THROW(check_symmetric_distribution(z3, {0.5, 0.3, 0.3}), DomainError);
}

TEST(Gauge, Examples)
{
    auto g3 = fixtures::g3();
    auto z2 = FiniteGroup::cyclic(2);
    auto m = flip_ab(g3, z2);
    EXPECT_EQ(gauge_transform(g3, z2, m, {0, 0, 0}), m);
    auto moved = gauge_transform(g3, z2, m, {1, 0, 0});
    EXPECT_EQ(conductance_values(moved), (std::vector<Element>{0, 0, 1}));
    EXPECT_EQ(moved.value(g3, z2, 2, 0), 1u);

    auto s3 = FiniteGroup::symmetric3();
    std::mt19937_64 gen(1);
    for (int i = 0; i < 100; ++i) {
        auto c = random_connection(g3, s3, gen);
        auto h = random_gauge(g3, s3, gen);
        std::vector<Element> inv(h.size());
        for (std::size_t x = 0; x < h.size(); ++x)
            inv[x] = s3.inverse(h[x]);
        EXPECT_EQ(gauge_transform(g3, s3, gauge_transform(g3, s3, c, h), inv), c);
    }
}

TEST(Holonomy, Examples)
{
    auto g3 = fixtures::g3();
    auto g2 = fixtures::g2();
    auto z2 = FiniteGroup::cyclic(2);
    Loop abc{{0, 1, 2}, {1, 1, 1}};
    Loop ab{{0, 1}, {1, 1}};
    EXPECT_EQ(holonomy(g3, z2, ConnectionRep(g3, z2), abc).index, z2.identity_class());
    EXPECT_EQ(holonomy(g3, z2, flip_ab(g3, z2), abc).index, z2.class_of(1));
    EXPECT_EQ(holonomy(g2, z2, flip_ab(g2, z2), ab).index, z2.identity_class());
}

TEST(Holonomy, FuzzedGaugeAndGeodesicInvariance)
{
    auto g3 = fixtures::g3();
    std::mt19937_64 gen(2);
    for (const auto& grp : {FiniteGroup::cyclic(2), FiniteGroup::cyclic(3), FiniteGroup::symmetric3()}) {
        for (int i = 0; i < 2000; ++i) {
            auto m = random_connection(g3, grp, gen);
            auto h = random_gauge(g3, grp, gen);
            auto l = random_closed_walk(g3, gen, 2 + i % 9);
            auto base = holonomy(g3, grp, m, l);
            ASSERT_EQ(holonomy(g3, grp, gauge_transform(g3, grp, m, h), l), base);
            auto reduced = geodesic_reduce(l);
            Element r = reduced.empty() ? grp.identity() : holonomy_element(g3, grp, m, reduced);
            ASSERT_EQ(grp.class_of(r), base.index);
            std::rotate(l.skeleton.begin(), l.skeleton.begin() + 1, l.skeleton.end());
            ASSERT_EQ(holonomy(g3, grp, m, l), base);
        }
    }
}

TEST(Geodesic, Examples)
{
    EXPECT_TRUE(geodesic_reduce(Loop{{0, 1}, {1, 1}}).empty());
    EXPECT_EQ(geodesic_reduce(Loop{{0, 1, 2}, {1, 1, 1}}), (std::vector<VertexIndex>{0, 1, 2}));
    auto r = geodesic_reduce(Loop{{0, 1, 0, 1, 2}, {1, 1, 1, 1, 1}});
    EXPECT_TRUE(same_loop(Loop{r, std::vector<double>(r.size(), 1.0)}, Loop{{0, 1, 2}, {1, 1, 1}}));
    EXPECT_TRUE(geodesic_reduce(Loop{{0, 1, 2, 1}, {1, 1, 1, 1}}).empty());
}

TEST(TReduce, Examples)
{
    auto g3 = fixtures::g3();
    auto z2 = FiniteGroup::cyclic(2);
    auto t = RootedSpanningTree::from_parents(g3, {3, 0, 1});
    auto reduced = t_reduce(g3, z2, flip_ab(g3, z2), t);
    EXPECT_EQ(conductance_values(reduced), (std::vector<Element>{0, 0, 1}));
    EXPECT_EQ(t_reduce(g3, z2, reduced, t), reduced);
    EXPECT_TRUE(t_reduce(g3, z2, ConnectionRep(g3, z2), t).is_trivial(z2));
}

TEST(TReduce, ExhibitsGaugeAndClearsTreeEdges)
{
    auto g3 = fixtures::g3();
    auto s3 = FiniteGroup::symmetric3();
    auto trees = enumerate_rooted_trees(g3);
    std::mt19937_64 gen(3);
    for (int i = 0; i < 2000; ++i) {
        auto m = random_connection(g3, s3, gen);
        const auto& t = trees[i % trees.size()].tree;
        auto red = t_reduce_with_gauge(g3, s3, m, t);
        ASSERT_EQ(gauge_transform(g3, s3, m, red.gauge), red.reduced);
        for (EdgeIndex a : t.edges(g3))
            ASSERT_EQ(red.reduced.augmented(a), s3.identity());
        ASSERT_TRUE(gauge_equivalent(g3, s3, m, red.reduced));
    }
}

TEST(Percolation, RoundTrip)
{
    auto g3 = fixtures::g3();
    auto z2 = FiniteGroup::cyclic(2);
    for (unsigned mask = 0; mask < 8; ++mask) {
        std::vector<bool> open{(mask & 1U) != 0, (mask & 2U) != 0, (mask & 4U) != 0};
        auto m = percolation_to_connection(g3, z2, open);
        EXPECT_EQ(connection_to_percolation(g3, z2, m), open);
        EXPECT_EQ(percolation_to_connection(g3, z2, connection_to_percolation(g3, z2, m)), m);
    }
    EXPECT_THROW(percolation_to_connection(g3, FiniteGroup::cyclic(3), {true, false, false}), DomainError);
}

TEST(Cover, Fixtures)
{
    auto z2 = FiniteGroup::cyclic(2);
    auto g2 = fixtures::g2();
    auto g3 = fixtures::g3();
    auto trivial = build_cover(g3, z2, ConnectionRep(g3, z2));
    EXPECT_EQ(trivial.num_vertices(), 6u);
    EXPECT_TRUE(rel_near(det_energy(trivial).real(), 256.0));
    EXPECT_TRUE(rel_near(det_energy(build_cover(g2, z2, flip_ab(g2, z2))).real(), 9.0));
    auto six = build_cover(g3, z2, flip_ab(g3, z2));
    EXPECT_TRUE(rel_near(det_energy(six).real(), 320.0));
    for (VertexIndex x = 0; x < six.num_vertices(); ++x)
        EXPECT_EQ(six.neighbors(x).size(), 2u);
}

TEST(Cover, ProjectAndLift)
{
    auto z2 = FiniteGroup::cyclic(2);
    auto g2 = fixtures::g2();
    auto m = flip_ab(g2, z2);
    auto cover = build_cover(g2, z2, m);
    EXPECT_EQ(project_cover_soup(g2, z2, empty_ensemble(cover)), empty_ensemble(g2));

    auto ens = empty_ensemble(cover);
    ens.loops.push_back({{cover.vertex("a#0"), cover.vertex("b#1")}, {0.1, 0.2}});
    validate_ensemble(cover, ens);
    auto proj = project_cover_soup(g2, z2, ens);
    ASSERT_EQ(proj.loops.size(), 1u);
    EXPECT_EQ(proj.loops[0].skeleton, (std::vector<VertexIndex>{0, 1}));

    auto base = empty_ensemble(g2);
    base.loops.push_back({{0, 1}, {0.1, 0.2}});
    RngStream rng(4);
    std::vector<double> first_fiber;
    for (int i = 0; i < 4000; ++i) {
        auto lifted = lift_trivial_loops(g2, z2, m, base, rng);
        validate_ensemble(cover, lifted);
        const auto& s = lifted.loops[0].skeleton;
        ASSERT_NE(s[0] % 2, s[1] % 2);
        first_fiber.push_back(static_cast<double>(s[0] % 2));
    }
    EXPECT_TRUE(within_se(mean_and_se(first_fiber), 0.5, 4.0));
}

TEST(Cover, LiftRejectsNontrivialLoop)
{
    auto z2 = FiniteGroup::cyclic(2);
    auto g3 = fixtures::g3();
    auto ens = empty_ensemble(g3);
    ens.loops.push_back({{0, 1, 2}, {1, 1, 1}});
    RngStream rng(5);
    try {
        lift_trivial_loops(g3, z2, flip_ab(g3, z2), ens, rng);
        FAIL() << "expected an error";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("(a,b,c)"), std::string::npos) << e.what();
    }
}

TEST(Cover, ProjectLiftFuzz)
{
    auto g3 = fixtures::g3();
    std::mt19937_64 gen(6);
    RngStream rng(6);
    for (const auto& grp : {FiniteGroup::cyclic(2), FiniteGroup::cyclic(3), FiniteGroup::symmetric3()}) {
        for (int i = 0; i < 200; ++i) {
            auto m = random_connection(g3, grp, gen);
            auto ens = empty_ensemble(g3);
            for (int k = 0; k < 5; ++k) {
                auto l = random_closed_walk(g3, gen, 2 + k);
                if (holonomy_element(g3, grp, m, l.skeleton) == grp.identity()) {
                    for (auto& h : l.holding)
                        h = 0.1 + 0.01 * k;
                    ens.loops.push_back(l);
                }
            }
            ens.trivial_time = {0.5, 1.0, 0.0};
            auto back = project_cover_soup(g3, grp, lift_trivial_loops(g3, grp, m, ens, rng));
            ASSERT_EQ(back.loops.size(), ens.loops.size());
            for (std::size_t k = 0; k < ens.loops.size(); ++k)
                ASSERT_TRUE(same_loop(back.loops[k], ens.loops[k]));
            for (std::size_t x = 0; x < 3; ++x)
                ASSERT_NEAR(back.trivial_time[x], ens.trivial_time[x], 1e-12);
        }
    }
}

TEST(GammaTree, Examples)
{
    auto g3 = fixtures::g3();
    auto z2 = FiniteGroup::cyclic(2);
    auto t = RootedSpanningTree::from_parents(g3, {3, 0, 1});
    RngStream rng(7);
    EXPECT_TRUE(sample_gamma_tree_connection(g3, z2, t, delta_identity(z2), rng).is_trivial(z2));
    auto all = enumerate_tree_assignments(g3, z2, t, uniform_distribution(z2));
    ASSERT_EQ(all.size(), 4u);
    for (const auto& a : all)
        EXPECT_DOUBLE_EQ(a.probability, 0.25);
    EXPECT_DOUBLE_EQ(gamma_tree_class_probability(g3, z2, t, uniform_distribution(z2), ConnectionRep(g3, z2)),
                     0.25);
    EXPECT_THROW(sample_gamma_tree_connection(g3, FiniteGroup::cyclic(3), t, {0.2, 0.8, 0.0}, rng),
                 DomainError);
}

TEST(GammaTree, OrientationIndependence)
{
    auto g3 = fixtures::g3();
    auto z3 = FiniteGroup::cyclic(3);
    auto t = RootedSpanningTree::from_parents(g3, {3, 0, 1});
    GroupDistribution gamma{0.5, 0.25, 0.25};
    Loop abc{{0, 1, 2}, {1, 1, 1}};
    RngStream rng(8);
    std::vector<std::uint64_t> plain(3, 0), flipped(3, 0);
    for (int i = 0; i < 20000; ++i) {
        ++plain[holonomy_element(g3, z3, sample_gamma_tree_connection(g3, z3, t, gamma, rng), abc.skeleton)];
        ++flipped[holonomy_element(g3, z3, sample_gamma_tree_connection(g3, z3, t, gamma, rng, {false, true, false}),
                                   abc.skeleton)];
    }
    std::vector<double> probs;
    for (auto c : plain)
        probs.push_back(static_cast<double>(c) / 20000.0);
    EXPECT_GT(chi_square(flipped, probs).p_value, 1e-4);
}

TEST(NuPhiWeight, Examples)
{
    auto g3 = fixtures::g3();
    auto z2 = FiniteGroup::cyclic(2);
    auto gamma = uniform_distribution(z2);
    auto t = RootedSpanningTree::from_parents(g3, {3, 0, 1});
    auto trivial = ConnectionRep(g3, z2);
    auto ens = empty_ensemble(g3);
    ens.loops.push_back({{0, 1, 2}, {1, 1, 1}});
    ClassFunction ones(2, 1.0);
    EXPECT_DOUBLE_EQ(nu_phi_weight(g3, z2, t, trivial, ens, ones, gamma), 0.25 / 16.0);
    auto ind = identity_indicator(z2);
    EXPECT_DOUBLE_EQ(nu_phi_weight(g3, z2, t, trivial, ens, ind, gamma), 0.25 / 16.0);
    EXPECT_EQ(nu_phi_weight(g3, z2, t, flip_ab(g3, z2), ens, ind, gamma), 0.0);
    EXPECT_THROW(nu_phi_weight(g3, z2, t, trivial, ens, {0.5, 1.0}, gamma), DomainError);
}
