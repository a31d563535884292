#include "support.hpp"

using namespace loopsoup;
using loopsoup::testing::tree_index;
using loopsoup::testing::within_se;

namespace
{

constexpr double kUnitZ = 4.0;

std::vector<std::size_t> tree_sequence(const WeightedGraph& g, std::span<const InteractionState> states)
{
    auto index = tree_index(g);
    std::vector<std::size_t> seq;
    for (const auto& s : states)
        seq.push_back(index.at(s.tree.parents()));
    return seq;
}

} // namespace

TEST(InteractionChain, RunChainEmitsPostBurnin)
{
    auto g2 = fixtures::g2();
    RngStream rng(1);
    EXPECT_EQ(run_chain(g2, InteractionKind::beta, 0.5, 11, 10, rng).size(), 1u);
    auto states = run_chain(g2, InteractionKind::beta, 0.5, 20, 5, rng);
    ASSERT_EQ(states.size(), 15u);
    EXPECT_EQ(states.front().sweep, 6u);
    EXPECT_THROW(run_chain(g2, InteractionKind::beta, 0.5, 5, 5, rng), DomainError);
    EXPECT_THROW(run_chain(g2, InteractionKind::beta, 1.0, 10, 0, rng), DomainError);
    EXPECT_THROW(run_chain(g2, InteractionKind::bstar, 0.0, 10, 0, rng), DomainError);
}

TEST(InteractionChain, Deterministic)
{
    auto g3 = fixtures::g3();
    RngStream a(2), b(2);
    auto x = run_chain(g3, InteractionKind::beta, 0.5, 50, 0, a);
    auto y = run_chain(g3, InteractionKind::beta, 0.5, 50, 0, b);
    for (std::size_t k = 0; k < x.size(); ++k) {
        EXPECT_EQ(x[k].tree, y[k].tree);
        EXPECT_EQ(x[k].soup, y[k].soup);
    }
}

TEST(InteractionChain, TreeStepGivenSoup)
{
    auto g2 = fixtures::g2();
    InteractionChain chain(g2, InteractionKind::beta, 0.5);
    InteractionState s;
    s.soup = empty_ensemble(g2);
    s.soup.loops.push_back({{0, 1}, {1.0, 1.0}});
    RngStream rng(3);
    std::vector<double> in;
    for (int i = 0; i < 30000; ++i) {
        chain.tree_step(s, rng);
        in.push_back(s.tree.contains_edge(g2, 0) ? 1.0 : 0.0);
    }
    EXPECT_TRUE(within_se(mean_and_se(in), 8.0 / 9.0, kUnitZ));

    s.soup = empty_ensemble(g2);
    in.clear();
    for (int i = 0; i < 30000; ++i) {
        chain.tree_step(s, rng);
        in.push_back(s.tree.contains_edge(g2, 0) ? 1.0 : 0.0);
    }
    EXPECT_TRUE(within_se(mean_and_se(in), 2.0 / 3.0, kUnitZ));
}

TEST(InteractionChain, ConditionalTilts)
{
    auto g2 = fixtures::g2();
    auto t = RootedSpanningTree::from_parents(g2, {2, 0});
    InteractionChain bstar(g2, InteractionKind::bstar, 1.5);
    auto [scale, kill] = bstar.conditional_tilt(t);
    EXPECT_EQ(scale, (std::vector<double>{1.0}));
    EXPECT_EQ(kill, (std::vector<double>{0.0, 1.5}));
    auto star = RootedSpanningTree::from_parents(g2, {2, 2});
    InteractionChain beta(g2, InteractionKind::beta, 0.25);
    auto [s2, k2] = beta.conditional_tilt(star);
    EXPECT_EQ(s2, (std::vector<double>{0.25}));
    EXPECT_EQ(k2, (std::vector<double>{0.0, 0.0}));
}

TEST(InteractionChain, BetaStationaryLaw)
{
    auto g2 = fixtures::g2();
    RngStream rng(4);
    auto states = run_chain(g2, InteractionKind::beta, 0.5, 31000, 1000, rng);
    auto seq = tree_sequence(g2, states);
    EXPECT_GT(chi_square_chain(seq, thm1_tree_marginal(g2, 0.5)).p_value, 1e-3);

    auto one = constant_edge_function(g2, 1.0);
    auto chi0 = zero_vertex_function(g2);
    auto est = estimate_functional(g2, states, OrientedEdgeFunction(g2, 0.0), one, one, chi0);
    EXPECT_TRUE(within_se(est, 45.0 / 56.0, kUnitZ));
    auto b = constant_edge_function(g2, 0.0);
    b[0] = 1.0;
    est = estimate_functional(g2, states, OrientedEdgeFunction(g2), b, one, chi0);
    EXPECT_TRUE(within_se(est, 2.0 / 7.0, kUnitZ));
    est = estimate_functional(g2, states, OrientedEdgeFunction(g2), one, one, chi0);
    EXPECT_EQ(est.mean, 1.0);
    EXPECT_EQ(est.se, 0.0);
}

TEST(InteractionChain, BetaFunctionalGridOnG3)
{
    auto g3 = fixtures::g3();
    RngStream rng(5);
    const double beta = 0.4;
    auto states = run_chain(g3, InteractionKind::beta, beta, 21000, 1000, rng);
    OrientedEdgeFunction q(g3);
    q.set(g3, 0, 1, 0.7);
    q.set(g3, 1, 0, 0.3);
    std::vector<double> chi{0.3, 0.0, 0.1};
    auto b = constant_edge_function(g3, 0.6);
    auto c = constant_edge_function(g3, 1.0);
    auto est = estimate_functional(g3, states, q, b, c, chi);
    EXPECT_TRUE(within_se(est, thm1_expectation(g3, beta, b, c, q, chi).real(), kUnitZ));
}

TEST(InteractionChain, BstarStationaryLaw)
{
    auto g2 = fixtures::g2();
    RngStream rng(6);
    auto states = run_chain(g2, InteractionKind::bstar, 1.0, 31000, 1000, rng);
    EXPECT_GT(chi_square_chain(tree_sequence(g2, states), bstar_tree_marginal(g2, 1.0)).p_value, 1e-3);
}

TEST(InteractionChain, BstarOnG1IsUntilted)
{
    auto g1 = fixtures::g1();
    RngStream rng(7);
    std::vector<double> t;
    run_chain(g1, InteractionKind::bstar, 2.0, 20001, 1, rng,
              [&](const InteractionState& s) { t.push_back(s.soup.trivial_time[0]); });
    EXPECT_TRUE(within_se(batch_means(t), 1.0, kUnitZ));
}

TEST(OffTree, Diagnostics)
{
    auto g3 = fixtures::g3();
    InteractionState s;
    s.tree = RootedSpanningTree::from_parents(g3, {3, 0, 1});
    s.soup = empty_ensemble(g3);
    s.soup.loops.push_back({{0, 1}, {1, 1}});
    std::vector<InteractionState> one{s};
    EXPECT_EQ(offtree_crossing_diagnostic(g3, one).crossings.mean, 0.0);
    EXPECT_EQ(offtree_crossing_diagnostic(g3, one).contractible_rate, 1.0);
    one[0].soup.loops = {{{0, 1, 2}, {1, 1, 1}}};
    EXPECT_GE(offtree_crossing_diagnostic(g3, one).crossings.mean, 1.0);
    EXPECT_THROW(offtree_crossing_diagnostic(g3, std::vector<InteractionState>{}), DomainError);

    RngStream rng(8);
    auto low = offtree_crossing_diagnostic(g3, run_chain(g3, InteractionKind::beta, 0.05, 6000, 1000, rng));
    auto high = offtree_crossing_diagnostic(g3, run_chain(g3, InteractionKind::beta, 0.9, 6000, 1000, rng));
    EXPECT_LT(low.crossings.mean + 3.0 * std::hypot(low.crossings.se, high.crossings.se), high.crossings.mean);
}

TEST(InteractionChain, NearOneIndependence)
{
    auto g2 = fixtures::g2();
    RngStream rng(9);
    auto states = run_chain(g2, InteractionKind::beta, 0.999, 21000, 1000, rng);
    std::vector<double> a, n;
    for (const auto& s : states) {
        a.push_back(s.tree.contains_edge(g2, 0) ? 1.0 : 0.0);
        n.push_back(static_cast<double>(crossings(g2, s.soup, 0, 1)));
    }
    double ma = mean_and_se(a).mean, mn = mean_and_se(n).mean;
    std::vector<double> cov;
    for (std::size_t k = 0; k < a.size(); ++k)
        cov.push_back((a[k] - ma) * (n[k] - mn));
    EXPECT_TRUE(within_se(batch_means(cov), 0.0, kUnitZ));
}

TEST(InteractionChain, TreeStepWithExtremeWeights)
{
    auto g3 = fixtures::g3();
    InteractionChain chain(g3, InteractionKind::beta, 0.5);
    InteractionState s;
    s.soup = empty_ensemble(g3);
    std::vector<VertexIndex> skeleton;
    for (int k = 0; k < 15; ++k) {
        skeleton.push_back(0);
        skeleton.push_back(1);
    }
    s.soup.loops.push_back({skeleton, std::vector<double>(skeleton.size(), 0.1)});
    // Weight 2^30 on ab: trees containing ab carry all but ~1e-9 of the mass.
    RngStream rng(10);
    std::vector<std::uint64_t> other(3, 0);
    for (int i = 0; i < 2000; ++i) {
        chain.tree_step(s, rng);
        ASSERT_TRUE(s.tree.contains_edge(g3, 0));
        other[s.tree.contains_edge(g3, 1) ? 0 : s.tree.contains_edge(g3, 2) ? 1 : 2] += 1;
    }
    // Given ab, the 8 trees are 3 with bc, 3 with ca, 2 with neither, all equally weighted.
    EXPECT_GT(chi_square(other, std::vector<double>{3.0 / 8, 3.0 / 8, 2.0 / 8}).p_value, 1e-3);
}
