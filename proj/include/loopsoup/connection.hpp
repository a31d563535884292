#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "graph.hpp"
#include "group.hpp"
#include "loop.hpp"
#include "rng.hpp"

namespace loopsoup
{

/// Representative of an M-connection: one group element per augmented edge.
///
/// Conductance edge e stores m_{(u,v)} for its stored orientation u -> v;
/// the reverse orientation is the inverse, so inverse symmetry holds by
/// construction. Killing edge of x stores m_{(x, root)}. Gauge maps fix the
/// root at the identity.
class ConnectionRep
{
  public:
    ConnectionRep() = default;

    /// Trivial connection.
    ConnectionRep(const WeightedGraph& g, const FiniteGroup& grp)
        : values_(g.num_augmented_edges(), grp.identity()), num_edges_(g.num_edges())
    {
    }

    Element augmented(EdgeIndex a) const { return values_.at(a); }
    void set_augmented(EdgeIndex a, Element v) { values_.at(a) = v; }

    /// m on conductance edge e in its stored orientation.
    Element forward(EdgeIndex e) const { return values_.at(e); }

    Element value(const WeightedGraph& g, const FiniteGroup& grp, VertexIndex from,
                  VertexIndex to) const
    {
        if (to == g.root())
            return values_.at(g.killing_edge(from));
        if (from == g.root())
            return grp.inverse(values_.at(g.killing_edge(to)));
        EdgeIndex e = g.edge_index(from, to);
        return g.edge(e).u == from ? values_[e] : grp.inverse(values_[e]);
    }

    void set(const WeightedGraph& g, const FiniteGroup& grp, VertexIndex from, VertexIndex to,
             Element v)
    {
        if (to == g.root()) {
            values_.at(g.killing_edge(from)) = v;
            return;
        }
        if (from == g.root()) {
            values_.at(g.killing_edge(to)) = grp.inverse(v);
            return;
        }
        EdgeIndex e = g.edge_index(from, to);
        values_[e] = g.edge(e).u == from ? v : grp.inverse(v);
    }

    const std::vector<Element>& values() const noexcept { return values_; }
    std::size_t num_edges() const noexcept { return num_edges_; }

    bool is_trivial(const FiniteGroup& grp) const
    {
        return std::all_of(values_.begin(), values_.end(),
                           [&](Element v) { return v == grp.identity(); });
    }

    auto operator<=>(const ConnectionRep&) const = default;

  private:
    std::vector<Element> values_;
    std::size_t num_edges_ = 0;
};

namespace detail
{

inline void check_connection(const WeightedGraph& g, const FiniteGroup& grp, const ConnectionRep& m)
{
    if (m.values().size() != g.num_augmented_edges() || m.num_edges() != g.num_edges())
        throw DomainError("connection does not belong to this graph");
    for (Element v : m.values())
        if (v >= grp.order())
            throw DomainError("connection value outside the group");
}

} // namespace detail

/// m'_{(x,y)} = h_x m_{(x,y)} h_y^{-1}, with h = identity at the root.
inline ConnectionRep gauge_transform(const WeightedGraph& g, const FiniteGroup& grp,
                                     const ConnectionRep& m, const std::vector<Element>& h)
{
    detail::check_connection(g, grp, m);
    if (h.size() != g.num_vertices())
        throw DomainError("gauge map must be defined on every vertex");
    ConnectionRep out = m;
    for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edge(e);
        out.set_augmented(e, grp.mul(grp.mul(h[ed.u], m.forward(e)), grp.inverse(h[ed.v])));
    }
    for (VertexIndex x = 0; x < g.num_vertices(); ++x) {
        EdgeIndex a = g.killing_edge(x);
        out.set_augmented(a, grp.mul(h[x], m.augmented(a)));
    }
    return out;
}

/// Ordered product of m along the skeleton, starting at skeleton[0].
inline Element holonomy_element(const WeightedGraph& g, const FiniteGroup& grp,
                                const ConnectionRep& m, std::span<const VertexIndex> cycle)
{
    Element acc = grp.identity();
    const std::size_t k = cycle.size();
    for (std::size_t i = 0; i < k; ++i)
        acc = grp.mul(acc, m.value(g, grp, cycle[i], cycle[(i + 1) % k]));
    return acc;
}

struct ConjClass
{
    std::size_t index;

    auto operator<=>(const ConjClass&) const = default;
};

/// Conjugacy class of the holonomy around the loop.
inline ConjClass holonomy(const WeightedGraph& g, const FiniteGroup& grp, const ConnectionRep& m,
                          const Loop& l)
{
    return {grp.class_of(holonomy_element(g, grp, m, l.skeleton))};
}

/// Cyclically reduced vertex word of the loop's skeleton: backtracks
/// x -> y -> x are removed until none remain, including across the base point.
/// Empty result iff the loop is contractible.
inline std::vector<VertexIndex> geodesic_reduce(std::span<const VertexIndex> skeleton)
{
    if (skeleton.empty())
        return {};
    std::vector<VertexIndex> path{skeleton[0]};
    auto push = [&](VertexIndex v) {
        if (path.size() >= 2 && path[path.size() - 2] == v)
            path.pop_back();
        else
            path.push_back(v);
    };
    for (std::size_t i = 1; i < skeleton.size(); ++i)
        push(skeleton[i]);
    push(skeleton[0]);
    // path is a closed walk from path.front() back to path.back().
    std::size_t lo = 0;
    std::size_t hi = path.size() - 1;
    while (hi - lo >= 2 && path[lo + 1] == path[hi - 1]) {
        ++lo;
        --hi;
    }
    if (hi == lo)
        return {};
    return {path.begin() + static_cast<std::ptrdiff_t>(lo), path.begin() + static_cast<std::ptrdiff_t>(hi)};
}

inline std::vector<VertexIndex> geodesic_reduce(const Loop& l) { return geodesic_reduce(l.skeleton); }

struct GaugeReduction
{
    ConnectionRep reduced;
    std::vector<Element> gauge;
};

/// Gauge to the T-reduced representative: h propagates from the root along
/// the tree so that every tree edge carries the identity.
inline GaugeReduction t_reduce_with_gauge(const WeightedGraph& g, const FiniteGroup& grp,
                                          const ConnectionRep& m, const RootedSpanningTree& t)
{
    detail::check_connection(g, grp, m);
    const std::size_t n = g.num_vertices();
    if (t.size() != n)
        throw DomainError("tree does not belong to this graph");
    std::vector<std::vector<VertexIndex>> children(n + 1);
    for (VertexIndex x = 0; x < n; ++x)
        children[t.parent(x)].push_back(x);
    std::vector<Element> h(n + 1, grp.identity());
    std::vector<VertexIndex> stack{g.root()};
    while (!stack.empty()) {
        VertexIndex p = stack.back();
        stack.pop_back();
        for (VertexIndex x : children[p]) {
            // Want h_x m_{(x,p)} h_p^{-1} = identity.
            h[x] = grp.mul(h[p], grp.inverse(m.value(g, grp, x, p)));
            stack.push_back(x);
        }
    }
    h.pop_back();
    return {gauge_transform(g, grp, m, h), h};
}

inline ConnectionRep t_reduce(const WeightedGraph& g, const FiniteGroup& grp,
                              const ConnectionRep& m, const RootedSpanningTree& t)
{
    return t_reduce_with_gauge(g, grp, m, t).reduced;
}

/// Breadth-first spanning tree of the augmented graph from the root, in vertex order.
inline RootedSpanningTree reference_tree(const WeightedGraph& g)
{
    const std::size_t n = g.num_vertices();
    std::vector<VertexIndex> parent(n, g.root());
    std::vector<bool> seen(n, false);
    std::vector<VertexIndex> queue;
    for (VertexIndex x = 0; x < n; ++x)
        if (g.killing()[x] > 0.0) {
            seen[x] = true;
            queue.push_back(x);
        }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        VertexIndex x = queue[head];
        for (const auto& nb : g.neighbors(x))
            if (!seen[nb.vertex]) {
                seen[nb.vertex] = true;
                parent[nb.vertex] = x;
                queue.push_back(nb.vertex);
            }
    }
    return RootedSpanningTree::from_parents(g, std::move(parent));
}

/// Canonical key of the gauge class: reduce along reference_tree, then take
/// the lexicographically smallest image under global conjugation.
inline std::vector<Element> gauge_class_key(const WeightedGraph& g, const FiniteGroup& grp,
                                            const ConnectionRep& m)
{
    auto reduced = t_reduce(g, grp, m, reference_tree(g)).values();
    std::vector<Element> best;
    std::vector<Element> candidate(reduced.size());
    for (Element c = 0; c < grp.order(); ++c) {
        for (std::size_t a = 0; a < reduced.size(); ++a)
            candidate[a] = grp.mul(grp.mul(c, reduced[a]), grp.inverse(c));
        if (best.empty() || candidate < best)
            best = candidate;
    }
    return best;
}

inline bool gauge_equivalent(const WeightedGraph& g, const FiniteGroup& grp, const ConnectionRep& a,
                             const ConnectionRep& b)
{
    return gauge_class_key(g, grp, a) == gauge_class_key(g, grp, b);
}

/// Z/2 connection from a percolation configuration: open edges carry the flip.
inline ConnectionRep percolation_to_connection(const WeightedGraph& g, const FiniteGroup& z2,
                                               const std::vector<bool>& open)
{
    if (z2.order() != 2)
        throw DomainError("percolation configurations correspond to Z/2 connections");
    if (open.size() != g.num_edges())
        throw DomainError("percolation configuration must cover every edge");
    ConnectionRep m(g, z2);
    Element flip = 1 - z2.identity();
    for (EdgeIndex e = 0; e < g.num_edges(); ++e)
        if (open[e])
            m.set_augmented(e, flip);
    return m;
}

inline std::vector<bool> connection_to_percolation(const WeightedGraph& g, const FiniteGroup& z2,
                                                   const ConnectionRep& m)
{
    if (z2.order() != 2)
        throw DomainError("percolation configurations correspond to Z/2 connections");
    detail::check_connection(g, z2, m);
    std::vector<bool> open(g.num_edges());
    for (EdgeIndex e = 0; e < g.num_edges(); ++e)
        open[e] = m.forward(e) != z2.identity();
    return open;
}

/// Covering graph on X x M: (x,i) ~ (y,j) iff i = m_{(x,y)} j, with the
/// conductance of {x,y}; killing lifts to every fiber point. Cover vertex
/// (x,i) has index x * |M| + i and name "x#i".
inline WeightedGraph build_cover(const WeightedGraph& g, const FiniteGroup& grp,
                                 const ConnectionRep& m)
{
    detail::check_connection(g, grp, m);
    const std::size_t order = grp.order();
    GraphSpec spec;
    for (VertexIndex x = 0; x < g.num_vertices(); ++x)
        for (Element i = 0; i < order; ++i)
            spec.vertices.push_back(g.name(x) + "#" + std::to_string(i));
    for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edge(e);
        for (Element j = 0; j < order; ++j) {
            Element i = grp.mul(m.forward(e), j);
            spec.edges.push_back({spec.vertices[ed.u * order + i], spec.vertices[ed.v * order + j],
                                  ed.conductance});
        }
    }
    for (VertexIndex x = 0; x < g.num_vertices(); ++x)
        if (g.killing()[x] > 0.0)
            for (Element i = 0; i < order; ++i)
                spec.killing[spec.vertices[x * order + i]] = g.killing()[x];
    return build_graph(spec);
}

/// Forget fiber coordinates: (x,i) -> x; trivial time is summed over fibers.
inline LoopEnsemble project_cover_soup(const WeightedGraph& g, const FiniteGroup& grp,
                                       const LoopEnsemble& cover_ensemble)
{
    const std::size_t order = grp.order();
    LoopEnsemble out = empty_ensemble(g);
    for (const auto& l : cover_ensemble.loops) {
        Loop p;
        p.holding = l.holding;
        for (VertexIndex c : l.skeleton)
            p.skeleton.push_back(c / order);
        out.loops.push_back(std::move(p));
    }
    for (std::size_t c = 0; c < cover_ensemble.trivial_time.size(); ++c)
        out.trivial_time.at(c / order) += cover_ensemble.trivial_time[c];
    return out;
}

/// Lift every loop from a uniform starting fiber point; split each trivial
/// time uniformly (Dirichlet(1,...,1)) over the fiber.
inline LoopEnsemble lift_trivial_loops(const WeightedGraph& g, const FiniteGroup& grp,
                                       const ConnectionRep& m, const LoopEnsemble& ens,
                                       RngStream& rng)
{
    detail::check_connection(g, grp, m);
    const std::size_t order = grp.order();
    LoopEnsemble out;
    for (std::size_t idx = 0; idx < ens.loops.size(); ++idx) {
        const auto& l = ens.loops[idx];
        if (holonomy_element(g, grp, m, l.skeleton) != grp.identity()) {
            std::string names;
            for (VertexIndex x : l.skeleton)
                names += (names.empty() ? "" : ",") + g.name(x);
            throw DomainError("loop #" + std::to_string(idx) + " (" + names +
                              ") has nontrivial holonomy and cannot be lifted");
        }
        Element fiber = static_cast<Element>(rng.next_u64() % order);
        Loop lifted;
        lifted.holding = l.holding;
        const std::size_t k = l.size();
        for (std::size_t i = 0; i < k; ++i) {
            lifted.skeleton.push_back(l.skeleton[i] * order + fiber);
            // (x,i) ~ (y,j) with i = m_{(x,y)} j.
            fiber = grp.mul(grp.inverse(m.value(g, grp, l.skeleton[i], l.skeleton[(i + 1) % k])),
                            fiber);
        }
        out.loops.push_back(std::move(lifted));
    }
    out.trivial_time.assign(g.num_vertices() * order, 0.0);
    std::vector<double> cuts(order - 1);
    for (VertexIndex x = 0; x < ens.trivial_time.size(); ++x) {
        for (auto& c : cuts)
            c = rng.uniform();
        std::sort(cuts.begin(), cuts.end());
        double prev = 0.0;
        for (Element i = 0; i < order; ++i) {
            double next = i + 1 < order ? cuts[i] : 1.0;
            out.trivial_time[x * order + i] = ens.trivial_time[x] * (next - prev);
            prev = next;
        }
    }
    return out;
}

/// Conductance edges of the tree in canonical orientation (child -> parent),
/// listed by child vertex.
inline std::vector<std::pair<VertexIndex, VertexIndex>> tree_conductance_edges(
    const WeightedGraph& g, const RootedSpanningTree& t)
{
    std::vector<std::pair<VertexIndex, VertexIndex>> out;
    for (VertexIndex x = 0; x < t.size(); ++x)
        if (t.parent(x) != g.root())
            out.emplace_back(x, t.parent(x));
    return out;
}

/// gamma-i.i.d. elements on the tree's conductance edges (identity elsewhere).
/// reversed[x] assigns the draw to the orientation parent -> x instead.
inline ConnectionRep sample_gamma_tree_connection(const WeightedGraph& g, const FiniteGroup& grp,
                                                  const RootedSpanningTree& t,
                                                  const GroupDistribution& gamma, RngStream& rng,
                                                  const std::vector<bool>& reversed = {})
{
    check_symmetric_distribution(grp, gamma);
    std::vector<double> cumulative(gamma.size());
    std::partial_sum(gamma.begin(), gamma.end(), cumulative.begin());
    ConnectionRep m(g, grp);
    for (auto [x, p] : tree_conductance_edges(g, t)) {
        Element v = rng.discrete(cumulative);
        if (!reversed.empty() && reversed.at(x))
            m.set(g, grp, p, x, v);
        else
            m.set(g, grp, x, p, v);
    }
    return m;
}

inline constexpr std::uint64_t kAssignmentGuard = 1'000'000;

/// Every assignment of group elements to the tree's conductance edges (in
/// canonical orientation) with its gamma-probability; zero-probability
/// assignments are skipped.
struct TreeAssignment
{
    ConnectionRep connection;
    double probability;
};

inline std::vector<TreeAssignment> enumerate_tree_assignments(const WeightedGraph& g,
                                                              const FiniteGroup& grp,
                                                              const RootedSpanningTree& t,
                                                              const GroupDistribution& gamma)
{
    check_symmetric_distribution(grp, gamma);
    auto edges = tree_conductance_edges(g, t);
    double count = std::pow(static_cast<double>(grp.order()), static_cast<double>(edges.size()));
    if (count > static_cast<double>(kAssignmentGuard))
        throw GuardExceeded("too many tree assignments to enumerate: |M|^" +
                            std::to_string(edges.size()));
    std::vector<TreeAssignment> out;
    std::vector<Element> digits(edges.size(), 0);
    while (true) {
        double p = 1.0;
        for (Element d : digits)
            p *= gamma[d];
        if (p > 0.0) {
            ConnectionRep m(g, grp);
            for (std::size_t k = 0; k < edges.size(); ++k)
                m.set(g, grp, edges[k].first, edges[k].second, digits[k]);
            out.push_back({std::move(m), p});
        }
        std::size_t k = 0;
        while (k < digits.size() && ++digits[k] == grp.order())
            digits[k++] = 0;
        if (k == digits.size())
            break;
    }
    return out;
}

/// gamma^T of the gauge class of m.
inline double gamma_tree_class_probability(const WeightedGraph& g, const FiniteGroup& grp,
                                           const RootedSpanningTree& t,
                                           const GroupDistribution& gamma, const ConnectionRep& m)
{
    auto key = gauge_class_key(g, grp, m);
    double total = 0.0;
    for (const auto& a : enumerate_tree_assignments(g, grp, t, gamma))
        if (gauge_class_key(g, grp, a.connection) == key)
            total += a.probability;
    return total;
}

/// Class function on the group, one value per conjugacy class.
using ClassFunction = std::vector<double>;

inline ClassFunction identity_indicator(const FiniteGroup& grp)
{
    ClassFunction phi(grp.num_classes(), 0.0);
    phi[grp.identity_class()] = 1.0;
    return phi;
}

/// Unnormalized density of (T, A, L) under nu_Phi:
/// prod_{l in L} Phi(H_A(l)) * gamma^T(A) * P_T(T). One-point loops are not
/// part of L and contribute Phi(identity) = 1.
inline double nu_phi_weight(const WeightedGraph& g, const FiniteGroup& grp,
                            const RootedSpanningTree& t, const ConnectionRep& m,
                            const LoopEnsemble& ens, const ClassFunction& phi,
                            const GroupDistribution& gamma)
{
    if (phi.size() != grp.num_classes())
        throw DomainError("class function must have one value per conjugacy class");
    for (double v : phi)
        if (!(v >= 0.0))
            throw DomainError("class function must be non-negative");
    if (std::abs(phi[grp.identity_class()] - 1.0) > 1e-12)
        throw DomainError("class function must equal 1 at the identity");
    double w = 1.0;
    for (const auto& l : ens.loops) {
        w *= phi[holonomy(g, grp, m, l).index];
        if (w == 0.0)
            return 0.0;
    }
    return w * gamma_tree_class_probability(g, grp, t, gamma, m) * tree_probability(g, t);
}

} // namespace loopsoup
