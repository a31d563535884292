#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "graph.hpp"

namespace loopsoup
{

/// Continuous-time loop: a cyclic vertex sequence with one holding time per visit.
struct Loop
{
    std::vector<VertexIndex> skeleton;
    std::vector<double> holding;

    std::size_t size() const noexcept { return skeleton.size(); }

    bool operator==(const Loop&) const = default;
};

/// Poissonian loop ensemble. One-point loops are kept only through their
/// aggregated occupation per vertex.
struct LoopEnsemble
{
    std::vector<Loop> loops;
    std::vector<double> trivial_time;

    bool operator==(const LoopEnsemble&) const = default;
};

inline LoopEnsemble empty_ensemble(const WeightedGraph& g)
{
    return {{}, std::vector<double>(g.num_vertices(), 0.0)};
}

inline void validate_loop(const WeightedGraph& g, const Loop& l)
{
    const std::size_t k = l.skeleton.size();
    if (k < 2)
        throw DomainError("loop skeleton needs at least two vertices");
    if (l.holding.size() != k)
        throw DomainError("loop needs one holding time per visit");
    for (std::size_t i = 0; i < k; ++i) {
        if (!(l.holding[i] > 0.0))
            throw DomainError("loop holding times must be positive");
        if (!g.find_edge(l.skeleton[i], l.skeleton[(i + 1) % k]))
            throw DomainError("loop steps along a non-edge");
    }
}

inline void validate_ensemble(const WeightedGraph& g, const LoopEnsemble& ens)
{
    if (ens.trivial_time.size() != g.num_vertices())
        throw DomainError("trivial time must be defined on every vertex");
    for (double t : ens.trivial_time)
        if (!(t >= 0.0))
            throw DomainError("trivial time must be non-negative");
    for (const auto& l : ens.loops)
        validate_loop(g, l);
}

/// Lexicographically minimal rotation of (skeleton, holding) pairs.
inline Loop canonical(const Loop& l)
{
    const std::size_t k = l.size();
    std::size_t best = 0;
    for (std::size_t s = 1; s < k; ++s) {
        for (std::size_t i = 0; i < k; ++i) {
            auto a = std::pair(l.skeleton[(s + i) % k], l.holding[(s + i) % k]);
            auto b = std::pair(l.skeleton[(best + i) % k], l.holding[(best + i) % k]);
            if (a != b) {
                if (a < b)
                    best = s;
                break;
            }
        }
    }
    Loop out;
    for (std::size_t i = 0; i < k; ++i) {
        out.skeleton.push_back(l.skeleton[(best + i) % k]);
        out.holding.push_back(l.holding[(best + i) % k]);
    }
    return out;
}

inline bool same_loop(const Loop& a, const Loop& b) { return canonical(a) == canonical(b); }

/// Crossing counts of every oriented edge, laid out like OrientedEdgeFunction.
inline std::vector<std::uint64_t> directed_crossing_counts(const WeightedGraph& g,
                                                           const LoopEnsemble& ens)
{
    std::vector<std::uint64_t> counts(2 * g.num_edges(), 0);
    for (const auto& l : ens.loops) {
        const std::size_t k = l.size();
        for (std::size_t i = 0; i < k; ++i) {
            VertexIndex x = l.skeleton[i];
            VertexIndex y = l.skeleton[(i + 1) % k];
            EdgeIndex e = g.edge_index(x, y);
            ++counts[2 * e + (g.edge(e).u != x)];
        }
    }
    return counts;
}

/// N_e per unoriented conductance edge.
inline std::vector<std::uint64_t> crossing_counts(const WeightedGraph& g, const LoopEnsemble& ens)
{
    auto directed = directed_crossing_counts(g, ens);
    std::vector<std::uint64_t> out(g.num_edges());
    for (EdgeIndex e = 0; e < g.num_edges(); ++e)
        out[e] = directed[2 * e] + directed[2 * e + 1];
    return out;
}

inline std::uint64_t crossings_directed(const WeightedGraph& g, const LoopEnsemble& ens,
                                        VertexIndex from, VertexIndex to)
{
    EdgeIndex e = g.edge_index(from, to);
    return directed_crossing_counts(g, ens)[2 * e + (g.edge(e).u != from)];
}

inline std::uint64_t crossings(const WeightedGraph& g, const LoopEnsemble& ens, VertexIndex x,
                               VertexIndex y)
{
    return crossing_counts(g, ens)[g.edge_index(x, y)];
}

/// Total time spent at every vertex, trivial loops included.
inline std::vector<double> occupation_field(const WeightedGraph& g, const LoopEnsemble& ens)
{
    std::vector<double> occ(g.num_vertices(), 0.0);
    if (!ens.trivial_time.empty())
        occ = ens.trivial_time;
    for (const auto& l : ens.loops)
        for (std::size_t i = 0; i < l.size(); ++i)
            occ[l.skeleton[i]] += l.holding[i];
    return occ;
}

inline double occupation(const WeightedGraph& g, const LoopEnsemble& ens, VertexIndex x)
{
    if (x >= g.num_vertices())
        throw DomainError("unknown vertex index");
    return occupation_field(g, ens)[x];
}

namespace detail
{

inline Complex ipow(Complex base, std::uint64_t exponent)
{
    Complex acc = 1.0;
    while (exponent > 0) {
        if (exponent & 1U)
            acc *= base;
        base *= base;
        exponent >>= 1U;
    }
    return acc;
}

} // namespace detail

/// Off-tree crossing penalty: every crossing of a conductance edge outside
/// the tree contributes a factor beta.
struct OffTreeTilt
{
    double beta;
    const RootedSpanningTree* tree;
};

/// prod q^{N_{e^o}} * exp(-sum chi_x Lhat^x) [* prod_{e not in T} beta^{N_e}].
inline Complex tilt_weight(const WeightedGraph& g, const LoopEnsemble& ens,
                           const OrientedEdgeFunction& q, std::span<const double> chi,
                           std::optional<OffTreeTilt> off_tree = std::nullopt)
{
    detail::check_tilt(g, q);
    detail::check_vertex_function(g, chi, "chi");
    auto directed = directed_crossing_counts(g, ens);
    Complex w = 1.0;
    for (std::size_t d = 0; d < directed.size(); ++d)
        if (directed[d] > 0)
            w *= detail::ipow(q(d / 2, d % 2 == 1), directed[d]);
    auto occ = occupation_field(g, ens);
    double exponent = 0.0;
    for (std::size_t x = 0; x < occ.size(); ++x)
        exponent += chi[x] * occ[x];
    w *= std::exp(-exponent);
    if (off_tree) {
        if (!(off_tree->beta >= 0.0 && off_tree->beta <= 1.0))
            throw DomainError("off-tree beta must lie in [0, 1]");
        for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
            std::uint64_t n = directed[2 * e] + directed[2 * e + 1];
            if (n > 0 && !off_tree->tree->contains_edge(g, e))
                w *= std::pow(off_tree->beta, static_cast<double>(n));
        }
    }
    return w;
}

} // namespace loopsoup
