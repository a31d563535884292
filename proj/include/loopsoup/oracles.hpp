#pragma once

#include <cmath>
#include <string_view>
#include <vector>

#include "connection.hpp"
#include "graph.hpp"
#include "group.hpp"

namespace loopsoup
{

enum class OracleMethod
{
    eq1,
    eq3,
    thm1_Z,
    thm1_E,
    bstar_Z,
    eq4
};

inline std::string_view method_name(OracleMethod m)
{
    switch (m) {
    case OracleMethod::eq1: return "eq1";
    case OracleMethod::eq3: return "eq3";
    case OracleMethod::thm1_Z: return "thm1_Z";
    case OracleMethod::thm1_E: return "thm1_E";
    case OracleMethod::bstar_Z: return "bstar_Z";
    case OracleMethod::eq4: return "eq4";
    }
    return "?";
}

/// Exact value of an expectation, tagged with the closed form that produced it.
struct OracleValue
{
    Complex value;
    OracleMethod method;

    double real() const { return value.real(); }
};

/// Function on augmented edges (conductance edges, then killing edges).
using AugmentedEdgeFunction = std::vector<double>;

inline AugmentedEdgeFunction constant_edge_function(const WeightedGraph& g, double v)
{
    return AugmentedEdgeFunction(g.num_augmented_edges(), v);
}

namespace detail
{

inline Complex det_ratio(const WeightedGraph& g, std::span<const double> chi,
                         const OrientedEdgeFunction& q)
{
    Complex log_ratio = log_det(g.energy_matrix()) - log_det_energy(g, chi, q);
    return std::exp(log_ratio);
}

inline void check_beta(double beta)
{
    if (!(beta > 0.0 && beta < 1.0))
        throw DomainError("beta must lie in the open interval (0, 1)");
}

inline void check_edge_function(const WeightedGraph& g, const AugmentedEdgeFunction& f,
                                const char* what)
{
    if (f.size() != g.num_augmented_edges())
        throw DomainError(std::string(what) + " must be defined on every augmented edge");
}

/// Tilt equal to q on tree edges and off_tree_scale * q elsewhere.
inline OrientedEdgeFunction tree_tilt(const WeightedGraph& g, const RootedSpanningTree& t,
                                      const OrientedEdgeFunction& q, double off_tree_scale)
{
    OrientedEdgeFunction out = q;
    for (EdgeIndex e = 0; e < g.num_edges(); ++e)
        if (!t.contains_edge(g, e)) {
            out.at(e, false) *= off_tree_scale;
            out.at(e, true) *= off_tree_scale;
        }
    return out;
}

/// det ratio of the beta-tilted soup given the tree, without beta range checks
/// (used for the beta -> 1 series helper).
inline double thm1_partition_unchecked(const WeightedGraph& g, double beta)
{
    OrientedEdgeFunction one(g);
    VertexFunction chi = zero_vertex_function(g);
    const double total = std::exp(log_det(g.energy_matrix()).real());
    double z = 0.0;
    for (const auto& wt : enumerate_rooted_trees(g))
        z += wt.weight / total * det_ratio(g, chi, tree_tilt(g, wt.tree, one, beta)).real();
    return z;
}

} // namespace detail

/// det(M_lambda - C) / det(M_{lambda+chi} - C o q).
inline OracleValue expectation_identity(const WeightedGraph& g, const OrientedEdgeFunction& q,
                                        std::span<const double> chi)
{
    detail::check_tilt(g, q);
    detail::check_vertex_function(g, chi, "chi");
    return {detail::det_ratio(g, chi, q), OracleMethod::eq1};
}

/// E[prod_e (b_e 1{e not in T} + c_e 1{e in T})] by enumerating trees. Only
/// existing augmented edges take part.
inline OracleValue fermionic_pairing(const WeightedGraph& g, const AugmentedEdgeFunction& b,
                                     const AugmentedEdgeFunction& c)
{
    detail::check_edge_function(g, b, "b");
    detail::check_edge_function(g, c, "c");
    const double total = std::exp(detail::log_det(g.energy_matrix()).real());
    double acc = 0.0;
    for (const auto& wt : enumerate_rooted_trees(g)) {
        double f = wt.weight / total;
        for (EdgeIndex a = 0; a < g.num_augmented_edges(); ++a)
            if (g.has_augmented_edge(a))
                f *= wt.tree.contains_augmented(g, a) ? c[a] : b[a];
        acc += f;
    }
    return {acc, OracleMethod::eq3};
}

/// Partition function of the tree/loop interaction with off-tree crossing
/// penalty beta.
inline OracleValue thm1_partition(const WeightedGraph& g, double beta)
{
    detail::check_beta(beta);
    return {detail::thm1_partition_unchecked(g, beta), OracleMethod::thm1_Z};
}

/// Normalized expectation of prod q^{N_{e^o}} (b or c by tree membership)
/// exp(-chi . Lhat) under the beta interaction.
inline OracleValue thm1_expectation(const WeightedGraph& g, double beta,
                                    const AugmentedEdgeFunction& b,
                                    const AugmentedEdgeFunction& c, const OrientedEdgeFunction& q,
                                    std::span<const double> chi)
{
    detail::check_beta(beta);
    detail::check_edge_function(g, b, "b");
    detail::check_edge_function(g, c, "c");
    detail::check_tilt(g, q);
    detail::check_vertex_function(g, chi, "chi");
    const double total = std::exp(detail::log_det(g.energy_matrix()).real());
    const double z = detail::thm1_partition_unchecked(g, beta);
    Complex acc = 0.0;
    for (const auto& wt : enumerate_rooted_trees(g)) {
        double f = wt.weight / total;
        for (EdgeIndex a = 0; a < g.num_augmented_edges(); ++a)
            if (g.has_augmented_edge(a))
                f *= wt.tree.contains_augmented(g, a) ? c[a] : b[a];
        if (f == 0.0)
            continue;
        acc += f * detail::det_ratio(g, chi, detail::tree_tilt(g, wt.tree, q, beta));
    }
    return {acc / z, OracleMethod::thm1_E};
}

/// Tree marginal of the beta interaction, aligned with enumerate_rooted_trees(g).
inline std::vector<double> thm1_tree_marginal(const WeightedGraph& g, double beta)
{
    detail::check_beta(beta);
    OrientedEdgeFunction one(g);
    VertexFunction chi = zero_vertex_function(g);
    std::vector<double> p;
    double z = 0.0;
    for (const auto& wt : enumerate_rooted_trees(g)) {
        p.push_back(wt.weight * detail::det_ratio(g, chi, detail::tree_tilt(g, wt.tree, one, beta)).real());
        z += p.back();
    }
    for (auto& v : p)
        v /= z;
    return p;
}

/// Taylor coefficients of Z(beta) in powers of (1 - beta), by backward finite
/// differences at beta = 1 with step h.
inline std::vector<double> thm1_partition_series(const WeightedGraph& g, std::size_t order,
                                                 double h = 1e-2)
{
    if (!(h > 0.0 && h * static_cast<double>(order) < 1.0))
        throw DomainError("finite-difference step must keep the grid inside (0, 1]");
    std::vector<double> coeffs;
    double factorial = 1.0;
    for (std::size_t k = 0; k <= order; ++k) {
        if (k > 0)
            factorial *= static_cast<double>(k);
        // k-th forward difference in s = 1 - beta.
        double diff = 0.0;
        double binom = 1.0;
        for (std::size_t j = 0; j <= k; ++j) {
            double sign = (k - j) % 2 == 0 ? 1.0 : -1.0;
            diff += sign * binom * detail::thm1_partition_unchecked(g, 1.0 - h * static_cast<double>(j));
            binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
        }
        coeffs.push_back(diff / std::pow(h, static_cast<double>(k)) / factorial);
    }
    return coeffs;
}

/// chi_T(x) = b on vertices not attached to the root by the tree.
inline VertexFunction bstar_killing(const WeightedGraph& g, const RootedSpanningTree& t, double b)
{
    VertexFunction chi(g.num_vertices(), 0.0);
    for (VertexIndex x = 0; x < g.num_vertices(); ++x)
        if (!t.attached_to_root(x))
            chi[x] = b;
    return chi;
}

/// Partition function of the tree/occupation interaction with parameter b.
inline OracleValue bstar_partition(const WeightedGraph& g, double b)
{
    if (!(b > 0.0) || !std::isfinite(b))
        throw DomainError("b must be positive");
    OrientedEdgeFunction one(g);
    const double total = std::exp(detail::log_det(g.energy_matrix()).real());
    double z = 0.0;
    for (const auto& wt : enumerate_rooted_trees(g))
        z += wt.weight / total * detail::det_ratio(g, bstar_killing(g, wt.tree, b), one).real();
    return {z, OracleMethod::bstar_Z};
}

/// Normalized expectation of prod q^{N_{e^o}} exp(-chi . Lhat) under the b*
/// interaction.
inline OracleValue bstar_expectation(const WeightedGraph& g, double b, const OrientedEdgeFunction& q,
                                     std::span<const double> chi)
{
    if (!(b > 0.0) || !std::isfinite(b))
        throw DomainError("b must be positive");
    detail::check_tilt(g, q);
    detail::check_vertex_function(g, chi, "chi");
    const double z = bstar_partition(g, b).real();
    const double total = std::exp(detail::log_det(g.energy_matrix()).real());
    Complex acc = 0.0;
    for (const auto& wt : enumerate_rooted_trees(g)) {
        auto kill = bstar_killing(g, wt.tree, b);
        for (std::size_t x = 0; x < kill.size(); ++x)
            kill[x] += chi[x];
        acc += wt.weight / total * detail::det_ratio(g, kill, q);
    }
    return {acc / z, OracleMethod::bstar_Z};
}

/// Tree marginal of the b* interaction, aligned with enumerate_rooted_trees(g).
inline std::vector<double> bstar_tree_marginal(const WeightedGraph& g, double b)
{
    if (!(b > 0.0) || !std::isfinite(b))
        throw DomainError("b must be positive");
    OrientedEdgeFunction one(g);
    std::vector<double> p;
    double z = 0.0;
    for (const auto& wt : enumerate_rooted_trees(g)) {
        p.push_back(wt.weight * detail::det_ratio(g, bstar_killing(g, wt.tree, b), one).real());
        z += p.back();
    }
    for (auto& v : p)
        v /= z;
    return p;
}

/// Expected number of nontrivial loops in the soup: sum_x log lambda_x - log det(M - C).
inline double loop_mass(const WeightedGraph& g)
{
    double acc = -detail::log_det(g.energy_matrix()).real();
    for (double l : g.lambda())
        acc += std::log(l);
    return acc;
}

/// Lift of q to the cover: every lift of an oriented edge gets its q.
inline OrientedEdgeFunction lift_tilt(const WeightedGraph& g, const FiniteGroup& grp,
                                      const WeightedGraph& cover, const OrientedEdgeFunction& q)
{
    // build_cover lists |M| lifts per base edge, base edge major, each in the
    // base edge's stored orientation.
    OrientedEdgeFunction out(cover);
    const std::size_t order = grp.order();
    for (EdgeIndex e = 0; e < g.num_edges(); ++e)
        for (Element j = 0; j < order; ++j) {
            out.at(e * order + j, false) = q(e, false);
            out.at(e * order + j, true) = q(e, true);
        }
    return out;
}

inline VertexFunction lift_vertex_function(const FiniteGroup& grp, std::span<const double> chi)
{
    VertexFunction out;
    for (double v : chi)
        out.insert(out.end(), grp.order(), v);
    return out;
}

/// det(M_lambda - C)^{|M|} / det(M^A_{lambda+chi} - C^A o q~): the joint
/// expectation E[prod q^N exp(-chi . Lhat) prod_l 1{H_A(l) = identity}] over
/// |M| independent soups.
inline OracleValue cover_identity(const WeightedGraph& g, const FiniteGroup& grp,
                                  const ConnectionRep& m, const OrientedEdgeFunction& q,
                                  std::span<const double> chi)
{
    detail::check_tilt(g, q);
    detail::check_vertex_function(g, chi, "chi");
    auto cover = build_cover(g, grp, m);
    auto lifted_chi = lift_vertex_function(grp, chi);
    Complex log_ratio = static_cast<double>(grp.order()) * detail::log_det(g.energy_matrix()) -
                        log_det_energy(cover, lifted_chi, lift_tilt(g, grp, cover, q));
    return {std::exp(log_ratio), OracleMethod::eq4};
}

/// det(M^A - C^A) / det(M^A_{lambda+chi} - C^A o q~): the expectation of the
/// same tilt over the projected cover soup alone (thinned reading).
inline OracleValue cover_thinned_identity(const WeightedGraph& g, const FiniteGroup& grp,
                                          const ConnectionRep& m, const OrientedEdgeFunction& q,
                                          std::span<const double> chi)
{
    detail::check_tilt(g, q);
    detail::check_vertex_function(g, chi, "chi");
    auto cover = build_cover(g, grp, m);
    return expectation_identity(cover, lift_tilt(g, grp, cover, q), lift_vertex_function(grp, chi));
}

} // namespace loopsoup
