#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "connection.hpp"
#include "loop.hpp"
#include "oracles.hpp"
#include "samplers.hpp"
#include "stats.hpp"

namespace loopsoup
{

/// State of the tree/loop interaction chain.
struct InteractionState
{
    RootedSpanningTree tree;
    LoopEnsemble soup;
    std::size_t sweep = 0;
};

enum class InteractionKind
{
    beta,  ///< weight prod_{e not in T} beta^{N_e}
    bstar, ///< weight prod_{x : {x,root} not in T} exp(-b Lhat^x)
};

/// Gibbs sampler with exact conditionals for either interaction.
///
/// Soup given tree: the tilt is a multiplicative loop functional, so the
/// conditional soup is the soup of a modified sub-Markov chain (edge scales
/// beta off the tree, or extra killing b off the root). Tree given soup: the
/// tilt factors over tree edges, so the conditional tree is a Wilson tree of
/// reweighted conductances (C_e beta^{-N_e}) or killing (kappa_x e^{b Lhat^x}).
/// Soup samplers are cached per tree.
class InteractionChain
{
  public:
    InteractionChain(WeightedGraph g, InteractionKind kind, double param)
        : g_(std::move(g)), kind_(kind), param_(param)
    {
        if (kind_ == InteractionKind::beta)
            detail::check_beta(param_);
        else if (!(param_ > 0.0) || !std::isfinite(param_))
            throw DomainError("b must be positive");
    }

    const WeightedGraph& graph() const noexcept { return g_; }
    InteractionKind kind() const noexcept { return kind_; }
    double param() const noexcept { return param_; }

    /// Independent pair (the untilted law) as starting point.
    InteractionState initial(RngStream& rng) const
    {
        auto pair = sample_pair(g_, base_soup_, rng);
        return {std::move(pair.tree), std::move(pair.soup), 0};
    }

    void soup_step(InteractionState& state, RngStream& rng)
    {
        state.soup = sampler_for(state.tree).sample(rng);
    }

    void tree_step(InteractionState& state, RngStream& rng) const
    {
        std::vector<double> edge_log(g_.num_edges());
        std::vector<double> kill_log(g_.num_vertices());
        for (EdgeIndex e = 0; e < g_.num_edges(); ++e)
            edge_log[e] = std::log(g_.edge(e).conductance);
        for (VertexIndex x = 0; x < g_.num_vertices(); ++x)
            kill_log[x] = g_.killing()[x] > 0.0 ? std::log(g_.killing()[x])
                                                : -std::numeric_limits<double>::infinity();
        if (kind_ == InteractionKind::beta) {
            auto n = crossing_counts(g_, state.soup);
            const double log_beta = std::log(param_);
            for (EdgeIndex e = 0; e < g_.num_edges(); ++e)
                edge_log[e] -= static_cast<double>(n[e]) * log_beta;
        } else {
            auto occ = occupation_field(g_, state.soup);
            for (VertexIndex x = 0; x < g_.num_vertices(); ++x)
                if (g_.killing()[x] > 0.0)
                    kill_log[x] += param_ * occ[x];
        }
        if (const auto* trees = extreme_weights(edge_log, kill_log) ? enumerated_trees() : nullptr) {
            state.tree = sample_enumerated(*trees, edge_log, kill_log, rng);
            return;
        }
        state.tree = sample_tree_wilson_weighted(g_, edge_log, kill_log, rng);
    }

    /// One sweep: soup given tree, then tree given soup.
    void step(InteractionState& state, RngStream& rng)
    {
        soup_step(state, rng);
        tree_step(state, rng);
        ++state.sweep;
    }

    /// Edge scales or extra killing of the conditional soup given the tree.
    std::pair<std::vector<double>, std::vector<double>> conditional_tilt(const RootedSpanningTree& t) const
    {
        std::vector<double> scale(g_.num_edges(), 1.0);
        std::vector<double> kill(g_.num_vertices(), 0.0);
        if (kind_ == InteractionKind::beta) {
            for (EdgeIndex e = 0; e < g_.num_edges(); ++e)
                if (!t.contains_edge(g_, e))
                    scale[e] = param_;
        } else {
            kill = bstar_killing(g_, t, param_);
        }
        return {scale, kill};
    }

    /// Log-weight spread above which the tree step avoids Wilson's walk: the
    /// walk would bounce across a dominant edge ~exp(spread) times.
    static constexpr double kWilsonLogSpread = 16.0;

  private:
    bool extreme_weights(std::span<const double> edge_log, std::span<const double> kill_log) const
    {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (auto span : {edge_log, kill_log})
            for (double v : span)
                if (std::isfinite(v)) {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
        return hi - lo > kWilsonLogSpread;
    }

    const std::vector<WeightedTree>* enumerated_trees() const
    {
        if (!trees_checked_) {
            trees_checked_ = true;
            try {
                trees_ = enumerate_rooted_trees(g_);
            } catch (const GuardExceeded&) {
                trees_.clear();
            }
        }
        return trees_.empty() ? nullptr : &trees_;
    }

    RootedSpanningTree sample_enumerated(const std::vector<WeightedTree>& trees,
                                         std::span<const double> edge_log,
                                         std::span<const double> kill_log, RngStream& rng) const
    {
        std::vector<double> logw(trees.size(), 0.0);
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < trees.size(); ++k) {
            for (EdgeIndex a : trees[k].tree.edges(g_))
                logw[k] += a < g_.num_edges() ? edge_log[a] : kill_log[a - g_.num_edges()];
            top = std::max(top, logw[k]);
        }
        double acc = 0.0;
        for (auto& w : logw) {
            acc += std::exp(w - top);
            w = acc;
        }
        return trees[rng.discrete(logw)].tree;
    }

    const SoupSampler& sampler_for(const RootedSpanningTree& t)
    {
        auto it = cache_.find(t.parents());
        if (it == cache_.end()) {
            auto [scale, kill] = conditional_tilt(t);
            it = cache_.emplace(t.parents(), SoupSampler(g_, scale, kill)).first;
        }
        return it->second;
    }

    WeightedGraph g_;
    InteractionKind kind_;
    double param_;
    SoupSampler base_soup_{g_};
    std::map<std::vector<VertexIndex>, SoupSampler> cache_;
    mutable bool trees_checked_ = false;
    mutable std::vector<WeightedTree> trees_;
};

/// One exact-conditional sweep of the beta interaction.
inline InteractionState gibbs_beta_step(const WeightedGraph& g, double beta, InteractionState state,
                                        RngStream& rng)
{
    InteractionChain chain(g, InteractionKind::beta, beta);
    chain.step(state, rng);
    return state;
}

/// One exact-conditional sweep of the b* interaction.
inline InteractionState gibbs_bstar_step(const WeightedGraph& g, double b, InteractionState state,
                                         RngStream& rng)
{
    InteractionChain chain(g, InteractionKind::bstar, b);
    chain.step(state, rng);
    return state;
}

/// Runs `sweeps` sweeps from the independent pair and passes every state
/// with sweep index > burnin to `visit`.
inline void run_chain(const WeightedGraph& g, InteractionKind kind, double param,
                      std::size_t sweeps, std::size_t burnin, RngStream& rng,
                      const std::function<void(const InteractionState&)>& visit)
{
    if (sweeps <= burnin)
        throw DomainError("sweeps must exceed burn-in");
    InteractionChain chain(g, kind, param);
    InteractionState state = chain.initial(rng);
    for (std::size_t s = 1; s <= sweeps; ++s) {
        chain.step(state, rng);
        if (s > burnin)
            visit(state);
    }
}

inline std::vector<InteractionState> run_chain(const WeightedGraph& g, InteractionKind kind,
                                               double param, std::size_t sweeps, std::size_t burnin,
                                               RngStream& rng)
{
    std::vector<InteractionState> out;
    out.reserve(sweeps - std::min(sweeps, burnin));
    run_chain(g, kind, param, sweeps, burnin, rng,
              [&](const InteractionState& s) { out.push_back(s); });
    return out;
}

/// Value of the general functional on one state:
/// Re[prod q^{N} exp(-chi . Lhat)] * prod_e (b_e or c_e by tree membership).
inline double functional_value(const WeightedGraph& g, const InteractionState& s,
                               const OrientedEdgeFunction& q, const AugmentedEdgeFunction& b,
                               const AugmentedEdgeFunction& c, std::span<const double> chi)
{
    double f = tilt_weight(g, s.soup, q, chi).real();
    for (EdgeIndex a = 0; a < g.num_augmented_edges(); ++a)
        if (g.has_augmented_edge(a))
            f *= s.tree.contains_augmented(g, a) ? c[a] : b[a];
    return f;
}

/// Mean and batch-means standard error of the functional over a chain output.
inline Estimate estimate_functional(const WeightedGraph& g, std::span<const InteractionState> stream,
                                    const OrientedEdgeFunction& q, const AugmentedEdgeFunction& b,
                                    const AugmentedEdgeFunction& c, std::span<const double> chi)
{
    if (stream.empty())
        throw DomainError("empty chain output");
    detail::check_edge_function(g, b, "b");
    detail::check_edge_function(g, c, "c");
    std::vector<double> values;
    values.reserve(stream.size());
    for (const auto& s : stream)
        values.push_back(functional_value(g, s, q, b, c, chi));
    return batch_means(values);
}

struct OffTreeDiagnostic
{
    Estimate crossings;       ///< sum over off-tree edges of N_e, per state
    double contractible_rate; ///< fraction of loops with empty geodesic reduction (NaN if no loops)
};

inline OffTreeDiagnostic offtree_crossing_diagnostic(const WeightedGraph& g,
                                                     std::span<const InteractionState> stream)
{
    if (stream.empty())
        throw DomainError("empty chain output");
    std::vector<double> values;
    std::size_t loops = 0;
    std::size_t contractible = 0;
    for (const auto& s : stream) {
        auto n = crossing_counts(g, s.soup);
        double off = 0.0;
        for (EdgeIndex e = 0; e < g.num_edges(); ++e)
            if (!s.tree.contains_edge(g, e))
                off += static_cast<double>(n[e]);
        values.push_back(off);
        for (const auto& l : s.soup.loops) {
            ++loops;
            if (geodesic_reduce(l).empty())
                ++contractible;
        }
    }
    double rate = loops > 0 ? static_cast<double>(contractible) / static_cast<double>(loops)
                            : std::numeric_limits<double>::quiet_NaN();
    return {batch_means(values), rate};
}

} // namespace loopsoup
