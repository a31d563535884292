#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "connection.hpp"
#include "oracles.hpp"
#include "samplers.hpp"
#include "stats.hpp"

namespace loopsoup
{

/// Whether every loop of the ensemble has identity holonomy under m.
inline bool all_loops_trivial(const WeightedGraph& g, const FiniteGroup& grp,
                              const ConnectionRep& m, const LoopEnsemble& ens)
{
    for (const auto& l : ens.loops)
        if (holonomy_element(g, grp, m, l.skeleton) != grp.identity())
            return false;
    return true;
}

/// Union of |M| independent soups.
inline LoopEnsemble sample_multi_soup(const WeightedGraph& g, const SoupSampler& soups,
                                      std::size_t copies, RngStream& rng)
{
    LoopEnsemble out = empty_ensemble(g);
    for (std::size_t k = 0; k < copies; ++k) {
        auto one = soups.sample(rng);
        for (auto& l : one.loops)
            out.loops.push_back(std::move(l));
        for (VertexIndex x = 0; x < g.num_vertices(); ++x)
            out.trivial_time[x] += one.trivial_time[x];
    }
    return out;
}

/// Partition function of nu_Phi for Phi = 1_identity, by two closed forms and
/// Monte Carlo.
struct ZPhiReport
{
    double cover_sum = 0.0;   ///< sum_{T,A} P_T gamma^T det(M-C)^{|M|} / det(M^A - C^A)
    double printed_sum = 0.0; ///< sum_{T,A} P_T gamma^T det(M^A - C^A) / det(M-C)^{|M|}
    Estimate mc;              ///< E[prod_l 1{H_A(l) = identity}], T ~ P_T, A ~ gamma^T, L ~ |M| soups
    double z_cover = 0.0;
    double z_printed = 0.0;
    std::string matches; ///< "cover_sum", "printed_sum", "both" or "neither"
};

inline ZPhiReport z_phi_iota(const WeightedGraph& g, const FiniteGroup& grp,
                             const GroupDistribution& gamma, std::size_t samples, RngStream& rng)
{
    check_symmetric_distribution(grp, gamma);
    ZPhiReport rep;
    const double log_base = detail::log_det(g.energy_matrix()).real();
    const double total = std::exp(log_base);
    std::map<std::vector<Element>, double> log_ratio_cache;
    for (const auto& wt : enumerate_rooted_trees(g)) {
        const double pt = wt.weight / total;
        for (const auto& a : enumerate_tree_assignments(g, grp, wt.tree, gamma)) {
            auto it = log_ratio_cache.find(a.connection.values());
            if (it == log_ratio_cache.end()) {
                double lr = static_cast<double>(grp.order()) * log_base -
                            detail::log_det(build_cover(g, grp, a.connection).energy_matrix()).real();
                it = log_ratio_cache.emplace(a.connection.values(), lr).first;
            }
            rep.cover_sum += pt * a.probability * std::exp(it->second);
            rep.printed_sum += pt * a.probability * std::exp(-it->second);
        }
    }
    if (samples > 0) {
        SoupSampler soups(g);
        std::vector<double> hits;
        hits.reserve(samples);
        for (std::size_t s = 0; s < samples; ++s) {
            auto t = sample_tree_wilson(g, rng);
            auto m = sample_gamma_tree_connection(g, grp, t, gamma, rng);
            auto l = sample_multi_soup(g, soups, grp.order(), rng);
            hits.push_back(all_loops_trivial(g, grp, m, l) ? 1.0 : 0.0);
        }
        rep.mc = mean_and_se(hits);
        rep.z_cover = z_score(rep.mc, rep.cover_sum);
        rep.z_printed = z_score(rep.mc, rep.printed_sum);
        bool cover_ok = std::abs(rep.z_cover) <= 3.0;
        bool printed_ok = std::abs(rep.z_printed) <= 3.0;
        rep.matches = cover_ok && printed_ok ? "both"
                      : cover_ok            ? "cover_sum"
                      : printed_ok          ? "printed_sum"
                                            : "neither";
    }
    return rep;
}

/// Marginal law of the tree under nu_{1_identity}, aligned with
/// enumerate_rooted_trees(g).
inline std::vector<double> nu_phi_tree_marginal(const WeightedGraph& g, const FiniteGroup& grp,
                                                const GroupDistribution& gamma)
{
    std::vector<double> p;
    double z = 0.0;
    const double log_base = detail::log_det(g.energy_matrix()).real();
    for (const auto& wt : enumerate_rooted_trees(g)) {
        double acc = 0.0;
        for (const auto& a : enumerate_tree_assignments(g, grp, wt.tree, gamma)) {
            double lr = static_cast<double>(grp.order()) * log_base -
                        detail::log_det(build_cover(g, grp, a.connection).energy_matrix()).real();
            acc += a.probability * std::exp(lr);
        }
        p.push_back(wt.weight * acc);
        z += p.back();
    }
    for (auto& v : p)
        v /= z;
    return p;
}

struct NuPhiState
{
    RootedSpanningTree tree;
    ConnectionRep connection;
    LoopEnsemble soup;
    std::size_t sweep = 0;
};

struct NuPhiOptions
{
    /// Fall back to an independent-proposal Metropolis move for (T, A) when
    /// exhaustive enumeration exceeds its guard. The proposal draws T ~ P_T
    /// and A ~ gamma^T and is accepted iff every loop is trivial under A.
    bool metropolis_fallback = false;
};

/// Gibbs chain for nu_Phi with Phi = 1_identity. Each sweep draws the soup
/// given (T, A) as the projection of a cover soup, then (T, A) given the soup
/// exactly from the enumerated (tree, assignment) pairs.
class NuPhiChain
{
  public:
    NuPhiChain(WeightedGraph g, FiniteGroup grp, GroupDistribution gamma, NuPhiOptions options = {})
        : g_(std::move(g)), grp_(std::move(grp)), gamma_(std::move(gamma)), options_(options)
    {
        check_symmetric_distribution(grp_, gamma_);
        const double total = std::exp(detail::log_det(g_.energy_matrix()).real());
        try {
            for (const auto& wt : enumerate_rooted_trees(g_))
                for (auto& a : enumerate_tree_assignments(g_, grp_, wt.tree, gamma_)) {
                    if (candidates_.size() >= kAssignmentGuard)
                        throw GuardExceeded("too many (tree, connection) pairs to enumerate");
                    candidates_.push_back({wt.tree, std::move(a.connection),
                                           wt.weight / total * a.probability});
                }
        } catch (const GuardExceeded&) {
            if (!options_.metropolis_fallback)
                throw;
            candidates_.clear();
        }
    }

    bool uses_fallback() const noexcept { return candidates_.empty(); }

    NuPhiState initial(RngStream& rng)
    {
        NuPhiState s;
        s.tree = sample_tree_wilson(g_, rng);
        s.connection = sample_gamma_tree_connection(g_, grp_, s.tree, gamma_, rng);
        soup_step(s, rng);
        return s;
    }

    void soup_step(NuPhiState& s, RngStream& rng)
    {
        const auto& key = s.connection.values();
        auto it = cover_cache_.find(key);
        if (it == cover_cache_.end())
            it = cover_cache_.emplace(key, SoupSampler(build_cover(g_, grp_, s.connection))).first;
        s.soup = project_cover_soup(g_, grp_, it->second.sample(rng));
    }

    void connection_step(NuPhiState& s, RngStream& rng)
    {
        if (uses_fallback()) {
            auto t = sample_tree_wilson(g_, rng);
            auto m = sample_gamma_tree_connection(g_, grp_, t, gamma_, rng);
            if (all_loops_trivial(g_, grp_, m, s.soup)) {
                s.tree = std::move(t);
                s.connection = std::move(m);
            }
            return;
        }
        cumulative_.resize(candidates_.size());
        double acc = 0.0;
        for (std::size_t k = 0; k < candidates_.size(); ++k) {
            if (all_loops_trivial(g_, grp_, candidates_[k].connection, s.soup))
                acc += candidates_[k].weight;
            cumulative_[k] = acc;
        }
        if (!(acc > 0.0))
            throw NumericalError("no (tree, connection) pair supports the current soup");
        const auto& pick = candidates_[rng.discrete(cumulative_)];
        s.tree = pick.tree;
        s.connection = pick.connection;
    }

    void step(NuPhiState& s, RngStream& rng)
    {
        soup_step(s, rng);
        connection_step(s, rng);
        ++s.sweep;
    }

    const WeightedGraph& graph() const noexcept { return g_; }
    const FiniteGroup& group() const noexcept { return grp_; }

  private:
    struct Candidate
    {
        RootedSpanningTree tree;
        ConnectionRep connection;
        double weight;
    };

    WeightedGraph g_;
    FiniteGroup grp_;
    GroupDistribution gamma_;
    NuPhiOptions options_;
    std::vector<Candidate> candidates_;
    std::vector<double> cumulative_;
    std::map<std::vector<Element>, SoupSampler> cover_cache_;
};

/// Runs the nu_{1_identity} chain for `steps` sweeps and returns every state.
inline std::vector<NuPhiState> gibbs_nu_phi(const WeightedGraph& g, const FiniteGroup& grp,
                                            const GroupDistribution& gamma, std::size_t steps,
                                            RngStream& rng, NuPhiOptions options = {})
{
    NuPhiChain chain(g, grp, gamma, options);
    std::vector<NuPhiState> out;
    out.reserve(steps);
    NuPhiState s = chain.initial(rng);
    for (std::size_t k = 0; k < steps; ++k) {
        chain.step(s, rng);
        out.push_back(s);
    }
    return out;
}

} // namespace loopsoup
