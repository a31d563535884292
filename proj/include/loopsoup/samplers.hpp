#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "graph.hpp"
#include "loop.hpp"
#include "rng.hpp"

namespace loopsoup
{

inline constexpr std::uint64_t kStepBudget = 1'000'000'000;

namespace detail
{

/// Outgoing jump distribution of one vertex: targets with unnormalized
/// cumulative weights.
struct TransitionRow
{
    std::vector<VertexIndex> target;
    std::vector<double> cumulative;

    VertexIndex step(RngStream& rng) const { return target[rng.discrete(cumulative)]; }
};

class StepCounter
{
  public:
    void tick()
    {
        if (++steps_ > kStepBudget)
            throw StepBudgetExceeded("sampler exceeded the step budget of " +
                                     std::to_string(kStepBudget) + " jumps");
    }

  private:
    std::uint64_t steps_ = 0;
};

/// Jump rows for Wilson's walk from per-edge and per-vertex killing log-weights
/// (-infinity disables a killing edge). The root is target g.root().
inline std::vector<TransitionRow> wilson_rows(const WeightedGraph& g,
                                              std::span<const double> edge_log_weight,
                                              std::span<const double> killing_log_weight)
{
    const std::size_t n = g.num_vertices();
    std::vector<TransitionRow> rows(n);
    for (VertexIndex x = 0; x < n; ++x) {
        const auto& nbs = g.neighbors(x);
        double top = killing_log_weight[x];
        for (const auto& nb : nbs)
            top = std::max(top, edge_log_weight[nb.edge]);
        double acc = 0.0;
        auto& row = rows[x];
        for (const auto& nb : nbs) {
            acc += std::exp(edge_log_weight[nb.edge] - top);
            row.target.push_back(nb.vertex);
            row.cumulative.push_back(acc);
        }
        if (std::isfinite(killing_log_weight[x])) {
            acc += std::exp(killing_log_weight[x] - top);
            row.target.push_back(g.root());
            row.cumulative.push_back(acc);
        }
        if (row.target.empty() || !(acc > 0.0))
            throw DomainError("vertex '" + g.name(x) + "' has no outgoing weight");
    }
    return rows;
}

inline std::vector<TransitionRow> wilson_rows(const WeightedGraph& g)
{
    std::vector<double> edge_log(g.num_edges());
    for (EdgeIndex e = 0; e < g.num_edges(); ++e)
        edge_log[e] = std::log(g.edge(e).conductance);
    std::vector<double> kill_log(g.num_vertices());
    for (VertexIndex x = 0; x < g.num_vertices(); ++x)
        kill_log[x] = g.killing()[x] > 0.0 ? std::log(g.killing()[x])
                                           : -std::numeric_limits<double>::infinity();
    return wilson_rows(g, edge_log, kill_log);
}

inline RootedSpanningTree wilson(const WeightedGraph& g, const std::vector<TransitionRow>& rows,
                                 RngStream& rng)
{
    const std::size_t n = g.num_vertices();
    std::vector<bool> in_tree(n + 1, false);
    in_tree[n] = true;
    std::vector<VertexIndex> next(n, n);
    StepCounter counter;
    for (VertexIndex x = 0; x < n; ++x) {
        VertexIndex u = x;
        while (!in_tree[u]) {
            next[u] = rows[u].step(rng);
            u = next[u];
            counter.tick();
        }
        for (u = x; !in_tree[u]; u = next[u])
            in_tree[u] = true;
    }
    return RootedSpanningTree::from_parents(g, std::move(next));
}

} // namespace detail

/// Wilson's algorithm: vertices in graph order, loop-erased walks of the
/// discrete chain until the partial tree (initially the root) is hit.
inline RootedSpanningTree sample_tree_wilson(const WeightedGraph& g, RngStream& rng)
{
    return detail::wilson(g, detail::wilson_rows(g), rng);
}

/// Wilson's algorithm for tree weights prod exp(edge_log_weight) *
/// prod exp(killing_log_weight) on the topology of g.
inline RootedSpanningTree sample_tree_wilson_weighted(const WeightedGraph& g,
                                                      std::span<const double> edge_log_weight,
                                                      std::span<const double> killing_log_weight,
                                                      RngStream& rng)
{
    if (edge_log_weight.size() != g.num_edges() || killing_log_weight.size() != g.num_vertices())
        throw DomainError("tree weights must cover every edge and vertex");
    return detail::wilson(g, detail::wilson_rows(g, edge_log_weight, killing_log_weight), rng);
}

/// Exact sampler of the loop soup of the sub-Markov chain with conductances
/// C o edge_scale and holding rates lambda + extra_kill.
///
/// Loops are generated by their first vertex in graph order. For vertex x_i
/// the nontrivial loops inside H_i = {x_i, ..., x_n} form a Poisson family of
/// mean -log(1 - r_i), each made of a Logarithmic(r_i) number of excursions
/// drawn from the Doob transform of the walk by h(y) = P_y(hit x_i in H_i).
class SoupSampler
{
  public:
    explicit SoupSampler(const WeightedGraph& g, std::span<const double> edge_scale = {},
                         std::span<const double> extra_kill = {})
        : n_(g.num_vertices()), rate_(g.lambda().begin(), g.lambda().end())
    {
        if (!edge_scale.empty() && edge_scale.size() != g.num_edges())
            throw DomainError("edge scale must be defined on every edge");
        for (double s : edge_scale)
            if (!(s > 0.0 && s <= 1.0))
                throw DomainError("edge scale must lie in (0, 1]");
        if (!extra_kill.empty()) {
            detail::check_vertex_function(g, extra_kill, "extra killing");
            for (VertexIndex x = 0; x < n_; ++x)
                rate_[x] += extra_kill[x];
        }

        const auto n = static_cast<Eigen::Index>(n_);
        Eigen::MatrixXd jump = Eigen::MatrixXd::Zero(n, n);
        for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
            const auto& ed = g.edge(e);
            double c = ed.conductance * (edge_scale.empty() ? 1.0 : edge_scale[e]);
            auto u = static_cast<Eigen::Index>(ed.u);
            auto v = static_cast<Eigen::Index>(ed.v);
            jump(u, v) = c / rate_[ed.u];
            jump(v, u) = c / rate_[ed.v];
        }

        levels_.resize(n_);
        for (Eigen::Index i = 0; i < n; ++i) {
            auto& level = levels_[static_cast<std::size_t>(i)];
            level.rows.resize(n_);
            const Eigen::Index rest = n - i - 1;
            Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
            h(i) = 1.0;
            if (rest > 0) {
                Eigen::MatrixXd a = Eigen::MatrixXd::Identity(rest, rest) -
                                    jump.block(i + 1, i + 1, rest, rest);
                Eigen::VectorXd rhs = jump.block(i + 1, i, rest, 1);
                Eigen::VectorXd sol = a.partialPivLu().solve(rhs);
                for (Eigen::Index k = 0; k < rest; ++k)
                    h(i + 1 + k) = std::clamp(sol(k), 0.0, 1.0);
            }
            double r = 0.0;
            for (Eigen::Index y = i; y < n; ++y) {
                if (h(y) <= 0.0)
                    continue;
                auto& row = level.rows[static_cast<std::size_t>(y)];
                double acc = 0.0;
                for (Eigen::Index z = i; z < n; ++z) {
                    double w = jump(y, z) * h(z);
                    if (w <= 0.0)
                        continue;
                    acc += w;
                    row.target.push_back(static_cast<VertexIndex>(z));
                    row.cumulative.push_back(acc);
                }
                if (y == i)
                    r = acc;
            }
            level.r = std::min(r, 1.0 - 1e-15);
            if (level.r > 0.0) {
                level.log_table = LogarithmicTable(level.r);
                level.poisson_mean = -std::log1p(-level.r);
            }
        }
    }

    std::size_t num_vertices() const noexcept { return n_; }

    /// Return probabilities r_i, one per vertex in graph order.
    std::vector<double> return_probabilities() const
    {
        std::vector<double> out;
        for (const auto& level : levels_)
            out.push_back(level.r);
        return out;
    }

    std::span<const double> holding_rates() const noexcept { return rate_; }

    LoopEnsemble sample(RngStream& rng) const
    {
        LoopEnsemble ens;
        detail::StepCounter counter;
        for (VertexIndex i = 0; i < n_; ++i) {
            const auto& level = levels_[i];
            if (level.r <= 0.0)
                continue;
            std::uint64_t count = rng.poisson(level.poisson_mean);
            for (std::uint64_t c = 0; c < count; ++c) {
                std::uint64_t excursions = level.log_table.sample(rng);
                Loop loop;
                for (std::uint64_t k = 0; k < excursions; ++k) {
                    VertexIndex y = i;
                    do {
                        loop.skeleton.push_back(y);
                        y = level.rows[y].step(rng);
                        counter.tick();
                    } while (y != i);
                }
                for (VertexIndex x : loop.skeleton)
                    loop.holding.push_back(rng.exponential(rate_[x]));
                ens.loops.push_back(std::move(loop));
            }
        }
        ens.trivial_time.resize(n_);
        for (VertexIndex x = 0; x < n_; ++x)
            ens.trivial_time[x] = rng.exponential(rate_[x]);
        return ens;
    }

  private:
    struct Level
    {
        double r = 0.0;
        double poisson_mean = 0.0;
        LogarithmicTable log_table;
        std::vector<detail::TransitionRow> rows;
    };

    std::size_t n_;
    std::vector<double> rate_;
    std::vector<Level> levels_;
};

inline LoopEnsemble sample_soup(const WeightedGraph& g, RngStream& rng)
{
    return SoupSampler(g).sample(rng);
}

/// Soup of the chain with conductances C o edge_scale (scales in (0, 1]) and
/// rates lambda + extra_kill.
inline LoopEnsemble sample_soup_tilted(const WeightedGraph& g, std::span<const double> edge_scale,
                                       std::span<const double> extra_kill, RngStream& rng)
{
    return SoupSampler(g, edge_scale, extra_kill).sample(rng);
}

struct TreeSoupPair
{
    RootedSpanningTree tree;
    LoopEnsemble soup;
};

/// Independent pair: Wilson tree and soup on two child streams.
inline TreeSoupPair sample_pair(const WeightedGraph& g, const SoupSampler& soups, RngStream& rng)
{
    RngStream tree_rng = rng.child(0);
    RngStream soup_rng = rng.child(1);
    auto tree = sample_tree_wilson(g, tree_rng);
    return {std::move(tree), soups.sample(soup_rng)};
}

inline TreeSoupPair sample_pair(const WeightedGraph& g, RngStream& rng)
{
    return sample_pair(g, SoupSampler(g), rng);
}

/// Coupled tree and soup from one run of Wilson's algorithm.
///
/// Each raw walk gets Exp(lambda) holding times. For every vertex y on the
/// loop-erased path, the walk between its first and last visit is a string
/// of excursions from y; the local time at y is cut by Poisson-Dirichlet(0,1)
/// stick breaking, and each piece closes the excursions departing inside it
/// into one unrooted loop. Pieces with no excursion are one-point loops and
/// go to the trivial time.
inline TreeSoupPair sample_pair_extended_wilson(const WeightedGraph& g, RngStream& rng)
{
    const std::size_t n = g.num_vertices();
    const auto rows = detail::wilson_rows(g);
    const auto lambda = g.lambda();
    std::vector<bool> in_tree(n + 1, false);
    in_tree[n] = true;
    std::vector<VertexIndex> parent(n, n);
    LoopEnsemble ens = empty_ensemble(g);
    detail::StepCounter counter;

    std::vector<VertexIndex> traj;
    std::vector<double> hold;
    std::vector<std::size_t> last(n);
    std::vector<std::size_t> visits;
    std::vector<double> departure;

    for (VertexIndex x = 0; x < n; ++x) {
        if (in_tree[x])
            continue;
        traj.clear();
        hold.clear();
        VertexIndex u = x;
        while (!in_tree[u]) {
            traj.push_back(u);
            hold.push_back(rng.exponential(lambda[u]));
            u = rows[u].step(rng);
            counter.tick();
        }
        const VertexIndex end = u;
        for (std::size_t idx = 0; idx < traj.size(); ++idx)
            last[traj[idx]] = idx;

        for (std::size_t s = 0; s < traj.size();) {
            const VertexIndex y = traj[s];
            const std::size_t e = last[y];

            visits.clear();
            for (std::size_t idx = s; idx <= e; ++idx)
                if (traj[idx] == y)
                    visits.push_back(idx);
            // departure[t] is the local time at y when excursion t leaves.
            departure.clear();
            double tau = 0.0;
            for (std::size_t t = 0; t < visits.size(); ++t) {
                tau += hold[visits[t]];
                if (t + 1 < visits.size())
                    departure.push_back(tau);
            }
            const std::size_t k = departure.size();

            double a = 0.0;
            std::size_t next_exc = 0;
            while (next_exc < k) {
                double b = a + rng.uniform_open0() * (tau - a);
                std::size_t first = next_exc;
                while (next_exc < k && departure[next_exc] < b)
                    ++next_exc;
                if (first == next_exc) {
                    ens.trivial_time[y] += b - a;
                } else {
                    Loop loop;
                    for (std::size_t t = first; t < next_exc; ++t) {
                        double at_y = t == first ? (departure[first] - a) + (b - departure[next_exc - 1])
                                                 : departure[t] - departure[t - 1];
                        loop.skeleton.push_back(y);
                        loop.holding.push_back(at_y);
                        for (std::size_t idx = visits[t] + 1; idx < visits[t + 1]; ++idx) {
                            loop.skeleton.push_back(traj[idx]);
                            loop.holding.push_back(hold[idx]);
                        }
                    }
                    ens.loops.push_back(std::move(loop));
                }
                a = b;
            }
            ens.trivial_time[y] += tau - a;

            parent[y] = e + 1 < traj.size() ? traj[e + 1] : end;
            in_tree[y] = true;
            s = e + 1;
        }
    }
    return {RootedSpanningTree::from_parents(g, std::move(parent)), std::move(ens)};
}

} // namespace loopsoup
