#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace loopsoup
{

using Complex = std::complex<double>;
using VertexIndex = std::size_t;
using EdgeIndex = std::size_t;

/// Display name of the root vertex; reserved, may not be used for a vertex.
inline constexpr std::string_view kRootName = "Δ";

/// Textual description of a graph, as read from a graph file.
struct GraphSpec
{
    struct EdgeSpec
    {
        std::string u;
        std::string v;
        double conductance = 0.0;
    };

    std::vector<std::string> vertices;
    std::vector<EdgeSpec> edges;
    std::map<std::string, double> killing;
};

struct Edge
{
    VertexIndex u = 0;
    VertexIndex v = 0;
    double conductance = 0.0;
};

struct Neighbor
{
    VertexIndex vertex;
    EdgeIndex edge;
};

class WeightedGraph;
WeightedGraph build_graph(const GraphSpec& spec);

/// Conductances and killing measure on a finite vertex set X, with a root
/// outside X. Immutable once built; vertex order is the input order.
///
/// Augmented edge indices run over conductance edges first (0..m-1) and then
/// one killing edge {x, root} per vertex (m + x), present iff killing(x) > 0.
class WeightedGraph
{
  public:
    std::size_t num_vertices() const noexcept { return names_.size(); }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    std::size_t num_augmented_edges() const noexcept { return edges_.size() + names_.size(); }

    /// Index of the root in tree parent arrays.
    VertexIndex root() const noexcept { return names_.size(); }

    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& name(VertexIndex x) const { return names_.at(x); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Edge& edge(EdgeIndex e) const { return edges_.at(e); }
    std::span<const double> killing() const noexcept { return killing_; }
    std::span<const double> lambda() const noexcept { return lambda_; }
    const std::vector<Neighbor>& neighbors(VertexIndex x) const { return adjacency_.at(x); }

    std::optional<VertexIndex> find_vertex(std::string_view name) const
    {
        auto it = index_.find(std::string(name));
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    VertexIndex vertex(std::string_view name) const
    {
        if (auto x = find_vertex(name))
            return *x;
        throw DomainError("unknown vertex '" + std::string(name) + "'");
    }

    std::optional<EdgeIndex> find_edge(VertexIndex x, VertexIndex y) const
    {
        if (x >= num_vertices() || y >= num_vertices())
            return std::nullopt;
        for (const auto& nb : adjacency_[x])
            if (nb.vertex == y)
                return nb.edge;
        return std::nullopt;
    }

    EdgeIndex edge_index(VertexIndex x, VertexIndex y) const
    {
        if (auto e = find_edge(x, y))
            return *e;
        throw DomainError("no conductance edge between vertices " + std::to_string(x) + " and " +
                          std::to_string(y));
    }

    EdgeIndex killing_edge(VertexIndex x) const noexcept { return edges_.size() + x; }

    /// Whether augmented edge `a` exists (conductance edge, or killing edge with kappa > 0).
    bool has_augmented_edge(EdgeIndex a) const
    {
        if (a < edges_.size())
            return true;
        return a < num_augmented_edges() && killing_[a - edges_.size()] > 0.0;
    }

    /// Endpoints of an augmented edge; the root is reported as root().
    std::pair<VertexIndex, VertexIndex> endpoints(EdgeIndex a) const
    {
        if (a < edges_.size())
            return {edges_[a].u, edges_[a].v};
        return {a - edges_.size(), root()};
    }

    double augmented_weight(EdgeIndex a) const
    {
        return a < edges_.size() ? edges_[a].conductance : killing_[a - edges_.size()];
    }

    std::string edge_label(EdgeIndex a) const
    {
        auto [u, v] = endpoints(a);
        return names_[u] + "~" + (v == root() ? std::string(kRootName) : names_[v]);
    }

    /// Dense M_lambda - C in vertex order.
    Eigen::MatrixXd energy_matrix() const
    {
        const auto n = static_cast<Eigen::Index>(num_vertices());
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t x = 0; x < num_vertices(); ++x)
            m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) = lambda_[x];
        for (const auto& e : edges_) {
            m(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.v)) -= e.conductance;
            m(static_cast<Eigen::Index>(e.v), static_cast<Eigen::Index>(e.u)) -= e.conductance;
        }
        return m;
    }

    GraphSpec to_spec() const
    {
        GraphSpec spec;
        spec.vertices = names_;
        for (const auto& e : edges_)
            spec.edges.push_back({names_[e.u], names_[e.v], e.conductance});
        for (std::size_t x = 0; x < names_.size(); ++x)
            if (killing_[x] > 0.0)
                spec.killing[names_[x]] = killing_[x];
        return spec;
    }

  private:
    friend WeightedGraph build_graph(const GraphSpec& spec);

    std::vector<std::string> names_;
    std::map<std::string, VertexIndex> index_;
    std::vector<Edge> edges_;
    std::vector<double> killing_;
    std::vector<double> lambda_;
    std::vector<std::vector<Neighbor>> adjacency_;
};

namespace detail
{

struct UnionFind
{
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    std::size_t find(std::size_t x)
    {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return false;
        parent[a] = b;
        return true;
    }

    std::vector<std::size_t> parent;
};

} // namespace detail

/// Validate a graph description and build the graph.
///
/// Rejects unknown vertices, self-edges, duplicate edges, non-positive or
/// non-finite conductances, negative killing, and graphs whose augmented
/// graph (edges plus {x, root} for kappa_x > 0) is disconnected.
inline WeightedGraph build_graph(const GraphSpec& spec)
{
    WeightedGraph g;
    if (spec.vertices.empty())
        throw DomainError("graph has no vertices");
    for (const auto& name : spec.vertices) {
        if (name == kRootName)
            throw DomainError("vertex name '" + name + "' is reserved for the root");
        if (!g.index_.emplace(name, g.names_.size()).second)
            throw DomainError("duplicate vertex '" + name + "'");
        g.names_.push_back(name);
    }
    const std::size_t n = g.names_.size();
    g.adjacency_.resize(n);
    g.killing_.assign(n, 0.0);

    for (const auto& es : spec.edges) {
        VertexIndex u = g.vertex(es.u);
        VertexIndex v = g.vertex(es.v);
        if (u == v)
            throw DomainError("self-edge at vertex '" + es.u + "'");
        if (!(es.conductance > 0.0) || !std::isfinite(es.conductance))
            throw DomainError("conductance of edge " + es.u + "-" + es.v + " must be positive");
        if (g.find_edge(u, v))
            throw DomainError("duplicate edge " + es.u + "-" + es.v);
        EdgeIndex e = g.edges_.size();
        g.edges_.push_back({u, v, es.conductance});
        g.adjacency_[u].push_back({v, e});
        g.adjacency_[v].push_back({u, e});
    }

    for (const auto& [name, kappa] : spec.killing) {
        VertexIndex x = g.vertex(name);
        if (!(kappa >= 0.0) || !std::isfinite(kappa))
            throw DomainError("killing at '" + name + "' must be non-negative");
        g.killing_[x] = kappa;
    }

    g.lambda_ = g.killing_;
    for (const auto& e : g.edges_) {
        g.lambda_[e.u] += e.conductance;
        g.lambda_[e.v] += e.conductance;
    }

    detail::UnionFind uf(n + 1);
    for (const auto& e : g.edges_)
        uf.unite(e.u, e.v);
    for (std::size_t x = 0; x < n; ++x)
        if (g.killing_[x] > 0.0)
            uf.unite(x, n);
    for (std::size_t x = 0; x < n; ++x)
        if (uf.find(x) != uf.find(n))
            throw DomainError("vertex '" + g.names_[x] + "' is not connected to the root");
    return g;
}

/// Function on oriented conductance edges. Slot 2e is the stored orientation
/// (u -> v) of edge e, slot 2e+1 the reverse.
class OrientedEdgeFunction
{
  public:
    OrientedEdgeFunction() = default;
    explicit OrientedEdgeFunction(const WeightedGraph& g, Complex fill = 1.0)
        : values_(2 * g.num_edges(), fill)
    {
    }

    std::size_t size() const noexcept { return values_.size(); }

    Complex operator()(EdgeIndex e, bool reversed) const { return values_.at(2 * e + reversed); }
    Complex& at(EdgeIndex e, bool reversed) { return values_.at(2 * e + reversed); }

    Complex get(const WeightedGraph& g, VertexIndex from, VertexIndex to) const
    {
        EdgeIndex e = g.edge_index(from, to);
        return (*this)(e, g.edge(e).u != from);
    }

    void set(const WeightedGraph& g, VertexIndex from, VertexIndex to, Complex value)
    {
        EdgeIndex e = g.edge_index(from, to);
        at(e, g.edge(e).u != from) = value;
    }

    std::span<const Complex> values() const noexcept { return values_; }

  private:
    std::vector<Complex> values_;
};

using VertexFunction = std::vector<double>;

inline VertexFunction zero_vertex_function(const WeightedGraph& g)
{
    return VertexFunction(g.num_vertices(), 0.0);
}

namespace detail
{

inline void check_vertex_function(const WeightedGraph& g, std::span<const double> chi,
                                  const char* what)
{
    if (chi.size() != g.num_vertices())
        throw DomainError(std::string(what) + " must be defined on every vertex");
    for (double v : chi)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw DomainError(std::string(what) + " must be finite and non-negative");
}

inline void check_tilt(const WeightedGraph& g, const OrientedEdgeFunction& q)
{
    if (q.size() != 2 * g.num_edges())
        throw DomainError("edge tilt must be defined on every oriented edge");
    for (auto v : q.values())
        if (!(std::abs(v) <= 1.0 + 1e-12))
            throw DomainError("edge tilt must satisfy |q| <= 1");
}

inline Eigen::MatrixXcd tilted_matrix(const WeightedGraph& g, std::span<const double> chi,
                                      const OrientedEdgeFunction& q)
{
    const auto n = static_cast<Eigen::Index>(g.num_vertices());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index x = 0; x < n; ++x)
        m(x, x) = g.lambda()[static_cast<std::size_t>(x)] + chi[static_cast<std::size_t>(x)];
    for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edge(e);
        auto u = static_cast<Eigen::Index>(ed.u);
        auto v = static_cast<Eigen::Index>(ed.v);
        m(u, v) -= ed.conductance * q(e, false);
        m(v, u) -= ed.conductance * q(e, true);
    }
    return m;
}

/// Complex log-determinant through partial-pivot LU.
template <class Matrix>
Complex log_det(const Matrix& m)
{
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m.template cast<Complex>());
    const auto& u = lu.matrixLU();
    Complex acc = 0.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        Complex d = u(i, i);
        if (d == Complex(0.0))
            throw NumericalError("singular matrix in determinant");
        acc += std::log(d);
    }
    if (lu.permutationP().determinant() < 0)
        acc += Complex(0.0, M_PI);
    return acc;
}

} // namespace detail

/// Energy form of the graph evaluated on vertex functions f and h
/// (conjugate-linear in h).
inline Complex energy_form(const WeightedGraph& g, std::span<const Complex> f,
                           std::span<const Complex> h)
{
    if (f.size() != g.num_vertices() || h.size() != g.num_vertices())
        throw DomainError("energy form arguments must be defined on every vertex");
    Complex acc = 0.0;
    for (const auto& e : g.edges())
        acc += e.conductance * (f[e.u] - f[e.v]) * std::conj(h[e.u] - h[e.v]);
    for (std::size_t x = 0; x < g.num_vertices(); ++x)
        acc += g.killing()[x] * f[x] * std::conj(h[x]);
    return acc;
}

/// Green function (M_lambda - C)^{-1}.
inline Eigen::MatrixXd green(const WeightedGraph& g)
{
    Eigen::MatrixXd a = g.energy_matrix();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    Eigen::MatrixXd inv = lu.inverse();
    if (!inv.allFinite())
        throw NumericalError("energy matrix is singular; graph invariants violated");
    return 0.5 * (inv + inv.transpose());
}

/// det(M_{lambda+chi} - C o q). An empty chi means chi = 0, an empty q means q = 1.
inline Complex det_energy(const WeightedGraph& g, std::span<const double> chi = {},
                          const OrientedEdgeFunction& q = {})
{
    VertexFunction zero;
    if (chi.empty()) {
        zero = zero_vertex_function(g);
        chi = zero;
    }
    detail::check_vertex_function(g, chi, "chi");
    if (q.size() == 0)
        return detail::tilted_matrix(g, chi, OrientedEdgeFunction(g)).determinant();
    detail::check_tilt(g, q);
    return detail::tilted_matrix(g, chi, q).determinant();
}

/// log det(M_{lambda+chi} - C o q); same conventions as det_energy.
inline Complex log_det_energy(const WeightedGraph& g, std::span<const double> chi = {},
                              const OrientedEdgeFunction& q = {})
{
    VertexFunction zero;
    if (chi.empty()) {
        zero = zero_vertex_function(g);
        chi = zero;
    }
    detail::check_vertex_function(g, chi, "chi");
    if (q.size() == 0)
        return detail::log_det(detail::tilted_matrix(g, chi, OrientedEdgeFunction(g)));
    detail::check_tilt(g, q);
    return detail::log_det(detail::tilted_matrix(g, chi, q));
}

/// Spanning tree of X plus the root, stored as parent pointers toward the root.
class RootedSpanningTree
{
  public:
    RootedSpanningTree() = default;

    /// Validates that every parent link is an existing augmented edge and that
    /// every vertex reaches the root.
    static RootedSpanningTree from_parents(const WeightedGraph& g, std::vector<VertexIndex> parent)
    {
        const std::size_t n = g.num_vertices();
        if (parent.size() != n)
            throw DomainError("tree must assign a parent to every vertex");
        for (std::size_t x = 0; x < n; ++x) {
            VertexIndex p = parent[x];
            if (p == g.root()) {
                if (!(g.killing()[x] > 0.0))
                    throw DomainError("tree uses killing edge at '" + g.name(x) + "' with kappa = 0");
            } else if (!g.find_edge(x, p)) {
                throw DomainError("tree uses a non-edge at '" + g.name(x) + "'");
            }
        }
        for (std::size_t x = 0; x < n; ++x) {
            VertexIndex y = x;
            for (std::size_t steps = 0; y != g.root(); ++steps) {
                if (steps > n)
                    throw DomainError("tree parent links contain a cycle");
                y = parent[y];
            }
        }
        RootedSpanningTree t;
        t.parent_ = std::move(parent);
        return t;
    }

    /// Build from exactly |X| augmented edge indices forming a spanning tree.
    static RootedSpanningTree from_edges(const WeightedGraph& g, std::span<const EdgeIndex> edges)
    {
        const std::size_t n = g.num_vertices();
        if (edges.size() != n)
            throw DomainError("rooted spanning tree needs exactly |X| edges");
        std::vector<std::vector<VertexIndex>> adj(n + 1);
        for (EdgeIndex a : edges) {
            if (!g.has_augmented_edge(a))
                throw DomainError("tree edge is not an edge of the augmented graph");
            auto [u, v] = g.endpoints(a);
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        std::vector<VertexIndex> parent(n, g.root());
        std::vector<bool> seen(n + 1, false);
        std::vector<VertexIndex> stack{g.root()};
        seen[g.root()] = true;
        std::size_t reached = 0;
        while (!stack.empty()) {
            VertexIndex x = stack.back();
            stack.pop_back();
            for (VertexIndex y : adj[x]) {
                if (seen[y])
                    continue;
                seen[y] = true;
                parent[y] = x;
                ++reached;
                stack.push_back(y);
            }
        }
        if (reached != n)
            throw DomainError("edge set does not span the augmented graph");
        return from_parents(g, std::move(parent));
    }

    const std::vector<VertexIndex>& parents() const noexcept { return parent_; }
    VertexIndex parent(VertexIndex x) const { return parent_.at(x); }
    std::size_t size() const noexcept { return parent_.size(); }

    bool contains_edge(const WeightedGraph& g, EdgeIndex e) const
    {
        const auto& ed = g.edge(e);
        return parent_[ed.u] == ed.v || parent_[ed.v] == ed.u;
    }

    bool attached_to_root(VertexIndex x) const { return parent_.at(x) == parent_.size(); }

    bool contains_augmented(const WeightedGraph& g, EdgeIndex a) const
    {
        if (a < g.num_edges())
            return contains_edge(g, a);
        return attached_to_root(a - g.num_edges());
    }

    /// Sorted augmented edge indices.
    std::vector<EdgeIndex> edges(const WeightedGraph& g) const
    {
        std::vector<EdgeIndex> out;
        for (std::size_t x = 0; x < parent_.size(); ++x)
            out.push_back(parent_[x] == g.root() ? g.killing_edge(x) : g.edge_index(x, parent_[x]));
        std::sort(out.begin(), out.end());
        return out;
    }

    std::string label(const WeightedGraph& g) const
    {
        std::string s;
        for (EdgeIndex a : edges(g)) {
            if (!s.empty())
                s += ' ';
            s += g.edge_label(a);
        }
        return s;
    }

    auto operator<=>(const RootedSpanningTree&) const = default;

  private:
    std::vector<VertexIndex> parent_;
};

/// Product of conductances and killing rates over the tree's edges.
inline double tree_weight(const WeightedGraph& g, const RootedSpanningTree& t)
{
    double w = 1.0;
    for (std::size_t x = 0; x < t.size(); ++x) {
        VertexIndex p = t.parent(x);
        w *= p == g.root() ? g.killing()[x] : g.edge(g.edge_index(x, p)).conductance;
    }
    return w;
}

struct WeightedTree
{
    RootedSpanningTree tree;
    double weight;
};

inline constexpr std::size_t kEnumerationEdgeGuard = 20;

/// All rooted spanning trees with their matrix-tree weights, in lexicographic
/// order of their sorted augmented edge lists.
inline std::vector<WeightedTree> enumerate_rooted_trees(const WeightedGraph& g)
{
    std::vector<EdgeIndex> relevant;
    for (EdgeIndex a = 0; a < g.num_augmented_edges(); ++a)
        if (g.has_augmented_edge(a))
            relevant.push_back(a);
    if (relevant.size() > kEnumerationEdgeGuard)
        throw GuardExceeded("graph too large for enumeration: " + std::to_string(relevant.size()) +
                            " augmented edges (limit " + std::to_string(kEnumerationEdgeGuard) +
                            ")");
    const std::size_t n = g.num_vertices();
    std::vector<WeightedTree> out;
    std::vector<std::size_t> pick(n);
    std::iota(pick.begin(), pick.end(), 0);
    if (n > relevant.size())
        return out;
    std::vector<EdgeIndex> chosen(n);
    while (true) {
        detail::UnionFind uf(n + 1);
        bool acyclic = true;
        for (std::size_t k = 0; k < n && acyclic; ++k) {
            chosen[k] = relevant[pick[k]];
            auto [u, v] = g.endpoints(chosen[k]);
            acyclic = uf.unite(u, v);
        }
        if (acyclic) {
            auto t = RootedSpanningTree::from_edges(g, chosen);
            double w = tree_weight(g, t);
            out.push_back({std::move(t), w});
        }
        // Next combination of n indices out of relevant.size().
        std::size_t i = n;
        while (i > 0 && pick[i - 1] == relevant.size() - n + i - 1)
            --i;
        if (i == 0)
            break;
        ++pick[i - 1];
        for (std::size_t j = i; j < n; ++j)
            pick[j] = pick[j - 1] + 1;
    }
    return out;
}

/// weight(t) / det(M_lambda - C).
inline double tree_probability(const WeightedGraph& g, const RootedSpanningTree& t)
{
    if (t.size() != g.num_vertices())
        throw DomainError("tree does not belong to this graph");
    auto checked = RootedSpanningTree::from_parents(g, t.parents());
    return tree_weight(g, checked) / std::exp(detail::log_det(g.energy_matrix()).real());
}

/// Fixture graphs used throughout the tests and documentation.
namespace fixtures
{

/// Single vertex a with kappa_a = 1.
inline WeightedGraph g1()
{
    return build_graph({{"a"}, {}, {{"a", 1.0}}});
}

/// Edge a-b with C = 1 and kappa = 1 on both ends.
inline WeightedGraph g2()
{
    return build_graph({{"a", "b"}, {{"a", "b", 1.0}}, {{"a", 1.0}, {"b", 1.0}}});
}

/// Triangle a, b, c with unit conductances and unit killing.
inline WeightedGraph g3()
{
    return build_graph({{"a", "b", "c"},
                        {{"a", "b", 1.0}, {"b", "c", 1.0}, {"c", "a", 1.0}},
                        {{"a", 1.0}, {"b", 1.0}, {"c", 1.0}}});
}

} // namespace fixtures

} // namespace loopsoup
