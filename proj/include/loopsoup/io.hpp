#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "connection.hpp"
#include "graph.hpp"
#include "group.hpp"
#include "loop.hpp"

namespace loopsoup
{

using json = nlohmann::json;

namespace detail
{

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json(const std::string& text, const char* what)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

} // namespace detail

/// {"vertices":["a","b"],"edges":[{"u":"a","v":"b","c":1.0}],"killing":{"a":1.0}}
inline GraphSpec parse_graph_spec(const std::string& text)
{
    json j = detail::parse_json(text, "graph file");
    GraphSpec spec;
    try {
        spec.vertices = j.at("vertices").get<std::vector<std::string>>();
        if (j.contains("edges"))
            for (const auto& e : j.at("edges"))
                spec.edges.push_back(
                    {e.at("u").get<std::string>(), e.at("v").get<std::string>(), e.at("c").get<double>()});
        if (j.contains("killing"))
            for (const auto& [name, value] : j.at("killing").items())
                spec.killing[name] = value.get<double>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("graph file: ") + e.what());
    }
    return spec;
}

inline WeightedGraph parse_graph(const std::string& text) { return build_graph(parse_graph_spec(text)); }

inline WeightedGraph load_graph(const std::string& path) { return parse_graph(detail::read_file(path)); }

inline std::string graph_to_json(const WeightedGraph& g)
{
    json j;
    j["vertices"] = g.names();
    j["edges"] = json::array();
    for (const auto& e : g.edges())
        j["edges"].push_back({{"u", g.name(e.u)}, {"v", g.name(e.v)}, {"c", e.conductance}});
    j["killing"] = json::object();
    for (VertexIndex x = 0; x < g.num_vertices(); ++x)
        if (g.killing()[x] > 0.0)
            j["killing"][g.name(x)] = g.killing()[x];
    return j.dump();
}

/// {"order":2,"table":[[0,1],[1,0]],"identity":0}
inline FiniteGroup parse_group(const std::string& text)
{
    json j = detail::parse_json(text, "group file");
    try {
        auto table = j.at("table").get<std::vector<std::vector<Element>>>();
        if (j.contains("order") && j.at("order").get<std::size_t>() != table.size())
            throw ParseError("group file: order does not match table size");
        return FiniteGroup::from_table(std::move(table), j.at("identity").get<Element>(),
                                       j.value("name", std::string("custom")));
    } catch (const json::exception& e) {
        throw ParseError(std::string("group file: ") + e.what());
    }
}

inline FiniteGroup load_group(const std::string& path) { return parse_group(detail::read_file(path)); }

/// {"edges":[{"u":"a","v":"b","g":1}]}; unlisted edges carry the identity.
/// "v" may name the root to set a killing-edge value.
inline ConnectionRep parse_connection(const WeightedGraph& g, const FiniteGroup& grp,
                                      const std::string& text)
{
    json j = detail::parse_json(text, "connection file");
    ConnectionRep m(g, grp);
    try {
        for (const auto& e : j.at("edges")) {
            auto u = e.at("u").get<std::string>();
            auto v = e.at("v").get<std::string>();
            auto val = e.at("g").get<Element>();
            if (val >= grp.order())
                throw ParseError("connection file: element " + std::to_string(val) + " not in group");
            VertexIndex from = u == kRootName ? g.root() : g.vertex(u);
            VertexIndex to = v == kRootName ? g.root() : g.vertex(v);
            m.set(g, grp, from, to, val);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("connection file: ") + e.what());
    }
    return m;
}

inline ConnectionRep load_connection(const WeightedGraph& g, const FiniteGroup& grp,
                                     const std::string& path)
{
    return parse_connection(g, grp, detail::read_file(path));
}

/// Tree edges as [child, parent] pairs in vertex order.
inline json tree_to_json(const WeightedGraph& g, const RootedSpanningTree& t)
{
    json arr = json::array();
    for (VertexIndex x = 0; x < t.size(); ++x)
        arr.push_back({g.name(x), t.attached_to_root(x) ? std::string(kRootName) : g.name(t.parent(x))});
    return arr;
}

/// One line per loop {"skeleton":[...],"holding":[...]}, then one
/// {"trivial_time":{...}} record. With a sample index every record also
/// carries "sample".
inline void write_ensemble_jsonl(const WeightedGraph& g, const LoopEnsemble& ens, std::ostream& out,
                                 std::optional<std::size_t> sample = std::nullopt)
{
    for (const auto& l : ens.loops) {
        json rec;
        if (sample)
            rec["sample"] = *sample;
        json names = json::array();
        for (VertexIndex x : l.skeleton)
            names.push_back(g.name(x));
        rec["skeleton"] = std::move(names);
        rec["holding"] = l.holding;
        out << rec.dump() << '\n';
    }
    json rec;
    if (sample)
        rec["sample"] = *sample;
    rec["trivial_time"] = json::object();
    for (VertexIndex x = 0; x < g.num_vertices(); ++x)
        rec["trivial_time"][g.name(x)] = ens.trivial_time.at(x);
    out << rec.dump() << '\n';
}

/// Reads records up to and including the next trivial_time record; nullopt at
/// end of input.
inline std::optional<LoopEnsemble> read_ensemble_jsonl(const WeightedGraph& g, std::istream& in)
{
    LoopEnsemble ens = empty_ensemble(g);
    std::string line;
    bool any = false;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        any = true;
        json rec = detail::parse_json(line, "ensemble record");
        try {
            if (rec.contains("trivial_time")) {
                for (const auto& [name, value] : rec.at("trivial_time").items())
                    ens.trivial_time.at(g.vertex(name)) = value.get<double>();
                validate_ensemble(g, ens);
                return ens;
            }
            Loop l;
            for (const auto& name : rec.at("skeleton"))
                l.skeleton.push_back(g.vertex(name.get<std::string>()));
            l.holding = rec.at("holding").get<std::vector<double>>();
            ens.loops.push_back(std::move(l));
        } catch (const json::exception& e) {
            throw ParseError(std::string("ensemble record: ") + e.what());
        }
    }
    if (any)
        throw ParseError("ensemble stream ended without a trivial_time record");
    return std::nullopt;
}

/// {"sweep":n,"tree":[edges],"crossings":{edge:count},"occupation":{vertex:time}}
inline json chain_state_json(const WeightedGraph& g, const RootedSpanningTree& t,
                             const LoopEnsemble& soup, std::size_t sweep)
{
    json rec;
    rec["sweep"] = sweep;
    rec["tree"] = tree_to_json(g, t);
    auto n = crossing_counts(g, soup);
    rec["crossings"] = json::object();
    for (EdgeIndex e = 0; e < g.num_edges(); ++e)
        rec["crossings"][g.edge_label(e)] = n[e];
    auto occ = occupation_field(g, soup);
    rec["occupation"] = json::object();
    for (VertexIndex x = 0; x < g.num_vertices(); ++x)
        rec["occupation"][g.name(x)] = occ[x];
    return rec;
}

} // namespace loopsoup
