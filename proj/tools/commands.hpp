#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "suites.hpp"

namespace loopsoup::cli
{

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

struct Options
{
    std::string graph;
    std::string group;
    std::string connection;
    std::string gamma = "uniform";
    std::string out;
    std::string format; ///< csv or jsonl; empty picks the command default
    std::string kind;
    std::string identity;
    std::string sampler = "soup";
    std::uint64_t seed = 1;
    std::size_t samples = 0; ///< 0 picks the command default
    std::size_t replicas = 1;
    std::size_t burnin = 1000;
    double beta = 0.5;
    double b = 1.0;
};

struct CommandResult
{
    std::string output;
    int code = kExitPass;
};

inline std::string format_or(const Options& opt, const char* fallback)
{
    return opt.format.empty() ? fallback : opt.format;
}

inline RunConfig run_config(const Options& opt, std::size_t default_samples)
{
    return {opt.seed, opt.samples ? opt.samples : default_samples, opt.replicas, opt.burnin};
}

inline std::string csv_quote(const std::string& s) { return "\"" + s + "\""; }

/// The named graph from --graph, or the listed built-in ones.
inline std::vector<NamedGraph> graphs_or(const Options& opt, std::initializer_list<const char*> defaults)
{
    if (!opt.graph.empty())
        return {{std::filesystem::path(opt.graph).stem().string(), load_graph(opt.graph)}};
    std::vector<NamedGraph> out;
    for (std::string name : defaults)
        out.push_back({name, name == "g1" ? fixtures::g1() : name == "g2" ? fixtures::g2() : fixtures::g3()});
    return out;
}

inline NamedGraph single_graph(const Options& opt, const char* fallback)
{
    return graphs_or(opt, {fallback}).front();
}

/// Cover inputs: --graph/--group/--connection, defaulting to g3 with Z/2 and
/// the connection flipping edge ab.
inline CoverCase cover_case(const Options& opt)
{
    if (!opt.connection.empty() && opt.group.empty())
        throw DomainError("--connection needs --group");
    NamedGraph ng = single_graph(opt, "g3");
    FiniteGroup grp = opt.group.empty() ? FiniteGroup::cyclic(2) : load_group(opt.group);
    if (!opt.connection.empty())
        return {ng, grp, load_connection(ng.graph, grp, opt.connection),
                std::filesystem::path(opt.connection).stem().string()};
    if (opt.group.empty() && opt.graph.empty()) {
        ConnectionRep m(ng.graph, grp);
        m.set(ng.graph, grp, ng.graph.vertex("a"), ng.graph.vertex("b"), 1);
        return {ng, grp, m, "flip_ab"};
    }
    return {ng, grp, ConnectionRep(ng.graph, grp), "trivial"};
}

inline GroupDistribution gamma_of(const Options& opt, const FiniteGroup& grp)
{
    return opt.gamma == "delta" ? delta_identity(grp) : uniform_distribution(grp);
}

inline CommandResult cmd_green(const Options& opt)
{
    auto g = load_graph(opt.graph);
    std::string out = "quantity,row,col,value\n";
    for (VertexIndex x = 0; x < g.num_vertices(); ++x)
        out += fmt::format("lambda,{},,{}\n", g.name(x), g.lambda()[x]);
    out += fmt::format("det,,,{}\n", det_energy(g).real());
    auto gm = green(g);
    for (VertexIndex x = 0; x < g.num_vertices(); ++x)
        for (VertexIndex y = 0; y < g.num_vertices(); ++y)
            out += fmt::format("G,{},{},{}\n", g.name(x), g.name(y),
                               gm(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)));
    return {out, kExitPass};
}

/// First global sample index of replica r.
inline std::size_t replica_offset(const RunConfig& cfg, std::size_t r)
{
    std::size_t off = 0;
    for (std::size_t k = 0; k < r; ++k)
        off += replica_share(cfg, k);
    return off;
}

inline std::string tree_frequency_csv(const WeightedGraph& g, const std::vector<RootedSpanningTree>& draws)
{
    auto trees = enumerate_rooted_trees(g);
    std::map<std::vector<VertexIndex>, std::size_t> index;
    for (std::size_t k = 0; k < trees.size(); ++k)
        index[trees[k].tree.parents()] = k;
    std::vector<std::uint64_t> counts(trees.size(), 0);
    for (const auto& t : draws)
        ++counts[index.at(t.parents())];
    std::string out = "tree,count,frequency,probability\n";
    for (std::size_t k = 0; k < trees.size(); ++k)
        out += fmt::format("{},{},{},{}\n", csv_quote(trees[k].tree.label(g)), counts[k],
                           static_cast<double>(counts[k]) / static_cast<double>(draws.size()),
                           tree_probability(g, trees[k].tree));
    return out;
}

inline CommandResult cmd_sample(const Options& opt)
{
    if (opt.graph.empty())
        throw DomainError("sample needs --graph");
    auto g = load_graph(opt.graph);
    auto cfg = run_config(opt, 1);
    auto fmt_kind = format_or(opt, "jsonl");
    const bool want_tree = opt.kind != "soup";
    const bool want_soup = opt.kind != "tree";
    SoupSampler soups(g);

    struct Draw
    {
        std::optional<RootedSpanningTree> tree;
        std::optional<LoopEnsemble> soup;
    };
    auto parts = fan_out(cfg, [&](RngStream& rng, std::size_t count, std::size_t) {
        std::vector<Draw> draws;
        for (std::size_t s = 0; s < count; ++s) {
            if (opt.kind == "tree")
                draws.push_back({sample_tree_wilson(g, rng), std::nullopt});
            else if (opt.kind == "soup")
                draws.push_back({std::nullopt, soups.sample(rng)});
            else {
                auto p = opt.kind == "pair" ? sample_pair(g, soups, rng) : sample_pair_extended_wilson(g, rng);
                draws.push_back({std::move(p.tree), std::move(p.soup)});
            }
        }
        return draws;
    });

    std::string out;
    if (fmt_kind == "csv" && opt.kind == "tree") {
        std::vector<RootedSpanningTree> trees;
        for (const auto& part : parts)
            for (const auto& d : part)
                trees.push_back(*d.tree);
        return {tree_frequency_csv(g, trees), kExitPass};
    }
    if (fmt_kind == "csv") {
        out = "sample";
        if (want_tree)
            out += ",tree";
        out += ",loops";
        for (const auto& name : g.names())
            out += ",occupation_" + name;
        out += "\n";
    }
    for (std::size_t r = 0; r < parts.size(); ++r) {
        std::size_t index = replica_offset(cfg, r);
        for (const auto& d : parts[r]) {
            if (fmt_kind == "jsonl") {
                if (want_tree) {
                    json rec;
                    rec["sample"] = index;
                    rec["tree"] = tree_to_json(g, *d.tree);
                    out += rec.dump() + "\n";
                }
                if (want_soup) {
                    std::ostringstream ss;
                    write_ensemble_jsonl(g, *d.soup, ss, index);
                    out += ss.str();
                }
            } else {
                out += fmt::format("{}", index);
                if (want_tree)
                    out += "," + csv_quote(d.tree->label(g));
                out += fmt::format(",{}", d.soup->loops.size());
                for (double v : occupation_field(g, *d.soup))
                    out += fmt::format(",{}", v);
                out += "\n";
            }
            ++index;
        }
    }
    return {out, kExitPass};
}

inline CommandResult cmd_verify(const Options& opt)
{
    auto cfg = run_config(opt, 100000);
    auto source = opt.sampler == "soup" ? SoupSource::direct : SoupSource::extended_wilson;
    std::vector<Row> rows;
    auto append = [&](std::vector<Row> more) { rows.insert(rows.end(), more.begin(), more.end()); };
    const auto& id = opt.identity;
    if (id == "eq1") {
        for (const auto& ng : graphs_or(opt, {"g1", "g2", "g3"}))
            append(verify_eq1(ng, cfg, source));
    } else if (id == "tree") {
        for (const auto& ng : graphs_or(opt, {"g2", "g3"}))
            rows.push_back(verify_tree_marginal(ng, cfg, source));
    } else if (id == "coupling") {
        for (const auto& ng : graphs_or(opt, {"g2", "g3"}))
            append(verify_pair_independence(ng, cfg));
    } else if (id == "eq3") {
        for (const auto& ng : graphs_or(opt, {"g2", "g3"}))
            append(verify_eq3(ng, cfg));
    } else if (id == "thm1") {
        append(verify_thm1(single_graph(opt, "g2"), opt.beta, cfg));
    } else if (id == "bstar") {
        append(verify_bstar(single_graph(opt, "g2"), opt.b, cfg));
    } else if (id == "eq4") {
        append(verify_eq4(cover_case(opt), cfg));
    } else if (id == "projection") {
        append(verify_projection(cover_case(opt), cfg));
    } else if (id == "zphi") {
        auto cc = cover_case(opt);
        rows.push_back(verify_zphi(cc, gamma_of(opt, cc.group), opt.gamma, cfg));
    } else {
        throw DomainError("unknown identity '" + id + "'");
    }
    auto text = format_or(opt, "csv") == "csv" ? format_rows_csv(rows) : format_rows_jsonl(rows);
    return {text, all_pass(rows) ? kExitPass : kExitFail};
}

/// Per-tree frequency rows (batch-means errors) and the chain chi-square row.
inline std::vector<Row> stationarity_rows(const WeightedGraph& g, const std::string& identity,
                                          const std::string& inputs, const std::vector<std::size_t>& seq,
                                          const std::vector<double>& probs)
{
    auto trees = enumerate_rooted_trees(g);
    std::vector<Row> rows;
    std::vector<double> indicator(seq.size());
    for (std::size_t k = 0; k < trees.size(); ++k) {
        for (std::size_t i = 0; i < seq.size(); ++i)
            indicator[i] = seq[i] == k ? 1.0 : 0.0;
        rows.push_back(mc_row(identity, inputs + ";tree=" + trees[k].tree.label(g), probs[k], batch_means(indicator)));
    }
    rows.push_back(chi_row(identity, inputs + ";tree-marginal", chi_square_chain(seq, probs)));
    return rows;
}

inline std::size_t tree_position(const std::map<std::vector<VertexIndex>, std::size_t>& index,
                                 const RootedSpanningTree& t)
{
    return index.at(t.parents());
}

inline CommandResult cmd_gibbs(const Options& opt)
{
    auto cfg = run_config(opt, 10000);
    auto fmt_kind = format_or(opt, "jsonl");
    const bool multi = cfg.replicas > 1;
    std::string out;
    std::vector<Row> rows;
    auto emit_state = [&](json rec, std::size_t r) {
        if (multi)
            rec["replica"] = r;
        if (fmt_kind == "jsonl")
            out += rec.dump() + "\n";
    };

    if (opt.kind == "phi") {
        auto cc = cover_case(opt);
        const auto& g = cc.graph.graph;
        const auto& grp = cc.group;
        auto gamma = gamma_of(opt, grp);
        auto chains = fan_out(cfg, [&](RngStream& rng, std::size_t count, std::size_t) {
            if (count == 0)
                return std::vector<NuPhiState>{};
            auto all = gibbs_nu_phi(g, grp, gamma, cfg.burnin + count, rng);
            return std::vector<NuPhiState>(all.begin() + static_cast<std::ptrdiff_t>(cfg.burnin), all.end());
        });
        auto trees = enumerate_rooted_trees(g);
        std::map<std::vector<VertexIndex>, std::size_t> index;
        for (std::size_t k = 0; k < trees.size(); ++k)
            index[trees[k].tree.parents()] = k;
        std::vector<std::size_t> seq;
        std::vector<double> support;
        std::vector<double> trivial;
        for (std::size_t r = 0; r < chains.size(); ++r)
            for (const auto& s : chains[r]) {
                seq.push_back(tree_position(index, s.tree));
                support.push_back(all_loops_trivial(g, grp, s.connection, s.soup) ? 1.0 : 0.0);
                trivial.push_back(s.connection.is_trivial(grp) ? 1.0 : 0.0);
                auto rec = chain_state_json(g, s.tree, s.soup, s.sweep);
                rec["connection"] = json::object();
                for (EdgeIndex a = 0; a < g.num_augmented_edges(); ++a)
                    if (g.has_augmented_edge(a))
                        rec["connection"][g.edge_label(a)] = s.connection.augmented(a);
                emit_state(std::move(rec), r);
            }
        std::string inputs = fmt::format("graph={};group={};gamma={}", cc.graph.name, grp.name(), opt.gamma);
        auto sup = mean_and_se(support);
        rows.push_back({"gibbs-phi", inputs + ";fraction of states with all loops trivial", 1.0, sup.mean, sup.se,
                        std::nullopt, sup.mean == 1.0});
        if (opt.gamma == "delta") {
            auto triv = mean_and_se(trivial);
            rows.push_back({"gibbs-phi", inputs + ";fraction of states with trivial connection", 1.0, triv.mean,
                            triv.se, std::nullopt, triv.mean == 1.0});
        }
        auto more = stationarity_rows(g, "gibbs-phi", inputs, seq, nu_phi_tree_marginal(g, grp, gamma));
        rows.insert(rows.end(), more.begin(), more.end());
    } else {
        auto ng = single_graph(opt, "g2");
        const auto& g = ng.graph;
        const bool beta = opt.kind == "beta";
        const double param = beta ? opt.beta : opt.b;
        auto chains = interaction_chains(g, beta ? InteractionKind::beta : InteractionKind::bstar, param, cfg);
        for (std::size_t r = 0; r < chains.size(); ++r)
            for (const auto& s : chains[r])
                emit_state(chain_state_json(g, s.tree, s.soup, s.sweep), r);
        std::string inputs = fmt::format("graph={};{}={}", ng.name, beta ? "beta" : "b", param);
        rows = stationarity_rows(g, "gibbs-" + opt.kind, inputs, tree_sequence(g, chains),
                                 beta ? thm1_tree_marginal(g, param) : bstar_tree_marginal(g, param));
    }

    if (fmt_kind == "jsonl") {
        std::istringstream lines(format_rows_jsonl(rows));
        for (std::string line; std::getline(lines, line);)
            out += "{\"stationarity\":" + line + "}\n";
    } else {
        out = format_rows_csv(rows);
    }
    return {out, all_pass(rows) ? kExitPass : kExitFail};
}

} // namespace loopsoup::cli
