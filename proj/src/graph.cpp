#include "cdl/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cdl/error.hpp"

namespace cdl
{

namespace
{

std::uint64_t pair_key(node_t u, node_t v)
{
    if (u > v)
        std::swap(u, v);
    return (std::uint64_t(u) << 32) | v;
}

// Splits a line into whitespace tokens, stripping '#' comments.
std::vector<std::string> tokenize(const std::string& line)
{
    auto end = line.find('#');
    std::istringstream ss(line.substr(0, end));
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t)
        toks.push_back(std::move(t));
    return toks;
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open '" + path + "'");
    return in;
}

} // namespace

Graph::Graph(std::size_t num_nodes, std::vector<Edge> edges, std::vector<std::string> names)
    : _edges(std::move(edges)), _names(std::move(names))
{
    if (_names.empty())
    {
        _names.reserve(num_nodes);
        for (std::size_t i = 0; i < num_nodes; ++i)
            _names.push_back(std::to_string(i));
    }
    if (_names.size() != num_nodes)
        throw ValidationError("node name count does not match node count");

    std::unordered_set<std::uint64_t> seen;
    seen.reserve(_edges.size() * 2);
    std::vector<std::size_t> deg(num_nodes, 0);
    for (auto& [u, v] : _edges)
    {
        if (u >= num_nodes || v >= num_nodes)
            throw ValidationError("edge endpoint out of range");
        if (u == v)
            throw ValidationError("self-loop at node '" + _names[u] + "'");
        if (!seen.insert(pair_key(u, v)).second)
            throw ValidationError("duplicate edge '" + _names[u] + "' -- '" +
                                  _names[v] + "'");
        ++deg[u];
        ++deg[v];
    }

    _offset.assign(num_nodes + 1, 0);
    for (std::size_t v = 0; v < num_nodes; ++v)
        _offset[v + 1] = _offset[v] + deg[v];
    _adj.resize(_offset.back());
    std::vector<std::size_t> pos(_offset.begin(), _offset.end() - 1);
    for (auto& [u, v] : _edges)
    {
        _adj[pos[u]++] = v;
        _adj[pos[v]++] = u;
    }
}

Graph load_edge_list(std::istream& in, LoadOptions opts, LoadStats* stats)
{
    std::unordered_map<std::string, node_t> index;
    std::vector<std::string> names;
    std::vector<Edge> edges;
    std::unordered_set<std::uint64_t> seen;
    LoadStats local;

    auto node = [&](const std::string& tok) {
        auto [it, inserted] = index.try_emplace(tok, node_t(names.size()));
        if (inserted)
            names.push_back(tok);
        return it->second;
    };

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        auto toks = tokenize(line);
        if (toks.empty())
            continue;
        if (toks.size() != 2)
            throw ParseError("expected two node tokens, found " +
                             std::to_string(toks.size()), lineno);
        node_t u = node(toks[0]);
        node_t v = node(toks[1]);
        if (u == v)
        {
            if (!opts.permissive)
                throw ValidationError("line " + std::to_string(lineno) +
                                      ": self-loop at node '" + toks[0] + "'");
            ++local.dropped_self_loops;
            continue;
        }
        if (!seen.insert(pair_key(u, v)).second)
        {
            if (!opts.permissive)
                throw ValidationError("line " + std::to_string(lineno) +
                                      ": duplicate edge '" + toks[0] + "' -- '" +
                                      toks[1] + "'");
            ++local.dropped_duplicates;
            continue;
        }
        edges.emplace_back(u, v);
    }
    if (stats)
        *stats = local;
    std::size_t n = names.size();
    return Graph(n, std::move(edges), std::move(names));
}

Graph load_edge_list_file(const std::string& path, LoadOptions opts, LoadStats* stats)
{
    auto in = open_input(path);
    return load_edge_list(in, opts, stats);
}

void write_edge_list(std::ostream& out, const Graph& g)
{
    const auto& names = g.names();
    for (auto [u, v] : g.edges())
        out << names[u] << ' ' << names[v] << '\n';
}

Partition::Partition(std::span<const std::int64_t> labels)
{
    std::unordered_map<std::int64_t, std::uint32_t> compact;
    _labels.reserve(labels.size());
    for (auto l : labels)
    {
        auto [it, inserted] = compact.try_emplace(l, std::uint32_t(_sizes.size()));
        if (inserted)
            _sizes.push_back(0);
        ++_sizes[it->second];
        _labels.push_back(it->second);
    }
}

Partition Partition::trivial(std::size_t n)
{
    std::vector<std::int64_t> labels(n, 0);
    return Partition(labels);
}

Partition load_partition(std::istream& in, const Graph& g)
{
    std::unordered_map<std::string, std::int64_t> label_ids;
    auto label_id = [&](const std::string& tok) {
        return label_ids.try_emplace(tok, std::int64_t(label_ids.size())).first->second;
    };

    std::size_t n = g.num_nodes();
    std::vector<std::int64_t> labels;
    std::vector<std::int64_t> by_name(n, -1);
    std::unordered_map<std::string, node_t> index;
    int columns = 0;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        auto toks = tokenize(line);
        if (toks.empty())
            continue;
        if (columns == 0)
        {
            columns = int(toks.size());
            if (columns > 2)
                throw ParseError("expected 'label' or 'node<TAB>label'", lineno);
            if (columns == 2)
                for (node_t v = 0; v < n; ++v)
                    index.emplace(g.names()[v], v);
        }
        if (int(toks.size()) != columns)
            throw ParseError("inconsistent column count", lineno);
        if (columns == 1)
        {
            labels.push_back(label_id(toks[0]));
            continue;
        }
        auto it = index.find(toks[0]);
        if (it == index.end())
            throw ValidationError("line " + std::to_string(lineno) + ": unknown node '" +
                                  toks[0] + "'");
        if (by_name[it->second] >= 0)
            throw ValidationError("line " + std::to_string(lineno) + ": node '" +
                                  toks[0] + "' labelled twice");
        by_name[it->second] = label_id(toks[1]);
    }

    if (columns == 2)
    {
        for (node_t v = 0; v < n; ++v)
            if (by_name[v] < 0)
                throw ValidationError("node '" + g.names()[v] + "' has no label");
        labels = std::move(by_name);
    }
    if (labels.size() != n)
        throw ValidationError("partition has " + std::to_string(labels.size()) +
                              " labels for " + std::to_string(n) + " nodes");
    return Partition(labels);
}

Partition load_partition_file(const std::string& path, const Graph& g)
{
    auto in = open_input(path);
    return load_partition(in, g);
}

void write_partition(std::ostream& out, const Graph& g, const Partition& p)
{
    if (p.num_nodes() != g.num_nodes())
        throw ValidationError("partition does not cover the graph");
    for (std::size_t v = 0; v < p.num_nodes(); ++v)
        out << g.names()[v] << '\t' << p[v] << '\n';
}

std::int64_t BlockSummary::N() const
{
    return std::accumulate(n_r.begin(), n_r.end(), std::int64_t(0));
}

BlockSummary block_summary(const Graph& g, const Partition& p)
{
    if (p.num_nodes() != g.num_nodes())
        throw ValidationError("partition covers " + std::to_string(p.num_nodes()) +
                              " nodes, graph has " + std::to_string(g.num_nodes()));
    BlockSummary s;
    s.B = std::int64_t(p.num_groups());
    s.E = std::int64_t(g.num_edges());
    s.e_rr.assign(s.B, 0);
    s.e_r.assign(s.B, 0);
    s.n_r.assign(p.sizes().begin(), p.sizes().end());
    for (auto [u, v] : g.edges())
    {
        auto r = p[u], t = p[v];
        ++s.e_r[r];
        ++s.e_r[t];
        if (r == t)
        {
            s.e_rr[r] += 2;
            ++s.E_in;
        }
    }
    return s;
}

BlockSummary planted_summary(std::int64_t E, std::int64_t E_in, std::int64_t B,
                             std::int64_t N)
{
    if (B < 1 || E_in < 0 || E_in > E || (2 * E) % B != 0 || (2 * E_in) % B != 0 ||
        N % B != 0)
        throw DomainError("planted_summary: (E, E_in, N) must split evenly into B groups");
    BlockSummary s;
    s.B = B;
    s.E = E;
    s.E_in = E_in;
    s.e_rr.assign(B, 2 * E_in / B);
    s.e_r.assign(B, 2 * E / B);
    s.n_r.assign(B, N / B);
    return s;
}

DegreeStats degree_stats(const Graph& g)
{
    DegreeStats d;
    d.E = std::int64_t(g.num_edges());
    d.k.resize(g.num_nodes());
    for (node_t v = 0; v < g.num_nodes(); ++v)
    {
        d.k[v] = std::int64_t(g.degree(v));
        ++d.eta[d.k[v]];
    }
    return d;
}

} // namespace cdl
