#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cdl
{

using node_t = std::uint32_t;
using Edge = std::pair<node_t, node_t>;

// Undirected simple graph with compressed adjacency and stable node names.
class Graph
{
public:
    Graph() = default;

    // Edges must be simple: no self-loops and no repeated pair (in either
    // orientation). Throws ValidationError otherwise. Empty names yield
    // "0".."N-1".
    Graph(std::size_t num_nodes, std::vector<Edge> edges,
          std::vector<std::string> names = {});

    std::size_t num_nodes() const { return _names.size(); }
    std::size_t num_edges() const { return _edges.size(); }

    std::span<const node_t> neighbors(node_t v) const
    {
        return {_adj.data() + _offset[v], _adj.data() + _offset[v + 1]};
    }
    std::size_t degree(node_t v) const { return _offset[v + 1] - _offset[v]; }
    std::span<const Edge> edges() const { return _edges; }
    const std::vector<std::string>& names() const { return _names; }

private:
    std::vector<Edge> _edges;
    std::vector<std::size_t> _offset;
    std::vector<node_t> _adj;
    std::vector<std::string> _names;
};

struct LoadOptions
{
    // Drop self-loops and duplicate edges (counted) instead of rejecting.
    bool permissive = false;
};

struct LoadStats
{
    std::size_t dropped_self_loops = 0;
    std::size_t dropped_duplicates = 0;
};

// Whitespace-separated node token pairs, one per line; '#' starts a comment.
// Nodes are indexed in order of first appearance.
Graph load_edge_list(std::istream& in, LoadOptions opts = {}, LoadStats* stats = nullptr);
Graph load_edge_list_file(const std::string& path, LoadOptions opts = {},
                          LoadStats* stats = nullptr);
void write_edge_list(std::ostream& out, const Graph& g);

// Node labels in [0, B), contiguous: every group is nonempty.
class Partition
{
public:
    Partition() = default;

    // Arbitrary integer labels, compacted in order of first appearance.
    explicit Partition(std::span<const std::int64_t> labels);
    explicit Partition(const std::vector<std::int64_t>& labels)
        : Partition(std::span<const std::int64_t>(labels)) {}

    static Partition trivial(std::size_t n);

    std::size_t num_nodes() const { return _labels.size(); }
    std::size_t num_groups() const { return _sizes.size(); }
    std::uint32_t operator[](std::size_t v) const { return _labels[v]; }
    std::span<const std::uint32_t> labels() const { return _labels; }
    std::span<const std::int64_t> sizes() const { return _sizes; }

    bool operator==(const Partition&) const = default;

private:
    std::vector<std::uint32_t> _labels;
    std::vector<std::int64_t> _sizes;
};

// Either one label per line in node order, or "node<TAB>label" lines naming
// every node of g. Labels are arbitrary tokens, compacted on load.
Partition load_partition(std::istream& in, const Graph& g);
Partition load_partition_file(const std::string& path, const Graph& g);
// Writes "node<TAB>label" lines.
void write_partition(std::ostream& out, const Graph& g, const Partition& p);

// Sufficient statistics of a partitioned graph.
struct BlockSummary
{
    std::int64_t B = 0;
    std::int64_t E = 0;
    std::int64_t E_in = 0;
    std::vector<std::int64_t> e_rr; // within-group edge endpoints (2x edges)
    std::vector<std::int64_t> e_r;  // group degree sums
    std::vector<std::int64_t> n_r;  // group sizes

    std::int64_t N() const;
};

BlockSummary block_summary(const Graph& g, const Partition& p);

// Equal-size, equal-density summary of the planted partition form.
BlockSummary planted_summary(std::int64_t E, std::int64_t E_in, std::int64_t B,
                             std::int64_t N);

struct DegreeStats
{
    std::vector<std::int64_t> k;           // per node
    std::map<std::int64_t, std::int64_t> eta; // degree -> count
    std::int64_t E = 0;

    std::int64_t N() const { return std::int64_t(k.size()); }
};

DegreeStats degree_stats(const Graph& g);

} // namespace cdl
