#pragma once

// Maximization of block-summary quality functions over partitions, the
// Metropolis posterior sampler, and resolution scans of modularity scored by
// description length.

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "cdl/graph.hpp"
#include "cdl/mdl.hpp"
#include "cdl/quality.hpp"

namespace cdl
{

// W = global(E_in, B, sum_r n_r^2) + sum_r group(e_rr, e_r, n_r), with e_rr
// twice the internal edge count and e_r the degree sum, as in BlockSummary.
// Empty groups contribute zero.
class Objective
{
public:
    Objective(const Method& m, std::int64_t N, std::int64_t E);

    double group(std::int64_t e_rr, std::int64_t e_r, std::int64_t n) const;
    // -inf for unattainable states of the planted-partition objective.
    double global(std::int64_t E_in, std::int64_t B, std::int64_t sum_sq_sizes) const;

    const Method& method() const { return _m; }

private:
    Method _m;
    std::int64_t _N, _E;
    double _two_e;
    double _pp_constant = 0; // planted-partition terms fixed by (N, E)
};

// Multigraph of supernodes: each carries a node count, a degree sum and an
// internal edge count; edges between distinct supernodes are weighted.
struct WeightedGraph
{
    std::vector<std::int64_t> size;
    std::vector<std::int64_t> degree;
    std::vector<std::int64_t> inner;
    std::vector<std::size_t> offsets; // CSR, both directions stored
    std::vector<std::uint32_t> targets;
    std::vector<std::int64_t> weights;
    std::int64_t E = 0;
    std::int64_t N = 0;

    static WeightedGraph from_graph(const Graph& g);
    std::size_t num_vertices() const { return size.size(); }
    // Supernodes = groups of labels (compact ids in [0, B)).
    WeightedGraph aggregate(std::span<const std::uint32_t> labels, std::size_t B) const;
};

// Group statistics of a labelling of a WeightedGraph, maintained under
// single-vertex moves and group merges. Group ids lie in
// [0, num_vertices()); unused ids are empty groups.
class PartitionState
{
public:
    PartitionState(const Graph& g, const Method& m, std::span<const std::int64_t> labels = {});
    PartitionState(std::shared_ptr<const WeightedGraph> g, const Objective& obj,
                   std::span<const std::uint32_t> labels);

    double W() const { return _global + _groups_sum; }
    std::int64_t num_groups() const { return _B; }
    std::int64_t E_in() const { return _E_in; }
    std::uint32_t label(std::size_t v) const { return _label[v]; }
    std::span<const std::uint32_t> labels() const { return _label; }
    const WeightedGraph& graph() const { return *_g; }
    const std::shared_ptr<const WeightedGraph>& graph_ptr() const { return _g; }
    const Objective& objective() const { return _obj; }

    // W after moving v to group s (s may be an empty group id).
    double W_after_move(std::size_t v, std::uint32_t s) const;
    // Best target for v other than its own group: neighbouring groups, every
    // nonempty group when all_groups, and an empty group unless v is alone.
    // nullopt when there is no other candidate.
    std::optional<std::pair<std::uint32_t, double>> best_move(std::size_t v, bool all_groups) const;
    void move(std::size_t v, std::uint32_t s);

    // Some empty group id, or none when every id is in use.
    std::optional<std::uint32_t> empty_group() const;
    std::span<const std::uint32_t> nonempty_groups() const { return _active; }
    std::int64_t group_size(std::uint32_t r) const { return _n[r]; }

    // Edge weight from v to each group it touches, excluding v itself.
    // Valid until the next call; pairs of (group, weight).
    std::span<const std::pair<std::uint32_t, std::int64_t>> neighbor_groups(std::size_t v) const;

    double W_after_merge(std::uint32_t r, std::uint32_t s, std::int64_t e_rs) const;
    void merge(std::uint32_t r, std::uint32_t s, std::int64_t e_rs); // s into r

    // Labels compacted to [0, B) in order of first appearance.
    std::vector<std::uint32_t> compact_labels() const;
    // Recomputes every sum from scratch (drift control).
    void refresh();

private:
    double group_term(std::uint32_t r) const;
    double eval_move(std::size_t v, std::uint32_t s, std::int64_t k_vr, std::int64_t k_vs) const;
    void activate(std::uint32_t r);
    void deactivate(std::uint32_t r);

    std::shared_ptr<const WeightedGraph> _g;
    Objective _obj;
    std::vector<std::uint32_t> _label;
    std::vector<std::int64_t> _n, _e_r, _e_rr;
    std::vector<std::uint32_t> _active;   // nonempty group ids
    std::vector<std::int64_t> _active_pos; // -1 when empty
    std::vector<std::uint32_t> _free;     // empty group ids
    std::int64_t _B = 0, _E_in = 0, _sum_sq = 0;
    double _global = 0, _groups_sum = 0;
    mutable std::vector<std::int64_t> _scratch_w;
    mutable std::vector<std::pair<std::uint32_t, std::int64_t>> _scratch_list;
};

enum class InitKind
{
    Singletons,   // multilevel from singletons
    RandomGroups, // uniform random labels in [0, init_groups)
    Agglomerative // greedy pairwise merges from singletons
};

struct OptimizerConfig
{
    int restarts = 8;
    int max_sweeps = 200;            // per local-move phase
    std::vector<double> anneal;      // beta schedule, one Metropolis sweep each
    std::uint64_t seed = 1;
    InitKind init = InitKind::Singletons;
    std::int64_t init_groups = 10;
    std::int64_t all_groups_limit = 256; // consider every group as a target up to this B
    unsigned threads = 0;

    // Throws DomainError for restarts < 1, max_sweeps < 1 or a nonpositive
    // schedule entry.
    void validate() const;
};

struct OptResult
{
    Partition partition;
    double W = 0;            // full re-evaluation of the returned partition
    int sweeps = 0;          // sweeps of the winning restart
    std::vector<double> trace; // best W after each sweep of the winning restart
    int restart = 0;
    std::vector<double> restart_W;
};

OptResult maximize_quality(const Graph& g, const Method& m, const OptimizerConfig& cfg = {});

struct PosteriorConfig
{
    int sweeps = 1000;
    int burn_in = 100;
    int thin = 1;
    std::uint64_t seed = 1;
    std::vector<std::int64_t> init; // empty: singletons
};

// Single-vertex Metropolis chain on set partitions. The proposal places a
// random node into one of the blocks of the rest of the partition or into a
// block of its own, uniformly; it is symmetric, so with acceptance
// min(1, exp(beta dW)) the chain samples P(b | A, beta) ~ exp(beta W).
std::vector<Partition> posterior_sample(const Graph& g, const Method& m, double beta,
                                        const PosteriorConfig& cfg = {});

// exp of the entropy of the group-size distribution.
double effective_b(const Partition& p);

struct GammaRecord
{
    double gamma = 0;
    double Q = 0;
    double sigma = 0;
    std::int64_t B = 0; // nonempty groups
    double B_e = 0;
    bool degree_corrected = false;
    // Q lies above what the implicit model reaches (beta fit clamped high):
    // the code length is unbounded below there, so the record is not
    // eligible for selection.
    bool out_of_range = false;
    Partition partition;
};

struct GammaScanOptions
{
    DlOptions dl;
    bool best_of_dc = false; // score each gamma with the better of plain and degree-corrected
};

struct GammaScan
{
    std::vector<GammaRecord> records;
    // argmin sigma over eligible records, first on ties; over all records
    // when none is eligible.
    std::size_t selected = 0;
};

std::vector<double> default_gamma_grid();

GammaScan gamma_scan(const Graph& g, std::span<const double> gammas,
                     const OptimizerConfig& cfg = {}, const GammaScanOptions& opts = {});

} // namespace cdl
