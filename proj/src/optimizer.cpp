#include "cdl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "cdl/error.hpp"
#include "cdl/instances.hpp"
#include "cdl/numeric.hpp"
#include "cdl/parallel.hpp"

namespace cdl
{

// ---------------------------------------------------------------------------
// Objective

Objective::Objective(const Method& m, std::int64_t N, std::int64_t E)
    : _m(m), _N(N), _E(E), _two_e(2. * double(E))
{
    m.validate();
    if (E < 1)
        throw DomainError("objective needs at least one edge");
    if (m.kind == MethodKind::PlantedPartition)
    {
        double n = double(N);
        _pp_constant = log_factorial(n) + std::log(n) + std::log(double(E) + 1) +
                       std::log1p(n * (n - 1) / 2);
    }
}

double Objective::group(std::int64_t e_rr, std::int64_t e_r, std::int64_t n) const
{
    switch (_m.kind)
    {
    case MethodKind::Modularity:
    {
        double er = double(e_r);
        return (double(e_rr) - _m.gamma * er * er / _two_e) / _two_e;
    }
    case MethodKind::Infomap:
        return 2 * xlogx(double(e_r - e_rr) / _two_e) - xlogx(double(2 * e_r - e_rr) / _two_e);
    case MethodKind::PlantedPartition:
        return log_factorial(double(n));
    }
    return 0;
}

double Objective::global(std::int64_t E_in, std::int64_t B, std::int64_t sum_sq) const
{
    switch (_m.kind)
    {
    case MethodKind::Modularity:
        return 0;
    case MethodKind::Infomap:
        return -xlogx(double(_E - E_in) / double(_E));
    case MethodKind::PlantedPartition:
    {
        double n = double(_N);
        double within = double(sum_sq - _N) / 2, between = (n * n - double(sum_sq)) / 2;
        double graph = log_binomial(within, double(E_in)) +
                       log_binomial(between, double(_E - E_in));
        return -graph - log_binomial(n - 1, double(B) - 1) - _pp_constant;
    }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// WeightedGraph

WeightedGraph WeightedGraph::from_graph(const Graph& g)
{
    WeightedGraph w;
    std::size_t n = g.num_nodes();
    w.N = std::int64_t(n);
    w.E = std::int64_t(g.num_edges());
    w.size.assign(n, 1);
    w.inner.assign(n, 0);
    w.degree.resize(n);
    w.offsets.resize(n + 1);
    w.offsets[0] = 0;
    for (std::size_t v = 0; v < n; ++v)
    {
        auto nb = g.neighbors(node_t(v));
        w.degree[v] = std::int64_t(nb.size());
        w.offsets[v + 1] = w.offsets[v] + nb.size();
        w.targets.insert(w.targets.end(), nb.begin(), nb.end());
    }
    w.weights.assign(w.targets.size(), 1);
    return w;
}

WeightedGraph WeightedGraph::aggregate(std::span<const std::uint32_t> labels, std::size_t B) const
{
    WeightedGraph a;
    a.N = N;
    a.E = E;
    a.size.assign(B, 0);
    a.degree.assign(B, 0);
    a.inner.assign(B, 0);
    struct Arc
    {
        std::uint32_t from, to;
        std::int64_t w;
    };
    std::vector<Arc> arcs;
    for (std::size_t v = 0; v < num_vertices(); ++v)
    {
        std::uint32_t r = labels[v];
        a.size[r] += size[v];
        a.degree[r] += degree[v];
        a.inner[r] += inner[v];
        for (std::size_t j = offsets[v]; j < offsets[v + 1]; ++j)
        {
            std::uint32_t s = labels[targets[j]];
            if (s == r)
            {
                if (v < targets[j])
                    a.inner[r] += weights[j];
            }
            else
                arcs.push_back({r, s, weights[j]});
        }
    }
    std::sort(arcs.begin(), arcs.end(), [](const Arc& x, const Arc& y) {
        return std::tie(x.from, x.to) < std::tie(y.from, y.to);
    });
    a.offsets.assign(B + 1, 0);
    for (std::size_t i = 0; i < arcs.size(); ++i)
    {
        if (i > 0 && arcs[i].from == arcs[i - 1].from && arcs[i].to == arcs[i - 1].to)
        {
            a.weights.back() += arcs[i].w;
            continue;
        }
        a.targets.push_back(arcs[i].to);
        a.weights.push_back(arcs[i].w);
        a.offsets[arcs[i].from + 1]++;
    }
    std::partial_sum(a.offsets.begin(), a.offsets.end(), a.offsets.begin());
    return a;
}

// ---------------------------------------------------------------------------
// PartitionState

namespace
{

std::vector<std::uint32_t> state_labels(const Graph& g, std::span<const std::int64_t> labels)
{
    if (labels.empty())
    {
        std::vector<std::uint32_t> id(g.num_nodes());
        std::iota(id.begin(), id.end(), 0u);
        return id;
    }
    if (labels.size() != g.num_nodes())
        throw ValidationError("partition size does not match the graph");
    Partition p(labels);
    return {p.labels().begin(), p.labels().end()};
}

} // namespace

PartitionState::PartitionState(const Graph& g, const Method& m,
                               std::span<const std::int64_t> labels)
    : PartitionState(std::make_shared<const WeightedGraph>(WeightedGraph::from_graph(g)),
                     Objective(m, std::int64_t(g.num_nodes()), std::int64_t(g.num_edges())),
                     state_labels(g, labels))
{
}

PartitionState::PartitionState(std::shared_ptr<const WeightedGraph> g, const Objective& obj,
                               std::span<const std::uint32_t> labels)
    : _g(std::move(g)), _obj(obj), _label(labels.begin(), labels.end())
{
    std::size_t V = _g->num_vertices();
    if (_label.size() != V)
        throw ValidationError("label count does not match the graph");
    for (auto l : _label)
        if (l >= V)
            throw ValidationError("group id out of range");
    _scratch_w.assign(V, 0);
    refresh();
}

void PartitionState::refresh()
{
    const auto& g = *_g;
    std::size_t V = g.num_vertices();
    _n.assign(V, 0);
    _e_r.assign(V, 0);
    _e_rr.assign(V, 0);
    for (std::size_t v = 0; v < V; ++v)
    {
        std::uint32_t r = _label[v];
        _n[r] += g.size[v];
        _e_r[r] += g.degree[v];
        _e_rr[r] += 2 * g.inner[v];
        for (std::size_t j = g.offsets[v]; j < g.offsets[v + 1]; ++j)
            if (_label[g.targets[j]] == r)
                _e_rr[r] += g.weights[j]; // each internal arc seen from both ends
    }
    _active.clear();
    _free.clear();
    _active_pos.assign(V, -1);
    _B = 0;
    _E_in = 0;
    _sum_sq = 0;
    _groups_sum = 0;
    for (std::size_t r = V; r-- > 0;)
    {
        if (_n[r] == 0)
        {
            _free.push_back(std::uint32_t(r));
            continue;
        }
        ++_B;
        _E_in += _e_rr[r] / 2;
        _sum_sq += _n[r] * _n[r];
    }
    for (std::size_t r = 0; r < V; ++r)
        if (_n[r] > 0)
        {
            _active_pos[r] = std::int64_t(_active.size());
            _active.push_back(std::uint32_t(r));
            _groups_sum += group_term(std::uint32_t(r));
        }
    _global = _obj.global(_E_in, _B, _sum_sq);
}

double PartitionState::group_term(std::uint32_t r) const
{
    return _n[r] == 0 ? 0. : _obj.group(_e_rr[r], _e_r[r], _n[r]);
}

void PartitionState::activate(std::uint32_t r)
{
    _active_pos[r] = std::int64_t(_active.size());
    _active.push_back(r);
    auto it = std::find(_free.rbegin(), _free.rend(), r);
    _free.erase(std::next(it).base());
}

void PartitionState::deactivate(std::uint32_t r)
{
    auto pos = std::size_t(_active_pos[r]);
    _active[pos] = _active.back();
    _active_pos[_active[pos]] = std::int64_t(pos);
    _active.pop_back();
    _active_pos[r] = -1;
    _free.push_back(r);
}

std::optional<std::uint32_t> PartitionState::empty_group() const
{
    if (_free.empty())
        return std::nullopt;
    return _free.back();
}

std::span<const std::pair<std::uint32_t, std::int64_t>>
PartitionState::neighbor_groups(std::size_t v) const
{
    const auto& g = *_g;
    _scratch_list.clear();
    for (std::size_t j = g.offsets[v]; j < g.offsets[v + 1]; ++j)
    {
        std::uint32_t s = _label[g.targets[j]];
        if (_scratch_w[s] == 0)
            _scratch_list.emplace_back(s, 0);
        _scratch_w[s] += g.weights[j];
    }
    for (auto& [s, w] : _scratch_list)
    {
        w = _scratch_w[s];
        _scratch_w[s] = 0;
    }
    return _scratch_list;
}

double PartitionState::eval_move(std::size_t v, std::uint32_t s, std::int64_t k_vr,
                                 std::int64_t k_vs) const
{
    const auto& g = *_g;
    std::uint32_t r = _label[v];
    std::int64_t nv = g.size[v], dv = g.degree[v], in2 = 2 * g.inner[v];
    std::int64_t n_r = _n[r] - nv, n_s = _n[s] + nv;
    std::int64_t B = _B - (n_r == 0) + (_n[s] == 0);
    std::int64_t E_in = _E_in - k_vr + k_vs;
    std::int64_t sq = _sum_sq - _n[r] * _n[r] - _n[s] * _n[s] + n_r * n_r + n_s * n_s;
    double g_r = n_r == 0 ? 0. : _obj.group(_e_rr[r] - in2 - 2 * k_vr, _e_r[r] - dv, n_r);
    double g_s = _obj.group(_e_rr[s] + in2 + 2 * k_vs, _e_r[s] + dv, n_s);
    return _obj.global(E_in, B, sq) + _groups_sum - group_term(r) - group_term(s) + g_r + g_s;
}

double PartitionState::W_after_move(std::size_t v, std::uint32_t s) const
{
    std::uint32_t r = _label[v];
    if (s == r)
        return W();
    std::int64_t k_vr = 0, k_vs = 0;
    for (auto [t, w] : neighbor_groups(v))
    {
        if (t == r)
            k_vr = w;
        else if (t == s)
            k_vs = w;
    }
    return eval_move(v, s, k_vr, k_vs);
}

std::optional<std::pair<std::uint32_t, double>> PartitionState::best_move(std::size_t v,
                                                                          bool all_groups) const
{
    std::uint32_t r = _label[v];
    auto nb = neighbor_groups(v);
    std::int64_t k_vr = 0;
    for (auto [t, w] : nb)
    {
        if (t == r)
            k_vr = w;
        _scratch_w[t] = w;
    }
    std::optional<std::pair<std::uint32_t, double>> best;
    auto consider = [&](std::uint32_t s) {
        if (s == r)
            return;
        double w = eval_move(v, s, k_vr, _scratch_w[s]);
        if (!best || w > best->second)
            best = {s, w};
    };
    if (all_groups)
        for (auto s : _active)
            consider(s);
    else
        for (auto [s, w] : nb)
            consider(s);
    if (_n[r] > _g->size[v] && !_free.empty())
        consider(_free.back());
    for (auto [t, w] : nb)
        _scratch_w[t] = 0;
    return best;
}

void PartitionState::move(std::size_t v, std::uint32_t s)
{
    std::uint32_t r = _label[v];
    if (s == r)
        return;
    if (s >= _label.size())
        throw DomainError("group id out of range");
    const auto& g = *_g;
    std::int64_t k_vr = 0, k_vs = 0;
    for (auto [t, w] : neighbor_groups(v))
    {
        if (t == r)
            k_vr = w;
        else if (t == s)
            k_vs = w;
    }
    std::int64_t nv = g.size[v], in2 = 2 * g.inner[v];
    _groups_sum -= group_term(r) + group_term(s);
    _sum_sq -= _n[r] * _n[r] + _n[s] * _n[s];
    if (_n[s] == 0)
    {
        activate(s);
        ++_B;
    }
    _n[r] -= nv;
    _e_r[r] -= g.degree[v];
    _e_rr[r] -= in2 + 2 * k_vr;
    _n[s] += nv;
    _e_r[s] += g.degree[v];
    _e_rr[s] += in2 + 2 * k_vs;
    if (_n[r] == 0)
    {
        deactivate(r);
        --_B;
    }
    _sum_sq += _n[r] * _n[r] + _n[s] * _n[s];
    _E_in += k_vs - k_vr;
    _groups_sum += group_term(r) + group_term(s);
    _global = _obj.global(_E_in, _B, _sum_sq);
    _label[v] = s;
}

double PartitionState::W_after_merge(std::uint32_t r, std::uint32_t s, std::int64_t e_rs) const
{
    double merged = _obj.group(_e_rr[r] + _e_rr[s] + 2 * e_rs, _e_r[r] + _e_r[s], _n[r] + _n[s]);
    return _obj.global(_E_in + e_rs, _B - 1, _sum_sq + 2 * _n[r] * _n[s]) + _groups_sum -
           group_term(r) - group_term(s) + merged;
}

void PartitionState::merge(std::uint32_t r, std::uint32_t s, std::int64_t e_rs)
{
    if (r == s || _n[r] == 0 || _n[s] == 0)
        throw DomainError("merge needs two distinct nonempty groups");
    _groups_sum -= group_term(r) + group_term(s);
    _sum_sq += 2 * _n[r] * _n[s];
    _E_in += e_rs;
    _n[r] += _n[s];
    _e_r[r] += _e_r[s];
    _e_rr[r] += _e_rr[s] + 2 * e_rs;
    _n[s] = _e_r[s] = _e_rr[s] = 0;
    deactivate(s);
    --_B;
    for (auto& l : _label)
        if (l == s)
            l = r;
    _groups_sum += group_term(r);
    _global = _obj.global(_E_in, _B, _sum_sq);
}

std::vector<std::uint32_t> PartitionState::compact_labels() const
{
    std::vector<std::int64_t> map(_label.size(), -1);
    std::vector<std::uint32_t> out(_label.size());
    std::uint32_t next = 0;
    for (std::size_t v = 0; v < _label.size(); ++v)
    {
        auto& m = map[_label[v]];
        if (m < 0)
            m = next++;
        out[v] = std::uint32_t(m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Search

void OptimizerConfig::validate() const
{
    if (restarts < 1)
        throw DomainError("restarts must be >= 1");
    if (max_sweeps < 1)
        throw DomainError("max_sweeps must be >= 1");
    if (init_groups < 1)
        throw DomainError("init_groups must be >= 1");
    for (double b : anneal)
        if (!(b > 0) || !std::isfinite(b))
            throw DomainError("annealing schedule entries must be positive and finite");
}

namespace
{

using Rng = std::mt19937_64;

bool improves(double candidate, double current)
{
    if (std::isinf(current))
        return candidate > current;
    return candidate > current + 1e-12 * std::max(1., std::abs(current));
}

struct RestartRun
{
    std::vector<std::uint32_t> labels;
    std::vector<double> trace;
    int sweeps = 0;
};

// Best-move sweeps in random order until a sweep moves nothing.
std::int64_t local_moves(PartitionState& st, const OptimizerConfig& cfg, Rng& rng,
                         RestartRun& run)
{
    std::vector<std::size_t> order(st.graph().num_vertices());
    std::iota(order.begin(), order.end(), std::size_t(0));
    std::int64_t total = 0;
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep)
    {
        std::shuffle(order.begin(), order.end(), rng);
        std::int64_t moved = 0;
        for (std::size_t v : order)
        {
            bool all = st.num_groups() <= cfg.all_groups_limit;
            auto best = st.best_move(v, all);
            if (best && improves(best->second, st.W()))
            {
                st.move(v, best->first);
                ++moved;
            }
        }
        st.refresh();
        run.trace.push_back(st.W());
        ++run.sweeps;
        total += moved;
        if (moved == 0)
            break;
    }
    return total;
}

struct MergeCandidate
{
    std::uint32_t r, s;
    std::int64_t e_rs;
    double W;
};

// Highest-W pairwise merge of the current groups; with adjacent_only (or
// above all_groups_limit groups), pairs without edges between them are
// skipped.
std::optional<MergeCandidate> best_merge(const PartitionState& st, bool adjacent_only,
                                         std::int64_t all_groups_limit)
{
    const auto& g = st.graph();
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t> between;
    for (std::size_t v = 0; v < g.num_vertices(); ++v)
        for (std::size_t j = g.offsets[v]; j < g.offsets[v + 1]; ++j)
        {
            std::uint32_t r = st.label(v), s = st.label(g.targets[j]);
            if (r < s)
                between[{r, s}] += g.weights[j];
        }
    std::optional<MergeCandidate> best;
    auto consider = [&](std::uint32_t r, std::uint32_t s, std::int64_t e_rs) {
        double w = st.W_after_merge(r, s, e_rs);
        if (!best || w > best->W)
            best = MergeCandidate{r, s, e_rs, w};
    };
    if (!adjacent_only && st.num_groups() <= all_groups_limit)
    {
        std::vector<std::uint32_t> act(st.nonempty_groups().begin(), st.nonempty_groups().end());
        std::sort(act.begin(), act.end());
        for (std::size_t i = 0; i < act.size(); ++i)
            for (std::size_t j = i + 1; j < act.size(); ++j)
            {
                auto it = between.find({act[i], act[j]});
                consider(act[i], act[j], it == between.end() ? 0 : it->second);
            }
    }
    else
        for (auto& [rs, e] : between)
            consider(rs.first, rs.second, e);
    return best;
}

// Applies the best improving pairwise merge until none is left.
bool merge_phase(PartitionState& st, bool adjacent_only, std::int64_t all_groups_limit)
{
    bool any = false;
    for (;;)
    {
        auto best = best_merge(st, adjacent_only, all_groups_limit);
        if (!best || !improves(best->W, st.W()))
            return any;
        st.merge(best->r, best->s, best->e_rs);
        any = true;
    }
}

// Follows best merges down to a single group, through worse states, and
// keeps the best labelling met on the way. Crosses the barriers that stop
// single moves and improving merges (the planted-partition objective has
// many). Above all_groups_limit groups only adjacent pairs are merged.
bool merge_path(PartitionState& st, std::int64_t all_groups_limit)
{
    if (st.num_groups() < 2)
        return false;
    std::vector<std::uint32_t> start(st.labels().begin(), st.labels().end());
    double start_w = st.W(), best_w = start_w;
    std::vector<std::uint32_t> best_labels;
    while (st.num_groups() > 1)
    {
        auto m = best_merge(st, false, all_groups_limit);
        if (!m)
            break; // every remaining pair is nonadjacent above the limit
        st.merge(m->r, m->s, m->e_rs);
        if (improves(st.W(), best_w))
        {
            best_w = st.W();
            best_labels.assign(st.labels().begin(), st.labels().end());
        }
    }
    PartitionState restored(st.graph_ptr(), st.objective(),
                            best_labels.empty() ? start : best_labels);
    st = std::move(restored);
    return !best_labels.empty();
}

// Tries to bisect each group: a random member seeds a new group, then
// members move between the two halves while that improves W. A split is kept
// when the final W beats the unsplit state. Only below all_groups_limit
// groups.
bool split_phase(PartitionState& st, const OptimizerConfig& cfg, Rng& rng)
{
    if (st.num_groups() > cfg.all_groups_limit)
        return false;
    const std::size_t V = st.graph().num_vertices();
    std::vector<std::uint32_t> groups(st.nonempty_groups().begin(), st.nonempty_groups().end());
    std::sort(groups.begin(), groups.end());
    bool any = false;
    for (std::uint32_t r : groups)
    {
        std::vector<std::size_t> members;
        for (std::size_t v = 0; v < V; ++v)
            if (st.label(v) == r)
                members.push_back(v);
        if (members.size() < 2)
            continue;
        std::size_t tries = std::min<std::size_t>(members.size(), 4);
        for (std::size_t t = 0; t < tries; ++t)
        {
            PartitionState trial = st;
            auto fresh = trial.empty_group();
            if (!fresh)
                return any;
            std::uint32_t other = *fresh;
            std::shuffle(members.begin(), members.end(), rng);
            trial.move(members[0], other);
            for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep)
            {
                bool moved = false;
                for (std::size_t v : members)
                {
                    std::uint32_t to = trial.label(v) == r ? other : r;
                    if (trial.group_size(trial.label(v)) == trial.graph().size[v])
                        continue; // keep both halves nonempty
                    if (improves(trial.W_after_move(v, to), trial.W()))
                    {
                        trial.move(v, to);
                        moved = true;
                    }
                }
                if (!moved)
                    break;
            }
            if (improves(trial.W(), st.W()))
            {
                st = std::move(trial);
                any = true;
                break;
            }
        }
    }
    return any;
}

// One Metropolis step on set partitions (see posterior_sample).
void metropolis_step(PartitionState& st, double beta, Rng& rng)
{
    std::size_t V = st.graph().num_vertices();
    std::size_t v = std::uniform_int_distribution<std::size_t>(0, V - 1)(rng);
    std::uint32_t r = st.label(v);
    bool alone = st.group_size(r) == st.graph().size[v];
    auto act = st.nonempty_groups();
    std::size_t K = act.size() - (alone ? 1 : 0);
    std::size_t u = std::uniform_int_distribution<std::size_t>(0, K)(rng);
    std::uint32_t target;
    if (u == K)
    {
        if (alone)
            return;
        target = *st.empty_group();
    }
    else
    {
        target = act[u];
        if (alone && target == r)
            target = act[K]; // r's slot stands in for the last entry
        if (target == r)
            return;
    }
    double dW = st.W_after_move(v, target) - st.W();
    if (dW >= 0 || std::log(std::uniform_real_distribution<double>(0, 1)(rng)) < beta * dW)
        st.move(v, target);
}

// Multilevel: move vertices, then collapse groups into vertices, until the
// coarsest level no longer changes. Returns labels of the base vertices.
std::vector<std::uint32_t> multilevel(const std::shared_ptr<const WeightedGraph>& base,
                                      const Objective& obj, const OptimizerConfig& cfg,
                                      std::vector<std::uint32_t> labels, Rng& rng,
                                      RestartRun& run)
{
    std::vector<std::uint32_t> node_to_vertex(base->num_vertices());
    std::iota(node_to_vertex.begin(), node_to_vertex.end(), 0u);
    std::shared_ptr<const WeightedGraph> level = base;
    for (;;)
    {
        PartitionState st(level, obj, labels);
        local_moves(st, cfg, rng, run);
        auto compact = st.compact_labels();
        std::size_t B = std::size_t(st.num_groups());
        for (auto& x : node_to_vertex)
            x = compact[x];
        if (B == level->num_vertices())
            break;
        level = std::make_shared<const WeightedGraph>(level->aggregate(compact, B));
        labels.resize(B);
        std::iota(labels.begin(), labels.end(), 0u);
    }
    return node_to_vertex;
}

// The planted-partition objective rarely rewards a single move away from
// singletons or from one group, so local moves alone stall there. Even
// restarts seed it with a modularity partition (resolution 1 first, then
// log-uniform in [0.5, 8] to vary the group count) and refine from there.
constexpr double seed_gamma_lo = 0.5, seed_gamma_hi = 8;

RestartRun run_restart(const std::shared_ptr<const WeightedGraph>& base, const Objective& obj,
                       const OptimizerConfig& cfg, std::size_t index, std::uint64_t seed)
{
    Rng rng(seed);
    RestartRun run;
    std::size_t V = base->num_vertices();
    std::vector<std::uint32_t> labels(V);
    std::iota(labels.begin(), labels.end(), 0u);
    if (cfg.init == InitKind::RandomGroups)
    {
        auto top = std::uint32_t(std::min<std::int64_t>(cfg.init_groups, std::int64_t(V)) - 1);
        std::uniform_int_distribution<std::uint32_t> pick(0, top);
        for (auto& l : labels)
            l = pick(rng);
    }
    const bool seeded = obj.method().kind == MethodKind::PlantedPartition && index % 2 == 0;
    if (seeded)
    {
        double gamma = 1;
        if (index > 0)
            gamma = std::exp(std::uniform_real_distribution<double>(
                std::log(seed_gamma_lo), std::log(seed_gamma_hi))(rng));
        Objective seed_obj(Method::modularity(gamma), base->N, base->E);
        RestartRun scratch;
        labels = multilevel(base, seed_obj, cfg, labels, rng, scratch);
    }
    {
        PartitionState st(base, obj, labels);
        if (cfg.init == InitKind::Agglomerative && !seeded)
            merge_phase(st, true, cfg.all_groups_limit);
        for (double beta : cfg.anneal)
            for (std::size_t i = 0; i < V; ++i)
                metropolis_step(st, beta, rng);
        labels = st.compact_labels();
    }

    std::vector<std::uint32_t> node_to_vertex = multilevel(base, obj, cfg, labels, rng, run);

    // Refinement on the original graph: single-node moves, merges and splits.
    PartitionState st(base, obj, node_to_vertex);
    for (;;)
    {
        local_moves(st, cfg, rng, run);
        bool changed = merge_phase(st, false, cfg.all_groups_limit);
        if (!changed)
            changed = merge_path(st, cfg.all_groups_limit);
        if (!changed)
            changed = split_phase(st, cfg, rng);
        if (!changed)
            break;
        st.refresh();
        run.trace.push_back(st.W());
    }
    run.labels = st.compact_labels();
    return run;
}

Partition to_partition(std::span<const std::uint32_t> labels)
{
    std::vector<std::int64_t> l(labels.begin(), labels.end());
    return Partition(l);
}

} // namespace

OptResult maximize_quality(const Graph& g, const Method& m, const OptimizerConfig& cfg)
{
    cfg.validate();
    m.validate();
    if (g.num_edges() < 1)
        throw DomainError("optimization needs at least one edge");
    auto base = std::make_shared<const WeightedGraph>(WeightedGraph::from_graph(g));
    Objective obj(m, std::int64_t(g.num_nodes()), std::int64_t(g.num_edges()));

    std::vector<RestartRun> runs(std::size_t(cfg.restarts));
    std::vector<double> full(runs.size());
    parallel_for(runs.size(), cfg.threads, [&](std::size_t i) {
        runs[i] = run_restart(base, obj, cfg, i, derive_seed(cfg.seed, i));
        full[i] = quality(block_summary(g, to_partition(runs[i].labels)), m);
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < runs.size(); ++i)
        if (full[i] > full[best])
            best = i;
    OptResult r;
    r.partition = to_partition(runs[best].labels);
    r.W = full[best];
    r.sweeps = runs[best].sweeps;
    r.trace = std::move(runs[best].trace);
    r.restart = int(best);
    r.restart_W = std::move(full);
    return r;
}

std::vector<Partition> posterior_sample(const Graph& g, const Method& m, double beta,
                                        const PosteriorConfig& cfg)
{
    if (!std::isfinite(beta))
        throw DomainError("beta must be finite");
    if (cfg.sweeps < 1 || cfg.burn_in < 0 || cfg.thin < 1)
        throw DomainError("posterior sampling needs sweeps >= 1, burn_in >= 0, thin >= 1");
    PartitionState st(g, m, cfg.init);
    Rng rng(cfg.seed);
    std::size_t N = g.num_nodes();
    std::vector<Partition> out;
    for (int sweep = 0; sweep < cfg.burn_in + cfg.sweeps; ++sweep)
    {
        for (std::size_t i = 0; i < N; ++i)
            metropolis_step(st, beta, rng);
        if (sweep % 64 == 63)
            st.refresh();
        if (sweep >= cfg.burn_in && (sweep - cfg.burn_in) % cfg.thin == 0)
            out.push_back(to_partition(st.labels()));
    }
    return out;
}

double effective_b(const Partition& p)
{
    double N = double(p.num_nodes());
    if (N == 0)
        return 0;
    double h = 0;
    for (auto n : p.sizes())
        h -= xlogx(double(n) / N);
    return std::exp(h);
}

std::vector<double> default_gamma_grid()
{
    std::vector<double> out(25);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::pow(10., -2. + 4. * double(i) / 24.);
    return out;
}

GammaScan gamma_scan(const Graph& g, std::span<const double> gammas, const OptimizerConfig& cfg,
                     const GammaScanOptions& opts)
{
    if (gammas.empty())
        throw DomainError("gamma grid must be nonempty");
    GammaScan scan;
    for (double gamma : gammas)
    {
        Method m = Method::modularity(gamma);
        OptResult opt = maximize_quality(g, m, cfg);
        DlReport dl = opts.best_of_dc ? description_length_best_of(g, opt.partition, m, opts.dl)
                                      : description_length(g, opt.partition, m, opts.dl);
        GammaRecord rec;
        rec.gamma = gamma;
        rec.Q = opt.W;
        rec.sigma = dl.sigma;
        rec.B = std::int64_t(opt.partition.num_groups());
        rec.B_e = effective_b(opt.partition);
        rec.degree_corrected = dl.method.degree_corrected;
        rec.out_of_range = dl.has_flag("beta_clamped_high");
        rec.partition = std::move(opt.partition);
        scan.records.push_back(std::move(rec));
    }
    bool any_eligible = std::ranges::any_of(scan.records, [](const GammaRecord& r) {
        return !r.out_of_range;
    });
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < scan.records.size(); ++i)
    {
        const auto& r = scan.records[i];
        if (any_eligible && r.out_of_range)
            continue;
        if (!best || r.sigma < scan.records[*best].sigma)
            best = i;
    }
    scan.selected = *best;
    return scan;
}

} // namespace cdl
