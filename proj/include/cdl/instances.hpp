#pragma once

// Samples of the implicit model's maximum-weight planted state: simple
// graphs with exactly E_in internal edges over a partition into B groups
// whose sizes differ by at most one.

#include <cstdint>
#include <optional>

#include "cdl/dos.hpp"
#include "cdl/graph.hpp"

namespace cdl
{

struct InstanceMeta
{
    std::optional<double> beta; // absent for direct planted-partition samples
    std::optional<Method> method;
    std::int64_t N = 0;
    std::int64_t E = 0;
    std::int64_t B = 0;
    std::int64_t E_in = 0;
    std::uint64_t seed = 0;
    bool equal_sizes = true; // false when B does not divide N
};

struct InstanceSample
{
    Graph graph;
    Partition partition;
    InstanceMeta meta;
};

// Independent stream seed for instance `index` of a batch.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Uniform simple graph with E_in distinct within-group pairs and E - E_in
// distinct between-group pairs. Nodes are assigned to groups by a seeded
// shuffle. Throws InfeasibleError when either count exceeds its capacity.
InstanceSample sample_pp(std::int64_t N, std::int64_t B, std::int64_t E, std::int64_t E_in,
                         std::uint64_t seed);

// Planted sample at the maximum-weight state of the grid's model at beta.
InstanceSample sample_instance(const PlantedGrid& grid, double beta, std::uint64_t seed);

} // namespace cdl
