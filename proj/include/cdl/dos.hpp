#pragma once

// The (B, E_in) lattice of planted-partition states: counts, density of
// states, partition function and maximum-weight states.
//
// Rows of the lattice sit at a grid of group counts B; within a row, E_in is
// sampled on a stride that tightens near the ends of the feasible range.
// Sums over the skipped integers use log-linear interpolation between
// neighbouring samples (in E_in within a row, in B between rows), so that
// d ln Z / d beta equals the reported mean quality exactly.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cdl/graph.hpp"
#include "cdl/quality.hpp"

namespace cdl
{

// ln of the number of (graph, equal-size labelled partition) pairs with E
// edges, E_in of them internal, N nodes in B groups. Real-extended.
double log_omega(std::int64_t N, std::int64_t E, double E_in, double B);

// Degree-corrected count; sum_log_k_factorial is sum_i ln k_i!.
double log_omega_dc(std::int64_t N, std::int64_t E, double E_in, double B,
                    double sum_log_k_factorial);
double log_omega_dc(std::int64_t N, std::int64_t E, double E_in, double B,
                    const DegreeStats& ds);

double sum_log_degree_factorials(const DegreeStats& ds);

enum class StorageMode
{
    Auto,         // materialize below a cell budget
    Materialized, // cache every row's samples
    Streamed,     // recompute rows on every pass
};

struct GridOptions
{
    std::int64_t b_max = 0;            // 0: N
    std::int64_t b_dense = 200;        // every integer B up to here
    double b_ratio = 1.02;             // geometric spacing beyond b_dense
    std::int64_t ein_stride = 0;       // 0: max(1, E / 5000)
    double boundary_refinement = 0.1;  // step ~ sqrt(k d) at distance d from a range end
    std::vector<std::int64_t> b_values; // explicit B grid; overrides the spacing fields
    StorageMode storage = StorageMode::Auto;
    unsigned threads = 0;              // 0: hardware concurrency
};

struct GridRow
{
    std::int64_t B = 0;
    std::vector<double> ein;       // strictly increasing, integral, within the feasible range
    std::vector<double> log_omega;
    std::vector<double> w;
};

class PlantedGrid
{
public:
    // dc: degree statistics for the degree-corrected count, required iff
    // m.degree_corrected. m must have a planted form.
    PlantedGrid(std::int64_t N, std::int64_t E, Method m, GridOptions opts = {},
                const DegreeStats* dc = nullptr);

    std::int64_t N() const { return _N; }
    std::int64_t E() const { return _E; }
    const Method& method() const { return _method; }
    bool degree_corrected() const { return _method.degree_corrected; }
    std::int64_t ein_stride() const { return _stride; }
    const GridOptions& options() const { return _opts; }
    const std::vector<std::int64_t>& b_values() const { return _b; }
    std::size_t num_rows() const { return _b.size(); }
    bool materialized() const { return !_rows.empty(); }
    std::size_t num_cells() const;

    // Integer E_in range with nonzero count at B; nullopt when empty.
    std::optional<std::pair<std::int64_t, std::int64_t>> feasible_range(std::int64_t B) const;

    double log_weight(double E_in, double B) const;
    double quality(double E_in, double B) const;

    // Samples of row i: the cached row, or one built into scratch.
    const GridRow& row(std::size_t i, GridRow& scratch) const;
    GridRow build_row(std::int64_t B) const;

    std::string config_json() const;

private:
    std::int64_t _N, _E;
    Method _method;
    GridOptions _opts;
    double _sum_log_kfact = 0;
    std::int64_t _stride = 1;
    std::vector<std::int64_t> _b;
    std::vector<GridRow> _rows;
};

// Default B grid: 1..b_dense, then geometric steps; when b_max = N the
// spacing is mirrored so that B near N is as finely resolved as B near 1.
std::vector<std::int64_t> default_b_grid(std::int64_t b_max, std::int64_t N,
                                         std::int64_t b_dense, double ratio);

struct Evaluation
{
    double beta = 0;
    double log_Z = 0;
    double mean_W = 0;
    double mean_B = 0;
    double mean_ein = 0;
    // Per grid row: log mass of the single integer B = b_values[i], and of
    // the integer span [b_values[i], b_values[i+1]) it represents.
    std::vector<double> row_log_mass;
    std::vector<double> row_log_span_mass;
    std::vector<double> row_mean_w;
};

// ln Z(beta), <W>, <B> and per-row marginals in one pass. Throws
// NumericError when every cell is infeasible.
Evaluation evaluate(double beta, const PlantedGrid& grid);
double log_partition_function(double beta, const PlantedGrid& grid);
double mean_quality(double beta, const PlantedGrid& grid);

struct ArgmaxState
{
    double W_star = 0;
    std::int64_t B_star = 0;
    std::int64_t E_in_star = 0;
    double log_weight = 0; // beta W + ln Omega at the state
};

// Maximizer of beta W + ln Omega over integer (B, E_in). Rows are maximized
// exactly in E_in (the weight is concave there); B is refined to every
// integer between the grid neighbours of the best rows.
ArgmaxState argmax_state(double beta, const PlantedGrid& grid);

struct DosHistogram
{
    double beta = 0;
    std::vector<double> edges;                 // bins + 1 values of W
    std::vector<double> log_xi;                // per bin, all B
    std::vector<std::int64_t> b_values;        // grid rows
    std::vector<std::vector<double>> log_xi_b; // [bin][row], integer B only
    std::vector<double> mean_b;                // per bin, NaN when empty

    std::size_t bins() const { return log_xi.size(); }
    double center(std::size_t k) const { return (edges[k] + edges[k + 1]) / 2; }
};

// Density of states binned in W (beta = 0), or the beta-weighted joint
// histogram. With unweight, cells are accumulated with weight beta W and
// then divided by it again, so mean_b is computed from beta-weighted passes
// but must not depend on beta.
DosHistogram dos_histogram(const PlantedGrid& grid, std::size_t bins, double beta = 0,
                           bool unweight = false);

// CSV with a "# {config}" header line; per-B columns when with_b.
void write_dos_csv(std::ostream& out, const DosHistogram& h, const PlantedGrid& grid,
                   bool with_b = false, double log_ref = 0);

} // namespace cdl
