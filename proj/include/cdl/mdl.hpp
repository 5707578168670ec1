#pragma once

// Description lengths of (graph, partition) pairs under the implicit model
// of a quality function, plus random-graph and planted-partition baselines.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cdl/dos.hpp"
#include "cdl/graph.hpp"
#include "cdl/quality.hpp"

namespace cdl
{

struct DlOptions
{
    GridOptions grid;
    double beta_max = 0;             // 0: 1e3 N
    bool allow_negative_beta = false; // search [-beta_max, beta_max]
    bool flat_degree_prior = false;  // multiset(N, 2E) instead of the hierarchical prior
};

struct Baselines
{
    double sigma_er = 0;            // ln C(C(N,2), E)
    double sigma_er_with_prior = 0; // plus ln(C(N,2)+1)
    double sigma_cm = 0;
    std::optional<double> sigma_pp; // when a partition is given
};

struct DlReport
{
    double sigma = 0;
    std::optional<double> beta_star; // absent for the planted-partition method
    double W = 0;
    double mean_W_at_beta = 0;
    Method method;
    std::vector<std::pair<std::string, double>> components; // sum to sigma
    Baselines baselines;
    bool overfit_er = false; // sigma > sigma_er (bare)
    bool overfit_cm = false; // sigma > sigma_cm
    std::vector<std::string> flags;
    std::string grid_config; // JSON, empty without a lattice

    bool has_flag(const std::string& f) const;
};

// Result of solving <W>_beta = W over the beta search interval.
struct BetaFit
{
    double beta = 0;
    double mean_W = 0;
    bool clamped_low = false;
    bool clamped_high = false;
};

// The implicit model of one method at fixed (N, E): its lattice, the beta
// search, and the prior terms that do not depend on the partition. Reusable
// across partitions and graphs with the same (N, E); degree-corrected models
// are bound to one degree sequence.
class ImplicitModel
{
public:
    ImplicitModel(std::int64_t N, std::int64_t E, Method m, DlOptions opts = {},
                  const DegreeStats* ds = nullptr);

    const PlantedGrid& grid() const { return *_grid; }
    const Method& method() const { return _method; }
    const DlOptions& options() const { return _opts; }
    std::int64_t N() const { return _N; }
    std::int64_t E() const { return _E; }
    double beta_max() const { return _beta_max; }
    double beta_min() const { return _opts.allow_negative_beta ? -_beta_max : 0.; }

    BetaFit fit_beta(double W) const;

    // -beta W + ln Z(beta) + priors.
    double sigma_at(double beta, double W) const;

    // Components, sigma and flags for quality value W (no baselines).
    DlReport describe(double W) const;

    // True when ds is the degree sequence this model was built for.
    bool matches(const DegreeStats& ds) const;

private:
    std::int64_t _N, _E;
    Method _method;
    DlOptions _opts;
    double _beta_max;
    std::unique_ptr<PlantedGrid> _grid;
    double _e_prior = 0;
    std::vector<std::pair<std::string, double>> _degree_terms;
    bool _q_approximate = false;
    std::vector<std::int64_t> _k; // degree sequence of a degree-corrected model
};

DlReport description_length(const Graph& g, const Partition& p, const Method& m,
                            const DlOptions& opts = {});
// Reuses model's lattice; g must have the model's (N, E) (and degree
// sequence when degree-corrected).
DlReport description_length(const Graph& g, const Partition& p, const ImplicitModel& model);

// Smaller of the plain and degree-corrected description lengths, without a
// penalty for the choice. The chosen variant is in report.method.
DlReport description_length_best_of(const Graph& g, const Partition& p, Method m,
                                    const DlOptions& opts = {});

double sigma_er(std::int64_t N, std::int64_t E);
double e_prior(std::int64_t N);
double sigma_cm(const Graph& g);
double sigma_cm(const DegreeStats& ds);
double sigma_pp(const Graph& g, const Partition& p);

// -ln P(k | E) for the degree sequence: hierarchical (histogram then
// sequence) or flat multiset prior. Named terms.
std::vector<std::pair<std::string, double>> degree_prior_terms(const DegreeStats& ds, bool flat);

Baselines baselines(const Graph& g, const Partition* p = nullptr);

} // namespace cdl
