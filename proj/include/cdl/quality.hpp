#pragma once

// Quality functions W(e, n) of a partitioned graph and their restrictions to
// equal-size, equal-density (planted) block summaries.

#include <cstdint>
#include <string>

#include "cdl/graph.hpp"

namespace cdl
{

enum class MethodKind
{
    Modularity,
    Infomap,
    // Flat planted-partition description length; W = -sigma_pp. Has no
    // implicit-model density of states.
    PlantedPartition,
};

struct Method
{
    MethodKind kind = MethodKind::Modularity;
    double gamma = 1.0;            // modularity resolution; ignored otherwise
    bool degree_corrected = false; // affects description lengths only

    static Method modularity(double gamma = 1.0, bool dc = false)
    {
        return {MethodKind::Modularity, gamma, dc};
    }
    static Method infomap(bool dc = false) { return {MethodKind::Infomap, 1.0, dc}; }
    static Method planted_partition() { return {MethodKind::PlantedPartition, 1.0, false}; }

    // Throws DomainError for gamma <= 0 with modularity.
    void validate() const;

    bool has_planted_form() const { return kind != MethodKind::PlantedPartition; }
    bool operator==(const Method&) const = default;
};

// "modularity", "infomap" or "pp".
std::string method_name(MethodKind kind);
MethodKind parse_method_name(const std::string& name);

// Q = (1/2E) sum_r [e_rr - gamma e_r^2 / 2E]. Throws NumericError for E = 0.
double modularity(const BlockSummary& s, double gamma);

// Sign-flipped two-level map equation without the degree-entropy term.
// Throws NumericError for E = 0.
double infomap_score(const BlockSummary& s);

// Additive terms of the flat planted-partition description length.
struct PlantedPartitionTerms
{
    double graph = 0;       // edge placement given (E_in, E, n_r)
    double labels = 0;      // ln N! / prod_r n_r!
    double composition = 0; // ln C(N-1, B-1)
    double b_prior = 0;     // ln N
    double ein_prior = 0;   // ln (E+1)
    double e_prior = 0;     // ln (C(N,2)+1)

    double total() const
    {
        return graph + labels + composition + b_prior + ein_prior + e_prior;
    }
};

PlantedPartitionTerms planted_partition_terms(const BlockSummary& s);

// Flat planted-partition description length (nats) of a block summary:
// uniform edge placement within and between groups given (E_in, E, n_r),
// uniform labelling given the sizes, uniform composition of N into B sizes,
// and uniform priors on B in [1, N], E_in in [0, E] and E in [0, C(N,2)].
// Throws InfeasibleError when E_in or E - E_in exceeds its pair capacity.
double planted_partition_dl(const BlockSummary& s);

// Dispatch on m.kind. PlantedPartition evaluates -sigma_pp from the summary.
double quality(const BlockSummary& s, const Method& m);

// Planted forms, with E_in real so that lattice interpolation stays smooth.
double q_pp(double E_in, std::int64_t E, double B, double gamma);
double l_pp(double E_in, std::int64_t E, double B);
double w_pp(double E_in, std::int64_t E, double B, const Method& m);

// Inverse of q_pp in E_in. Throws InfeasibleError if the result leaves [0, E].
double ein_from_q(double Q, std::int64_t E, double B, double gamma);

// Inverse of l_pp in E_in by bisection on x = E_in / E with absolute
// tolerance tol in x. Throws InfeasibleError if L lies outside
// [l_pp(0, E, B), l_pp(E, E, B)].
double ein_from_l(double L, std::int64_t E, double B, double tol = 1e-12);

} // namespace cdl
