// validate: Monte Carlo checks of the fluctuations of Q and L in random
// mixing matrices.

#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <set>

#include "cdl/error.hpp"
#include "cdl/metrics.hpp"

namespace cli
{

namespace
{

const std::vector<std::string> all_checks{"q_mean", "q_variance_band", "q_variance_exact",
                                          "q_gamma0", "l_slope"};

struct ValidateArgs
{
    std::vector<std::string> checks;
    bool quick = false;
    std::uint64_t seed = 1;
    std::int64_t q_trials = 0; // 0: 20000, or 2000 with --quick
    std::int64_t l_trials = 0; // 0: 200, or 40 with --quick
    double gamma = 1;
    unsigned threads = 0;
    std::string l_table;
    OutputFlags out;
};

struct Tolerances
{
    double mean_se;        // |mean - first-order mean| <= this many standard errors
    double variance_rel;   // relative error of the chi-square variance form
    double band_lo, band_hi;
    double slope_max;
};

// --quick trades trials for wider mean and variance tolerances; the band and
// slope limits are properties of the ensemble and stay fixed.
Tolerances tolerances(bool quick)
{
    if (quick)
        return {4, 0.15, 0.5, 2, -0.5};
    return {3, 0.05, 0.5, 2, -0.5};
}

json check_json(const std::string& name, bool pass, json detail)
{
    json j;
    j["name"] = name;
    j["pass"] = pass;
    j["detail"] = std::move(detail);
    return j;
}

void run_validate(const ValidateArgs& a)
{
    std::set<std::string> wanted(a.checks.begin(), a.checks.end());
    if (wanted.empty())
        wanted.insert(all_checks.begin(), all_checks.end());
    for (const auto& c : wanted)
        if (std::find(all_checks.begin(), all_checks.end(), c) == all_checks.end())
            throw UsageError("unknown check " + c);
    if (!(a.gamma > 0) || !std::isfinite(a.gamma))
        throw UsageError("--gamma must be positive");
    const std::int64_t q_trials = a.q_trials ? a.q_trials : (a.quick ? 2000 : 20000);
    const std::int64_t l_trials = a.l_trials ? a.l_trials : (a.quick ? 40 : 200);
    if (q_trials < 1000 || l_trials < 2)
        throw UsageError("--q-trials must be >= 1000 and --l-trials >= 2");
    const Tolerances tol = tolerances(a.quick);

    json config;
    config["subcommand"] = "validate";
    config["version"] = tool_version;
    config["checks"] = std::vector<std::string>(wanted.begin(), wanted.end());
    config["quick"] = a.quick;
    config["seed"] = a.seed;
    config["q_trials"] = q_trials;
    config["l_trials"] = l_trials;
    config["gamma"] = a.gamma;
    config["threads"] = a.threads;
    config["tolerances"] = {{"mean_standard_errors", tol.mean_se},
                            {"variance_relative", tol.variance_rel},
                            {"variance_band", {tol.band_lo, tol.band_hi}},
                            {"l_slope_max", tol.slope_max}};
    config["l_table"] = a.l_table.empty() ? json(nullptr) : json(a.l_table);

    json checks = json::array();
    Table q_table{{"E", "B", "E_in", "gamma", "mean_Q", "expected_mean", "standard_error",
                   "var_Q", "expected_var", "var_E_B_over_gamma2"},
                  {}};
    const bool any_q = wanted.count("q_mean") || wanted.count("q_variance_band") ||
                       wanted.count("q_variance_exact");
    if (any_q)
    {
        bool mean_ok = true, band_ok = true, exact_ok = true;
        std::uint64_t index = 0;
        for (std::int64_t E : {1000, 10000})
            for (std::int64_t B : {5, 20})
            {
                const std::int64_t E_in = E / 2;
                cdl::QMoments mo = cdl::appendix_q_moments(
                    E, B, E_in, a.gamma, q_trials, cdl::derive_seed(a.seed, index++), a.threads);
                const double expected = cdl::appendix_q_mean(E, B, E_in, a.gamma);
                // Variance of gamma sum_r e_r^2 / (2E)^2 under the multinomial,
                // to leading order in 1/E.
                const double expected_var = a.gamma * a.gamma * double(B - 1) /
                                            (2. * double(B * B) * double(E) * double(E));
                const double band = mo.var_Q * double(E) * double(B) / (a.gamma * a.gamma);
                mean_ok &= std::abs(mo.mean_Q - expected) <= tol.mean_se * mo.standard_error;
                band_ok &= band >= tol.band_lo && band <= tol.band_hi;
                exact_ok &= std::abs(mo.var_Q / expected_var - 1) <= tol.variance_rel;
                q_table.add({E, B, E_in, a.gamma, mo.mean_Q, expected, mo.standard_error,
                             mo.var_Q, expected_var, band});
            }
        if (wanted.count("q_mean"))
            checks.push_back(check_json("q_mean", mean_ok, q_table.to_json()));
        if (wanted.count("q_variance_band"))
            checks.push_back(check_json("q_variance_band", band_ok, q_table.to_json()));
        if (wanted.count("q_variance_exact"))
            checks.push_back(check_json("q_variance_exact", exact_ok, q_table.to_json()));
    }
    if (wanted.count("q_gamma0"))
    {
        cdl::QMoments mo = cdl::appendix_q_moments(1000, 5, 500, 0, q_trials,
                                                   cdl::derive_seed(a.seed, 100), a.threads);
        checks.push_back(check_json("q_gamma0", mo.var_Q == 0 && mo.mean_Q == 0.5,
                                    {{"mean_Q", mo.mean_Q}, {"var_Q", mo.var_Q}}));
    }
    if (wanted.count("l_slope"))
    {
        auto grid = cdl::default_l_grid();
        cdl::LVarianceTable lt =
            cdl::appendix_l_variance(grid, l_trials, cdl::derive_seed(a.seed, 200), a.threads);
        Table t{{"N", "B", "avg_k", "ein_frac", "E", "E_in", "mean_L", "var_L"}, {}};
        for (const auto& p : lt.points)
            t.add({p.N, p.B, p.avg_k, p.ein_frac, p.E, p.E_in, p.mean_L, p.var_L});
        if (!a.l_table.empty())
        {
            std::ofstream f(a.l_table, std::ios::binary);
            if (!f)
                throw cdl::ValidationError("cannot write " + a.l_table);
            t.write_csv(f, config);
        }
        checks.push_back(check_json("l_slope", lt.slope <= tol.slope_max,
                                    {{"slope", lt.slope},
                                     {"fitted_points", lt.fitted},
                                     {"points", lt.points.size()}}));
    }

    bool all_pass = true;
    Table summary{{"check", "pass"}, {}};
    for (const auto& c : checks)
    {
        all_pass &= c["pass"].get<bool>();
        summary.add({c["name"], c["pass"]});
    }
    json doc;
    doc["config"] = config;
    doc["checks"] = checks;
    doc["all_pass"] = all_pass;
    emit(a.out, doc, &summary);
    command_exit_code = all_pass ? exit_ok : exit_validation_failed;
}

} // namespace

void register_validate(CLI::App& app)
{
    auto a = std::make_shared<ValidateArgs>();
    auto* sub = app.add_subcommand("validate", "Monte Carlo checks of quality fluctuations");
    sub->add_option("--checks", a->checks, "subset of q_mean, q_variance_band, q_variance_exact, "
                                           "q_gamma0, l_slope")
        ->delimiter(',');
    sub->add_flag("--quick", a->quick, "fewer trials with wider mean and variance tolerances");
    sub->add_option("--seed", a->seed, "random seed")->capture_default_str();
    sub->add_option("--q-trials", a->q_trials, "trials per Q configuration");
    sub->add_option("--l-trials", a->l_trials, "trials per L grid point");
    sub->add_option("--gamma", a->gamma, "modularity resolution of the Q checks")
        ->capture_default_str();
    sub->add_option("--threads", a->threads, "worker threads (0: all cores)")
        ->capture_default_str();
    sub->add_option("--l-table", a->l_table, "write the L variance table as CSV");
    add_output_flags(sub, a->out, "json");
    sub->callback([a] { run_validate(*a); });
}

} // namespace cli
