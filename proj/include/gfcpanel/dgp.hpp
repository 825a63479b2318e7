#pragma once

#include "gfcpanel/gmm.hpp"
#include "gfcpanel/irf.hpp"
#include "gfcpanel/panel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gfcpanel::dgp {

// True coefficients of the price equation: own lags 1..L, shock lags 0..L.
struct Eq1Coeffs {
    std::vector<double> own;
    std::vector<double> shock;
    std::vector<double> shock_x;
};

// True coefficients of the spread equation: own lags 1..L, the rest 0..L.
struct Eq2Coeffs {
    std::vector<double> own;
    std::vector<double> shock;
    std::vector<double> shock_x;
    std::vector<double> price;
    std::vector<double> price_x;
};

enum class RProcess { iid_normal, ar1 };

struct DgpConfig {
    int n_entities = 50;
    int n_periods = 20;
    Eq1Coeffs eq1;
    Eq2Coeffs eq2;
    bool include_spread = true; // simulate the spread equation as well
    double fe_sd_p = 1.0;
    double fe_sd_y = 1.0;
    double eps_sd_p = 1.0;
    double eps_sd_y = 1.0;
    double eps_ar_root = 0.0; // AR(1) root of the idiosyncratic errors (0 = iid)
    RProcess r_process = RProcess::iid_normal;
    double r_ar_root = 0.0;
    double r_sd = 1.0;
    double exporter_share = 0.5;
    std::uint64_t seed = 1;
    int burn_in = 50;       // discarded start-up periods
    double init_sd = 0.0;   // sd of random pre-sample levels (useful with burn_in = 0)
    bool allow_explosive = false;

    void validate() const; // throws DesignError on explosive own-lag roots etc.
    int lag_order() const;
};

// Largest companion-matrix eigenvalue modulus of an own-lag polynomial.
double spectral_radius(const std::vector<double>& own_lags);

// Simulates the two-equation system forward from zero (or randomized)
// initial conditions, discards the burn-in, and returns a dataset with
// country series "p" (and "y"), global series "r", and group flags.
PanelDataset simulate_panel(const DgpConfig& cfg);

// Brute-force impulse response: two noise-free twin simulations (shock added
// to r at horizon 0 versus baseline), differenced pathwise. Honors the
// request's panel (panel C zeroes the direct shock coefficients of the spread
// equation), group, horizon and shock profile.
IrfPath oracle_irf(const DgpConfig& cfg, const IrfRequest& req);

// True coefficients as term-mapped vectors, for feeding the recursion engine.
TermMappedCoeffs eq1_term_coeffs(const DgpConfig& cfg);
TermMappedCoeffs eq2_term_coeffs(const DgpConfig& cfg);

// Fixed-effects (within) OLS on the design rows; the benchmark estimator for
// Nickell-bias comparisons.
Eigen::VectorXd within_estimate(const EquationDesign& design);

enum class RecoveryDesign { ar1_only, price_equation, spread_equation };

struct RecoverySummary {
    std::vector<std::string> term_tags;
    std::vector<double> mean_bias;
    std::vector<double> rmse;
    double hansen_reject_rate = 0.0; // at the 5% level
    double ar1_reject_rate = 0.0;
    double ar2_reject_rate = 0.0;
    double within_own_lag_mean_bias = 0.0;
    int n_replications = 0;
    int n_failures = 0;
    int n_ar2_available = 0;
};

RecoverySummary run_recovery_experiment(const DgpConfig& cfg, const GmmOptions& opts,
                                        int n_replications,
                                        RecoveryDesign design_kind = RecoveryDesign::ar1_only);

// Named presets addressable from the CLI: "ar1" (stable AR(1) recovery
// benchmark) and "asymmetric" (full two-equation system with opposite-signed
// exporter/importer responses).
DgpConfig preset(const std::string& name);

// AR(1)-only single-regressor design (dependent "p" on its first lag).
EquationDesign ar1_design(const PanelDataset& data);

} // namespace gfcpanel::dgp
