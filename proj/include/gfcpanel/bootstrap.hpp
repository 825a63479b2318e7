#pragma once

#include "gfcpanel/gmm.hpp"
#include "gfcpanel/irf.hpp"
#include "gfcpanel/numerics.hpp"

#include <cstdint>
#include <vector>

namespace gfcpanel {

struct BootstrapConfig {
    int replications = 200;
    double q_lo = 0.10;
    double q_hi = 0.90;
    std::uint64_t seed = 0;
    bool discard_explosive = false;
    int threads = 1;

    void validate() const; // throws ConfigError
};

struct BootstrapMeta {
    int replications = 0;
    double q_lo = 0.0;
    double q_hi = 0.0;
    std::uint64_t seed = 0;
    int explosive_draws = 0;
    bool discard_explosive = false;
    double vce_clip_mass_p = 0.0; // negative-eigenvalue mass clipped per equation
    double vce_clip_mass_y = 0.0;
};

// Point path plus per-horizon quantile bands for the panel's response series
// (price for panel A, spread for panels B and C). The bands are quantiles of
// the simulated distribution and need not bracket the point estimate.
struct IrfResult {
    IrfPath point;
    std::vector<double> lo;
    std::vector<double> hi;
    BootstrapMeta meta;
};

// Multivariate-normal coefficient sampler centered at the estimates with the
// robust covariance; negative eigenvalues are clipped at zero before taking
// the symmetric root.
class CoefficientSampler {
public:
    explicit CoefficientSampler(const EstimationResult& result);

    Eigen::VectorXd draw(num::NormalSampler& rng) const;
    double clipped_mass() const { return clipped_mass_; }
    const std::vector<std::string>& tags() const { return tags_; }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd root_;
    std::vector<std::string> tags_;
    double clipped_mass_ = 0.0;
};

// One draw from the estimated coefficient distribution.
Eigen::VectorXd draw_coefficients(const EstimationResult& result, num::NormalSampler& rng);

// Parametric bootstrap bands: per replication, draw both equations'
// coefficients on independent streams, run the requested impulse response,
// and take per-horizon quantiles. Deterministic in (seed, config) regardless
// of thread count. For panel A, res_y may be any result whose draws are
// simply unused when its tags carry no spread terms.
IrfResult bootstrap_bands(const EstimationResult& res_p, const EstimationResult& res_y,
                          const IrfRequest& req, const BootstrapConfig& cfg);

// Panel-A-only variant (no spread equation involved).
IrfResult bootstrap_bands(const EstimationResult& res_p, const IrfRequest& req,
                          const BootstrapConfig& cfg);

} // namespace gfcpanel
