#include "gfcpanel/bootstrap.hpp"

#include "gfcpanel/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace gfcpanel {

void BootstrapConfig::validate() const {
    if (replications < 2) throw ConfigError("bootstrap replications must be >= 2");
    if (!(0.0 < q_lo && q_lo < q_hi && q_hi < 1.0))
        throw ConfigError("bootstrap quantiles must satisfy 0 < q_lo < q_hi < 1");
    if (threads < 1) throw ConfigError("bootstrap threads must be >= 1");
}

CoefficientSampler::CoefficientSampler(const EstimationResult& result)
    : mean_(result.coefficients), tags_(result.term_tags) {
    if (result.vce.rows() != mean_.size() || result.vce.cols() != mean_.size())
        throw EstimationError("vce dimensions do not match the coefficient vector");
    num::PsdSqrt s = num::psd_sqrt(0.5 * (result.vce + result.vce.transpose()));
    root_ = s.root;
    clipped_mass_ = s.clipped_mass;
}

Eigen::VectorXd CoefficientSampler::draw(num::NormalSampler& rng) const {
    Eigen::VectorXd z(mean_.size());
    for (int i = 0; i < z.size(); ++i) z(i) = rng();
    return mean_ + root_ * z;
}

Eigen::VectorXd draw_coefficients(const EstimationResult& result, num::NormalSampler& rng) {
    return CoefficientSampler(result).draw(rng);
}

namespace {

TermMappedCoeffs with_values(const std::vector<std::string>& tags, const Eigen::VectorXd& v) {
    TermMappedCoeffs out;
    out.values = v;
    for (std::size_t j = 0; j < tags.size(); ++j) out.index[tags[j]] = static_cast<int>(j);
    return out;
}

bool spread_tags_present(const std::vector<std::string>& tags) {
    for (const auto& t : tags)
        if (t.rfind("b1^y", 0) == 0) return true;
    return false;
}

const std::vector<double>& response_series(const IrfPath& path, IrfPanel panel) {
    return panel == IrfPanel::A ? path.p_response : path.y_response;
}

} // namespace

IrfResult bootstrap_bands(const EstimationResult& res_p, const EstimationResult& res_y,
                          const IrfRequest& req, const BootstrapConfig& cfg) {
    req.validate();
    cfg.validate();

    CoefficientSampler sampler_p(res_p);
    const bool with_y = spread_tags_present(res_y.term_tags);
    std::optional<CoefficientSampler> sampler_y;
    if (with_y) sampler_y.emplace(res_y);
    if (!with_y && req.panel != IrfPanel::A)
        throw ConfigError("panels B and C need spread-equation estimates");

    auto run_path = [&](const TermMappedCoeffs& cp, const TermMappedCoeffs& cy) {
        return req.panel == IrfPanel::C ? channel_irf(cp, cy, req) : compute_irf(cp, cy, req);
    };

    TermMappedCoeffs point_p = TermMappedCoeffs::from_result(res_p);
    TermMappedCoeffs point_y;
    if (with_y) point_y = TermMappedCoeffs::from_result(res_y);

    IrfResult out;
    out.point = run_path(point_p, point_y);
    out.meta.replications = cfg.replications;
    out.meta.q_lo = cfg.q_lo;
    out.meta.q_hi = cfg.q_hi;
    out.meta.seed = cfg.seed;
    out.meta.discard_explosive = cfg.discard_explosive;
    out.meta.vce_clip_mass_p = sampler_p.clipped_mass();
    if (sampler_y) out.meta.vce_clip_mass_y = sampler_y->clipped_mass();

    const int H = req.horizon;
    const int R = cfg.replications;

    // Replication-indexed storage keeps aggregation independent of scheduling.
    std::vector<std::vector<double>> paths(R);
    std::vector<char> explosive(R, 0);

    num::parallel_for(R, cfg.threads, [&](int rep) {
        num::NormalSampler rng_p(num::substream_seed(cfg.seed, 1, static_cast<std::uint64_t>(rep)));
        num::NormalSampler rng_y(num::substream_seed(cfg.seed, 2, static_cast<std::uint64_t>(rep)));
        TermMappedCoeffs cp = with_values(sampler_p.tags(), sampler_p.draw(rng_p));
        TermMappedCoeffs cy;
        if (sampler_y) cy = with_values(sampler_y->tags(), sampler_y->draw(rng_y));
        IrfPath path = run_path(cp, cy);
        explosive[rep] = path.explosive ? 1 : 0;
        paths[rep] = response_series(path, req.panel);
    });

    for (int rep = 0; rep < R; ++rep)
        if (explosive[rep]) ++out.meta.explosive_draws;

    out.lo.resize(H + 1);
    out.hi.resize(H + 1);
    for (int h = 0; h <= H; ++h) {
        std::vector<double> sample;
        sample.reserve(R);
        for (int rep = 0; rep < R; ++rep) {
            if (cfg.discard_explosive && explosive[rep]) continue;
            sample.push_back(paths[rep][h]);
        }
        if (sample.empty())
            throw EstimationError("all bootstrap replications were explosive and discarded");
        out.lo[h] = num::quantile(sample, cfg.q_lo);
        out.hi[h] = num::quantile(sample, cfg.q_hi);
    }
    return out;
}

IrfResult bootstrap_bands(const EstimationResult& res_p, const IrfRequest& req,
                          const BootstrapConfig& cfg) {
    if (req.panel != IrfPanel::A)
        throw ConfigError("single-equation bands are only defined for panel A");
    EstimationResult empty_y;
    return bootstrap_bands(res_p, empty_y, req, cfg);
}

} // namespace gfcpanel
