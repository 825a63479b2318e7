#include "gfcpanel/dgp.hpp"

#include "gfcpanel/errors.hpp"
#include "gfcpanel/numerics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace gfcpanel::dgp {

double spectral_radius(const std::vector<double>& own_lags) {
    const int L = static_cast<int>(own_lags.size());
    if (L == 0) return 0.0;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(L, L);
    for (int j = 0; j < L; ++j) companion(0, j) = own_lags[j];
    for (int j = 1; j < L; ++j) companion(j, j - 1) = 1.0;
    return companion.eigenvalues().cwiseAbs().maxCoeff();
}

int DgpConfig::lag_order() const {
    return static_cast<int>(eq1.own.size());
}

void DgpConfig::validate() const {
    if (n_entities < 1 || n_periods < 1) throw DesignError("dgp: empty panel requested");
    const int L = lag_order();
    if (L < 1) throw DesignError("dgp: eq1 needs at least one own lag");
    if (eq1.shock.size() != static_cast<std::size_t>(L + 1) ||
        eq1.shock_x.size() != static_cast<std::size_t>(L + 1))
        throw DesignError("dgp: eq1 shock coefficient lengths must be L+1");
    if (include_spread) {
        if (eq2.own.size() != static_cast<std::size_t>(L))
            throw DesignError("dgp: eq2 own-lag length must match eq1");
        const auto expect = static_cast<std::size_t>(L + 1);
        if (eq2.shock.size() != expect || eq2.shock_x.size() != expect ||
            eq2.price.size() != expect || eq2.price_x.size() != expect)
            throw DesignError("dgp: eq2 coefficient lengths must be L+1");
    }
    if (!allow_explosive) {
        if (spectral_radius(eq1.own) >= 1.0)
            throw DesignError("dgp: explosive price equation (set allow_explosive to override)");
        if (include_spread && spectral_radius(eq2.own) >= 1.0)
            throw DesignError("dgp: explosive spread equation (set allow_explosive to override)");
    }
    if (exporter_share < 0.0 || exporter_share > 1.0)
        throw DesignError("dgp: exporter_share must lie in [0, 1]");
    if (std::fabs(eps_ar_root) >= 1.0)
        throw DesignError("dgp: eps_ar_root must lie strictly inside the unit circle");
}

namespace {

std::string entity_name(int e) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "C%03d", e + 1);
    return buf;
}

struct SimOutput {
    std::vector<double> r;                  // length total
    std::vector<std::vector<double>> p;     // [entity][t]
    std::vector<std::vector<double>> y;
    std::vector<char> exporter;
};

// Forward iteration of the system. Noise-free callers pass zero sds.
SimOutput iterate_system(const DgpConfig& cfg, int total, const std::vector<double>& r_path) {
    const int L = cfg.lag_order();
    const int N = cfg.n_entities;

    SimOutput out;
    out.r = r_path;
    out.exporter.resize(N);
    int n_exporters = static_cast<int>(std::lround(cfg.exporter_share * N));
    for (int e = 0; e < N; ++e) out.exporter[e] = e < n_exporters ? 1 : 0;

    num::NormalSampler fe_rng(num::substream_seed(cfg.seed, 0xFE));
    num::NormalSampler eps_rng(num::substream_seed(cfg.seed, 0xE5));
    num::NormalSampler init_rng(num::substream_seed(cfg.seed, 0x17));

    out.p.assign(N, std::vector<double>(total, 0.0));
    if (cfg.include_spread) out.y.assign(N, std::vector<double>(total, 0.0));

    for (int e = 0; e < N; ++e) {
        const double d = out.exporter[e] ? 1.0 : 0.0;
        const double mu = cfg.fe_sd_p > 0.0 ? cfg.fe_sd_p * fe_rng() : 0.0;
        const double lambda =
            cfg.include_spread && cfg.fe_sd_y > 0.0 ? cfg.fe_sd_y * fe_rng() : 0.0;

        std::vector<double> p_init(L, 0.0), y_init(L, 0.0);
        for (int j = 0; j < L; ++j) {
            if (cfg.init_sd > 0.0) p_init[j] = cfg.init_sd * init_rng();
            if (cfg.include_spread && cfg.init_sd > 0.0) y_init[j] = cfg.init_sd * init_rng();
        }
        auto p_at = [&](int t) { return t >= 0 ? out.p[e][t] : p_init[-t - 1]; };
        auto y_at = [&](int t) { return t >= 0 ? out.y[e][t] : y_init[-t - 1]; };
        auto r_at = [&](int t) { return t >= 0 ? out.r[t] : 0.0; };

        double eps_p_prev = 0.0, eps_y_prev = 0.0;
        for (int t = 0; t < total; ++t) {
            double p = mu;
            for (int j = 1; j <= L; ++j) p += cfg.eq1.own[j - 1] * p_at(t - j);
            for (int j = 0; j <= L; ++j)
                p += (cfg.eq1.shock[j] + d * cfg.eq1.shock_x[j]) * r_at(t - j);
            if (cfg.eps_sd_p > 0.0) {
                double eps = cfg.eps_ar_root * eps_p_prev + cfg.eps_sd_p * eps_rng();
                eps_p_prev = eps;
                p += eps;
            }
            out.p[e][t] = p;

            if (!cfg.include_spread) continue;
            double y = lambda;
            for (int j = 1; j <= L; ++j) y += cfg.eq2.own[j - 1] * y_at(t - j);
            for (int j = 0; j <= L; ++j) {
                y += (cfg.eq2.shock[j] + d * cfg.eq2.shock_x[j]) * r_at(t - j);
                y += (cfg.eq2.price[j] + d * cfg.eq2.price_x[j]) * p_at(t - j);
            }
            if (cfg.eps_sd_y > 0.0) {
                double eps = cfg.eps_ar_root * eps_y_prev + cfg.eps_sd_y * eps_rng();
                eps_y_prev = eps;
                y += eps;
            }
            out.y[e][t] = y;
        }
    }
    return out;
}

std::vector<double> simulate_r_path(const DgpConfig& cfg, int total) {
    num::NormalSampler r_rng(num::substream_seed(cfg.seed, 0xA3));
    std::vector<double> r(total, 0.0);
    for (int t = 0; t < total; ++t) {
        double z = cfg.r_sd > 0.0 ? cfg.r_sd * r_rng() : 0.0;
        if (cfg.r_process == RProcess::ar1 && t > 0)
            r[t] = cfg.r_ar_root * r[t - 1] + z;
        else
            r[t] = z;
    }
    return r;
}

} // namespace

PanelDataset simulate_panel(const DgpConfig& cfg) {
    cfg.validate();
    const int total = cfg.burn_in + cfg.n_periods;
    SimOutput sim = iterate_system(cfg, total, simulate_r_path(cfg, total));

    std::vector<std::string> entities;
    for (int e = 0; e < cfg.n_entities; ++e) entities.push_back(entity_name(e));
    std::vector<Quarter> periods;
    for (int t = 0; t < cfg.n_periods; ++t) periods.push_back(Quarter::from_ordinal(8000 + t));

    PanelDataset data(entities, periods);
    for (int e = 0; e < cfg.n_entities; ++e) {
        std::vector<double> p(sim.p[e].begin() + cfg.burn_in, sim.p[e].end());
        data.set_country_series(entities[e], "p", Series::from_values(p));
        if (cfg.include_spread) {
            std::vector<double> y(sim.y[e].begin() + cfg.burn_in, sim.y[e].end());
            data.set_country_series(entities[e], "y", Series::from_values(y));
        }
        data.set_group_flag(entities[e], sim.exporter[e] != 0);
    }
    std::vector<double> r(sim.r.begin() + cfg.burn_in, sim.r.end());
    data.set_global_series("r", Series::from_values(r));
    return data;
}

IrfPath oracle_irf(const DgpConfig& cfg, const IrfRequest& req) {
    req.validate();
    DgpConfig quiet = cfg;
    quiet.n_entities = 1;
    quiet.exporter_share = req.group == Group::exporter ? 1.0 : 0.0;
    quiet.fe_sd_p = quiet.fe_sd_y = 0.0;
    quiet.eps_sd_p = quiet.eps_sd_y = 0.0;
    quiet.r_sd = 0.0;
    quiet.init_sd = 0.0;
    quiet.burn_in = 0;
    if (req.panel == IrfPanel::C) {
        std::fill(quiet.eq2.shock.begin(), quiet.eq2.shock.end(), 0.0);
        std::fill(quiet.eq2.shock_x.begin(), quiet.eq2.shock_x.end(), 0.0);
    }

    const int total = req.horizon + 1;
    std::vector<double> r_base(total, 0.0);
    std::vector<double> r_shock(total, 0.0);
    if (req.profile == ShockProfile::permanent)
        std::fill(r_shock.begin(), r_shock.end(), req.shock_size);
    else
        r_shock[0] = req.shock_size;

    SimOutput base = iterate_system(quiet, total, r_base);
    SimOutput shocked = iterate_system(quiet, total, r_shock);

    IrfPath path;
    path.p_response.resize(total);
    for (int t = 0; t < total; ++t) path.p_response[t] = shocked.p[0][t] - base.p[0][t];
    if (cfg.include_spread) {
        path.y_response.resize(total);
        for (int t = 0; t < total; ++t) path.y_response[t] = shocked.y[0][t] - base.y[0][t];
    }
    const double limit = 1e6 * req.shock_size;
    path.explosive = std::fabs(path.p_response.back()) > limit ||
                     (cfg.include_spread && std::fabs(path.y_response.back()) > limit);
    return path;
}

TermMappedCoeffs eq1_term_coeffs(const DgpConfig& cfg) {
    std::vector<std::pair<std::string, double>> pairs;
    const int L = cfg.lag_order();
    for (int j = 1; j <= L; ++j) pairs.emplace_back("a" + std::to_string(j) + "^p",
                                                    cfg.eq1.own[j - 1]);
    for (int j = 0; j <= L; ++j) {
        pairs.emplace_back("a" + std::to_string(j) + "^r", cfg.eq1.shock[j]);
        pairs.emplace_back("a" + std::to_string(j) + "^rx", cfg.eq1.shock_x[j]);
    }
    return TermMappedCoeffs::from_pairs(pairs);
}

TermMappedCoeffs eq2_term_coeffs(const DgpConfig& cfg) {
    std::vector<std::pair<std::string, double>> pairs;
    const int L = cfg.lag_order();
    for (int j = 1; j <= L; ++j) pairs.emplace_back("b" + std::to_string(j) + "^y",
                                                    cfg.eq2.own[j - 1]);
    for (int j = 0; j <= L; ++j) {
        pairs.emplace_back("b" + std::to_string(j) + "^r", cfg.eq2.shock[j]);
        pairs.emplace_back("b" + std::to_string(j) + "^rx", cfg.eq2.shock_x[j]);
        pairs.emplace_back("b" + std::to_string(j) + "^p", cfg.eq2.price[j]);
        pairs.emplace_back("b" + std::to_string(j) + "^px", cfg.eq2.price_x[j]);
    }
    return TermMappedCoeffs::from_pairs(pairs);
}

Eigen::VectorXd within_estimate(const EquationDesign& design) {
    const int n = design.n_rows();
    const int k = design.n_terms();
    Eigen::VectorXd y = design.dependent;
    Eigen::MatrixXd X = design.regressors;

    // demean within entity
    std::vector<int> count(design.n_entities, 0);
    Eigen::VectorXd ysum = Eigen::VectorXd::Zero(design.n_entities);
    Eigen::MatrixXd xsum = Eigen::MatrixXd::Zero(design.n_entities, k);
    for (int i = 0; i < n; ++i) {
        int e = design.fixed_effect_groups[i];
        ++count[e];
        ysum(e) += y(i);
        xsum.row(e) += X.row(i);
    }
    for (int i = 0; i < n; ++i) {
        int e = design.fixed_effect_groups[i];
        y(i) -= ysum(e) / count[e];
        X.row(i) -= xsum.row(e) / count[e];
    }
    return (X.transpose() * X).ldlt().solve(X.transpose() * y);
}

EquationDesign ar1_design(const PanelDataset& data) {
    std::vector<TermDef> terms = {{"p", 1, false, "a1^p", true}};
    return build_design(data, "p", terms);
}

namespace {

EquationDesign make_design(const DgpConfig& cfg, const PanelDataset& data,
                           RecoveryDesign kind) {
    switch (kind) {
    case RecoveryDesign::ar1_only:
        return ar1_design(data);
    case RecoveryDesign::price_equation:
        return build_design(data, "p", price_equation_terms("p", "r", cfg.lag_order(), {}));
    case RecoveryDesign::spread_equation:
        return build_design(data, "y",
                            spread_equation_terms("y", "r", "p", cfg.lag_order(), {}));
    }
    throw DesignError("unknown recovery design");
}

std::vector<double> truth_for(const DgpConfig& cfg, const EquationDesign& design,
                              RecoveryDesign kind) {
    if (kind == RecoveryDesign::ar1_only) return {cfg.eq1.own[0]};
    TermMappedCoeffs tm =
        kind == RecoveryDesign::price_equation ? eq1_term_coeffs(cfg) : eq2_term_coeffs(cfg);
    std::vector<double> truth;
    for (const auto& t : design.terms) truth.push_back(tm.at(t.tag));
    return truth;
}

} // namespace

RecoverySummary run_recovery_experiment(const DgpConfig& cfg, const GmmOptions& opts,
                                        int n_replications, RecoveryDesign design_kind) {
    cfg.validate();
    RecoverySummary sum;
    sum.n_replications = n_replications;

    std::vector<std::vector<double>> errors; // per coefficient, across reps
    double within_bias_total = 0.0;
    int within_count = 0;
    int hansen_rej = 0, hansen_n = 0;
    int ar1_rej = 0, ar1_n = 0;
    int ar2_rej = 0, ar2_n = 0;

    for (int rep = 0; rep < n_replications; ++rep) {
        DgpConfig rep_cfg = cfg;
        rep_cfg.seed = num::substream_seed(cfg.seed, 0x5E9, static_cast<std::uint64_t>(rep));
        PanelDataset data = simulate_panel(rep_cfg);
        try {
            EquationDesign design = make_design(rep_cfg, data, design_kind);
            EstimationResult res = estimate(design, opts);
            std::vector<double> truth = truth_for(rep_cfg, design, design_kind);

            if (sum.term_tags.empty()) {
                sum.term_tags = res.term_tags;
                errors.assign(res.term_tags.size(), {});
            }
            for (int j = 0; j < res.coefficients.size(); ++j)
                errors[j].push_back(res.coefficients(j) - truth[j]);

            if (res.diagnostics.hansen.df > 0) {
                ++hansen_n;
                if (res.diagnostics.hansen.p_value < 0.05) ++hansen_rej;
            }
            if (res.diagnostics.ar1) {
                ++ar1_n;
                if (res.diagnostics.ar1->p_value < 0.05) ++ar1_rej;
            }
            if (res.diagnostics.ar2) {
                ++ar2_n;
                if (res.diagnostics.ar2->p_value < 0.05) ++ar2_rej;
            }

            Eigen::VectorXd w = within_estimate(design);
            int own_idx = 0; // own-lag coefficient leads the canonical column order
            within_bias_total += w(own_idx) - truth[own_idx];
            ++within_count;
        } catch (const Error&) {
            ++sum.n_failures;
        }
    }

    for (auto& errs : errors) {
        if (errs.empty()) {
            sum.mean_bias.push_back(0.0);
            sum.rmse.push_back(0.0);
            continue;
        }
        double mean = 0.0, mse = 0.0;
        for (double e : errs) {
            mean += e;
            mse += e * e;
        }
        mean /= static_cast<double>(errs.size());
        mse /= static_cast<double>(errs.size());
        sum.mean_bias.push_back(mean);
        sum.rmse.push_back(std::sqrt(mse));
    }
    if (hansen_n > 0) sum.hansen_reject_rate = static_cast<double>(hansen_rej) / hansen_n;
    if (ar1_n > 0) sum.ar1_reject_rate = static_cast<double>(ar1_rej) / ar1_n;
    if (ar2_n > 0) sum.ar2_reject_rate = static_cast<double>(ar2_rej) / ar2_n;
    sum.n_ar2_available = ar2_n;
    if (within_count > 0) sum.within_own_lag_mean_bias = within_bias_total / within_count;
    return sum;
}

DgpConfig preset(const std::string& name) {
    if (name == "ar1") {
        DgpConfig cfg;
        cfg.n_entities = 200;
        cfg.n_periods = 8;
        cfg.eq1.own = {0.5};
        cfg.eq1.shock = {0.0, 0.0};
        cfg.eq1.shock_x = {0.0, 0.0};
        cfg.include_spread = false;
        cfg.fe_sd_p = 1.0;
        cfg.eps_sd_p = 1.0;
        cfg.r_process = RProcess::iid_normal;
        cfg.r_sd = 1.0;
        cfg.exporter_share = 0.5;
        cfg.seed = 20200401;
        return cfg;
    }
    if (name == "asymmetric") {
        DgpConfig cfg;
        cfg.n_entities = 60;
        cfg.n_periods = 40;
        cfg.eq1.own = {0.60, 0.10};
        cfg.eq1.shock = {0.25, 0.10, 0.0};
        cfg.eq1.shock_x = {-0.50, -0.20, 0.0};
        cfg.eq2.own = {0.50, 0.05};
        cfg.eq2.shock = {0.40, 0.10, 0.0};
        cfg.eq2.shock_x = {0.15, 0.0, 0.0};
        cfg.eq2.price = {0.0, 0.0, 0.0};
        cfg.eq2.price_x = {-0.40, -0.10, 0.0};
        cfg.include_spread = true;
        cfg.fe_sd_p = 0.5;
        cfg.fe_sd_y = 0.5;
        cfg.eps_sd_p = 0.5;
        cfg.eps_sd_y = 0.5;
        cfg.r_process = RProcess::ar1;
        cfg.r_ar_root = 0.7;
        cfg.r_sd = 0.5;
        cfg.exporter_share = 0.5;
        cfg.seed = 19991;
        return cfg;
    }
    throw ConfigError("unknown dgp preset '" + name + "'");
}

} // namespace gfcpanel::dgp
