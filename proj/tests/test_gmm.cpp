#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gfcpanel/dgp.hpp"
#include "gfcpanel/errors.hpp"
#include "gfcpanel/gmm.hpp"
#include "gfcpanel/numerics.hpp"

#include "test_support.hpp"

#include <cmath>
#include <set>

using namespace gfcpanel;

namespace {

GmmOptions diff_only(int lag_min = 2, int lag_max = 2) {
    GmmOptions o;
    o.mode = GmmMode::difference_only;
    o.instrument_lag_min = lag_min;
    o.instrument_lag_max = lag_max;
    return o;
}

} // namespace

TEST_CASE("collapsed difference instruments by hand enumeration, T=5") {
    PanelDataset data = testsup::panel_from_values({{1.0, 2.0, 4.0, 3.0, 5.0}});
    EquationDesign design = dgp::ar1_design(data);
    GmmOptions opts; // system, lags 2..4, collapsed

    InstrumentSet block = build_difference_instruments(design, opts);
    CHECK(block.n_gmm_columns == 3); // lag_max - lag_min + 1
    CHECK(block.n_iv_columns == 0);
    REQUIRE(block.rows.size() == 3); // diff rows at t = 2, 3, 4

    // column 0 = lag 2, column 1 = lag 3, column 2 = lag 4
    Eigen::MatrixXd expected(3, 3);
    expected << 1, 0, 0, //  t=2: w0, -, -
        2, 1, 0,         //  t=3: w1, w0, -
        4, 2, 1;         //  t=4: w2, w1, w0
    CHECK((block.matrix - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("T=3 panel leaves a single usable difference row") {
    PanelDataset data = testsup::panel_from_values({{1.0, 2.0, 4.0}});
    EquationDesign design = dgp::ar1_design(data);
    GmmOptions opts;

    InstrumentSet block = build_difference_instruments(design, opts);
    REQUIRE(block.rows.size() == 1);
    CHECK(block.n_gmm_columns == 3);
    int nonzero = 0;
    for (int c = 0; c < block.matrix.cols(); ++c)
        if (block.matrix.col(c).cwiseAbs().maxCoeff() > 0.0) ++nonzero;
    CHECK(nonzero == 1); // only the lag-2 column is feasible
    CHECK(block.matrix(0, 0) == 1.0);
}

TEST_CASE("uncollapsed difference instruments have strictly more columns") {
    PanelDataset data = testsup::panel_from_values({{1.0, 2.0, 4.0, 3.0, 5.0}});
    EquationDesign design = dgp::ar1_design(data);
    GmmOptions collapsed;
    GmmOptions uncollapsed;
    uncollapsed.collapse = false;

    InstrumentSet narrow = build_difference_instruments(design, collapsed);
    InstrumentSet wide = build_difference_instruments(design, uncollapsed);
    CHECK(wide.matrix.cols() > narrow.matrix.cols());
    CHECK(wide.matrix.cols() == 6); // t=2: lag 2; t=3: lags 2,3; t=4: lags 2,3,4
}

TEST_CASE("level instruments by hand enumeration, T=5") {
    PanelDataset data = testsup::panel_from_values({{1.0, 2.0, 4.0, 3.0, 5.0}});
    EquationDesign design = dgp::ar1_design(data);
    GmmOptions opts;

    InstrumentSet block = build_level_instruments(design, opts);
    REQUIRE(block.rows.size() == 3); // t = 2, 3, 4
    CHECK(block.n_gmm_columns == 1);
    CHECK(block.rows[0].period == 2);
    CHECK(block.rows[2].period == 4);
    CHECK(block.matrix(0, 0) == 1.0);  // w1 - w0
    CHECK(block.matrix(1, 0) == 2.0);  // w2 - w1
    CHECK(block.matrix(2, 0) == -1.0); // w3 - w2
}

TEST_CASE("difference-only mode has an empty level block") {
    PanelDataset data = testsup::panel_from_values({{1.0, 2.0, 4.0, 3.0, 5.0}});
    EquationDesign design = dgp::ar1_design(data);
    InstrumentSet block = build_level_instruments(design, diff_only());
    CHECK(block.rows.empty());
    CHECK(block.matrix.cols() == 0);
}

TEST_CASE("interior gap zero-fills the level instrument cell") {
    // w2 missing: the t=4 level row stays, its instrument cell is zero
    std::vector<Cell> cells{1.0, 2.0, std::nullopt, 3.0, 5.0, 6.0};
    std::vector<Quarter> periods;
    for (int t = 0; t < 6; ++t) periods.push_back(Quarter::from_ordinal(8000 + t));
    PanelDataset data({"E0"}, periods);
    data.set_country_series("E0", "p", Series(cells));
    EquationDesign design = dgp::ar1_design(data);

    GmmOptions opts;
    InstrumentSet block = build_level_instruments(design, opts);
    REQUIRE(block.rows.size() == 2); // t = 4 and t = 5
    CHECK(block.rows[0].period == 4);
    CHECK(block.matrix(0, 0) == 0.0); // w3 - w2 unobserved
    CHECK(block.matrix(1, 0) == 2.0); // w4 - w3
}

TEST_CASE("just-identified estimate equals the indirect-IV solution") {
    // hand-built 3-entity, T=5 panel with one exogenous regressor
    PanelDataset data = testsup::panel_from_values(
        {{1.0, 2.0, 4.0, 3.0, 5.0}, {2.0, 1.0, 3.0, 5.0, 4.0}, {0.5, 1.5, 1.0, 2.5, 2.0}},
        {{0.2, 0.5, 0.1, 0.9, 0.4}, {0.7, 0.3, 0.8, 0.2, 0.6}, {0.1, 0.4, 0.6, 0.3, 0.8}});
    std::vector<TermDef> terms = {{"p", 1, false, "a1^p", true}, {"x", 0, false, "A:x", false}};
    EquationDesign design = build_design(data, "p", terms);

    GmmOptions opts = diff_only(2, 2); // 1 gmm + 1 iv column = 2 = k
    GmmSystem sys = build_gmm_system(design, opts);
    REQUIRE(sys.Z.cols() == 2);

    Eigen::MatrixXd ZtX = sys.Z.transpose() * sys.X;
    Eigen::VectorXd beta_iv = ZtX.inverse() * (sys.Z.transpose() * sys.y);

    EstimationResult res = estimate(design, opts);
    CHECK((res.coefficients - beta_iv).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(res.diagnostics.hansen.df == 0);
    CHECK(res.diagnostics.hansen.statistic == 0.0);
}

TEST_CASE("noise-free panel recovers the autoregressive coefficient exactly") {
    dgp::DgpConfig cfg;
    cfg.n_entities = 30;
    cfg.n_periods = 10;
    cfg.eq1.own = {0.5};
    cfg.eq1.shock = {0.0, 0.0};
    cfg.eq1.shock_x = {0.0, 0.0};
    cfg.include_spread = false;
    cfg.fe_sd_p = 1.0;
    cfg.eps_sd_p = 0.0; // no idiosyncratic noise
    cfg.burn_in = 0;    // keep the deterministic transient
    cfg.init_sd = 1.0;
    cfg.seed = 99;
    PanelDataset data = dgp::simulate_panel(cfg);

    EstimationResult res = estimate(dgp::ar1_design(data), diff_only(2, 4));
    CHECK(res.coefficients(0) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("clustered moment covariance equals the brute-force entity sum") {
    PanelDataset data = testsup::small_panel(17, 3, 9);
    EquationDesign design = dgp::ar1_design(data);
    GmmOptions opts;
    GmmSystem sys = build_gmm_system(design, opts);

    num::NormalSampler rng(4);
    Eigen::VectorXd u(sys.rows.size());
    for (int i = 0; i < u.size(); ++i) u(i) = rng();

    Eigen::MatrixXd S = clustered_moment_covariance(sys.Z, u, sys.entity_rows);

    const int nz = static_cast<int>(sys.Z.cols());
    Eigen::MatrixXd brute = Eigen::MatrixXd::Zero(nz, nz);
    for (int e = 0; e < 3; ++e) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(nz);
        for (std::size_t i = 0; i < sys.rows.size(); ++i)
            if (sys.rows[i].entity == e) g += sys.Z.row(static_cast<int>(i)).transpose() * u(i);
        brute += g * g.transpose();
    }
    CHECK((S - brute).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("scaling an exogenous regressor rescales only its coefficient") {
    PanelDataset data = testsup::small_panel(21, 30, 14);
    ModelSpec spec{"p", "y", "r", {}, 2};
    EquationDesign design = build_price_equation(spec, data);
    GmmOptions opts;

    EstimationResult base = estimate(design, opts);

    const double c = 10.0;
    EquationDesign scaled = design;
    auto tm = term_map(design);
    int col = tm["a0^r"];
    scaled.regressors.col(col) *= c;

    EstimationResult res = estimate(scaled, opts);
    for (int j = 0; j < res.coefficients.size(); ++j) {
        double expect = j == col ? base.coefficients(j) / c : base.coefficients(j);
        CHECK(res.coefficients(j) == doctest::Approx(expect).epsilon(1e-8));
    }
    // fitted values and the Hansen statistic are unchanged
    Eigen::VectorXd fit_base = design.regressors * base.coefficients;
    Eigen::VectorXd fit_scaled = scaled.regressors * res.coefficients;
    CHECK((fit_base - fit_scaled).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(res.diagnostics.hansen.statistic ==
          doctest::Approx(base.diagnostics.hansen.statistic).epsilon(1e-8));
}

TEST_CASE("rescaling an instrument column leaves the Hansen statistic unchanged") {
    PanelDataset data = testsup::small_panel(23, 30, 12);
    EquationDesign design = dgp::ar1_design(data);
    GmmOptions opts;
    GmmSystem sys = build_gmm_system(design, opts);

    // direct J computation on the assembled system, with and without scaling
    auto hansen_of = [&](const Eigen::MatrixXd& Z) {
        Eigen::MatrixXd ZtX = Z.transpose() * sys.X;
        Eigen::MatrixXd ZHZ = Eigen::MatrixXd::Zero(Z.cols(), Z.cols());
        for (const auto& rows : sys.entity_rows) {
            Eigen::VectorXd dummy; // weight by identity per entity: enough for the check
            Eigen::MatrixXd Ze(rows.size(), Z.cols());
            for (std::size_t a = 0; a < rows.size(); ++a) Ze.row(a) = Z.row(rows[a]);
            ZHZ += Ze.transpose() * Ze;
        }
        Eigen::MatrixXd A1 = ZHZ.inverse();
        Eigen::MatrixXd M = ZtX.transpose() * A1 * ZtX;
        Eigen::VectorXd b1 = M.ldlt().solve(ZtX.transpose() * A1 * (Z.transpose() * sys.y));
        Eigen::VectorXd u1 = sys.y - sys.X * b1;
        Eigen::MatrixXd S = clustered_moment_covariance(Z, u1, sys.entity_rows);
        Eigen::MatrixXd A2 = S.inverse();
        Eigen::MatrixXd M2 = ZtX.transpose() * A2 * ZtX;
        Eigen::VectorXd b2 = M2.ldlt().solve(ZtX.transpose() * A2 * (Z.transpose() * sys.y));
        Eigen::VectorXd u2 = sys.y - sys.X * b2;
        Eigen::VectorXd g = Z.transpose() * u2;
        return g.dot(A2 * g);
    };

    Eigen::MatrixXd Zs = sys.Z;
    Zs.col(1) *= 10.0;
    CHECK(hansen_of(sys.Z) == doctest::Approx(hansen_of(Zs)).epsilon(1e-8));
}

TEST_CASE("collapsed and uncollapsed instruments coincide on a T=3 panel") {
    // With one usable difference row per entity the per-period refinement is
    // the collapsed column itself.
    std::vector<std::vector<double>> values;
    num::NormalSampler rng(31);
    for (int e = 0; e < 12; ++e) values.push_back({rng(), rng(), rng()});
    PanelDataset data = testsup::panel_from_values(values);
    EquationDesign design = dgp::ar1_design(data);

    GmmOptions collapsed = diff_only(2, 2);
    GmmOptions uncollapsed = diff_only(2, 2);
    uncollapsed.collapse = false;

    InstrumentSet a = build_difference_instruments(design, collapsed);
    InstrumentSet b = build_difference_instruments(design, uncollapsed);
    REQUIRE(a.matrix.cols() == 1);
    REQUIRE(b.matrix.cols() == 1);
    CHECK((a.matrix - b.matrix).cwiseAbs().maxCoeff() == 0.0);

    EstimationResult ra = estimate(design, collapsed);
    EstimationResult rb = estimate(design, uncollapsed);
    CHECK((ra.coefficients - rb.coefficients).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("vce is symmetric positive semidefinite") {
    PanelDataset data = testsup::small_panel(29, 25, 14);
    ModelSpec spec{"p", "y", "r", {}, 2};
    EquationDesign design = build_spread_equation(spec, data);

    for (GmmSteps steps : {GmmSteps::one, GmmSteps::two}) {
        GmmOptions opts;
        opts.steps = steps;
        EstimationResult res = estimate(design, opts);
        CHECK((res.vce - res.vce.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(res.vce);
        double max_ev = es.eigenvalues().maxCoeff();
        CHECK(es.eigenvalues().minCoeff() >= -1e-10 * std::max(max_ev, 1.0));
    }
}

TEST_CASE("estimation is deterministic") {
    PanelDataset data = testsup::small_panel(37, 20, 12);
    ModelSpec spec{"p", "y", "r", {}, 2};
    EquationDesign design = build_price_equation(spec, data);
    GmmOptions opts;
    EstimationResult a = estimate(design, opts);
    EstimationResult b = estimate(design, opts);
    CHECK(a.coefficients == b.coefficients);
    CHECK(a.vce == b.vce);
    CHECK(a.residuals == b.residuals);
}

TEST_CASE("all-importer interaction block is flagged as collinear") {
    dgp::DgpConfig cfg = testsup::small_system(41, 15, 14);
    cfg.exporter_share = 0.0; // interactions identically zero
    PanelDataset data = dgp::simulate_panel(cfg);
    ModelSpec spec{"p", "y", "r", {}, 2};
    EquationDesign design = build_price_equation(spec, data);

    GmmOptions opts;
    CHECK_THROWS_WITH_AS(estimate(design, opts), doctest::Contains("a0^rx"), EstimationError);
}

TEST_CASE("too few instruments is an error") {
    PanelDataset data = testsup::panel_from_values(
        {{1.0, 2.0, 4.0, 3.0, 5.0}, {2.0, 1.0, 3.0, 5.0, 4.0}, {0.5, 1.5, 1.0, 2.5, 2.0}});
    // AR(2) design: two coefficients but a single collapsed lag-2 column
    std::vector<TermDef> terms = {{"p", 1, false, "a1^p", true},
                                  {"p", 2, false, "a2^p", true}};
    EquationDesign design = build_design(data, "p", terms);
    CHECK_THROWS_WITH_AS(estimate(design, diff_only(2, 2)),
                         doctest::Contains("fewer effective instruments"), EstimationError);

    // isolated design rows leave nothing to difference
    PanelDataset tiny = testsup::panel_from_values(
        {{1.0, 2.0, 4.0}, {2.0, 1.0, 3.0}, {0.5, 1.5, 1.0}});
    EquationDesign tiny_design = build_design(tiny, "p", terms);
    CHECK_THROWS_WITH_AS(estimate(tiny_design, diff_only(2, 2)),
                         doctest::Contains("differencing"), EstimationError);
}

TEST_CASE("zero residuals make the serial-correlation test unavailable") {
    // powers of two keep every intermediate exact, so the fit is exact
    std::vector<std::vector<double>> values;
    for (int e = 0; e < 4; ++e) {
        double scale = std::ldexp(1.0, e + 2);
        values.push_back({16.0 * scale, 8.0 * scale, 4.0 * scale, 2.0 * scale, 1.0 * scale,
                          0.5 * scale});
    }
    PanelDataset data = testsup::panel_from_values(values);
    EquationDesign design = dgp::ar1_design(data);
    EstimationResult res = estimate(design, diff_only(2, 3));

    CHECK(res.coefficients(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(res.residuals.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(ar_test(res, 1), InsufficientDataError);
    CHECK_THROWS_AS(ar_test(res, 2), InsufficientDataError);
}

TEST_CASE("two-step with Windmeijer correction changes the covariance") {
    PanelDataset data = testsup::small_panel(43, 40, 14);
    EquationDesign design = dgp::ar1_design(data);

    GmmOptions plain;
    plain.steps = GmmSteps::two;
    plain.windmeijer = false;
    GmmOptions corrected = plain;
    corrected.windmeijer = true;

    EstimationResult a = estimate(design, plain);
    EstimationResult b = estimate(design, corrected);
    CHECK(a.coefficients == b.coefficients); // the point estimate is untouched
    CHECK((a.vce - b.vce).cwiseAbs().maxCoeff() > 0.0);
    CHECK((b.vce - b.vce.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    // the corrected standard error is the usual (larger) one
    CHECK(b.vce(0, 0) >= a.vce(0, 0));
}

TEST_CASE("instrument count bookkeeping") {
    PanelDataset data = testsup::small_panel(47, 25, 14);
    ModelSpec spec{"p", "y", "r", {}, 2};
    EquationDesign design = build_price_equation(spec, data);
    GmmOptions opts;
    EstimationResult res = estimate(design, opts);

    // collapsed: 3 gmm diff + 1 gmm level + 2 x 6 exogenous iv columns
    CHECK(res.sample_meta.n_instruments == 3 + 1 + 12 - res.dropped_zero_instruments);
    CHECK(res.sample_meta.n_instruments >= design.n_terms());
    CHECK(res.sample_meta.n_entities == 25);
    CHECK(res.diagnostics.hansen.df ==
          res.sample_meta.n_instruments - design.n_terms());
}
