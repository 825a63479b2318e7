#pragma once

#include "gfcpanel/model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace gfcpanel {

enum class GmmMode { difference_only, system };
enum class GmmSteps { one, two };

struct GmmOptions {
    GmmMode mode = GmmMode::system;
    int instrument_lag_min = 2;
    std::optional<int> instrument_lag_max = 4; // nullopt = unbounded
    bool collapse = true;
    GmmSteps steps = GmmSteps::one;
    bool windmeijer = true; // applies to two-step only
    double ridge_tolerance = 1e-10;

    void validate() const; // throws EstimationError
};

enum class BlockKind { difference, level };

// One row of the stacked (difference; level) system.
struct SystemRow {
    BlockKind block = BlockKind::difference;
    int entity = 0;
    int period = 0; // global period index of t
};

// Instrument block for one equation segment. GMM-style columns hold lagged
// dependent levels (difference block) or lagged dependent differences (level
// block); IV-style columns replicate the exogenous regressors. Unavailable
// cells are zero-filled, never missing.
struct InstrumentSet {
    Eigen::MatrixXd matrix;
    std::vector<std::string> column_labels;
    std::vector<SystemRow> rows;
    int n_gmm_columns = 0;
    int n_iv_columns = 0;

    int n_instruments() const { return n_gmm_columns + n_iv_columns; }
};

InstrumentSet build_difference_instruments(const EquationDesign& design, const GmmOptions& opts);
InstrumentSet build_level_instruments(const EquationDesign& design, const GmmOptions& opts);

// Assembled estimation system: transformed dependent/regressors and the
// block-diagonal instrument matrix over the stacked rows.
struct GmmSystem {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    Eigen::MatrixXd Z;
    std::vector<std::string> z_labels;
    std::vector<SystemRow> rows;
    std::vector<std::vector<int>> entity_rows; // system row indices per entity
    int n_gmm_columns = 0;
    int n_iv_columns = 0;
    int n_diff_rows = 0;
    int n_level_rows = 0;
};

GmmSystem build_gmm_system(const EquationDesign& design, const GmmOptions& opts);

// S(u) = sum over entities of (Z_e' u_e)(Z_e' u_e)'.
Eigen::MatrixXd clustered_moment_covariance(const Eigen::MatrixXd& Z, const Eigen::VectorXd& u,
                                            const std::vector<std::vector<int>>& entity_rows);

struct HansenResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
};

struct ArResult {
    double z = 0.0;
    double p_value = 1.0;
    int n_pairs = 0;
};

struct Diagnostics {
    HansenResult hansen;
    std::optional<ArResult> ar1;
    std::optional<ArResult> ar2;
    std::string ar1_note; // reason when ar1 is unavailable
    std::string ar2_note;
};

struct SampleMeta {
    int n_entities = 0;
    int n_rows = 0;        // stacked system rows
    int n_instruments = 0; // effective (nonzero) instrument columns
    int n_design_rows = 0;
    int n_diff_rows = 0;
    int n_level_rows = 0;
};

struct EstimationResult {
    Eigen::VectorXd coefficients;
    std::vector<std::string> term_tags;
    Eigen::MatrixXd vce; // robust, clustered by entity
    Eigen::VectorXd residuals;
    std::vector<SystemRow> rows;
    Diagnostics diagnostics;
    SampleMeta sample_meta;
    GmmOptions options;
    bool weight_pinv_used = false;    // a weighting matrix needed pseudo-inversion
    bool efficient_weight_failed = false; // two-step weight degenerate, Hansen skipped
    int dropped_zero_instruments = 0; // identically-zero columns removed before solving
};

// One-step or two-step GMM with entity-clustered robust covariance; Hansen J
// is always evaluated at the efficient two-step weight. Throws EstimationError
// on rank-deficient regressors (naming the collinear columns) or when fewer
// effective instruments than coefficients remain.
EstimationResult estimate(const EquationDesign& design, const GmmOptions& opts);

HansenResult hansen_j(const EstimationResult& result);

// Arellano-Bond test for m-th order serial correlation in the differenced
// residuals; throws InsufficientDataError when degenerate.
ArResult ar_test(const EstimationResult& result, int m);

} // namespace gfcpanel
