#pragma once

#include "gfcpanel/panel.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace gfcpanel {

// Variable roles and lag order for the two-equation model.
struct ModelSpec {
    std::string p_variable; // commodity price index column
    std::string y_variable; // spread column
    std::string r_variable; // global shock series
    std::vector<std::string> controls;
    int lag_order = 2;

    void validate(const PanelDataset& data) const; // throws DesignError
};

// One regressor column: variable, lag, optional exporter interaction, the
// coefficient tag it estimates, and whether it is a lag of the dependent
// (and therefore instrumented GMM-style rather than IV-style).
struct TermDef {
    std::string variable;
    int lag = 0;
    bool interacted = false;
    std::string tag;
    bool instrumented = false;
};

// Fully materialized regression design for one equation. Rows are the usable
// (entity, period) pairs; fixed effects are bookkept per row and eliminated by
// the GMM transform downstream, never estimated as dummies.
struct EquationDesign {
    std::string dependent_name;
    Eigen::VectorXd dependent;
    Eigen::MatrixXd regressors;
    std::vector<TermDef> terms;       // one per column
    std::vector<RowKey> row_index;    // (entity, period), entity-major
    std::vector<int> fixed_effect_groups; // entity index per row

    int n_entities = 0;
    int n_periods = 0;
    std::vector<char> entity_exporter;          // group flag per entity
    std::vector<std::vector<Cell>> dep_levels;  // dependent levels [entity][period]

    int n_rows() const { return static_cast<int>(row_index.size()); }
    int n_terms() const { return static_cast<int>(terms.size()); }
};

// Generic design builder: dependent levels plus the given term list, rows
// restricted to observations where every term is present.
EquationDesign build_design(const PanelDataset& data, const std::string& dependent,
                            const std::vector<TermDef>& terms);

// Canonical term lists (lags ascending, base before interaction, controls last).
std::vector<TermDef> price_equation_terms(const std::string& p, const std::string& r, int L,
                                          const std::vector<std::string>& controls);
std::vector<TermDef> spread_equation_terms(const std::string& y, const std::string& r,
                                           const std::string& p, int L,
                                           const std::vector<std::string>& controls);

// dependent p_it; regressors {p lags 1..L} u {r lags 0..L} u {r x exporter 0..L} u controls.
EquationDesign build_price_equation(const ModelSpec& spec, const PanelDataset& data);

// dependent y_it; regressors {y lags 1..L} u {r lags 0..L} u {r x exporter 0..L}
// u {p lags 0..L} u {p x exporter 0..L} u controls.
EquationDesign build_spread_equation(const ModelSpec& spec, const PanelDataset& data);

// Total, injective map coefficient tag -> column index.
std::map<std::string, int> term_map(const EquationDesign& design);

} // namespace gfcpanel
