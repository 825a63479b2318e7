#include "gfcpanel/model.hpp"

#include "gfcpanel/errors.hpp"

#include <algorithm>
#include <set>

namespace gfcpanel {

void ModelSpec::validate(const PanelDataset& data) const {
    if (lag_order < 1) throw DesignError("lag_order must be >= 1");
    std::vector<std::string> names = {p_variable, y_variable, r_variable};
    names.insert(names.end(), controls.begin(), controls.end());
    std::set<std::string> unique(names.begin(), names.end());
    if (unique.size() != names.size())
        throw DesignError("p, y, r and controls must be pairwise distinct");
    for (const auto& n : names) {
        if (!data.has_variable(n))
            throw DesignError("variable '" + n + "' not found in dataset");
    }
}

EquationDesign build_design(const PanelDataset& data, const std::string& dependent,
                            const std::vector<TermDef>& terms) {
    std::vector<TermRequirement> required;
    required.push_back({dependent, 0});
    for (const auto& t : terms) required.push_back({t.variable, t.lag});

    auto rows = align_observations(data, required);
    if (rows.empty()) throw DesignError("empty usable sample for dependent '" + dependent + "'");

    EquationDesign d;
    d.dependent_name = dependent;
    d.row_index = std::move(rows);
    d.terms = terms;
    d.n_entities = data.n_entities();
    d.n_periods = data.n_periods();

    const int n = d.n_rows();
    const int k = d.n_terms();
    d.dependent.resize(n);
    d.regressors.resize(n, k);
    d.fixed_effect_groups.resize(n);

    d.entity_exporter.resize(d.n_entities);
    for (int e = 0; e < d.n_entities; ++e) d.entity_exporter[e] = data.group_flag(e) ? 1 : 0;

    for (int i = 0; i < n; ++i) {
        const RowKey& rk = d.row_index[i];
        d.fixed_effect_groups[i] = rk.entity;
        d.dependent(i) = *data.value_at(rk.entity, dependent, rk.period);
        double flag = d.entity_exporter[rk.entity] ? 1.0 : 0.0;
        for (int j = 0; j < k; ++j) {
            const TermDef& term = d.terms[j];
            double v = *data.value_at(rk.entity, term.variable, rk.period - term.lag);
            d.regressors(i, j) = term.interacted ? v * flag : v;
        }
    }

    // Dependent levels per entity, needed for instrument construction.
    d.dep_levels.assign(d.n_entities, std::vector<Cell>(d.n_periods));
    for (int e = 0; e < d.n_entities; ++e)
        for (int t = 0; t < d.n_periods; ++t)
            d.dep_levels[e][t] = data.value_at(e, dependent, t);

    return d;
}

namespace {

std::string lag_tag(const std::string& prefix, int j, const std::string& suffix) {
    return prefix + std::to_string(j) + "^" + suffix;
}

} // namespace

std::vector<TermDef> price_equation_terms(const std::string& p, const std::string& r, int L,
                                          const std::vector<std::string>& controls) {
    std::vector<TermDef> terms;
    for (int j = 1; j <= L; ++j) terms.push_back({p, j, false, lag_tag("a", j, "p"), true});
    for (int j = 0; j <= L; ++j) terms.push_back({r, j, false, lag_tag("a", j, "r"), false});
    for (int j = 0; j <= L; ++j) terms.push_back({r, j, true, lag_tag("a", j, "rx"), false});
    for (const auto& x : controls) terms.push_back({x, 0, false, "A:" + x, false});
    return terms;
}

std::vector<TermDef> spread_equation_terms(const std::string& y, const std::string& r,
                                           const std::string& p, int L,
                                           const std::vector<std::string>& controls) {
    std::vector<TermDef> terms;
    for (int j = 1; j <= L; ++j) terms.push_back({y, j, false, lag_tag("b", j, "y"), true});
    for (int j = 0; j <= L; ++j) terms.push_back({r, j, false, lag_tag("b", j, "r"), false});
    for (int j = 0; j <= L; ++j) terms.push_back({r, j, true, lag_tag("b", j, "rx"), false});
    for (int j = 0; j <= L; ++j) terms.push_back({p, j, false, lag_tag("b", j, "p"), false});
    for (int j = 0; j <= L; ++j) terms.push_back({p, j, true, lag_tag("b", j, "px"), false});
    for (const auto& x : controls) terms.push_back({x, 0, false, "B:" + x, false});
    return terms;
}

EquationDesign build_price_equation(const ModelSpec& spec, const PanelDataset& data) {
    spec.validate(data);
    return build_design(
        data, spec.p_variable,
        price_equation_terms(spec.p_variable, spec.r_variable, spec.lag_order, spec.controls));
}

EquationDesign build_spread_equation(const ModelSpec& spec, const PanelDataset& data) {
    spec.validate(data);
    return build_design(data, spec.y_variable,
                        spread_equation_terms(spec.y_variable, spec.r_variable, spec.p_variable,
                                              spec.lag_order, spec.controls));
}

std::map<std::string, int> term_map(const EquationDesign& design) {
    std::map<std::string, int> out;
    for (int j = 0; j < design.n_terms(); ++j) {
        auto [it, inserted] = out.emplace(design.terms[j].tag, j);
        if (!inserted) throw DesignError("duplicate term tag '" + design.terms[j].tag + "'");
    }
    return out;
}

} // namespace gfcpanel
