#pragma once

#include <compare>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gfcpanel {

// Calendar quarter, parsed from / formatted as "YYYY-Qn".
struct Quarter {
    int year = 0;
    int q = 1; // 1..4

    auto operator<=>(const Quarter&) const = default;

    // Total quarter count since year 0; consecutive quarters differ by 1.
    int ordinal() const { return year * 4 + (q - 1); }

    static Quarter from_ordinal(int ord);
    static Quarter parse(const std::string& text); // throws IngestionError
    std::string str() const;
};

using Cell = std::optional<double>;

// Time series aligned to a dataset's quarterly index. Missing values are
// explicit cells, never sentinel reals.
class Series {
public:
    Series() = default;
    explicit Series(std::size_t n) : cells_(n) {}
    explicit Series(std::vector<Cell> cells) : cells_(std::move(cells)) {}
    static Series from_values(const std::vector<double>& values);

    std::size_t size() const { return cells_.size(); }
    const Cell& operator[](std::size_t i) const { return cells_[i]; }
    Cell& operator[](std::size_t i) { return cells_[i]; }
    const std::vector<Cell>& cells() const { return cells_; }

    std::size_t observed_count() const;

    bool operator==(const Series&) const = default;

private:
    std::vector<Cell> cells_;
};

// Shifts the series back by k periods: out[t] = in[t-k], first k cells missing.
Series lag(const Series& s, int k);

// out[t] = in[t] - in[t-1]; missing where either operand is missing.
Series first_difference(const Series& s);

// Unbiased (n-1) standard deviation over non-missing cells; needs >= 2 of them.
double sample_sd(const Series& s);

// One record of the long-format input: (entity, period, variable, value).
struct LongRow {
    std::string entity;
    std::string period;
    std::string variable;
    double value = 0.0;
};

struct RowKey {
    int entity = 0; // index into PanelDataset::entities()
    int period = 0; // index into PanelDataset::periods()

    auto operator<=>(const RowKey&) const = default;
};

struct TermRequirement {
    std::string variable;
    int lag = 0;
};

// Unbalanced entity x quarter panel. Country series are stored per entity;
// global series (entity-invariant, e.g. the shock variable) are stored once
// and broadcast on access. Immutable once populated.
class PanelDataset {
public:
    PanelDataset() = default;
    PanelDataset(std::vector<std::string> entities, std::vector<Quarter> periods);

    const std::vector<std::string>& entities() const { return entities_; }
    const std::vector<Quarter>& periods() const { return periods_; }
    int n_entities() const { return static_cast<int>(entities_.size()); }
    int n_periods() const { return static_cast<int>(periods_.size()); }

    int entity_index(const std::string& name) const; // -1 when absent
    bool has_variable(const std::string& name) const;
    bool is_global(const std::string& name) const;
    std::vector<std::string> variable_names() const; // sorted, country + global

    void set_country_series(const std::string& entity, const std::string& variable, Series s);
    void set_global_series(const std::string& variable, Series s);

    const Series& country_series(int entity, const std::string& variable) const;
    const Series& global_series(const std::string& variable) const;

    // Cell lookup with global broadcast; missing when the series does not exist
    // for this entity.
    Cell value_at(int entity, const std::string& variable, int period) const;

    void set_group_flag(const std::string& entity, bool exporter);
    bool group_flag(int entity) const;

    // Number of periods with at least one observed country variable.
    int entity_span(int entity) const;
    double average_span() const;

    PanelDataset with_negated_global(const std::string& variable) const;

private:
    std::vector<std::string> entities_;
    std::vector<Quarter> periods_;
    std::map<std::pair<int, std::string>, Series> country_series_;
    std::map<std::string, Series> global_series_;
    std::vector<char> group_flag_;
};

// Builds a dataset from long-format rows. Entities are sorted lexicographically,
// the period index is the contiguous quarter range covering all rows. Duplicate
// (entity, period, variable) cells are rejected.
PanelDataset load_panel_rows(const std::vector<LongRow>& rows,
                             const std::vector<std::string>& global_variables = {});

// CSV ingestion: header "entity,period,variable,value". Errors name the 1-based
// file row. Variables listed in global_variables are stored entity-invariant.
PanelDataset load_panel_csv(std::istream& in,
                            const std::vector<std::string>& global_variables = {});
PanelDataset load_panel_csv_file(const std::string& path,
                                 const std::vector<std::string>& global_variables = {});

// Long-format export; missing cells are omitted. Reloading reproduces the
// dataset bit-exactly.
void export_long_csv(const PanelDataset& data, std::ostream& out);

// Reads per-entity 0/1 group flags from a country variable that must be
// constant over each entity's observed periods.
void apply_group_flags_from_variable(PanelDataset& data, const std::string& variable);

// Rows (entity, period) where every required (variable, lag) term is observed;
// ordered by entity then period. Unknown variables throw DesignError.
std::vector<RowKey> align_observations(const PanelDataset& data,
                                       const std::vector<TermRequirement>& required);

} // namespace gfcpanel
