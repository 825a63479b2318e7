#include "gfcpanel/panel.hpp"

#include "gfcpanel/errors.hpp"
#include "gfcpanel/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace gfcpanel {

// ---------------------------------------------------------------- Quarter

Quarter Quarter::from_ordinal(int ord) {
    Quarter out;
    out.year = ord / 4;
    out.q = ord % 4 + 1;
    if (out.q < 1) { // negative ordinals
        out.q += 4;
        out.year -= 1;
    }
    return out;
}

Quarter Quarter::parse(const std::string& text) {
    // YYYY-Qn, e.g. 1999-Q1
    auto fail = [&] { throw IngestionError("malformed period '" + text + "' (expected YYYY-Qn)"); };
    if (text.size() < 6) fail();
    std::size_t dash = text.find('-');
    if (dash == std::string::npos || dash + 2 >= text.size()) fail();
    if (text[dash + 1] != 'Q' && text[dash + 1] != 'q') fail();
    const std::string ys = text.substr(0, dash);
    const std::string qs = text.substr(dash + 2);
    if (ys.empty() || qs.size() != 1) fail();
    for (char c : ys)
        if (!std::isdigit(static_cast<unsigned char>(c))) fail();
    if (!std::isdigit(static_cast<unsigned char>(qs[0]))) fail();
    Quarter out;
    out.year = std::atoi(ys.c_str());
    out.q = qs[0] - '0';
    if (out.q < 1 || out.q > 4) fail();
    return out;
}

std::string Quarter::str() const {
    return std::to_string(year) + "-Q" + std::to_string(q);
}

// ---------------------------------------------------------------- Series

Series Series::from_values(const std::vector<double>& values) {
    std::vector<Cell> cells(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) cells[i] = values[i];
    return Series(std::move(cells));
}

std::size_t Series::observed_count() const {
    std::size_t n = 0;
    for (const auto& c : cells_)
        if (c) ++n;
    return n;
}

Series lag(const Series& s, int k) {
    if (k < 1) throw DesignError("lag: k must be >= 1");
    Series out(s.size());
    for (std::size_t t = static_cast<std::size_t>(k); t < s.size(); ++t)
        out[t] = s[t - k];
    return out;
}

Series first_difference(const Series& s) {
    Series out(s.size());
    for (std::size_t t = 1; t < s.size(); ++t) {
        if (s[t] && s[t - 1]) out[t] = *s[t] - *s[t - 1];
    }
    return out;
}

double sample_sd(const Series& s) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : s.cells()) {
        if (c) {
            sum += *c;
            ++n;
        }
    }
    if (n < 2) throw InsufficientDataError("sample_sd: needs at least 2 observations");
    double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& c : s.cells()) {
        if (c) {
            double d = *c - mean;
            ss += d * d;
        }
    }
    return std::sqrt(ss / static_cast<double>(n - 1));
}

// ---------------------------------------------------------------- PanelDataset

PanelDataset::PanelDataset(std::vector<std::string> entities, std::vector<Quarter> periods)
    : entities_(std::move(entities)), periods_(std::move(periods)),
      group_flag_(entities_.size(), 0) {
    for (std::size_t i = 1; i < periods_.size(); ++i) {
        if (!(periods_[i - 1] < periods_[i]))
            throw IngestionError("period index must be strictly increasing");
    }
}

int PanelDataset::entity_index(const std::string& name) const {
    auto it = std::find(entities_.begin(), entities_.end(), name);
    return it == entities_.end() ? -1 : static_cast<int>(it - entities_.begin());
}

bool PanelDataset::has_variable(const std::string& name) const {
    if (global_series_.count(name)) return true;
    for (const auto& [key, s] : country_series_)
        if (key.second == name) return true;
    return false;
}

bool PanelDataset::is_global(const std::string& name) const {
    return global_series_.count(name) > 0;
}

std::vector<std::string> PanelDataset::variable_names() const {
    std::set<std::string> names;
    for (const auto& [key, s] : country_series_) names.insert(key.second);
    for (const auto& [key, s] : global_series_) names.insert(key);
    return {names.begin(), names.end()};
}

void PanelDataset::set_country_series(const std::string& entity, const std::string& variable,
                                      Series s) {
    int e = entity_index(entity);
    if (e < 0) throw IngestionError("unknown entity '" + entity + "'");
    if (s.size() != periods_.size())
        throw IngestionError("series length mismatch for " + entity + "/" + variable);
    country_series_[{e, variable}] = std::move(s);
}

void PanelDataset::set_global_series(const std::string& variable, Series s) {
    if (s.size() != periods_.size())
        throw IngestionError("series length mismatch for global " + variable);
    global_series_[variable] = std::move(s);
}

const Series& PanelDataset::country_series(int entity, const std::string& variable) const {
    auto it = country_series_.find({entity, variable});
    if (it == country_series_.end())
        throw DesignError("no series '" + variable + "' for entity index " +
                          std::to_string(entity));
    return it->second;
}

const Series& PanelDataset::global_series(const std::string& variable) const {
    auto it = global_series_.find(variable);
    if (it == global_series_.end())
        throw DesignError("no global series '" + variable + "'");
    return it->second;
}

Cell PanelDataset::value_at(int entity, const std::string& variable, int period) const {
    if (period < 0 || period >= n_periods()) return std::nullopt;
    auto git = global_series_.find(variable);
    if (git != global_series_.end()) return git->second[period];
    auto it = country_series_.find({entity, variable});
    if (it == country_series_.end()) return std::nullopt;
    return it->second[period];
}

void PanelDataset::set_group_flag(const std::string& entity, bool exporter) {
    int e = entity_index(entity);
    if (e < 0) throw IngestionError("unknown entity '" + entity + "'");
    group_flag_[e] = exporter ? 1 : 0;
}

bool PanelDataset::group_flag(int entity) const {
    return group_flag_.at(entity) != 0;
}

int PanelDataset::entity_span(int entity) const {
    int span = 0;
    for (int t = 0; t < n_periods(); ++t) {
        for (const auto& [key, s] : country_series_) {
            if (key.first == entity && s[t]) {
                ++span;
                break;
            }
        }
    }
    return span;
}

double PanelDataset::average_span() const {
    if (entities_.empty()) return 0.0;
    double sum = 0.0;
    for (int e = 0; e < n_entities(); ++e) sum += entity_span(e);
    return sum / static_cast<double>(n_entities());
}

PanelDataset PanelDataset::with_negated_global(const std::string& variable) const {
    PanelDataset out = *this;
    const Series& s = out.global_series(variable);
    Series neg(s.size());
    for (std::size_t t = 0; t < s.size(); ++t)
        if (s[t]) neg[t] = -*s[t];
    out.global_series_[variable] = std::move(neg);
    return out;
}

// ---------------------------------------------------------------- ingestion

PanelDataset load_panel_rows(const std::vector<LongRow>& rows,
                             const std::vector<std::string>& global_variables) {
    std::set<std::string> globals(global_variables.begin(), global_variables.end());
    std::set<std::string> entity_set;
    std::optional<int> min_ord, max_ord;

    struct ParsedRow {
        std::string entity;
        int ordinal;
        std::string variable;
        double value;
        std::size_t source_row;
    };
    std::vector<ParsedRow> parsed;
    parsed.reserve(rows.size());

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const LongRow& r = rows[i];
        Quarter qt;
        try {
            qt = Quarter::parse(r.period);
        } catch (const IngestionError& e) {
            throw IngestionError("row " + std::to_string(i + 1) + ": " + e.what());
        }
        if (!std::isfinite(r.value))
            throw IngestionError("row " + std::to_string(i + 1) + ": non-finite value");
        int ord = qt.ordinal();
        if (!min_ord || ord < *min_ord) min_ord = ord;
        if (!max_ord || ord > *max_ord) max_ord = ord;
        if (!globals.count(r.variable)) entity_set.insert(r.entity);
        parsed.push_back({r.entity, ord, r.variable, r.value, i + 1});
    }
    if (parsed.empty()) throw IngestionError("no rows to load");

    std::vector<Quarter> periods;
    for (int ord = *min_ord; ord <= *max_ord; ++ord) periods.push_back(Quarter::from_ordinal(ord));

    PanelDataset data(std::vector<std::string>(entity_set.begin(), entity_set.end()), periods);

    std::map<std::pair<std::string, std::string>, Series> country; // (entity, var)
    std::map<std::string, Series> global_map;
    std::set<std::tuple<std::string, int, std::string>> seen;

    for (const auto& r : parsed) {
        if (!seen.insert({globals.count(r.variable) ? std::string() : r.entity, r.ordinal,
                          r.variable}).second) {
            throw IngestionError("row " + std::to_string(r.source_row) + ": duplicate cell (" +
                                 r.entity + ", " + Quarter::from_ordinal(r.ordinal).str() + ", " +
                                 r.variable + ")");
        }
        int t = r.ordinal - *min_ord;
        if (globals.count(r.variable)) {
            auto& s = global_map.try_emplace(r.variable, Series(periods.size())).first->second;
            s[t] = r.value;
        } else {
            auto& s = country.try_emplace({r.entity, r.variable}, Series(periods.size()))
                          .first->second;
            s[t] = r.value;
        }
    }
    for (auto& [key, s] : country) data.set_country_series(key.first, key.second, std::move(s));
    for (auto& [key, s] : global_map) data.set_global_series(key, std::move(s));
    return data;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

PanelDataset load_panel_csv(std::istream& in, const std::vector<std::string>& global_variables) {
    std::string line;
    if (!std::getline(in, line)) throw IngestionError("empty input");
    auto header = split_csv_line(line);
    if (header.size() != 4 || header[0] != "entity" || header[1] != "period" ||
        header[2] != "variable" || header[3] != "value")
        throw IngestionError("expected header 'entity,period,variable,value'");

    std::vector<LongRow> rows;
    std::size_t file_row = 1;
    while (std::getline(in, line)) {
        ++file_row;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 4)
            throw IngestionError("row " + std::to_string(file_row) + ": expected 4 fields");
        char* end = nullptr;
        double v = std::strtod(fields[3].c_str(), &end);
        if (end == fields[3].c_str() || *end != '\0')
            throw IngestionError("row " + std::to_string(file_row) + ": non-numeric value '" +
                                 fields[3] + "'");
        rows.push_back({fields[0], fields[1], fields[2], v});
    }
    try {
        return load_panel_rows(rows, global_variables);
    } catch (const IngestionError& e) {
        // load_panel_rows reports 1-based data rows; shift by the header line.
        throw IngestionError(std::string(e.what()) + " (csv rows are offset by the header)");
    }
}

PanelDataset load_panel_csv_file(const std::string& path,
                                 const std::vector<std::string>& global_variables) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open panel csv '" + path + "'");
    return load_panel_csv(in, global_variables);
}

void export_long_csv(const PanelDataset& data, std::ostream& out) {
    out << "entity,period,variable,value\n";
    auto vars = data.variable_names();
    // Global series are written once, with an empty entity field.
    for (const auto& v : vars) {
        if (!data.is_global(v)) continue;
        const Series& s = data.global_series(v);
        for (int t = 0; t < data.n_periods(); ++t)
            if (s[t])
                out << "," << data.periods()[t].str() << "," << v << ","
                    << num::format_double(*s[t]) << "\n";
    }
    for (int e = 0; e < data.n_entities(); ++e) {
        for (const auto& v : vars) {
            if (data.is_global(v)) continue;
            for (int t = 0; t < data.n_periods(); ++t) {
                Cell c = data.value_at(e, v, t);
                if (c)
                    out << data.entities()[e] << "," << data.periods()[t].str() << "," << v << ","
                        << num::format_double(*c) << "\n";
            }
        }
    }
}

void apply_group_flags_from_variable(PanelDataset& data, const std::string& variable) {
    for (int e = 0; e < data.n_entities(); ++e) {
        std::optional<double> flag;
        for (int t = 0; t < data.n_periods(); ++t) {
            Cell c = data.value_at(e, variable, t);
            if (!c) continue;
            if (flag && *flag != *c)
                throw IngestionError("group flag '" + variable + "' varies over time for entity " +
                                     data.entities()[e]);
            flag = *c;
        }
        if (!flag)
            throw IngestionError("group flag '" + variable + "' missing for entity " +
                                 data.entities()[e]);
        data.set_group_flag(data.entities()[e], *flag >= 0.5);
    }
}

std::vector<RowKey> align_observations(const PanelDataset& data,
                                       const std::vector<TermRequirement>& required) {
    for (const auto& req : required) {
        if (!data.has_variable(req.variable))
            throw DesignError("align_observations: unknown variable '" + req.variable + "'");
    }
    std::vector<RowKey> rows;
    for (int e = 0; e < data.n_entities(); ++e) {
        for (int t = 0; t < data.n_periods(); ++t) {
            bool ok = true;
            for (const auto& req : required) {
                if (!data.value_at(e, req.variable, t - req.lag)) {
                    ok = false;
                    break;
                }
            }
            if (ok) rows.push_back({e, t});
        }
    }
    return rows;
}

} // namespace gfcpanel
