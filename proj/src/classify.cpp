#include "gfcpanel/classify.hpp"

#include "gfcpanel/errors.hpp"
#include "gfcpanel/numerics.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace gfcpanel {

double commodity_trade_ratio(const TradeRecord& rec) {
    if (rec.commodity_exports < 0.0 || rec.commodity_imports < 0.0)
        throw IngestionError("trade flows must be nonnegative for " + rec.entity);
    double total = rec.commodity_exports + rec.commodity_imports;
    if (total <= 0.0)
        throw IngestionError("zero total commodity trade for " + rec.entity);
    return (rec.commodity_exports - rec.commodity_imports) / total;
}

GroupAssignment classify(const std::map<std::string, double>& ratios) {
    GroupAssignment out;
    for (const auto& [entity, ratio] : ratios) {
        if (!std::isfinite(ratio))
            throw IngestionError("non-finite trade ratio for " + entity);
        out.ratio[entity] = ratio;
        out.group[entity] = ratio >= 0.0 ? 1 : 2; // zero balance counts as exporter
    }
    return out;
}

GroupAssignment classify_records(const std::vector<TradeRecord>& records) {
    std::map<std::string, TradeRecord> pooled;
    for (const auto& rec : records) {
        auto& agg = pooled.try_emplace(rec.entity, TradeRecord{rec.entity, 0, 0.0, 0.0})
                        .first->second;
        agg.commodity_exports += rec.commodity_exports;
        agg.commodity_imports += rec.commodity_imports;
    }
    std::map<std::string, double> ratios;
    for (const auto& [entity, agg] : pooled) ratios[entity] = commodity_trade_ratio(agg);
    return classify(ratios);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
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

std::vector<TradeRecord> load_trade_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IngestionError("empty trade csv");
    auto header = split_line(line);
    if (header.size() != 4 || header[0] != "entity" || header[1] != "year" ||
        header[2] != "commodity_exports" || header[3] != "commodity_imports")
        throw IngestionError(
            "expected header 'entity,year,commodity_exports,commodity_imports'");

    std::vector<TradeRecord> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != 4)
            throw IngestionError("trade csv row " + std::to_string(row) + ": expected 4 fields");
        TradeRecord rec;
        rec.entity = fields[0];
        try {
            rec.year = std::stoi(fields[1]);
            rec.commodity_exports = std::stod(fields[2]);
            rec.commodity_imports = std::stod(fields[3]);
        } catch (const std::exception&) {
            throw IngestionError("trade csv row " + std::to_string(row) + ": bad numeric field");
        }
        out.push_back(rec);
    }
    return out;
}

std::vector<TradeRecord> load_trade_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trade csv '" + path + "'");
    return load_trade_csv(in);
}

Series ctot_index(const std::vector<double>& weights,
                  const std::vector<Series>& log_price_changes) {
    if (weights.size() != log_price_changes.size())
        throw DesignError("ctot_index: one weight per commodity series required");
    if (log_price_changes.empty()) throw DesignError("ctot_index: no commodity series");
    std::size_t n = log_price_changes.front().size();
    for (const auto& s : log_price_changes)
        if (s.size() != n) throw DesignError("ctot_index: misaligned commodity series");

    Series index(n);
    if (n == 0) return index;
    index[0] = 100.0;
    bool broken = false;
    for (std::size_t t = 1; t < n; ++t) {
        if (broken) continue;
        double growth = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            if (weights[k] == 0.0) continue; // zero-weight commodities cannot break the chain
            const Cell& c = log_price_changes[k][t];
            if (!c) {
                broken = true;
                break;
            }
            growth += weights[k] * *c;
        }
        if (!broken) index[t] = *index[t - 1] * std::exp(growth);
    }
    return index;
}

Correlation correlation(const Series& x, const Series& y) {
    if (x.size() != y.size()) throw DesignError("correlation: series lengths differ");
    double sx = 0.0, sy = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] && y[i]) {
            sx += *x[i];
            sy += *y[i];
            ++n;
        }
    }
    if (n < 3) throw InsufficientDataError("correlation: needs at least 3 paired observations");
    double mx = sx / n, my = sy / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] && y[i]) {
            double dx = *x[i] - mx, dy = *y[i] - my;
            sxx += dx * dx;
            syy += dy * dy;
            sxy += dx * dy;
        }
    }
    if (sxx <= 0.0 || syy <= 0.0)
        throw InsufficientDataError("correlation: zero variance in a series");

    Correlation out;
    out.n = n;
    out.r = sxy / std::sqrt(sxx * syy);
    double r2 = std::min(out.r * out.r, 1.0);
    if (r2 >= 1.0) {
        out.p_value = 0.0;
    } else {
        double t = out.r * std::sqrt((n - 2) / (1.0 - r2));
        out.p_value = num::student_t_two_sided(t, n - 2);
    }
    return out;
}

double coefficient_of_variation(const Series& s) {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : s.cells()) {
        if (c) {
            sum += *c;
            ++n;
        }
    }
    if (n < 2) throw InsufficientDataError("coefficient_of_variation: needs >= 2 observations");
    double mean = sum / n;
    if (mean == 0.0) throw InsufficientDataError("coefficient_of_variation: zero mean");
    return sample_sd(s) / mean;
}

} // namespace gfcpanel
