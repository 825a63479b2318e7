#pragma once

#include "gfcpanel/panel.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace gfcpanel {

// Annual commodity trade flows of one country.
struct TradeRecord {
    std::string entity;
    int year = 0;
    double commodity_exports = 0.0;
    double commodity_imports = 0.0;
};

// Group 1 (net exporter) iff the trade ratio is zero or positive.
struct GroupAssignment {
    std::map<std::string, int> group;    // entity -> 1 (exporter) or 2 (importer)
    std::map<std::string, double> ratio; // the ratio that decided it

    bool is_exporter(const std::string& entity) const { return group.at(entity) == 1; }
};

// (exports - imports) / (exports + imports), in [-1, 1].
double commodity_trade_ratio(const TradeRecord& rec);

GroupAssignment classify(const std::map<std::string, double>& ratios);

// Pools annual records per entity (ratio of summed flows) and classifies.
GroupAssignment classify_records(const std::vector<TradeRecord>& records);

// CSV: header "entity,year,commodity_exports,commodity_imports".
std::vector<TradeRecord> load_trade_csv(std::istream& in);
std::vector<TradeRecord> load_trade_csv_file(const std::string& path);

// Chained commodity price index: I_0 = 100,
// I_t = I_{t-1} * exp(sum_k w_k * dlogP_{k,t}). A missing change breaks the
// chain from that period on.
Series ctot_index(const std::vector<double>& weights, const std::vector<Series>& log_price_changes);

struct Correlation {
    double r = 0.0;
    double p_value = 1.0;
    int n = 0;
};

// Pearson correlation over pairwise-complete observations with a two-sided
// t-test p-value (n - 2 degrees of freedom). Needs >= 3 pairs.
Correlation correlation(const Series& x, const Series& y);

// Sample standard deviation divided by the mean; the mean must be nonzero.
double coefficient_of_variation(const Series& s);

} // namespace gfcpanel
