#pragma once

#include "gfcpanel/gmm.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gfcpanel {

enum class IrfPanel { A, B, C }; // A: shock->price, B: shock->spread, C: shock->price->spread
enum class Group { exporter, importer };
enum class ShockProfile { transitory, permanent };

struct IrfRequest {
    double shock_size = 1.0;
    int horizon = 20;
    Group group = Group::exporter;
    IrfPanel panel = IrfPanel::B;
    ShockProfile profile = ShockProfile::transitory;

    void validate() const; // throws DesignError
};

struct IrfPath {
    std::vector<double> p_response; // horizon + 1 entries
    std::vector<double> y_response; // empty when no spread coefficients were given
    bool explosive = false;         // |final response| exceeded 1e6 x shock size
};

// Coefficient vector keyed by term tags (a1^p, b0^rx, ...). Control tags are
// carried along but ignored by the impulse-response recursion.
struct TermMappedCoeffs {
    Eigen::VectorXd values;
    std::map<std::string, int> index;

    static TermMappedCoeffs from_result(const EstimationResult& r);
    static TermMappedCoeffs from_pairs(const std::vector<std::pair<std::string, double>>& pairs);

    bool empty() const { return values.size() == 0; }
    bool has(const std::string& tag) const { return index.count(tag) > 0; }
    double at(const std::string& tag) const;
};

// Deviation-from-baseline recursion with zero initial conditions. Fixed
// effects and controls cancel in deviations. The group selects the effective
// coefficients (base plus exporter interaction).
IrfPath compute_irf(const TermMappedCoeffs& coeffs_p, const TermMappedCoeffs& coeffs_y,
                    const IrfRequest& req);

// Same recursion with the direct shock coefficients of the spread equation
// forced to zero, so only the commodity-price channel remains.
IrfPath channel_irf(const TermMappedCoeffs& coeffs_p, const TermMappedCoeffs& coeffs_y,
                    const IrfRequest& req);

// (exporter path, importer path) for the request's panel.
std::pair<IrfPath, IrfPath> group_pair(const TermMappedCoeffs& coeffs_p,
                                       const TermMappedCoeffs& coeffs_y, const IrfRequest& req);

} // namespace gfcpanel
