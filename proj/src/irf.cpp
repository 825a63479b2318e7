#include "gfcpanel/irf.hpp"

#include "gfcpanel/errors.hpp"

#include <cmath>

namespace gfcpanel {

void IrfRequest::validate() const {
    if (horizon < 1) throw DesignError("irf horizon must be >= 1");
    if (!(shock_size > 0.0)) throw DesignError("shock_size must be positive");
}

TermMappedCoeffs TermMappedCoeffs::from_result(const EstimationResult& r) {
    TermMappedCoeffs out;
    out.values = r.coefficients;
    for (std::size_t j = 0; j < r.term_tags.size(); ++j)
        out.index[r.term_tags[j]] = static_cast<int>(j);
    return out;
}

TermMappedCoeffs TermMappedCoeffs::from_pairs(
    const std::vector<std::pair<std::string, double>>& pairs) {
    TermMappedCoeffs out;
    out.values.resize(static_cast<int>(pairs.size()));
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        out.values(static_cast<int>(j)) = pairs[j].second;
        out.index[pairs[j].first] = static_cast<int>(j);
    }
    return out;
}

double TermMappedCoeffs::at(const std::string& tag) const {
    auto it = index.find(tag);
    if (it == index.end()) throw DesignError("missing coefficient '" + tag + "'");
    return values(it->second);
}

namespace {

struct RoleCoeffs {
    int L = 0;
    std::vector<double> own;     // lags 1..L
    std::vector<double> shock;   // lags 0..L
    std::vector<double> shock_x;
    std::vector<double> price;   // spread equation only
    std::vector<double> price_x;
};

int detect_lag_order(const TermMappedCoeffs& c, const std::string& prefix,
                     const std::string& own_suffix) {
    int L = 0;
    while (c.has(prefix + std::to_string(L + 1) + "^" + own_suffix)) ++L;
    if (L == 0) throw DesignError("coefficient vector has no " + prefix + "j^" + own_suffix +
                                  " terms");
    return L;
}

RoleCoeffs parse_price(const TermMappedCoeffs& c) {
    RoleCoeffs out;
    out.L = detect_lag_order(c, "a", "p");
    for (int j = 1; j <= out.L; ++j) out.own.push_back(c.at("a" + std::to_string(j) + "^p"));
    for (int j = 0; j <= out.L; ++j) {
        out.shock.push_back(c.at("a" + std::to_string(j) + "^r"));
        out.shock_x.push_back(c.at("a" + std::to_string(j) + "^rx"));
    }
    return out;
}

RoleCoeffs parse_spread(const TermMappedCoeffs& c) {
    RoleCoeffs out;
    out.L = detect_lag_order(c, "b", "y");
    for (int j = 1; j <= out.L; ++j) out.own.push_back(c.at("b" + std::to_string(j) + "^y"));
    for (int j = 0; j <= out.L; ++j) {
        out.shock.push_back(c.at("b" + std::to_string(j) + "^r"));
        out.shock_x.push_back(c.at("b" + std::to_string(j) + "^rx"));
        out.price.push_back(c.at("b" + std::to_string(j) + "^p"));
        out.price_x.push_back(c.at("b" + std::to_string(j) + "^px"));
    }
    return out;
}

IrfPath run_recursion(const TermMappedCoeffs& coeffs_p, const TermMappedCoeffs& coeffs_y,
                      const IrfRequest& req, bool sever_direct_shock) {
    req.validate();
    if (coeffs_p.empty()) throw DesignError("price-equation coefficients are required");
    RoleCoeffs eq_p = parse_price(coeffs_p);
    const bool with_y = !coeffs_y.empty();
    RoleCoeffs eq_y;
    if (with_y) eq_y = parse_spread(coeffs_y);
    if (!with_y && req.panel != IrfPanel::A)
        throw DesignError("spread-equation coefficients are required for panels B and C");

    const double d = req.group == Group::exporter ? 1.0 : 0.0;
    const int H = req.horizon;

    auto r_at = [&](int h) -> double {
        if (h < 0) return 0.0;
        if (req.profile == ShockProfile::permanent) return req.shock_size;
        return h == 0 ? req.shock_size : 0.0;
    };

    IrfPath path;
    path.p_response.assign(H + 1, 0.0);
    if (with_y) path.y_response.assign(H + 1, 0.0);

    for (int h = 0; h <= H; ++h) {
        double p = 0.0;
        for (int j = 1; j <= eq_p.L; ++j)
            if (h - j >= 0) p += eq_p.own[j - 1] * path.p_response[h - j];
        for (int j = 0; j <= eq_p.L; ++j)
            p += (eq_p.shock[j] + d * eq_p.shock_x[j]) * r_at(h - j);
        path.p_response[h] = p;

        if (!with_y) continue;
        double y = 0.0;
        for (int j = 1; j <= eq_y.L; ++j)
            if (h - j >= 0) y += eq_y.own[j - 1] * path.y_response[h - j];
        if (!sever_direct_shock) {
            for (int j = 0; j <= eq_y.L; ++j)
                y += (eq_y.shock[j] + d * eq_y.shock_x[j]) * r_at(h - j);
        }
        for (int j = 0; j <= eq_y.L; ++j)
            if (h - j >= 0)
                y += (eq_y.price[j] + d * eq_y.price_x[j]) * path.p_response[h - j];
        path.y_response[h] = y;
    }

    const double limit = 1e6 * req.shock_size;
    path.explosive = std::fabs(path.p_response[H]) > limit ||
                     (with_y && std::fabs(path.y_response[H]) > limit);
    return path;
}

} // namespace

IrfPath compute_irf(const TermMappedCoeffs& coeffs_p, const TermMappedCoeffs& coeffs_y,
                    const IrfRequest& req) {
    return run_recursion(coeffs_p, coeffs_y, req, /*sever_direct_shock=*/false);
}

IrfPath channel_irf(const TermMappedCoeffs& coeffs_p, const TermMappedCoeffs& coeffs_y,
                    const IrfRequest& req) {
    return run_recursion(coeffs_p, coeffs_y, req, /*sever_direct_shock=*/true);
}

std::pair<IrfPath, IrfPath> group_pair(const TermMappedCoeffs& coeffs_p,
                                       const TermMappedCoeffs& coeffs_y, const IrfRequest& req) {
    auto run = [&](Group g) {
        IrfRequest r = req;
        r.group = g;
        return req.panel == IrfPanel::C ? channel_irf(coeffs_p, coeffs_y, r)
                                        : compute_irf(coeffs_p, coeffs_y, r);
    };
    return {run(Group::exporter), run(Group::importer)};
}

} // namespace gfcpanel
