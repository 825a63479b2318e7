#include "gfcpanel/pipeline.hpp"

#include "gfcpanel/classify.hpp"
#include "gfcpanel/dgp.hpp"
#include "gfcpanel/errors.hpp"
#include "gfcpanel/model.hpp"
#include "gfcpanel/numerics.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace gfcpanel {

// ---------------------------------------------------------------- RunConfig

namespace {

GmmMode parse_mode(const std::string& s) {
    if (s == "system") return GmmMode::system;
    if (s == "difference" || s == "difference-only") return GmmMode::difference_only;
    throw ConfigError("unknown gmm mode '" + s + "'");
}

GmmSteps parse_steps(const std::string& s) {
    if (s == "one") return GmmSteps::one;
    if (s == "two") return GmmSteps::two;
    throw ConfigError("unknown gmm steps '" + s + "'");
}

ShockProfile parse_profile(const std::string& s) {
    if (s == "transitory") return ShockProfile::transitory;
    if (s == "permanent") return ShockProfile::permanent;
    throw ConfigError("unknown shock profile '" + s + "'");
}

std::string mode_name(GmmMode m) {
    return m == GmmMode::system ? "system" : "difference-only";
}

std::string steps_name(GmmSteps s) {
    return s == GmmSteps::one ? "one" : "two";
}

std::string profile_name(ShockProfile p) {
    return p == ShockProfile::transitory ? "transitory" : "permanent";
}

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name)
        out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    return out;
}

} // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig cfg;
    if (j.contains("data")) {
        const auto& d = j.at("data");
        cfg.panel_csv = d.value("panel_csv", "");
        cfg.trade_csv = d.value("trade_csv", "");
        cfg.global_variables = d.value("global_variables", std::vector<std::string>{});
        cfg.group_variable = d.value("group_variable", cfg.group_variable);
        cfg.preset = d.value("preset", "");
    }
    if (j.contains("variables")) {
        const auto& v = j.at("variables");
        cfg.r_variables = v.value("r", std::vector<std::string>{});
        cfg.p_variables = v.value("p", std::vector<std::string>{});
        cfg.y_variable = v.value("y", "");
        cfg.controls = v.value("controls", std::vector<std::string>{});
        cfg.cgf_variable = v.value("cgf_variable", cfg.cgf_variable);
        cfg.cgf_sign_flip = v.value("cgf_sign_flip", cfg.cgf_sign_flip);
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        cfg.lag_order = m.value("lag_order", cfg.lag_order);
        if (m.contains("gmm")) {
            const auto& g = m.at("gmm");
            cfg.gmm.mode = parse_mode(g.value("mode", "system"));
            cfg.gmm.instrument_lag_min = g.value("instrument_lag_min", 2);
            if (g.contains("instrument_lag_max") && !g.at("instrument_lag_max").is_null())
                cfg.gmm.instrument_lag_max = g.at("instrument_lag_max").get<int>();
            else if (g.contains("instrument_lag_max"))
                cfg.gmm.instrument_lag_max = std::nullopt;
            cfg.gmm.collapse = g.value("collapse", true);
            cfg.gmm.steps = parse_steps(g.value("steps", "one"));
            cfg.gmm.windmeijer = g.value("windmeijer", true);
            cfg.gmm.ridge_tolerance = g.value("ridge_tolerance", 1e-10);
        }
    }
    if (j.contains("irf")) {
        const auto& i = j.at("irf");
        cfg.horizon = i.value("horizon", cfg.horizon);
        cfg.shock_profile = parse_profile(i.value("shock_profile", "transitory"));
        if (i.contains("shock_size") && !i.at("shock_size").is_null())
            cfg.shock_size = i.at("shock_size").get<double>();
    }
    if (j.contains("bootstrap")) {
        const auto& b = j.at("bootstrap");
        cfg.replications = b.value("replications", cfg.replications);
        if (b.contains("quantiles")) {
            auto q = b.at("quantiles").get<std::vector<double>>();
            if (q.size() != 2) throw ConfigError("bootstrap quantiles must have 2 entries");
            cfg.q_lo = q[0];
            cfg.q_hi = q[1];
        }
        cfg.discard_explosive = b.value("discard_explosive", false);
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("output")) {
        const auto& o = j.at("output");
        cfg.output_dir = o.value("directory", cfg.output_dir);
        cfg.plots = o.value("plots", cfg.plots);
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json g{{"mode", mode_name(gmm.mode)},
                     {"instrument_lag_min", gmm.instrument_lag_min},
                     {"collapse", gmm.collapse},
                     {"steps", steps_name(gmm.steps)},
                     {"windmeijer", gmm.windmeijer},
                     {"ridge_tolerance", gmm.ridge_tolerance}};
    if (gmm.instrument_lag_max)
        g["instrument_lag_max"] = *gmm.instrument_lag_max;
    else
        g["instrument_lag_max"] = nullptr;

    nlohmann::json j{
        {"data",
         {{"panel_csv", panel_csv},
          {"trade_csv", trade_csv},
          {"global_variables", global_variables},
          {"group_variable", group_variable},
          {"preset", preset}}},
        {"variables",
         {{"r", r_variables},
          {"p", p_variables},
          {"y", y_variable},
          {"controls", controls},
          {"cgf_variable", cgf_variable},
          {"cgf_sign_flip", cgf_sign_flip}}},
        {"model", {{"lag_order", lag_order}, {"gmm", g}}},
        {"irf", {{"horizon", horizon}, {"shock_profile", profile_name(shock_profile)}}},
        {"bootstrap",
         {{"replications", replications},
          {"quantiles", {q_lo, q_hi}},
          {"discard_explosive", discard_explosive}}},
        {"seed", seed},
        {"threads", threads},
        {"output", {{"directory", output_dir}, {"plots", plots}}}};
    if (shock_size)
        j["irf"]["shock_size"] = *shock_size;
    else
        j["irf"]["shock_size"] = nullptr;
    return j;
}

void RunConfig::validate(bool require_source) const {
    if (require_source && preset.empty() && panel_csv.empty())
        throw ConfigError("either data.panel_csv or data.preset is required");
    if (preset.empty()) {
        if (r_variables.empty()) throw ConfigError("variables.r must name at least one series");
        if (p_variables.empty()) throw ConfigError("variables.p must name at least one series");
    }
    if (lag_order < 1) throw ConfigError("model.lag_order must be >= 1");
    if (horizon < 1) throw ConfigError("irf.horizon must be >= 1");
    if (replications < 2) throw ConfigError("bootstrap.replications must be >= 2");
    if (!(0.0 < q_lo && q_lo < q_hi && q_hi < 1.0))
        throw ConfigError("bootstrap quantiles must satisfy 0 < lo < hi < 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    gmm.validate();
}

// ---------------------------------------------------------------- manifest

bool ArtifactManifest::all_ok() const {
    if (combinations.empty()) return false;
    return std::all_of(combinations.begin(), combinations.end(),
                       [](const CombinationStatus& c) { return c.ok; });
}

nlohmann::json ArtifactManifest::to_json() const {
    nlohmann::json files_j = nlohmann::json::array();
    for (const auto& f : files)
        files_j.push_back({{"path", f.path}, {"bytes", f.bytes}, {"fnv1a64", f.fnv1a64}});
    nlohmann::json combos_j = nlohmann::json::array();
    for (const auto& c : combinations) {
        nlohmann::json cj{{"r", c.r}, {"p", c.p}, {"status", c.ok ? "ok" : "error"}};
        if (!c.ok) cj["message"] = c.message;
        combos_j.push_back(cj);
    }
    return nlohmann::json{{"config", config_echo}, {"combinations", combos_j},
                          {"files", files_j}};
}

// ---------------------------------------------------------------- exporters

void write_coefficient_csv(const std::string& path, const EstimationResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "term,estimate,std_error\n";
    for (int j = 0; j < result.coefficients.size(); ++j) {
        double se = std::sqrt(std::max(0.0, result.vce(j, j)));
        out << result.term_tags[j] << "," << num::format_double(result.coefficients(j)) << ","
            << num::format_double(se) << "\n";
    }
}

nlohmann::json diagnostics_json(const EstimationResult& result) {
    nlohmann::json coeffs, ses;
    for (int j = 0; j < result.coefficients.size(); ++j) {
        coeffs[result.term_tags[j]] = result.coefficients(j);
        ses[result.term_tags[j]] = std::sqrt(std::max(0.0, result.vce(j, j)));
    }
    nlohmann::json j{
        {"coefficients", coeffs},
        {"std_errors", ses},
        {"hansen",
         {{"statistic", result.diagnostics.hansen.statistic},
          {"df", result.diagnostics.hansen.df},
          {"p_value", result.diagnostics.hansen.p_value}}},
        {"sample",
         {{"n_entities", result.sample_meta.n_entities},
          {"n_rows", result.sample_meta.n_rows},
          {"n_instruments", result.sample_meta.n_instruments},
          {"n_design_rows", result.sample_meta.n_design_rows},
          {"n_diff_rows", result.sample_meta.n_diff_rows},
          {"n_level_rows", result.sample_meta.n_level_rows}}},
        {"options",
         {{"mode", mode_name(result.options.mode)},
          {"steps", steps_name(result.options.steps)},
          {"collapse", result.options.collapse},
          {"instrument_lag_min", result.options.instrument_lag_min},
          {"windmeijer", result.options.windmeijer}}},
        {"warnings",
         {{"weight_pinv_used", result.weight_pinv_used},
          {"efficient_weight_failed", result.efficient_weight_failed},
          {"dropped_zero_instruments", result.dropped_zero_instruments}}}};
    if (result.options.instrument_lag_max)
        j["options"]["instrument_lag_max"] = *result.options.instrument_lag_max;
    else
        j["options"]["instrument_lag_max"] = nullptr;
    if (result.diagnostics.ar1)
        j["ar1"] = {{"z", result.diagnostics.ar1->z},
                    {"p_value", result.diagnostics.ar1->p_value}};
    else
        j["ar1"] = nullptr;
    if (result.diagnostics.ar2)
        j["ar2"] = {{"z", result.diagnostics.ar2->z},
                    {"p_value", result.diagnostics.ar2->p_value}};
    else
        j["ar2"] = nullptr;
    return j;
}

void write_irf_csv(const std::string& path, const IrfResult& result, IrfPanel panel) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    const auto& point =
        panel == IrfPanel::A ? result.point.p_response : result.point.y_response;
    out << "horizon,point,lo,hi\n";
    for (std::size_t h = 0; h < point.size(); ++h) {
        out << h << "," << num::format_double(point[h]) << "," << num::format_double(result.lo[h])
            << "," << num::format_double(result.hi[h]) << "\n";
    }
}

namespace {

std::string svg_path(const std::vector<double>& v, double x0, double xw, double y0, double yh,
                     double vmin, double vmax) {
    std::ostringstream d;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        double x = x0 + xw * (n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
        double y = y0 + yh * (1.0 - (v[i] - vmin) / (vmax - vmin));
        d << (i == 0 ? "M" : "L") << x << " " << y << " ";
    }
    return d.str();
}

} // namespace

void write_irf_svg(const std::string& path, const IrfResult& result, IrfPanel panel) {
    const auto& point =
        panel == IrfPanel::A ? result.point.p_response : result.point.y_response;
    double vmin = 0.0, vmax = 0.0;
    for (std::size_t h = 0; h < point.size(); ++h) {
        vmin = std::min({vmin, point[h], result.lo[h], result.hi[h]});
        vmax = std::max({vmax, point[h], result.lo[h], result.hi[h]});
    }
    if (vmax - vmin < 1e-12) vmax = vmin + 1.0;

    const double x0 = 40, xw = 560, y0 = 20, yh = 340;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 400\">\n";

    // shaded band between the quantile paths
    const std::size_t n = point.size();
    out << "<polygon fill=\"#9ecae1\" opacity=\"0.35\" points=\"";
    for (std::size_t i = 0; i < n; ++i) {
        double x = x0 + xw * (n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
        double y = y0 + yh * (1.0 - (result.hi[i] - vmin) / (vmax - vmin));
        out << x << "," << y << " ";
    }
    for (std::size_t i = n; i-- > 0;) {
        double x = x0 + xw * (n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
        double y = y0 + yh * (1.0 - (result.lo[i] - vmin) / (vmax - vmin));
        out << x << "," << y << " ";
    }
    out << "\"/>\n";

    // zero line
    double zero_y = y0 + yh * (1.0 - (0.0 - vmin) / (vmax - vmin));
    out << "<line x1=\"" << x0 << "\" y1=\"" << zero_y << "\" x2=\"" << x0 + xw << "\" y2=\""
        << zero_y << "\" stroke=\"#999\" stroke-width=\"1\"/>\n";

    out << "<path d=\"" << svg_path(result.lo, x0, xw, y0, yh, vmin, vmax)
        << "\" fill=\"none\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
    out << "<path d=\"" << svg_path(result.hi, x0, xw, y0, yh, vmin, vmax)
        << "\" fill=\"none\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
    out << "<path d=\"" << svg_path(point, x0, xw, y0, yh, vmin, vmax)
        << "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
    out << "</svg>\n";
}

// ---------------------------------------------------------------- pipeline

namespace {

ManifestFile hash_file(const fs::path& root, const std::string& rel) {
    std::ifstream in(root / rel, std::ios::binary);
    if (!in) throw IoError("cannot re-open '" + rel + "' for hashing");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ManifestFile f;
    f.path = rel;
    f.bytes = bytes.size();
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(num::fnv1a64(bytes)));
    f.fnv1a64 = buf;
    return f;
}

PanelDataset load_input_data(const RunConfig& cfg) {
    if (!cfg.preset.empty()) {
        dgp::DgpConfig d = dgp::preset(cfg.preset);
        d.seed = cfg.seed;
        return dgp::simulate_panel(d);
    }
    PanelDataset data = load_panel_csv_file(cfg.panel_csv, cfg.global_variables);
    if (!cfg.trade_csv.empty()) {
        GroupAssignment groups = classify_records(load_trade_csv_file(cfg.trade_csv));
        for (const auto& entity : data.entities()) {
            auto it = groups.group.find(entity);
            if (it == groups.group.end())
                throw ConfigError("entity '" + entity + "' missing from trade records");
            data.set_group_flag(entity, it->second == 1);
        }
    } else {
        apply_group_flags_from_variable(data, cfg.group_variable);
    }
    return data;
}

struct VariableMenu {
    std::vector<std::string> r;
    std::vector<std::string> p;
    std::string y;
};

VariableMenu resolve_menu(const RunConfig& cfg) {
    if (cfg.preset.empty()) return {cfg.r_variables, cfg.p_variables, cfg.y_variable};
    VariableMenu menu{{"r"}, {"p"}, "y"};
    dgp::DgpConfig d = dgp::preset(cfg.preset);
    if (!d.include_spread) menu.y.clear();
    return menu;
}

double resolve_shock_size(const RunConfig& cfg, const PanelDataset& data,
                          const EquationDesign& price_design, const std::string& r_name) {
    if (cfg.shock_size) return *cfg.shock_size;
    // sample sd of r over the estimation window (r is global, sd over time)
    std::set<int> periods;
    for (const auto& rk : price_design.row_index) periods.insert(rk.period);
    Series window(data.n_periods());
    const Series& r = data.global_series(r_name);
    for (int t : periods) window[t] = r[t];
    return sample_sd(window);
}

} // namespace

ArtifactManifest run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    return run_pipeline(cfg, load_input_data(cfg));
}

ArtifactManifest run_pipeline(const RunConfig& cfg, const PanelDataset& data) {
    cfg.validate(/*require_source=*/false);
    fs::path root(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.output_dir + "'");

    VariableMenu menu = resolve_menu(cfg);

    ArtifactManifest manifest;
    manifest.config_echo = cfg.to_json();
    manifest.config_echo.erase("threads"); // worker count never changes the artifacts
    std::vector<std::string> written;

    for (const auto& r_name : menu.r) {
        // The CGF proxy moves opposite to the cycle; flip it so a positive
        // shock means tightening for every r variable.
        const bool flip = cfg.cgf_sign_flip && r_name == cfg.cgf_variable;
        const PanelDataset* working = &data;
        PanelDataset flipped;
        if (flip) {
            flipped = data.with_negated_global(r_name);
            working = &flipped;
        }

        for (const auto& p_name : menu.p) {
            CombinationStatus status;
            status.r = r_name;
            status.p = p_name;
            const std::string stem = sanitize(r_name) + "_" + sanitize(p_name);
            try {
                EquationDesign price_design =
                    build_design(*working, p_name,
                                 price_equation_terms(p_name, r_name, cfg.lag_order,
                                                      cfg.controls));
                EstimationResult res_p = estimate(price_design, cfg.gmm);

                std::optional<EstimationResult> res_y;
                if (!menu.y.empty()) {
                    EquationDesign spread_design =
                        build_design(*working, menu.y,
                                     spread_equation_terms(menu.y, r_name, p_name,
                                                           cfg.lag_order, cfg.controls));
                    res_y = estimate(spread_design, cfg.gmm);
                }

                double shock = resolve_shock_size(cfg, *working, price_design, r_name);

                std::string coef_p = "coef_" + stem + "_price.csv";
                write_coefficient_csv((root / coef_p).string(), res_p);
                written.push_back(coef_p);
                nlohmann::json diag{{"r", r_name},
                                    {"p", p_name},
                                    {"shock_size", shock},
                                    {"sign_flipped", flip},
                                    {"price_equation", diagnostics_json(res_p)}};
                if (res_y) {
                    std::string coef_y = "coef_" + stem + "_spread.csv";
                    write_coefficient_csv((root / coef_y).string(), *res_y);
                    written.push_back(coef_y);
                    diag["spread_equation"] = diagnostics_json(*res_y);
                }
                std::string diag_name = "diagnostics_" + stem + ".json";
                {
                    std::ofstream out(root / diag_name, std::ios::binary);
                    if (!out) throw IoError("cannot write '" + diag_name + "'");
                    out << diag.dump(2) << "\n";
                }
                written.push_back(diag_name);

                std::vector<IrfPanel> panels =
                    res_y ? std::vector<IrfPanel>{IrfPanel::A, IrfPanel::B, IrfPanel::C}
                          : std::vector<IrfPanel>{IrfPanel::A};
                for (IrfPanel panel : panels) {
                    for (Group group : {Group::exporter, Group::importer}) {
                        IrfRequest req;
                        req.shock_size = shock;
                        req.horizon = cfg.horizon;
                        req.group = group;
                        req.panel = panel;
                        req.profile = cfg.shock_profile;

                        BootstrapConfig bs;
                        bs.replications = cfg.replications;
                        bs.q_lo = cfg.q_lo;
                        bs.q_hi = cfg.q_hi;
                        bs.discard_explosive = cfg.discard_explosive;
                        bs.threads = cfg.threads;
                        bs.seed = num::substream_seed(
                            cfg.seed, num::fnv1a64(stem),
                            static_cast<std::uint64_t>(static_cast<int>(panel) * 2 +
                                                       (group == Group::exporter ? 0 : 1)));

                        IrfResult irf = res_y ? bootstrap_bands(res_p, *res_y, req, bs)
                                              : bootstrap_bands(res_p, req, bs);

                        const char* panel_name = panel == IrfPanel::A   ? "A"
                                                 : panel == IrfPanel::B ? "B"
                                                                        : "C";
                        const char* group_name =
                            group == Group::exporter ? "exporter" : "importer";
                        std::string irf_name = "irf_" + stem + "_" + panel_name + "_" +
                                               group_name + ".csv";
                        write_irf_csv((root / irf_name).string(), irf, panel);
                        written.push_back(irf_name);
                        if (cfg.plots) {
                            std::string svg_name = "irf_" + stem + "_" + panel_name + "_" +
                                                   group_name + ".svg";
                            write_irf_svg((root / svg_name).string(), irf, panel);
                            written.push_back(svg_name);
                        }
                    }
                }
                status.ok = true;
            } catch (const Error& e) {
                status.ok = false;
                status.message = e.what();
            }
            manifest.combinations.push_back(status);
        }
    }

    std::sort(written.begin(), written.end());
    for (const auto& rel : written) manifest.files.push_back(hash_file(root, rel));

    std::ofstream out(root / "manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot write manifest.json");
    out << manifest.to_json().dump(2) << "\n";
    return manifest;
}

} // namespace gfcpanel
