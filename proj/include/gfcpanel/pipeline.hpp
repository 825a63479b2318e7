#pragma once

#include "gfcpanel/bootstrap.hpp"
#include "gfcpanel/gmm.hpp"
#include "gfcpanel/irf.hpp"
#include "gfcpanel/panel.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gfcpanel {

// Full pipeline configuration. Loaded from a JSON document; every field has a
// working default except the data source and variable bindings.
struct RunConfig {
    // data
    std::string panel_csv;
    std::string trade_csv; // optional; classifies entities when given
    std::vector<std::string> global_variables;
    std::string group_variable = "exporter"; // panel variable with 0/1 flags
    std::string preset; // dgp preset name; replaces csv input when set

    // variable bindings
    std::vector<std::string> r_variables;
    std::vector<std::string> p_variables;
    std::string y_variable; // empty: price equation only, panel A artifacts
    std::vector<std::string> controls;
    std::string cgf_variable = "cgf";
    bool cgf_sign_flip = true; // a positive shock then means tightening for all r

    // model
    int lag_order = 2;
    GmmOptions gmm;

    // impulse responses
    int horizon = 20;
    ShockProfile shock_profile = ShockProfile::transitory;
    std::optional<double> shock_size; // default: sample sd of r over the estimation window

    // bootstrap
    int replications = 200;
    double q_lo = 0.10;
    double q_hi = 0.90;
    bool discard_explosive = false;

    // run
    std::uint64_t seed = 1;
    int threads = 1;
    std::string output_dir = "out";
    bool plots = true;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig from_file(const std::string& path);
    nlohmann::json to_json() const;
    // throws ConfigError; require_source is false when a dataset is injected
    void validate(bool require_source = true) const;
};

struct ManifestFile {
    std::string path; // relative to the output directory
    std::uint64_t bytes = 0;
    std::string fnv1a64; // hex content hash
};

struct CombinationStatus {
    std::string r;
    std::string p;
    bool ok = false;
    std::string message;
};

struct ArtifactManifest {
    std::vector<ManifestFile> files; // sorted by path
    std::vector<CombinationStatus> combinations;
    nlohmann::json config_echo;

    bool all_ok() const;
    nlohmann::json to_json() const;
};

// Estimates both equations for every (r, p) combination, computes the
// 3-panel x 2-group impulse responses with bootstrap bands, and writes
// tables, series, optional plots and the manifest under cfg.output_dir.
// Estimation failures are recorded per combination; the run continues.
ArtifactManifest run_pipeline(const RunConfig& cfg);
ArtifactManifest run_pipeline(const RunConfig& cfg, const PanelDataset& data);

// ---------------------------------------------------------------- exporters

void write_coefficient_csv(const std::string& path, const EstimationResult& result);
nlohmann::json diagnostics_json(const EstimationResult& result);
void write_irf_csv(const std::string& path, const IrfResult& result, IrfPanel panel);
void write_irf_svg(const std::string& path, const IrfResult& result, IrfPanel panel);

} // namespace gfcpanel
