#pragma once

// End-to-end experiments: the blow-up rate reproduction (minimal-mass data
// built from the profile, tracked through modulation, rate fitted against
// |t| power laws) and the defocusing-sign boundedness probe. Reports are
// deterministic JSON documents; wall-clock time goes to a sidecar, never
// into the report.

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hnls/blowup_law.hpp"
#include "hnls/config.hpp"
#include "hnls/ground_state.hpp"
#include "hnls/modulation.hpp"
#include "hnls/nls_solver.hpp"
#include "hnls/profile.hpp"

namespace hnls {

struct PipelineArtifacts {
    std::shared_ptr<const RadialGrid> grid;
    GroundStateBundle bundle;
    RieszKernel kernel;
    ProfileCoeffs coeffs;
    BlowupLawConstants constants;
};

// ground_state -> profile -> law constants, all from one config.
PipelineArtifacts build_pipeline(const Config& cfg);

// Smallest s with b_app(s)^2 + lambda_app(s)^alpha <= margin.
double auto_s1(const BlowupLawConstants& c, double margin);

struct ExperimentReport {
    nlohmann::ordered_json doc;
    std::vector<std::pair<std::string, std::string>> csv_files;  // name -> contents
    std::vector<std::pair<std::string, CartesianField>> snapshots;
    bool all_passed = true;
    double wall_seconds = 0.0;  // excluded from the report document
};

ExperimentReport experiment_blowup(const Config& cfg);
ExperimentReport experiment_global(const Config& cfg);

// Writes report.json, the CSV companions, snapshots and timing.txt into an
// existing directory (missing directory is an error naming the path).
void emit_report(const ExperimentReport& report, const std::string& out_dir);
nlohmann::ordered_json read_report(const std::string& out_dir);

std::string rows_to_csv(const std::vector<DiagnosticsRow>& rows);

}  // namespace hnls
