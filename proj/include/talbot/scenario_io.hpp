#pragma once

// Scenario files, the scenario runner, and the bundled study definitions
// behind the command-line front end.
//
// A scenario file is a strict-schema JSON document:
//
//   {
//     "potential":        {"family": "one_ss", "a": 6.283..., "rho": 1.0},
//     "commensurability": {"N": 3, "M": 2},
//     "tilt":             {"p_num": 0, "p_den": 1},              (optional)
//     "profile":          {"kind": "gaussian_train",
//                          "width_over_L": 0.1},                 (optional)
//     "z":                {"mode": "revivals",
//                          "params": {"count": 2}},
//     "outputs":          {"dir": "out/run"}
//   }
//
// Families: free | exp | one_ss | two_ss | mathieu | one_ss_re (the
// Hermitian real part of one_ss).  Profile kinds: gaussian_train | jordan_v
// | custom.  z modes: revivals {count, samples_per_zt, snapshot_stride},
// trace {z_max, samples, snapshot_stride}, list {values, snapshot_stride}.
// Unknown keys anywhere are rejected.

#include <string>

#include "json.hpp"
#include "talbot/fiber.hpp"
#include "talbot/propagation.hpp"

namespace talbot {

using ordered_json = nlohmann::ordered_json;

struct LoadedScenario {
  Scenario scenario;
  std::string output_dir;
};

// Throws ValidationError on schema violations or unreadable files.
LoadedScenario parse_scenario_json(const ordered_json& doc);
LoadedScenario load_scenario_file(const std::string& path);

struct RunResult {
  bool pass = false;
  ordered_json summary;
};

// Full pipeline for one scenario: propagation trace, band diagram,
// degeneracy census, self-imaging verdict, and the pass/fail checks the
// scenario type implies.  Writes trace.csv, snapshots.csv, bands.csv,
// singularities.csv and summary.json into out_dir.
RunResult run_scenario(const Scenario& s, const std::string& out_dir);

// Bundled parameter studies: "fig2" (Hermitian sine crystal recurrence),
// "fig3" (single-singularity PT crystal: revival, Hermitian contrast,
// even-N breakdown, tilt restoration), "fig4" (double-singularity crystal).
// Returns false if any variant fails its own summary checks.
bool reproduce_study(const std::string& study_id, const std::string& out_root,
                     int threads);

// design_report.json for the fiber mapping; reference_check adds the
// annotated comparison against the nominal design figures.
ordered_json fiber_report(const FiberParams& params, double z_T,
                          const ComplexPotential& target, bool reference_check);

}  // namespace talbot
