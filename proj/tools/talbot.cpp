// Command-line front end: scenario runner, bundled studies, band-structure
// tables and the fiber-loop design calculator.
//
// Exit codes: 0 success, 2 validation/usage error, 3 numerical check failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "CLI11.hpp"
#include "talbot/io.hpp"
#include "talbot/scenario_io.hpp"

namespace {

int env_threads() {
  const char* v = std::getenv("TALBOT_THREADS");
  if (!v) return 1;
  const int n = std::atoi(v);
  return n >= 1 ? n : 1;
}

talbot::ComplexPotential potential_from_flags(const std::string& family, double a,
                                              double rho, double v0) {
  using namespace talbot;
  if (family == "free") return free_potential(a);
  if (family == "exp") return exp_potential(a, v0);
  if (family == "mathieu") return mathieu_potential(a, v0);
  if (family == "one_ss") return one_singularity_potential(a, rho);
  if (family == "two_ss") return two_singularity_potential(a, rho);
  if (family == "one_ss_re")
    return real_part_potential(one_singularity_potential(a, rho));
  throw ValidationError("unknown potential family \"" + family + "\"");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Commensurate self-imaging in PT-symmetric complex crystals"};
  app.require_subcommand(1);
  int threads = env_threads();
  app.add_option("--threads", threads, "Worker thread cap (default $TALBOT_THREADS or 1)");

  // ---- run -------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Run a JSON scenario file");
  std::string scenario_path, run_out;
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", run_out, "Override the scenario's output directory");

  // ---- reproduce -------------------------------------------------------------
  auto* rep = app.add_subcommand("reproduce", "Run a bundled parameter study");
  std::string study_id, rep_out = "out";
  rep->add_option("study", study_id, "fig2 | fig3 | fig4")->required();
  rep->add_option("--out", rep_out, "Output root directory");

  // ---- bands -----------------------------------------------------------------
  auto* bands = app.add_subcommand("bands", "Band diagram and degeneracy census");
  std::string b_family = "one_ss", b_out = "out/bands";
  double b_a = 2.0 * std::numbers::pi, b_rho = 1.0, b_v0 = 1.0;
  int b_qcount = 64, b_alpha = 6, b_emax = 6, b_ntrunc = 0;
  bands->add_option("--family", b_family, "free|exp|one_ss|two_ss|mathieu|one_ss_re");
  bands->add_option("--a", b_a, "Lattice period");
  bands->add_option("--rho", b_rho, "Gain/loss parameter (one_ss, two_ss)");
  bands->add_option("--v0", b_v0, "Amplitude (exp, mathieu)");
  bands->add_option("--q-count", b_qcount, "Wave numbers across the zone");
  bands->add_option("--alpha-max", b_alpha, "Highest band index");
  bands->add_option("--energy-max", b_emax, "Examine degeneracies up to E_n");
  bands->add_option("--n-trunc", b_ntrunc, "Bloch truncation override");
  bands->add_option("--out", b_out, "Output directory");

  // ---- fiber -----------------------------------------------------------------
  auto* fiber = app.add_subcommand("fiber", "Fiber-loop design calculator");
  talbot::FiberParams fp;
  double f_lambda_nm = 1560.0, f_zt = 0.0, f_rho = 1.0, f_v0 = 1.0;
  std::string f_family = "one_ss", f_out = "design_report.json";
  bool f_refcheck = false;
  fiber->add_option("--lambda-nm", f_lambda_nm, "Wavelength in nm");
  fiber->add_option("--dispersion", fp.dispersion_ps_nm_km, "Fiber dispersion, ps/(nm km)");
  fiber->add_option("--loop-length", fp.loop_length, "Loop length in m");
  fiber->add_option("--nu-m", fp.modulation_frequency, "Modulation frequency in Hz");
  fiber->add_option("--gain", fp.gain, "Gain per round trip");
  fiber->add_option("--loss", fp.loss, "Loss per round trip");
  fiber->add_option("--N", fp.N, "Pulse spacing numerator: T_p = (N/M) T_m");
  fiber->add_option("--M", fp.M, "Pulse spacing denominator");
  fiber->add_option("--pulses", fp.pulse_count, "Injected pulse count");
  fiber->add_option("--group-index", fp.group_index, "Group index for the transit time");
  fiber->add_option("--bandwidth", fp.modulator_bandwidth, "Modulator bandwidth in Hz");
  fiber->add_option("--z-t", f_zt, "Normalized revival distance (default 2 pi N^2)");
  fiber->add_option("--family", f_family, "Target potential family for the drive tables");
  fiber->add_option("--rho", f_rho, "Target potential rho");
  fiber->add_option("--v0", f_v0, "Target potential amplitude");
  fiber->add_flag("--reference-check", f_refcheck,
                  "Annotate the nominal design figures (AGREE/DISCREPANCY)");
  fiber->add_option("--out", f_out, "Report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) {
      talbot::LoadedScenario loaded = talbot::load_scenario_file(scenario_path);
      loaded.scenario.threads = threads;
      const std::string out_dir = run_out.empty() ? loaded.output_dir : run_out;
      const talbot::RunResult r = talbot::run_scenario(loaded.scenario, out_dir);
      std::cout << (r.pass ? "PASS " : "FAIL ") << out_dir << "/summary.json\n";
      return r.pass ? 0 : 3;
    }

    if (*rep) {
      const bool ok = talbot::reproduce_study(study_id, rep_out, threads);
      std::cout << (ok ? "PASS " : "FAIL ") << rep_out << "/" << study_id << "\n";
      return ok ? 0 : 3;
    }

    if (*bands) {
      const talbot::ComplexPotential pot =
          potential_from_flags(b_family, b_a, b_rho, b_v0);
      const talbot::BandOptions opts{b_ntrunc, threads};
      const talbot::BandDiagram diagram =
          talbot::band_diagram(pot, b_qcount, b_alpha, opts);
      const talbot::SingularityReport report =
          talbot::detect_singularities(pot, b_emax, opts);
      std::filesystem::create_directories(b_out);
      talbot::write_bands_csv(b_out + "/bands.csv", diagram);
      talbot::write_singularities_csv(b_out + "/singularities.csv", report);
      std::cout << "parabola_max_dev " << talbot::format_sci(diagram.parabola_max_dev)
                << "\n";
      for (const auto& e : report.entries)
        std::cout << "E_" << e.n << " = " << e.energy << "  "
                  << (e.defective ? "defective" : "diabolic") << "\n";
      return 0;
    }

    if (*fiber) {
      fp.wavelength = f_lambda_nm * 1e-9;
      if (f_zt <= 0.0)
        f_zt = 2.0 * std::numbers::pi * fp.N * fp.N;  // untilted, a = 2 pi
      const talbot::ComplexPotential target =
          potential_from_flags(f_family, 2.0 * std::numbers::pi, f_rho, f_v0);
      const talbot::ordered_json report =
          talbot::fiber_report(fp, f_zt, target, f_refcheck);
      const std::filesystem::path out_path(f_out);
      if (out_path.has_parent_path())
        std::filesystem::create_directories(out_path.parent_path());
      std::ofstream out(out_path, std::ios::binary);
      out << report.dump(2) << "\n";
      std::cout << "round_trips " << report["derived"]["round_trips"].dump()
                << "\n";
      if (f_refcheck)
        for (const auto& c : report["reference_checks"])
          std::cout << c["quantity"].get<std::string>() << " "
                    << c["status"].get<std::string>() << "\n";
      return 0;
    }
  } catch (const talbot::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const talbot::TiltConditionsViolated& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const talbot::Error& e) {
    std::cerr << "numerical check failed: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
