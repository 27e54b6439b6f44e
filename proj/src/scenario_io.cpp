#include "talbot/scenario_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "talbot/io.hpp"

namespace talbot {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRevivalTol = 1e-6;
constexpr double kNonRevivalTol = 1e-2;
constexpr double kNormTol = 1e-8;
constexpr double kHalfShiftTol = 1e-10;

// ---- strict-schema JSON helpers --------------------------------------------

const ordered_json& expect_object(const ordered_json& j, const std::string& where,
                                  const std::set<std::string>& required,
                                  const std::set<std::string>& optional) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, val] : j.items()) {
    if (!required.count(key) && !optional.count(key))
      throw ValidationError(where + ": unknown key \"" + key + "\"");
  }
  for (const auto& key : required)
    if (!j.contains(key))
      throw ValidationError(where + ": missing key \"" + key + "\"");
  return j;
}

double get_num(const ordered_json& j, const std::string& key,
               const std::string& where) {
  if (!j.at(key).is_number())
    throw ValidationError(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

long long get_int(const ordered_json& j, const std::string& key,
                  const std::string& where) {
  if (!j.at(key).is_number_integer())
    throw ValidationError(where + "." + key + ": expected an integer");
  return j.at(key).get<long long>();
}

std::string get_str(const ordered_json& j, const std::string& key,
                    const std::string& where) {
  if (!j.at(key).is_string())
    throw ValidationError(where + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

ComplexPotential parse_potential(const ordered_json& j) {
  expect_object(j, "potential", {"family", "a"}, {"rho", "V0"});
  const std::string family = get_str(j, "family", "potential");
  const double a = get_num(j, "a", "potential");

  auto need = [&](const char* key) {
    if (!j.contains(key))
      throw ValidationError("potential: family \"" + family + "\" needs \"" +
                            key + "\"");
    return get_num(j, key, "potential");
  };
  auto forbid = [&](const char* key) {
    if (j.contains(key))
      throw ValidationError("potential: family \"" + family +
                            "\" does not take \"" + std::string(key) + "\"");
  };

  if (family == "free") {
    forbid("rho");
    forbid("V0");
    return free_potential(a);
  }
  if (family == "exp") {
    forbid("rho");
    return exp_potential(a, need("V0"));
  }
  if (family == "mathieu") {
    forbid("rho");
    return mathieu_potential(a, need("V0"));
  }
  if (family == "one_ss") {
    forbid("V0");
    return one_singularity_potential(a, need("rho"));
  }
  if (family == "two_ss") {
    forbid("V0");
    return two_singularity_potential(a, need("rho"));
  }
  if (family == "one_ss_re") {
    forbid("V0");
    return real_part_potential(one_singularity_potential(a, need("rho")));
  }
  throw ValidationError("potential: unknown family \"" + family + "\"");
}

ZSampling parse_z(const ordered_json& j) {
  expect_object(j, "z", {"mode", "params"}, {});
  const std::string mode = get_str(j, "mode", "z");
  const ordered_json& p = j.at("params");
  ZSampling z;
  if (mode == "revivals") {
    expect_object(p, "z.params", {},
                  {"count", "samples_per_zt", "snapshot_stride"});
    z.mode = ZSampling::Mode::Revivals;
    if (p.contains("count")) z.revival_count = static_cast<int>(get_int(p, "count", "z.params"));
    if (p.contains("samples_per_zt"))
      z.samples_per_period = static_cast<int>(get_int(p, "samples_per_zt", "z.params"));
  } else if (mode == "trace") {
    expect_object(p, "z.params", {"z_max", "samples"}, {"snapshot_stride"});
    z.mode = ZSampling::Mode::Trace;
    z.z_max = get_num(p, "z_max", "z.params");
    z.samples = static_cast<int>(get_int(p, "samples", "z.params"));
  } else if (mode == "list") {
    expect_object(p, "z.params", {"values"}, {"snapshot_stride"});
    z.mode = ZSampling::Mode::List;
    if (!p.at("values").is_array())
      throw ValidationError("z.params.values: expected an array");
    for (const auto& v : p.at("values")) {
      if (!v.is_number()) throw ValidationError("z.params.values: expected numbers");
      z.values.push_back(v.get<double>());
    }
  } else {
    throw ValidationError("z.mode: unknown mode \"" + mode + "\"");
  }
  if (p.contains("snapshot_stride"))
    z.snapshot_stride = static_cast<int>(get_int(p, "snapshot_stride", "z.params"));
  return z;
}

}  // namespace

LoadedScenario parse_scenario_json(const ordered_json& doc) {
  expect_object(doc, "scenario",
                {"potential", "commensurability", "z", "outputs"},
                {"tilt", "profile"});

  LoadedScenario out;
  Scenario& s = out.scenario;
  s.potential = parse_potential(doc.at("potential"));

  const ordered_json& com = doc.at("commensurability");
  expect_object(com, "commensurability", {"N", "M"}, {});
  s.N = static_cast<int>(get_int(com, "N", "commensurability"));
  s.M = static_cast<int>(get_int(com, "M", "commensurability"));

  if (doc.contains("tilt")) {
    const ordered_json& t = doc.at("tilt");
    expect_object(t, "tilt", {"p_num", "p_den"}, {});
    s.tilt = Rational(get_int(t, "p_num", "tilt"), get_int(t, "p_den", "tilt"));
  }

  if (doc.contains("profile")) {
    const ordered_json& p = doc.at("profile");
    expect_object(p, "profile", {"kind"}, {"width_over_L", "peak_over_L", "modes"});
    const std::string kind = get_str(p, "kind", "profile");
    if (kind == "gaussian_train") {
      s.profile = ProfileKind::GaussianTrain;
      if (p.contains("width_over_L"))
        s.width_over_period = get_num(p, "width_over_L", "profile");
      if (p.contains("peak_over_L"))
        s.peak_over_period = get_num(p, "peak_over_L", "profile");
      if (p.contains("modes"))
        throw ValidationError("profile: \"modes\" is only for kind \"custom\"");
    } else if (kind == "jordan_v") {
      s.profile = ProfileKind::JordanV;
      if (p.contains("width_over_L") || p.contains("peak_over_L") ||
          p.contains("modes"))
        throw ValidationError("profile: jordan_v takes no further parameters");
    } else if (kind == "custom") {
      s.profile = ProfileKind::Custom;
      if (!p.contains("modes") || !p.at("modes").is_array())
        throw ValidationError("profile: custom needs a \"modes\" array");
      for (const auto& entry : p.at("modes")) {
        if (!entry.is_array() || entry.size() != 3 ||
            !entry[0].is_number_integer() || !entry[1].is_number() ||
            !entry[2].is_number())
          throw ValidationError("profile.modes: entries are [n, re, im]");
        s.custom_modes[entry[0].get<int>()] =
            cplx(entry[1].get<double>(), entry[2].get<double>());
      }
    } else {
      throw ValidationError("profile.kind: unknown kind \"" + kind + "\"");
    }
  }

  s.z = parse_z(doc.at("z"));

  const ordered_json& o = doc.at("outputs");
  expect_object(o, "outputs", {"dir"}, {});
  out.output_dir = get_str(o, "dir", "outputs");
  if (out.output_dir.empty())
    throw ValidationError("outputs.dir: must not be empty");

  validate_scenario(s);
  return out;
}

LoadedScenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read scenario file: " + path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
  return parse_scenario_json(doc);
}

namespace {

ordered_json potential_json(const ComplexPotential& pot) {
  ordered_json j;
  j["family"] = family_name(pot.family);
  j["a"] = pot.period;
  if (pot.family == PotentialFamily::OneSingularity ||
      pot.family == PotentialFamily::TwoSingularity)
    j["rho"] = pot.param;
  if (pot.family == PotentialFamily::Exp || pot.family == PotentialFamily::Mathieu)
    j["V0"] = pot.param;
  j["n_max"] = pot.n_max();
  j["pt_symmetric"] = check_pt_symmetry(pot);
  j["hermitian"] = is_hermitian(pot);
  return j;
}

}  // namespace

RunResult run_scenario(const Scenario& s, const std::string& out_dir) {
  validate_scenario(s);
  const ComplexPotential& pot = s.potential;
  const PropagationTrace trace = propagate(s);

  // spectrum classification
  bool gapless = false, complex_spectrum = false;
  double parabola_dev = 0.0;
  std::optional<BandDiagram> bands;
  try {
    bands = band_diagram(pot, 64, 6, BandOptions{0, s.threads});
    parabola_dev = bands->parabola_max_dev;
    gapless = parabola_dev < 1e-8;
  } catch (const ComplexSpectrum&) {
    complex_spectrum = true;
  }

  std::optional<SingularityReport> report;
  std::optional<SelfImagingCheck> imaging;
  if (gapless) {
    report = detect_singularities(pot, 6, BandOptions{0, s.threads});
    imaging = self_imaging_allowed(*report, s.N);
  }

  const bool tilted = !s.tilt.is_zero();
  const bool predicted = tilted || (imaging && imaging->allowed);

  ordered_json summary;
  summary["potential"] = potential_json(pot);
  summary["commensurability"] = {
      {"N", s.N}, {"M", s.M}, {"input_period", pot.period * s.N / s.M}};
  summary["tilt"] = {{"p_num", s.tilt.num()}, {"p_den", s.tilt.den()}};
  {
    ordered_json profile;
    profile["kind"] = s.profile == ProfileKind::GaussianTrain ? "gaussian_train"
                      : s.profile == ProfileKind::JordanV     ? "jordan_v"
                                                              : "custom";
    if (s.profile == ProfileKind::GaussianTrain) {
      profile["width_over_L"] = s.width_over_period;
      profile["peak_over_L"] = s.peak_over_period;
    }
    summary["profile"] = profile;
  }
  summary["talbot_period"] = trace.talbot_period;

  ordered_json spectrum;
  spectrum["complex_spectrum"] = complex_spectrum;
  spectrum["parabola_max_dev"] = parabola_dev;
  spectrum["gapless"] = gapless;
  if (report) {
    ordered_json list = ordered_json::array();
    for (const auto& e : report->entries)
      list.push_back({{"n", e.n},
                      {"E", e.energy},
                      {"q_loc", e.q_loc},
                      {"defective", e.defective},
                      {"kernel_dim", e.kernel_dim},
                      {"angle", e.coalescence_angle}});
    spectrum["singularities"] = list;
  }
  if (imaging) {
    spectrum["self_imaging"] = {{"allowed", imaging->allowed},
                                {"reason", imaging->reason}};
  }
  summary["spectrum"] = spectrum;

  double max_drift = 0.0;
  for (double n : trace.norm) max_drift = std::max(max_drift, std::abs(n - 1.0));
  summary["trace"] = {{"z_max", trace.z.back()},
                      {"samples", trace.z.size()},
                      {"final_norm", trace.norm.back()},
                      {"max_norm_drift", max_drift}};

  // ---- checks ----------------------------------------------------------------
  ordered_json checks = ordered_json::array();
  bool pass = true;
  auto add_check = [&](const std::string& name, bool ok, ordered_json detail) {
    detail["name"] = name;
    detail["pass"] = ok;
    checks.push_back(detail);
    pass = pass && ok;
  };

  add_check("initial_state",
            trace.deviation[0] <= 1e-12 && std::abs(trace.norm[0] - 1.0) <= 1e-12,
            {{"deviation", trace.deviation[0]}, {"norm", trace.norm[0]}});

  summary["revival_predicted"] = predicted;
  if (predicted) {
    ordered_json revivals = ordered_json::array();
    int found = 0;
    for (int k = 1;; ++k) {
      const double zr = k * trace.talbot_period;
      if (zr > trace.z.back() * (1.0 + 1e-12)) break;
      std::size_t idx;
      try {
        idx = trace.index_at(zr);
      } catch (const std::invalid_argument&) {
        continue;  // revival distance not sampled in this z grid
      }
      ++found;
      const double d = trace.deviation[idx];
      revivals.push_back({{"z", trace.z[idx]}, {"deviation", d}});
      add_check("revival_" + std::to_string(k), d < kRevivalTol,
                {{"z", trace.z[idx]}, {"deviation", d}});
    }
    summary["revivals"] = revivals;
    if (found == 0)
      add_check("revival_sampled", false,
                {{"note", "no predicted revival distance was sampled"}});
  } else if (gapless && !tilted) {
    // blocked by a defective degeneracy: the trace must never return below
    // the non-revival threshold once it has left the input state
    std::size_t k = 1;
    while (k < trace.z.size() && trace.deviation[k] < kNonRevivalTol) ++k;
    double min_after = std::numeric_limits<double>::infinity();
    double z_at = 0.0;
    for (; k < trace.z.size(); ++k)
      if (trace.deviation[k] < min_after) {
        min_after = trace.deviation[k];
        z_at = trace.z[k];
      }
    summary["min_deviation_after_departure"] = {{"z", z_at}, {"value", min_after}};
    add_check("no_revival", min_after > kNonRevivalTol,
              {{"z", z_at}, {"min_deviation", min_after}});
  }

  if (trace.hermitian) {
    add_check("norm_conservation", max_drift <= kNormTol,
              {{"max_norm_drift", max_drift}});
    if (max_drift <= 1e-6) {
      const auto z0 = recurrence_search(trace, 0.05);
      ordered_json rec;
      rec["epsilon"] = 0.05;
      if (z0)
        rec["z0"] = *z0;
      else
        rec["z0"] = nullptr;
      summary["recurrence"] = rec;
    }
  }

  // half-period-shifted comparison at z_T/2, when sampled
  try {
    const std::size_t idx = trace.index_at(trace.talbot_period / 2.0);
    const double dh = trace.deviation_half[idx];
    summary["deviation_half_at_half_period"] = dh;
    if (pot.family == PotentialFamily::Free)
      add_check("half_shift", dh < kHalfShiftTol, {{"deviation_half", dh}});
  } catch (const std::invalid_argument&) {
  }

  summary["tolerances"] = {{"revival", kRevivalTol},
                           {"non_revival", kNonRevivalTol},
                           {"norm_conservation", kNormTol},
                           {"half_shift", kHalfShiftTol}};
  summary["checks"] = checks;
  summary["pass"] = pass;

  // ---- outputs ---------------------------------------------------------------
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  write_trace_csv((dir / "trace.csv").string(), trace);
  write_snapshots_csv((dir / "snapshots.csv").string(), trace);
  if (bands) write_bands_csv((dir / "bands.csv").string(), *bands);
  if (report)
    write_singularities_csv((dir / "singularities.csv").string(), *report);
  else
    write_singularities_csv((dir / "singularities.csv").string(),
                            SingularityReport{pot.period, {}});
  std::ofstream out(dir / "summary.json", std::ios::binary);
  out << summary.dump(2) << "\n";

  return RunResult{pass, std::move(summary)};
}

bool reproduce_study(const std::string& study_id, const std::string& out_root,
                     int threads) {
  const double a = 2.0 * kPi;
  struct Variant {
    std::string name;
    Scenario scenario;
  };
  std::vector<Variant> variants;

  auto trace_z = [](double z_max, int samples, int stride) {
    ZSampling z;
    z.mode = ZSampling::Mode::Trace;
    z.z_max = z_max;
    z.samples = samples;
    z.snapshot_stride = stride;
    return z;
  };
  auto revivals_z = [](int count, int stride) {
    ZSampling z;
    z.mode = ZSampling::Mode::Revivals;
    z.revival_count = count;
    z.snapshot_stride = stride;
    return z;
  };

  if (study_id == "fig2") {
    // Hermitian sine crystal: approximate quantum recurrence, input period
    // equal to the lattice period, plus the free-space reference curve.
    // The train is centered on the potential extremum (peak at ell/4 for the
    // sine phase convention); the zero-crossing alignment recurs far more
    // slowly.
    for (const auto& [name, v0] : {std::pair<const char*, double>{"v0_1", 1.0},
                                   {"v0_2", 2.0}}) {
      Scenario s;
      s.potential = mathieu_potential(a, v0);
      s.N = 1;
      s.M = 1;
      s.peak_over_period = 0.25;
      s.z = trace_z(500.0, 40960, 160);
      variants.push_back({name, std::move(s)});
    }
    Scenario free_ref;  // same range, gridded so the 2 pi revivals are sampled
    free_ref.potential = free_potential(a);
    free_ref.N = 1;
    free_ref.M = 1;
    free_ref.peak_over_period = 0.25;
    free_ref.z = revivals_z(80, 160);
    variants.push_back({"free", std::move(free_ref)});
  } else if (study_id == "fig3") {
    // Single-singularity PT crystal: commensurate revival, its Hermitian
    // contrast, the even-N breakdown, and the tilt that restores imaging.
    Scenario n3m2;
    n3m2.potential = one_singularity_potential(a, 1.0);
    n3m2.N = 3;
    n3m2.M = 2;
    n3m2.z = revivals_z(2, 32);
    variants.push_back({"n3m2", n3m2});

    Scenario hermit = n3m2;
    hermit.potential = real_part_potential(n3m2.potential);
    variants.push_back({"n3m2_hermitian", std::move(hermit)});

    Scenario n2m1;
    n2m1.potential = n3m2.potential;
    n2m1.N = 2;
    n2m1.M = 1;
    n2m1.z = trace_z(3.0 * (2.0 * a) * (2.0 * a) / (2.0 * kPi), 1536, 64);
    variants.push_back({"n2m1", n2m1});

    Scenario tilted = n2m1;
    tilted.tilt = Rational(1, 3);
    tilted.z = revivals_z(2, 64);
    variants.push_back({"n2m1_tilted", std::move(tilted)});
  } else if (study_id == "fig4") {
    Scenario s;
    s.potential = two_singularity_potential(a, 1.0);
    s.N = 3;
    s.M = 2;
    s.z = revivals_z(2, 32);
    variants.push_back({"n3m2", std::move(s)});
  } else {
    throw ValidationError("unknown study id \"" + study_id +
                          "\" (expected fig2, fig3 or fig4)");
  }

  bool all_pass = true;
  for (auto& v : variants) {
    v.scenario.threads = threads;
    const std::filesystem::path dir =
        std::filesystem::path(out_root) / study_id / v.name;
    const RunResult r = run_scenario(v.scenario, dir.string());
    all_pass = all_pass && r.pass;
  }
  return all_pass;
}

namespace {

ordered_json drive_table(const std::map<int, cplx>& coeffs) {
  ordered_json arr = ordered_json::array();
  for (const auto& [n, c] : coeffs)
    arr.push_back({n, c.real(), c.imag()});
  return arr;
}

double peak_to_peak(const std::map<int, cplx>& coeffs) {
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (int j = 0; j < 512; ++j) {
    const double x = 2.0 * kPi * j / 512;
    cplx v = 0.0;
    for (const auto& [n, c] : coeffs) v += c * std::polar(1.0, n * x);
    if (first) {
      lo = hi = v.real();
      first = false;
    } else {
      lo = std::min(lo, v.real());
      hi = std::max(hi, v.real());
    }
  }
  return hi - lo;
}

}  // namespace

ordered_json fiber_report(const FiberParams& params, double z_T,
                          const ComplexPotential& target, bool reference_check) {
  const FiberDesign design = build_design(params, z_T);
  const DriveCoefficients drives = drives_for_potential(target, params);

  ordered_json j;
  j["inputs"] = {{"wavelength_m", params.wavelength},
                 {"dispersion_ps_nm_km", params.dispersion_ps_nm_km},
                 {"loop_length_m", params.loop_length},
                 {"modulation_frequency_hz", params.modulation_frequency},
                 {"gain_per_trip", params.gain},
                 {"loss_per_trip", params.loss},
                 {"N", params.N},
                 {"M", params.M},
                 {"pulse_count", params.pulse_count},
                 {"group_index", params.group_index},
                 {"modulator_bandwidth_hz", params.modulator_bandwidth},
                 {"target_potential", family_name(target.family)}};
  j["derived"] = {{"total_dispersion_s2", design.total_dispersion},
                  {"potential_scale", design.potential_scale},
                  {"modulation_depth_scale", design.depth_scale},
                  {"z_T", design.z_T},
                  {"round_trips", design.round_trips},
                  {"pulse_spacing_s", design.pulse_spacing},
                  {"round_trip_time_s", design.round_trip_time},
                  {"pulse_capacity", design.pulse_capacity},
                  {"capacity_ok", design.capacity_ok}};
  j["drives"] = {{"pm", drive_table(drives.pm)},
                 {"am", drive_table(drives.am)},
                 {"pm_peak_to_peak", peak_to_peak(drives.pm)},
                 {"am_peak_to_peak", peak_to_peak(drives.am)}};

  if (reference_check) {
    // Nominal design card: 1560 nm, 50 ps/(nm km), 100 m loop, 3 GHz
    // modulation, N/M = 3/2, z_T = 18 pi.
    FiberParams nominal;
    nominal.wavelength = 1560e-9;
    nominal.dispersion_ps_nm_km = 50.0;
    nominal.loop_length = 100.0;
    nominal.modulation_frequency = 3e9;
    nominal.N = 3;
    nominal.M = 2;
    const FiberDesign base = build_design(nominal, 18.0 * kPi);

    ordered_json list = ordered_json::array();
    auto add = [&](const std::string& quantity, double computed, double reference,
                   const std::string& status, const std::string& note) {
      list.push_back({{"quantity", quantity},
                      {"computed", computed},
                      {"reference", reference},
                      {"status", status},
                      {"note", note}});
    };

    const bool agree =
        std::abs(base.round_trips - 4.9e4) <= 0.02 * 4.9e4;
    add("round_trips_3GHz_N3", base.round_trips, 4.9e4,
        agree ? "AGREE" : "DISCREPANCY",
        "z_T = 18 pi at the nominal loop parameters");

    add("modulation_depth_scale", base.depth_scale, 2e-3, "ORDER_OF_MAGNITUDE",
        "formula value 4 pi^2 D / T_m^2 reported; the reference figure quotes "
        "only the order of magnitude");

    FiberParams fast = nominal;
    fast.modulation_frequency = 6e9;
    fast.N = 1;
    const FiberDesign fast_design = build_design(fast, 2.0 * kPi);
    add("round_trips_6GHz_N1", fast_design.round_trips, 136.0, "DISCREPANCY",
        "the dispersion formula gives ~1.4e3 round trips for the same loop at "
        "6 GHz with N = 1; the reference figure of 136 sits an order of "
        "magnitude below it and is reported, not reproduced");

    add("pulse_spacing_s", base.pulse_spacing, 3.14e-9, "DISCREPANCY",
        "(3/2) T_m at 3 GHz is 0.5 ns by the defining relation; the quoted "
        "3.14 ns is inconsistent with that modulation frequency");

    j["reference_checks"] = list;
  }
  return j;
}

}  // namespace talbot
