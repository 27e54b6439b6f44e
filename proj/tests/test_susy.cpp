// Darboux synthesis: partner potentials against their closed forms, state
// mapping, the two-step cascade, and Jordan chains at defective degeneracies.

#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "talbot/band.hpp"
#include "talbot/spectral.hpp"
#include "talbot/susy.hpp"

using namespace talbot;
constexpr double kPi = std::numbers::pi;
const double kA = 2.0 * kPi;

namespace {

// least-squares proportionality factor and relative misfit of s ~ c * ref
std::pair<cplx, double> proportionality(const std::vector<cplx>& s,
                                        const std::vector<cplx>& ref) {
  cplx num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    num += std::conj(ref[j]) * s[j];
    den += std::norm(ref[j]);
  }
  const cplx c = num / den;
  double misfit = 0.0, scale = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    misfit += std::norm(s[j] - c * ref[j]);
    scale += std::norm(c * ref[j]);
  }
  return {c, std::sqrt(misfit / scale)};
}

}  // namespace

TEST_CASE("first partner step reproduces the one-singularity closed form") {
  const SusyStep step = darboux_partner(free_potential(kA), cosine_seed(kA, 1.0));
  CHECK(step.seed_energy == doctest::Approx(0.25).epsilon(1e-14));

  // W(0) = -k0 tan(i rho) = -0.5 i tanh(1)
  CHECK(std::abs(step.superpotential[0] -
                 cplx(0.0, -0.5 * std::tanh(1.0))) < 1e-12);

  const auto xs = step.grid.xs();
  const auto v_out = potential_samples(step.output, step.grid);
  for (int j = 0; j < step.grid.points; ++j)
    CHECK(std::abs(v_out[j] - one_singularity_value(kA, 1.0, xs[j])) < 1e-10);

  CHECK(check_pt_symmetry(step.output));
  CHECK(step.output.one_sided());
}

TEST_CASE("partner potential satisfies V_out = -V_in + 2E + 2W^2 pointwise") {
  const SusyStep step = darboux_partner(free_potential(kA), cosine_seed(kA, 1.0));
  const auto v_in = potential_samples(step.input, step.grid);
  const auto v_out = potential_samples(step.output, step.grid);
  for (int j = 0; j < step.grid.points; ++j) {
    const cplx w = step.superpotential[j];
    CHECK(std::abs(v_out[j] - (-v_in[j] + 2.0 * step.seed_energy + 2.0 * w * w)) <
          1e-10);
  }
}

TEST_CASE("plane-wave seed maps free space to free space") {
  const double k0 = kPi / kA;
  SeedSolution seed;
  seed.energy = k0 * k0;
  seed.period = 2.0 * kA;
  seed.value = [k0](double x) { return std::polar(1.0, k0 * x); };
  seed.derivative = [k0](double x) {
    return cplx(0.0, k0) * std::polar(1.0, k0 * x);
  };
  const SusyStep step = darboux_partner(free_potential(kA), seed);
  for (const cplx& w : step.superpotential)
    CHECK(std::abs(w - cplx(0.0, k0)) < 1e-12);
  CHECK(step.output.max_abs_coeff() < 1e-12);
}

TEST_CASE("seed validation: vanishing and non-solving seeds are rejected") {
  CHECK_THROWS_AS(darboux_partner(free_potential(kA), cosine_seed(kA, 0.0)),
                  SeedVanishes);

  // the first-step seed does not solve the partner Hamiltonian
  const SusyStep first = darboux_partner(free_potential(kA), cosine_seed(kA, 1.0));
  CHECK_THROWS_AS(darboux_partner(first.output, cosine_seed(kA, 1.0)),
                  SeedNotSolution);

  // wrong energy on an otherwise fine seed
  SeedSolution wrong = cosine_seed(kA, 1.0);
  wrong.energy = 2.0 * wrong.energy;
  CHECK_THROWS_AS(darboux_partner(free_potential(kA), wrong), SeedNotSolution);
}

TEST_CASE("susy_map_state sends eigenstates to partner eigenstates") {
  const SusyStep step = darboux_partner(free_potential(kA), cosine_seed(kA, 1.0));

  // plane wave exp(2ix), E = 4: the image solves the partner problem
  Wavefield plane;
  plane.period = 2.0 * kA;
  plane.modes[4] = 1.0;
  const Wavefield xi = susy_map_state(plane, step);
  std::vector<cplx> resid = apply_hamiltonian(xi, step.output, step.grid);
  const auto xi_s = to_samples(xi, step.grid);
  for (int j = 0; j < step.grid.points; ++j) resid[j] -= 4.0 * xi_s[j];
  CHECK(sample_rms(resid) / sample_rms(xi_s) < 1e-8);
}

TEST_CASE("susy_map_state annihilates the factorization seed") {
  const SusyStep step = darboux_partner(free_potential(kA), cosine_seed(kA, 1.0));
  Wavefield phi1;  // cos(k0 x + i rho) on the doubled period
  phi1.period = 2.0 * kA;
  phi1.modes[1] = 0.5 * std::exp(-1.0);
  phi1.modes[-1] = 0.5 * std::exp(1.0);
  const Wavefield xi = susy_map_state(phi1, step);
  CHECK(xi.power() < 1e-16 * phi1.power());
}

TEST_CASE("susy_map_state maps the third harmonic onto the second-step seed") {
  const double rho = 1.0;
  const SusyStep step = darboux_partner(free_potential(kA), cosine_seed(kA, rho));
  Wavefield cos3;  // cos(3 k0 x + 3 i rho)
  cos3.period = 2.0 * kA;
  cos3.modes[3] = 0.5 * std::exp(-3.0 * rho);
  cos3.modes[-3] = 0.5 * std::exp(3.0 * rho);
  const Wavefield xi = susy_map_state(cos3, step);

  const SeedSolution phi2 = second_seed(kA, rho);
  const auto xs = step.grid.xs();
  std::vector<cplx> ref(step.grid.points);
  for (int j = 0; j < step.grid.points; ++j) ref[j] = phi2.value(xs[j]);
  const auto [c, misfit] = proportionality(to_samples(xi, step.grid), ref);
  CHECK(misfit < 1e-8);
  CHECK(std::abs(c) > 0.0);
}

TEST_CASE("second-step superpotential matches its closed form") {
  // W_2 = k0 (3 cos^2(k0 x + i rho) - 2) / (sin(k0 x + i rho) cos(k0 x + i rho))
  const double rho = 1.0;
  const double k0 = kPi / kA;
  const SusyStep first = darboux_partner(free_potential(kA), cosine_seed(kA, rho));
  const SusyStep second = darboux_partner(first.output, second_seed(kA, rho));
  const auto xs = second.grid.xs();
  for (int j = 0; j < second.grid.points; ++j) {
    const cplx t(k0 * xs[j], rho);
    const cplx c = std::cos(t), s = std::sin(t);
    const cplx w_ref = k0 * (3.0 * c * c - 2.0) / (s * c);
    CHECK(std::abs(second.superpotential[j] - w_ref) < 1e-8);
  }
}

TEST_CASE("cascaded synthesis equals the two-singularity closed form") {
  const ComplexPotential v3 = synthesize_two_singularities(kA, 1.0);
  const Grid grid = Grid::make(kA, 512);
  const auto s = potential_samples(v3, grid);
  const auto xs = grid.xs();
  for (int j = 0; j < grid.points; ++j)
    CHECK(std::abs(s[j] - two_singularity_value(kA, 1.0, xs[j])) < 1e-10);

  // and coefficient-wise against the analytic series
  for (int n = 1; n <= 8; ++n)
    CHECK(std::abs(v3.coeff(n) - oracles::two_ss_coefficient(kA, 1.0, n)) < 1e-10);
}

TEST_CASE("cascade at rho = 2: PT symmetric with degeneracies {E1, E3} defective") {
  const ComplexPotential v3 = synthesize_two_singularities(kA, 2.0);
  CHECK(check_pt_symmetry(v3));
  const SingularityReport report = detect_singularities(v3, 4);
  CHECK(report.defective_labels() == std::vector<int>{1, 3});
}

TEST_CASE("cascade rejects rho = 0") {
  CHECK_THROWS_AS(synthesize_two_singularities(kA, 0.0), SeedVanishes);
}

TEST_CASE("factorization identity on random band eigenfunctions of the partner") {
  const double rho = 1.0;
  const SusyStep step = darboux_partner(free_potential(kA), cosine_seed(kA, rho));
  const ComplexPotential& v2 = step.output;
  const int n_trunc = 2 * v2.n_max();

  std::mt19937 rng(3);
  std::uniform_int_distribution<int> q_pick(1, 15);
  std::uniform_int_distribution<int> band_pick(0, 7);
  int tested = 0;
  while (tested < 20) {
    const int jq = q_pick(rng) * (tested % 2 == 0 ? 1 : -1);
    const double q = (kPi / kA) * jq / 16.0;  // generic rational q
    const BlochBlock block = bloch_matrix(v2, q, n_trunc);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(block.matrix, true);

    // pick a low band (sort eigenvalues by real part, take a random one)
    std::vector<int> order(block.matrix.rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return es.eigenvalues()(a).real() < es.eigenvalues()(b).real();
    });
    const int pick = order[band_pick(rng)];
    const cplx energy = es.eigenvalues()(pick);

    // eigenvector as a field on the doubled period (even harmonics + tilt)
    Wavefield xi;
    xi.period = 2.0 * kA;
    xi.tilt = Rational(jq, 16);
    for (Eigen::Index i = 0; i < block.matrix.rows(); ++i) {
      const cplx c = es.eigenvectors()(i, pick);
      if (std::abs(c) > 1e-16)
        xi.modes[2 * (static_cast<int>(i) - n_trunc)] = c;
    }
    xi = xi.normalized();
    ++tested;

    // B xi = xi' + W xi, then A (B xi) + E_seed xi must equal H_out xi
    const auto dxi = derivative_samples(xi, step.grid);
    const auto xs_samples = to_samples(xi, step.grid);
    std::vector<cplx> b_xi(step.grid.points);
    for (int j = 0; j < step.grid.points; ++j)
      b_xi[j] = dxi[j] + step.superpotential[j] * xs_samples[j];
    const Wavefield b_field = to_modes(b_xi, step.grid, xi.tilt);
    const auto db = derivative_samples(b_field, step.grid);
    std::vector<cplx> lhs(step.grid.points);
    for (int j = 0; j < step.grid.points; ++j)
      lhs[j] = -db[j] + step.superpotential[j] * b_xi[j] +
               step.seed_energy * xs_samples[j];

    const auto rhs = apply_hamiltonian(xi, v2, step.grid);
    std::vector<cplx> diff(step.grid.points);
    for (int j = 0; j < step.grid.points; ++j) diff[j] = lhs[j] - rhs[j];
    CHECK(sample_rms(diff) / sample_rms(rhs) < 1e-8);

    // sanity: xi really is an eigenfunction of the partner
    std::vector<cplx> resid = rhs;
    for (int j = 0; j < step.grid.points; ++j) resid[j] -= energy * xs_samples[j];
    CHECK(sample_rms(resid) < 1e-7);
  }
}

TEST_CASE("isospectrality of partner potentials at generic wave numbers") {
  const SusyStep first = darboux_partner(free_potential(kA), cosine_seed(kA, 1.0));
  const SusyStep second = darboux_partner(first.output, second_seed(kA, 1.0));
  const int n_trunc = 2 * std::max(second.output.n_max(), first.output.n_max());
  for (int j = 0; j < 32; ++j) {
    const double q = (kPi / kA) * ((j + 0.5) / 32.5 * 1.9 - 0.95);
    auto low_bands = [&](const ComplexPotential& pot) {
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(
          bloch_matrix(pot, q, n_trunc).matrix, false);
      std::vector<double> ev(es.eigenvalues().size());
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        ev[i] = es.eigenvalues()(i).real();
      std::sort(ev.begin(), ev.end());
      ev.resize(7);
      return ev;
    };
    const auto in_bands = low_bands(first.input);
    const auto mid_bands = low_bands(first.output);
    const auto out_bands = low_bands(second.output);
    for (int a = 0; a < 7; ++a) {
      CHECK(std::abs(in_bands[a] - mid_bands[a]) < 1e-8);
      CHECK(std::abs(in_bands[a] - out_bands[a]) < 1e-8);
    }
  }
}

TEST_CASE("jordan chain at the defective zone-edge degeneracy") {
  const ComplexPotential pot = one_singularity_potential(kA, 1.0);
  const JordanChain chain = jordan_chain(pot, 0.25, -0.5);
  CHECK(chain.residual_u < 1e-8);
  CHECK(chain.residual_v < 1e-8);
  CHECK(chain.u.power() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(inner(chain.u, chain.v)) < 1e-10);

  // u is proportional to 1/phi_1 = sec(x/2 + i): harmonics n >= 1 with
  // coefficients 2 (-1)^(n-1) e^(-(2n-1) rho)
  Wavefield sec;
  sec.period = kA;
  sec.tilt = Rational(-1, 2);
  for (int n = 1; n <= 20; ++n)
    sec.modes[n] = 2.0 * ((n % 2 == 1) ? 1.0 : -1.0) * std::exp(-(2.0 * n - 1.0));
  sec = sec.normalized();
  const cplx overlap = inner(sec, chain.u);
  CHECK(std::abs(overlap) == doctest::Approx(1.0).epsilon(1e-8));
  double max_dev = 0.0;
  const cplx phase = overlap / std::abs(overlap);
  for (const auto& [n, c] : sec.modes)
    max_dev = std::max(max_dev, std::abs(chain.u.mode(n) * std::conj(phase) - c));
  CHECK(max_dev < 1e-8);
}

TEST_CASE("jordan chain rejects diabolic and non-degenerate requests") {
  const ComplexPotential pot = one_singularity_potential(kA, 1.0);
  CHECK_THROWS_AS(jordan_chain(pot, 1.0, 0.0), NotDefective);  // diabolic pair
  CHECK_THROWS_AS(jordan_chain(free_potential(kA), 1.0, 0.0), NotDefective);
  CHECK_THROWS_AS(jordan_chain(pot, 0.25, -0.3), std::invalid_argument);
}

TEST_CASE("two-singularity crystal carries a chain at the second defective "
          "energy as well") {
  const ComplexPotential pot = two_singularity_potential(kA, 1.0);
  const JordanChain e1 = jordan_chain(pot, 0.25, -0.5);
  const JordanChain e3 = jordan_chain(pot, 2.25, -0.5);
  CHECK(e1.residual_u < 1e-8);
  CHECK(e3.residual_u < 1e-8);
  CHECK(e3.residual_v < 1e-8);
}
