#include "talbot/susy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "talbot/spectral.hpp"

namespace talbot {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRankTol = 1e-8;

// DFT of grid samples, index m on the grid-length lattice.
std::vector<cplx> dft_modes(const std::vector<cplx>& s) {
  const int p = static_cast<int>(s.size());
  std::vector<cplx> out(p);
  for (int m = 0; m < p; ++m) {
    cplx acc = 0.0;
    const double step = -2.0 * kPi * m / p;
    for (int j = 0; j < p; ++j) acc += s[j] * std::polar(1.0, step * j);
    out[m] = acc / static_cast<double>(p);
  }
  return out;
}

int wrap_index(int m, int p) { return m < p / 2 ? m : m - p; }

}  // namespace

SeedSolution cosine_seed(double a, double rho) {
  const double k0 = kPi / a;
  SeedSolution s;
  s.energy = k0 * k0;
  s.period = 2.0 * a;
  s.value = [k0, rho](double x) { return std::cos(cplx(k0 * x, rho)); };
  s.derivative = [k0, rho](double x) { return -k0 * std::sin(cplx(k0 * x, rho)); };
  return s;
}

SeedSolution second_seed(double a, double rho) {
  const double k0 = kPi / a;
  SeedSolution s;
  s.energy = 9.0 * k0 * k0;
  s.period = 2.0 * a;
  s.value = [k0, rho](double x) {
    const cplx t1(k0 * x, rho);
    const cplx t3(3.0 * k0 * x, 3.0 * rho);
    return 3.0 * k0 * std::sin(t3) - k0 * std::tan(t1) * std::cos(t3);
  };
  s.derivative = [k0, rho](double x) {
    const cplx t1(k0 * x, rho);
    const cplx t3(3.0 * k0 * x, 3.0 * rho);
    const cplx c1 = std::cos(t1);
    return 9.0 * k0 * k0 * std::cos(t3) - k0 * k0 * std::cos(t3) / (c1 * c1) +
           3.0 * k0 * k0 * std::tan(t1) * std::sin(t3);
  };
  return s;
}

SusyStep darboux_partner(const ComplexPotential& v_in, const SeedSolution& seed,
                         int grid_points) {
  const double ratio = seed.period / v_in.period;
  const long long r = std::llround(ratio);
  if (r < 1 || std::abs(ratio - r) > 1e-9)
    throw IncommensurateGrid(
        "darboux_partner: seed period is not an integer multiple of the "
        "lattice period");

  const Grid grid = Grid::make(seed.period, grid_points);
  const auto xs = grid.xs();

  std::vector<cplx> phi(grid.points), dphi(grid.points);
  double phi_max = 0.0, phi_min = 0.0;
  for (int j = 0; j < grid.points; ++j) {
    phi[j] = seed.value(xs[j]);
    dphi[j] = seed.derivative(xs[j]);
    const double m = std::abs(phi[j]);
    phi_max = std::max(phi_max, m);
    phi_min = (j == 0) ? m : std::min(phi_min, m);
  }
  if (phi_min < 1e-6 * phi_max)
    throw SeedVanishes(
        "darboux_partner: seed vanishes on the grid; the partner potential "
        "would diverge (a nonzero rho is required)");

  // residual of H_in phi = E phi, evaluated spectrally
  const Wavefield phi_field = to_modes(phi, grid);
  std::vector<cplx> resid = apply_hamiltonian(phi_field, v_in, grid);
  for (int j = 0; j < grid.points; ++j) resid[j] -= seed.energy * phi[j];
  const double rel_resid = sample_rms(resid) / sample_rms(phi);
  if (rel_resid > 1e-8)
    throw SeedNotSolution("darboux_partner: seed residual " +
                          std::to_string(rel_resid) + " exceeds 1e-8");

  SusyStep step;
  step.seed_energy = seed.energy;
  step.grid = grid;
  step.seed = phi;
  step.input = v_in;

  step.superpotential.resize(grid.points);
  std::vector<cplx> v_out(grid.points);
  const std::vector<cplx> v_in_samples = potential_samples(v_in, grid);
  for (int j = 0; j < grid.points; ++j) {
    const cplx w = dphi[j] / phi[j];
    step.superpotential[j] = w;
    v_out[j] = -v_in_samples[j] + 2.0 * seed.energy + 2.0 * w * w;
  }

  // Extract period-a coefficients: on the seed grid only harmonics that are
  // multiples of r = seed.period / a may survive.
  const std::vector<cplx> modes = dft_modes(v_out);
  double vmax = 0.0;
  for (const cplx& c : modes) vmax = std::max(vmax, std::abs(c));
  // rounding floor set by the 2E term even when the partner is (near) zero
  const double scale = std::max(vmax, 2.0 * std::abs(seed.energy));
  for (int m = 0; m < grid.points; ++m) {
    if (wrap_index(m, grid.points) % r == 0) continue;
    if (std::abs(modes[m]) > 1e-10 * scale)
      throw Error("darboux_partner: partner potential is not periodic with "
                  "the lattice period");
  }

  std::map<int, cplx> coeffs;
  const int n_avail = grid.points / (2 * static_cast<int>(r)) - 1;
  // store out to the first clearly negligible harmonic on each side
  int n_store = 1;
  for (int n = 1; n <= n_avail; ++n) {
    n_store = n;
    const double hi = std::abs(modes[(n * r) % grid.points]);
    const double lo = std::abs(modes[(grid.points - n * r) % grid.points]);
    if (std::max(hi, lo) <= 1e-13 * vmax) break;
  }
  for (int n = -n_store; n <= n_store; ++n) {
    const int m = ((n * static_cast<int>(r)) % grid.points + grid.points) % grid.points;
    coeffs[n] = modes[m];
  }
  step.output = ComplexPotential{v_in.period, std::move(coeffs),
                                 PotentialFamily::Custom, 0.0};
  return step;
}

Wavefield susy_map_state(const Wavefield& psi, const SusyStep& step) {
  if (std::abs(psi.period - step.grid.length) > 1e-12 * step.grid.length)
    throw GridMismatch("susy_map_state: field period differs from the step grid");

  const std::vector<cplx> dpsi = derivative_samples(psi, step.grid);
  const std::vector<cplx> f = to_samples(psi, step.grid);
  std::vector<cplx> xi(step.grid.points);
  for (int j = 0; j < step.grid.points; ++j)
    xi[j] = -dpsi[j] + step.superpotential[j] * f[j];
  return to_modes(xi, step.grid, psi.tilt).pruned(1e-14);
}

ComplexPotential synthesize_two_singularities(double a, double rho) {
  if (rho == 0.0)
    throw SeedVanishes("synthesize_two_singularities: rho must be nonzero");
  const SusyStep first = darboux_partner(free_potential(a), cosine_seed(a, rho));
  const SusyStep second = darboux_partner(first.output, second_seed(a, rho));
  return second.output;
}

JordanChain jordan_chain(const ComplexPotential& pot, double energy, double q,
                         int n_trunc, int grid_points) {
  const double edge = kPi / pot.period;
  Rational tilt(0, 1);
  if (std::abs(q) < 1e-9 * edge)
    tilt = Rational(0, 1);
  else if (std::abs(q + edge) < 1e-9 * edge)
    tilt = Rational(-1, 2);
  else
    throw std::invalid_argument(
        "jordan_chain: q must be the zone center or the -pi/a zone edge");

  if (n_trunc <= 0) n_trunc = std::max(2 * pot.n_max(), 32);
  const BlochBlock block = bloch_matrix(pot, tilt.value() * 2.0 * edge, n_trunc);
  Eigen::MatrixXcd shifted = block.matrix;
  shifted.diagonal().array() -= energy;

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(shifted,
                                         Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const Eigen::Index dim = sv.size();
  int kdim = 0;
  for (Eigen::Index i = 0; i < dim; ++i)
    if (sv(i) < kRankTol * sv(0)) ++kdim;
  if (kdim != 1)
    throw NotDefective("jordan_chain: kernel dimension is " +
                       std::to_string(kdim) + " (1 marks a defective pair)");

  Eigen::VectorXcd u = svd.matrixV().col(dim - 1);
  // deterministic phase: largest component real positive
  Eigen::Index imax = 0;
  u.cwiseAbs().maxCoeff(&imax);
  u *= std::polar(1.0, -std::arg(u(imax)));

  // minimum-norm solution of (H - E) v = u; orthogonal to the kernel by
  // construction, then the gauge <u, v> = 0 is tightened explicitly
  Eigen::VectorXcd y = svd.matrixU().adjoint() * u;
  for (Eigen::Index i = 0; i < dim; ++i)
    y(i) = (sv(i) > kRankTol * sv(0)) ? y(i) / sv(i) : cplx(0.0);
  Eigen::VectorXcd v = svd.matrixV() * y;
  v -= u.dot(v) * u;

  JordanChain chain;
  chain.energy = energy;
  chain.q = tilt.value() * 2.0 * edge;
  chain.u.period = pot.period;
  chain.u.tilt = tilt;
  chain.v.period = pot.period;
  chain.v.tilt = tilt;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const int n = static_cast<int>(i) - n_trunc;
    if (u(i) != cplx(0.0)) chain.u.modes[n] = u(i);
    if (v(i) != cplx(0.0)) chain.v.modes[n] = v(i);
  }

  // residuals by spectral differentiation on the construction grid
  const Grid grid = Grid::make(pot.period, grid_points);
  if (grid.points / 2 <= n_trunc)
    throw UnderResolved("jordan_chain: construction grid cannot resolve the "
                        "Bloch truncation");
  std::vector<cplx> ru = apply_hamiltonian(chain.u, pot, grid);
  const std::vector<cplx> us = to_samples(chain.u, grid);
  for (int j = 0; j < grid.points; ++j) ru[j] -= energy * us[j];
  chain.residual_u = sample_rms(ru);

  std::vector<cplx> rv = apply_hamiltonian(chain.v, pot, grid);
  const std::vector<cplx> vs = to_samples(chain.v, grid);
  for (int j = 0; j < grid.points; ++j) rv[j] -= energy * vs[j] + us[j];
  chain.residual_v = sample_rms(rv);

  if (chain.residual_u > 1e-8 || chain.residual_v > 1e-8)
    throw Error("jordan_chain: chain residuals exceed 1e-8 (u: " +
                std::to_string(chain.residual_u) + ", v: " +
                std::to_string(chain.residual_v) + ")");
  return chain;
}

}  // namespace talbot
