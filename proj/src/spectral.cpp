#include "talbot/spectral.hpp"

#include <cmath>

namespace talbot {

std::vector<cplx> derivative_samples(const Wavefield& field, const Grid& grid) {
  Wavefield d = field;
  for (auto& [n, c] : d.modes) c *= cplx(0.0, field.wavenumber(n));
  return to_samples(d, grid);
}

std::vector<cplx> apply_hamiltonian(const Wavefield& field,
                                    const ComplexPotential& pot,
                                    const Grid& grid) {
  Wavefield kinetic = field;
  for (auto& [n, c] : kinetic.modes) {
    const double k = field.wavenumber(n);
    c *= k * k;
  }
  std::vector<cplx> out = to_samples(kinetic, grid);
  const std::vector<cplx> v = potential_samples(pot, grid);
  const std::vector<cplx> f = to_samples(field, grid);
  for (int j = 0; j < grid.points; ++j) out[j] += v[j] * f[j];
  return out;
}

double sample_rms(const std::vector<cplx>& samples) {
  double s = 0.0;
  for (const cplx& c : samples) s += std::norm(c);
  return samples.empty() ? 0.0 : std::sqrt(s / samples.size());
}

}  // namespace talbot
