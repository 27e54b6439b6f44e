#include "talbot/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace talbot {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Grid Grid::make(double length, int points) {
  if (!(length > 0.0)) throw std::invalid_argument("Grid: length must be positive");
  if (points < 64 || !power_of_two(points))
    throw std::invalid_argument("Grid: points must be a power of two >= 64");
  return Grid{length, points};
}

std::vector<double> Grid::xs() const {
  std::vector<double> x(points);
  for (int j = 0; j < points; ++j) x[j] = length * j / points;
  return x;
}

double Wavefield::power() const {
  double p = 0.0;
  for (const auto& [n, c] : modes) p += std::norm(c);
  return p;
}

Wavefield Wavefield::normalized() const {
  const double p = power();
  if (p <= 0.0) throw Error("Wavefield: cannot normalize the zero field");
  Wavefield out = *this;
  const double s = 1.0 / std::sqrt(p);
  for (auto& [n, c] : out.modes) c *= s;
  return out;
}

int Wavefield::max_abs_mode() const {
  int m = 0;
  for (const auto& [n, c] : modes) m = std::max(m, std::abs(n));
  return m;
}

cplx Wavefield::mode(int n) const {
  auto it = modes.find(n);
  return it == modes.end() ? cplx(0.0) : it->second;
}

double Wavefield::wavenumber(int n) const {
  return 2.0 * std::numbers::pi * (n + tilt.value()) / period;
}

Wavefield Wavefield::pruned(double rel_tol) const {
  double peak = 0.0;
  for (const auto& [n, c] : modes) peak = std::max(peak, std::abs(c));
  Wavefield out;
  out.period = period;
  out.tilt = tilt;
  for (const auto& [n, c] : modes)
    if (std::abs(c) >= rel_tol * peak) out.modes[n] = c;
  return out;
}

cplx inner(const Wavefield& a, const Wavefield& b) {
  if (a.tilt != b.tilt || a.period != b.period)
    throw GridMismatch("inner: fields live on different lattices");
  cplx s = 0.0;
  for (const auto& [n, c] : a.modes) s += std::conj(c) * b.mode(n);
  return s;
}

double mode_distance_sq(const Wavefield& a, const Wavefield& b) {
  if (a.tilt != b.tilt || a.period != b.period)
    throw GridMismatch("mode_distance_sq: fields live on different lattices");
  double d = 0.0;
  for (const auto& [n, c] : a.modes) d += std::norm(c - b.mode(n));
  for (const auto& [n, c] : b.modes)
    if (!a.modes.count(n)) d += std::norm(c);
  return d;
}

std::vector<cplx> to_samples(const Wavefield& field, const Grid& grid) {
  if (std::abs(grid.length - field.period) > 1e-12 * field.period)
    throw GridMismatch("to_samples: grid length differs from field period");
  if (grid.points / 2 <= field.max_abs_mode())
    throw UnderResolved("to_samples: grid cannot represent the highest mode");

  const double t = field.tilt.value();
  std::vector<cplx> s(grid.points, cplx(0.0));
  const double step = 2.0 * std::numbers::pi / grid.points;
  for (const auto& [n, c] : field.modes) {
    const double phase_step = step * (n + t);
    for (int j = 0; j < grid.points; ++j)
      s[j] += c * std::polar(1.0, phase_step * j);
  }
  return s;
}

Wavefield to_modes(const std::vector<cplx>& samples, const Grid& grid,
                   const Rational& tilt) {
  if (static_cast<int>(samples.size()) != grid.points)
    throw GridMismatch("to_modes: sample count differs from grid points");

  // the Nyquist bin is ambiguous for band-limited data and is dropped
  const int half = grid.points / 2;
  const double t = tilt.value();
  const double step = 2.0 * std::numbers::pi / grid.points;

  Wavefield out;
  out.period = grid.length;
  out.tilt = tilt;
  for (int n = -half + 1; n < half; ++n) {
    cplx acc = 0.0;
    const double phase_step = -step * (n + t);
    for (int j = 0; j < grid.points; ++j)
      acc += samples[j] * std::polar(1.0, phase_step * j);
    acc /= static_cast<double>(grid.points);
    if (acc != cplx(0.0)) out.modes[n] = acc;
  }
  return out;
}

}  // namespace talbot
