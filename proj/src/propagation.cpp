#include "talbot/propagation.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>
#include <unsupported/Eigen/MatrixFunctions>

namespace talbot {

namespace {

constexpr double kPi = std::numbers::pi;

long long floor_div(long long a, long long b) {
  // b > 0
  return (a >= 0) ? a / b : -((-a + b - 1) / b);
}

int centered_residue(long long m, int n_blocks) {
  int r = static_cast<int>(((m % n_blocks) + n_blocks) % n_blocks);
  return (r <= (n_blocks - 1) / 2) ? r : r - n_blocks;
}

struct Block {
  int n0 = 0;
  long long fold = 0;  // lattice shift taking q into [-pi/a, pi/a)
  double q = 0.0;
  Eigen::VectorXcd f0;
  bool populated = false;
};

struct BlockResult {
  std::vector<double> delta, half, norm2;
  std::vector<std::vector<std::pair<int, cplx>>> snapshot_modes;
  double edge_power = 0.0;
  double max_norm = 1.0;
};

struct ZGrid {
  std::vector<double> values;  // starts at 0
  bool uniform = false;
  double dz = 0.0;
};

ZGrid build_z_grid(const Scenario& s, double z_T) {
  ZGrid g;
  switch (s.z.mode) {
    case ZSampling::Mode::Revivals: {
      if (s.z.revival_count < 1 || s.z.samples_per_period < 1)
        throw ValidationError("z sampling: revival_count and samples_per_period "
                              "must be positive");
      const int total = s.z.revival_count * s.z.samples_per_period;
      g.uniform = true;
      g.dz = z_T / s.z.samples_per_period;
      g.values.resize(total + 1);
      for (int k = 0; k <= total; ++k) g.values[k] = g.dz * k;
      break;
    }
    case ZSampling::Mode::Trace: {
      if (!(s.z.z_max > 0.0) || s.z.samples < 1)
        throw ValidationError("z sampling: trace mode needs z_max > 0 and samples >= 1");
      g.uniform = true;
      g.dz = s.z.z_max / s.z.samples;
      g.values.resize(s.z.samples + 1);
      for (int k = 0; k <= s.z.samples; ++k) g.values[k] = g.dz * k;
      break;
    }
    case ZSampling::Mode::List: {
      g.values = s.z.values;
      for (double z : g.values)
        if (!(z >= 0.0)) throw ValidationError("z sampling: distances must be >= 0");
      std::sort(g.values.begin(), g.values.end());
      g.values.erase(std::unique(g.values.begin(), g.values.end()), g.values.end());
      if (g.values.empty() || g.values.front() != 0.0)
        g.values.insert(g.values.begin(), 0.0);
      break;
    }
  }
  return g;
}

void run_blocks(int count, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

// ---- split-step FFT backend -----------------------------------------------

struct FftPlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

// FFTW's planner is not thread-safe; plans are created once per size under a
// lock and then executed on caller-owned buffers via the new-array interface.
FftPlanPair fft_plans(int size) {
  static std::mutex mu;
  static std::map<int, FftPlanPair> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(size);
  if (it != cache.end()) return it->second;
  fftw_complex* buf = fftw_alloc_complex(size);
  FftPlanPair p;
  p.fwd = fftw_plan_dft_1d(size, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  p.bwd = fftw_plan_dft_1d(size, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(buf);
  return cache.emplace(size, p).first->second;
}

class SplitStepper {
 public:
  SplitStepper(const Wavefield& field, const ComplexPotential& pot,
               const Grid& grid)
      : grid_(grid), plans_(fft_plans(grid.points)) {
    Wavefield envelope = field;  // tilt handled through the wavenumbers
    envelope.tilt = Rational(0, 1);
    samples_ = to_samples(envelope, grid);
    v_ = potential_samples(pot, grid);
    const double t = field.tilt.value();
    k_.resize(grid.points);
    for (int j = 0; j < grid.points; ++j) {
      const int n = (j < grid.points / 2) ? j : j - grid.points;
      k_[j] = 2.0 * kPi * (n + t) / grid.length;
    }
    buf_ = fftw_alloc_complex(grid.points);
  }

  ~SplitStepper() { fftw_free(buf_); }

  SplitStepper(const SplitStepper&) = delete;
  SplitStepper& operator=(const SplitStepper&) = delete;

  // Fourth-order composition of symmetric splits (triple-jump coefficients).
  void advance(double z, int steps) {
    if (steps < 1 || z == 0.0) return;
    const double h = z / steps;
    const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
    const double w0 = 1.0 - 2.0 * w1;

    const auto kin_outer = kinetic_phase(w1 * h / 2.0);
    const auto kin_inner = kinetic_phase((w1 + w0) * h / 2.0);
    const auto kin_join = kinetic_phase(w1 * h);
    const auto pot_w1 = potential_phase(w1 * h);
    const auto pot_w0 = potential_phase(w0 * h);

    kinetic(kin_outer);
    for (int step = 0; step < steps; ++step) {
      kick(pot_w1);
      kinetic(kin_inner);
      kick(pot_w0);
      kinetic(kin_inner);
      kick(pot_w1);
      kinetic(step + 1 < steps ? kin_join : kin_outer);
    }
  }

  const std::vector<cplx>& samples() const { return samples_; }

 private:
  std::vector<cplx> kinetic_phase(double tau) const {
    std::vector<cplx> p(grid_.points);
    for (int j = 0; j < grid_.points; ++j)
      p[j] = std::polar(1.0, -k_[j] * k_[j] * tau);
    return p;
  }

  std::vector<cplx> potential_phase(double tau) const {
    std::vector<cplx> p(grid_.points);
    for (int j = 0; j < grid_.points; ++j)
      p[j] = std::exp(cplx(0.0, -tau) * v_[j]);
    return p;
  }

  void kick(const std::vector<cplx>& phase) {
    for (int j = 0; j < grid_.points; ++j) samples_[j] *= phase[j];
  }

  void kinetic(const std::vector<cplx>& phase) {
    auto* b = reinterpret_cast<cplx*>(buf_);
    std::copy(samples_.begin(), samples_.end(), b);
    fftw_execute_dft(plans_.fwd, buf_, buf_);
    for (int j = 0; j < grid_.points; ++j) b[j] *= phase[j];
    fftw_execute_dft(plans_.bwd, buf_, buf_);
    const double scale = 1.0 / grid_.points;
    for (int j = 0; j < grid_.points; ++j) samples_[j] = b[j] * scale;
  }

  Grid grid_;
  FftPlanPair plans_;
  std::vector<cplx> samples_, v_;
  std::vector<double> k_;
  fftw_complex* buf_ = nullptr;
};

}  // namespace

bool tilt_conditions_ok(int N, const Rational& p, std::string* why) {
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (p.is_zero()) return true;
  if (p.num() != 1 && p.num() != -1)
    return fail("tilt: 1/p is not an integer");
  if (std::gcd(p.den(), static_cast<std::int64_t>(N)) != 1)
    return fail("tilt: 1/p shares a factor with N");
  if ((2LL * N * p.num()) % p.den() == 0)
    return fail("tilt: 2 N p is an integer");
  return true;
}

void validate_scenario(const Scenario& s) {
  if (!(s.potential.period > 0.0))
    throw ValidationError("scenario: potential period must be positive");
  if (s.N < 1 || s.M < 1)
    throw ValidationError("scenario: N and M must be positive integers");
  if (std::gcd(s.N, s.M) != 1)
    throw ValidationError("scenario: N and M must be coprime");
  if (!s.tilt.is_zero()) {
    std::string why;
    if (!tilt_conditions_ok(s.N, s.tilt, &why)) throw TiltConditionsViolated(why);
  }
  switch (s.profile) {
    case ProfileKind::GaussianTrain:
      if (!(s.width_over_period > 0.0))
        throw ValidationError("scenario: gaussian width must be positive");
      if (s.width_over_period >= 0.5)
        throw WidthTooLarge("scenario: gaussian width must stay below half "
                            "the input period");
      break;
    case ProfileKind::JordanV:
      if (s.N != 2 || s.M != 1 || !s.tilt.is_zero())
        throw ValidationError("scenario: the Jordan-vector profile is a plain "
                              "period-2a input (N=2, M=1, no tilt)");
      break;
    case ProfileKind::Custom:
      if (s.custom_modes.empty())
        throw ValidationError("scenario: custom profile needs at least one mode");
      break;
  }
  if (s.z.snapshot_stride < 1)
    throw ValidationError("scenario: snapshot stride must be >= 1");
  if (s.threads < 1)
    throw ValidationError("scenario: thread count must be >= 1");
}

Wavefield gaussian_train(int N, int M, double a, double width) {
  if (N < 1 || M < 1 || std::gcd(N, M) != 1)
    throw ValidationError("gaussian_train: N and M must be coprime positive integers");
  const double ell = a * N / M;
  if (!(width > 0.0))
    throw std::invalid_argument("gaussian_train: width must be positive");
  if (width >= 0.5 * ell)
    throw WidthTooLarge("gaussian_train: width must stay below half the input period");

  Wavefield f;
  f.period = N * a;
  for (int l = 0;; ++l) {
    const double arg = kPi * l * width / ell;
    const double c = std::exp(-arg * arg);
    if (l > 0 && c < 1e-18) break;
    f.modes[M * l] = c;
    if (l > 0) f.modes[-M * l] = c;
  }
  return f.normalized();
}

double predict_revival(int N, int M, double a, const Rational& p) {
  if (N < 1 || M < 1 || std::gcd(N, M) != 1)
    throw std::invalid_argument("predict_revival: N and M must be coprime");
  if (p.is_zero()) return N * N * a * a / (2.0 * kPi);
  std::string why;
  if (!tilt_conditions_ok(N, p, &why)) throw TiltConditionsViolated(why);
  const double pv = p.value();
  return N * N * a * a / (2.0 * kPi * pv * pv);
}

Wavefield initial_field(const Scenario& s) {
  validate_scenario(s);
  const double a = s.potential.period;
  Wavefield f;
  switch (s.profile) {
    case ProfileKind::GaussianTrain: {
      const double ell = a * s.N / s.M;
      f = gaussian_train(s.N, s.M, a, s.width_over_period * ell);
      if (s.peak_over_period != 0.0) {
        // translate the train so its peaks sit at x = peak_over_period * ell
        // (mod ell); the alignment against the potential matters physically
        const double phase = -2.0 * kPi * s.peak_over_period / s.M;
        for (auto& [n, c] : f.modes) c *= std::polar(1.0, phase * n);
      }
      break;
    }
    case ProfileKind::JordanV: {
      const double e1 = (kPi / a) * (kPi / a);
      const JordanChain chain = jordan_chain(s.potential, e1, -kPi / a);
      f.period = 2.0 * a;
      for (const auto& [n, c] : chain.v.modes) f.modes[2 * n - 1] = c;
      f = f.normalized();
      break;
    }
    case ProfileKind::Custom: {
      f.period = s.N * a;
      f.modes = s.custom_modes;
      f = f.normalized();
      break;
    }
  }
  f.tilt = s.tilt.times(s.N);
  return f;
}

std::size_t PropagationTrace::index_at(double z_value) const {
  const double tol = 1e-9 * std::max(1.0, std::abs(z_value));
  for (std::size_t k = 0; k < z.size(); ++k)
    if (std::abs(z[k] - z_value) <= tol) return k;
  throw std::invalid_argument("PropagationTrace: no sample at the requested z");
}

PropagationTrace propagate(const Scenario& s) {
  validate_scenario(s);
  const double a = s.potential.period;
  const int N = s.N;
  const Wavefield psi0 = initial_field(s);
  const double z_T = predict_revival(N, s.M, a, s.tilt);
  const ZGrid zg = build_z_grid(s, z_T);
  const std::size_t n_samples = zg.values.size();

  // ---- residue blocks -------------------------------------------------------
  const int n_sig = s.potential.significant_n_max();
  std::vector<Block> blocks(N);
  std::vector<std::vector<std::pair<long long, cplx>>> block_modes(N);
  int support = 0;
  std::size_t assigned = 0;
  const Rational pd = s.tilt;
  for (int b = 0; b < N; ++b) {
    const int n0 = centered_residue(b, N);
    Block& blk = blocks[b];
    blk.n0 = n0;
    // q_raw = (2 pi / a)(n0 / N + p), folded exactly into [-pi/a, pi/a)
    const long long r_num = static_cast<long long>(n0) * pd.den() + pd.num() * N;
    const long long r_den = static_cast<long long>(N) * pd.den();
    blk.fold = floor_div(2 * r_num + r_den, 2 * r_den);
    blk.q = 2.0 * kPi / a *
            (static_cast<double>(r_num - blk.fold * r_den) / static_cast<double>(r_den));
  }
  for (const auto& [m, c] : psi0.modes) {
    const int n0 = centered_residue(m, N);
    int b = ((n0 % N) + N) % N;
    block_modes[b].push_back({m, c});
    const long long nprime = (m - n0) / N + blocks[b].fold;
    support = std::max(support, static_cast<int>(std::llabs(nprime)));
    ++assigned;
  }
  if (assigned != psi0.modes.size())
    throw BlockMismatch("propagate: mode-to-block assignment lost modes");

  const int n_t = s.block_truncation > 0
                      ? s.block_truncation
                      : std::max({2 * s.potential.n_max(), support + n_sig + 12, 16});
  if (n_t < support + n_sig)
    throw TruncationTooSmall("propagate: block truncation cannot hold the "
                             "initial support plus the potential's reach");
  const int dim = 2 * n_t + 1;

  for (int b = 0; b < N; ++b) {
    Block& blk = blocks[b];
    blk.f0 = Eigen::VectorXcd::Zero(dim);
    for (const auto& [m, c] : block_modes[b]) {
      const long long nprime = (m - blk.n0) / N + blk.fold;
      blk.f0(static_cast<int>(nprime) + n_t) = c;
    }
    blk.populated = !block_modes[b].empty();
  }

  // ---- snapshot plan --------------------------------------------------------
  std::vector<std::size_t> snapshot_at;
  for (std::size_t k = 0; k < n_samples; ++k)
    if (k % s.z.snapshot_stride == 0 || k + 1 == n_samples) snapshot_at.push_back(k);
  std::vector<std::size_t> snap_index_of(n_samples, SIZE_MAX);
  for (std::size_t i = 0; i < snapshot_at.size(); ++i)
    snap_index_of[snapshot_at[i]] = i;

  const double tilt_value = psi0.tilt.value();
  const double half_step = kPi / s.M;  // phase increment for the L/2M shift

  // ---- evolve each block ----------------------------------------------------
  std::vector<BlockResult> results(N);
  run_blocks(N, s.threads, [&](int b) {
    Block& blk = blocks[b];
    BlockResult& res = results[b];
    res.delta.assign(n_samples, 0.0);
    res.half.assign(n_samples, 0.0);
    res.norm2.assign(n_samples, 0.0);
    res.snapshot_modes.resize(snapshot_at.size());
    if (!blk.populated) return;

    const BlochBlock bloch = bloch_matrix(s.potential, blk.q, n_t);

    // target phases for the half-period-shifted comparison
    Eigen::VectorXcd half_target = blk.f0;
    for (int i = 0; i < dim; ++i) {
      const long long m = (static_cast<long long>(i) - n_t - blk.fold) * N + blk.n0;
      half_target(i) *= std::polar(1.0, half_step * (m + tilt_value));
    }

    Eigen::MatrixXcd step;
    double cached_dz = -1.0;
    if (zg.uniform && n_samples > 1) {
      step = (cplx(0.0, -zg.dz) * bloch.matrix).exp();
      cached_dz = zg.dz;
    }
    Eigen::VectorXcd f = blk.f0;
    for (std::size_t k = 0; k < n_samples; ++k) {
      if (k > 0) {
        const double dz = zg.uniform ? zg.dz : zg.values[k] - zg.values[k - 1];
        if (dz != cached_dz) {
          step = (cplx(0.0, -dz) * bloch.matrix).exp();
          cached_dz = dz;
        }
        f = step * f;
      }
      res.delta[k] = (f - blk.f0).squaredNorm();
      res.half[k] = (f - half_target).squaredNorm();
      res.norm2[k] = f.squaredNorm();
      res.max_norm = std::max(res.max_norm, res.norm2[k]);
      const double edge = std::norm(f(0)) + std::norm(f(1)) + std::norm(f(dim - 1)) +
                          std::norm(f(dim - 2));
      res.edge_power = std::max(res.edge_power, edge);
      if (snap_index_of[k] != SIZE_MAX) {
        auto& out = res.snapshot_modes[snap_index_of[k]];
        for (int i = 0; i < dim; ++i) {
          if (f(i) == cplx(0.0)) continue;
          const long long m = (static_cast<long long>(i) - n_t - blk.fold) * N + blk.n0;
          out.push_back({static_cast<int>(m), f(i)});
        }
      }
    }
  });

  // ---- deterministic gather -------------------------------------------------
  PropagationTrace trace;
  trace.z = zg.values;
  trace.deviation.assign(n_samples, 0.0);
  trace.deviation_half.assign(n_samples, 0.0);
  trace.norm.assign(n_samples, 0.0);
  trace.initial = psi0;
  trace.talbot_period = z_T;
  trace.hermitian = is_hermitian(s.potential);
  trace.snapshot_at = snapshot_at;
  trace.snapshots.resize(snapshot_at.size());

  double max_norm = 1.0, edge_power = 0.0;
  for (int b = 0; b < N; ++b) {
    for (std::size_t k = 0; k < n_samples; ++k) {
      trace.deviation[k] += results[b].delta[k];
      trace.deviation_half[k] += results[b].half[k];
      trace.norm[k] += results[b].norm2[k];
    }
    max_norm = std::max(max_norm, results[b].max_norm);
    edge_power = std::max(edge_power, results[b].edge_power);
  }
  for (std::size_t i = 0; i < snapshot_at.size(); ++i) {
    Wavefield snap;
    snap.period = psi0.period;
    snap.tilt = psi0.tilt;
    for (int b = 0; b < N; ++b)
      for (const auto& [m, c] : results[b].snapshot_modes[i]) snap.modes[m] = c;
    trace.snapshots[i] = snap.pruned(1e-16);
  }

  if (edge_power > 1e-16 * max_norm)
    throw TruncationTooSmall(
        "propagate: amplitude reached the block truncation edge; rerun with a "
        "larger block_truncation");
  if (std::abs(trace.norm[0] - psi0.power()) > 1e-12)
    throw BlockMismatch("propagate: block decomposition does not reproduce the "
                        "initial power");
  return trace;
}

Wavefield split_step_oracle(const Wavefield& field, const ComplexPotential& pot,
                            double z, double dz, int grid_points,
                            double conv_tol) {
  if (!(z >= 0.0)) throw std::invalid_argument("split_step_oracle: z must be >= 0");
  if (!(dz > 0.0)) throw std::invalid_argument("split_step_oracle: dz must be positive");
  if (z == 0.0) return field;
  const Grid grid = Grid::make(field.period, grid_points);
  if (grid.points / 2 <= field.max_abs_mode())
    throw UnderResolved("split_step_oracle: grid cannot represent the field");

  const int steps = std::max<int>(1, static_cast<int>(std::ceil(z / dz)));

  SplitStepper coarse(field, pot, grid);
  coarse.advance(z, steps);
  SplitStepper fine(field, pot, grid);
  fine.advance(z, 2 * steps);

  double diff = 0.0, ref = 0.0;
  for (int j = 0; j < grid.points; ++j) {
    diff += std::norm(coarse.samples()[j] - fine.samples()[j]);
    ref += std::norm(fine.samples()[j]);
  }
  diff = std::sqrt(diff / grid.points);
  ref = std::sqrt(ref / grid.points);
  if (diff > conv_tol * std::max(1.0, ref))
    throw StepNotConverged("split_step_oracle: halving dz still moves the "
                           "result by " + std::to_string(diff));

  Wavefield out = to_modes(fine.samples(), grid, Rational(0, 1)).pruned(1e-15);
  out.tilt = field.tilt;
  return out;
}

double secular_growth_test(const ComplexPotential& pot, const JordanChain& chain,
                           double z_max) {
  if (!(z_max > 0.0))
    throw std::invalid_argument("secular_growth_test: z_max must be positive");
  const int n_t = std::max({2 * pot.n_max(), 32, chain.u.max_abs_mode() + 8,
                            chain.v.max_abs_mode() + 8});
  const BlochBlock block = bloch_matrix(pot, chain.q, n_t);
  const int dim = 2 * n_t + 1;
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(dim);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  for (const auto& [n, c] : chain.u.modes) u(n + n_t) = c;
  for (const auto& [n, c] : chain.v.modes) v(n + n_t) = c;

  constexpr int kSamples = 10;
  const double dz = z_max / kSamples;
  const Eigen::MatrixXcd step = (cplx(0.0, -dz) * block.matrix).exp();

  Eigen::VectorXcd f = v;
  std::vector<double> zs, norms;
  double worst = 0.0;
  for (int i = 1; i <= kSamples; ++i) {
    f = step * f;
    const double zi = dz * i;
    const Eigen::VectorXcd g =
        std::polar(1.0, -chain.energy * zi) * (v - cplx(0.0, zi) * u);
    worst = std::max(worst, (f - g).norm() / std::max(1.0, g.norm()));
    zs.push_back(zi);
    norms.push_back(f.norm());
  }
  if (worst > 1e-6)
    throw NotSecular("secular_growth_test: evolution deviates from the "
                     "Jordan-pair closed form by " + std::to_string(worst));

  // linear fit of ||psi|| over the upper half of the samples, where the
  // secular term dominates the bounded v contribution
  const int lo = kSamples / 2;
  double zbar = 0.0, nbar = 0.0;
  for (int i = lo; i < kSamples; ++i) {
    zbar += zs[i];
    nbar += norms[i];
  }
  const int cnt = kSamples - lo;
  zbar /= cnt;
  nbar /= cnt;
  double num = 0.0, den = 0.0;
  for (int i = lo; i < kSamples; ++i) {
    num += (zs[i] - zbar) * (norms[i] - nbar);
    den += (zs[i] - zbar) * (zs[i] - zbar);
  }
  return num / den;
}

std::optional<double> recurrence_search(const PropagationTrace& trace,
                                        double epsilon) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("recurrence_search: epsilon must be positive");
  for (double n : trace.norm)
    if (std::abs(n - 1.0) > 1e-6)
      throw NormNotConserved("recurrence_search: trace norm drifts beyond 1e-6; "
                             "the input was not Hermitian");
  std::size_t k = 1;
  while (k < trace.z.size() && trace.deviation[k] < epsilon) ++k;  // departure
  for (; k < trace.z.size(); ++k)
    if (trace.deviation[k] < epsilon) return trace.z[k];
  return std::nullopt;
}

}  // namespace talbot
