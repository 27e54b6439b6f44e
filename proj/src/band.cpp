#include "talbot/band.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <thread>

namespace talbot {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRankTol = 1e-8;       // sigma below this times sigma_max is zero
constexpr double kDegenWindow = 1e-6;   // eigenvalue distance counting as the pair

int default_n_trunc(const ComplexPotential& pot, int alpha_max) {
  return std::max({2 * pot.n_max(), 2 * (alpha_max + 2), 16});
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
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

// Smallest principal angle between the two eigenvectors of the degenerate
// pair, computed from the pair's invariant subspace so the answer does not
// inherit the O(sqrt(eps * |H|)) splitting noise of a dense eigensolver.
// Basis: the kernel vector(s) of A = H - E, plus the minimum-norm solution
// of A w = u for a one-dimensional kernel (the start of the Jordan chain).
double pair_coalescence_angle(const Eigen::MatrixXcd& h,
                              const Eigen::JacobiSVD<Eigen::MatrixXcd>& svd,
                              int kernel_dim) {
  const Eigen::Index dim = h.rows();
  if (kernel_dim >= 2) {
    // a two-dimensional kernel is a genuine eigenspace; the SVD basis is an
    // orthonormal eigenvector pair
    return kPi / 2.0;
  }
  // Defective pair: restrict H to the invariant subspace spanned by the
  // kernel vector and the start of its Jordan chain, then take the angle
  // between the 2x2 restriction's eigenvectors in closed form.
  Eigen::MatrixXcd basis(dim, 2);
  {
    const Eigen::VectorXcd u = svd.matrixV().col(dim - 1);
    // pseudo-inverse solve of (H - E) w = u restricted to sigma above the
    // rank threshold; the result is automatically orthogonal to the kernel
    const auto& sv = svd.singularValues();
    Eigen::VectorXcd y = svd.matrixU().adjoint() * u;
    for (Eigen::Index i = 0; i < dim; ++i)
      y(i) = (sv(i) > kRankTol * sv(0)) ? y(i) / sv(i) : cplx(0.0);
    Eigen::VectorXcd w = svd.matrixV() * y;
    basis.col(0) = u;
    basis.col(1) = w.normalized();
  }

  // orthonormalize and restrict H to the subspace
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(basis);
  Eigen::MatrixXcd qfull = qr.householderQ();
  Eigen::MatrixXcd qthin = qfull.leftCols(2);
  Eigen::Matrix2cd a2 = qthin.adjoint() * h * qthin;

  // closed-form eigenvectors of the 2x2 restriction
  const cplx tr = a2(0, 0) + a2(1, 1);
  const cplx disc = std::sqrt((a2(0, 0) - a2(1, 1)) * (a2(0, 0) - a2(1, 1)) +
                              4.0 * a2(0, 1) * a2(1, 0));
  const cplx l1 = 0.5 * (tr + disc);
  const cplx l2 = 0.5 * (tr - disc);
  auto eigvec = [&](const cplx& lam) {
    Eigen::Vector2cd v1(a2(0, 1), lam - a2(0, 0));
    Eigen::Vector2cd v2(lam - a2(1, 1), a2(1, 0));
    Eigen::Vector2cd v = (v1.norm() >= v2.norm()) ? v1 : v2;
    const double n = v.norm();
    return (n > 0.0) ? Eigen::Vector2cd(v / n) : Eigen::Vector2cd(1.0, 0.0);
  };
  const Eigen::Vector2cd e1 = eigvec(l1);
  const Eigen::Vector2cd e2 = eigvec(l2);
  const double c = std::min(1.0, std::abs(e1.dot(e2)));
  return std::acos(c);
}

}  // namespace

BlochBlock bloch_matrix(const ComplexPotential& pot, double q, int n_trunc) {
  const double edge = kPi / pot.period;
  if (std::abs(q) > edge * (1.0 + 1e-12))
    throw std::invalid_argument("bloch_matrix: q outside the first Brillouin zone");
  if (n_trunc < 2 * pot.n_max())
    throw TruncationTooSmall("bloch_matrix: n_trunc must be at least twice the "
                             "potential's coefficient support");

  const int dim = 2 * n_trunc + 1;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  const double g = 2.0 * kPi / pot.period;
  for (int i = 0; i < dim; ++i) {
    const int n = i - n_trunc;
    const double k = q + g * n;
    h(i, i) = k * k;
    for (const auto& [m, c] : pot.coeffs) {
      const int j = i - m;  // column with V_{n-l} = V_m
      if (j >= 0 && j < dim) h(i, j) += c;
    }
  }
  return BlochBlock{q, n_trunc, pot.period, std::move(h)};
}

int folding_index(int alpha) {
  if (alpha == 0) return 0;
  return (alpha % 2 == 1) ? (alpha + 1) / 2 : -alpha / 2;
}

double folded_energy(double a, double q, int alpha) {
  const double b = 2.0 * kPi * folding_index(alpha) / a - std::abs(q);
  return b * b;
}

BandDiagram band_diagram(const ComplexPotential& pot, int q_count, int alpha_max,
                         const BandOptions& opts) {
  if (q_count < 1 || alpha_max < 0)
    throw std::invalid_argument("band_diagram: bad q_count or alpha_max");
  const int n_trunc = opts.n_trunc > 0 ? opts.n_trunc : default_n_trunc(pot, alpha_max);

  BandDiagram out;
  out.period = pot.period;
  out.q.resize(q_count);
  out.energies.assign(q_count, {});
  out.beta.resize(alpha_max + 1);
  for (int a = 0; a <= alpha_max; ++a) out.beta[a] = folding_index(a);

  const double edge = kPi / pot.period;
  for (int j = 0; j < q_count; ++j) out.q[j] = -edge + 2.0 * edge * j / q_count;

  std::vector<double> devs(q_count, 0.0);
  std::vector<std::string> complex_failure(q_count);

  // Structure-aware spectra: a one-sided potential gives an exactly
  // triangular block whose eigenvalues are the diagonal (a dense eigensolver
  // would split defective pairs by O(sqrt(eps))); a Hermitian potential gets
  // the self-adjoint solver; anything else goes through the general solver.
  const bool triangular = pot.one_sided();
  const bool hermitian = is_hermitian(pot);

  parallel_for(q_count, opts.threads, [&](int j) {
    const BlochBlock block = bloch_matrix(pot, out.q[j], n_trunc);
    std::vector<cplx> ev;
    if (triangular) {
      const Eigen::VectorXcd diag = block.matrix.diagonal();
      ev.assign(diag.data(), diag.data() + diag.size());
    } else if (hermitian) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block.matrix,
                                                         Eigen::EigenvaluesOnly);
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        ev.push_back(cplx(es.eigenvalues()(i), 0.0));
    } else {
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(block.matrix, false);
      ev.assign(es.eigenvalues().data(),
                es.eigenvalues().data() + es.eigenvalues().size());
    }
    std::sort(ev.begin(), ev.end(), [](const cplx& a, const cplx& b) {
      if (a.real() != b.real()) return a.real() < b.real();
      return a.imag() < b.imag();
    });
    ev.resize(alpha_max + 1);

    double dev = 0.0;
    for (int a = 0; a <= alpha_max; ++a) {
      if (std::abs(ev[a].imag()) > 1e-8)
        complex_failure[j] = "band_diagram: complex eigenvalue at q index " +
                             std::to_string(j);
      dev = std::max(dev, std::abs(ev[a].real() -
                                   folded_energy(pot.period, out.q[j], a)));
    }
    devs[j] = dev;
    out.energies[j] = std::move(ev);
  });

  for (const auto& msg : complex_failure)
    if (!msg.empty()) throw ComplexSpectrum(msg);
  out.parabola_max_dev = *std::max_element(devs.begin(), devs.end());
  return out;
}

std::vector<int> SingularityReport::defective_labels() const {
  std::vector<int> out;
  for (const auto& e : entries)
    if (e.defective) out.push_back(e.n);
  return out;
}

SingularityReport detect_singularities(const ComplexPotential& pot,
                                       int n_energy_max,
                                       const BandOptions& opts) {
  SingularityReport report;
  report.period = pot.period;
  const double a = pot.period;
  const int n_trunc = opts.n_trunc > 0
                          ? opts.n_trunc
                          : std::max({2 * pot.n_max(), 2 * n_energy_max + 8, 16});

  for (int n = 1; n <= n_energy_max; ++n) {
    SingularityRecord rec;
    rec.n = n;
    rec.energy = (n * kPi / a) * (n * kPi / a);
    rec.q_loc = (n % 2 == 0) ? 0.0 : -kPi / a;

    const BlochBlock block = bloch_matrix(pot, rec.q_loc, n_trunc);
    Eigen::MatrixXcd shifted = block.matrix;
    shifted.diagonal().array() -= rec.energy;

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
        shifted, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    int kdim = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) < kRankTol * smax) ++kdim;

    rec.kernel_dim = kdim;
    rec.defective = (kdim == 1);
    rec.coalescence_angle =
        (kdim >= 1) ? pair_coalescence_angle(block.matrix, svd, kdim)
                    : kPi / 2.0;
    report.entries.push_back(rec);
  }
  return report;
}

SelfImagingCheck self_imaging_allowed(const SingularityReport& report, int N) {
  if (N < 1) throw std::invalid_argument("self_imaging_allowed: N must be positive");
  const bool odd = (N % 2 == 1);
  for (const auto& e : report.entries) {
    if (!e.defective) continue;
    if (odd && e.q_loc != 0.0) continue;  // zone-edge singularities are unreachable
    SelfImagingCheck blocked;
    blocked.allowed = false;
    blocked.blocking = e;
    blocked.reason = "defective degeneracy at E_" + std::to_string(e.n) +
                     (e.q_loc == 0.0 ? " (zone center)" : " (zone edge)") +
                     " is excited for N = " + std::to_string(N);
    return blocked;
  }
  SelfImagingCheck ok;
  ok.allowed = true;
  ok.reason = odd ? "no defective degeneracy at the zone center"
                  : "no defective degeneracy anywhere in the report";
  return ok;
}

}  // namespace talbot
