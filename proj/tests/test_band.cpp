// Bloch matrices, band diagrams, and the defective/diabolic classification
// of the folded-parabola degeneracies.

#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "talbot/band.hpp"

using namespace talbot;
constexpr double kPi = std::numbers::pi;
const double kA = 2.0 * kPi;

TEST_CASE("bloch matrix of the free particle is the bare diagonal") {
  const BlochBlock b = bloch_matrix(free_potential(kA), 0.1, 1);
  REQUIRE(b.matrix.rows() == 3);
  CHECK(b.matrix(0, 0).real() == doctest::Approx(0.81).epsilon(1e-12));
  CHECK(b.matrix(1, 1).real() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(b.matrix(2, 2).real() == doctest::Approx(1.21).epsilon(1e-12));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(std::abs(b.matrix(i, j)) == 0.0);
}

TEST_CASE("bloch matrix of the single-harmonic potential fills one subdiagonal") {
  const BlochBlock b = bloch_matrix(exp_potential(kA, 1.0), 0.0, 4);
  const int dim = 9;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      if (i == j) continue;
      if (i == j + 1)
        CHECK(std::abs(b.matrix(i, j) - cplx(1.0)) < 1e-15);
      else
        CHECK(std::abs(b.matrix(i, j)) == 0.0);
    }
}

TEST_CASE("one-sided crystal gives a strictly lower-triangular fill") {
  const ComplexPotential pot = one_singularity_potential(kA, 1.0);
  const BlochBlock b = bloch_matrix(pot, -0.3, 2 * pot.n_max());
  const int dim = static_cast<int>(b.matrix.rows());
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) CHECK(std::abs(b.matrix(i, j)) < 1e-10);
  // first subdiagonal carries V_1 = 2 e^-2
  CHECK(b.matrix(5, 4).real() == doctest::Approx(0.270671).epsilon(1e-5));
}

TEST_CASE("bloch matrix preconditions") {
  const ComplexPotential pot = one_singularity_potential(kA, 1.0);
  CHECK_THROWS_AS(bloch_matrix(pot, 0.0, pot.n_max()), TruncationTooSmall);
  CHECK_THROWS_AS(bloch_matrix(pot, 2.0 / kA * kPi, 2 * pot.n_max()),
                  std::invalid_argument);
}

TEST_CASE("triangularity: eigenvalues equal the diagonal for one-sided "
          "potentials, independent of truncation") {
  // generic q, away from the zone degeneracies where a dense eigensolver
  // splits the pairs by O(sqrt(eps))
  for (const ComplexPotential& pot :
       {one_singularity_potential(kA, 1.0, 24), exp_potential(kA, 1.0)}) {
    REQUIRE(pot.one_sided());
    for (int n_trunc : {2 * pot.n_max() + 4, 4 * pot.n_max() + 16}) {
      for (double q : {-0.37, -0.17, 0.11, 0.31}) {
        const BlochBlock b = bloch_matrix(pot, q, n_trunc);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(b.matrix, false);
        std::vector<double> ev, diag;
        for (Eigen::Index i = 0; i < b.matrix.rows(); ++i) {
          ev.push_back(es.eigenvalues()(i).real());
          diag.push_back(b.matrix(i, i).real());
          CHECK(std::abs(es.eigenvalues()(i).imag()) < 1e-8);
        }
        std::sort(ev.begin(), ev.end());
        std::sort(diag.begin(), diag.end());
        for (std::size_t i = 0; i < ev.size(); ++i)
          CHECK(ev[i] == doctest::Approx(diag[i]).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("band diagram of free space is exactly the folded parabola") {
  const BandDiagram bands = band_diagram(free_potential(kA), 32, 6);
  CHECK(bands.parabola_max_dev < 1e-12);
  CHECK(bands.beta == std::vector<int>{0, 1, -1, 2, -2, 3, -3});
}

TEST_CASE("gapless crystals reproduce the folded parabola to 1e-8") {
  for (const ComplexPotential& pot : {one_singularity_potential(kA, 1.0),
                                      two_singularity_potential(kA, 1.0)}) {
    const BandDiagram bands = band_diagram(pot, 64, 6);
    CHECK(bands.parabola_max_dev < 1e-8);
  }
}

TEST_CASE("hermitian sine crystal keeps a real spectrum but opens gaps") {
  const ComplexPotential pot = mathieu_potential(kA, 2.0);
  BandDiagram bands;
  CHECK_NOTHROW(bands = band_diagram(pot, 64, 6));
  CHECK(bands.parabola_max_dev > 0.1);  // first gap is order V0 at the edge

  // the worst deviation from the parabola sits at the zone edge, where the
  // lowest pair repels
  double worst = 0.0;
  double q_at = 0.0;
  for (std::size_t j = 0; j < bands.q.size(); ++j)
    for (std::size_t a = 0; a < bands.energies[j].size(); ++a) {
      const double dev = std::abs(bands.energies[j][a].real() -
                                  folded_energy(kA, bands.q[j], a));
      if (dev > worst) {
        worst = dev;
        q_at = bands.q[j];
      }
    }
  CHECK(std::abs(q_at) > 0.75 * (kPi / kA));
}

TEST_CASE("band symmetry E(q) = E(-q) for PT potentials") {
  const ComplexPotential pot = one_singularity_potential(kA, 1.0);
  const int q_count = 64;  // grid contains q and -q pairs
  const BandDiagram bands = band_diagram(pot, q_count, 5);
  for (int j = 1; j < q_count / 2; ++j) {
    const int j_neg = q_count - j;
    REQUIRE(bands.q[j_neg] == doctest::Approx(-bands.q[j]).epsilon(1e-12));
    for (std::size_t a = 0; a < bands.energies[j].size(); ++a)
      CHECK(bands.energies[j][a].real() ==
            doctest::Approx(bands.energies[j_neg][a].real()).epsilon(1e-8));
  }
}

TEST_CASE("broken-symmetry potential raises ComplexSpectrum") {
  // equal imaginary couplings on both sides give k^2 +/- i gamma pairs
  const ComplexPotential pot =
      custom_potential(kA, {{1, cplx(0.0, 0.5)}, {-1, cplx(0.0, 0.5)}});
  CHECK_THROWS_AS(band_diagram(pot, 16, 3), ComplexSpectrum);
}

TEST_CASE("mathieu first gap approaches |V0| (two-mode degenerate coupling)") {
  const double v0 = 0.2;
  const ComplexPotential pot = mathieu_potential(kA, v0);
  const BlochBlock b = bloch_matrix(pot, -kPi / kA, 16);

  // the matrix is Hermitian here; use the self-adjoint solver as the oracle
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b.matrix);
  const double gap = es.eigenvalues()(1) - es.eigenvalues()(0);
  CHECK(std::abs(gap - v0) < 0.1 * v0);

  // two-mode oracle: gap = 2 |V_{-1}| with V_{-1} = V0 / (2 i)
  CHECK(std::abs(pot.coeff(-1)) == doctest::Approx(v0 / 2).epsilon(1e-12));
}

TEST_CASE("degeneracy census: one defective energy for the single-step crystal") {
  const SingularityReport report =
      detect_singularities(one_singularity_potential(kA, 1.0), 6);
  REQUIRE(report.entries.size() == 6);
  CHECK(report.defective_labels() == std::vector<int>{1});
  for (const auto& e : report.entries) {
    CHECK(e.energy == doctest::Approx((e.n * kPi / kA) * (e.n * kPi / kA)));
    if (e.n % 2 == 0)
      CHECK(e.q_loc == 0.0);
    else
      CHECK(e.q_loc == doctest::Approx(-0.5));
    if (e.n == 1) {
      CHECK(e.kernel_dim == 1);
      CHECK(e.coalescence_angle < 1e-6);
    } else {
      CHECK(e.kernel_dim == 2);
      CHECK(e.coalescence_angle > 0.1);
    }
  }
}

TEST_CASE("degeneracy census: two defective energies for the cascaded crystal") {
  const SingularityReport report =
      detect_singularities(two_singularity_potential(kA, 1.0), 6);
  CHECK(report.defective_labels() == std::vector<int>{1, 3});
}

TEST_CASE("degeneracy census: every energy defective for the single harmonic") {
  const SingularityReport report = detect_singularities(exp_potential(kA, 1.0), 6);
  CHECK(report.defective_labels() == std::vector<int>{1, 2, 3, 4, 5, 6});
  for (const auto& e : report.entries) CHECK(e.coalescence_angle < 1e-6);
}

TEST_CASE("degeneracy census: free space is all diabolic") {
  const SingularityReport report = detect_singularities(free_potential(kA), 4);
  CHECK(report.defective_labels().empty());
  for (const auto& e : report.entries) CHECK(e.kernel_dim == 2);
}

TEST_CASE("classification is stable under doubling the truncation") {
  const ComplexPotential pot = one_singularity_potential(kA, 1.0, 24);
  const SingularityReport base =
      detect_singularities(pot, 3, BandOptions{2 * pot.n_max(), 1});
  const SingularityReport fine =
      detect_singularities(pot, 3, BandOptions{4 * pot.n_max(), 1});
  REQUIRE(base.entries.size() == fine.entries.size());
  for (std::size_t i = 0; i < base.entries.size(); ++i) {
    CHECK(base.entries[i].defective == fine.entries[i].defective);
    CHECK(base.entries[i].kernel_dim == fine.entries[i].kernel_dim);
  }
}

TEST_CASE("self-imaging admissibility by parity of N") {
  const SingularityReport one =
      detect_singularities(one_singularity_potential(kA, 1.0), 6);

  const SelfImagingCheck odd = self_imaging_allowed(one, 3);
  CHECK(odd.allowed);

  const SelfImagingCheck even = self_imaging_allowed(one, 2);
  CHECK_FALSE(even.allowed);
  REQUIRE(even.blocking.has_value());
  CHECK(even.blocking->n == 1);
  CHECK(even.blocking->q_loc == doctest::Approx(-0.5));

  const SingularityReport none = detect_singularities(free_potential(kA), 6);
  CHECK(self_imaging_allowed(none, 2).allowed);
  CHECK(self_imaging_allowed(none, 3).allowed);

  // a zone-center singularity blocks every N
  const SingularityReport all = detect_singularities(exp_potential(kA, 1.0), 6);
  CHECK_FALSE(self_imaging_allowed(all, 3).allowed);
  CHECK(self_imaging_allowed(all, 3).blocking->n == 2);
  CHECK_FALSE(self_imaging_allowed(all, 2).allowed);
  CHECK(self_imaging_allowed(all, 2).blocking->n == 1);
}

TEST_CASE("band diagram is deterministic across thread counts") {
  const ComplexPotential pot = one_singularity_potential(kA, 1.0, 24);
  const BandDiagram serial = band_diagram(pot, 32, 5, BandOptions{0, 1});
  const BandDiagram parallel = band_diagram(pot, 32, 5, BandOptions{0, 4});
  for (int j = 0; j < 32; ++j)
    for (std::size_t a = 0; a < serial.energies[j].size(); ++a)
      CHECK(serial.energies[j][a] == parallel.energies[j][a]);
}
