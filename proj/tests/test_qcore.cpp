#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "vqbm/qcore.hpp"

using namespace vqbm;

namespace {

StateVector random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  StateVector psi;
  psi.n_qubits = n;
  psi.amplitudes = ComplexVector(std::int64_t{1} << n);
  for (Eigen::Index i = 0; i < psi.amplitudes.size(); ++i)
    psi.amplitudes(i) = Complex{g(rng), g(rng)};
  psi.amplitudes.normalize();
  return psi;
}

}  // namespace

TEST_CASE("pauli_to_matrix single-qubit letters") {
  const ComplexMatrix z = pauli_to_matrix({"Z"});
  CHECK(z(0, 0) == Complex{1.0, 0.0});
  CHECK(z(1, 1) == Complex{-1.0, 0.0});
  CHECK(z(0, 1) == Complex{0.0, 0.0});

  const ComplexMatrix x = pauli_to_matrix({"X"});
  CHECK(x(0, 1) == Complex{1.0, 0.0});
  CHECK(x(1, 0) == Complex{1.0, 0.0});

  const ComplexMatrix y = pauli_to_matrix({"Y"});
  CHECK(y(0, 1) == Complex{0.0, -1.0});
  CHECK(y(1, 0) == Complex{0.0, 1.0});
}

TEST_CASE("pauli_to_matrix words") {
  const ComplexMatrix id = pauli_to_matrix({"II"});
  CHECK((id - ComplexMatrix::Identity(4, 4)).norm() == 0.0);

  const ComplexMatrix zz = pauli_to_matrix({"ZZ"});
  CHECK(zz(0, 0).real() == 1.0);
  CHECK(zz(1, 1).real() == -1.0);
  CHECK(zz(2, 2).real() == -1.0);
  CHECK(zz(3, 3).real() == 1.0);

  // Qubit 0 is the leftmost letter / most significant bit.
  const ComplexMatrix zi = pauli_to_matrix({"ZI"});
  CHECK(zi(0, 0).real() == 1.0);
  CHECK(zi(1, 1).real() == 1.0);
  CHECK(zi(2, 2).real() == -1.0);
  CHECK(zi(3, 3).real() == -1.0);
}

TEST_CASE("apply_pauli_word matches dense matrix action") {
  std::mt19937_64 rng(7);
  const std::vector<std::string> words = {"X", "Y", "ZX", "YZ", "XYZ", "IZY"};
  for (const auto& w : words) {
    const int n = static_cast<int>(w.size());
    const StateVector psi = random_state(n, rng);
    ComplexVector fast = psi.amplitudes;
    apply_pauli_word(w, fast);
    const ComplexVector dense = pauli_to_matrix({w}) * psi.amplitudes;
    CHECK((fast - dense).norm() < 1e-12);
  }
}

TEST_CASE("apply_pauli_sum is linear in the terms") {
  std::mt19937_64 rng(9);
  const StateVector psi = random_state(2, rng);
  PauliSum h = PauliSum::zero(2);
  h.add_term(0.7, "ZZ");
  h.add_term(-1.3, "XI");
  const ComplexVector got = apply_pauli_sum(h, psi.amplitudes);
  const ComplexVector want =
      0.7 * (pauli_to_matrix({"ZZ"}) * psi.amplitudes) -
      1.3 * (pauli_to_matrix({"XI"}) * psi.amplitudes);
  CHECK((got - want).norm() < 1e-12);
}

TEST_CASE("hermitian_eig known spectra and reconstruction") {
  const auto [dz, vz] = hermitian_eig(pauli_to_matrix({"Z"}));
  CHECK(dz(0) == doctest::Approx(-1.0));
  CHECK(dz(1) == doctest::Approx(1.0));

  const auto [dx, vx] = hermitian_eig(pauli_to_matrix({"X"}));
  CHECK(dx(0) == doctest::Approx(-1.0));
  CHECK(dx(1) == doctest::Approx(1.0));
  CHECK(std::abs(std::abs(vx(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-12);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) m(i, j) = Complex{g(rng), g(rng)};
  m = ((m + m.adjoint()) / 2.0).eval();
  const auto [d, v] = hermitian_eig(m);
  const ComplexMatrix rebuilt =
      v * d.cast<Complex>().asDiagonal() * v.adjoint();
  CHECK((m - rebuilt).norm() < 1e-8 * m.norm());

  ComplexMatrix bad = m;
  bad(0, 1) += Complex{0.0, 1.0};
  CHECK_THROWS(hermitian_eig(bad));
}

TEST_CASE("exact_gibbs single-qubit Z") {
  PauliSum h = PauliSum::zero(1);
  h.add_term(1.0, "Z");
  const DensityMatrix rho = exact_gibbs({h, 1.0});
  const double z = std::exp(-1.0) + std::exp(1.0);
  CHECK(rho.matrix(0, 0).real() == doctest::Approx(std::exp(-1.0) / z));
  CHECK(rho.matrix(1, 1).real() == doctest::Approx(std::exp(1.0) / z));
  // Reference two-decimal values for this state.
  CHECK(std::abs(rho.matrix(0, 0).real() - 0.12) < 0.005);
  CHECK(std::abs(rho.matrix(1, 1).real() - 0.88) < 0.005);
}

TEST_CASE("exact_gibbs zero Hamiltonian is maximally mixed") {
  const DensityMatrix rho = exact_gibbs({PauliSum::zero(2), 1.0});
  CHECK((rho.matrix - ComplexMatrix::Identity(4, 4) / 4.0).norm() < 1e-12);
}

TEST_CASE("exact_gibbs two-qubit reference matrix") {
  PauliSum h = PauliSum::zero(2);
  h.add_term(1.0, "ZZ");
  h.add_term(-0.2, "ZI");
  h.add_term(-0.2, "IZ");
  h.add_term(0.3, "XI");
  h.add_term(0.3, "IX");
  const DensityMatrix rho = exact_gibbs({h, 1.0});
  const double want[4][4] = {{0.10, -0.06, -0.06, 0.01},
                             {-0.06, 0.43, 0.02, -0.05},
                             {-0.06, 0.02, 0.43, -0.05},
                             {0.01, -0.05, -0.05, 0.05}};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(rho.matrix(i, j).real() - want[i][j]) < 0.005);
      CHECK(std::abs(rho.matrix(i, j).imag()) < 1e-12);
    }
  }
}

TEST_CASE("exact_gibbs eigenvalues are the Boltzmann weights") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PauliSum h = PauliSum::zero(2);
  h.add_term(u(rng), "ZZ");
  h.add_term(u(rng), "XI");
  h.add_term(u(rng), "IY");
  const double kbt = 0.7;
  const auto [energies, vecs] = hermitian_eig(h.to_matrix());
  const DensityMatrix rho = exact_gibbs({h, kbt});
  const auto [probs, pv] = hermitian_eig(rho.matrix);

  RealVector weights(energies.size());
  for (int i = 0; i < energies.size(); ++i)
    weights(i) = std::exp(-energies(i) / kbt);
  weights /= weights.sum();
  std::sort(weights.data(), weights.data() + weights.size());
  CHECK((weights - probs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("exact_ite boundary and limits") {
  PauliSum h = PauliSum::zero(1);
  h.add_term(1.0, "Z");
  StateVector plus;
  plus.n_qubits = 1;
  plus.amplitudes = ComplexVector(2);
  plus.amplitudes << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);

  const StateVector same = exact_ite(plus, h, 0.0);
  CHECK((same.amplitudes - plus.amplitudes).norm() < 1e-14);

  const StateVector cooled = exact_ite(plus, h, 10.0);
  CHECK(std::abs(cooled.amplitudes(0)) < 1e-6);
  CHECK(std::abs(std::abs(cooled.amplitudes(1)) - 1.0) < 1e-6);

  CHECK_THROWS(exact_ite(plus, h, -0.1));
}

TEST_CASE("purified imaginary-time evolution reproduces the Gibbs state") {
  // Bell pair on (system qubit 0, ancilla qubit 1), H acting on the system.
  PauliSum h = PauliSum::zero(1);
  h.add_term(1.0, "Z");
  PauliSum h_eff = PauliSum::zero(2);
  h_eff.add_term(1.0, "ZI");

  StateVector bell;
  bell.n_qubits = 2;
  bell.amplitudes = ComplexVector::Zero(4);
  bell.amplitudes(0) = 1.0 / std::sqrt(2.0);
  bell.amplitudes(3) = 1.0 / std::sqrt(2.0);

  const StateVector evolved = exact_ite(bell, h_eff, 0.5);
  const DensityMatrix reduced =
      partial_trace(DensityMatrix::pure(evolved), {0});
  const DensityMatrix target = exact_gibbs({h, 1.0});
  CHECK((reduced.matrix - target.matrix).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("partial_trace basics") {
  // Bell pairs trace to the maximally mixed state exactly.
  StateVector bell;
  bell.n_qubits = 2;
  bell.amplitudes = ComplexVector::Zero(4);
  bell.amplitudes(0) = 1.0 / std::sqrt(2.0);
  bell.amplitudes(3) = 1.0 / std::sqrt(2.0);
  const DensityMatrix half = partial_trace(DensityMatrix::pure(bell), {0});
  CHECK((half.matrix - ComplexMatrix::Identity(2, 2) / 2.0).norm() < 1e-14);

  // Product state |0>|1>, keep qubit 0.
  StateVector prod;
  prod.n_qubits = 2;
  prod.amplitudes = ComplexVector::Zero(4);
  prod.amplitudes(1) = 1.0;  // |01>
  const DensityMatrix kept = partial_trace(DensityMatrix::pure(prod), {0});
  CHECK(std::abs(kept.matrix(0, 0).real() - 1.0) < 1e-14);
  CHECK(std::abs(kept.matrix(1, 1).real()) < 1e-14);

  CHECK_THROWS(partial_trace(DensityMatrix::pure(prod), {}));
  CHECK_THROWS(partial_trace(DensityMatrix::pure(prod), {5}));
}

TEST_CASE("partial_trace matches brute-force contraction") {
  std::mt19937_64 rng(17);
  const StateVector psi = random_state(3, rng);
  const DensityMatrix rho = DensityMatrix::pure(psi);
  const DensityMatrix red = partial_trace(rho, {0, 1});

  // Brute force: qubit 2 is the least significant bit.
  ComplexMatrix want = ComplexMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 2; ++k)
        want(i, j) += rho.matrix(2 * i + k, 2 * j + k);
  CHECK((red.matrix - want).norm() < 1e-12);
  CHECK(std::abs(red.matrix.trace().real() - 1.0) < 1e-12);
}

TEST_CASE("fidelity reference values and symmetry") {
  StateVector zero = StateVector::zero_state(1);
  StateVector one;
  one.n_qubits = 1;
  one.amplitudes = ComplexVector::Zero(2);
  one.amplitudes(1) = 1.0;

  const DensityMatrix p0 = DensityMatrix::pure(zero);
  const DensityMatrix p1 = DensityMatrix::pure(one);
  const DensityMatrix mixed = DensityMatrix::maximally_mixed(1);

  CHECK(fidelity(p0, p0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fidelity(p0, p1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fidelity(mixed, p0) == doctest::Approx(0.5).epsilon(1e-9));

  std::mt19937_64 rng(19);
  const DensityMatrix a = DensityMatrix::pure(random_state(2, rng));
  PauliSum h = PauliSum::zero(2);
  h.add_term(0.4, "ZX");
  h.add_term(-0.6, "YI");
  const DensityMatrix b = exact_gibbs({h, 1.0});
  const double fab = fidelity(a, b);
  CHECK(fab >= 0.0);
  CHECK(fab <= 1.0);
  CHECK(std::abs(fab - fidelity(b, a)) < 1e-9);
}

TEST_CASE("state and density-matrix helpers") {
  const StateVector zero = StateVector::zero_state(2);
  CHECK(zero.amplitudes(0) == Complex{1.0, 0.0});
  CHECK(zero.norm_error() < 1e-15);

  const DensityMatrix rho = DensityMatrix::pure(zero);
  CHECK(std::abs(rho.matrix.trace().real() - 1.0) < 1e-15);

  PauliSum h = PauliSum::zero(2);
  h.add_term(1.5, "XY");
  h.add_term(-0.5, "ZI");
  const RealVector coeffs = h.coefficients();
  CHECK(coeffs(0) == 1.5);
  CHECK(coeffs(1) == -0.5);
  CHECK_THROWS(h.add_term(1.0, "X"));  // word length mismatch
}
