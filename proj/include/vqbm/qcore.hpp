#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <utility>
#include <vector>

// Dense complex linear algebra, Pauli algebra and exact classical oracles
// (Gibbs states, imaginary-time evolution, fidelity, partial traces).
// Everything here is exact up to floating point and serves as ground truth
// for the variational modules.
//
// Qubit ordering convention: qubit 0 is the leftmost letter of a Pauli word
// and the most significant bit of a computational-basis index.

namespace vqbm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Normalized pure state on n qubits, 2^n amplitudes.
struct StateVector {
  int n_qubits = 0;
  ComplexVector amplitudes;

  static StateVector zero_state(int n_qubits);
  /// Squared-norm deviation from 1.
  double norm_error() const;
};

/// Density operator on n qubits. Valid instances are Hermitian, unit trace
/// and positive semidefinite (up to small numerical slack).
struct DensityMatrix {
  int n_qubits = 0;
  ComplexMatrix matrix;

  static DensityMatrix maximally_mixed(int n_qubits);
  static DensityMatrix pure(const StateVector& psi);
};

/// Word over {I, X, Y, Z}; one letter per qubit, leftmost is qubit 0.
struct PauliString {
  std::string word;

  int n_qubits() const { return static_cast<int>(word.size()); }
};

/// Weighted sum of Pauli words, H = sum_i coeff_i * word_i.
struct PauliSum {
  int n_qubits = 0;
  std::vector<std::pair<double, PauliString>> terms;

  static PauliSum zero(int n_qubits) { return PauliSum{n_qubits, {}}; }
  void add_term(double coeff, const std::string& word);
  /// Coefficient vector in term order.
  RealVector coefficients() const;
  ComplexMatrix to_matrix() const;
};

/// Hamiltonian plus temperature, fixing the Gibbs state e^{-H/kbt}/Z.
struct GibbsSpec {
  PauliSum hamiltonian;
  double kbt = 1.0;
};

/// Kronecker expansion of a Pauli word into its 2^n x 2^n matrix.
ComplexMatrix pauli_to_matrix(const PauliString& p);

/// Applies a Pauli word to a statevector in place. O(2^n).
void apply_pauli_word(const std::string& word, ComplexVector& psi);

/// H|psi> for a weighted Pauli sum.
ComplexVector apply_pauli_sum(const PauliSum& h, const ComplexVector& psi);

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending.
/// Rejects matrices that are not Hermitian within 1e-10.
std::pair<RealVector, ComplexMatrix> hermitian_eig(const ComplexMatrix& m);

/// Exact Gibbs state e^{-H/kbt} / Tr[e^{-H/kbt}] via eigendecomposition.
DensityMatrix exact_gibbs(const GibbsSpec& spec);

/// Normalized imaginary-time evolution e^{-H tau}|psi0>, renormalized.
StateVector exact_ite(const StateVector& psi0, const PauliSum& h, double tau);

/// Reduced density matrix over the kept qubits (ascending index order in
/// the output register). Rejects empty or out-of-range keep sets.
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& keep);

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2, in [0, 1].
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace vqbm
