#pragma once

#include <vector>

#include "vqbm/qcore.hpp"

// Parameterized circuits V(omega) with exact statevector application and
// first/second parameter derivatives. The gate set is restricted to Pauli
// rotations (parameterized or fixed) plus Hadamard, CX and CZ, so every
// parameter derivative is a single -i/2 * sigma insertion.

namespace vqbm {

enum class GateKind {
  PauliRotation,
  FixedRotation,
  Hadamard,
  ControlledNot,
  ControlledZ,
};

struct Gate {
  GateKind kind = GateKind::Hadamard;
  int target = 0;
  int control = -1;      // CX/CZ only
  char axis = 'Z';       // rotations only
  int param_index = -1;  // PauliRotation only
  double angle = 0.0;    // FixedRotation only

  static Gate rotation(char axis, int target, int param_index);
  static Gate fixed_rotation(char axis, int target, double angle);
  static Gate hadamard(int target);
  static Gate cnot(int control, int target);
  static Gate cz(int control, int target);
};

/// Ordered gate list V(omega) = U_q(omega_q) ... U_1(omega_1).
/// Each parameter index is carried by exactly one gate.
struct Circuit {
  int n_qubits = 0;
  int n_params = 0;
  std::vector<Gate> gates;

  Circuit() = default;
  Circuit(int n_qubits, int n_params, std::vector<Gate> gates);
};

/// |psi_omega> = V(omega)|psi_in>; exact unitary statevector simulation.
StateVector apply(const Circuit& c, const RealVector& omega,
                  const StateVector& psi_in);

/// Exact, unnormalized d|psi_omega>/d omega_k via -i/2 sigma insertion.
ComplexVector d_state(const Circuit& c, const RealVector& omega,
                      const StateVector& psi_in, int k);

/// Exact mixed second derivative d^2|psi_omega>/(d omega_k d omega_l).
ComplexVector d2_state(const Circuit& c, const RealVector& omega,
                       const StateVector& psi_in, int k, int l);

/// Copy of omega with omega_k += delta.
RealVector shift_parameter(const RealVector& omega, int k, double delta);

/// Circuit recipe for purification-based Gibbs preparation on n system
/// qubits plus n ancillas (plus an optional phase-fix qubit, appended last).
///
/// Layout: a parameterized Bell-pair prefix (R_Y at pi/2 on each system
/// qubit, CX onto its ancilla partner), then `depth` layers of R_Y/R_Z on
/// every system and ancilla qubit, a system-ancilla crossing rotation block
/// per pair, and a CX ladder mirrored on both registers. All layer
/// parameters start at 0, so the circuit at omega(0) prepares exact Bell
/// pairs and a |0> phase-fix qubit.
struct AnsatzTemplate {
  int n_system = 1;
  int depth = 1;
  bool phase_fix = true;

  int n_qubits() const { return 2 * n_system + (phase_fix ? 1 : 0); }
  int n_params() const;
  Circuit build() const;
  RealVector initial_parameters() const;
};

namespace detail {
/// Applies a 2x2 unitary to `target` of an n-qubit statevector, in place.
void apply_single_qubit(ComplexVector& psi, int n_qubits, int target,
                        const Eigen::Matrix2cd& u);
/// Single-qubit Pauli sigma_axis applied in place.
void apply_pauli_axis(ComplexVector& psi, int n_qubits, int target, char axis);
/// One gate of a circuit applied in place.
void apply_gate(ComplexVector& psi, int n_qubits, const Gate& g,
                const RealVector& omega);
}  // namespace detail

}  // namespace vqbm
