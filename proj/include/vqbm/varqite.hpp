#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "vqbm/ansatz.hpp"
#include "vqbm/qcore.hpp"

// McLachlan linear system per imaginary-time step, regularized solves,
// explicit-Euler propagation and purification-based Gibbs preparation.

namespace vqbm {

/// A omega_dot = C, with A_pq = Re<d_p psi|d_q psi> and
/// C_p = -sum_i theta_i Re<d_p psi|h_i|psi>.
struct McLachlanSystem {
  RealMatrix a;
  RealVector c;
};

enum class RegularizationScheme { TikhonovGrid, DiagonalPerturbation };

struct RegularizationPolicy {
  RegularizationScheme scheme = RegularizationScheme::TikhonovGrid;
  std::vector<double> lambda_grid;  // ascending, TikhonovGrid only
  double epsilon = 1e-6;            // DiagonalPerturbation only

  /// 13 logarithmically spaced lambdas in [1e-8, 1].
  static RegularizationPolicy tikhonov_default();
  static RegularizationPolicy diagonal(double epsilon);
};

struct RegularizedSolution {
  RealVector x;
  double lambda = 0.0;  // lambda (Tikhonov) or epsilon actually applied
};

struct EvolutionConfig {
  double tau = 0.5;
  int n_steps = 10;
  RegularizationPolicy regularization = RegularizationPolicy::tikhonov_default();
  bool track_theta_gradients = false;

  double delta_tau() const { return tau / n_steps; }
};

/// Hadamard-test circuit tallies, bucketed by what the circuits evaluate.
struct CircuitCountTally {
  long long a_entries = 0;
  long long c_entries = 0;
  long long da_entries = 0;
  long long dc_entries = 0;
  long long shift_evaluations = 0;

  long long total() const {
    return a_entries + c_entries + da_entries + dc_entries + shift_evaluations;
  }
};

struct VarQiteSolution {
  RealVector omega_final;
  std::vector<RealVector> omega_trajectory;  // length n_steps + 1
  RealMatrix d_omega_d_theta;                // q x p; 0x0 when untracked
  CircuitCountTally circuit_counts;
};

/// A_pq = Re(<d_p psi | d_q psi>) for the circuit applied to |0...0>.
RealMatrix assemble_a(const Circuit& c, const RealVector& omega);

/// C_p = -sum_i theta_i Re(<d_p psi| h_i |psi>). Hamiltonians one qubit
/// short of the circuit get an implicit identity on the phase-fix qubit.
RealVector assemble_c(const Circuit& c, const RealVector& omega,
                      const PauliSum& h);

McLachlanSystem assemble_system(const Circuit& c, const RealVector& omega,
                                const PauliSum& h);

/// Two state-preparation programs sharing |psi_in>, compared through a
/// controlled circuit: the returned value is Re(e^{i alpha} <psi_U|psi_V>).
struct HadamardTestSpec {
  StateVector psi_in;
  std::function<void(ComplexVector&)> apply_u;
  std::function<void(ComplexVector&)> apply_v;
};

/// Z expectation on the control of the Hadamard-test circuit, simulated as
/// an (n+1)-qubit statevector. alpha must be 0 or pi/2.
double hadamard_test_value(const HadamardTestSpec& spec, double alpha);

/// A and C assembled purely from Hadamard-test circuits (cross-validation
/// path; also drives circuit counting).
RealMatrix assemble_a_hadamard(const Circuit& c, const RealVector& omega,
                               CircuitCountTally* tally = nullptr);
RealVector assemble_c_hadamard(const Circuit& c, const RealVector& omega,
                               const PauliSum& h,
                               CircuitCountTally* tally = nullptr);

/// Ridge solution argmin ||A x - rhs||^2 + lambda ||x||^2.
RealVector ridge_solve(const RealMatrix& a, const RealVector& rhs,
                       double lambda);

/// Regularized solve of A x = rhs under the given policy. Tikhonov picks
/// the grid lambda maximizing discrete L-curve curvature (fallback 1e-6
/// when the curvature spread is below 1e-12).
RegularizedSolution solve_regularized(const RealMatrix& a,
                                      const RealVector& rhs,
                                      const RegularizationPolicy& policy);

using StepCallback = std::function<void(
    int step, const RealVector& omega, const RealVector& omega_dot,
    double residual)>;

/// Euler propagation of A omega_dot = C over cfg.n_steps steps. When
/// tracking is enabled, the forward-mode Jacobian d omega / d theta is
/// accumulated alongside (one column per Hamiltonian term).
VarQiteSolution evolve(const Circuit& c, const RealVector& omega0,
                       const PauliSum& h, const EvolutionConfig& cfg,
                       const StepCallback& on_step = nullptr);

/// Purification-based Gibbs preparation: pads h onto the ansatz register,
/// evolves from the Bell-pair start and traces out the ancilla register and
/// the phase-fix qubit. cfg.tau must equal 1/(2 kbt) for the target state.
std::pair<DensityMatrix, VarQiteSolution> prepare_gibbs(
    const PauliSum& h, const AnsatzTemplate& tmpl, const EvolutionConfig& cfg,
    const StepCallback& on_step = nullptr);

/// h padded with identities onto the full ansatz register (ancillas and
/// phase-fix qubit untouched).
PauliSum pad_to_register(const PauliSum& h, int n_qubits);

}  // namespace vqbm
