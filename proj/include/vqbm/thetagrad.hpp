#pragma once

#include <vector>

#include "vqbm/varqite.hpp"

// Forward-mode differentiation of the VarQITE trajectory with respect to
// the Hamiltonian coefficients, plus measurement-probability gradients with
// respect to the trial-state parameters.

namespace vqbm {

/// Per-step Jacobian accumulators; both q x p, zero at tau = 0 because
/// omega(0) does not depend on theta.
struct ThetaJacobianState {
  RealMatrix d_omega;
  RealMatrix d_omega_dot;

  static ThetaJacobianState zero(int q, int p) {
    return {RealMatrix::Zero(q, p), RealMatrix::Zero(q, p)};
  }
};

/// dA/d theta_i for every i: chain-rule contraction of the second state
/// derivatives with the current Jacobian d_omega.
std::vector<RealMatrix> d_a_d_theta(const Circuit& c, const RealVector& omega,
                                    const RealMatrix& d_omega);

/// dC/d theta_j: the direct unit-coefficient term plus the chain terms
/// through d_omega. d_omega columns must match h's term count.
std::vector<RealVector> d_c_d_theta(const Circuit& c, const RealVector& omega,
                                    const PauliSum& h,
                                    const RealMatrix& d_omega);

/// One Euler step of the tangent system
///   A (d omega_dot / d theta_i) = dC_i - dA_i omega_dot,
/// reusing the regularization selected by the primal solve of the same step.
ThetaJacobianState step_theta_jacobian(
    const RealMatrix& a, const RealVector& omega_dot,
    const std::vector<RealMatrix>& da_list,
    const std::vector<RealVector>& dc_list, const ThetaJacobianState& state,
    const RegularizationPolicy& policy, double delta_tau,
    double primal_lambda);

/// Projective measurement Lambda_v = |v><v| (x) I on the visible qubits.
struct ProjectorSpec {
  std::vector<int> visible_qubits;
  std::vector<int> outcome_bits;  // 0/1 per visible qubit
};

/// Tr[Lambda_v rho].
double measure_prob(const DensityMatrix& rho, const ProjectorSpec& proj);

/// pi/2-shift gradient of the measured probability with respect to
/// omega_k, on the reduced state rebuilt at the shifted parameters.
/// keep_qubits selects the traced-down register (system qubits).
double d_prob_d_omega(const Circuit& c, const RealVector& omega,
                      const std::vector<int>& keep_qubits,
                      const ProjectorSpec& proj, int k);

/// Chain-rule contraction dp/d theta = (dp/d omega)^T (d omega/d theta).
RealVector d_prob_d_theta(const RealVector& dp_domega,
                          const RealMatrix& d_omega_d_theta);

}  // namespace vqbm
