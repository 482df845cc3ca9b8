#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vqbm/thetagrad.hpp"
#include "vqbm/varqite.hpp"

// Generative quantum Boltzmann machine: cross-entropy loss, analytic loss
// gradient through the VarQITE theta-Jacobian, AMSGrad, and an exact-oracle
// training mode for calibration.

namespace vqbm {

/// Parameterized Hamiltonian template plus qubit partition and ansatz.
struct QbmModel {
  std::vector<PauliString> hamiltonian_template;  // the h_i, system register
  RealVector theta;                               // one coefficient per term
  std::vector<int> visible_qubits;
  std::vector<int> hidden_qubits;
  AnsatzTemplate ansatz;
  double kbt = 1.0;

  int n_system() const { return ansatz.n_system; }
  int n_theta() const { return static_cast<int>(hamiltonian_template.size()); }
  PauliSum hamiltonian() const;
  void validate() const;
};

/// Target probabilities indexed by visible bitstrings (first listed visible
/// qubit is the most significant bit of the index).
struct TargetDistribution {
  std::vector<double> probabilities;
};

struct OptimizerConfig {
  double learning_rate = 0.1;
  double beta1 = 0.7;
  double beta2 = 0.99;
  int max_iterations = 200;
  double epsilon_div = 1e-8;
};

struct AmsgradState {
  RealVector m;
  RealVector v;
  RealVector v_hat;
  long step = 0;

  static AmsgradState zero(int n) {
    return {RealVector::Zero(n), RealVector::Zero(n), RealVector::Zero(n), 0};
  }
};

struct TrainingRecord {
  std::vector<double> loss;         // per evaluation, index 0 = initial
  std::vector<double> l1_distance;  // same indexing
  RealVector final_theta;
  std::vector<double> final_distribution;
  std::uint64_t seed = 0;
  bool aborted = false;
  std::string diagnostic;
};

/// Cross-entropy -sum_v p_data log p_model; zero-probability data terms
/// contribute exactly 0 and the model is clamped below at 1e-12.
double loss(const std::vector<double>& p_model, const TargetDistribution& p_data);

double l1_distance(const std::vector<double>& p_model,
                   const TargetDistribution& p_data);

/// Visible-outcome marginal of a reduced system state.
std::vector<double> visible_distribution(const QbmModel& model,
                                         const DensityMatrix& rho);

struct LossGradient {
  RealVector gradient;          // dL/d theta
  std::vector<double> p_model;  // distribution at the evaluated theta
  double loss_value = 0.0;
  bool clamped = false;  // some p_v^QBM hit the 1e-12 floor with data mass
};

/// Analytic loss gradient via theta-tracked Gibbs preparation, pi/2-shift
/// probability gradients and the chain-rule contraction.
LossGradient loss_gradient(const QbmModel& model,
                           const TargetDistribution& p_data,
                           const EvolutionConfig& cfg);

/// One AMSGrad update (bias-corrected, componentwise max second moment).
std::pair<RealVector, AmsgradState> amsgrad_step(const RealVector& theta,
                                                 const RealVector& gradient,
                                                 AmsgradState state,
                                                 const OptimizerConfig& cfg);

/// Multi-seed generative training; theta(0) ~ U[-1,1]^p per seed. A seed
/// whose loss turns non-finite is aborted with a diagnostic, other seeds
/// continue.
std::vector<TrainingRecord> train_generative(
    const QbmModel& model, const TargetDistribution& p_data,
    const OptimizerConfig& opt, const EvolutionConfig& evo,
    const std::vector<std::uint64_t>& seeds);

/// Visible distribution of the exact (dense-oracle) Gibbs state at theta.
std::vector<double> exact_distribution(const QbmModel& model,
                                       const RealVector& theta);

/// Exact-mode training: same loss on qcore.exact_gibbs probabilities,
/// gradients by central finite differences (step 1e-6), AMSGrad updates.
RealVector train_exact(const QbmModel& model, const TargetDistribution& p_data,
                       const OptimizerConfig& opt);

}  // namespace vqbm
