#include "vqbm/varqite.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "vqbm/thetagrad.hpp"

namespace vqbm {

namespace {

bool all_finite(const RealMatrix& m) { return m.allFinite(); }

std::vector<ComplexVector> all_first_derivatives(const Circuit& c,
                                                 const RealVector& omega) {
  const StateVector psi0 = StateVector::zero_state(c.n_qubits);
  std::vector<ComplexVector> d(c.n_params);
  for (int k = 0; k < c.n_params; ++k) d[k] = d_state(c, omega, psi0, k);
  return d;
}

// Applies the circuit with a bare sigma inserted after the gate carrying
// `insert_param` (factor -i/2 accounted for by the caller).
void apply_with_insertion(const Circuit& c, const RealVector& omega,
                          int insert_param, ComplexVector& psi) {
  for (const auto& g : c.gates) {
    detail::apply_gate(psi, c.n_qubits, g, omega);
    if (g.kind == GateKind::PauliRotation && g.param_index == insert_param)
      detail::apply_pauli_axis(psi, c.n_qubits, g.target, g.axis);
  }
}

}  // namespace

RegularizationPolicy RegularizationPolicy::tikhonov_default() {
  RegularizationPolicy p;
  p.scheme = RegularizationScheme::TikhonovGrid;
  for (int i = 0; i < 13; ++i)
    p.lambda_grid.push_back(std::pow(10.0, -8.0 + 8.0 * i / 12.0));
  return p;
}

RegularizationPolicy RegularizationPolicy::diagonal(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  RegularizationPolicy p;
  p.scheme = RegularizationScheme::DiagonalPerturbation;
  p.epsilon = epsilon;
  return p;
}

PauliSum pad_to_register(const PauliSum& h, int n_qubits) {
  if (n_qubits < h.n_qubits)
    throw std::invalid_argument("register smaller than Hamiltonian");
  PauliSum padded = PauliSum::zero(n_qubits);
  for (const auto& [coeff, word] : h.terms) {
    padded.add_term(coeff,
                    word.word + std::string(n_qubits - h.n_qubits, 'I'));
  }
  return padded;
}

RealMatrix assemble_a(const Circuit& c, const RealVector& omega) {
  const auto d = all_first_derivatives(c, omega);
  const int q = c.n_params;
  RealMatrix a(q, q);
  for (int p = 0; p < q; ++p) {
    for (int r = p; r < q; ++r) {
      const double v = d[p].dot(d[r]).real();
      a(p, r) = v;
      a(r, p) = v;
    }
  }
  return a;
}

RealVector assemble_c(const Circuit& c, const RealVector& omega,
                      const PauliSum& h) {
  PauliSum hh = h;
  if (h.n_qubits != c.n_qubits) {
    if (h.n_qubits == c.n_qubits - 1)
      hh = pad_to_register(h, c.n_qubits);  // implicit I on the phase-fix qubit
    else
      throw std::invalid_argument("Hamiltonian / circuit qubit mismatch");
  }
  const StateVector psi = apply(c, omega, StateVector::zero_state(c.n_qubits));
  const auto d = all_first_derivatives(c, omega);
  RealVector cvec = RealVector::Zero(c.n_params);
  for (const auto& [coeff, word] : hh.terms) {
    ComplexVector hpsi = psi.amplitudes;
    apply_pauli_word(word.word, hpsi);
    for (int p = 0; p < c.n_params; ++p)
      cvec(p) -= coeff * d[p].dot(hpsi).real();
  }
  return cvec;
}

McLachlanSystem assemble_system(const Circuit& c, const RealVector& omega,
                                const PauliSum& h) {
  return {assemble_a(c, omega), assemble_c(c, omega, h)};
}

double hadamard_test_value(const HadamardTestSpec& spec, double alpha) {
  const bool alpha_zero = std::abs(alpha) < 1e-15;
  const bool alpha_half_pi = std::abs(alpha - std::numbers::pi / 2) < 1e-15;
  if (!alpha_zero && !alpha_half_pi)
    throw std::invalid_argument("alpha must be 0 or pi/2");

  const int n = spec.psi_in.n_qubits;
  const std::int64_t dim = std::int64_t{1} << n;

  // Control qubit prepended as the most significant bit.
  ComplexVector full = ComplexVector::Zero(2 * dim);
  full.head(dim) = spec.psi_in.amplitudes;
  detail::apply_single_qubit(full, n + 1, 0, [] {
    Eigen::Matrix2cd h;
    const double r = 1.0 / std::sqrt(2.0);
    h << r, r, r, -r;
    return h;
  }());

  // Anti-controlled U, controlled V; the two halves are contiguous blocks.
  ComplexVector top = full.head(dim);
  ComplexVector bottom = full.tail(dim);
  spec.apply_u(top);
  spec.apply_v(bottom);
  if (alpha_half_pi) bottom *= Complex{0.0, 1.0};  // S gate on the control
  full.head(dim) = top;
  full.tail(dim) = bottom;

  detail::apply_single_qubit(full, n + 1, 0, [] {
    Eigen::Matrix2cd h;
    const double r = 1.0 / std::sqrt(2.0);
    h << r, r, r, -r;
    return h;
  }());
  return full.head(dim).squaredNorm() - full.tail(dim).squaredNorm();
}

RealMatrix assemble_a_hadamard(const Circuit& c, const RealVector& omega,
                               CircuitCountTally* tally) {
  const int q = c.n_params;
  const StateVector psi0 = StateVector::zero_state(c.n_qubits);
  RealMatrix a(q, q);
  for (int p = 0; p < q; ++p) {
    for (int r = p; r < q; ++r) {
      HadamardTestSpec spec;
      spec.psi_in = psi0;
      spec.apply_u = [&, p](ComplexVector& v) {
        apply_with_insertion(c, omega, p, v);
      };
      spec.apply_v = [&, r](ComplexVector& v) {
        apply_with_insertion(c, omega, r, v);
      };
      const double val = 0.25 * hadamard_test_value(spec, 0.0);
      a(p, r) = val;
      a(r, p) = val;
      if (tally) ++tally->a_entries;
    }
  }
  return a;
}

RealVector assemble_c_hadamard(const Circuit& c, const RealVector& omega,
                               const PauliSum& h, CircuitCountTally* tally) {
  PauliSum hh =
      h.n_qubits == c.n_qubits ? h : pad_to_register(h, c.n_qubits);
  const StateVector psi0 = StateVector::zero_state(c.n_qubits);
  RealVector cvec = RealVector::Zero(c.n_params);
  for (int p = 0; p < c.n_params; ++p) {
    for (const auto& [coeff, word] : hh.terms) {
      HadamardTestSpec spec;
      spec.psi_in = psi0;
      spec.apply_u = [&, p](ComplexVector& v) {
        apply_with_insertion(c, omega, p, v);
      };
      spec.apply_v = [&](ComplexVector& v) {
        apply_with_insertion(c, omega, -1, v);
        apply_pauli_word(word.word, v);
      };
      cvec(p) -=
          coeff * 0.5 * hadamard_test_value(spec, std::numbers::pi / 2);
      if (tally) ++tally->c_entries;
    }
  }
  return cvec;
}

RealVector ridge_solve(const RealMatrix& a, const RealVector& rhs,
                       double lambda) {
  const RealMatrix normal =
      a.transpose() * a +
      lambda * RealMatrix::Identity(a.cols(), a.cols());
  return normal.ldlt().solve(a.transpose() * rhs);
}

RegularizedSolution solve_regularized(const RealMatrix& a,
                                      const RealVector& rhs,
                                      const RegularizationPolicy& policy) {
  if (!all_finite(a) || !rhs.allFinite())
    throw std::invalid_argument("non-finite linear system");

  if (policy.scheme == RegularizationScheme::DiagonalPerturbation) {
    if (!(policy.epsilon > 0.0))
      throw std::invalid_argument("epsilon must be > 0");
    if (rhs.norm() == 0.0)
      return {RealVector::Zero(rhs.size()), policy.epsilon};
    const RealMatrix shifted =
        a + policy.epsilon * RealMatrix::Identity(a.rows(), a.cols());
    return {shifted.ldlt().solve(rhs), policy.epsilon};
  }

  if (policy.lambda_grid.empty())
    throw std::invalid_argument("empty lambda grid");
  for (std::size_t i = 1; i < policy.lambda_grid.size(); ++i) {
    if (policy.lambda_grid[i] <= policy.lambda_grid[i - 1])
      throw std::invalid_argument("lambda grid must be ascending");
  }
  if (rhs.norm() == 0.0) return {RealVector::Zero(rhs.size()), 1e-6};

  const auto& grid = policy.lambda_grid;
  const int m = static_cast<int>(grid.size());
  std::vector<RealVector> solutions(m);
  std::vector<double> xi(m), eta(m);
  for (int i = 0; i < m; ++i) {
    solutions[i] = ridge_solve(a, rhs, grid[i]);
    xi[i] = std::log(std::max((a * solutions[i] - rhs).norm(), 1e-300));
    eta[i] = std::log(std::max(solutions[i].norm(), 1e-300));
  }

  // Signed Menger curvature of consecutive L-curve triples. Traversed with
  // increasing lambda the genuine corner (steep descent turning into the
  // flat over-regularized branch) has positive sign; a consistent system
  // produces only the opposite bend, which must not be selected.
  double best_curv = 0.0;
  double min_curv = std::numeric_limits<double>::infinity();
  double max_curv = -std::numeric_limits<double>::infinity();
  int best = -1;
  for (int i = 1; i + 1 < m; ++i) {
    const double x0 = xi[i - 1], y0 = eta[i - 1];
    const double x1 = xi[i], y1 = eta[i];
    const double x2 = xi[i + 1], y2 = eta[i + 1];
    const double cross = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0);
    const double l01 = std::hypot(x1 - x0, y1 - y0);
    const double l12 = std::hypot(x2 - x1, y2 - y1);
    const double l02 = std::hypot(x2 - x0, y2 - y0);
    if (l01 * l12 * l02 == 0.0) continue;
    const double curv = 2.0 * cross / (l01 * l12 * l02);
    if (!std::isfinite(curv)) continue;
    min_curv = std::min(min_curv, curv);
    max_curv = std::max(max_curv, curv);
    if (curv > best_curv) {
      best_curv = curv;
      best = i;
    }
  }
  if (best < 0 || max_curv - min_curv < 1e-12)
    return {ridge_solve(a, rhs, 1e-6), 1e-6};
  return {solutions[best], grid[best]};
}

VarQiteSolution evolve(const Circuit& c, const RealVector& omega0,
                       const PauliSum& h, const EvolutionConfig& cfg,
                       const StepCallback& on_step) {
  if (cfg.n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("tau must be positive");

  const int q = c.n_params;
  const int p = static_cast<int>(h.terms.size());
  const double dt = cfg.delta_tau();

  VarQiteSolution sol;
  sol.omega_trajectory.reserve(cfg.n_steps + 1);
  RealVector omega = omega0;
  sol.omega_trajectory.push_back(omega);

  ThetaJacobianState jac = ThetaJacobianState::zero(q, p);

  for (int step = 0; step < cfg.n_steps; ++step) {
    const RealMatrix a = assemble_a(c, omega);
    const RealVector cvec = assemble_c(c, omega, h);
    sol.circuit_counts.a_entries += static_cast<long long>(q) * (q + 1) / 2;
    sol.circuit_counts.c_entries += static_cast<long long>(q) * p;

    const RegularizedSolution primal =
        solve_regularized(a, cvec, cfg.regularization);
    const RealVector& omega_dot = primal.x;

    if (cfg.track_theta_gradients) {
      const auto da = d_a_d_theta(c, omega, jac.d_omega);
      const auto dc = d_c_d_theta(c, omega, h, jac.d_omega);
      sol.circuit_counts.da_entries +=
          static_cast<long long>(q) * q * (q + 1);
      sol.circuit_counts.dc_entries += 2LL * q * q * p;
      jac = step_theta_jacobian(a, omega_dot, da, dc, jac,
                                cfg.regularization, dt, primal.lambda);
    }

    omega += dt * omega_dot;
    if (!omega.allFinite())
      throw std::runtime_error("non-finite parameters at evolution step " +
                               std::to_string(step + 1));
    sol.omega_trajectory.push_back(omega);
    if (on_step)
      on_step(step + 1, omega, omega_dot, (a * omega_dot - cvec).norm());
  }

  sol.omega_final = omega;
  if (cfg.track_theta_gradients) sol.d_omega_d_theta = jac.d_omega;
  return sol;
}

std::pair<DensityMatrix, VarQiteSolution> prepare_gibbs(
    const PauliSum& h, const AnsatzTemplate& tmpl, const EvolutionConfig& cfg,
    const StepCallback& on_step) {
  if (h.n_qubits != tmpl.n_system)
    throw std::invalid_argument("ansatz sized for a different system");

  const Circuit circuit = tmpl.build();
  const PauliSum h_eff = pad_to_register(h, circuit.n_qubits);
  VarQiteSolution sol =
      evolve(circuit, tmpl.initial_parameters(), h_eff, cfg, on_step);

  const StateVector psi =
      apply(circuit, sol.omega_final, StateVector::zero_state(circuit.n_qubits));
  std::vector<int> keep(tmpl.n_system);
  for (int i = 0; i < tmpl.n_system; ++i) keep[i] = i;
  DensityMatrix reduced = partial_trace(DensityMatrix::pure(psi), keep);
  return {std::move(reduced), std::move(sol)};
}

}  // namespace vqbm
