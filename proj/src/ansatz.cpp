#include "vqbm/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vqbm {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kHalfPi = std::numbers::pi / 2.0;

Eigen::Matrix2cd rotation_matrix(char axis, double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  Eigen::Matrix2cd u;
  switch (axis) {
    case 'X':
      u << c, -kI * s, -kI * s, c;
      break;
    case 'Y':
      u << c, -s, s, c;
      break;
    case 'Z':
      u << std::exp(-kI * (angle / 2.0)), 0.0, 0.0, std::exp(kI * (angle / 2.0));
      break;
    default:
      throw std::invalid_argument("invalid rotation axis");
  }
  return u;
}

void check_axis(char axis) {
  if (axis != 'X' && axis != 'Y' && axis != 'Z')
    throw std::invalid_argument("rotation axis must be X, Y or Z");
}

}  // namespace

Gate Gate::rotation(char axis, int target, int param_index) {
  check_axis(axis);
  Gate g;
  g.kind = GateKind::PauliRotation;
  g.axis = axis;
  g.target = target;
  g.param_index = param_index;
  return g;
}

Gate Gate::fixed_rotation(char axis, int target, double angle) {
  check_axis(axis);
  Gate g;
  g.kind = GateKind::FixedRotation;
  g.axis = axis;
  g.target = target;
  g.angle = angle;
  return g;
}

Gate Gate::hadamard(int target) {
  Gate g;
  g.kind = GateKind::Hadamard;
  g.target = target;
  return g;
}

Gate Gate::cnot(int control, int target) {
  Gate g;
  g.kind = GateKind::ControlledNot;
  g.control = control;
  g.target = target;
  return g;
}

Gate Gate::cz(int control, int target) {
  Gate g;
  g.kind = GateKind::ControlledZ;
  g.control = control;
  g.target = target;
  return g;
}

Circuit::Circuit(int n_qubits_, int n_params_, std::vector<Gate> gates_)
    : n_qubits(n_qubits_), n_params(n_params_), gates(std::move(gates_)) {
  if (n_qubits < 1) throw std::invalid_argument("circuit needs >= 1 qubit");
  if (n_params < 0) throw std::invalid_argument("negative parameter count");
  std::vector<int> uses(n_params, 0);
  for (const auto& g : gates) {
    if (g.target < 0 || g.target >= n_qubits)
      throw std::invalid_argument("gate target out of range");
    if (g.kind == GateKind::ControlledNot || g.kind == GateKind::ControlledZ) {
      if (g.control < 0 || g.control >= n_qubits || g.control == g.target)
        throw std::invalid_argument("gate control out of range");
    }
    if (g.kind == GateKind::PauliRotation) {
      if (g.param_index < 0 || g.param_index >= n_params)
        throw std::invalid_argument("parameter index out of range");
      ++uses[g.param_index];
    }
  }
  for (int k = 0; k < n_params; ++k) {
    if (uses[k] != 1)
      throw std::invalid_argument(
          "every parameter must be carried by exactly one gate");
  }
}

namespace detail {

void apply_single_qubit(ComplexVector& psi, int n_qubits, int target,
                        const Eigen::Matrix2cd& u) {
  const std::int64_t stride = std::int64_t{1} << (n_qubits - 1 - target);
  const std::int64_t dim = psi.size();
  for (std::int64_t base = 0; base < dim; base += 2 * stride) {
    for (std::int64_t off = 0; off < stride; ++off) {
      const std::int64_t i0 = base + off;
      const std::int64_t i1 = i0 + stride;
      const Complex a0 = psi(i0);
      const Complex a1 = psi(i1);
      psi(i0) = u(0, 0) * a0 + u(0, 1) * a1;
      psi(i1) = u(1, 0) * a0 + u(1, 1) * a1;
    }
  }
}

void apply_pauli_axis(ComplexVector& psi, int n_qubits, int target,
                      char axis) {
  Eigen::Matrix2cd sigma;
  switch (axis) {
    case 'X':
      sigma << 0.0, 1.0, 1.0, 0.0;
      break;
    case 'Y':
      sigma << 0.0, -kI, kI, 0.0;
      break;
    case 'Z':
      sigma << 1.0, 0.0, 0.0, -1.0;
      break;
    default:
      throw std::invalid_argument("invalid Pauli axis");
  }
  apply_single_qubit(psi, n_qubits, target, sigma);
}

void apply_gate(ComplexVector& psi, int n_qubits, const Gate& g,
                const RealVector& omega) {
  switch (g.kind) {
    case GateKind::PauliRotation:
      apply_single_qubit(psi, n_qubits, g.target,
                         rotation_matrix(g.axis, omega(g.param_index)));
      break;
    case GateKind::FixedRotation:
      apply_single_qubit(psi, n_qubits, g.target,
                         rotation_matrix(g.axis, g.angle));
      break;
    case GateKind::Hadamard: {
      Eigen::Matrix2cd h;
      const double r = 1.0 / std::sqrt(2.0);
      h << r, r, r, -r;
      apply_single_qubit(psi, n_qubits, g.target, h);
      break;
    }
    case GateKind::ControlledNot: {
      const std::int64_t cbit = std::int64_t{1} << (n_qubits - 1 - g.control);
      const std::int64_t tbit = std::int64_t{1} << (n_qubits - 1 - g.target);
      for (std::int64_t i = 0; i < psi.size(); ++i) {
        if ((i & cbit) && !(i & tbit)) std::swap(psi(i), psi(i | tbit));
      }
      break;
    }
    case GateKind::ControlledZ: {
      const std::int64_t cbit = std::int64_t{1} << (n_qubits - 1 - g.control);
      const std::int64_t tbit = std::int64_t{1} << (n_qubits - 1 - g.target);
      for (std::int64_t i = 0; i < psi.size(); ++i) {
        if ((i & cbit) && (i & tbit)) psi(i) = -psi(i);
      }
      break;
    }
  }
}

}  // namespace detail

StateVector apply(const Circuit& c, const RealVector& omega,
                  const StateVector& psi_in) {
  if (omega.size() != c.n_params)
    throw std::invalid_argument("parameter count mismatch");
  if (psi_in.amplitudes.size() != (std::int64_t{1} << c.n_qubits))
    throw std::invalid_argument("state dimension mismatch");
  StateVector psi = psi_in;
  for (const auto& g : c.gates)
    detail::apply_gate(psi.amplitudes, c.n_qubits, g, omega);
  return psi;
}

ComplexVector d_state(const Circuit& c, const RealVector& omega,
                      const StateVector& psi_in, int k) {
  return d2_state(c, omega, psi_in, k, -1);
}

// Shared insertion walk: k >= 0 and l == -1 gives the first derivative,
// k, l >= 0 the mixed second derivative. sigma commutes with its own
// rotation, so inserting after the carrying gate is exact.
ComplexVector d2_state(const Circuit& c, const RealVector& omega,
                       const StateVector& psi_in, int k, int l) {
  if (omega.size() != c.n_params)
    throw std::invalid_argument("parameter count mismatch");
  if (k < 0 || k >= c.n_params || l >= c.n_params || l < -1)
    throw std::invalid_argument("parameter index out of range");

  ComplexVector psi = psi_in.amplitudes;
  int insertions = 0;
  for (const auto& g : c.gates) {
    detail::apply_gate(psi, c.n_qubits, g, omega);
    if (g.kind != GateKind::PauliRotation) continue;
    if (g.param_index == k) {
      detail::apply_pauli_axis(psi, c.n_qubits, g.target, g.axis);
      ++insertions;
    }
    if (l >= 0 && g.param_index == l) {
      detail::apply_pauli_axis(psi, c.n_qubits, g.target, g.axis);
      ++insertions;
    }
  }
  Complex factor = 1.0;
  for (int i = 0; i < insertions; ++i) factor *= Complex{0.0, -0.5};
  return factor * psi;
}

RealVector shift_parameter(const RealVector& omega, int k, double delta) {
  if (k < 0 || k >= omega.size())
    throw std::invalid_argument("parameter index out of range");
  RealVector out = omega;
  out(k) += delta;
  return out;
}

int AnsatzTemplate::n_params() const {
  // Prefix R_Y per system qubit; per layer R_Y+R_Z on 2n qubits, one
  // crossing rotation per pair and one correlated crossing per adjacent
  // pair; plus the phase-fix R_Z.
  return n_system + depth * (5 * n_system + std::max(n_system - 1, 0)) +
         (phase_fix ? 1 : 0);
}

Circuit AnsatzTemplate::build() const {
  if (n_system < 1) throw std::invalid_argument("n_system must be positive");
  if (depth < 0) throw std::invalid_argument("depth must be nonnegative");
  const int n = n_system;
  std::vector<Gate> gates;
  int p = 0;

  // Parameterized Bell-pair prefix; at pi/2 this is exact Bell preparation.
  for (int j = 0; j < n; ++j) {
    gates.push_back(Gate::rotation('Y', j, p++));
    gates.push_back(Gate::cnot(j, n + j));
  }

  for (int layer = 0; layer < depth; ++layer) {
    for (int q = 0; q < 2 * n; ++q) gates.push_back(Gate::rotation('Y', q, p++));
    for (int q = 0; q < 2 * n; ++q) gates.push_back(Gate::rotation('Z', q, p++));
    // Crossing block per pair: exp(-i w (Y_a X_b)/2), identity at w = 0.
    for (int j = 0; j < n; ++j) {
      const int a = j;
      const int b = n + j;
      gates.push_back(Gate::fixed_rotation('X', a, kHalfPi));
      gates.push_back(Gate::fixed_rotation('Y', b, -kHalfPi));
      gates.push_back(Gate::cnot(a, b));
      gates.push_back(Gate::rotation('Z', b, p++));
      gates.push_back(Gate::cnot(a, b));
      gates.push_back(Gate::fixed_rotation('X', a, -kHalfPi));
      gates.push_back(Gate::fixed_rotation('Y', b, kHalfPi));
    }
    // Correlated crossing per adjacent pair: exp(-i w (Y_j Z_{j+1} X_{n+j})/2)
    // couples the Schmidt spectrum across pairs (a single crossing per pair
    // only reaches product spectra). Identity at w = 0.
    for (int j = 0; j + 1 < n; ++j) {
      const int a = j;
      const int m = j + 1;
      const int b = n + j;
      gates.push_back(Gate::fixed_rotation('X', a, kHalfPi));
      gates.push_back(Gate::fixed_rotation('Y', b, -kHalfPi));
      gates.push_back(Gate::cnot(a, b));
      gates.push_back(Gate::cnot(m, b));
      gates.push_back(Gate::rotation('Z', b, p++));
      gates.push_back(Gate::cnot(m, b));
      gates.push_back(Gate::cnot(a, b));
      gates.push_back(Gate::fixed_rotation('X', a, -kHalfPi));
      gates.push_back(Gate::fixed_rotation('Y', b, kHalfPi));
    }
    // CX ladder mirrored on both registers; preserves the Bell condition.
    for (int j = 0; j + 1 < n; ++j) {
      gates.push_back(Gate::cnot(j, j + 1));
      gates.push_back(Gate::cnot(n + j, n + j + 1));
    }
  }

  if (phase_fix) gates.push_back(Gate::rotation('Z', 2 * n, p++));
  return Circuit(n_qubits(), p, std::move(gates));
}

RealVector AnsatzTemplate::initial_parameters() const {
  RealVector omega0 = RealVector::Zero(n_params());
  for (int j = 0; j < n_system; ++j) omega0(j) = kHalfPi;
  return omega0;
}

}  // namespace vqbm
