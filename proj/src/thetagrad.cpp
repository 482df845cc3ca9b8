#include "vqbm/thetagrad.hpp"

#include <numbers>
#include <stdexcept>

namespace vqbm {

namespace {

struct DerivCache {
  StateVector psi;
  std::vector<ComplexVector> d1;               // q first derivatives
  std::vector<std::vector<ComplexVector>> d2;  // upper-triangular seconds

  const ComplexVector& second(int k, int l) const {
    return k <= l ? d2[k][l - k] : d2[l][k - l];
  }
};

DerivCache build_cache(const Circuit& c, const RealVector& omega,
                       bool with_second) {
  DerivCache cache;
  const StateVector psi0 = StateVector::zero_state(c.n_qubits);
  cache.psi = apply(c, omega, psi0);
  cache.d1.resize(c.n_params);
  for (int k = 0; k < c.n_params; ++k)
    cache.d1[k] = d_state(c, omega, psi0, k);
  if (with_second) {
    cache.d2.resize(c.n_params);
    for (int k = 0; k < c.n_params; ++k) {
      cache.d2[k].resize(c.n_params - k);
      for (int l = k; l < c.n_params; ++l)
        cache.d2[k][l - k] = d2_state(c, omega, psi0, k, l);
    }
  }
  return cache;
}

}  // namespace

std::vector<RealMatrix> d_a_d_theta(const Circuit& c, const RealVector& omega,
                                    const RealMatrix& d_omega) {
  const int q = c.n_params;
  const int p = static_cast<int>(d_omega.cols());
  if (d_omega.rows() != q)
    throw std::invalid_argument("d_omega row count mismatch");

  std::vector<RealMatrix> result(p, RealMatrix::Zero(q, q));
  if (d_omega.isZero(0.0)) return result;  // chain-rule factor vanishes

  const DerivCache cache = build_cache(c, omega, true);
  // M_s(p,r) = Re(<d2(p,s)|d1(r)> + <d1(p)|d2(r,s)>), symmetric in (p,r).
  std::vector<RealMatrix> m_s(q, RealMatrix(q, q));
  for (int s = 0; s < q; ++s) {
    for (int a = 0; a < q; ++a) {
      for (int b = a; b < q; ++b) {
        const double v = cache.second(a, s).dot(cache.d1[b]).real() +
                         cache.d1[a].dot(cache.second(b, s)).real();
        m_s[s](a, b) = v;
        m_s[s](b, a) = v;
      }
    }
  }
  for (int i = 0; i < p; ++i) {
    for (int s = 0; s < q; ++s) {
      const double w = d_omega(s, i);
      if (w != 0.0) result[i] += w * m_s[s];
    }
  }
  return result;
}

std::vector<RealVector> d_c_d_theta(const Circuit& c, const RealVector& omega,
                                    const PauliSum& h,
                                    const RealMatrix& d_omega) {
  const int q = c.n_params;
  const int p = static_cast<int>(h.terms.size());
  if (d_omega.rows() != q || d_omega.cols() != p)
    throw std::invalid_argument("d_omega shape mismatch");

  PauliSum hh =
      h.n_qubits == c.n_qubits ? h : pad_to_register(h, c.n_qubits);
  const bool chain = !d_omega.isZero(0.0);
  const DerivCache cache = build_cache(c, omega, chain);

  std::vector<ComplexVector> hpsi(p);
  for (int i = 0; i < p; ++i) {
    hpsi[i] = cache.psi.amplitudes;
    apply_pauli_word(hh.terms[i].second.word, hpsi[i]);
  }

  std::vector<RealVector> result(p, RealVector::Zero(q));
  for (int j = 0; j < p; ++j) {
    for (int a = 0; a < q; ++a)
      result[j](a) = -cache.d1[a].dot(hpsi[j]).real();
  }
  if (!chain) return result;

  // N_s(a) = -sum_i theta_i Re(<d1(a)|h_i|d1(s)> + <d2(a,s)|h_i psi>).
  RealMatrix n_s = RealMatrix::Zero(q, q);  // rows a, cols s
  for (int i = 0; i < p; ++i) {
    const double theta_i = hh.terms[i].first;
    if (theta_i == 0.0) continue;
    for (int s = 0; s < q; ++s) {
      ComplexVector h_ds = cache.d1[s];
      apply_pauli_word(hh.terms[i].second.word, h_ds);
      for (int a = 0; a < q; ++a) {
        n_s(a, s) -= theta_i * (cache.d1[a].dot(h_ds).real() +
                                cache.second(a, s).dot(hpsi[i]).real());
      }
    }
  }
  for (int j = 0; j < p; ++j) result[j] += n_s * d_omega.col(j);
  return result;
}

ThetaJacobianState step_theta_jacobian(
    const RealMatrix& a, const RealVector& omega_dot,
    const std::vector<RealMatrix>& da_list,
    const std::vector<RealVector>& dc_list, const ThetaJacobianState& state,
    const RegularizationPolicy& policy, double delta_tau,
    double primal_lambda) {
  const int q = static_cast<int>(a.rows());
  const int p = static_cast<int>(dc_list.size());
  if (da_list.size() != dc_list.size())
    throw std::invalid_argument("dA / dC count mismatch");

  ThetaJacobianState next = state;
  for (int i = 0; i < p; ++i) {
    const RealVector rhs = dc_list[i] - da_list[i] * omega_dot;
    RealVector x(q);
    if (policy.scheme == RegularizationScheme::DiagonalPerturbation) {
      if (rhs.norm() == 0.0) {
        x = RealVector::Zero(q);
      } else {
        const RealMatrix shifted =
            a + policy.epsilon * RealMatrix::Identity(q, q);
        x = shifted.ldlt().solve(rhs);
      }
    } else {
      x = rhs.norm() == 0.0 ? RealVector::Zero(q)
                            : ridge_solve(a, rhs, primal_lambda);
    }
    if (!x.allFinite())
      throw std::runtime_error("non-finite tangent solve for theta index " +
                               std::to_string(i));
    next.d_omega_dot.col(i) = x;
    next.d_omega.col(i) = state.d_omega.col(i) + delta_tau * x;
  }
  return next;
}

double measure_prob(const DensityMatrix& rho, const ProjectorSpec& proj) {
  if (proj.visible_qubits.empty())
    throw std::invalid_argument("visible set must be nonempty");
  if (proj.visible_qubits.size() != proj.outcome_bits.size())
    throw std::invalid_argument("outcome length mismatch");
  const int n = rho.n_qubits;
  for (int qb : proj.visible_qubits) {
    if (qb < 0 || qb >= n)
      throw std::invalid_argument("visible qubit out of range");
  }
  for (int bit : proj.outcome_bits) {
    if (bit != 0 && bit != 1)
      throw std::invalid_argument("outcome bits must be 0 or 1");
  }

  const std::int64_t dim = std::int64_t{1} << n;
  double p = 0.0;
  for (std::int64_t i = 0; i < dim; ++i) {
    bool match = true;
    for (std::size_t v = 0; v < proj.visible_qubits.size(); ++v) {
      const int bit =
          static_cast<int>((i >> (n - 1 - proj.visible_qubits[v])) & 1);
      if (bit != proj.outcome_bits[v]) {
        match = false;
        break;
      }
    }
    if (match) p += rho.matrix(i, i).real();
  }
  return p;
}

double d_prob_d_omega(const Circuit& c, const RealVector& omega,
                      const std::vector<int>& keep_qubits,
                      const ProjectorSpec& proj, int k) {
  if (k < 0 || k >= c.n_params)
    throw std::invalid_argument("parameter index out of range");
  for (const auto& g : c.gates) {
    if (g.param_index == k && g.kind != GateKind::PauliRotation)
      throw std::invalid_argument(
          "pi/2-shift requires a Pauli-rotation parameter");
  }

  auto prob_at = [&](double delta) {
    const RealVector shifted = shift_parameter(omega, k, delta);
    const StateVector psi =
        apply(c, shifted, StateVector::zero_state(c.n_qubits));
    const DensityMatrix reduced =
        partial_trace(DensityMatrix::pure(psi), keep_qubits);
    return measure_prob(reduced, proj);
  };
  const double half_pi = std::numbers::pi / 2.0;
  return (prob_at(half_pi) - prob_at(-half_pi)) / 2.0;
}

RealVector d_prob_d_theta(const RealVector& dp_domega,
                          const RealMatrix& d_omega_d_theta) {
  if (dp_domega.size() != d_omega_d_theta.rows())
    throw std::invalid_argument("Jacobian dimension mismatch");
  return d_omega_d_theta.transpose() * dp_domega;
}

}  // namespace vqbm
