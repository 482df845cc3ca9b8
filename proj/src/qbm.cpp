#include "vqbm/qbm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace vqbm {

namespace {

constexpr double kProbClamp = 1e-12;

ProjectorSpec projector_for(const QbmModel& model, int outcome) {
  ProjectorSpec proj;
  proj.visible_qubits = model.visible_qubits;
  const int nv = static_cast<int>(model.visible_qubits.size());
  proj.outcome_bits.resize(nv);
  for (int b = 0; b < nv; ++b)
    proj.outcome_bits[b] = (outcome >> (nv - 1 - b)) & 1;
  return proj;
}

}  // namespace

PauliSum QbmModel::hamiltonian() const {
  PauliSum h = PauliSum::zero(n_system());
  for (int i = 0; i < n_theta(); ++i)
    h.add_term(theta(i), hamiltonian_template[i].word);
  return h;
}

void QbmModel::validate() const {
  if (theta.size() != n_theta())
    throw std::invalid_argument("theta length does not match template");
  std::vector<bool> covered(n_system(), false);
  for (int q : visible_qubits) {
    if (q < 0 || q >= n_system() || covered[q])
      throw std::invalid_argument("invalid visible qubit set");
    covered[q] = true;
  }
  for (int q : hidden_qubits) {
    if (q < 0 || q >= n_system() || covered[q])
      throw std::invalid_argument("hidden qubits must be disjoint from visible");
    covered[q] = true;
  }
  if (!std::all_of(covered.begin(), covered.end(), [](bool b) { return b; }))
    throw std::invalid_argument("visible + hidden must cover the system");
  for (const auto& word : hamiltonian_template) {
    if (word.n_qubits() != n_system())
      throw std::invalid_argument("template word length mismatch");
  }
}

double loss(const std::vector<double>& p_model,
            const TargetDistribution& p_data) {
  if (p_model.size() != p_data.probabilities.size())
    throw std::invalid_argument("distribution size mismatch");
  double l = 0.0;
  for (std::size_t v = 0; v < p_model.size(); ++v) {
    const double pd = p_data.probabilities[v];
    if (pd == 0.0) continue;
    l -= pd * std::log(std::max(p_model[v], kProbClamp));
  }
  return l;
}

double l1_distance(const std::vector<double>& p_model,
                   const TargetDistribution& p_data) {
  double d = 0.0;
  for (std::size_t v = 0; v < p_model.size(); ++v)
    d += std::abs(p_model[v] - p_data.probabilities[v]);
  return d;
}

std::vector<double> visible_distribution(const QbmModel& model,
                                         const DensityMatrix& rho) {
  const int nv = static_cast<int>(model.visible_qubits.size());
  std::vector<double> p(std::size_t{1} << nv);
  for (std::size_t v = 0; v < p.size(); ++v)
    p[v] = measure_prob(rho, projector_for(model, static_cast<int>(v)));
  return p;
}

LossGradient loss_gradient(const QbmModel& model,
                           const TargetDistribution& p_data,
                           const EvolutionConfig& cfg) {
  model.validate();
  EvolutionConfig tracked = cfg;
  tracked.track_theta_gradients = true;
  auto [rho, sol] = prepare_gibbs(model.hamiltonian(), model.ansatz, tracked);

  const std::vector<double> p_model = visible_distribution(model, rho);
  const int n_outcomes = static_cast<int>(p_model.size());
  const int q = static_cast<int>(sol.omega_final.size());

  const Circuit circuit = model.ansatz.build();
  std::vector<int> keep(model.n_system());
  for (int i = 0; i < model.n_system(); ++i) keep[i] = i;

  // dp_v/d omega_k by the pi/2-shift rule; both shifted reduced states are
  // built once per parameter and reused for every outcome v.
  RealMatrix dp_domega(q, n_outcomes);
  const double half_pi = std::numbers::pi / 2.0;
  for (int k = 0; k < q; ++k) {
    auto reduced_at = [&](double delta) {
      const RealVector shifted = shift_parameter(sol.omega_final, k, delta);
      const StateVector psi =
          apply(circuit, shifted, StateVector::zero_state(circuit.n_qubits));
      return partial_trace(DensityMatrix::pure(psi), keep);
    };
    const DensityMatrix plus = reduced_at(half_pi);
    const DensityMatrix minus = reduced_at(-half_pi);
    for (int v = 0; v < n_outcomes; ++v) {
      const ProjectorSpec proj = projector_for(model, v);
      dp_domega(k, v) =
          (measure_prob(plus, proj) - measure_prob(minus, proj)) / 2.0;
    }
  }

  LossGradient out;
  out.p_model = p_model;
  out.loss_value = loss(p_model, p_data);
  out.gradient = RealVector::Zero(model.n_theta());
  for (int v = 0; v < n_outcomes; ++v) {
    const double pd = p_data.probabilities[v];
    if (pd == 0.0) continue;
    double denom = p_model[v];
    if (denom < kProbClamp) {
      denom = kProbClamp;
      out.clamped = true;
    }
    const RealVector dp_dtheta =
        d_prob_d_theta(dp_domega.col(v), sol.d_omega_d_theta);
    out.gradient -= (pd / denom) * dp_dtheta;
  }
  return out;
}

std::pair<RealVector, AmsgradState> amsgrad_step(const RealVector& theta,
                                                 const RealVector& gradient,
                                                 AmsgradState state,
                                                 const OptimizerConfig& cfg) {
  if (theta.size() != gradient.size() || theta.size() != state.m.size())
    throw std::invalid_argument("AMSGrad dimension mismatch");
  state.step += 1;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * gradient;
  state.v = cfg.beta2 * state.v.eval() +
            (1.0 - cfg.beta2) * gradient.cwiseProduct(gradient);
  state.v_hat = state.v_hat.cwiseMax(state.v);

  const double m_corr = 1.0 - std::pow(cfg.beta1, state.step);
  const double v_corr = 1.0 - std::pow(cfg.beta2, state.step);
  const RealVector m_hat = state.m / m_corr;
  const RealVector v_hat_corr = state.v_hat / v_corr;
  const RealVector denom =
      (v_hat_corr.cwiseSqrt().array() + cfg.epsilon_div).matrix();
  RealVector updated = theta - cfg.learning_rate * m_hat.cwiseQuotient(denom);
  return {std::move(updated), std::move(state)};
}

std::vector<TrainingRecord> train_generative(
    const QbmModel& model, const TargetDistribution& p_data,
    const OptimizerConfig& opt, const EvolutionConfig& evo,
    const std::vector<std::uint64_t>& seeds) {
  model.validate();
  std::vector<TrainingRecord> records;
  records.reserve(seeds.size());

  for (std::uint64_t seed : seeds) {
    TrainingRecord rec;
    rec.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);

    QbmModel m = model;
    for (int i = 0; i < m.n_theta(); ++i) m.theta(i) = uniform(rng);
    AmsgradState opt_state = AmsgradState::zero(m.n_theta());

    try {
      for (int it = 0; it <= opt.max_iterations; ++it) {
        const LossGradient g = loss_gradient(m, p_data, evo);
        if (!std::isfinite(g.loss_value))
          throw std::runtime_error("non-finite loss at iteration " +
                                   std::to_string(it));
        rec.loss.push_back(g.loss_value);
        rec.l1_distance.push_back(l1_distance(g.p_model, p_data));
        rec.final_distribution = g.p_model;
        if (it == opt.max_iterations) break;
        auto [theta_next, state_next] =
            amsgrad_step(m.theta, g.gradient, std::move(opt_state), opt);
        m.theta = std::move(theta_next);
        opt_state = std::move(state_next);
      }
      rec.final_theta = m.theta;
    } catch (const std::exception& e) {
      rec.aborted = true;
      rec.diagnostic = e.what();
      rec.final_theta = m.theta;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<double> exact_distribution(const QbmModel& model,
                                       const RealVector& theta) {
  QbmModel m = model;
  m.theta = theta;
  const DensityMatrix rho = exact_gibbs({m.hamiltonian(), m.kbt});
  return visible_distribution(m, rho);
}

RealVector train_exact(const QbmModel& model, const TargetDistribution& p_data,
                       const OptimizerConfig& opt) {
  model.validate();
  RealVector theta = model.theta;
  AmsgradState state = AmsgradState::zero(static_cast<int>(theta.size()));
  const double fd_step = 1e-6;

  auto loss_at = [&](const RealVector& t) {
    return loss(exact_distribution(model, t), p_data);
  };

  for (int it = 0; it < opt.max_iterations; ++it) {
    RealVector grad(theta.size());
    for (int i = 0; i < theta.size(); ++i) {
      RealVector plus = theta, minus = theta;
      plus(i) += fd_step;
      minus(i) -= fd_step;
      grad(i) = (loss_at(plus) - loss_at(minus)) / (2.0 * fd_step);
    }
    if (!grad.allFinite())
      throw std::runtime_error("exact-mode optimizer diverged at iteration " +
                               std::to_string(it));
    auto [next, state_next] = amsgrad_step(theta, grad, std::move(state), opt);
    theta = std::move(next);
    state = std::move(state_next);
  }
  return theta;
}

}  // namespace vqbm
