#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "doctest.h"
#include "vqbm/counts.hpp"
#include "vqbm/disc.hpp"
#include "vqbm/qbm.hpp"

using namespace vqbm;

// Each criterion prints exactly one PASS/FAIL line; the individual CHECKs
// additionally surface which condition broke.
#define ACC(ok, expr)                     \
  do {                                    \
    const bool acc_v = static_cast<bool>(expr); \
    CHECK_MESSAGE(acc_v, #expr);          \
    (ok) = (ok) && acc_v;                 \
  } while (0)

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void report(int criterion, const char* text, bool ok) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, text);
  std::fflush(stdout);
}

PauliSum h2_hamiltonian() {
  PauliSum h = PauliSum::zero(2);
  h.add_term(1.0, "ZZ");
  h.add_term(-0.2, "ZI");
  h.add_term(-0.2, "IZ");
  h.add_term(0.3, "XI");
  h.add_term(0.3, "IX");
  return h;
}

QbmModel bell_model() {
  QbmModel m;
  m.hamiltonian_template = {PauliString{"ZZ"}, PauliString{"IZ"},
                            PauliString{"ZI"}};
  m.theta = RealVector::Zero(3);
  m.visible_qubits = {0, 1};
  m.ansatz.n_system = 2;
  m.ansatz.depth = 1;
  return m;
}

TargetDistribution bell_target() { return {{0.5, 0.0, 0.0, 0.5}}; }

std::vector<std::uint64_t> derive_seeds(std::uint64_t seed, int n) {
  std::vector<std::uint64_t> seeds(n);
  std::uint64_t state = seed;
  for (int i = 0; i < n; ++i) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    seeds[i] = z ^ (z >> 31);
  }
  return seeds;
}

Circuit random_rotation_circuit(std::mt19937_64& rng, int n_qubits,
                                int n_params, RealVector& omega) {
  std::uniform_int_distribution<int> qubit(0, n_qubits - 1);
  std::uniform_int_distribution<int> axis_pick(0, 2);
  std::uniform_int_distribution<int> add_entangler(0, 1);
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  const char axes[3] = {'X', 'Y', 'Z'};
  std::vector<Gate> gates;
  for (int k = 0; k < n_params; ++k) {
    if (n_qubits > 1 && add_entangler(rng)) {
      int c = qubit(rng), t = qubit(rng);
      if (c != t) gates.push_back(Gate::cnot(c, t));
    }
    gates.push_back(Gate::rotation(axes[axis_pick(rng)], qubit(rng), k));
  }
  omega = RealVector(n_params);
  for (int k = 0; k < n_params; ++k) omega(k) = angle(rng);
  return Circuit(n_qubits, n_params, std::move(gates));
}

}  // namespace

TEST_CASE("criterion 1: single-qubit Gibbs preparation") {
  bool ok = true;
  const auto t0 = std::chrono::steady_clock::now();

  PauliSum h = PauliSum::zero(1);
  h.add_term(1.0, "Z");
  AnsatzTemplate tmpl;
  tmpl.n_system = 1;
  tmpl.depth = 1;
  EvolutionConfig cfg;  // tau = 0.5, 10 steps, Tikhonov grid
  const auto [rho, sol] = prepare_gibbs(h, tmpl, cfg);
  const DensityMatrix target = exact_gibbs({h, 1.0});

  ACC(ok, fidelity(rho, target) >= 0.999);
  ACC(ok, std::abs(target.matrix(0, 0).real() - 0.1192) < 5e-4);
  ACC(ok, std::abs(target.matrix(1, 1).real() - 0.8808) < 5e-4);
  ACC(ok, std::abs(target.matrix(0, 0).real() - 0.12) < 0.005);
  ACC(ok, std::abs(target.matrix(1, 1).real() - 0.88) < 0.005);
  ACC(ok, seconds_since(t0) < 1.0);
  report(1, "single-qubit Gibbs fidelity >= 0.999 in 10 Euler steps", ok);
}

TEST_CASE("criterion 2: two-qubit Gibbs preparation") {
  bool ok = true;
  const auto t0 = std::chrono::steady_clock::now();

  const PauliSum h = h2_hamiltonian();
  AnsatzTemplate tmpl;
  tmpl.n_system = 2;
  tmpl.depth = 3;
  EvolutionConfig cfg;
  cfg.regularization = RegularizationPolicy::diagonal(1e-6);
  const auto [rho, sol] = prepare_gibbs(h, tmpl, cfg);
  const DensityMatrix target = exact_gibbs({h, 1.0});

  const double f = fidelity(rho, target);
  ACC(ok, f >= 0.99);
  ACC(ok, f > 0.96);

  const double want[4][4] = {{0.10, -0.06, -0.06, 0.01},
                             {-0.06, 0.43, 0.02, -0.05},
                             {-0.06, 0.02, 0.43, -0.05},
                             {0.01, -0.05, -0.05, 0.05}};
  double max_dev = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      max_dev = std::max(max_dev,
                         std::abs(target.matrix(i, j).real() - want[i][j]));
  ACC(ok, max_dev < 0.005);
  ACC(ok, seconds_since(t0) < 10.0);
  report(2, "two-qubit Gibbs fidelity >= 0.99 and reference matrix match", ok);
}

TEST_CASE("criterion 3: Bell generative training over 10 seeds") {
  bool ok = true;
  const QbmModel model = bell_model();
  OptimizerConfig opt;
  opt.max_iterations = 50;
  EvolutionConfig evo;
  evo.regularization = RegularizationPolicy::diagonal(1e-6);
  const auto records = train_generative(model, bell_target(), opt, evo,
                                        derive_seeds(7, 10));
  ACC(ok, records.size() == 10);
  std::vector<double> finals;
  for (const auto& rec : records) {
    ACC(ok, !rec.aborted);
    ACC(ok, rec.l1_distance.size() == 51);
    finals.push_back(rec.l1_distance.back());
  }
  std::sort(finals.begin(), finals.end());
  const double median = 0.5 * (finals[4] + finals[5]);
  ACC(ok, median < 0.1);
  ACC(ok, finals.front() < 0.05);
  report(3, "median final l1 < 0.1 and best final l1 < 0.05", ok);
}

TEST_CASE("criterion 4: analytic loss gradient vs finite differences") {
  bool ok = true;
  QbmModel model = bell_model();
  const TargetDistribution target = bell_target();
  EvolutionConfig evo;
  evo.n_steps = 50;  // delta tau = 0.01
  evo.regularization = RegularizationPolicy::diagonal(1e-6);

  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  for (int draw = 0; draw < 3; ++draw) {
    for (int i = 0; i < 3; ++i) model.theta(i) = uniform(rng);
    const LossGradient g = loss_gradient(model, target, evo);
    auto loss_at = [&](const RealVector& theta) {
      QbmModel m = model;
      m.theta = theta;
      auto [rho, sol] = prepare_gibbs(m.hamiltonian(), m.ansatz, evo);
      return loss(visible_distribution(m, rho), target);
    };
    const double eps = 1e-4;
    for (int i = 0; i < 3; ++i) {
      RealVector plus = model.theta, minus = model.theta;
      plus(i) += eps;
      minus(i) -= eps;
      const double fd = (loss_at(plus) - loss_at(minus)) / (2.0 * eps);
      ACC(ok, std::abs(g.gradient(i) - fd) <=
                  std::max(1e-2 * std::abs(fd), 1e-4));
    }
  }
  report(4, "analytic dL/dtheta within 1e-2 of pipeline differences", ok);
}

TEST_CASE("criterion 5: purification identities") {
  bool ok = true;
  for (int n : {1, 2}) {
    AnsatzTemplate tmpl;
    tmpl.n_system = n;
    tmpl.depth = 1;
    const Circuit c = tmpl.build();
    const StateVector psi0 =
        apply(c, tmpl.initial_parameters(), StateVector::zero_state(c.n_qubits));
    std::vector<int> keep(n);
    for (int i = 0; i < n; ++i) keep[i] = i;
    const DensityMatrix red = partial_trace(DensityMatrix::pure(psi0), keep);
    const ComplexMatrix mm =
        ComplexMatrix::Identity(1 << n, 1 << n) / double(1 << n);
    ACC(ok, (red.matrix - mm).cwiseAbs().maxCoeff() < 1e-12);

    // Exact imaginary-time evolution of the purification reproduces the
    // Gibbs state after tracing the ancillas.
    const PauliSum h = n == 1 ? [] {
      PauliSum h1 = PauliSum::zero(1);
      h1.add_term(1.0, "Z");
      return h1;
    }() : h2_hamiltonian();
    const PauliSum h_eff = pad_to_register(h, c.n_qubits);
    const StateVector evolved = exact_ite(psi0, h_eff, 0.5);
    const DensityMatrix traced =
        partial_trace(DensityMatrix::pure(evolved), keep);
    const DensityMatrix gibbs = exact_gibbs({h, 1.0});
    ACC(ok, (traced.matrix - gibbs.matrix).cwiseAbs().maxCoeff() < 1e-8);

    // Zero-coefficient VarQITE preserves the maximally mixed marginal.
    PauliSum zero_h = PauliSum::zero(n);
    for (const auto& [coeff, word] : h.terms) zero_h.add_term(0.0, word.word);
    EvolutionConfig cfg;
    const auto [rho0, sol] = prepare_gibbs(zero_h, tmpl, cfg);
    ACC(ok, (rho0.matrix - mm).cwiseAbs().maxCoeff() < 1e-9);
  }
  report(5, "purification traces, exact ITE and zero-model evolution", ok);
}

TEST_CASE("criterion 6: property suites") {
  bool ok = true;
  std::mt19937_64 rng(907);

  // 200 randomized instances: A symmetric PSD.
  for (int trial = 0; trial < 200; ++trial) {
    RealVector omega;
    const Circuit c = random_rotation_circuit(rng, 3, 5, omega);
    const RealMatrix a = assemble_a(c, omega);
    if ((a - a.transpose()).cwiseAbs().maxCoeff() >= 1e-9) ok = false;
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(a);
    if (es.eigenvalues().minCoeff() < -1e-8) ok = false;
  }
  ACC(ok, ok);

  // State derivatives vs central finite differences.
  for (int trial = 0; trial < 10; ++trial) {
    RealVector omega;
    const Circuit c = random_rotation_circuit(rng, 3, 5, omega);
    const StateVector psi0 = StateVector::zero_state(3);
    const double step1 = 1e-5, step2 = 1e-4;
    for (int k = 0; k < 5; ++k) {
      const ComplexVector fd1 =
          (apply(c, shift_parameter(omega, k, step1), psi0).amplitudes -
           apply(c, shift_parameter(omega, k, -step1), psi0).amplitudes) /
          (2.0 * step1);
      ACC(ok, (d_state(c, omega, psi0, k) - fd1).cwiseAbs().maxCoeff() < 1e-8);
    }
    for (int k = 0; k < 5; ++k) {
      const ComplexVector fd2 =
          (apply(c, shift_parameter(omega, k, step2), psi0).amplitudes -
           2.0 * apply(c, omega, psi0).amplitudes +
           apply(c, shift_parameter(omega, k, -step2), psi0).amplitudes) /
          (step2 * step2);
      ACC(ok,
          (d2_state(c, omega, psi0, k, k) - fd2).cwiseAbs().maxCoeff() < 1e-6);
    }
  }

  // Hadamard-test assembly vs inner-product assembly.
  for (int trial = 0; trial < 5; ++trial) {
    RealVector omega;
    const Circuit c = random_rotation_circuit(rng, 2, 4, omega);
    PauliSum h = PauliSum::zero(2);
    h.add_term(0.7, "ZX");
    h.add_term(-0.4, "YI");
    ACC(ok, (assemble_a_hadamard(c, omega) - assemble_a(c, omega))
                    .cwiseAbs()
                    .maxCoeff() < 1e-10);
    ACC(ok, (assemble_c_hadamard(c, omega, h) - assemble_c(c, omega, h))
                    .cwiseAbs()
                    .maxCoeff() < 1e-10);
  }

  // Probability normalization, including a hidden-qubit model.
  QbmModel hidden;
  hidden.hamiltonian_template = {PauliString{"ZZ"}, PauliString{"XI"},
                                 PauliString{"IZ"}};
  hidden.theta = RealVector(3);
  hidden.theta << 0.4, -0.7, 0.3;
  hidden.visible_qubits = {1};
  hidden.hidden_qubits = {0};
  hidden.ansatz.n_system = 2;
  hidden.ansatz.depth = 2;
  for (const QbmModel* m : {&hidden}) {
    const std::vector<double> p_exact =
        visible_distribution(*m, exact_gibbs({m->hamiltonian(), 1.0}));
    EvolutionConfig evo;
    evo.regularization = RegularizationPolicy::diagonal(1e-6);
    auto [rho, sol] = prepare_gibbs(m->hamiltonian(), m->ansatz, evo);
    const std::vector<double> p_var = visible_distribution(*m, rho);
    double se = 0.0, sv = 0.0;
    for (double v : p_exact) se += v;
    for (double v : p_var) sv += v;
    ACC(ok, std::abs(se - 1.0) < 1e-9);
    ACC(ok, std::abs(sv - 1.0) < 1e-9);
  }

  // Every recorded loss stays above the target entropy.
  OptimizerConfig opt;
  opt.max_iterations = 5;
  EvolutionConfig evo;
  evo.regularization = RegularizationPolicy::diagonal(1e-6);
  const TargetDistribution target = bell_target();
  double entropy = 0.0;
  for (double p : target.probabilities)
    if (p > 0.0) entropy -= p * std::log(p);
  const auto records =
      train_generative(bell_model(), target, opt, evo, {2, 9});
  for (const auto& rec : records)
    for (double l : rec.loss) ACC(ok, l >= entropy - 1e-9);

  report(6, "metric PSD, derivative, normalization and loss-bound suites", ok);
}

TEST_CASE("criterion 7: circuit-count report") {
  bool ok = true;
  const int pts[3][3] = {{10, 4, 3}, {10, 8, 3}, {10, 4, 20}};
  for (const auto& pt : pts) {
    const int t = pt[0], q = pt[1], p = pt[2];
    ACC(ok, count_circuits(t, q, p, CountMode::PrepOnly).counted.total() ==
                prep_only_closed_form(t, q, p));
    ACC(ok, count_circuits(t, q, p, CountMode::Autodiff).counted.total() ==
                autodiff_closed_form(t, q, p));
    ACC(ok, count_circuits(t, q, p, CountMode::FiniteDiff).counted.total() ==
                finite_diff_closed_form(t, q, p));
    const bool autodiff_cheaper =
        autodiff_closed_form(t, q, p) <= finite_diff_closed_form(t, q, p);
    ACC(ok, autodiff_cheaper == (q < p));
  }
  report(7, "closed-form tallies and strategy crossover at reference points",
         ok);
}

TEST_CASE("criterion 8: discriminative pipeline") {
  bool ok = true;
  const Dataset data = generate_synthetic(11);
  const Preprocessor pre = fit_preprocessor(data.train, true);
  const auto train_items = group_unique(preprocess(pre, data.train));
  const auto test_items = group_unique(preprocess(pre, data.test));

  DiscTrainConfig cfg;
  cfg.seed = 11;
  const DiscTrainResult res = train_discriminative(train_items, cfg);
  ACC(ok, res.loss.size() >= 2);
  ACC(ok, res.loss.back() <= 0.8 * res.loss.front());

  AnsatzTemplate tmpl;
  tmpl.n_system = 2;
  tmpl.depth = 3;
  EvolutionConfig evo;
  evo.n_steps = 30;
  evo.regularization = RegularizationPolicy::diagonal(1e-6);

  // Majority-class baseline on the test split.
  long long fraud = 0, total = 0;
  for (const auto& item : test_items) {
    fraud += item.fraud_count;
    total += item.count;
  }
  const double baseline =
      std::max(fraud, total - fraud) / static_cast<double>(total);

  const MetricsReport metrics =
      evaluate(res.model, test_items, GibbsMode::VarQite, tmpl, evo);
  ACC(ok, metrics.total() == total);
  ACC(ok, metrics.accuracy >= baseline + 0.02);

  // Exact and evolved Gibbs states agree on every confident prediction.
  for (const auto& item : test_items) {
    const double pe =
        fraud_probability(res.model, item.x, GibbsMode::Exact, tmpl, evo);
    if (std::abs(pe - 0.5) <= 0.05) continue;
    const bool label_exact = pe > 0.5;
    const bool label_var =
        predict(res.model, item.x, GibbsMode::VarQite, tmpl, evo);
    ACC(ok, label_exact == label_var);
  }

  const MetricsReport recount =
      metrics_from_counts(metrics.tp, metrics.tn, metrics.fp, metrics.fn);
  ACC(ok, recount.accuracy == metrics.accuracy);
  ACC(ok, recount.precision == metrics.precision);
  ACC(ok, recount.recall == metrics.recall);
  ACC(ok, recount.f1 == metrics.f1);

  report(8, "loss reduction, accuracy over baseline and metric recount", ok);
}
