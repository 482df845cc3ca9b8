// vqbm: experiment driver for Gibbs preparation, generative training, the
// discriminative pipeline and circuit-count reports. Exit codes: 0 success,
// 1 validation error, 2 numeric failure. All data files are deterministic
// for a fixed config and seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vqbm/counts.hpp"
#include "vqbm/disc.hpp"
#include "vqbm/qbm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vqbm;

namespace {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config file not found: " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw ValidationError("config parse error in " + path + ": " + e.what());
  }
  return cfg;
}

PauliSum parse_hamiltonian(const json& terms) {
  if (!terms.is_array() || terms.empty())
    throw ValidationError("hamiltonian must be a nonempty term array");
  int n = -1;
  PauliSum h;
  for (const auto& t : terms) {
    if (!t.contains("coeff") || !t.contains("word"))
      throw ValidationError("hamiltonian term needs coeff and word fields");
    const std::string word = t.at("word").get<std::string>();
    for (char c : word) {
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
        throw ValidationError("invalid Pauli token '" + word +
                              "': letters must be I, X, Y or Z");
    }
    if (n < 0) {
      n = static_cast<int>(word.size());
      h = PauliSum::zero(n);
    } else if (static_cast<int>(word.size()) != n) {
      throw ValidationError("hamiltonian words must share one length");
    }
    h.add_term(t.at("coeff").get<double>(), word);
  }
  return h;
}

RegularizationPolicy parse_regularization(const json& cfg) {
  if (!cfg.contains("regularization"))
    return RegularizationPolicy::tikhonov_default();
  const json& r = cfg.at("regularization");
  const std::string scheme = r.value("scheme", "tikhonov-grid");
  if (scheme == "tikhonov-grid") {
    RegularizationPolicy p = RegularizationPolicy::tikhonov_default();
    if (r.contains("lambda_grid"))
      p.lambda_grid = r.at("lambda_grid").get<std::vector<double>>();
    return p;
  }
  if (scheme == "diagonal-perturbation")
    return RegularizationPolicy::diagonal(r.value("epsilon", 1e-6));
  throw ValidationError("unknown regularization scheme: " + scheme);
}

EvolutionConfig parse_evolution(const json& cfg, double kbt) {
  EvolutionConfig evo;
  evo.n_steps = cfg.value("steps", 10);
  evo.tau = cfg.value("tau", 1.0 / (2.0 * kbt));
  evo.regularization = parse_regularization(cfg);
  if (evo.n_steps < 1) throw ValidationError("steps must be >= 1");
  if (!(evo.tau > 0.0)) throw ValidationError("tau must be positive");
  return evo;
}

json density_to_json(const DensityMatrix& rho) {
  const auto dim = rho.matrix.rows();
  json real = json::array(), imag = json::array();
  for (Eigen::Index i = 0; i < dim; ++i) {
    json rrow = json::array(), irow = json::array();
    for (Eigen::Index j = 0; j < dim; ++j) {
      rrow.push_back(rho.matrix(i, j).real());
      irow.push_back(rho.matrix(i, j).imag());
    }
    real.push_back(rrow);
    imag.push_back(irow);
  }
  return {{"n_qubits", rho.n_qubits}, {"real", real}, {"imag", imag}};
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

fs::path prepare_out_dir(const std::string& out) {
  if (out.empty()) throw ValidationError("--out directory is required");
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

int cmd_gibbs(const std::string& config_path, const std::string& out,
              bool oracle_check) {
  const json cfg = load_config(config_path);
  const PauliSum h = parse_hamiltonian(cfg.at("hamiltonian"));
  const double kbt = cfg.value("kbt", 1.0);
  if (!(kbt > 0.0)) throw ValidationError("kbt must be positive");
  const EvolutionConfig evo = parse_evolution(cfg, kbt);

  AnsatzTemplate tmpl;
  tmpl.n_system = h.n_qubits;
  tmpl.depth = cfg.value("depth", 2);
  if (tmpl.depth < 1) throw ValidationError("depth must be >= 1");

  const fs::path dir = prepare_out_dir(out);
  const Circuit circuit = tmpl.build();
  std::vector<int> keep(tmpl.n_system);
  for (int i = 0; i < tmpl.n_system; ++i) keep[i] = i;
  const DensityMatrix target = exact_gibbs({h, kbt});

  std::string csv = oracle_check ? "step,omega_norm,residual,fidelity\n"
                                 : "step,omega_norm,residual\n";
  auto on_step = [&](int step, const RealVector& omega, const RealVector&,
                     double residual) {
    csv += std::to_string(step) + "," + fmt(omega.norm()) + "," +
           fmt(residual);
    if (oracle_check) {
      const StateVector psi =
          apply(circuit, omega, StateVector::zero_state(circuit.n_qubits));
      const DensityMatrix reduced =
          partial_trace(DensityMatrix::pure(psi), keep);
      csv += "," + fmt(fidelity(reduced, target));
    }
    csv += "\n";
  };

  auto [rho, sol] = prepare_gibbs(h, tmpl, evo, on_step);

  write_text(dir / "steps.csv", csv);
  write_json(dir / "final_state.json", density_to_json(rho));

  json meta = {{"command", "gibbs"},
               {"config", cfg},
               {"oracle_check", oracle_check},
               {"circuit_counts",
                {{"a_entries", sol.circuit_counts.a_entries},
                 {"c_entries", sol.circuit_counts.c_entries},
                 {"total", sol.circuit_counts.total()}}}};
  if (oracle_check) meta["final_fidelity"] = fidelity(rho, target);
  write_json(dir / "metadata.json", meta);
  return 0;
}

int cmd_train_gen(const std::string& config_path, const std::string& out,
                  std::uint64_t seed) {
  const json cfg = load_config(config_path);

  QbmModel model;
  for (const auto& w : cfg.at("hamiltonian_template"))
    model.hamiltonian_template.push_back(PauliString{w.get<std::string>()});
  if (model.hamiltonian_template.empty())
    throw ValidationError("hamiltonian_template must be nonempty");
  const int n_system =
      model.hamiltonian_template.front().n_qubits();
  for (const auto& w : model.hamiltonian_template) {
    for (char c : w.word) {
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
        throw ValidationError("invalid Pauli token '" + w.word + "'");
    }
    if (w.n_qubits() != n_system)
      throw ValidationError("template words must share one length");
  }
  model.theta = RealVector::Zero(model.n_theta());
  model.visible_qubits = cfg.value("visible", std::vector<int>{});
  model.hidden_qubits = cfg.value("hidden", std::vector<int>{});
  if (model.visible_qubits.empty()) {
    model.visible_qubits.resize(n_system);
    for (int i = 0; i < n_system; ++i) model.visible_qubits[i] = i;
  }
  model.kbt = cfg.value("kbt", 1.0);
  model.ansatz.n_system = n_system;
  model.ansatz.depth = cfg.value("depth", 1);
  model.validate();

  TargetDistribution target{cfg.at("target").get<std::vector<double>>()};
  const std::size_t n_outcomes =
      std::size_t{1} << model.visible_qubits.size();
  if (target.probabilities.size() != n_outcomes)
    throw ValidationError("target length must be 2^|visible|");

  OptimizerConfig opt;
  if (cfg.contains("optimizer")) {
    const json& o = cfg.at("optimizer");
    opt.learning_rate = o.value("learning_rate", opt.learning_rate);
    opt.beta1 = o.value("beta1", opt.beta1);
    opt.beta2 = o.value("beta2", opt.beta2);
    opt.max_iterations = o.value("iterations", 50);
  } else {
    opt.max_iterations = 50;
  }
  if (opt.max_iterations < 0)
    throw ValidationError("iterations must be >= 0");

  const EvolutionConfig evo = parse_evolution(cfg, model.kbt);
  const int n_seeds = cfg.value("n_seeds", 10);
  if (n_seeds < 1) throw ValidationError("n_seeds must be >= 1");

  // Per-run sub-seeds derived from the top-level seed (splitmix64 step).
  std::vector<std::uint64_t> seeds(n_seeds);
  std::uint64_t state = seed;
  for (int i = 0; i < n_seeds; ++i) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    seeds[i] = z ^ (z >> 31);
  }

  const auto records = train_generative(model, target, opt, evo, seeds);

  const fs::path dir = prepare_out_dir(out);
  json summary;
  summary["command"] = "train-gen";
  json per_seed = json::array();
  std::vector<double> finals;
  int best = -1, worst = -1;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    std::string csv = "iteration,loss,l1_distance\n";
    for (std::size_t i = 0; i < rec.loss.size(); ++i) {
      csv += std::to_string(i) + "," + fmt(rec.loss[i]) + "," +
             fmt(rec.l1_distance[i]) + "\n";
    }
    write_text(dir / ("seed_" + std::to_string(r) + ".csv"), csv);

    json entry = {{"seed", rec.seed}, {"aborted", rec.aborted}};
    if (rec.aborted) entry["diagnostic"] = rec.diagnostic;
    if (!rec.l1_distance.empty()) {
      entry["final_l1"] = rec.l1_distance.back();
      entry["final_loss"] = rec.loss.back();
      entry["final_distribution"] = rec.final_distribution;
      if (!rec.aborted) {
        finals.push_back(rec.l1_distance.back());
        if (best < 0 || rec.l1_distance.back() <
                            records[best].l1_distance.back())
          best = static_cast<int>(r);
        if (worst < 0 || rec.l1_distance.back() >
                             records[worst].l1_distance.back())
          worst = static_cast<int>(r);
      }
    }
    per_seed.push_back(entry);
  }
  summary["runs"] = per_seed;

  if (!finals.empty()) {
    std::vector<double> sorted = finals;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    summary["median_final_l1"] =
        m % 2 == 1 ? sorted[m / 2]
                   : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    summary["best_final_l1"] = sorted.front();
    summary["best_final_distribution"] =
        records[best].final_distribution;
    summary["worst_final_distribution"] =
        records[worst].final_distribution;
  }

  // Mean/std curves over seeds that completed every iteration.
  std::size_t full_len = 0;
  for (const auto& rec : records)
    if (!rec.aborted) full_len = std::max(full_len, rec.loss.size());
  json mean_loss = json::array(), std_loss = json::array();
  json mean_l1 = json::array(), std_l1 = json::array();
  for (std::size_t i = 0; i < full_len; ++i) {
    double sl = 0, sl2 = 0, s1 = 0, s12 = 0;
    int n = 0;
    for (const auto& rec : records) {
      if (rec.aborted || i >= rec.loss.size()) continue;
      sl += rec.loss[i];
      sl2 += rec.loss[i] * rec.loss[i];
      s1 += rec.l1_distance[i];
      s12 += rec.l1_distance[i] * rec.l1_distance[i];
      ++n;
    }
    if (n == 0) break;
    const double ml = sl / n, m1 = s1 / n;
    mean_loss.push_back(ml);
    std_loss.push_back(std::sqrt(std::max(sl2 / n - ml * ml, 0.0)));
    mean_l1.push_back(m1);
    std_l1.push_back(std::sqrt(std::max(s12 / n - m1 * m1, 0.0)));
  }
  summary["mean_loss"] = mean_loss;
  summary["std_loss"] = std_loss;
  summary["mean_l1"] = mean_l1;
  summary["std_l1"] = std_l1;
  write_json(dir / "summary.json", summary);

  json meta = {{"command", "train-gen"},
               {"config", cfg},
               {"top_level_seed", seed},
               {"optimizer",
                "AMSGrad with bias-corrected first and second moments and "
                "componentwise max of the second moment"}};
  write_json(dir / "metadata.json", meta);
  return 0;
}

int cmd_disc(const std::string& config_path, const std::string& out,
             std::uint64_t seed) {
  const json cfg = load_config(config_path);
  const fs::path dir = prepare_out_dir(out);

  std::vector<TransactionRecord> train, test;
  if (cfg.contains("train_path") || cfg.contains("test_path")) {
    if (!cfg.contains("train_path") || !cfg.contains("test_path"))
      throw ValidationError("train_path and test_path must both be given");
    const std::string tr = cfg.at("train_path").get<std::string>();
    const std::string te = cfg.at("test_path").get<std::string>();
    if (!fs::exists(tr))
      throw ValidationError("missing dataset path: " + tr);
    if (!fs::exists(te))
      throw ValidationError("missing dataset path: " + te);
    train = read_transactions_csv(tr);
    test = read_transactions_csv(te);
  } else {
    int n_train = 500, n_test = 250;
    if (cfg.contains("generator")) {
      n_train = cfg.at("generator").value("n_train", 500);
      n_test = cfg.at("generator").value("n_test", 250);
    }
    Dataset data = generate_synthetic(seed, n_train, n_test);
    train = std::move(data.train);
    test = std::move(data.test);
    write_transactions_csv((dir / "train.csv").string(), train);
    write_transactions_csv((dir / "test.csv").string(), test);
  }

  std::string stage = "preprocessing";
  try {
    const Preprocessor pre =
        fit_preprocessor(train, cfg.value("bias_feature", false));
    const auto train_groups = group_unique(preprocess(pre, train));
    const auto test_groups = group_unique(preprocess(pre, test));

    stage = "training";
    DiscTrainConfig tcfg;
    tcfg.seed = seed;
    tcfg.max_iterations = cfg.value("train_iterations", 100);
    tcfg.theta_bound = cfg.value("theta_bound", 1.0);
    const DiscTrainResult trained = train_discriminative(train_groups, tcfg);

    stage = "evaluation";
    AnsatzTemplate tmpl;
    tmpl.n_system = 2;
    tmpl.depth = cfg.value("depth", 3);
    const EvolutionConfig evo = parse_evolution(cfg, 1.0);
    const MetricsReport m = evaluate(trained.model, test_groups,
                                     GibbsMode::VarQite, tmpl, evo);

    long long n_fraud = 0, n_total = 0;
    for (const auto& r : test) {
      n_fraud += r.fraud ? 1 : 0;
      ++n_total;
    }
    const double baseline =
        static_cast<double>(std::max(n_fraud, n_total - n_fraud)) / n_total;

    json theta = json::array();
    for (const auto& v : trained.model.theta)
      theta.push_back(std::vector<double>(v.data(), v.data() + v.size()));

    json report = {{"command", "disc"},
                   {"accuracy", m.accuracy},
                   {"precision", m.precision},
                   {"recall", m.recall},
                   {"f1", m.f1},
                   {"confusion",
                    {{"tp", m.tp}, {"tn", m.tn}, {"fp", m.fp}, {"fn", m.fn}}},
                   {"majority_baseline", baseline},
                   {"near_baseline", m.accuracy < baseline + 0.02},
                   {"initial_loss", trained.loss.front()},
                   {"final_loss", trained.loss.back()},
                   {"train_iterations", trained.iterations},
                   {"theta", theta}};
    write_json(dir / "metrics.json", report);

    json meta = {{"command", "disc"}, {"config", cfg}, {"seed", seed}};
    write_json(dir / "metadata.json", meta);
    return 0;
  } catch (const std::exception& e) {
    throw std::runtime_error("stage " + stage + ": " + e.what());
  }
}

int cmd_count(int t, int q, int p, const std::string& mode_name,
              const std::string& out) {
  CountMode mode;
  if (mode_name == "prep-only")
    mode = CountMode::PrepOnly;
  else if (mode_name == "autodiff")
    mode = CountMode::Autodiff;
  else if (mode_name == "finite-diff")
    mode = CountMode::FiniteDiff;
  else
    throw ValidationError("unknown mode: " + mode_name);

  const CircuitCountReport r = count_circuits(t, q, p, mode);
  json j = {{"mode", mode_name},
            {"t", r.t},
            {"q", r.q},
            {"p", r.p},
            {"counted",
             {{"a_entries", r.counted.a_entries},
              {"c_entries", r.counted.c_entries},
              {"da_entries", r.counted.da_entries},
              {"dc_entries", r.counted.dc_entries},
              {"shift_evaluations", r.counted.shift_evaluations},
              {"total", r.counted.total()}}},
            {"asymptotic_class", r.asymptotic_class},
            {"closed_forms",
             {{"prep_only", prep_only_closed_form(t, q, p)},
              {"autodiff", autodiff_closed_form(t, q, p)},
              {"finite_diff", finite_diff_closed_form(t, q, p)}}}};
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    const fs::path dir = prepare_out_dir(out);
    write_json(dir / "circuit_counts.json", j);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational quantum Boltzmann machine toolkit"};
  app.require_subcommand(1);

  std::string config, out;
  std::uint64_t seed = 0;
  bool oracle_check = false;

  auto* gibbs = app.add_subcommand("gibbs", "VarQITE Gibbs preparation");
  gibbs->add_option("--config", config, "JSON config path")->required();
  gibbs->add_option("--out", out, "output directory")->required();
  gibbs->add_flag("--oracle-check", oracle_check,
                  "add exact-oracle fidelity columns");

  auto* tg = app.add_subcommand("train-gen", "generative QBM training");
  tg->add_option("--config", config, "JSON config path")->required();
  tg->add_option("--out", out, "output directory")->required();
  tg->add_option("--seed", seed, "top-level seed");

  auto* disc = app.add_subcommand("disc", "discriminative pipeline");
  disc->add_option("--config", config, "JSON config path")->required();
  disc->add_option("--out", out, "output directory")->required();
  disc->add_option("--seed", seed, "dataset / init seed");

  int t = 10, q = 4, p = 3;
  std::string mode = "prep-only";
  auto* cc = app.add_subcommand("count-circuits", "circuit-count report");
  cc->add_option("--t", t, "time steps")->required();
  cc->add_option("--q", q, "circuit parameters")->required();
  cc->add_option("--p", p, "Hamiltonian parameters")->required();
  cc->add_option("--mode", mode, "prep-only | autodiff | finite-diff")
      ->required();
  cc->add_option("--out", out, "output directory (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gibbs->parsed()) return cmd_gibbs(config, out, oracle_check);
    if (tg->parsed()) return cmd_train_gen(config, out, seed);
    if (disc->parsed()) return cmd_disc(config, out, seed);
    if (cc->parsed()) return cmd_count(t, q, p, mode, out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
