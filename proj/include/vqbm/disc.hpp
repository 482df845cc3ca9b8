#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vqbm/qbm.hpp"

// Discriminative pipeline: synthetic transaction data, discretizing
// preprocessor (1-D k-means bins + standardization), feature-conditioned
// two-qubit Hamiltonian, exact-mode training and VarQITE evaluation.
// Qubit 0 is hidden, qubit 1 is the visible label qubit (|1> = fraud).

namespace vqbm {

struct TransactionRecord {
  double time = 0.0;    // hour of day in [0, 24)
  double amount = 0.0;  // transaction amount, nonnegative
  int zip = 0;          // coarse region code
  int mcc = 0;          // merchant category code, [0, 9999]
  bool fraud = false;
};

struct Dataset {
  std::vector<TransactionRecord> train;
  std::vector<TransactionRecord> test;
};

/// Seeded synthetic generator with a planted high-risk pattern
/// (night-time, high-amount transactions are mostly fraudulent).
Dataset generate_synthetic(std::uint64_t seed, int n_train = 500,
                           int n_test = 250);

std::vector<TransactionRecord> read_transactions_csv(const std::string& path);
void write_transactions_csv(const std::string& path,
                            const std::vector<TransactionRecord>& records);

/// Fitted on training data only: k-means (k = 3) bin edges for time, amount
/// and zip, mcc grouped by floor(mcc / 1000), then per-feature
/// standardization of the discretized values.
struct Preprocessor {
  std::vector<std::array<double, 2>> bin_edges;  // time, amount, zip
  RealVector mean;    // length 4, over discretized train features
  RealVector stddev;  // same
  bool append_bias = false;  // optional trailing constant-1 feature

  static constexpr int d = 4;
  int dim() const { return d + (append_bias ? 1 : 0); }
  RealVector transform(const TransactionRecord& r) const;
};

Preprocessor fit_preprocessor(const std::vector<TransactionRecord>& train,
                              bool append_bias = false);

/// Lloyd 1-D k-means, centroids initialized at the 1/6, 3/6, 5/6 quantiles
/// of the sorted values; returns ascending centroids. Throws if the data has
/// fewer than k distinct values.
std::vector<double> kmeans_1d(std::vector<double> values, int k,
                              int max_iterations = 100, double tol = 1e-9);

struct LabeledFeature {
  RealVector x;  // transformed features, length Preprocessor::d
  bool fraud = false;
};

std::vector<LabeledFeature> preprocess(
    const Preprocessor& pre, const std::vector<TransactionRecord>& records);

/// Deduplicated feature vector with its label counts.
struct UniqueItem {
  RealVector x;
  int count = 0;
  int fraud_count = 0;
};

std::vector<UniqueItem> group_unique(const std::vector<LabeledFeature>& items);

/// H_theta(x) = sum_i (theta_i . x) h_i with template words
/// ZZ, ZI, IZ, XI, IX on (hidden, visible).
struct ConditionedHamiltonian {
  std::vector<RealVector> theta;  // 5 vectors of length d

  static ConditionedHamiltonian zero(int d);
  RealVector flatten() const;
  void unflatten(const RealVector& flat);
};

PauliSum condition(const ConditionedHamiltonian& h, const RealVector& x);

enum class GibbsMode { Exact, VarQite };

/// p(fraud | x) for the Gibbs state of the conditioned Hamiltonian (kbt = 1).
double fraud_probability(const ConditionedHamiltonian& h, const RealVector& x,
                         GibbsMode mode, const AnsatzTemplate& tmpl,
                         const EvolutionConfig& evo);

/// Average conditional cross-entropy over the grouped dataset, each unique
/// feature vector weighted by its multiplicity.
double conditional_loss(const ConditionedHamiltonian& h,
                        const std::vector<UniqueItem>& data, GibbsMode mode,
                        const AnsatzTemplate& tmpl, const EvolutionConfig& evo);

struct DiscTrainConfig {
  std::uint64_t seed = 0;
  int max_iterations = 100;
  double fd_step = 1e-6;
  int stagnation_limit = 10;  // stop after this many non-improving iterations
  double theta_bound = 1.0;   // box constraint |theta_ij| <= theta_bound
};

struct DiscTrainResult {
  ConditionedHamiltonian model;
  std::vector<double> loss;  // accepted losses, index 0 = initial
  int iterations = 0;
};

/// Exact-mode training: BFGS with backtracking line search on finite
/// difference gradients, theta entries initialized U[-1, 1].
DiscTrainResult train_discriminative(const std::vector<UniqueItem>& train,
                                     const DiscTrainConfig& cfg);

struct MetricsReport {
  long long tp = 0, tn = 0, fp = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  long long total() const { return tp + tn + fp + fn; }
};

MetricsReport metrics_from_counts(long long tp, long long tn, long long fp,
                                  long long fn);

/// Predicted label: fraud iff p(fraud | x) > 0.5 (ties resolve to valid).
bool predict(const ConditionedHamiltonian& h, const RealVector& x,
             GibbsMode mode, const AnsatzTemplate& tmpl,
             const EvolutionConfig& evo);

/// Confusion counts and derived metrics over a grouped dataset, one Gibbs
/// preparation per unique feature vector.
MetricsReport evaluate(const ConditionedHamiltonian& h,
                       const std::vector<UniqueItem>& data, GibbsMode mode,
                       const AnsatzTemplate& tmpl, const EvolutionConfig& evo);

}  // namespace vqbm
