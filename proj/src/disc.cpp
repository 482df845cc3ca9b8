#include "vqbm/disc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace vqbm {

namespace {

constexpr double kProbClamp = 1e-12;

const std::vector<std::string> kTemplateWords = {"ZZ", "ZI", "IZ", "XI", "IX"};

}  // namespace

Dataset generate_synthetic(std::uint64_t seed, int n_train, int n_test) {
  if (n_train < 1 || n_test < 1)
    throw std::invalid_argument("dataset sizes must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> zip_dist(0, 2);
  std::uniform_int_distribution<int> mcc_dist(0, 9999);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * unit(rng);
  };

  // Planted pattern: night-time (19-23.5h) high-amount (170-400) corner is
  // fraudulent with probability 0.9; everything else with probability 0.02.
  // Non-corner draws never combine night with a high amount, so the corner
  // is exactly the (top time bin, top amount bin) cell after discretization.
  auto generate = [&](int n, double corner_p) {
    std::vector<TransactionRecord> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
      TransactionRecord r;
      const bool corner = unit(rng) < corner_p;
      if (corner) {
        r.time = uniform(19.0, 23.5);
        r.amount = uniform(170.0, 400.0);
      } else {
        const double u = unit(rng);
        const int cluster = u < 0.40 ? 0 : (u < 0.75 ? 1 : 2);
        r.time = cluster == 0   ? uniform(1.0, 7.0)
                 : cluster == 1 ? uniform(10.0, 16.0)
                                : uniform(19.0, 23.5);
        if (cluster == 2) {
          r.amount = unit(rng) < 0.5625 ? uniform(5.0, 45.0)
                                        : uniform(60.0, 140.0);
        } else {
          const double v = unit(rng);
          r.amount = v < 0.45   ? uniform(5.0, 45.0)
                     : v < 0.80 ? uniform(60.0, 140.0)
                                : uniform(170.0, 400.0);
        }
      }
      r.zip = zip_dist(rng);
      r.mcc = mcc_dist(rng);
      r.fraud = unit(rng) < (corner ? 0.90 : 0.02);
      out.push_back(r);
    }
    return out;
  };

  Dataset data;
  data.train = generate(n_train, (0.15 - 0.02) / 0.88);
  data.test = generate(n_test, (0.10 - 0.02) / 0.88);
  return data;
}

std::vector<TransactionRecord> read_transactions_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "time,amount,zip,mcc,label")
    throw std::runtime_error("bad header in " + path);

  std::vector<TransactionRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 5)
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": expected 5 fields");
    TransactionRecord r;
    try {
      r.time = std::stod(fields[0]);
      r.amount = std::stod(fields[1]);
      r.zip = std::stoi(fields[2]);
      r.mcc = std::stoi(fields[3]);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": malformed numeric field");
    }
    if (fields[4] == "fraud")
      r.fraud = true;
    else if (fields[4] == "valid")
      r.fraud = false;
    else
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": label must be fraud or valid");
    records.push_back(r);
  }
  return records;
}

void write_transactions_csv(const std::string& path,
                            const std::vector<TransactionRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "time,amount,zip,mcc,label\n";
  char buf[128];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%d,%d,%s", r.time, r.amount,
                  r.zip, r.mcc, r.fraud ? "fraud" : "valid");
    out << buf << '\n';
  }
}

std::vector<double> kmeans_1d(std::vector<double> values, int k,
                              int max_iterations, double tol) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  std::sort(values.begin(), values.end());
  const int n = static_cast<int>(values.size());
  int distinct = n == 0 ? 0 : 1;
  for (int i = 1; i < n; ++i)
    if (values[i] != values[i - 1]) ++distinct;
  if (distinct < k)
    throw std::invalid_argument("k-means needs at least k distinct values");

  std::vector<double> centroids(k);
  for (int j = 0; j < k; ++j) {
    const double quantile = (2.0 * j + 1.0) / (2.0 * k);
    int idx = static_cast<int>(quantile * n);
    centroids[j] = values[std::min(idx, n - 1)];
  }

  std::vector<double> sums(k), counts(k);
  for (int it = 0; it < max_iterations; ++it) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0.0);
    for (double v : values) {
      int best = 0;
      double best_d = std::abs(v - centroids[0]);
      for (int j = 1; j < k; ++j) {
        const double d = std::abs(v - centroids[j]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      sums[best] += v;
      counts[best] += 1.0;
    }
    double shift = 0.0;
    for (int j = 0; j < k; ++j) {
      if (counts[j] == 0.0) continue;  // empty cluster keeps its centroid
      const double next = sums[j] / counts[j];
      shift = std::max(shift, std::abs(next - centroids[j]));
      centroids[j] = next;
    }
    if (shift < tol) break;
  }
  std::sort(centroids.begin(), centroids.end());
  return centroids;
}

namespace {

std::array<double, 2> edges_from_centroids(const std::vector<double>& c) {
  return {(c[0] + c[1]) / 2.0, (c[1] + c[2]) / 2.0};
}

double bin_value(double v, const std::array<double, 2>& edges) {
  return v <= edges[0] ? 0.0 : (v <= edges[1] ? 1.0 : 2.0);
}

RealVector discretize(const TransactionRecord& r,
                      const std::vector<std::array<double, 2>>& edges) {
  RealVector x(Preprocessor::d);
  x(0) = bin_value(r.time, edges[0]);
  x(1) = bin_value(r.amount, edges[1]);
  x(2) = bin_value(static_cast<double>(r.zip), edges[2]);
  x(3) = static_cast<double>(r.mcc / 1000);
  return x;
}

}  // namespace

Preprocessor fit_preprocessor(const std::vector<TransactionRecord>& train,
                              bool append_bias) {
  if (train.empty()) throw std::invalid_argument("empty training set");
  std::vector<double> time, amount, zip;
  time.reserve(train.size());
  amount.reserve(train.size());
  zip.reserve(train.size());
  for (const auto& r : train) {
    time.push_back(r.time);
    amount.push_back(r.amount);
    zip.push_back(static_cast<double>(r.zip));
  }

  Preprocessor pre;
  pre.bin_edges.push_back(edges_from_centroids(kmeans_1d(time, 3)));
  pre.bin_edges.push_back(edges_from_centroids(kmeans_1d(amount, 3)));
  pre.bin_edges.push_back(edges_from_centroids(kmeans_1d(zip, 3)));

  RealMatrix features(train.size(), Preprocessor::d);
  for (std::size_t i = 0; i < train.size(); ++i)
    features.row(i) = discretize(train[i], pre.bin_edges).transpose();

  pre.mean = features.colwise().mean();
  pre.stddev = RealVector(Preprocessor::d);
  for (int j = 0; j < Preprocessor::d; ++j) {
    const double var =
        (features.col(j).array() - pre.mean(j)).square().mean();
    pre.stddev(j) = std::sqrt(var);
    if (!(pre.stddev(j) > 0.0))
      throw std::runtime_error("degenerate feature " + std::to_string(j) +
                               ": zero variance on training data");
  }
  pre.append_bias = append_bias;
  return pre;
}

RealVector Preprocessor::transform(const TransactionRecord& r) const {
  if (bin_edges.size() != 3 || mean.size() != d || stddev.size() != d)
    throw std::logic_error("preprocessor not fitted");
  const RealVector z =
      (discretize(r, bin_edges) - mean).cwiseQuotient(stddev);
  if (!append_bias) return z;
  RealVector x(d + 1);
  x.head(d) = z;
  x(d) = 1.0;  // the bias entry is not standardized
  return x;
}

std::vector<LabeledFeature> preprocess(
    const Preprocessor& pre, const std::vector<TransactionRecord>& records) {
  std::vector<LabeledFeature> out;
  out.reserve(records.size());
  for (const auto& r : records)
    out.push_back({pre.transform(r), r.fraud});
  return out;
}

std::vector<UniqueItem> group_unique(const std::vector<LabeledFeature>& items) {
  // Transformed features of equal records are bitwise equal, so exact keys
  // are safe here.
  std::map<std::vector<double>, std::pair<int, int>> groups;
  for (const auto& it : items) {
    std::vector<double> key(it.x.data(), it.x.data() + it.x.size());
    auto& g = groups[key];
    g.first += 1;
    g.second += it.fraud ? 1 : 0;
  }
  std::vector<UniqueItem> out;
  out.reserve(groups.size());
  for (const auto& [key, g] : groups) {
    UniqueItem u;
    u.x = Eigen::Map<const RealVector>(key.data(), key.size());
    u.count = g.first;
    u.fraud_count = g.second;
    out.push_back(std::move(u));
  }
  return out;
}

ConditionedHamiltonian ConditionedHamiltonian::zero(int d) {
  ConditionedHamiltonian h;
  h.theta.assign(kTemplateWords.size(), RealVector::Zero(d));
  return h;
}

RealVector ConditionedHamiltonian::flatten() const {
  const int d = static_cast<int>(theta.at(0).size());
  RealVector flat(static_cast<int>(theta.size()) * d);
  for (std::size_t i = 0; i < theta.size(); ++i)
    flat.segment(static_cast<int>(i) * d, d) = theta[i];
  return flat;
}

void ConditionedHamiltonian::unflatten(const RealVector& flat) {
  const int terms = static_cast<int>(kTemplateWords.size());
  if (flat.size() % terms != 0)
    throw std::invalid_argument("flat parameter length mismatch");
  const int d = static_cast<int>(flat.size()) / terms;
  theta.assign(terms, RealVector::Zero(d));
  for (int i = 0; i < terms; ++i) theta[i] = flat.segment(i * d, d);
}

PauliSum condition(const ConditionedHamiltonian& h, const RealVector& x) {
  if (h.theta.size() != kTemplateWords.size())
    throw std::invalid_argument("conditioned Hamiltonian needs 5 theta vectors");
  PauliSum sum = PauliSum::zero(2);
  for (std::size_t i = 0; i < kTemplateWords.size(); ++i) {
    if (h.theta[i].size() != x.size())
      throw std::invalid_argument("feature dimension mismatch");
    sum.add_term(h.theta[i].dot(x), kTemplateWords[i]);
  }
  return sum;
}

double fraud_probability(const ConditionedHamiltonian& h, const RealVector& x,
                         GibbsMode mode, const AnsatzTemplate& tmpl,
                         const EvolutionConfig& evo) {
  const PauliSum hx = condition(h, x);
  DensityMatrix rho;
  if (mode == GibbsMode::Exact) {
    rho = exact_gibbs({hx, 1.0});
  } else {
    rho = prepare_gibbs(hx, tmpl, evo).first;
  }
  ProjectorSpec proj;
  proj.visible_qubits = {1};
  proj.outcome_bits = {1};
  return measure_prob(rho, proj);
}

double conditional_loss(const ConditionedHamiltonian& h,
                        const std::vector<UniqueItem>& data, GibbsMode mode,
                        const AnsatzTemplate& tmpl,
                        const EvolutionConfig& evo) {
  long long total = 0;
  for (const auto& u : data) total += u.count;
  if (total == 0) throw std::invalid_argument("empty dataset");

  double loss_sum = 0.0;
  for (const auto& u : data) {
    const double p1 =
        std::max(fraud_probability(h, u.x, mode, tmpl, evo), kProbClamp);
    const double p0 = std::max(1.0 - p1, kProbClamp);
    loss_sum -= u.fraud_count * std::log(p1) +
                (u.count - u.fraud_count) * std::log(p0);
  }
  return loss_sum / static_cast<double>(total);
}

DiscTrainResult train_discriminative(const std::vector<UniqueItem>& train,
                                     const DiscTrainConfig& cfg) {
  const AnsatzTemplate unused_tmpl{};
  const EvolutionConfig unused_evo{};
  const int d = static_cast<int>(train.at(0).x.size());
  const int n = static_cast<int>(kTemplateWords.size()) * d;

  auto f = [&](const RealVector& flat) {
    ConditionedHamiltonian h;
    h.unflatten(flat);
    return conditional_loss(h, train, GibbsMode::Exact, unused_tmpl,
                            unused_evo);
  };
  auto grad = [&](const RealVector& flat) {
    RealVector g(n);
    for (int i = 0; i < n; ++i) {
      RealVector plus = flat, minus = flat;
      plus(i) += cfg.fd_step;
      minus(i) -= cfg.fd_step;
      g(i) = (f(plus) - f(minus)) / (2.0 * cfg.fd_step);
    }
    return g;
  };

  if (!(cfg.theta_bound > 0.0))
    throw std::invalid_argument("theta_bound must be positive");
  auto project = [&](RealVector v) {
    return v.cwiseMax(-cfg.theta_bound).cwiseMin(cfg.theta_bound).eval();
  };

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  RealVector theta(n);
  for (int i = 0; i < n; ++i) theta(i) = uniform(rng);
  theta = project(theta);

  DiscTrainResult result;
  double f_cur = f(theta);
  result.loss.push_back(f_cur);
  RealVector g_cur = grad(theta);
  RealMatrix h_inv = RealMatrix::Identity(n, n);

  RealVector best_theta = theta;
  double best_f = f_cur;
  int stagnant = 0;

  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (!g_cur.allFinite())
      throw std::runtime_error("non-finite gradient at iteration " +
                               std::to_string(it));
    RealVector direction = -(h_inv * g_cur);
    if (direction.dot(g_cur) >= 0.0) {  // lost descent property, reset
      h_inv = RealMatrix::Identity(n, n);
      direction = -g_cur;
    }

    // Backtracking line search on the box-projected step; the projected
    // decrease condition replaces the plain Armijo slope term.
    double alpha = 1.0;
    double f_next = std::numeric_limits<double>::infinity();
    RealVector theta_next;
    bool accepted = false;
    while (alpha > 1e-12) {
      theta_next = project(theta + alpha * direction);
      const RealVector step = theta_next - theta;
      const double decrease = step.dot(g_cur);
      f_next = f(theta_next);
      if (std::isfinite(f_next) && decrease < 0.0 &&
          f_next <= f_cur + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // no acceptable step remains

    const RealVector g_next = grad(theta_next);
    const RealVector s = theta_next - theta;
    const RealVector y = g_next - g_cur;
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const RealMatrix id = RealMatrix::Identity(n, n);
      const RealMatrix left = id - rho * s * y.transpose();
      h_inv = left * h_inv * left.transpose() + rho * s * s.transpose();
    }

    theta = theta_next;
    g_cur = g_next;
    f_cur = f_next;
    result.loss.push_back(f_cur);
    result.iterations = it + 1;

    if (f_cur < best_f - 1e-10) {
      best_f = f_cur;
      best_theta = theta;
      stagnant = 0;
    } else if (++stagnant >= cfg.stagnation_limit) {
      break;
    }
  }

  result.model.unflatten(best_theta);
  return result;
}

MetricsReport metrics_from_counts(long long tp, long long tn, long long fp,
                                  long long fn) {
  MetricsReport m;
  m.tp = tp;
  m.tn = tn;
  m.fp = fp;
  m.fn = fn;
  const long long total = m.total();
  m.accuracy = total > 0 ? static_cast<double>(tp + tn) / total : 0.0;
  m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

bool predict(const ConditionedHamiltonian& h, const RealVector& x,
             GibbsMode mode, const AnsatzTemplate& tmpl,
             const EvolutionConfig& evo) {
  return fraud_probability(h, x, mode, tmpl, evo) > 0.5;
}

MetricsReport evaluate(const ConditionedHamiltonian& h,
                       const std::vector<UniqueItem>& data, GibbsMode mode,
                       const AnsatzTemplate& tmpl, const EvolutionConfig& evo) {
  long long tp = 0, tn = 0, fp = 0, fn = 0;
  for (const auto& u : data) {
    const bool fraud_pred = predict(h, u.x, mode, tmpl, evo);
    const long long pos = u.fraud_count;
    const long long neg = u.count - u.fraud_count;
    if (fraud_pred) {
      tp += pos;
      fp += neg;
    } else {
      fn += pos;
      tn += neg;
    }
  }
  return metrics_from_counts(tp, tn, fp, fn);
}

}  // namespace vqbm
