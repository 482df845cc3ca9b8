#include "vqbm/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vqbm {

namespace {

constexpr Complex kI{0.0, 1.0};

bool is_pauli_letter(char c) {
  return c == 'I' || c == 'X' || c == 'Y' || c == 'Z';
}

void check_word(const std::string& word) {
  if (word.empty()) throw std::invalid_argument("empty Pauli word");
  for (char c : word) {
    if (!is_pauli_letter(c))
      throw std::invalid_argument(std::string("invalid Pauli letter '") + c +
                                  "'");
  }
}

}  // namespace

StateVector StateVector::zero_state(int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("n_qubits must be positive");
  StateVector psi;
  psi.n_qubits = n_qubits;
  psi.amplitudes = ComplexVector::Zero(std::int64_t{1} << n_qubits);
  psi.amplitudes(0) = 1.0;
  return psi;
}

double StateVector::norm_error() const {
  return std::abs(amplitudes.squaredNorm() - 1.0);
}

DensityMatrix DensityMatrix::maximally_mixed(int n_qubits) {
  const auto dim = std::int64_t{1} << n_qubits;
  DensityMatrix rho;
  rho.n_qubits = n_qubits;
  rho.matrix = ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim);
  return rho;
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  DensityMatrix rho;
  rho.n_qubits = psi.n_qubits;
  rho.matrix = psi.amplitudes * psi.amplitudes.adjoint();
  return rho;
}

void PauliSum::add_term(double coeff, const std::string& word) {
  check_word(word);
  if (static_cast<int>(word.size()) != n_qubits)
    throw std::invalid_argument("Pauli word length mismatch");
  if (!std::isfinite(coeff))
    throw std::invalid_argument("non-finite Pauli coefficient");
  terms.emplace_back(coeff, PauliString{word});
}

RealVector PauliSum::coefficients() const {
  RealVector c(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) c(i) = terms[i].first;
  return c;
}

ComplexMatrix PauliSum::to_matrix() const {
  const auto dim = std::int64_t{1} << n_qubits;
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (const auto& [coeff, word] : terms)
    m += coeff * pauli_to_matrix(word);
  return m;
}

ComplexMatrix pauli_to_matrix(const PauliString& p) {
  check_word(p.word);
  const int n = p.n_qubits();
  const auto dim = std::int64_t{1} << n;
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  // Pauli words are monomials: column i maps to a single row with a phase.
  for (std::int64_t col = 0; col < dim; ++col) {
    std::int64_t row = col;
    Complex phase = 1.0;
    for (int q = 0; q < n; ++q) {
      const std::int64_t bit_mask = std::int64_t{1} << (n - 1 - q);
      const bool bit = (col & bit_mask) != 0;
      switch (p.word[q]) {
        case 'I':
          break;
        case 'X':
          row ^= bit_mask;
          break;
        case 'Y':
          row ^= bit_mask;
          phase *= bit ? -kI : kI;
          break;
        case 'Z':
          if (bit) phase = -phase;
          break;
      }
    }
    m(row, col) = phase;
  }
  return m;
}

void apply_pauli_word(const std::string& word, ComplexVector& psi) {
  check_word(word);
  const int n = static_cast<int>(word.size());
  const auto dim = std::int64_t{1} << n;
  if (psi.size() != dim)
    throw std::invalid_argument("Pauli word / state dimension mismatch");

  std::int64_t flip_mask = 0;
  for (int q = 0; q < n; ++q) {
    if (word[q] == 'X' || word[q] == 'Y')
      flip_mask |= std::int64_t{1} << (n - 1 - q);
  }

  ComplexVector out(dim);
  for (std::int64_t i = 0; i < dim; ++i) {
    Complex phase = 1.0;
    for (int q = 0; q < n; ++q) {
      const bool bit = (i >> (n - 1 - q)) & 1;
      if (word[q] == 'Z' && bit) phase = -phase;
      if (word[q] == 'Y') phase *= bit ? -kI : kI;
    }
    out(i ^ flip_mask) = phase * psi(i);
  }
  psi = std::move(out);
}

ComplexVector apply_pauli_sum(const PauliSum& h, const ComplexVector& psi) {
  ComplexVector acc = ComplexVector::Zero(psi.size());
  for (const auto& [coeff, word] : h.terms) {
    ComplexVector branch = psi;
    apply_pauli_word(word.word, branch);
    acc += coeff * branch;
  }
  return acc;
}

std::pair<RealVector, ComplexMatrix> hermitian_eig(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (((m - m.adjoint()).cwiseAbs().maxCoeff()) > 1e-10 * scale)
    throw std::invalid_argument("matrix not Hermitian within 1e-10");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("Hermitian eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

DensityMatrix exact_gibbs(const GibbsSpec& spec) {
  if (!(spec.kbt > 0.0)) throw std::invalid_argument("kbt must be positive");
  for (const auto& [coeff, word] : spec.hamiltonian.terms) {
    if (!std::isfinite(coeff))
      throw std::invalid_argument("non-finite Hamiltonian coefficient");
  }
  const auto dim = std::int64_t{1} << spec.hamiltonian.n_qubits;
  ComplexMatrix h = spec.hamiltonian.terms.empty()
                        ? ComplexMatrix::Zero(dim, dim)
                        : spec.hamiltonian.to_matrix();
  auto [evals, evecs] = hermitian_eig(h);

  // Stable softmax of -E/kbt over the spectrum.
  RealVector logits = -evals / spec.kbt;
  const double shift = logits.maxCoeff();
  RealVector probs = (logits.array() - shift).exp();
  probs /= probs.sum();

  DensityMatrix rho;
  rho.n_qubits = spec.hamiltonian.n_qubits;
  rho.matrix = evecs * probs.asDiagonal() * evecs.adjoint();
  return rho;
}

StateVector exact_ite(const StateVector& psi0, const PauliSum& h, double tau) {
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  const auto dim = std::int64_t{1} << h.n_qubits;
  if (psi0.amplitudes.size() != dim)
    throw std::invalid_argument("state / Hamiltonian dimension mismatch");
  if (tau == 0.0) return psi0;

  auto [evals, evecs] = hermitian_eig(h.to_matrix());
  ComplexVector coeffs = evecs.adjoint() * psi0.amplitudes;
  // Factor out the slowest decay so large tau stays finite.
  const double e_min = evals.minCoeff();
  for (std::int64_t i = 0; i < dim; ++i)
    coeffs(i) *= std::exp(-(evals(i) - e_min) * tau);

  StateVector out;
  out.n_qubits = psi0.n_qubits;
  out.amplitudes = evecs * coeffs;
  const double norm = out.amplitudes.norm();
  if (norm <= 0.0) throw std::runtime_error("ITE annihilated the state");
  out.amplitudes /= norm;
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("keep set must be nonempty");
  const int n = rho.n_qubits;
  std::vector<int> kept = keep;
  std::sort(kept.begin(), kept.end());
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end())
    throw std::invalid_argument("duplicate qubit in keep set");
  if (kept.front() < 0 || kept.back() >= n)
    throw std::invalid_argument("keep index out of range");

  std::vector<int> traced;
  for (int q = 0; q < n; ++q)
    if (!std::binary_search(kept.begin(), kept.end(), q)) traced.push_back(q);

  const int nk = static_cast<int>(kept.size());
  const int nt = static_cast<int>(traced.size());
  const auto dim_k = std::int64_t{1} << nk;
  const auto dim_t = std::int64_t{1} << nt;

  // Map (kept index, traced index) pair back to a full basis index.
  auto full_index = [&](std::int64_t k_bits, std::int64_t t_bits) {
    std::int64_t idx = 0;
    for (int i = 0; i < nk; ++i)
      if ((k_bits >> (nk - 1 - i)) & 1) idx |= std::int64_t{1} << (n - 1 - kept[i]);
    for (int i = 0; i < nt; ++i)
      if ((t_bits >> (nt - 1 - i)) & 1)
        idx |= std::int64_t{1} << (n - 1 - traced[i]);
    return idx;
  };

  DensityMatrix out;
  out.n_qubits = nk;
  out.matrix = ComplexMatrix::Zero(dim_k, dim_k);
  for (std::int64_t r = 0; r < dim_k; ++r) {
    for (std::int64_t c = 0; c < dim_k; ++c) {
      Complex sum = 0.0;
      for (std::int64_t t = 0; t < dim_t; ++t)
        sum += rho.matrix(full_index(r, t), full_index(c, t));
      out.matrix(r, c) = sum;
    }
  }
  return out;
}

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.matrix.rows() != b.matrix.rows())
    throw std::invalid_argument("fidelity dimension mismatch");
  // (Tr sqrt(sqrt(a) b sqrt(a)))^2 equals the squared trace norm of
  // sqrt(a) sqrt(b); the latter is symmetric in (a, b) by construction and
  // avoids squaring rounding noise through a second matrix square root.
  auto matrix_sqrt = [](const ComplexMatrix& m) {
    auto [evals, evecs] = hermitian_eig(m);
    RealVector roots = evals.cwiseMax(0.0).cwiseSqrt();
    return ComplexMatrix(evecs * roots.asDiagonal() * evecs.adjoint());
  };
  const ComplexMatrix prod = matrix_sqrt(a.matrix) * matrix_sqrt(b.matrix);
  Eigen::JacobiSVD<ComplexMatrix> svd(prod);
  const double root_sum = svd.singularValues().sum();
  return std::min(1.0, root_sum * root_sum);
}

}  // namespace vqbm
