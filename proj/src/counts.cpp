#include "vqbm/counts.hpp"

#include <stdexcept>

namespace vqbm {

namespace {

void check_args(int t, int q, int p) {
  if (t < 1 || q < 1 || p < 1)
    throw std::invalid_argument("t, q and p must all be positive");
}

}  // namespace

long long prep_only_closed_form(int t, int q, int p) {
  check_args(t, q, p);
  const long long tq = q, tp = p;
  return static_cast<long long>(t) * (tq * (tq + 1) / 2 + tq * tp);
}

long long autodiff_closed_form(int t, int q, int p) {
  check_args(t, q, p);
  const long long tq = q, tp = p;
  return prep_only_closed_form(t, q, p) +
         static_cast<long long>(t) * (tq * tq * (tq + 1) + 2 * tq * tq * tp);
}

long long finite_diff_closed_form(int t, int q, int p) {
  check_args(t, q, p);
  return (static_cast<long long>(p) + 1) * prep_only_closed_form(t, q, p);
}

CircuitCountReport count_circuits(int t, int q, int p, CountMode mode) {
  check_args(t, q, p);
  CircuitCountReport report;
  report.mode = mode;
  report.t = t;
  report.q = q;
  report.p = p;

  CircuitCountTally& tally = report.counted;
  auto tally_prep = [&] {
    for (int step = 0; step < t; ++step) {
      for (int a = 0; a < q; ++a)
        for (int b = a; b < q; ++b) tally.a_entries += 1;
      for (int a = 0; a < q; ++a)
        for (int i = 0; i < p; ++i) tally.c_entries += 1;
    }
  };

  switch (mode) {
    case CountMode::PrepOnly:
      tally_prep();
      report.asymptotic_class = "Theta(t q (q + p))";
      break;
    case CountMode::Autodiff:
      // dA: two real-part circuits per (pair, chain index s); the direct dC
      // term reuses the C circuits, so dC only counts the chain circuits.
      for (int step = 0; step < t; ++step) {
        for (int a = 0; a < q; ++a)
          for (int b = a; b < q; ++b) tally.a_entries += 1;
        for (int a = 0; a < q; ++a)
          for (int i = 0; i < p; ++i) tally.c_entries += 1;
        for (int a = 0; a < q; ++a)
          for (int b = a; b < q; ++b)
            for (int s = 0; s < q; ++s) tally.da_entries += 2;
        for (int a = 0; a < q; ++a)
          for (int s = 0; s < q; ++s)
            for (int i = 0; i < p; ++i) tally.dc_entries += 2;
      }
      report.asymptotic_class = "Theta(t q^2 (q + p))";
      break;
    case CountMode::FiniteDiff:
      // One baseline preparation plus one fully re-run preparation per
      // shifted Hamiltonian parameter.
      for (int shift = 0; shift < p + 1; ++shift) tally_prep();
      report.asymptotic_class = "Theta(t p q (q + p))";
      break;
  }
  return report;
}

}  // namespace vqbm
