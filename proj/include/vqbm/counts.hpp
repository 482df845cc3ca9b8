#pragma once

#include <string>

#include "vqbm/varqite.hpp"

// Circuit-count accounting for the gradient strategies. The unit is one
// Hadamard-test circuit; one circuit per real-part term per (index pair,
// Hamiltonian term) as applicable. With t time steps, q trial-state
// parameters and p Hamiltonian parameters the per-run closed forms are
//
//   prep-only:   t * (q(q+1)/2 + q p)          A and C entries
//   autodiff:    prep + t * (q^2(q+1) + 2q^2 p) dA and dC chain circuits
//                (the direct dC term reuses the C circuits)
//   finite-diff: (p+1) * prep                  one extra prep per shift
//
// matching Theta(t q (q+p)), Theta(t q^2 (q+p)) and Theta(t p q (q+p)).

namespace vqbm {

enum class CountMode { PrepOnly, Autodiff, FiniteDiff };

struct CircuitCountReport {
  CountMode mode = CountMode::PrepOnly;
  int t = 0;
  int q = 0;
  int p = 0;
  CircuitCountTally counted;
  std::string asymptotic_class;
};

long long prep_only_closed_form(int t, int q, int p);
long long autodiff_closed_form(int t, int q, int p);
long long finite_diff_closed_form(int t, int q, int p);

/// Exact tallies from an instrumented symbolic run (no state simulation).
CircuitCountReport count_circuits(int t, int q, int p, CountMode mode);

}  // namespace vqbm
