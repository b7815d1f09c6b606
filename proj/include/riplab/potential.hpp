#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "riplab/generator.hpp"

namespace riplab {

struct SolverOptions {
  // Relative reduction of the preconditioned residual asked of each CG pass.
  double cg_tolerance = 1e-12;
  // Interior residual of the Dirichlet problem, relative to the local rate scale.
  double local_tolerance = 1e-10;
  // Summed absolute residual relative to the capacity (or to the source mass).
  double global_tolerance = 1e-11;
  // Total CG iterations allowed: iteration_factor * sqrt(state count).
  double iteration_factor = 50.0;
  std::size_t max_refinements = 40;
};

struct PotentialReport {
  std::vector<Index> a;
  std::vector<Index> b;
  std::vector<double> h;
  // From the boundary flux out of A.
  double capacity = 0.0;
  // D_N(h), the cross-check.
  double capacity_dirichlet = 0.0;
  double mu_h = 0.0;
  // μ(h) / capacity, set when A is a singleton.
  std::optional<double> mean_hitting_from_a;
  // max over interior η of |(L_N h)(η)| / exit rate(η).
  double residual = 0.0;
  std::size_t iterations = 0;
};

inline constexpr double kCapacityAgreementTol = 1e-6;
inline constexpr double kMaximumPrincipleSlack = 1e-9;

// h = 1 on A, 0 on B, harmonic elsewhere. Throws BadSets for empty,
// overlapping or out-of-range sets and SolverDiverged when the iteration cap
// is reached, the two capacity formulas disagree beyond kCapacityAgreementTol
// or h leaves [0, 1] by more than kMaximumPrincipleSlack.
PotentialReport solve_equilibrium_potential(const SparseGenerator& gen, std::vector<Index> a,
                                            std::vector<Index> b, const SolverOptions& options = {});

struct HittingSolution {
  // E_η[τ_B] for every state, zero on B.
  std::vector<double> u;
  double residual = 0.0;
  std::size_t iterations = 0;
};

// Solves L_N u = -1 off B, u = 0 on B.
HittingSolution solve_hitting_times(const SparseGenerator& gen, std::vector<Index> b,
                                    const SolverOptions& options = {});

// E_start[τ_B]; throws BadSets when start is in B.
double mean_hitting_time(const SparseGenerator& gen, Index start, std::vector<Index> b,
                         const SolverOptions& options = {});

// Jump rates of the trace process on the given singletons, one per site of
// S*, from the capacity identity. Entry [i][j] is the rate from the i-th to
// the j-th set; the diagonal is zero.
std::vector<std::vector<double>> trace_rates(const SparseGenerator& gen,
                                             const std::vector<Index>& singletons,
                                             const SolverOptions& options = {});

}  // namespace riplab
