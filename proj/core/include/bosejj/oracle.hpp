// oracle.hpp
//
// Finite-truncation dynamics oracle: midpoint discretization of each
// reservoir density into an arrowhead Hamiltonian, exact evolution through
// its secular eigensystem, the analytic boundary-value evolution, and the
// contour-identity residual.  Truncations are quasi-periodic, so any
// long-time statement only holds well below the recurrence time
// 2 pi / (minimum cell width).

#pragma once

#include "bosejj/ness.hpp"
#include "bosejj/numerics.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace bosejj {

struct TruncatedMode {
    std::size_t reservoir = 0;
    int cell = 0;
    double nu = 0.0;  // midpoint energy of the cell
    double w = 0.0;   // sqrt(cell mass), rescaled to reproduce the density mass
};

// One-particle Hamiltonian on C + (sum_k M_k) modes: system level omega,
// reservoir diagonal nu, couplings lambda * w in the first row/column.
// Hermitian by construction; sum_j w_{k,j}^2 equals the reservoir density
// mass within 1e-10.
struct TruncatedModel {
    int size = 0;
    double omega = 0.0;
    double lambda = 0.0;
    std::vector<TruncatedMode> modes;            // global order, index = matrix row - 1
    std::vector<std::size_t> offsets;            // per-reservoir start into modes
    std::vector<int> modes_per_reservoir;
    std::vector<std::pair<double, double>> beta_mu;  // per reservoir
    double delta_nu_min = 0.0;

    int index_of(std::size_t k, int j) const;
    double recurrence_time() const;  // 2 pi / delta_nu_min
};

TruncatedModel build_truncation(const NessEvaluator& ev, int modes_per_reservoir);

// Dense row-major real-symmetric assembly (test-sized models).
std::vector<double> dense_matrix(const TruncatedModel& tm);

// Wasserstein-1 distance between reservoir k's discrete mode measure and its
// density table (integral of the CDF difference); halves on cell halving.
double truncation_w1_gap(const NessEvaluator& ev, const TruncatedModel& tm, std::size_t k);

// f = (c, psi) in the truncated basis.  Each cell splits psi_l into the
// component along E(cell) g_l (coupled) and the orthogonal remainder, which
// never couples: it enters norms and covariances only through its squared
// mass and overlaps only through cell pairings.
struct TruncatedProbe {
    cdouble c{0.0, 0.0};
    std::vector<cdouble> coupled;  // per mode, amplitude on E(cell) g / w
    std::vector<double> perp_sq;   // per mode, squared mass of the remainder
    double norm_sq = 0.0;
};

TruncatedProbe project_probe(const NessEvaluator& ev, const TruncatedModel& tm,
                             const TestVector& f);

// Probe xi resolved against an evolving f: coupled amplitudes a^xi plus the
// free cell pairing (integral of rho_{xi psi} over the cell minus its
// coupled part).  Probe c components are ignored: overlaps pair reservoir
// parts only.
struct ProbePairing {
    std::vector<cdouble> coupled;
    std::vector<cdouble> free_cross;
};

ProbePairing project_pairing(const NessEvaluator& ev, const TruncatedModel& tm,
                             const TestVector& xi, const TestVector& f,
                             const TruncatedProbe& f_proj);

struct EvolutionResult {
    double t = 0.0;
    cdouble c_of_t{0.0, 0.0};
    std::vector<cdouble> coupled;   // evolved per-mode coupled amplitudes
    std::vector<cdouble> overlaps;  // <xi, psi(t)> per requested pairing
    double norm_error = 0.0;        // | ||f(t)|| - ||f(0)|| |
};

// Secular eigensystem of the arrowhead matrix, solved once.  Modes with
// exactly equal energies are rotated so one representative per energy
// carries the whole coupling; the remainder evolves freely.  Evaluations at
// different times are independent and deterministic.
class TruncatedEvolver {
  public:
    explicit TruncatedEvolver(const TruncatedModel& tm);

    EvolutionResult evolve(const TruncatedProbe& f, double t,
                           std::span<const ProbePairing> pairings = {}) const;

    std::span<const double> eigenvalues() const { return eigs_; }
    // max |secular(E_r)| over roots, a residual of the eigenvalue solve.
    double secular_residual() const;

  private:
    struct Group {
        double nu = 0.0;
        double W = 0.0;
        std::vector<int> members;   // global mode indices
        std::vector<double> frac;   // w_i / W
        int pole = -1;              // index into eps_, -1 when free
    };

    double secular(double x) const;
    double bisect(double lo, double hi) const;

    double omega_ = 0.0;
    double lambda_ = 0.0;
    std::vector<TruncatedMode> modes_;
    std::vector<Group> groups_;
    std::vector<double> eps_;    // pole energies (coupled groups)
    std::vector<double> lamw2_;  // lambda^2 W^2 per pole
    std::vector<double> lamw_;   // lambda W per pole
    std::vector<double> eigs_;   // eps_.size() + 1 secular roots
    std::vector<double> norm_;   // eigenvector normalizations
};

// Convenience wrapper: solve and evolve in one call.
EvolutionResult evolve_matrix(const TruncatedModel& tm, const TruncatedProbe& f, double t);

// sum over modes of (N_l(nu_j) + 1/2) (|a_j(t)|^2 + perp_j^2); midpoint
// energies keep mu = 0 off the Bose pole by half a cell.
double quench_covariance(const TruncatedModel& tm, const TruncatedEvolver& evolver,
                         const TruncatedProbe& f, double t);

struct AnalyticEvolution {
    double t = 0.0;
    cdouble c_of_t{0.0, 0.0};
    std::vector<cdouble> overlaps;  // <xi, psi(t)> per probe
};

// Boundary-value evolution: c(t) = lambda integral e^{it nu} rho_{g phi} /
// eta_+ and <xi, psi(t)> = free part minus the lambda^2 resolvent
// correction, all on the evaluator grid.  Requires the resonance gap.
std::vector<AnalyticEvolution> evolve_analytic_series(const NessEvaluator& ev,
                                                      const TestVector& f,
                                                      std::span<const double> times,
                                                      std::span<const TestVector> probes = {});
AnalyticEvolution evolve_analytic(const NessEvaluator& ev, const TestVector& f, double t,
                                  std::span<const TestVector> probes = {});

// Both sides of the branch-cut identity: the broadened line integral of
// e^{itz}/eta(z) around the real axis against lambda^2 e^{it nu} rho_g /
// |eta_-|^2.  The ladder {eps, eps/10} is extrapolated linearly.
struct ContourCheck {
    bool degenerate = false;  // lambda = 0: no branch cut, both sides vanish
    double t = 0.0;
    cdouble lhs_coarse{0.0, 0.0};
    cdouble lhs_fine{0.0, 0.0};
    cdouble lhs{0.0, 0.0};  // extrapolated
    cdouble rhs{0.0, 0.0};
    double residual_coarse = 0.0;
    double residual_fine = 0.0;
    double residual = 0.0;
};
ContourCheck contour_identity_check(const NessEvaluator& ev, double t, double eps0 = 1e-2);

// t, Re c, Im c, |c|, covariance rows with the 12-digit report format.
std::string export_time_series_csv(std::span<const double> t, std::span<const cdouble> c,
                                   std::span<const double> covariance);

}  // namespace bosejj
