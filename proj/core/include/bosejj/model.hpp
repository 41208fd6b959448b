// model.hpp
//
// Value types describing one bosonic mode coupled to N bosonic reservoirs:
// system level and coupling, per-reservoir kind, inverse temperature,
// chemical potential, form factor and condensate phase functional.

#pragma once

#include <complex>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "bosejj/numerics.hpp"

namespace bosejj {

enum class ReservoirKind { ContinuumRd, LatticeZd, CombZdZ, Tabulated };

std::string to_string(ReservoirKind k);

struct SystemSpec {
  double omega = 1.0;   // mode frequency, > 0
  double lambda = 0.1;  // coupling strength, > 0
};

// Condensate phase functionals Theta (real-valued, real-linear on C).
struct SsbPhase {
  double tau = 0.0;  // symmetry-breaking phase
  double D = 1.0;    // condensate density, >= 0
};
struct GcsPhase {
  double s1 = 1.0;
  double s2 = 0.0;
  double D = 1.0;  // condensate density, >= 0
};
// monostate = no condensate term (Theta identically 0).
using PhaseFunctional = std::variant<std::monostate, SsbPhase, GcsPhase>;

double theta_eval(const PhaseFunctional& phase, cdouble alpha);
bool phase_active(const PhaseFunctional& phase);

// Radial momentum-space profile p -> G(|p|), compactly supported, sampled
// uniformly on [0, support_radius].
struct RadialFormFactor {
  double support_radius = 1.0;
  std::vector<double> samples;  // G on the uniform radial grid, G >= band needs G(0) finite
  double value(double p) const;
  double norm_sq(int dim) const;  // int |G|^2 over R^d (radial measure)
};

// K delta_x: the commuting current-like vector attached to one site.  The
// site has `dim` coordinates on Z^d and dim+1 on the comb (base..., tooth).
struct KDeltaFormFactor {
  std::vector<int> site;
};

// Explicit finitely supported vertex function.
struct ExplicitFormFactor {
  std::map<std::vector<int>, cdouble> entries;
};

using FormFactor = std::variant<RadialFormFactor, KDeltaFormFactor, ExplicitFormFactor>;

struct ReservoirSpec {
  ReservoirKind kind = ReservoirKind::LatticeZd;
  int dim = 3;         // d >= 3 for ContinuumRd / LatticeZd / CombZdZ
  double beta = 1.0;   // inverse temperature, > 0
  double mu = 0.0;     // chemical potential, <= 0
  FormFactor form_factor{KDeltaFormFactor{}};
  PhaseFunctional phase{};          // SSB/GCS permitted only at mu = 0
  std::string density_csv;          // Tabulated: two-column (nu, rho) file
};

struct CoupledModel {
  SystemSpec system;
  std::vector<ReservoirSpec> reservoirs;
};

// Structural validation; returns human-readable violations, empty when valid.
// Idempotent, never throws.
std::vector<std::string> validate(const CoupledModel& model);

// Bose occupation 1/(e^{beta(x-mu)} - 1) on x >= 0, mu <= 0, beta > 0.
// Returns +infinity at the pole x = mu = 0; throws std::domain_error for
// x < 0 and std::invalid_argument for parameter-range violations.
double bose_occupation(double beta, double mu, double x);

}  // namespace bosejj
