#include "bosejj/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bosejj {

std::string to_string(ReservoirKind k) {
  switch (k) {
    case ReservoirKind::ContinuumRd: return "continuum_rd";
    case ReservoirKind::LatticeZd: return "lattice_zd";
    case ReservoirKind::CombZdZ: return "comb_zd_z";
    case ReservoirKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

double theta_eval(const PhaseFunctional& phase, cdouble alpha) {
  if (std::holds_alternative<std::monostate>(phase)) return 0.0;
  if (const auto* ssb = std::get_if<SsbPhase>(&phase)) {
    // e^{i tau} sqrt(D) alpha + conjugate
    return 2.0 * std::sqrt(ssb->D) * (std::cos(ssb->tau) * alpha.real() - std::sin(ssb->tau) * alpha.imag());
  }
  const auto& g = std::get<GcsPhase>(phase);
  return std::sqrt(g.D) * (g.s1 * alpha.real() + g.s2 * alpha.imag());
}

bool phase_active(const PhaseFunctional& phase) {
  if (std::holds_alternative<std::monostate>(phase)) return false;
  if (const auto* ssb = std::get_if<SsbPhase>(&phase)) return ssb->D > 0.0;
  const auto& g = std::get<GcsPhase>(phase);
  return g.D > 0.0 && (g.s1 != 0.0 || g.s2 != 0.0);
}

double RadialFormFactor::value(double p) const {
  if (samples.size() < 2 || p < 0.0 || p > support_radius) return 0.0;
  const double h = support_radius / static_cast<double>(samples.size() - 1);
  const auto j = static_cast<std::size_t>(std::min(p / h, static_cast<double>(samples.size() - 2)));
  const double w = p / h - static_cast<double>(j);
  return samples[j] * (1.0 - w) + samples[j + 1] * w;
}

double RadialFormFactor::norm_sq(int dim) const {
  if (samples.size() < 2) return 0.0;
  // int_0^R |G(r)|^2 S_{d-1} r^{d-1} dr, S_{d-1} = 2 pi^{d/2} / Gamma(d/2)
  const double sd = 2.0 * std::pow(std::acos(-1.0), 0.5 * dim) / std::tgamma(0.5 * dim);
  const double h = support_radius / static_cast<double>(samples.size() - 1);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < samples.size(); ++j) {
    const double r0 = h * static_cast<double>(j), r1 = r0 + h;
    const double f0 = samples[j] * samples[j] * std::pow(r0, dim - 1);
    const double f1 = samples[j + 1] * samples[j + 1] * std::pow(r1, dim - 1);
    acc += 0.5 * h * (f0 + f1);
  }
  return sd * acc;
}

namespace {

void validate_form_factor(const ReservoirSpec& r, std::size_t idx, std::vector<std::string>& out) {
  const std::string where = "reservoirs[" + std::to_string(idx) + "]";
  const int site_len = (r.kind == ReservoirKind::CombZdZ) ? r.dim + 1 : r.dim;
  if (r.kind == ReservoirKind::Tabulated) {
    if (r.density_csv.empty())
      out.push_back(where + ": tabulated reservoir needs density_csv");
    if (phase_active(r.phase))
      out.push_back(where + ": phase functional requires a form factor; tabulated densities carry none");
    return;
  }
  if (r.kind == ReservoirKind::ContinuumRd) {
    const auto* rad = std::get_if<RadialFormFactor>(&r.form_factor);
    if (!rad) {
      out.push_back(where + ": continuum reservoir needs a radial form factor");
      return;
    }
    if (rad->samples.size() < 2) out.push_back(where + ": radial profile needs at least 2 samples");
    if (!(rad->support_radius > 0.0)) out.push_back(where + ": radial support radius must be > 0");
    return;
  }
  // Lattice / comb graph kinds.
  if (const auto* kd = std::get_if<KDeltaFormFactor>(&r.form_factor)) {
    if (static_cast<int>(kd->site.size()) != site_len)
      out.push_back(where + ": k_delta site needs " + std::to_string(site_len) + " coordinates");
  } else if (const auto* ex = std::get_if<ExplicitFormFactor>(&r.form_factor)) {
    if (ex->entries.empty()) out.push_back(where + ": explicit form factor is empty");
    for (const auto& [site, coeff] : ex->entries) {
      (void)coeff;
      if (static_cast<int>(site.size()) != site_len) {
        out.push_back(where + ": explicit form factor sites need " + std::to_string(site_len) + " coordinates");
        break;
      }
    }
  } else {
    out.push_back(where + ": graph reservoir needs a k_delta or explicit form factor");
  }
}

}  // namespace

std::vector<std::string> validate(const CoupledModel& model) {
  std::vector<std::string> out;
  if (!(model.system.omega > 0.0)) out.push_back("system.omega must be > 0");
  if (!(model.system.lambda > 0.0)) out.push_back("system.lambda must be > 0");
  if (model.reservoirs.empty()) out.push_back("at least one reservoir is required");
  for (std::size_t i = 0; i < model.reservoirs.size(); ++i) {
    const auto& r = model.reservoirs[i];
    const std::string where = "reservoirs[" + std::to_string(i) + "]";
    if (!(r.beta > 0.0)) out.push_back(where + ".beta must be > 0");
    if (r.mu > 0.0) out.push_back(where + ".mu must be <= 0");
    if (r.kind != ReservoirKind::Tabulated && r.dim < 3)
      out.push_back(where + ".dim must be >= 3 for transient reservoir geometries");
    if (phase_active(r.phase) && r.mu != 0.0)
      out.push_back(where + ".phase: condensate phases require mu = 0");
    if (const auto* ssb = std::get_if<SsbPhase>(&r.phase); ssb && ssb->D < 0.0)
      out.push_back(where + ".phase.D must be >= 0");
    if (const auto* gcs = std::get_if<GcsPhase>(&r.phase); gcs && gcs->D < 0.0)
      out.push_back(where + ".phase.D must be >= 0");
    validate_form_factor(r, i, out);
  }
  return out;
}

double bose_occupation(double beta, double mu, double x) {
  if (!(beta > 0.0)) throw std::invalid_argument("bose_occupation: beta must be > 0");
  if (mu > 0.0) throw std::invalid_argument("bose_occupation: mu must be <= 0");
  if (x < 0.0) throw std::domain_error("bose_occupation: x must be >= 0");
  const double a = beta * (x - mu);
  if (a == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / std::expm1(a);
}

}  // namespace bosejj
