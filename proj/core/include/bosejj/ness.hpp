// ness.hpp
//
// Steady-state functional of the coupled mode-reservoir model: boundary
// function F(nu; f), distorted vectors phi_l(f), covariance S(f), condensate
// linear part Lambda(f) and the Weyl expectation exp(-S/2 + i Lambda).

#pragma once

#include "bosejj/graphs.hpp"
#include "bosejj/model.hpp"
#include "bosejj/numerics.hpp"
#include "bosejj/selfenergy.hpp"
#include "bosejj/spectral.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace bosejj {

// One reservoir slot of a probe vector: nothing, a finitely supported vertex
// function (graph kinds, patch vertex ids), or a radial momentum profile
// (continuum kind).
using ProbeComponent = std::variant<std::monostate, GraphExplicit, RadialFormFactor>;

bool probe_is_zero(const ProbeComponent& comp);

// f = (c, psi) with one psi component per reservoir.
struct TestVector {
    cdouble c{0.0, 0.0};
    std::vector<ProbeComponent> psi;

    static TestVector zero(std::size_t n_reservoirs);
};

// r f for real r; the linear part is real-linear only.
TestVector scale(const TestVector& f, double r);

// Thrown when an evaluation rests on spectral conditions that fail.
struct ConditionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConditionReport {
    ResolventSupVerdict resolvent_sup;  // boundary resolvent of rho_g bounded
    EtaGapVerdict eta_gap;              // |eta| bounded below on the window
    bool eta_zero_finite = false;       // infrared-regular coupling
    bool moment_growth_assumed = true;  // initial-state moments not verified

    bool usable() const { return resolvent_sup.bounded && eta_gap.pass; }
};

struct ReservoirData {
    ReservoirSpec spec;
    std::optional<GraphPatch> patch;           // lattice and comb kinds
    GraphExplicit g_site;                      // form factor realized on the patch
    std::optional<RadialFormFactor> g_radial;  // continuum kind
    SpectralDensity rho_g;                     // native grid
    std::vector<double> rho_g_common;          // resampled onto the evaluator grid
    std::optional<PFWeight> weight;
    cdouble v_dot_g{0.0, 0.0};  // <v_l, g_l>
    bool v_pairing_ok = false;
};

// F(nu; f) = c + lambda <g, (nu - h00 - i0)^{-1} psi> tabulated on the
// evaluator grid, with m = lambda F / eta_- weighting the distorted vectors
// and <g, h00^{-1} psi> for the condensate pairing.
struct FFunctionData {
    std::vector<std::vector<cdouble>> cross_per_reservoir;  // d<g_l, E psi_l>/dnu
    std::vector<cdouble> cross;                             // aggregate over reservoirs
    std::vector<cdouble> f_values;
    std::vector<cdouble> m_values;
    cdouble g_hinv_psi{0.0, 0.0};
    bool infrared_divergent = false;
};

// Spectral footprint of one reservoir component of phi(f).
struct PhiComponent {
    std::vector<double> rho_phi;   // d<phi_l, E phi_l>/dnu, clamped at zero
    double norm_sq = 0.0;          // trapezoid mass of rho_phi
    double covariance_term = 0.0;  // <phi_l, (N_l + 1/2) phi_l>
    cdouble v_pairing{0.0, 0.0};   // <v_l, phi_l(f)>
    bool v_pairing_valid = false;
};

struct NessOptions {
    SpectralOptions spectral{};
    // Patch windows grow automatically to fit form-factor supports.
    int zd_patch_radius = 12;
    int comb_base_radius = 6;
    int comb_tooth_length = 40;
    int boundary_margin = 3;
    double eta_gap_threshold = 1e-3;  // resonance-gap floor for |eta|
};

// Immutable after construction; per-f evaluations are independent and safe to
// run concurrently.  Evaluations that rest on the resonance gap throw when
// the gap verdict fails (except in the decoupled lambda = 0 limit, where
// phi = psi needs no gap).
class NessEvaluator {
  public:
    explicit NessEvaluator(CoupledModel model, NessOptions opts = {});

    const CoupledModel& model() const { return model_; }
    const NessOptions& options() const { return opts_; }
    std::size_t n_reservoirs() const { return reservoirs_.size(); }
    const ReservoirData& reservoir(std::size_t l) const { return reservoirs_.at(l); }
    const std::vector<double>& grid() const { return grid_; }
    const SpectralDensity& rho_g_total() const { return rho_g_total_; }
    const EtaBoundary& eta() const { return eta_; }
    const std::vector<cdouble>& eta_plus_grid() const { return eta_plus_grid_; }
    const std::vector<double>& eta_abs_sq() const { return eta_abs_sq_; }
    const ConditionReport& conditions() const { return conditions_; }

    // Checked accessor; throws when the 1/nu moment of rho_g diverges.
    double eta_zero() const;

    // The coupling vector of reservoir l as a probe component.
    ProbeComponent g_probe(std::size_t l) const;
    // Materialize a model-level form factor in reservoir l's representation.
    ProbeComponent realize_probe(std::size_t l, const FormFactor& f) const;

    // d<xi, E_l(nu) zeta>/dnu on the evaluator grid; zero components give the
    // zero table, mismatched component kinds throw.
    std::vector<cdouble> cross_density(std::size_t l, const ProbeComponent& xi,
                                       const ProbeComponent& zeta) const;
    std::vector<double> diag_density(std::size_t l, const ProbeComponent& comp) const;

    // <v_l, comp> against the PF weight (graph kinds) or the band-bottom
    // evaluation (continuum); throws for tabulated reservoirs.
    cdouble v_pairing(std::size_t l, const ProbeComponent& comp) const;

    FFunctionData f_table(const TestVector& f) const;
    cdouble f_function(const TestVector& f, double nu) const;

    PhiComponent phi(const TestVector& f, std::size_t l) const;

    // S(f) = sum_l <phi_l, (N_l + 1/2) phi_l>; the mu = 0 occupation pole is
    // split into a bounded part and an exact 1/nu moment.
    double ness_covariance(const TestVector& f) const;

    // Lambda(f) = sum_l Theta_l(<v_l, phi_l(f)>).  field_expectation returns
    // pi^{3/2} Lambda: the first moment and the Weyl exponent circulate with
    // different normalizations, so both accessors are kept rather than
    // reconciled.
    double ness_linear(const TestVector& f) const;
    double field_expectation(const TestVector& f) const;

    // exp(-S(f)/2 + i Lambda(f)).
    cdouble weyl_expectation(const TestVector& f) const;

  private:
    void require_usable() const;
    void check_f_shape(const TestVector& f) const;
    std::vector<double> resample_real(const SpectralDensity& rho) const;
    std::vector<cdouble> resample_complex(const ComplexDensity& rho) const;
    PhiComponent phi_from(const FFunctionData& data, const TestVector& f,
                          std::size_t l) const;
    // <v_l, phi_l(f)> and its validity.
    std::pair<cdouble, bool> phi_pairing(const FFunctionData& data, const TestVector& f,
                                         std::size_t l) const;

    CoupledModel model_;
    NessOptions opts_;
    std::vector<ReservoirData> reservoirs_;
    std::vector<double> grid_;
    SpectralDensity rho_g_total_;
    EtaBoundary eta_;
    std::vector<cdouble> eta_plus_grid_;  // eta_+ recomputed exactly at grid nodes
    std::vector<double> eta_abs_sq_;
    ConditionReport conditions_;
};

}  // namespace bosejj
