#include "bosejj/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace bosejj {

namespace {

constexpr double kPi = std::numbers::pi;

double sphere_area(int d) {
    return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

double patch_spectral_radius(const GraphPatch& patch) {
    switch (patch.kind) {
        case PatchKind::Zd: return 2.0 * patch.d;
        case PatchKind::Comb: {
            double d = patch.d;
            return 2.0 * std::sqrt(d * d + 1.0);
        }
        case PatchKind::Custom: break;
    }
    throw std::invalid_argument("patch kind has no closed-form spectral radius");
}

// Discrete Gaussian smoothing with a unit-sum kernel; keeps the node sum and
// hence the trapezoid mass away from the window ends.
template <typename T>
std::vector<T> gauss_convolve(const std::vector<T>& f, double dx, double sigma) {
    int half = static_cast<int>(std::ceil(6.0 * sigma / dx));
    std::vector<double> kernel(2 * half + 1);
    double sum = 0.0;
    for (int t = -half; t <= half; ++t) {
        double u = t * dx / sigma;
        kernel[t + half] = std::exp(-0.5 * u * u);
        sum += kernel[t + half];
    }
    for (double& k : kernel) k /= sum;

    int n = static_cast<int>(f.size());
    std::vector<T> out(n, T{});
    for (int i = 0; i < n; ++i) {
        T acc{};
        int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
        for (int j = lo; j <= hi; ++j) acc += kernel[i - j + half] * f[j];
        out[i] = acc;
    }
    return out;
}

struct SiteAmp {
    std::vector<int> x;
    cdouble a;
};

std::vector<SiteAmp> site_amplitudes(const GraphPatch& patch, const GraphExplicit& v) {
    std::vector<SiteAmp> out;
    out.reserve(v.amp.size());
    for (const auto& [id, a] : v.amp) {
        if (a == cdouble{0.0, 0.0}) continue;
        out.push_back({patch.coords[id], a});
    }
    return out;
}

cdouble fourier_at(const std::vector<SiteAmp>& sites, std::span<const double> theta) {
    cdouble s{0.0, 0.0};
    for (const auto& site : sites) {
        double phase = 0.0;
        for (std::size_t k = 0; k < theta.size(); ++k) phase += site.x[k] * theta[k];
        s += site.a * std::polar(1.0, -phase);
    }
    return s;
}

double vec_norm_sq(const GraphExplicit& v) {
    double s = 0.0;
    for (const auto& [id, a] : v.amp) s += std::norm(a);
    return s;
}

// Torus Monte Carlo histogram of the symbol 2d - 2 sum cos(theta) with a
// complex per-sample weight.  256 fixed chunks with derived seeds, merged in
// index order, so the result depends on the seed only.
std::vector<cdouble> torus_histogram(int d, const std::vector<SiteAmp>& xi,
                                     const std::vector<SiteAmp>& zeta, bool cross,
                                     const std::vector<double>& grid,
                                     const SpectralOptions& opts) {
    constexpr int kChunks = 256;
    const double dx = grid_step(grid);
    const int n = static_cast<int>(grid.size());
    const long per_chunk = std::max<long>(1, opts.mc_samples / kChunks);

    std::vector<std::vector<cdouble>> partial(kChunks);
    std::atomic<int> next{0};
    auto worker = [&]() {
        std::vector<double> theta(d);
        for (;;) {
            int c = next.fetch_add(1);
            if (c >= kChunks) return;
            std::uint64_t state = opts.seed;
            std::uint64_t chunk_seed = splitmix64(state) ^ (0x9e3779b97f4a7c15ULL * (c + 1));
            std::vector<cdouble> hist(n, cdouble{0.0, 0.0});
            for (long s = 0; s < per_chunk; ++s) {
                double nu = 2.0 * d;
                for (int k = 0; k < d; ++k) {
                    double u = static_cast<double>(splitmix64(chunk_seed) >> 11) * 0x1.0p-53;
                    theta[k] = -kPi + 2.0 * kPi * u;
                    nu -= 2.0 * std::cos(theta[k]);
                }
                cdouble xhat = fourier_at(xi, theta);
                cdouble w = cross ? std::conj(xhat) * fourier_at(zeta, theta)
                                  : cdouble{std::norm(xhat), 0.0};
                int bin = static_cast<int>(std::lround(nu / dx));
                bin = std::clamp(bin, 0, n - 1);
                hist[bin] += w;
            }
            partial[c] = std::move(hist);
        }
    };
    int nthreads = std::max(1, opts.threads);
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<cdouble> hist(n, cdouble{0.0, 0.0});
    for (int c = 0; c < kChunks; ++c)
        for (int j = 0; j < n; ++j) hist[j] += partial[c][j];
    const double scale = 1.0 / (static_cast<double>(per_chunk) * kChunks * dx);
    for (auto& h : hist) h *= scale;
    return hist;
}

std::vector<cdouble> lattice_density_values(const GraphPatch& patch, const GraphExplicit& xi,
                                            const GraphExplicit& zeta, bool cross,
                                            const std::vector<double>& grid,
                                            const SpectralOptions& opts) {
    if (patch.kind != PatchKind::Zd) throw std::invalid_argument("lattice density needs a Z^d patch");
    if (patch.d < 3) throw std::invalid_argument("unsupported dimension below 3");
    auto sx = site_amplitudes(patch, xi);
    auto sz = site_amplitudes(patch, zeta);
    if (sx.empty() || (cross && sz.empty())) throw std::invalid_argument("empty form factor");

    auto raw = torus_histogram(patch.d, sx, sz, cross, grid, opts);
    const double dx = grid_step(grid);
    const double sigma = opts.mc_sigma_frac * grid.back();
    auto s1 = gauss_convolve(raw, dx, sigma);
    auto s2 = gauss_convolve(raw, dx, 2.0 * sigma);
    auto s4 = gauss_convolve(raw, dx, 4.0 * sigma);
    std::vector<cdouble> out(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
        out[j] = richardson_even3(s4[j], s2[j], s1[j]);
    return out;
}

struct LanczosData {
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[j] couples j-1 and j; beta[0] unused
    double norm_sq = 0.0;
    int m = 0;
};

LanczosData lanczos_h0(const GraphPatch& patch, const GraphExplicit& start, double spr,
                       int steps) {
    const int n = patch.n;
    std::vector<cdouble> q(n, cdouble{0.0, 0.0}), qp(n, cdouble{0.0, 0.0}), w(n);
    LanczosData L;
    L.norm_sq = vec_norm_sq(start);
    if (L.norm_sq == 0.0) return L;
    double inv = 1.0 / std::sqrt(L.norm_sq);
    for (const auto& [id, a] : start.amp) q[id] = a * inv;

    int m = std::min(steps, n);
    L.alpha.resize(m);
    L.beta.resize(m + 1, 0.0);
    for (int j = 0; j < m; ++j) {
        a_matvec(patch, q, w);
        for (int v = 0; v < n; ++v) w[v] = spr * q[v] - w[v];
        double aj = 0.0;
        for (int v = 0; v < n; ++v) aj += std::real(std::conj(q[v]) * w[v]);
        L.alpha[j] = aj;
        double nb = 0.0;
        for (int v = 0; v < n; ++v) {
            w[v] -= aj * q[v] + L.beta[j] * qp[v];
            nb += std::norm(w[v]);
        }
        nb = std::sqrt(nb);
        L.m = j + 1;
        if (nb < 1e-12) break;
        L.beta[j + 1] = nb;
        double invb = 1.0 / nb;
        for (int v = 0; v < n; ++v) {
            qp[v] = q[v];
            q[v] = w[v] * invb;
        }
    }
    return L;
}

cdouble tridiag_resolvent00(const LanczosData& L, cdouble z) {
    cdouble t{0.0, 0.0};
    for (int j = L.m - 1; j >= 1; --j) t = L.beta[j] * L.beta[j] / (z - L.alpha[j] - t);
    return 1.0 / (z - L.alpha[0] - t);
}

// (1/pi) Im <g,(nu - h0 - i eps)^{-1} g> extrapolated through the Lorentzian
// ladder; raw (no positivity clamp) so polarization combinations stay linear.
std::vector<double> graph_density_raw(const GraphPatch& patch, const GraphExplicit& g,
                                      const std::vector<double>& grid,
                                      const SpectralOptions& opts) {
    double spr = patch_spectral_radius(patch);
    for (const auto& [id, a] : g.amp)
        if (a != cdouble{0.0, 0.0} && !patch.is_interior(id))
            throw std::invalid_argument("support touches the boundary margin");
    auto L = lanczos_h0(patch, g, spr, opts.lanczos_steps);
    std::vector<double> out(grid.size(), 0.0);
    if (L.m == 0) return out;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double r4 = 0.0, r2 = 0.0, r1 = 0.0;
        for (int lev = 0; lev < 3; ++lev) {
            double eps = opts.eps0 * (lev == 0 ? 4.0 : lev == 1 ? 2.0 : 1.0);
            cdouble val = tridiag_resolvent00(L, cdouble{grid[j], -eps});
            double rho = L.norm_sq * std::imag(val) / kPi;
            (lev == 0 ? r4 : lev == 1 ? r2 : r1) = rho;
        }
        out[j] = richardson3(r4, r2, r1);
    }
    return out;
}

SpectralDensity finalize_density(std::vector<double> grid, std::vector<double> values) {
    for (double& v : values) v = std::max(0.0, v);
    SpectralDensity rho;
    rho.support_lo = grid.front();
    rho.support_hi = grid.back();
    rho.grid = std::move(grid);
    rho.values = std::move(values);
    rho.total_mass = trapezoid(rho.grid, rho.values);
    return rho;
}

}  // namespace

double lattice_band_top(int d) { return 4.0 * d; }

double comb_band_top(int d) {
    double dd = d;
    return 4.0 * std::sqrt(dd * dd + 1.0);
}

SpectralDensity density_continuum_rd(int d, const RadialFormFactor& g,
                                     const SpectralOptions& opts) {
    if (d < 3) throw std::invalid_argument("unsupported dimension below 3");
    if (g.support_radius <= 0.0 || g.samples.size() < 2)
        throw std::invalid_argument("radial form factor needs a positive radius and samples");
    const double band = 0.5 * g.support_radius * g.support_radius;
    auto grid = uniform_grid(0.0, band, opts.grid_points);
    const double area = sphere_area(d);
    std::vector<double> values(grid.size(), 0.0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double nu = grid[j];
        if (nu <= 0.0) continue;
        double p = std::sqrt(2.0 * nu);
        double G = g.value(p);
        values[j] = area * std::pow(2.0 * nu, 0.5 * (d - 2)) * G * G;
    }
    return finalize_density(std::move(grid), std::move(values));
}

ComplexDensity density_continuum_rd_cross(int d, const RadialFormFactor& xi,
                                          const RadialFormFactor& zeta,
                                          const SpectralOptions& opts) {
    if (d < 3) throw std::invalid_argument("unsupported dimension below 3");
    const double r = std::min(xi.support_radius, zeta.support_radius);
    const double band = 0.5 * r * r;
    ComplexDensity out;
    out.grid = uniform_grid(0.0, band, opts.grid_points);
    out.values.assign(out.grid.size(), cdouble{0.0, 0.0});
    const double area = sphere_area(d);
    for (std::size_t j = 0; j < out.grid.size(); ++j) {
        double nu = out.grid[j];
        if (nu <= 0.0) continue;
        double p = std::sqrt(2.0 * nu);
        out.values[j] = area * std::pow(2.0 * nu, 0.5 * (d - 2)) * xi.value(p) * zeta.value(p);
    }
    return out;
}

SpectralDensity density_lattice_zd(const GraphPatch& patch, const GraphExplicit& g,
                                   const SpectralOptions& opts) {
    auto grid = uniform_grid(0.0, lattice_band_top(patch.d), opts.grid_points);
    auto vals = lattice_density_values(patch, g, g, false, grid, opts);
    std::vector<double> re(vals.size());
    for (std::size_t j = 0; j < vals.size(); ++j) re[j] = std::real(vals[j]);
    return finalize_density(std::move(grid), std::move(re));
}

ComplexDensity density_lattice_zd_cross(const GraphPatch& patch, const GraphExplicit& xi,
                                        const GraphExplicit& zeta,
                                        const SpectralOptions& opts) {
    ComplexDensity out;
    out.grid = uniform_grid(0.0, lattice_band_top(patch.d), opts.grid_points);
    out.values = lattice_density_values(patch, xi, zeta, true, out.grid, opts);
    return out;
}

SpectralDensity density_graph_resolvent(const GraphPatch& patch, const GraphExplicit& g,
                                        const SpectralOptions& opts) {
    double top = patch.kind == PatchKind::Comb ? comb_band_top(patch.d)
                                               : 2.0 * patch_spectral_radius(patch);
    auto grid = uniform_grid(0.0, top, opts.grid_points);
    auto values = graph_density_raw(patch, g, grid, opts);
    return finalize_density(std::move(grid), std::move(values));
}

ComplexDensity density_graph_resolvent_cross(const GraphPatch& patch,
                                             const GraphExplicit& xi,
                                             const GraphExplicit& zeta,
                                             const SpectralOptions& opts) {
    double top = patch.kind == PatchKind::Comb ? comb_band_top(patch.d)
                                               : 2.0 * patch_spectral_radius(patch);
    ComplexDensity out;
    out.grid = uniform_grid(0.0, top, opts.grid_points);
    out.values.assign(out.grid.size(), cdouble{0.0, 0.0});
    // d<xi, E zeta>/dnu by polarization over xi + i^k zeta, k = 0..3.
    const cdouble ik[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const cdouble mik[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    for (int k = 0; k < 4; ++k) {
        GraphExplicit v;
        v.amp = xi.amp;
        for (const auto& [id, a] : zeta.amp) v.amp[id] += ik[k] * a;
        std::erase_if(v.amp, [](const auto& kv) { return kv.second == cdouble{0.0, 0.0}; });
        auto rho = graph_density_raw(patch, v, out.grid, opts);
        for (std::size_t j = 0; j < out.grid.size(); ++j)
            out.values[j] += 0.25 * mik[k] * rho[j];
    }
    return out;
}

ResolventBoundary resolvent_boundary(const SpectralDensity& rho, double pv_consistency_tol) {
    ResolventBoundary out;
    out.grid = rho.grid;
    out.imag_part.resize(rho.grid.size());
    out.real_part.resize(rho.grid.size());
    for (std::size_t j = 0; j < rho.grid.size(); ++j) {
        out.imag_part[j] = kPi * rho.values[j];
        out.real_part[j] = pv_hilbert_at(rho.grid, rho.values, rho.grid[j]);
    }

    // Half-resolution transform must agree; a large shift means the grid
    // cannot represent its own Hilbert transform.
    std::vector<double> cx, cf;
    for (std::size_t j = 0; j < rho.grid.size(); j += 2) {
        cx.push_back(rho.grid[j]);
        cf.push_back(rho.values[j]);
    }
    double scale = 0.0;
    for (std::size_t j = 0; j < rho.grid.size(); ++j)
        scale = std::max(scale, std::hypot(out.real_part[j], out.imag_part[j]));
    scale = std::max(scale, 1e-30);
    double worst = 0.0;
    for (std::size_t j = 0; j < cx.size(); ++j)
        worst = std::max(worst, std::abs(pv_hilbert_at(cx, cf, cx[j]) - out.real_part[2 * j]));
    if (worst > pv_consistency_tol * scale)
        throw std::runtime_error("grid too coarse for the principal-value transform");

    out.sup_bound = scale;
    return out;
}

std::string export_density_csv(const SpectralDensity& rho) {
    std::ostringstream os;
    os << "nu,rho\n";
    for (std::size_t j = 0; j < rho.grid.size(); ++j)
        os << format_sig12(rho.grid[j]) << ',' << format_sig12(rho.values[j]) << '\n';
    return os.str();
}

SpectralDensity import_density_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<double> grid, values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double nu, r;
        if (!(ls >> nu >> r)) {
            if (grid.empty()) continue;  // header row
            throw std::invalid_argument("malformed density CSV line: " + line);
        }
        grid.push_back(nu);
        values.push_back(r);
    }
    if (grid.size() < 2) throw std::invalid_argument("density CSV needs at least two rows");
    for (std::size_t j = 1; j < grid.size(); ++j)
        if (grid[j] <= grid[j - 1]) throw std::invalid_argument("density CSV grid must ascend");
    for (double v : values)
        if (v < 0.0) throw std::invalid_argument("density CSV has negative values");
    if (grid.front() < 0.0) throw std::invalid_argument("density support must lie in [0, inf)");
    return finalize_density(std::move(grid), std::move(values));
}

}  // namespace bosejj
