#pragma once

// Shared fixtures for the unit suites: a dense symmetric eigensolver used as
// an independent cross-check, temp-file plumbing for tabulated densities, and
// small closed-form density tables.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace testsupport {

// Cyclic Jacobi on a real symmetric matrix (row major). Good to ~1e-13 for
// the arrowhead sizes used in tests; eigenvalues ascend, vectors are columns.
struct JacobiResult {
    std::vector<double> values;
    std::vector<double> vectors;  // column k = vectors[j * n + k]
};

inline JacobiResult jacobi_eig(std::vector<double> a, int n) {
    std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;
    auto at = [&](std::vector<double>& m, int i, int j) -> double& {
        return m[static_cast<std::size_t>(i) * n + j];
    };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a[static_cast<std::size_t>(i) * n + j] *
                                                   a[static_cast<std::size_t>(i) * n + j];
        if (off < 1e-26) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = at(a, p, q);
                if (std::abs(apq) < 1e-300) continue;
                double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = at(a, k, p), akq = at(a, k, q);
                    at(a, k, p) = c * akp - s * akq;
                    at(a, k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = at(a, p, k), aqk = at(a, q, k);
                    at(a, p, k) = c * apk - s * aqk;
                    at(a, q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = at(v, k, p), vkq = at(v, k, q);
                    at(v, k, p) = c * vkp - s * vkq;
                    at(v, k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    JacobiResult r;
    r.values.resize(n);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) {
        r.values[i] = a[static_cast<std::size_t>(i) * n + i];
        order[i] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return r.values[i] < r.values[j]; });
    JacobiResult out;
    out.values.resize(n);
    out.vectors.resize(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        out.values[k] = r.values[order[k]];
        for (int j = 0; j < n; ++j)
            out.vectors[static_cast<std::size_t>(j) * n + k] =
                v[static_cast<std::size_t>(j) * n + order[k]];
    }
    return out;
}

inline std::filesystem::path write_temp_file(const std::string& stem, const std::string& text) {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path();
    auto path = dir / (stem + "_" + std::to_string(::getpid()) + "_" +
                       std::to_string(counter++) + ".csv");
    std::ofstream out(path);
    out << text;
    return path;
}

// Semicircle profile of given total mass on [lo, hi], tabulated on n nodes.
inline std::string semicircle_csv(double lo, double hi, double mass, int n) {
    std::ostringstream os;
    os << "nu,rho\n";
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    // integral of sqrt(1 - u^2) over [-1, 1] is pi/2
    double scale = mass / (0.5 * 3.14159265358979323846 * half);
    for (int j = 0; j < n; ++j) {
        double nu = lo + (hi - lo) * j / (n - 1);
        double u = (nu - mid) / half;
        double r = scale * std::sqrt(std::max(0.0, 1.0 - u * u));
        os << nu << ',' << r << '\n';
    }
    return os.str();
}

// Triangular bump of given mass on [lo, hi].
inline std::string tent_csv(double lo, double hi, double mass, int n) {
    std::ostringstream os;
    os << "nu,rho\n";
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double peak = mass / half;
    for (int j = 0; j < n; ++j) {
        double nu = lo + (hi - lo) * j / (n - 1);
        double r = peak * (1.0 - std::abs(nu - mid) / half);
        os << nu << ',' << std::max(0.0, r) << '\n';
    }
    return os.str();
}

}  // namespace testsupport
