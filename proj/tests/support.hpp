#pragma once

// Shared fixtures and brute-force reference implementations for the tests.
// Oracles here deliberately avoid the library's own kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ecir/core_repr.hpp"
#include "ecir/event_sim.hpp"
#include "ecir/types.hpp"

namespace ecir::testing {

inline std::vector<double> sorted_distinct(std::mt19937_64& rng, std::size_t n, double lo, double hi,
                                           double min_gap = 1e-3)
{
    std::uniform_real_distribution<double> u(lo, hi);
    for (;;) {
        std::vector<double> v(n);
        for (double& x : v) x = u(rng);
        std::sort(v.begin(), v.end());
        bool ok = true;
        for (std::size_t i = 1; i < n; ++i) ok = ok && v[i] - v[i - 1] > min_gap;
        if (ok) return v;
    }
}

/// Lagrange basis by the plain product formula, in raw time.
inline double product_basis(const std::vector<double>& nodes, std::size_t i, double t)
{
    double num = 1.0, den = 1.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (j == i) continue;
        num *= t - nodes[j];
        den *= nodes[i] - nodes[j];
    }
    return num / den;
}

/// Trapezoid rule on `samples` equal panels.
template <class Fn>
double trapezoid_mean(Fn&& f, double a, double b, std::size_t samples)
{
    const double h = (b - a) / static_cast<double>(samples);
    double s = 0.5 * (f(a) + f(b));
    for (std::size_t k = 1; k < samples; ++k) s += f(a + h * static_cast<double>(k));
    return s * h / (b - a);
}

/// Nearest-event pivot shifting done naively: full scan per pivot.
inline std::vector<double> keypoint_oracle(const std::vector<double>& events, double t0, double t1, std::size_t n)
{
    const double len = t1 - t0;
    std::vector<double> distinct;
    for (double e : events) {
        if (std::find(distinct.begin(), distinct.end(), e) == distinct.end()) distinct.push_back(e);
    }
    std::vector<bool> claimed(distinct.size(), false);
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double pivot = t0 + (static_cast<double>(i) + 0.5) * len / static_cast<double>(n);
        std::size_t best = distinct.size();
        for (std::size_t k = 0; k < distinct.size(); ++k) {
            if (best == distinct.size() || std::abs(distinct[k] - pivot) < std::abs(distinct[best] - pivot) ||
                (std::abs(distinct[k] - pivot) == std::abs(distinct[best] - pivot) && distinct[k] < distinct[best])) {
                best = k;
            }
        }
        if (best == distinct.size() || claimed[best]) {
            out.push_back(pivot);
        } else {
            claimed[best] = true;
            out.push_back(distinct[best]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Per-pixel intensity as a degree-`degree` polynomial in tau, kept inside (0.1, 0.9).
struct PolyScene {
    std::size_t width = 0;
    std::size_t height = 0;
    ExposureInterval interval{-0.06, 0.06};
    std::vector<std::vector<double>> coeffs;  // per pixel, in tau

    double value(std::size_t pixel, double t) const
    {
        const double tau = interval.normalize(t);
        double s = 0.0;
        for (std::size_t k = coeffs[pixel].size(); k-- > 0;) s = s * tau + coeffs[pixel][k];
        return s;
    }

    Frame frame(double t) const
    {
        Frame f(width, height);
        for (std::size_t p = 0; p < f.size(); ++p) f[p] = value(p, t);
        return f;
    }

    SharpVideo video(std::size_t frames) const
    {
        std::vector<double> ts = uniform_schedule(interval, frames);
        std::vector<Frame> fs;
        for (double t : ts) fs.push_back(frame(t));
        return SharpVideo(ts, fs, interval);
    }

    /// Exact temporal mean: odd powers vanish over [-1, 1].
    Frame exact_blur() const
    {
        Frame f(width, height);
        for (std::size_t p = 0; p < f.size(); ++p) {
            double s = 0.0;
            for (std::size_t k = 0; k < coeffs[p].size(); k += 2) s += coeffs[p][k] / static_cast<double>(k + 1);
            f[p] = s;
        }
        return f;
    }
};

inline PolyScene random_poly_scene(std::size_t w, std::size_t h, std::size_t degree, std::uint64_t seed,
                                   ExposureInterval interval = ExposureInterval::centered(0.12))
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PolyScene s;
    s.width = w;
    s.height = h;
    s.interval = interval;
    s.coeffs.resize(w * h);
    for (auto& c : s.coeffs) {
        std::vector<double> raw(degree + 1);
        double norm = 0.0;
        for (double& x : raw) {
            x = u(rng);
            norm += std::abs(x);
        }
        c.assign(degree + 1, 0.0);
        c[0] = 0.5;
        for (std::size_t k = 0; k <= degree; ++k) c[k] += 0.4 * raw[k] / norm;
    }
    return s;
}

/// Smoothly moving bright blob over a textured background; intensities in (0.05, 0.95).
inline SharpVideo moving_blob_video(std::size_t w, std::size_t h, std::size_t frames, const ExposureInterval& iv,
                                    double speed_px = 10.0)
{
    std::vector<double> ts = uniform_schedule(iv, frames);
    std::vector<Frame> fs;
    for (double t : ts) {
        const double s = iv.normalize(t);
        const double cx = 0.5 * static_cast<double>(w) + speed_px * s;
        const double cy = 0.5 * static_cast<double>(h) + 0.5 * speed_px * s;
        Frame f(w, h);
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
                const double blob = std::exp(-(dx * dx + dy * dy) / (2.0 * 16.0));
                const double bg = 0.25 + 0.1 * std::sin(0.3 * static_cast<double>(x)) * std::cos(0.2 * static_cast<double>(y));
                f(x, y) = std::clamp(bg + 0.6 * blob, 0.05, 0.95);
            }
        }
        fs.push_back(std::move(f));
    }
    return SharpVideo(ts, fs, iv);
}

/// Random intensity curve of degree n in tau, bounded inside (0.1, 0.9), written in
/// the representation: derivative values are dL/dt sampled at `nodes`, so the
/// interpolant reproduces dL/dt exactly. The integration constant is left at 0.
inline IntensityPoly random_intensity_poly(std::mt19937_64& rng, const std::vector<double>& nodes,
                                           const ExposureInterval& interval)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = nodes.size();
    std::vector<double> c(n + 1);
    double norm = 0.0;
    for (double& x : c) {
        x = u(rng);
        norm += std::abs(x);
    }
    std::vector<double> vals;
    for (double t : nodes) {
        const double tau = interval.normalize(t);
        double d = 0.0;
        for (std::size_t k = n; k >= 1; --k) d = d * tau + static_cast<double>(k) * c[k];
        vals.push_back(0.4 * d / norm * 2.0 / interval.length());
    }
    return IntensityPoly(KeypointSet(nodes, interval), vals, 0.0);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("ecir_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace ecir::testing
