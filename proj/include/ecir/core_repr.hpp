#pragma once

// Continuous per-pixel intensity representation.
//
// The temporal derivative dL/dt of a pixel is the Lagrange interpolant of n
// values placed at n event-aligned keypoints; the intensity L(t) is its exact
// antiderivative plus an integration constant fixed by the blurry frame.
//
// All polynomial arithmetic is done in normalized time tau in [-1, 1]
// (ExposureInterval::normalize). The antiderivative is anchored so that it
// vanishes at the interval midpoint (tau = 0); the integration constant is
// therefore L(t_mid) when the interpolant is odd and, in general, the value
// that makes the temporal mean of L equal the blurry intensity.

#include <cstddef>
#include <span>
#include <vector>

#include "ecir/parallel.hpp"
#include "ecir/pixel_events.hpp"
#include "ecir/types.hpp"

namespace ecir {

inline constexpr std::size_t kMaxKeypoints = 32;

/// Strictly increasing timestamps inside an exposure interval.
class KeypointSet {
  public:
    /// Throws SingularBasisError unless strictly increasing, InvalidArgument
    /// when empty, too large, or outside the interval.
    KeypointSet(std::vector<double> timestamps, ExposureInterval interval);

    std::span<const double> timestamps() const noexcept { return timestamps_; }
    std::size_t size() const noexcept { return timestamps_.size(); }
    const ExposureInterval& interval() const noexcept { return interval_; }

  private:
    std::vector<double> timestamps_;
    ExposureInterval interval_;
};

struct IntensityPoly {
    /// Throws InvalidArgument if derivative_values.size() != keypoints.size().
    IntensityPoly(KeypointSet keypoints, std::vector<double> derivative_values,
                  double integration_constant = 0.0);

    const ExposureInterval& interval() const noexcept { return keypoints.interval(); }

    KeypointSet keypoints;
    std::vector<double> derivative_values;  // dL/dt at each keypoint, per second
    double integration_constant;
};

/// L(t) = sum_k coefficients[k] * tau^k with tau = interval.normalize(t).
struct MonomialPoly {
    std::vector<double> coefficients;
    ExposureInterval interval;

    std::size_t degree() const noexcept { return coefficients.empty() ? 0 : coefficients.size() - 1; }
    double eval_normalized(double tau) const noexcept;
    double operator()(double t) const noexcept { return eval_normalized(interval.normalize(t)); }
};

/// Moves n evenly spaced pivots (cell midpoints) onto their nearest event
/// timestamps. A pivot whose nearest event was already claimed by an earlier
/// pivot stays put. Result is sorted; residual ties are separated by T*1e-9.
KeypointSet select_keypoints(std::span<const double> event_times, const ExposureInterval& interval,
                             std::size_t n);

/// Lagrange basis function i (0-based) of the keypoints, evaluated at t.
double lagrange_basis(const KeypointSet& keypoints, std::size_t i, double t);

double eval_derivative(const IntensityPoly& poly, double t);
double eval_primitive(const IntensityPoly& poly, double t);

/// Exact temporal mean (1/T) * integral of L over the interval.
double blur_mean(const IntensityPoly& poly);

/// Integration constant that makes the temporal mean of L equal blurry_value.
/// The constant already stored in poly is ignored.
double solve_constant(const IntensityPoly& poly, double blurry_value);

MonomialPoly to_monomial(const IntensityPoly& poly);

// Raw kernels on normalized nodes, shared by the per-pixel loops. No validation:
// callers guarantee 1 <= nodes.size() <= kMaxKeypoints and distinct nodes.
namespace kernel {

/// Barycentric weights w_i = 1 / prod_{j != i} (tau_i - tau_j).
void barycentric_weights(std::span<const double> nodes, std::span<double> weights) noexcept;

/// All basis values at tau (second barycentric form, exact at the nodes).
void basis_values(std::span<const double> nodes, std::span<const double> weights, double tau,
                  std::span<double> out) noexcept;

/// Monomial coefficients (in tau) of the interpolant through (nodes, values),
/// via Newton divided differences. out.size() == nodes.size().
void interpolant_monomial(std::span<const double> nodes, std::span<const double> values,
                          std::span<double> out) noexcept;

/// Monomial coefficients of L in tau: out[0] = constant, out[k+1] = half_length * q[k] / (k+1),
/// where q are the interpolant's coefficients of the per-second derivative values.
void primitive_monomial(std::span<const double> nodes, std::span<const double> dldt, double half_length,
                        double constant, std::span<double> out) noexcept;

double horner(std::span<const double> coefficients, double tau) noexcept;

/// (1/2) * integral over [-1, 1] of the monomial polynomial.
double mean_over_unit_interval(std::span<const double> coefficients) noexcept;

}  // namespace kernel

/// Per-pixel keypoint timestamps for a whole frame, pixel-major (n per pixel).
struct KeypointField {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t n = 0;
    ExposureInterval interval{-0.5, 0.5};
    std::vector<double> times;

    std::size_t pixel_count() const noexcept { return width * height; }
    std::span<const double> at(std::size_t pixel) const noexcept { return {times.data() + pixel * n, n}; }
    KeypointSet keypoint_set(std::size_t pixel) const;
};

KeypointField select_keypoints_field(const PixelEvents& events, std::size_t n, Exec exec = Exec::parallel);

/// Intensity polynomials for every pixel of an h x w frame.
struct PolyField {
    KeypointField keypoints;
    std::vector<double> derivatives;  // pixel-major, n per pixel, per second
    std::vector<double> constants;    // one per pixel

    explicit PolyField(KeypointField kps);

    std::size_t width() const noexcept { return keypoints.width; }
    std::size_t height() const noexcept { return keypoints.height; }
    std::size_t n() const noexcept { return keypoints.n; }
    const ExposureInterval& interval() const noexcept { return keypoints.interval; }

    std::span<double> derivatives_at(std::size_t pixel) noexcept
    {
        return {derivatives.data() + pixel * n(), n()};
    }
    std::span<const double> derivatives_at(std::size_t pixel) const noexcept
    {
        return {derivatives.data() + pixel * n(), n()};
    }

    IntensityPoly poly(std::size_t x, std::size_t y) const;
    void set_poly(std::size_t x, std::size_t y, const IntensityPoly& poly);
};

/// Latent frame at t (unclamped). Throws OutOfRangeError if t is outside the interval.
Frame render_frame(const PolyField& polys, double t, Exec exec = Exec::parallel);

/// Renders every timestamp; converts each pixel to monomial form once.
std::vector<Frame> render_frames(const PolyField& polys, std::span<const double> timestamps,
                                 Exec exec = Exec::parallel);

}  // namespace ecir
