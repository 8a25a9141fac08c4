#include "ecir/core_repr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace ecir {

namespace {

using Scratch = std::array<double, kMaxKeypoints + 1>;

void normalize_nodes(std::span<const double> times, const ExposureInterval& interval, std::span<double> out)
{
    for (std::size_t i = 0; i < times.size(); ++i) out[i] = interval.normalize(times[i]);
}

void require_in_interval(const ExposureInterval& interval, double t)
{
    if (!interval.contains(t)) {
        throw OutOfRangeError("time " + std::to_string(t) + " outside exposure interval [" +
                              std::to_string(interval.t_start()) + ", " + std::to_string(interval.t_end()) +
                              "]");
    }
}

// Primitive coefficients (n + 1 entries) of a single pixel.
std::span<const double> primitive_of(const IntensityPoly& poly, double constant, Scratch& nodes, Scratch& coeffs)
{
    const std::size_t n = poly.keypoints.size();
    normalize_nodes(poly.keypoints.timestamps(), poly.interval(), nodes);
    kernel::primitive_monomial({nodes.data(), n}, poly.derivative_values, 0.5 * poly.interval().length(),
                               constant, {coeffs.data(), n + 1});
    return {coeffs.data(), n + 1};
}

}  // namespace

KeypointSet::KeypointSet(std::vector<double> timestamps, ExposureInterval interval)
    : timestamps_(std::move(timestamps)), interval_(interval)
{
    if (timestamps_.empty()) throw InvalidArgument("keypoint set is empty");
    if (timestamps_.size() > kMaxKeypoints) {
        throw InvalidArgument("at most " + std::to_string(kMaxKeypoints) + " keypoints are supported");
    }
    for (std::size_t i = 0; i < timestamps_.size(); ++i) {
        if (!interval_.contains(timestamps_[i])) {
            throw InvalidArgument("keypoint " + std::to_string(i) + " outside exposure interval");
        }
        if (i > 0 && !(interval_.normalize(timestamps_[i]) > interval_.normalize(timestamps_[i - 1]))) {
            throw SingularBasisError("keypoints must be strictly increasing (index " + std::to_string(i) + ")");
        }
    }
}

IntensityPoly::IntensityPoly(KeypointSet kps, std::vector<double> values, double constant)
    : keypoints(std::move(kps)), derivative_values(std::move(values)), integration_constant(constant)
{
    if (derivative_values.size() != keypoints.size()) {
        throw InvalidArgument("expected " + std::to_string(keypoints.size()) + " derivative values, got " +
                              std::to_string(derivative_values.size()));
    }
}

double MonomialPoly::eval_normalized(double tau) const noexcept { return kernel::horner(coefficients, tau); }

KeypointSet select_keypoints(std::span<const double> event_times, const ExposureInterval& interval, std::size_t n)
{
    if (n < 2) throw InvalidArgument("keypoint selection needs n >= 2");
    if (n > kMaxKeypoints) throw InvalidArgument("at most " + std::to_string(kMaxKeypoints) + " keypoints");
    for (std::size_t i = 0; i < event_times.size(); ++i) {
        if (!interval.contains(event_times[i])) throw InvalidArgument("event timestamp outside exposure interval");
        if (i > 0 && event_times[i] < event_times[i - 1]) throw InvalidArgument("event timestamps not sorted");
    }

    // Claims are per distinct timestamp: two events at the same instant are one candidate.
    std::vector<double> candidates(event_times.begin(), event_times.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    std::vector<bool> claimed(candidates.size(), false);

    const double length = interval.length();
    std::vector<double> keypoints(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pivot = interval.t_start() + (static_cast<double>(i) + 0.5) * length / static_cast<double>(n);
        keypoints[i] = pivot;
        if (candidates.empty()) continue;

        auto it = std::lower_bound(candidates.begin(), candidates.end(), pivot);
        std::size_t nearest;
        if (it == candidates.end()) {
            nearest = candidates.size() - 1;
        } else if (it == candidates.begin()) {
            nearest = 0;
        } else {
            const auto hi = static_cast<std::size_t>(it - candidates.begin());
            // Ties go to the earlier event.
            nearest = (pivot - candidates[hi - 1] <= candidates[hi] - pivot) ? hi - 1 : hi;
        }
        if (!claimed[nearest]) {
            claimed[nearest] = true;
            keypoints[i] = candidates[nearest];
        }
    }

    std::sort(keypoints.begin(), keypoints.end());
    const double nudge = length * 1e-9;
    for (std::size_t i = 1; i < n; ++i) {
        if (!(interval.normalize(keypoints[i]) > interval.normalize(keypoints[i - 1]))) {
            keypoints[i] = keypoints[i - 1] + nudge;
        }
    }
    if (keypoints.back() > interval.t_end()) {
        keypoints.back() = interval.t_end();
        for (std::size_t i = n - 1; i-- > 0;) {
            if (!(interval.normalize(keypoints[i]) < interval.normalize(keypoints[i + 1]))) {
                keypoints[i] = keypoints[i + 1] - nudge;
            }
        }
    }
    return KeypointSet(std::move(keypoints), interval);
}

double lagrange_basis(const KeypointSet& keypoints, std::size_t i, double t)
{
    const std::size_t n = keypoints.size();
    if (i >= n) throw InvalidArgument("basis index " + std::to_string(i) + " out of range for n=" + std::to_string(n));
    Scratch nodes{}, weights{}, values{};
    normalize_nodes(keypoints.timestamps(), keypoints.interval(), nodes);
    kernel::barycentric_weights({nodes.data(), n}, {weights.data(), n});
    kernel::basis_values({nodes.data(), n}, {weights.data(), n}, keypoints.interval().normalize(t),
                         {values.data(), n});
    return values[i];
}

double eval_derivative(const IntensityPoly& poly, double t)
{
    require_in_interval(poly.interval(), t);
    const std::size_t n = poly.keypoints.size();
    Scratch nodes{}, weights{}, values{};
    normalize_nodes(poly.keypoints.timestamps(), poly.interval(), nodes);
    kernel::barycentric_weights({nodes.data(), n}, {weights.data(), n});
    kernel::basis_values({nodes.data(), n}, {weights.data(), n}, poly.interval().normalize(t), {values.data(), n});
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += poly.derivative_values[i] * values[i];
    return sum;
}

double eval_primitive(const IntensityPoly& poly, double t)
{
    require_in_interval(poly.interval(), t);
    Scratch nodes{}, coeffs{};
    return kernel::horner(primitive_of(poly, poly.integration_constant, nodes, coeffs),
                          poly.interval().normalize(t));
}

double blur_mean(const IntensityPoly& poly)
{
    Scratch nodes{}, coeffs{};
    return kernel::mean_over_unit_interval(primitive_of(poly, poly.integration_constant, nodes, coeffs));
}

double solve_constant(const IntensityPoly& poly, double blurry_value)
{
    if (!std::isfinite(blurry_value)) throw InvalidArgument("blurry value must be finite");
    Scratch nodes{}, coeffs{};
    return blurry_value - kernel::mean_over_unit_interval(primitive_of(poly, 0.0, nodes, coeffs));
}

MonomialPoly to_monomial(const IntensityPoly& poly)
{
    Scratch nodes{}, coeffs{};
    auto c = primitive_of(poly, poly.integration_constant, nodes, coeffs);
    return MonomialPoly{{c.begin(), c.end()}, poly.interval()};
}

namespace kernel {

void barycentric_weights(std::span<const double> nodes, std::span<double> weights) noexcept
{
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double prod = 1.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (j != i) prod *= nodes[i] - nodes[j];
        }
        weights[i] = 1.0 / prod;
    }
}

void basis_values(std::span<const double> nodes, std::span<const double> weights, double tau,
                  std::span<double> out) noexcept
{
    const std::size_t n = nodes.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (tau == nodes[i]) {
            std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
            out[i] = 1.0;
            return;
        }
    }
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = weights[i] / (tau - nodes[i]);
        denom += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= denom;
}

void interpolant_monomial(std::span<const double> nodes, std::span<const double> values,
                          std::span<double> out) noexcept
{
    const std::size_t n = nodes.size();
    std::array<double, kMaxKeypoints> dd{};
    std::copy(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n), dd.begin());
    for (std::size_t j = 1; j < n; ++j) {
        for (std::size_t i = n - 1; i >= j; --i) dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - j]);
    }

    // Expand the Newton form from the innermost factor outwards.
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
    out[0] = dd[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) {
        const std::size_t degree = n - 2 - k;
        for (std::size_t j = degree + 1; j >= 1; --j) out[j] = out[j - 1] - nodes[k] * out[j];
        out[0] = dd[k] - nodes[k] * out[0];
    }
}

void primitive_monomial(std::span<const double> nodes, std::span<const double> dldt, double half_length,
                        double constant, std::span<double> out) noexcept
{
    const std::size_t n = nodes.size();
    std::array<double, kMaxKeypoints> q{};
    interpolant_monomial(nodes, dldt, {q.data(), n});
    out[0] = constant;
    for (std::size_t k = 0; k < n; ++k) out[k + 1] = half_length * q[k] / static_cast<double>(k + 1);
}

double horner(std::span<const double> coefficients, double tau) noexcept
{
    double acc = 0.0;
    for (std::size_t k = coefficients.size(); k-- > 0;) acc = acc * tau + coefficients[k];
    return acc;
}

double mean_over_unit_interval(std::span<const double> coefficients) noexcept
{
    double sum = 0.0;
    for (std::size_t k = 0; k < coefficients.size(); k += 2) sum += coefficients[k] / static_cast<double>(k + 1);
    return sum;
}

}  // namespace kernel

KeypointSet KeypointField::keypoint_set(std::size_t pixel) const
{
    auto ts = at(pixel);
    return KeypointSet({ts.begin(), ts.end()}, interval);
}

KeypointField select_keypoints_field(const PixelEvents& events, std::size_t n, Exec exec)
{
    if (n < 2 || n > kMaxKeypoints) throw InvalidArgument("keypoint count must be in [2, " + std::to_string(kMaxKeypoints) + "]");
    KeypointField field{events.width(), events.height(), n, events.interval(), {}};
    field.times.resize(field.pixel_count() * n);
    for_each_index(exec, field.pixel_count(), [&](std::size_t pixel) {
        const KeypointSet kps = select_keypoints(events.times(pixel), events.interval(), n);
        std::copy(kps.timestamps().begin(), kps.timestamps().end(),
                  field.times.begin() + static_cast<std::ptrdiff_t>(pixel * n));
    });
    return field;
}

PolyField::PolyField(KeypointField kps)
    : keypoints(std::move(kps)),
      derivatives(keypoints.pixel_count() * keypoints.n, 0.0),
      constants(keypoints.pixel_count(), 0.0)
{
}

IntensityPoly PolyField::poly(std::size_t x, std::size_t y) const
{
    const std::size_t pixel = y * width() + x;
    auto d = derivatives_at(pixel);
    return IntensityPoly(keypoints.keypoint_set(pixel), {d.begin(), d.end()}, constants[pixel]);
}

void PolyField::set_poly(std::size_t x, std::size_t y, const IntensityPoly& poly)
{
    if (poly.keypoints.size() != n() || !(poly.interval() == interval())) {
        throw InvalidArgument("polynomial does not match the field's keypoint count or interval");
    }
    const std::size_t pixel = y * width() + x;
    std::copy(poly.keypoints.timestamps().begin(), poly.keypoints.timestamps().end(),
              keypoints.times.begin() + static_cast<std::ptrdiff_t>(pixel * n()));
    std::copy(poly.derivative_values.begin(), poly.derivative_values.end(), derivatives_at(pixel).begin());
    constants[pixel] = poly.integration_constant;
}

Frame render_frame(const PolyField& polys, double t, Exec exec)
{
    const double ts[] = {t};
    return std::move(render_frames(polys, ts, exec).front());
}

std::vector<Frame> render_frames(const PolyField& polys, std::span<const double> timestamps, Exec exec)
{
    std::vector<double> taus;
    taus.reserve(timestamps.size());
    for (double t : timestamps) {
        require_in_interval(polys.interval(), t);
        taus.push_back(polys.interval().normalize(t));
    }
    std::vector<Frame> frames(timestamps.size(), Frame(polys.width(), polys.height()));
    const std::size_t n = polys.n();
    const double half_length = 0.5 * polys.interval().length();
    for_each_index(exec, polys.keypoints.pixel_count(), [&](std::size_t pixel) {
        Scratch nodes{}, coeffs{};
        normalize_nodes(polys.keypoints.at(pixel), polys.interval(), nodes);
        kernel::primitive_monomial({nodes.data(), n}, polys.derivatives_at(pixel), half_length,
                                   polys.constants[pixel], {coeffs.data(), n + 1});
        for (std::size_t k = 0; k < taus.size(); ++k) frames[k][pixel] = kernel::horner({coeffs.data(), n + 1}, taus[k]);
    });
    return frames;
}

}  // namespace ecir
