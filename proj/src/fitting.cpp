#include "ecir/fitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace ecir {

namespace {

constexpr int kMaxUnknowns = static_cast<int>(kMaxKeypoints) + 1;
using NormalMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxUnknowns, kMaxUnknowns>;
using NormalVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxUnknowns, 1>;

// Ridge dominating a pivot means the unregularized system was (near) singular.
constexpr double kRankDeficientPivot = 1e3 * kFitRidge;

// Solves for (w_0..w_{n-1}, a) where w_i = dL/dtau at node i, writes dL/dt into dldt.
// Returns the rank-deficiency flag.
bool solve_pixel(std::span<const double> nodes, std::span<const double> taus, std::span<const double> samples,
                 double half_length, std::span<double> dldt)
{
    const std::size_t n = nodes.size();
    const auto unknowns = static_cast<Eigen::Index>(n + 1);

    // Psi_i: antiderivative (zero at tau = 0) of the i-th Lagrange basis, monomial form.
    std::array<std::array<double, kMaxKeypoints + 1>, kMaxKeypoints> psi{};
    std::array<double, kMaxKeypoints> unit{};
    for (std::size_t i = 0; i < n; ++i) {
        unit.fill(0.0);
        unit[i] = 1.0;
        kernel::primitive_monomial(nodes, {unit.data(), n}, 1.0, 0.0, {psi[i].data(), n + 1});
    }

    NormalMatrix normal = NormalMatrix::Zero(unknowns, unknowns);
    NormalVector rhs = NormalVector::Zero(unknowns);
    NormalVector row(unknowns);
    for (std::size_t k = 0; k < taus.size(); ++k) {
        for (std::size_t i = 0; i < n; ++i) row(static_cast<Eigen::Index>(i)) = kernel::horner({psi[i].data(), n + 1}, taus[k]);
        row(unknowns - 1) = 1.0;
        normal.selfadjointView<Eigen::Lower>().rankUpdate(row);
        rhs += samples[k] * row;
    }
    normal.diagonal().array() += kFitRidge;

    Eigen::LDLT<NormalMatrix, Eigen::Lower> ldlt(normal);
    const NormalVector solution = ldlt.solve(rhs);
    for (std::size_t i = 0; i < n; ++i) dldt[i] = solution(static_cast<Eigen::Index>(i)) / half_length;
    return ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < kRankDeficientPivot;
}

// Integration constant making the exact temporal mean equal `blurry`.
double constant_for(std::span<const double> nodes, std::span<const double> dldt, double half_length, double blurry)
{
    std::array<double, kMaxKeypoints + 1> coeffs{};
    kernel::primitive_monomial(nodes, dldt, half_length, 0.0, {coeffs.data(), nodes.size() + 1});
    return blurry - kernel::mean_over_unit_interval({coeffs.data(), nodes.size() + 1});
}

void check_fit_inputs(std::size_t samples, std::size_t n)
{
    if (samples < n) {
        throw InvalidArgument("least-squares fit needs at least n=" + std::to_string(n) + " samples, got " +
                              std::to_string(samples));
    }
}

}  // namespace

PixelFit fit_pixel(std::span<const double> timestamps, std::span<const double> samples, const KeypointSet& keypoints,
                   double blurry_value)
{
    if (timestamps.size() != samples.size()) throw InvalidArgument("one sample per timestamp required");
    const std::size_t n = keypoints.size();
    check_fit_inputs(samples.size(), n);
    const ExposureInterval& interval = keypoints.interval();

    std::vector<double> nodes(n), taus(timestamps.size()), dldt(n);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = interval.normalize(keypoints.timestamps()[i]);
    for (std::size_t k = 0; k < taus.size(); ++k) taus[k] = interval.normalize(timestamps[k]);

    const double half_length = 0.5 * interval.length();
    const bool deficient = solve_pixel(nodes, taus, samples, half_length, dldt);
    const double constant = constant_for(nodes, dldt, half_length, blurry_value);
    return {IntensityPoly(keypoints, std::move(dldt), constant), deficient};
}

std::size_t FitResult::rank_deficient_count() const noexcept
{
    return static_cast<std::size_t>(std::count(rank_deficient.begin(), rank_deficient.end(), std::uint8_t{1}));
}

FitResult fit_polys(const SharpVideo& video, const KeypointField& keypoints, const BlurryFrame& blurry, Exec exec)
{
    const std::size_t n = keypoints.n;
    check_fit_inputs(video.size(), n);
    if (keypoints.width != video.width() || keypoints.height != video.height() ||
        !blurry.frame.same_shape(video.frames.front())) {
        throw InvalidArgument("video, keypoints and blurry frame must share one frame size");
    }
    if (!(keypoints.interval == video.interval) || !(blurry.interval == video.interval)) {
        throw InvalidArgument("video, keypoints and blurry frame must share one exposure interval");
    }

    const ExposureInterval& interval = video.interval;
    const double half_length = 0.5 * interval.length();
    std::vector<double> taus(video.size());
    for (std::size_t k = 0; k < taus.size(); ++k) taus[k] = interval.normalize(video.timestamps[k]);

    FitResult result{PolyField(keypoints), std::vector<std::uint8_t>(keypoints.pixel_count(), 0)};
    for_each_index(exec, keypoints.pixel_count(), [&](std::size_t pixel) {
        std::array<double, kMaxKeypoints> nodes{};
        const auto times = keypoints.at(pixel);
        for (std::size_t i = 0; i < n; ++i) nodes[i] = interval.normalize(times[i]);
        for (std::size_t i = 1; i < n; ++i) {
            if (!(nodes[i] > nodes[i - 1])) throw SingularBasisError("pixel " + std::to_string(pixel) + ": keypoints not strictly increasing");
        }

        std::vector<double> samples(video.size());
        for (std::size_t k = 0; k < samples.size(); ++k) samples[k] = video.frames[k][pixel];

        auto dldt = result.polys.derivatives_at(pixel);
        result.rank_deficient[pixel] = solve_pixel({nodes.data(), n}, taus, samples, half_length, dldt) ? 1 : 0;
        result.polys.constants[pixel] = constant_for({nodes.data(), n}, dldt, half_length, blurry.frame[pixel]);
    });
    return result;
}

namespace {

// Exact integral of exp(c * S(s)) over the interval for one pixel.
double edi_normalizer(std::span<const double> times, std::span<const std::int8_t> polarities,
                      const ExposureInterval& interval, double c)
{
    double integral = 0.0;
    double prev = interval.t_start();
    double count = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j) {
        if (!(times[j] > interval.t_start())) continue;  // (t_start, s] never holds t_start itself
        integral += std::exp(c * count) * (times[j] - prev);
        prev = times[j];
        count += polarities[j];
    }
    integral += std::exp(c * count) * (interval.t_end() - prev);
    return integral;
}

}  // namespace

std::vector<Frame> edi_reconstruct_frames(const BlurryFrame& blurry, const PixelEvents& events, double c,
                                          std::span<const double> timestamps, Exec exec)
{
    if (!(c > 0.0)) throw InvalidArgument("EDI threshold c must be positive");
    if (blurry.frame.width() != events.width() || blurry.frame.height() != events.height()) {
        throw InvalidArgument("blurry frame and events disagree on frame size");
    }
    const ExposureInterval& interval = events.interval();
    for (double t : timestamps) {
        if (!interval.contains(t)) throw OutOfRangeError("EDI timestamp outside exposure interval");
    }
    std::vector<Frame> frames(timestamps.size(), Frame(events.width(), events.height()));
    const double length = interval.length();
    for_each_index(exec, events.pixel_count(), [&](std::size_t pixel) {
        const double scale = blurry.frame[pixel] * length / edi_normalizer(events.times(pixel), events.polarities(pixel), interval, c);
        for (std::size_t k = 0; k < timestamps.size(); ++k) {
            frames[k][pixel] = scale * std::exp(c * events.signed_count(pixel, interval.t_start(), timestamps[k]));
        }
    });
    return frames;
}

Frame edi_reconstruct(const BlurryFrame& blurry, const PixelEvents& events, double c, double t, Exec exec)
{
    const double ts[] = {t};
    return std::move(edi_reconstruct_frames(blurry, events, c, ts, exec).front());
}

Frame edi_reconstruct(const BlurryFrame& blurry, const EventStream& events, double c, double t, Exec exec)
{
    return edi_reconstruct(blurry, PixelEvents(events, blurry.frame.width(), blurry.frame.height()), c, t, exec);
}

}  // namespace ecir
