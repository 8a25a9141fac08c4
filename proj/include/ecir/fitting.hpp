#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ecir/core_repr.hpp"
#include "ecir/event_sim.hpp"
#include "ecir/parallel.hpp"
#include "ecir/pixel_events.hpp"
#include "ecir/types.hpp"

namespace ecir {

/// Ridge added to the diagonal of every per-pixel normal matrix.
inline constexpr double kFitRidge = 1e-8;

struct PixelFit {
    IntensityPoly poly;
    bool rank_deficient = false;
};

/// Least-squares fit of one pixel's derivative values and constant to samples
/// (timestamps[k], samples[k]); the constant is then re-solved so the exact
/// temporal mean equals blurry_value.
PixelFit fit_pixel(std::span<const double> timestamps, std::span<const double> samples, const KeypointSet& keypoints,
                   double blurry_value);

struct FitResult {
    PolyField polys;
    std::vector<std::uint8_t> rank_deficient;  // one flag per pixel

    std::size_t rank_deficient_count() const noexcept;
};

/// Fits every pixel of the video. Requires at least n frames.
FitResult fit_polys(const SharpVideo& video, const KeypointField& keypoints, const BlurryFrame& blurry,
                    Exec exec = Exec::parallel);

/// Event-based double integral baseline with a single threshold c:
/// L(t) = B * T * exp(c * S(t)) / integral of exp(c * S(s)) ds, where S(s) is
/// the signed event count in (t_start, s]. The integral is exact over the
/// piecewise-constant exponent.
Frame edi_reconstruct(const BlurryFrame& blurry, const PixelEvents& events, double c, double t,
                      Exec exec = Exec::parallel);
Frame edi_reconstruct(const BlurryFrame& blurry, const EventStream& events, double c, double t,
                      Exec exec = Exec::parallel);

/// All timestamps at once; each pixel's normalizing integral is computed once.
std::vector<Frame> edi_reconstruct_frames(const BlurryFrame& blurry, const PixelEvents& events, double c,
                                          std::span<const double> timestamps, Exec exec = Exec::parallel);

}  // namespace ecir
