#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ecir/parallel.hpp"
#include "ecir/types.hpp"

namespace ecir {

/// Contrast thresholds in log-intensity units. With sigma > 0 each pixel draws
/// its own thresholds once per sequence as c * (1 + N(0, sigma)).
struct ThresholdConfig {
    double c_plus = 0.2;
    double c_minus = -0.2;
    double sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Intensities below this are treated as this value before taking the log.
inline constexpr double kIntensityFloor = 1e-3;

/// Sharp frames sampled inside an exposure interval, first and last frame at its ends.
struct SharpVideo {
    std::vector<double> timestamps;
    std::vector<Frame> frames;
    ExposureInterval interval;

    SharpVideo(std::vector<double> timestamps, std::vector<Frame> frames, ExposureInterval interval);

    std::size_t width() const noexcept { return frames.front().width(); }
    std::size_t height() const noexcept { return frames.front().height(); }
    std::size_t size() const noexcept { return frames.size(); }

    /// Piecewise-linear interpolation between frames.
    Frame sample(double t) const;
};

/// Sign of an event triggered by a log-intensity change: +1, -1 or 0 (no event).
int polarity(double delta_ln, double c_plus, double c_minus) noexcept;

/// ESIM-style simulation: per pixel, log intensity is linear between frames and
/// every threshold crossing emits an event at the interpolated crossing time.
/// Output is sorted by (t, y, x, p). Serial and parallel drivers give identical streams.
EventStream simulate_events(const SharpVideo& video, const ThresholdConfig& cfg, Exec exec = Exec::parallel);

/// Per-pixel trapezoidal temporal mean of the video over its interval.
BlurryFrame synthesize_blur(const SharpVideo& video, Exec exec = Exec::parallel);

/// m x h x w signed event counts, bin-major.
struct EventHistogram {
    std::size_t m = 0;
    std::size_t width = 0;
    std::size_t height = 0;
    ExposureInterval interval{-0.5, 0.5};
    std::vector<double> bins;

    double& at(std::size_t bin, std::size_t x, std::size_t y) noexcept { return bins[(bin * height + y) * width + x]; }
    double at(std::size_t bin, std::size_t x, std::size_t y) const noexcept
    {
        return bins[(bin * height + y) * width + x];
    }
    Frame plane(std::size_t bin) const;
};

/// Bin index of time t; t_end lands in the last bin.
std::size_t voxel_bin(const ExposureInterval& interval, std::size_t m, double t) noexcept;

EventHistogram voxelize(const EventStream& events, std::size_t width, std::size_t height, std::size_t m);

/// Per-pixel sum of polarities of events with t in (t_a, t_b].
Frame signed_count_between(const EventStream& events, std::size_t width, std::size_t height, double t_a,
                           double t_b);

}  // namespace ecir
