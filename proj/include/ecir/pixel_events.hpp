#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ecir/types.hpp"

namespace ecir {

/// Events regrouped per pixel (compressed-row layout), each pixel's events in
/// time order. Built once and shared read-only by the per-pixel kernels.
class PixelEvents {
  public:
    PixelEvents(const EventStream& stream, std::size_t width, std::size_t height);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return width_ * height_; }
    const ExposureInterval& interval() const noexcept { return interval_; }

    std::span<const double> times(std::size_t pixel) const noexcept
    {
        return {times_.data() + offsets_[pixel], offsets_[pixel + 1] - offsets_[pixel]};
    }
    std::span<const std::int8_t> polarities(std::size_t pixel) const noexcept
    {
        return {polarities_.data() + offsets_[pixel], offsets_[pixel + 1] - offsets_[pixel]};
    }

    /// Sum of polarities of this pixel's events with t in (t_a, t_b].
    double signed_count(std::size_t pixel, double t_a, double t_b) const noexcept;

  private:
    std::size_t width_;
    std::size_t height_;
    ExposureInterval interval_;
    std::vector<std::size_t> offsets_;
    std::vector<double> times_;
    std::vector<std::int8_t> polarities_;
};

}  // namespace ecir
