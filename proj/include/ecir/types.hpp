#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ecir/error.hpp"

namespace ecir {

/// Closed time window [t_start, t_end] in seconds over which a frame integrates light.
class ExposureInterval {
  public:
    ExposureInterval(double t_start, double t_end);

    /// Interval of length `length` centred on zero.
    static ExposureInterval centered(double length);

    double t_start() const noexcept { return t_start_; }
    double t_end() const noexcept { return t_end_; }
    double length() const noexcept { return t_end_ - t_start_; }

    bool contains(double t) const noexcept { return t >= t_start_ && t <= t_end_; }

    /// Maps t to tau in [-1, 1]. All polynomial arithmetic happens in tau.
    double normalize(double t) const noexcept { return (2.0 * t - (t_start_ + t_end_)) / length(); }
    double denormalize(double tau) const noexcept
    {
        return 0.5 * (t_start_ + t_end_) + 0.5 * tau * length();
    }

    friend bool operator==(const ExposureInterval&, const ExposureInterval&) = default;

  private:
    double t_start_;
    double t_end_;
};

struct Event {
    std::int32_t x = 0;
    std::int32_t y = 0;
    double t = 0.0;
    std::int8_t p = 1;  // +1 or -1

    friend bool operator==(const Event&, const Event&) = default;
};

/// Orders events by (t, y, x, p); the canonical order of every EventStream.
bool event_less(const Event& a, const Event& b) noexcept;

struct EventStream {
    std::vector<Event> events;
    ExposureInterval interval;

    /// Throws ValidationError unless events are sorted, inside the interval,
    /// inside a width x height sensor and carry polarity +-1.
    void validate(std::size_t width, std::size_t height) const;
};

/// Row-major h x w grid of intensities. Values are unclamped; see clamped().
class Frame {
  public:
    Frame() = default;
    Frame(std::size_t width, std::size_t height, double fill = 0.0);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator()(std::size_t x, std::size_t y) noexcept { return values_[y * width_ + x]; }
    double operator()(std::size_t x, std::size_t y) const noexcept { return values_[y * width_ + x]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool same_shape(const Frame& other) const noexcept
    {
        return width_ == other.width_ && height_ == other.height_;
    }

    /// Copy with every value clamped to [0, 1]; used at export time only.
    Frame clamped() const;

    friend bool operator==(const Frame&, const Frame&) = default;

  private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> values_;
};

struct BlurryFrame {
    Frame frame;
    ExposureInterval interval;
};

/// d timestamps evenly spaced over the interval, endpoints included.
/// A single timestamp is placed at the interval midpoint.
std::vector<double> uniform_schedule(const ExposureInterval& interval, std::size_t d);

}  // namespace ecir
