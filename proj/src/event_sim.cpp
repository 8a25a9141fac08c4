#include "ecir/event_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

namespace ecir {

namespace {

// Absorbs rounding in the accumulated reference level, so a ramp rising by exactly
// k thresholds fires k events.
constexpr double kCrossingTolerance = 1e-10;
// Pixels per parallel work item.
constexpr std::size_t kPixelBlock = 1024;

double log_intensity(double value) noexcept { return std::log(std::max(value, kIntensityFloor)); }

struct PixelThresholds {
    std::vector<double> c_plus;
    std::vector<double> c_minus;
};

PixelThresholds draw_thresholds(const ThresholdConfig& cfg, std::size_t pixels)
{
    PixelThresholds th{std::vector<double>(pixels, cfg.c_plus), std::vector<double>(pixels, cfg.c_minus)};
    if (cfg.sigma == 0.0) return th;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> jitter(0.0, cfg.sigma);
    for (std::size_t i = 0; i < pixels; ++i) {
        // Factor floored at 0.01 so a large sigma cannot flip a threshold's sign.
        th.c_plus[i] = cfg.c_plus * std::max(0.01, 1.0 + jitter(rng));
        th.c_minus[i] = cfg.c_minus * std::max(0.01, 1.0 + jitter(rng));
    }
    return th;
}

struct PixelState {
    double ln_prev;
    double ln_ref;
};

// Advances one pixel across the frame gap [t0, t1], emitting every crossing.
template <class Emit>
void step_pixel(PixelState& s, double ln_cur, double t0, double t1, double c_plus, double c_minus, Emit&& emit)
{
    const double rise = ln_cur - s.ln_prev;
    const auto crossing_time = [&](double level) {
        const double frac = rise != 0.0 ? std::clamp((level - s.ln_prev) / rise, 0.0, 1.0) : 1.0;
        return t0 + frac * (t1 - t0);
    };
    while (ln_cur - s.ln_ref >= c_plus - kCrossingTolerance) {
        s.ln_ref += c_plus;
        emit(crossing_time(s.ln_ref), std::int8_t{1});
    }
    while (ln_cur - s.ln_ref <= c_minus + kCrossingTolerance) {
        s.ln_ref += c_minus;
        emit(crossing_time(s.ln_ref), std::int8_t{-1});
    }
    s.ln_prev = ln_cur;
}

}  // namespace

void ThresholdConfig::validate() const
{
    if (!(c_plus > 0.0)) throw InvalidArgument("c_plus must be positive");
    if (!(c_minus < 0.0)) throw InvalidArgument("c_minus must be negative");
    if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be non-negative");
}

SharpVideo::SharpVideo(std::vector<double> ts, std::vector<Frame> fs, ExposureInterval iv)
    : timestamps(std::move(ts)), frames(std::move(fs)), interval(iv)
{
    if (frames.size() < 2) throw InvalidArgument("a sharp video needs at least 2 frames");
    if (timestamps.size() != frames.size()) throw InvalidArgument("one timestamp per frame required");
    for (std::size_t k = 1; k < frames.size(); ++k) {
        if (!frames[k].same_shape(frames[0])) throw InvalidArgument("frame " + std::to_string(k) + " has a different size");
        if (!(timestamps[k] > timestamps[k - 1])) throw InvalidArgument("frame timestamps must be strictly increasing");
    }
    const double slack = 1e-9 * interval.length();
    if (std::abs(timestamps.front() - interval.t_start()) > slack ||
        std::abs(timestamps.back() - interval.t_end()) > slack) {
        throw InvalidArgument("frame timestamps must span the exposure interval");
    }
}

Frame SharpVideo::sample(double t) const
{
    if (t < timestamps.front() || t > timestamps.back()) throw OutOfRangeError("sample time outside the video");
    auto hi = static_cast<std::size_t>(std::upper_bound(timestamps.begin(), timestamps.end(), t) - timestamps.begin());
    if (hi >= timestamps.size()) return frames.back();
    const std::size_t lo = hi - 1;
    const double w = (t - timestamps[lo]) / (timestamps[hi] - timestamps[lo]);
    Frame out(width(), height());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * frames[lo][i] + w * frames[hi][i];
    return out;
}

int polarity(double delta_ln, double c_plus, double c_minus) noexcept
{
    if (delta_ln >= c_plus) return 1;
    if (delta_ln <= c_minus) return -1;
    return 0;
}

EventStream simulate_events(const SharpVideo& video, const ThresholdConfig& cfg, Exec exec)
{
    cfg.validate();
    for (const Frame& f : video.frames) {
        for (double v : f.values()) {
            if (!std::isfinite(v)) throw InvalidInputError("video contains a non-finite intensity");
        }
    }

    const std::size_t width = video.width();
    const std::size_t pixels = width * video.height();
    const PixelThresholds th = draw_thresholds(cfg, pixels);
    EventStream out{{}, video.interval};

    if (exec == Exec::serial) {
        // Reference driver: frames outermost, as a sensor would read them out.
        std::vector<PixelState> state(pixels);
        for (std::size_t i = 0; i < pixels; ++i) {
            const double ln0 = log_intensity(video.frames[0][i]);
            state[i] = {ln0, ln0};
        }
        for (std::size_t k = 1; k < video.size(); ++k) {
            for (std::size_t i = 0; i < pixels; ++i) {
                const auto x = static_cast<std::int32_t>(i % width);
                const auto y = static_cast<std::int32_t>(i / width);
                step_pixel(state[i], log_intensity(video.frames[k][i]), video.timestamps[k - 1], video.timestamps[k],
                           th.c_plus[i], th.c_minus[i],
                           [&](double t, std::int8_t p) { out.events.push_back({x, y, t, p}); });
            }
        }
    } else {
        // Same per-pixel steps, frames streamed through one pixel block at a time.
        const std::size_t blocks = (pixels + kPixelBlock - 1) / kPixelBlock;
        std::vector<std::vector<Event>> per_block(blocks);
        for_each_block(Exec::parallel, pixels, kPixelBlock, [&](std::size_t begin, std::size_t end) {
            std::vector<Event>& sink = per_block[begin / kPixelBlock];
            std::vector<PixelState> state(end - begin);
            for (std::size_t i = begin; i < end; ++i) {
                const double ln0 = log_intensity(video.frames[0][i]);
                state[i - begin] = {ln0, ln0};
            }
            for (std::size_t k = 1; k < video.size(); ++k) {
                for (std::size_t i = begin; i < end; ++i) {
                    const auto x = static_cast<std::int32_t>(i % width);
                    const auto y = static_cast<std::int32_t>(i / width);
                    step_pixel(state[i - begin], log_intensity(video.frames[k][i]), video.timestamps[k - 1],
                               video.timestamps[k], th.c_plus[i], th.c_minus[i],
                               [&](double t, std::int8_t p) { sink.push_back({x, y, t, p}); });
                }
            }
        });
        std::size_t total = 0;
        for (const auto& v : per_block) total += v.size();
        out.events.reserve(total);
        for (const auto& v : per_block) out.events.insert(out.events.end(), v.begin(), v.end());
    }
    std::sort(out.events.begin(), out.events.end(), event_less);
    return out;
}

BlurryFrame synthesize_blur(const SharpVideo& video, Exec exec)
{
    const std::size_t pixels = video.width() * video.height();
    const double length = video.interval.length();
    Frame acc(video.width(), video.height());
    if (exec == Exec::serial) {
        for (std::size_t k = 0; k + 1 < video.size(); ++k) {
            const double half_dt = 0.5 * (video.timestamps[k + 1] - video.timestamps[k]);
            for (std::size_t i = 0; i < pixels; ++i) acc[i] += half_dt * (video.frames[k][i] + video.frames[k + 1][i]);
        }
        for (std::size_t i = 0; i < pixels; ++i) acc[i] /= length;
    } else {
        for_each_block(Exec::parallel, pixels, kPixelBlock, [&](std::size_t begin, std::size_t end) {
            for (std::size_t k = 0; k + 1 < video.size(); ++k) {
                const double half_dt = 0.5 * (video.timestamps[k + 1] - video.timestamps[k]);
                for (std::size_t i = begin; i < end; ++i) acc[i] += half_dt * (video.frames[k][i] + video.frames[k + 1][i]);
            }
            for (std::size_t i = begin; i < end; ++i) acc[i] /= length;
        });
    }
    return {std::move(acc), video.interval};
}

Frame EventHistogram::plane(std::size_t bin) const
{
    Frame f(width, height);
    std::copy_n(bins.begin() + static_cast<std::ptrdiff_t>(bin * width * height), width * height, f.values().begin());
    return f;
}

std::size_t voxel_bin(const ExposureInterval& interval, std::size_t m, double t) noexcept
{
    const double pos = std::floor((t - interval.t_start()) / interval.length() * static_cast<double>(m));
    if (!(pos > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(pos), m - 1);
}

EventHistogram voxelize(const EventStream& events, std::size_t width, std::size_t height, std::size_t m)
{
    if (m < 1) throw InvalidArgument("voxelization needs at least one bin");
    events.validate(width, height);
    EventHistogram h{m, width, height, events.interval, std::vector<double>(m * width * height, 0.0)};
    for (const Event& e : events.events) {
        h.at(voxel_bin(events.interval, m, e.t), static_cast<std::size_t>(e.x), static_cast<std::size_t>(e.y)) += e.p;
    }
    return h;
}

Frame signed_count_between(const EventStream& events, std::size_t width, std::size_t height, double t_a, double t_b)
{
    if (t_a > t_b) throw InvalidArgument("signed_count_between requires t_a <= t_b");
    Frame out(width, height);
    // Events are time-sorted: skip straight to the window.
    auto first = std::upper_bound(events.events.begin(), events.events.end(), t_a,
                                  [](double t, const Event& e) { return t < e.t; });
    for (auto it = first; it != events.events.end() && it->t <= t_b; ++it) {
        if (it->x < 0 || it->y < 0 || static_cast<std::size_t>(it->x) >= width || static_cast<std::size_t>(it->y) >= height) {
            throw ValidationError("event outside the frame");
        }
        out(static_cast<std::size_t>(it->x), static_cast<std::size_t>(it->y)) += it->p;
    }
    return out;
}

}  // namespace ecir
