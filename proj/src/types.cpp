#include "ecir/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace ecir {

ExposureInterval::ExposureInterval(double t_start, double t_end) : t_start_(t_start), t_end_(t_end)
{
    if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_end > t_start)) {
        throw InvalidArgument("exposure interval must satisfy t_end > t_start (got [" +
                              std::to_string(t_start) + ", " + std::to_string(t_end) + "])");
    }
}

ExposureInterval ExposureInterval::centered(double length)
{
    return ExposureInterval(-0.5 * length, 0.5 * length);
}

bool event_less(const Event& a, const Event& b) noexcept
{
    return std::tie(a.t, a.y, a.x, a.p) < std::tie(b.t, b.y, b.x, b.p);
}

void EventStream::validate(std::size_t width, std::size_t height) const
{
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        const auto where = "event " + std::to_string(i) + ": ";
        if (e.p != 1 && e.p != -1) throw ValidationError(where + "polarity must be +1 or -1");
        if (e.x < 0 || e.y < 0 || static_cast<std::size_t>(e.x) >= width ||
            static_cast<std::size_t>(e.y) >= height) {
            throw ValidationError(where + "pixel (" + std::to_string(e.x) + ", " + std::to_string(e.y) +
                                  ") outside " + std::to_string(width) + "x" + std::to_string(height));
        }
        if (!interval.contains(e.t)) throw ValidationError(where + "timestamp outside exposure interval");
        if (i > 0 && e.t < events[i - 1].t) throw ValidationError(where + "timestamps not sorted");
    }
}

Frame::Frame(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), values_(width * height, fill)
{
}

Frame Frame::clamped() const
{
    Frame out = *this;
    for (double& v : out.values_) v = std::clamp(v, 0.0, 1.0);
    return out;
}

std::vector<double> uniform_schedule(const ExposureInterval& interval, std::size_t d)
{
    if (d == 0) throw InvalidArgument("schedule needs at least one timestamp");
    if (d == 1) return {0.5 * (interval.t_start() + interval.t_end())};
    std::vector<double> ts(d);
    const double step = interval.length() / static_cast<double>(d - 1);
    for (std::size_t k = 0; k < d; ++k) ts[k] = interval.t_start() + static_cast<double>(k) * step;
    ts.back() = interval.t_end();
    return ts;
}

}  // namespace ecir
