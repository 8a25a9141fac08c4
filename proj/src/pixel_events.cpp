#include "ecir/pixel_events.hpp"

#include <algorithm>
#include <string>

namespace ecir {

PixelEvents::PixelEvents(const EventStream& stream, std::size_t width, std::size_t height)
    : width_(width), height_(height), interval_(stream.interval), offsets_(width * height + 1, 0)
{
    stream.validate(width, height);
    for (const Event& e : stream.events) {
        ++offsets_[static_cast<std::size_t>(e.y) * width + static_cast<std::size_t>(e.x) + 1];
    }
    for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];

    times_.resize(stream.events.size());
    polarities_.resize(stream.events.size());
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    // The stream is time-sorted, so each pixel's slice comes out time-sorted too.
    for (const Event& e : stream.events) {
        const auto pixel = static_cast<std::size_t>(e.y) * width + static_cast<std::size_t>(e.x);
        const std::size_t slot = cursor[pixel]++;
        times_[slot] = e.t;
        polarities_[slot] = e.p;
    }
}

double PixelEvents::signed_count(std::size_t pixel, double t_a, double t_b) const noexcept
{
    const auto ts = times(pixel);
    const auto ps = polarities(pixel);
    const auto first = std::upper_bound(ts.begin(), ts.end(), t_a) - ts.begin();
    const auto last = std::upper_bound(ts.begin(), ts.end(), t_b) - ts.begin();
    double sum = 0.0;
    for (auto i = first; i < last; ++i) sum += ps[static_cast<std::size_t>(i)];
    return sum;
}

}  // namespace ecir
