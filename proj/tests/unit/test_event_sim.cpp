#include <doctest.h>

#include <cmath>
#include <random>

#include "../support.hpp"
#include "ecir/error.hpp"
#include "ecir/event_sim.hpp"

using namespace ecir;

namespace {

const ExposureInterval kIv(-0.06, 0.06);

SharpVideo constant_video(std::size_t w, std::size_t h, double v, std::size_t frames = 5)
{
    const auto ts = uniform_schedule(kIv, frames);
    return SharpVideo(ts, std::vector<Frame>(frames, Frame(w, h, v)), kIv);
}

/// One pixel whose log intensity rises linearly by `rise` over the interval.
SharpVideo log_ramp(double rise, std::size_t frames, double ln0 = std::log(0.1))
{
    const auto ts = uniform_schedule(kIv, frames);
    std::vector<Frame> fs;
    for (double t : ts) fs.emplace_back(1, 1, std::exp(ln0 + rise * (kIv.normalize(t) + 1.0) / 2.0));
    return SharpVideo(ts, fs, kIv);
}

}  // namespace

TEST_CASE("polarity boundaries are inclusive")
{
    CHECK(polarity(0.2, 0.2, -0.2) == 1);
    CHECK(polarity(0.1999, 0.2, -0.2) == 0);
    CHECK(polarity(0.0, 0.2, -0.2) == 0);
    CHECK(polarity(-0.2, 0.2, -0.2) == -1);
    CHECK(polarity(-0.5, 0.2, -0.3) == -1);
}

TEST_CASE("SharpVideo validation")
{
    const Frame f(2, 2, 0.5);
    CHECK_THROWS_AS(SharpVideo({-0.06}, {f}, kIv), InvalidArgument);
    CHECK_THROWS_AS(SharpVideo({-0.06, -0.06, 0.06}, {f, f, f}, kIv), InvalidArgument);
    CHECK_THROWS_AS(SharpVideo({-0.05, 0.06}, {f, f}, kIv), InvalidArgument);
    CHECK_THROWS_AS(SharpVideo({-0.06, 0.06}, {f, Frame(3, 2)}, kIv), InvalidArgument);
    const SharpVideo v({-0.06, 0.06}, {Frame(2, 2, 0.0), Frame(2, 2, 1.0)}, kIv);
    CHECK(v.sample(0.0)[0] == doctest::Approx(0.5));
    CHECK_THROWS_AS(v.sample(0.1), OutOfRangeError);
}

TEST_CASE("constant video produces no events for any thresholds")
{
    for (double c : {0.01, 0.2, 1.0}) {
        ThresholdConfig cfg{c, -c, 0.3, 7};
        CHECK(simulate_events(constant_video(4, 3, 0.37), cfg).events.empty());
    }
    CHECK(simulate_events(constant_video(4, 3, 0.0), ThresholdConfig{}).events.empty());
}

TEST_CASE("a ramp of exactly three thresholds fires three positive events at 1/3, 2/3, 3/3")
{
    const double c = 0.2;
    const auto ev = simulate_events(log_ramp(3 * c, 2), ThresholdConfig{c, -c, 0.0, 0}).events;
    REQUIRE(ev.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(ev[k].p == 1);
        CHECK(ev[k].t == doctest::Approx(kIv.denormalize(-1.0 + 2.0 * static_cast<double>(k + 1) / 3.0)).epsilon(1e-9));
    }
}

TEST_CASE("monotone log ramps fire floor(rise / c) events")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> rise(0.0, 3.0), thr(0.05, 0.5);
    for (int trial = 0; trial < 100; ++trial) {
        const double d = rise(rng), c = thr(rng);
        const std::size_t frames = 2 + rng() % 30;
        const auto up = simulate_events(log_ramp(d, frames), ThresholdConfig{c, -c, 0.0, 0}).events;
        CHECK(up.size() == static_cast<std::size_t>(std::floor(d / c)));
        for (const auto& e : up) CHECK(e.p == 1);
        const auto down = simulate_events(log_ramp(-d, frames, std::log(0.9)), ThresholdConfig{c, -c, 0.0, 0}).events;
        CHECK(down.size() == static_cast<std::size_t>(std::floor(d / c)));
        for (const auto& e : down) CHECK(e.p == -1);
    }
}

TEST_CASE("simulate_events is deterministic and thread-independent")
{
    const SharpVideo v = ecir::testing::moving_blob_video(24, 18, 12, kIv);
    const ThresholdConfig cfg{0.15, -0.2, 0.1, 1234};
    const auto a = simulate_events(v, cfg);
    CHECK(!a.events.empty());
    CHECK(a.events == simulate_events(v, cfg).events);
    CHECK(a.events == simulate_events(v, cfg, Exec::serial).events);
    set_thread_count(3);
    CHECK(a.events == simulate_events(v, cfg).events);
    set_thread_count(0);
    CHECK_NOTHROW(a.validate(24, 18));
    ThresholdConfig other = cfg;
    other.seed = 99;
    CHECK(a.events != simulate_events(v, other).events);
}

TEST_CASE("simulate_events error paths")
{
    auto v = constant_video(2, 2, 0.5);
    v.frames[1][0] = NAN;
    CHECK_THROWS_AS(simulate_events(v, ThresholdConfig{}), InvalidInputError);
    CHECK_THROWS_AS(simulate_events(constant_video(2, 2, 0.5), ThresholdConfig{-0.1, -0.2, 0, 0}), InvalidArgument);
    CHECK_THROWS_AS(simulate_events(constant_video(2, 2, 0.5), ThresholdConfig{0.1, 0.2, 0, 0}), InvalidArgument);
    CHECK_THROWS_AS(simulate_events(constant_video(2, 2, 0.5), ThresholdConfig{0.1, -0.2, -1, 0}), InvalidArgument);
}

TEST_CASE("synthesize_blur examples")
{
    CHECK(synthesize_blur(constant_video(3, 3, 0.42)).frame[4] == doctest::Approx(0.42).epsilon(1e-15));
    const SharpVideo ramp({-0.06, 0.06}, {Frame(2, 1, 0.0), Frame(2, 1, 1.0)}, kIv);
    CHECK(synthesize_blur(ramp).frame[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("synthesize_blur matches dense quadrature of the interpolant")
{
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto ts = ecir::testing::sorted_distinct(rng, 6, -0.059, 0.059);
    ts.insert(ts.begin(), -0.06);
    ts.push_back(0.06);
    std::vector<Frame> fs;
    for (std::size_t k = 0; k < 8; ++k) {
        Frame f(3, 2);
        for (double& v : f.values()) v = u(rng);
        fs.push_back(f);
    }
    const SharpVideo v(ts, fs, kIv);
    const BlurryFrame b = synthesize_blur(v);
    CHECK(b.frame == synthesize_blur(v, Exec::serial).frame);
    for (std::size_t p = 0; p < 6; ++p) {
        // Trapezoid is exact on each linear piece, so sample on a grid containing every knot.
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
            acc += ecir::testing::trapezoid_mean([&](double t) { return v.sample(t)[p]; }, ts[k], ts[k + 1], 1250) * (ts[k + 1] - ts[k]);
        }
        CHECK(std::abs(acc / 0.12 - b.frame[p]) < 1e-9);
    }
}

TEST_CASE("synthesize_blur of a polynomial scene approaches its exact blur at 960 fps")
{
    const auto scene = ecir::testing::random_poly_scene(4, 4, 10, 31);
    const BlurryFrame b = synthesize_blur(scene.video(116));
    const Frame exact = scene.exact_blur();
    for (std::size_t p = 0; p < exact.size(); ++p) CHECK(std::abs(b.frame[p] - exact[p]) < 1e-4);
}

TEST_CASE("voxelize examples and conservation")
{
    const EventStream one{{Event{1, 0, 0.0, 1}}, kIv};
    const auto h = voxelize(one, 3, 2, 40);
    REQUIRE(h.bins.size() == 40 * 6);
    for (std::size_t b = 0; b < 40; ++b) {
        for (std::size_t y = 0; y < 2; ++y) {
            for (std::size_t x = 0; x < 3; ++x) CHECK(h.at(b, x, y) == (b == 20 && x == 1 && y == 0 ? 1.0 : 0.0));
        }
    }
    for (double v : voxelize(EventStream{{}, kIv}, 3, 2, 40).bins) CHECK(v == 0.0);
    CHECK(voxel_bin(kIv, 40, -0.06) == 0);
    CHECK(voxel_bin(kIv, 40, 0.06) == 39);
    CHECK_THROWS_AS(voxelize(one, 3, 2, 0), InvalidArgument);

    const auto ev = simulate_events(ecir::testing::moving_blob_video(20, 15, 10, kIv), ThresholdConfig{});
    const auto hist = voxelize(ev, 20, 15, 40);
    const Frame full = signed_count_between(ev, 20, 15, -0.06, 0.06);
    Frame summed(20, 15), absolute(20, 15), naive_abs(20, 15);
    for (std::size_t b = 0; b < 40; ++b) {
        for (std::size_t p = 0; p < 300; ++p) {
            summed[p] += hist.bins[b * 300 + p];
        }
    }
    for (const auto& e : ev.events) naive_abs(e.x, e.y) += 1.0;
    // Events at t_start itself are binned but excluded from (t_start, t_end].
    Frame at_start(20, 15);
    for (const auto& e : ev.events) if (e.t == -0.06) at_start(e.x, e.y) += e.p;
    for (std::size_t p = 0; p < 300; ++p) CHECK(summed[p] == full[p] + at_start[p]);
    double total_abs = 0.0;
    for (double v : naive_abs.values()) total_abs += v;
    CHECK(total_abs == static_cast<double>(ev.events.size()));
}

TEST_CASE("signed_count_between against a naive loop")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-0.06, 0.06);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Event> ev(rng() % 200);
        for (auto& e : ev) e = {static_cast<std::int32_t>(rng() % 5), static_cast<std::int32_t>(rng() % 4), u(rng), static_cast<std::int8_t>(rng() % 2 ? 1 : -1)};
        std::sort(ev.begin(), ev.end(), event_less);
        const EventStream s{ev, kIv};
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        Frame naive(5, 4);
        for (const auto& e : ev) if (e.t > a && e.t <= b) naive(e.x, e.y) += e.p;
        CHECK(signed_count_between(s, 5, 4, a, b) == naive);
        const Frame empty = signed_count_between(s, 5, 4, a, a);
        for (double v : empty.values()) CHECK(v == 0.0);
        CHECK_THROWS_AS(signed_count_between(s, 5, 4, b + 1e-3, b), InvalidArgument);
    }
}
