// Serial reference vs OpenMP driver for the per-pixel kernels.
// Arg 0 selects the driver: 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "support.hpp"
#include "ecir/core_repr.hpp"
#include "ecir/event_sim.hpp"
#include "ecir/fitting.hpp"
#include "ecir/metrics.hpp"
#include "ecir/refine.hpp"

using namespace ecir;

namespace {

const ExposureInterval kIv = ExposureInterval::centered(0.12);

struct Fixture {
    SharpVideo video = ecir::testing::moving_blob_video(240, 180, 116, kIv, 30.0);
    EventStream events = simulate_events(video, ThresholdConfig{});
    PixelEvents per_pixel{events, 240, 180};
    BlurryFrame blurry = synthesize_blur(video);
    KeypointField keypoints = select_keypoints_field(per_pixel, 10);
    FitResult fit = fit_polys(video, keypoints, blurry);
    std::vector<double> schedule = uniform_schedule(kIv, 14);
};

const Fixture& fixture()
{
    static const Fixture f;
    return f;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::serial : Exec::parallel; }

void BM_SimulateEvents(benchmark::State& state)
{
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(simulate_events(f.video, ThresholdConfig{}, exec_of(state)));
}

void BM_SynthesizeBlur(benchmark::State& state)
{
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(synthesize_blur(f.video, exec_of(state)));
}

void BM_SelectKeypoints(benchmark::State& state)
{
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(select_keypoints_field(f.per_pixel, 10, exec_of(state)));
}

void BM_FitPolys(benchmark::State& state)
{
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(fit_polys(f.video, f.keypoints, f.blurry, exec_of(state)));
}

void BM_RenderFrames(benchmark::State& state)
{
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(render_frames(f.fit.polys, f.schedule, exec_of(state)));
}

void BM_Edi(benchmark::State& state)
{
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(edi_reconstruct_frames(f.blurry, f.per_pixel, 0.2, f.schedule, exec_of(state)));
}

void BM_Refine(benchmark::State& state)
{
    const auto& f = fixture();
    const FrameStack initial = edi_reconstruct_frames(f.blurry, f.per_pixel, 0.2, f.schedule);
    RefineProblem p;
    p.initial = initial;
    p.residuals = surrogate_residuals(initial, f.per_pixel, 0.2, f.schedule);
    p.step = RefineProblem::guaranteed_step(p.lambda);
    for (auto _ : state) {
        if (state.range(1) == 0) {
            benchmark::DoNotOptimize(tridiagonal_solve(p, exec_of(state)));
        } else {
            benchmark::DoNotOptimize(descend(p, nullptr, exec_of(state)));
        }
    }
}

void BM_Ssim(benchmark::State& state)
{
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(ssim(f.video.frames[0], f.video.frames[60], {}, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_SimulateEvents)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SynthesizeBlur)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SelectKeypoints)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FitPolys)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RenderFrames)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Edi)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Refine)->Args({0, 0})->Args({1, 0})->Args({0, 1})->Args({1, 1})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Ssim)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
