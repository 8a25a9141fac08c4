#include "ecir/refine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ecir {

namespace {

void check_stack(const FrameStack& frames, std::size_t expected, const Frame& shape, const char* what)
{
    if (frames.size() != expected) {
        throw InvalidArgument(std::string(what) + ": expected " + std::to_string(expected) + " frames, got " +
                              std::to_string(frames.size()));
    }
    for (const Frame& f : frames) {
        if (!f.same_shape(shape)) throw InvalidArgument(std::string(what) + ": frame size mismatch");
    }
}

double pixel_objective(const RefineProblem& p, const FrameStack& frames, std::size_t px) noexcept
{
    const std::size_t d = p.frame_count();
    double flow = 0.0;
    for (std::size_t i = 0; i + 1 < d; ++i) {
        const double r = frames[i][px] + p.residuals.residuals[i][px] - frames[i + 1][px];
        flow += r * r;
    }
    double anchor = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double r = frames[i][px] - p.initial[i][px];
        anchor += r * r;
    }
    return flow + p.lambda * anchor;
}

// Gradient component i of one pixel.
double pixel_gradient(const RefineProblem& p, const FrameStack& frames, std::size_t px, std::size_t i) noexcept
{
    const std::size_t d = p.frame_count();
    const FrameStack& R = p.residuals.residuals;
    double g = 2.0 * p.lambda * (frames[i][px] - p.initial[i][px]);
    if (i + 1 < d) g += 2.0 * (frames[i][px] + R[i][px] - frames[i + 1][px]);
    if (i > 0) g -= 2.0 * (frames[i - 1][px] + R[i - 1][px] - frames[i][px]);
    return g;
}

double sum_in_raster_order(const std::vector<double>& values) noexcept
{
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
}

}  // namespace

void RefineProblem::validate() const
{
    if (initial.size() < 2) throw InvalidArgument("refinement needs at least 2 frames");
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
    check_stack(residuals.residuals, initial.size() - 1, initial.front(), "residual stack");
    check_stack(initial, initial.size(), initial.front(), "initial frames");
    for (const Frame& r : residuals.residuals) {
        for (double v : r.values()) {
            if (!std::isfinite(v)) throw InvalidArgument("residual stack contains a non-finite entry");
        }
    }
}

ResidualStack surrogate_residuals(const FrameStack& initial, const PixelEvents& events, double c,
                                  std::span<const double> schedule, Exec exec)
{
    if (initial.size() < 2) throw InvalidArgument("surrogate residuals need at least 2 frames");
    if (schedule.size() != initial.size()) throw InvalidArgument("one timestamp per initial frame required");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!events.interval().contains(schedule[i])) throw OutOfRangeError("schedule timestamp outside exposure interval");
        if (i > 0 && !(schedule[i] > schedule[i - 1])) throw InvalidArgument("schedule must be strictly increasing");
    }
    const Frame& shape = initial.front();
    check_stack(initial, initial.size(), shape, "initial frames");
    if (shape.width() != events.width() || shape.height() != events.height()) {
        throw InvalidArgument("frames and events disagree on frame size");
    }

    ResidualStack out{FrameStack(initial.size() - 1, Frame(shape.width(), shape.height()))};
    for_each_index(exec, shape.size(), [&](std::size_t px) {
        for (std::size_t i = 0; i + 1 < initial.size(); ++i) {
            const double count = events.signed_count(px, schedule[i], schedule[i + 1]);
            out.residuals[i][px] = initial[i][px] * (std::exp(c * count) - 1.0);
        }
    });
    return out;
}

double objective(const RefineProblem& problem, const FrameStack& frames)
{
    problem.validate();
    check_stack(frames, problem.frame_count(), problem.initial.front(), "frames");
    std::vector<double> per_pixel(problem.initial.front().size());
    for (std::size_t px = 0; px < per_pixel.size(); ++px) per_pixel[px] = pixel_objective(problem, frames, px);
    return sum_in_raster_order(per_pixel);
}

FrameStack gradient(const RefineProblem& problem, const FrameStack& frames, Exec exec)
{
    problem.validate();
    const Frame& shape = problem.initial.front();
    check_stack(frames, problem.frame_count(), shape, "frames");
    FrameStack g(problem.frame_count(), Frame(shape.width(), shape.height()));
    for_each_index(exec, shape.size(), [&](std::size_t px) {
        for (std::size_t i = 0; i < problem.frame_count(); ++i) g[i][px] = pixel_gradient(problem, frames, px, i);
    });
    return g;
}

FrameStack descend(const RefineProblem& problem, DescentTrace* trace, Exec exec)
{
    problem.validate();
    if (!(problem.step > 0.0)) throw InvalidArgument("step must be positive");
    const std::size_t d = problem.frame_count();
    const std::size_t pixels = problem.initial.front().size();

    FrameStack frames = problem.initial;
    std::vector<double> per_pixel(pixels);
    const auto record = [&](std::size_t iteration) {
        const double f = sum_in_raster_order(per_pixel);
        if (!std::isfinite(f)) {
            throw DivergenceError("objective became non-finite at iteration " + std::to_string(iteration) +
                                  " (step " + std::to_string(problem.step) + " too large?)");
        }
        if (trace != nullptr) trace->objective.push_back(f);
    };
    if (trace != nullptr) trace->objective.clear();

    for (std::size_t px = 0; px < pixels; ++px) per_pixel[px] = pixel_objective(problem, frames, px);
    record(0);
    for (std::size_t it = 1; it <= problem.i_max; ++it) {
        for_each_index(exec, pixels, [&](std::size_t px) {
            double g[2] = {0.0, 0.0};  // rolling window: gradient of i-1 applied once i has been read
            for (std::size_t i = 0; i < d; ++i) {
                g[i % 2] = pixel_gradient(problem, frames, px, i);
                if (i > 0) frames[i - 1][px] -= problem.step * g[(i - 1) % 2];
            }
            frames[d - 1][px] -= problem.step * g[(d - 1) % 2];
            per_pixel[px] = pixel_objective(problem, frames, px);
        });
        record(it);
    }
    return frames;
}

FrameStack tridiagonal_solve(const RefineProblem& problem, Exec exec)
{
    problem.validate();
    const std::size_t d = problem.frame_count();
    const Frame& shape = problem.initial.front();
    const FrameStack& R = problem.residuals.residuals;
    const FrameStack& init = problem.initial;
    const double lambda = problem.lambda;

    FrameStack out(d, Frame(shape.width(), shape.height()));
    for_each_index(exec, shape.size(), [&](std::size_t px) {
        std::vector<double> x(d);
        if (lambda == 0.0) {
            // Flow term alone pins every difference; shift the chain onto the initial frames' mean.
            std::vector<double> chain(d, 0.0);
            for (std::size_t i = 0; i + 1 < d; ++i) chain[i + 1] = chain[i] + R[i][px];
            double offset = 0.0;
            for (std::size_t i = 0; i < d; ++i) offset += init[i][px] - chain[i];
            offset /= static_cast<double>(d);
            for (std::size_t i = 0; i < d; ++i) out[i][px] = chain[i] + offset;
            return;
        }
        // (D^T D + lambda I) x = lambda * Lhat - D^T R; off-diagonals are all -1.
        std::vector<double> c_prime(d);
        for (std::size_t i = 0; i < d; ++i) {
            const double diag = lambda + ((i == 0 || i + 1 == d) ? 1.0 : 2.0);
            double rhs = lambda * init[i][px];
            if (i + 1 < d) rhs -= R[i][px];
            if (i > 0) rhs += R[i - 1][px];
            if (i == 0) {
                c_prime[0] = -1.0 / diag;
                x[0] = rhs / diag;
            } else {
                const double factor = 1.0 / (diag + c_prime[i - 1]);
                c_prime[i] = -factor;
                x[i] = (rhs + x[i - 1]) * factor;
            }
        }
        for (std::size_t i = d - 1; i-- > 0;) x[i] -= c_prime[i] * x[i + 1];
        for (std::size_t i = 0; i < d; ++i) out[i][px] = x[i];
    });
    return out;
}

FrameStack polish(FrameStack frames)
{
    for (Frame& f : frames) f = f.clamped();
    return frames;
}

FrameStack refine_frames(const FrameStack& initial, const PixelEvents& events, std::span<const double> schedule,
                         const RefineOptions& options, Exec exec)
{
    RefineProblem problem{initial, surrogate_residuals(initial, events, options.c, schedule, exec), options.lambda,
                          options.i_max, RefineProblem::guaranteed_step(options.lambda)};
    if (options.solver == RefineSolver::tridiagonal) return polish(tridiagonal_solve(problem, exec));
    return polish(descend(problem, nullptr, exec));
}

}  // namespace ecir
