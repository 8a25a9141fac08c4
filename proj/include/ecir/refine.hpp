#pragma once

// Residual-flow refinement of d consecutive frames.
//
// Objective, per pixel and summed over pixels:
//   f(L) = sum_{i<d} (L_i + R_i - L_{i+1})^2 + lambda * sum_i (L_i - Lhat_i)^2
// The Hessian is 2 (D^T D + lambda I) with D the forward-difference operator,
// so its spectral norm is bounded by 2 (4 + lambda).

#include <cstddef>
#include <span>
#include <vector>

#include "ecir/parallel.hpp"
#include "ecir/pixel_events.hpp"
#include "ecir/types.hpp"

namespace ecir {

using FrameStack = std::vector<Frame>;

struct ResidualStack {
    FrameStack residuals;  // R_1 .. R_{d-1}
};

struct RefineProblem {
    FrameStack initial;  // Lhat(t_1) .. Lhat(t_d)
    ResidualStack residuals;
    double lambda = 1.0;
    std::size_t i_max = 50;
    double step = guaranteed_step(1.0);

    /// 0.9 * 2 / L_max with L_max = 2 (4 + lambda): monotone descent for any instance.
    static double guaranteed_step(double lambda) noexcept { return 0.9 * 2.0 / (2.0 * (4.0 + lambda)); }

    std::size_t frame_count() const noexcept { return initial.size(); }

    /// Throws InvalidArgument on d < 2, lambda < 0, mismatched shapes or
    /// non-finite residuals.
    void validate() const;
};

/// Event-derived residuals R_i = Lhat(t_i) * (exp(c * S_i) - 1), with S_i the
/// signed event count in (t_i, t_{i+1}].
ResidualStack surrogate_residuals(const FrameStack& initial, const PixelEvents& events, double c,
                                  std::span<const double> schedule, Exec exec = Exec::parallel);

double objective(const RefineProblem& problem, const FrameStack& frames);

FrameStack gradient(const RefineProblem& problem, const FrameStack& frames, Exec exec = Exec::parallel);

struct DescentTrace {
    std::vector<double> objective;  // before the first step, then after each step
};

/// i_max simultaneous gradient steps from the initial frames. Throws
/// DivergenceError if the objective stops being finite.
FrameStack descend(const RefineProblem& problem, DescentTrace* trace = nullptr, Exec exec = Exec::parallel);

/// Exact minimizer: per pixel, a d x d SPD tridiagonal solve (Thomas algorithm).
/// With lambda == 0 the minimizers form a line; the one closest to the initial
/// frames is returned.
FrameStack tridiagonal_solve(const RefineProblem& problem, Exec exec = Exec::parallel);

enum class RefineSolver { tridiagonal, gradient_descent };

/// Final polishing: clamps every frame to [0, 1].
FrameStack polish(FrameStack frames);

struct RefineOptions {
    double c = 0.2;
    double lambda = 1.0;
    std::size_t i_max = 50;
    RefineSolver solver = RefineSolver::tridiagonal;
};

/// Surrogate residuals, solve, polish.
FrameStack refine_frames(const FrameStack& initial, const PixelEvents& events, std::span<const double> schedule,
                         const RefineOptions& options, Exec exec = Exec::parallel);

}  // namespace ecir
