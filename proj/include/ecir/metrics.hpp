#pragma once

#include <span>
#include <vector>

#include "ecir/parallel.hpp"
#include "ecir/refine.hpp"
#include "ecir/types.hpp"

namespace ecir {

/// PSNR reported for identical frames.
inline constexpr double kPsnrCap = 100.0;

double mse(const Frame& a, const Frame& b);

/// Peak-1 PSNR in dB, capped at kPsnrCap.
double psnr(const Frame& a, const Frame& b);
double psnr_from_mse(double mse) noexcept;

struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double peak = 1.0;
};

/// Mean SSIM over every full window position (no padding). Both dimensions
/// must be at least the window size.
double ssim(const Frame& a, const Frame& b, const SsimParams& params = {}, Exec exec = Exec::parallel);

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> gaussian_taps(int window, double sigma);

// Training losses as evaluation functionals. All L1 reductions are means over
// elements, summed in raster order.

/// Mean absolute difference between derivative grids (n x h x w, any layout).
double loss_derivative(std::span<const double> gt, std::span<const double> pred);

/// Mean absolute difference over all d frames.
double loss_primitive(const FrameStack& gt, const FrameStack& pred);

/// Sum over timestamps of the per-frame mean absolute difference.
double loss_refinement(const FrameStack& gt, const FrameStack& pred);

/// Sum over residuals of mean(exp(rho * |R_gt|) * |R_gt - R_pred|).
double loss_residual(const ResidualStack& gt, const ResidualStack& pred, double rho = 5.0);

struct LossConfig {
    double lambda_d = 1.0;
    double lambda_p = 10.0;
    double lambda_ref = 10.0;
    double lambda_res = 0.5;
    double rho = 5.0;

    void validate() const;
};

struct LossComponents {
    double derivative = 0.0;
    double primitive = 0.0;
    double refinement = 0.0;
    double residual = 0.0;
};

double loss_total(const LossComponents& components, const LossConfig& cfg = {});

}  // namespace ecir
