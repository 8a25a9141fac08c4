#include "ecir/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ecir {

namespace {

void require_same_shape(const Frame& a, const Frame& b, const char* what)
{
    if (!a.same_shape(b)) {
        throw InvalidArgument(std::string(what) + ": frame sizes differ (" + std::to_string(a.width()) + "x" +
                              std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                              std::to_string(b.height()) + ")");
    }
}

void require_same_stack(const FrameStack& a, const FrameStack& b, const char* what)
{
    if (a.size() != b.size() || a.empty()) throw InvalidArgument(std::string(what) + ": frame counts differ or are zero");
    for (std::size_t i = 0; i < a.size(); ++i) require_same_shape(a[i], b[i], what);
}

double mean_abs_diff(std::span<const double> a, std::span<const double> b) noexcept
{
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
}

// Valid-region separable filter of one map: out is (w - k + 1) x (h - k + 1).
Frame filter_valid(const Frame& in, const std::vector<double>& taps, Exec exec)
{
    const std::size_t k = taps.size();
    const std::size_t ow = in.width() - k + 1;
    const std::size_t oh = in.height() - k + 1;
    Frame horizontal(ow, in.height());
    for_each_index(exec, in.height(), [&](std::size_t y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t j = 0; j < k; ++j) acc += taps[j] * in(x + j, y);
            horizontal(x, y) = acc;
        }
    });
    Frame out(ow, oh);
    for_each_index(exec, oh, [&](std::size_t y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t j = 0; j < k; ++j) acc += taps[j] * horizontal(x, y + j);
            out(x, y) = acc;
        }
    });
    return out;
}

}  // namespace

double mse(const Frame& a, const Frame& b)
{
    require_same_shape(a, b, "mse");
    if (a.size() == 0) throw InvalidArgument("mse: empty frames");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum / static_cast<double>(a.size());
}

double psnr_from_mse(double m) noexcept
{
    if (!(m > 0.0)) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

double psnr(const Frame& a, const Frame& b) { return psnr_from_mse(mse(a, b)); }

std::vector<double> gaussian_taps(int window, double sigma)
{
    if (window < 1 || !(sigma > 0.0)) throw InvalidArgument("gaussian window needs size >= 1 and sigma > 0");
    std::vector<double> taps(static_cast<std::size_t>(window));
    const double centre = 0.5 * (window - 1);
    double sum = 0.0;
    for (int i = 0; i < window; ++i) {
        const double d = i - centre;
        taps[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += taps[static_cast<std::size_t>(i)];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

double ssim(const Frame& a, const Frame& b, const SsimParams& params, Exec exec)
{
    require_same_shape(a, b, "ssim");
    const auto window = static_cast<std::size_t>(params.window);
    if (a.width() < window || a.height() < window) {
        throw InvalidArgument("ssim: frame " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                              " smaller than the " + std::to_string(window) + "x" + std::to_string(window) + " window");
    }
    const auto taps = gaussian_taps(params.window, params.sigma);

    Frame aa(a.width(), a.height()), bb(a.width(), a.height()), ab(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const Frame mu_a = filter_valid(a, taps, exec);
    const Frame mu_b = filter_valid(b, taps, exec);
    const Frame e_aa = filter_valid(aa, taps, exec);
    const Frame e_bb = filter_valid(bb, taps, exec);
    const Frame e_ab = filter_valid(ab, taps, exec);

    const double c1 = (params.k1 * params.peak) * (params.k1 * params.peak);
    const double c2 = (params.k2 * params.peak) * (params.k2 * params.peak);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double var_a = e_aa[i] - ma * ma;
        const double var_b = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
    }
    return sum / static_cast<double>(mu_a.size());
}

double loss_derivative(std::span<const double> gt, std::span<const double> pred)
{
    if (gt.size() != pred.size() || gt.empty()) throw InvalidArgument("loss_derivative: shape mismatch");
    return mean_abs_diff(gt, pred);
}

double loss_primitive(const FrameStack& gt, const FrameStack& pred)
{
    require_same_stack(gt, pred, "loss_primitive");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        for (std::size_t j = 0; j < gt[i].size(); ++j) sum += std::abs(gt[i][j] - pred[i][j]);
        count += gt[i].size();
    }
    return sum / static_cast<double>(count);
}

double loss_refinement(const FrameStack& gt, const FrameStack& pred)
{
    require_same_stack(gt, pred, "loss_refinement");
    double sum = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) sum += mean_abs_diff(gt[i].values(), pred[i].values());
    return sum;
}

double loss_residual(const ResidualStack& gt, const ResidualStack& pred, double rho)
{
    require_same_stack(gt.residuals, pred.residuals, "loss_residual");
    double total = 0.0;
    for (std::size_t i = 0; i < gt.residuals.size(); ++i) {
        const Frame& g = gt.residuals[i];
        const Frame& p = pred.residuals[i];
        double sum = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) sum += std::exp(rho * std::abs(g[j])) * std::abs(g[j] - p[j]);
        total += sum / static_cast<double>(g.size());
    }
    return total;
}

void LossConfig::validate() const
{
    if (!(lambda_d >= 0.0 && lambda_p >= 0.0 && lambda_ref >= 0.0 && lambda_res >= 0.0)) {
        throw InvalidArgument("loss weights must be non-negative");
    }
}

double loss_total(const LossComponents& c, const LossConfig& cfg)
{
    cfg.validate();
    return cfg.lambda_d * c.derivative + cfg.lambda_p * c.primitive + cfg.lambda_ref * c.refinement +
           cfg.lambda_res * c.residual;
}

}  // namespace ecir
