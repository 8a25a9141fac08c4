#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ecir/core_repr.hpp"
#include "ecir/event_sim.hpp"
#include "ecir/fitting.hpp"
#include "ecir/io.hpp"
#include "ecir/metrics.hpp"
#include "ecir/parallel.hpp"
#include "ecir/pixel_events.hpp"
#include "ecir/refine.hpp"

namespace ecir::cli {

namespace {

namespace fs = std::filesystem;
using io::Manifest;

constexpr double kDefaultExposureMs = 120.0;
constexpr std::size_t kDefaultKeypoints = 10;
constexpr std::size_t kDefaultFrames = 14;
constexpr std::size_t kDefaultBins = 40;

template <class T>
std::optional<T> given(const CLI::Option* opt, const T& value)
{
    return opt->count() > 0 ? std::optional<T>(value) : std::nullopt;
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Options shared by every subcommand that needs an exposure interval or manifest.
struct Common {
    std::string manifest_path;
    double exposure_ms = kDefaultExposureMs;
    CLI::Option* exposure_opt = nullptr;

    void attach(CLI::App* app)
    {
        app->add_option("--manifest", manifest_path, "key=value manifest supplying paths and settings")
            ->check(CLI::ExistingFile);
        exposure_opt = app->add_option("--exposure-ms", exposure_ms, "exposure length in ms, centred on 0")
                           ->capture_default_str();
    }

    Manifest manifest() const { return manifest_path.empty() ? Manifest{} : Manifest::load(manifest_path); }

    ExposureInterval interval(const Manifest& m) const
    {
        if (exposure_opt->count() > 0) return ExposureInterval::centered(exposure_ms * 1e-3);
        if (auto iv = m.interval()) return *iv;
        return ExposureInterval::centered(kDefaultExposureMs * 1e-3);
    }
};

fs::path require_path(const std::optional<std::string>& flag, const Manifest& m, const std::string& key,
                      const std::string& option)
{
    if (flag) return *flag;
    if (auto p = m.get_path(key)) return *p;
    throw InvalidArgument(option + " is required (or set '" + key + "' in the manifest)");
}

std::size_t resolve_count(const std::optional<std::size_t>& flag, const Manifest& m, const std::string& key,
                          std::size_t fallback)
{
    std::optional<std::size_t> from_manifest;
    if (auto v = m.get_int(key)) {
        if (*v < 0) throw ValidationError("manifest: '" + key + "' must be non-negative");
        from_manifest = static_cast<std::size_t>(*v);
    }
    return io::resolve(flag, from_manifest, fallback);
}

double resolve_real(const std::optional<double>& flag, const Manifest& m, const std::string& key, double fallback)
{
    return io::resolve(flag, m.get_double(key), fallback);
}

std::vector<double> parse_timestamp_list(const std::string& list)
{
    std::vector<double> ts;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            ts.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InvalidArgument("--timestamps: cannot parse '" + item + "'");
        }
    }
    if (ts.empty()) throw InvalidArgument("--timestamps: empty list");
    return ts;
}

FrameStack clamped(FrameStack frames)
{
    for (Frame& f : frames) f = f.clamped();
    return frames;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Continuous intensity recovery from a blurry frame and events", "ecir"};
    app.require_subcommand(1);
    int threads = 0;
    auto* threads_opt = app.add_option("--threads", threads, "worker threads (default: ECIR_THREADS or all cores)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "synthesize events, a blurry frame and ground truth from a sharp video");
    Common sim_common;
    sim_common.attach(sim);
    std::string sim_video, sim_out;
    double c_plus = 0.2, c_minus = -0.2, sigma = 0.0;
    std::uint64_t seed = 0;
    std::size_t gt_count = kDefaultFrames;
    sim->add_option("--video", sim_video, "sharp video directory")->required();
    sim->add_option("--out", sim_out, "output directory")->required();
    auto* c_plus_opt = sim->add_option("--c-plus", c_plus, "positive contrast threshold")->capture_default_str();
    auto* c_minus_opt = sim->add_option("--c-minus", c_minus, "negative contrast threshold")->capture_default_str();
    auto* sigma_opt = sim->add_option("--sigma", sigma, "per-pixel threshold jitter")->capture_default_str();
    auto* seed_opt = sim->add_option("--seed", seed, "threshold jitter seed")->capture_default_str();
    auto* gt_count_opt = sim->add_option("--gt-count", gt_count, "ground-truth frames to export")->capture_default_str();

    // fit
    auto* fit = app.add_subcommand("fit", "select keypoints and least-squares fit per-pixel polynomials");
    Common fit_common;
    fit_common.attach(fit);
    std::string fit_blurry, fit_events, fit_video, fit_out;
    std::size_t fit_n = kDefaultKeypoints;
    auto* fit_blurry_opt = fit->add_option("--blurry", fit_blurry, "blurry frame (.f32/.pgm)");
    auto* fit_events_opt = fit->add_option("--events", fit_events, "event file");
    auto* fit_video_opt = fit->add_option("--gt-video", fit_video, "sharp video directory to fit");
    auto* fit_n_opt = fit->add_option("--n", fit_n, "keypoints per pixel")->capture_default_str();
    fit->add_option("--out", fit_out, "output polynomial file")->required();

    // render
    auto* render = app.add_subcommand("render", "render latent frames from fitted polynomials");
    std::string render_polys, render_list, render_out;
    std::size_t render_count = kDefaultFrames;
    bool render_pgm = false;
    render->add_option("--polys", render_polys, "polynomial file")->required()->check(CLI::ExistingFile);
    auto* list_opt = render->add_option("--timestamps", render_list, "comma-separated timestamps in seconds");
    render->add_option("--count", render_count, "uniform timestamps over the exposure")
        ->capture_default_str()
        ->excludes(list_opt);
    render->add_option("--out", render_out, "output directory")->required();
    render->add_flag("--pgm", render_pgm, "also write 8-bit PGM frames");

    // edi
    auto* edi = app.add_subcommand("edi", "event-based double integral baseline");
    Common edi_common;
    edi_common.attach(edi);
    std::string edi_blurry, edi_events, edi_out;
    double edi_c = 0.2;
    std::size_t edi_count = kDefaultFrames;
    auto* edi_blurry_opt = edi->add_option("--blurry", edi_blurry, "blurry frame");
    auto* edi_events_opt = edi->add_option("--events", edi_events, "event file");
    auto* edi_c_opt = edi->add_option("--c", edi_c, "event threshold")->capture_default_str();
    auto* edi_count_opt = edi->add_option("--count", edi_count, "uniform timestamps over the exposure")->capture_default_str();
    edi->add_option("--out", edi_out, "output directory")->required();

    // refine
    auto* ref = app.add_subcommand("refine", "residual-flow refinement of a frame sequence");
    Common ref_common;
    ref_common.attach(ref);
    std::string ref_frames, ref_events, ref_out, ref_solver = "tridiag";
    double ref_lambda = 1.0, ref_c = 0.2;
    std::size_t ref_imax = 50;
    ref->add_option("--frames", ref_frames, "frame sequence directory")->required();
    auto* ref_events_opt = ref->add_option("--events", ref_events, "event file");
    auto* ref_lambda_opt = ref->add_option("--lambda", ref_lambda, "anchor weight")->capture_default_str();
    auto* ref_imax_opt = ref->add_option("--imax", ref_imax, "gradient-descent iterations")->capture_default_str();
    auto* ref_c_opt = ref->add_option("--c", ref_c, "event threshold for the residual surrogate")->capture_default_str();
    ref->add_option("--solver", ref_solver, "tridiag or gd")
        ->check(CLI::IsMember({"tridiag", "gd"}))
        ->capture_default_str();
    ref->add_option("--out", ref_out, "output directory")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "MSE / PSNR / SSIM of predicted frames against ground truth");
    std::string eval_pred, eval_gt, eval_report, eval_csv;
    eval->add_option("--pred", eval_pred, "predicted sequence directory")->required();
    eval->add_option("--gt", eval_gt, "ground-truth sequence directory")->required();
    eval->add_option("--report", eval_report, "key=value report path")->required();
    eval->add_option("--csv", eval_csv, "per-frame CSV path (default: report path with .csv)");

    // voxelize
    auto* vox = app.add_subcommand("voxelize", "bin events into an m x h x w signed histogram");
    Common vox_common;
    vox_common.attach(vox);
    std::string vox_events, vox_out;
    std::size_t vox_bins = kDefaultBins, vox_width = 0, vox_height = 0;
    auto* vox_events_opt = vox->add_option("--events", vox_events, "event file");
    auto* vox_bins_opt = vox->add_option("--bins", vox_bins, "temporal bins")->capture_default_str();
    auto* vox_width_opt = vox->add_option("--width", vox_width, "sensor width");
    auto* vox_height_opt = vox->add_option("--height", vox_height, "sensor height");
    vox->add_option("--out", vox_out, "output .f32 file")->required();

    std::vector<std::string> argv_storage{"ecir"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        // --help and friends exit 0; every usage error exits 2.
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    const char* command = app.get_subcommands().front()->get_name().c_str();
    try {
        const int env_threads = thread_count_from_env();
        set_thread_count(threads_opt->count() > 0 ? threads : env_threads);

        if (*sim) {
            const Manifest m = sim_common.manifest();
            const SharpVideo video = io::read_video(sim_video, sim_common.interval(m));
            ThresholdConfig cfg;
            cfg.c_plus = resolve_real(given(c_plus_opt, c_plus), m, "c_plus", 0.2);
            cfg.c_minus = resolve_real(given(c_minus_opt, c_minus), m, "c_minus", -0.2);
            cfg.sigma = resolve_real(given(sigma_opt, sigma), m, "sigma", 0.0);
            cfg.seed = resolve_count(given(seed_opt, static_cast<std::size_t>(seed)), m, "seed", 0);
            const std::size_t d = resolve_count(given(gt_count_opt, gt_count), m, "gt_count", kDefaultFrames);

            const EventStream events = simulate_events(video, cfg);
            const BlurryFrame blurry = synthesize_blur(video);
            io::FrameSequence gt{uniform_schedule(video.interval, d), {}};
            for (double t : gt.timestamps) gt.frames.push_back(video.sample(t));

            const fs::path dir(sim_out);
            fs::create_directories(dir);
            io::write_events(dir / "events.txt", events);
            io::write_frame(dir / "blurry.f32", blurry.frame);
            io::write_frame(dir / "blurry.pgm", blurry.frame);
            io::write_sequence(dir / "gt", gt);

            Manifest outm;
            outm.set("blurry", "blurry.f32");
            outm.set("events", "events.txt");
            outm.set("gt_video", fs::absolute(sim_video).lexically_normal().string());
            outm.set("gt_frames", "gt");
            outm.set("t_start", io::format_double(video.interval.t_start()));
            outm.set("t_end", io::format_double(video.interval.t_end()));
            outm.set("width", std::to_string(video.width()));
            outm.set("height", std::to_string(video.height()));
            outm.set("c_plus", io::format_double(cfg.c_plus));
            outm.set("c_minus", io::format_double(cfg.c_minus));
            outm.set("c", io::format_double(cfg.c_plus));
            outm.save(dir / "manifest.txt");
            out << "simulate: " << events.events.size() << " events, " << video.width() << "x" << video.height()
                << ", " << video.size() << " frames\n";
        } else if (*fit) {
            const Manifest m = fit_common.manifest();
            const fs::path video_dir = require_path(given(fit_video_opt, fit_video), m, "gt_video", "--gt-video");
            const fs::path blurry_path = require_path(given(fit_blurry_opt, fit_blurry), m, "blurry", "--blurry");
            const fs::path events_path = require_path(given(fit_events_opt, fit_events), m, "events", "--events");
            const std::size_t n = resolve_count(given(fit_n_opt, fit_n), m, "n", kDefaultKeypoints);

            const SharpVideo video = io::read_video(video_dir, fit_common.interval(m));
            const BlurryFrame blurry{io::read_frame(blurry_path), video.interval};
            const EventStream events = io::read_events(events_path, video.interval);
            const PixelEvents per_pixel(events, video.width(), video.height());
            const FitResult result = fit_polys(video, select_keypoints_field(per_pixel, n), blurry);
            io::write_polys(fit_out, result.polys);
            out << "fit: " << video.width() << "x" << video.height() << " pixels, n=" << n
                << ", rank-deficient pixels: " << result.rank_deficient_count() << "\n";
        } else if (*render) {
            const PolyField polys = io::read_polys(render_polys);
            io::FrameSequence seq;
            seq.timestamps = list_opt->count() > 0 ? parse_timestamp_list(render_list)
                                                   : uniform_schedule(polys.interval(), render_count);
            seq.frames = clamped(render_frames(polys, seq.timestamps));
            io::write_sequence(render_out, seq, render_pgm ? io::FrameFormat::both : io::FrameFormat::f32);
            out << "render: " << seq.frames.size() << " frames\n";
        } else if (*edi) {
            const Manifest m = edi_common.manifest();
            const ExposureInterval interval = edi_common.interval(m);
            const fs::path blurry_path = require_path(given(edi_blurry_opt, edi_blurry), m, "blurry", "--blurry");
            const fs::path events_path = require_path(given(edi_events_opt, edi_events), m, "events", "--events");
            const double c = resolve_real(given(edi_c_opt, edi_c), m, "c", 0.2);
            const std::size_t d = resolve_count(given(edi_count_opt, edi_count), m, "count", kDefaultFrames);

            const BlurryFrame blurry{io::read_frame(blurry_path), interval};
            const PixelEvents per_pixel(io::read_events(events_path, interval), blurry.frame.width(),
                                        blurry.frame.height());
            io::FrameSequence seq{uniform_schedule(interval, d), {}};
            seq.frames = clamped(edi_reconstruct_frames(blurry, per_pixel, c, seq.timestamps));
            io::write_sequence(edi_out, seq);
            out << "edi: " << seq.frames.size() << " frames\n";
        } else if (*ref) {
            const Manifest m = ref_common.manifest();
            const ExposureInterval interval = ref_common.interval(m);
            const fs::path events_path = require_path(given(ref_events_opt, ref_events), m, "events", "--events");
            io::FrameSequence seq = io::read_sequence(ref_frames, interval);
            RefineOptions options;
            options.c = resolve_real(given(ref_c_opt, ref_c), m, "c", 0.2);
            options.lambda = resolve_real(given(ref_lambda_opt, ref_lambda), m, "lambda", 1.0);
            options.i_max = resolve_count(given(ref_imax_opt, ref_imax), m, "imax", 50);
            options.solver = ref_solver == "gd" ? RefineSolver::gradient_descent : RefineSolver::tridiagonal;

            const Frame& shape = seq.frames.front();
            const PixelEvents per_pixel(io::read_events(events_path, interval), shape.width(), shape.height());
            seq.frames = refine_frames(seq.frames, per_pixel, seq.timestamps, options);
            io::write_sequence(ref_out, seq);
            out << "refine: " << seq.frames.size() << " frames (" << ref_solver << ")\n";
        } else if (*eval) {
            const io::FrameSequence pred = io::read_sequence(eval_pred, ExposureInterval::centered(1.0));
            const io::FrameSequence gt = io::read_sequence(eval_gt, ExposureInterval::centered(1.0));
            if (pred.frames.size() != gt.frames.size()) {
                throw InvalidArgument("prediction has " + std::to_string(pred.frames.size()) + " frames, ground truth " +
                                      std::to_string(gt.frames.size()));
            }
            std::ostringstream report, csv;
            csv << "frame,t,mse,psnr,ssim\n";
            double sum_mse = 0.0, sum_psnr = 0.0, sum_ssim = 0.0;
            for (std::size_t k = 0; k < pred.frames.size(); ++k) {
                const double e = mse(pred.frames[k], gt.frames[k]);
                const double p = psnr_from_mse(e);
                const double s = ssim(pred.frames[k], gt.frames[k]);
                sum_mse += e;
                sum_psnr += p;
                sum_ssim += s;
                csv << k << ',' << fmt(gt.timestamps[k]) << ',' << fmt(e) << ',' << fmt(p) << ',' << fmt(s) << '\n';
            }
            const auto count = static_cast<double>(pred.frames.size());
            report << "frames=" << pred.frames.size() << '\n'
                   << "mse=" << fmt(sum_mse / count) << '\n'
                   << "psnr=" << fmt(sum_psnr / count) << '\n'
                   << "ssim=" << fmt(sum_ssim / count) << '\n';

            fs::path csv_path = eval_csv.empty() ? fs::path(eval_report).replace_extension(".csv") : fs::path(eval_csv);
            if (csv_path == fs::path(eval_report)) csv_path += ".csv";
            std::ofstream(eval_report, std::ios::trunc) << report.str();
            std::ofstream(csv_path, std::ios::trunc) << csv.str();
            out << report.str();
        } else if (*vox) {
            const Manifest m = vox_common.manifest();
            const ExposureInterval interval = vox_common.interval(m);
            const fs::path events_path = require_path(given(vox_events_opt, vox_events), m, "events", "--events");
            const std::size_t bins = resolve_count(given(vox_bins_opt, vox_bins), m, "bins", kDefaultBins);
            const std::size_t width = resolve_count(given(vox_width_opt, vox_width), m, "width", 0);
            const std::size_t height = resolve_count(given(vox_height_opt, vox_height), m, "height", 0);
            if (width == 0 || height == 0) throw InvalidArgument("--width and --height are required (or set them in the manifest)");
            const EventHistogram h = voxelize(io::read_events(events_path, interval), width, height, bins);
            io::write_histogram(vox_out, h);
            out << "voxelize: " << bins << " bins, " << width << "x" << height << "\n";
        }
    } catch (const std::exception& e) {
        std::string what = e.what();
        for (char& ch : what) {
            if (ch == '\n') ch = ' ';
        }
        err << "ecir " << command << ": error: " << what << '\n';
        return 1;
    }
    return 0;
}

}  // namespace ecir::cli
