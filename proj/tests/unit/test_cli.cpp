#include <doctest.h>

#include <fstream>
#include <sstream>

#include "../support.hpp"
#include "cli.hpp"
#include "ecir/io.hpp"

using namespace ecir;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = ecir::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

double report_value(const fs::path& report, const std::string& key)
{
    std::ifstream in(report);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + "=", 0) == 0) return std::stod(line.substr(key.size() + 1));
    }
    FAIL("missing key " << key);
    return 0.0;
}

fs::path write_video(const fs::path& dir, const SharpVideo& v)
{
    io::write_sequence(dir, io::FrameSequence{v.timestamps, v.frames});
    return dir;
}

}  // namespace

TEST_CASE("cli usage errors exit 2, runtime errors exit 1 with one line")
{
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"bogus"}).code == 2);
    CHECK(run_cli({"fit", "--n"}).code == 2);
    CHECK(run_cli({"refine", "--frames", "x", "--out", "y", "--solver", "newton"}).code == 2);
    CHECK(run_cli({"--help"}).code == 0);

    const auto dir = ecir::testing::scratch_dir("cli_err");
    const Run r = run_cli({"eval", "--pred", (dir / "nope").string(), "--gt", (dir / "nope").string(), "--report", (dir / "r.txt").string()});
    CHECK(r.code == 1);
    CHECK(count_lines(r.err) == 1);
    CHECK(r.err.find("error") != std::string::npos);

    std::ofstream(dir / "bad_events.txt") << "0.0 1 1 1\nnot an event\n";
    io::write_frame(dir / "b.f32", Frame(4, 4, 0.5));
    const Run p = run_cli({"edi", "--blurry", (dir / "b.f32").string(), "--events", (dir / "bad_events.txt").string(), "--out", (dir / "o").string()});
    CHECK(p.code == 1);
    CHECK(count_lines(p.err) == 1);
    CHECK(p.err.find(":2:") != std::string::npos);

    const Run v = run_cli({"voxelize", "--events", (dir / "bad_events.txt").string(), "--out", (dir / "v.f32").string()});
    CHECK(v.code == 1);
}

TEST_CASE("cli simulate on a constant video")
{
    const auto dir = ecir::testing::scratch_dir("cli_const");
    const ExposureInterval iv = ExposureInterval::centered(0.12);
    const auto ts = uniform_schedule(iv, 6);
    write_video(dir / "video", SharpVideo(ts, std::vector<Frame>(6, Frame(12, 11, 0.3)), iv));
    const Run r = run_cli({"simulate", "--video", (dir / "video").string(), "--out", (dir / "sim").string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "sim" / "events.txt").empty());
    CHECK(io::read_frame(dir / "sim" / "blurry.f32") == Frame(12, 11, 0.3f));
    CHECK(fs::exists(dir / "sim" / "blurry.pgm"));
    const auto m = io::Manifest::load(dir / "sim" / "manifest.txt");
    CHECK(m.interval() == iv);
    CHECK(m.get_int("width") == 12);
    CHECK(io::read_sequence(dir / "sim" / "gt").frames.size() == 14);
}

TEST_CASE("cli pipeline on a polynomial scene, deterministic across thread counts")
{
    const auto dir = ecir::testing::scratch_dir("cli_pipe");
    const auto scene = ecir::testing::random_poly_scene(16, 12, 8, 7);
    write_video(dir / "video", scene.video(97));
    const std::string sim = (dir / "sim").string(), man = (dir / "sim" / "manifest.txt").string();
    REQUIRE(run_cli({"simulate", "--video", (dir / "video").string(), "--out", sim, "--c-plus", "0.05", "--c-minus", "-0.05"}).code == 0);
    REQUIRE(run_cli({"fit", "--manifest", man, "--out", (dir / "polys.bin").string()}).code == 0);
    REQUIRE(run_cli({"render", "--polys", (dir / "polys.bin").string(), "--out", (dir / "render").string(), "--pgm"}).code == 0);
    CHECK(fs::exists(dir / "render" / "frame_0013.pgm"));
    REQUIRE(run_cli({"eval", "--pred", (dir / "render").string(), "--gt", sim + "/gt", "--report", (dir / "report.txt").string()}).code == 0);
    CHECK(report_value(dir / "report.txt", "psnr") > 50.0);
    CHECK(report_value(dir / "report.txt", "frames") == 14.0);
    CHECK(fs::exists(dir / "report.csv"));
    CHECK(count_lines(slurp(dir / "report.csv")) == 15);

    REQUIRE(run_cli({"--threads", "1", "fit", "--manifest", man, "--out", (dir / "polys1.bin").string()}).code == 0);
    CHECK(slurp(dir / "polys1.bin") == slurp(dir / "polys.bin"));
    REQUIRE(run_cli({"--threads", "3", "render", "--polys", (dir / "polys1.bin").string(), "--out", (dir / "render3").string()}).code == 0);
    REQUIRE(run_cli({"eval", "--pred", (dir / "render3").string(), "--gt", sim + "/gt", "--report", (dir / "report3.txt").string()}).code == 0);
    CHECK(slurp(dir / "report3.txt") == slurp(dir / "report.txt"));

    const Run explicit_ts = run_cli({"render", "--polys", (dir / "polys.bin").string(), "--timestamps", "-0.06,0,0.03", "--out", (dir / "r2").string()});
    CHECK(explicit_ts.code == 0);
    CHECK(io::read_sequence(dir / "r2").timestamps == std::vector<double>{-0.06, 0.0, 0.03});
    CHECK(run_cli({"render", "--polys", (dir / "polys.bin").string(), "--timestamps", "0,x", "--out", (dir / "r3").string()}).code == 1);
    CHECK(run_cli({"render", "--polys", (dir / "polys.bin").string(), "--timestamps", "0.5", "--out", (dir / "r3").string()}).code == 1);

    // EDI then refinement; both solvers land on the same frames.
    REQUIRE(run_cli({"edi", "--manifest", man, "--c", "0.05", "--out", (dir / "edi").string()}).code == 0);
    REQUIRE(run_cli({"refine", "--manifest", man, "--frames", (dir / "edi").string(), "--c", "0.05", "--out", (dir / "ref_t").string()}).code == 0);
    REQUIRE(run_cli({"refine", "--manifest", man, "--frames", (dir / "edi").string(), "--c", "0.05", "--solver", "gd", "--out", (dir / "ref_g").string()}).code == 0);
    REQUIRE(run_cli({"eval", "--pred", (dir / "ref_t").string(), "--gt", sim + "/gt", "--report", (dir / "rt.txt").string()}).code == 0);
    REQUIRE(run_cli({"eval", "--pred", (dir / "ref_g").string(), "--gt", sim + "/gt", "--report", (dir / "rg.txt").string()}).code == 0);
    CHECK(std::abs(report_value(dir / "rt.txt", "mse") - report_value(dir / "rg.txt", "mse")) < 1e-6);
}

TEST_CASE("cli precedence matrix: flag > manifest > default")
{
    const auto dir = ecir::testing::scratch_dir("cli_prec");
    const ExposureInterval iv = ExposureInterval::centered(0.12);
    std::ofstream(dir / "events.txt") << "-0.05 1 0 1\n0.0 0 1 -1\n";
    auto planes = [&](const fs::path& p) { return io::read_f32(p).size(); };

    // bins: default, manifest, flag, flag beating manifest.
    io::Manifest m;
    m.set("events", "events.txt");
    m.set("width", "2");
    m.set("height", "2");
    m.set("t_start", "-0.06");
    m.set("t_end", "0.06");
    m.save(dir / "m_plain.txt");
    m.set("bins", "7");
    m.save(dir / "m_bins.txt");

    REQUIRE(run_cli({"voxelize", "--manifest", (dir / "m_plain.txt").string(), "--out", (dir / "a.f32").string()}).code == 0);
    CHECK(planes(dir / "a.f32") == 40);
    REQUIRE(run_cli({"voxelize", "--manifest", (dir / "m_bins.txt").string(), "--out", (dir / "b.f32").string()}).code == 0);
    CHECK(planes(dir / "b.f32") == 7);
    REQUIRE(run_cli({"voxelize", "--manifest", (dir / "m_plain.txt").string(), "--bins", "5", "--out", (dir / "c.f32").string()}).code == 0);
    CHECK(planes(dir / "c.f32") == 5);
    REQUIRE(run_cli({"voxelize", "--manifest", (dir / "m_bins.txt").string(), "--bins", "3", "--out", (dir / "d.f32").string()}).code == 0);
    CHECK(planes(dir / "d.f32") == 3);

    // Width from the flag overrides the manifest: events at x=1 still fit in 3 columns.
    REQUIRE(run_cli({"voxelize", "--manifest", (dir / "m_plain.txt").string(), "--width", "3", "--out", (dir / "e.f32").string()}).code == 0);
    CHECK(io::read_f32(dir / "e.f32").front().width() == 3);
    // No manifest and no size: a one-line error.
    CHECK(run_cli({"voxelize", "--events", (dir / "events.txt").string(), "--out", (dir / "f.f32").string()}).code == 1);

    // Interval: flag beats manifest. A 10 ms exposure makes t=-0.05 out of range.
    CHECK(run_cli({"voxelize", "--manifest", (dir / "m_plain.txt").string(), "--exposure-ms", "10", "--out", (dir / "g.f32").string()}).code == 1);
    // Default 120 ms interval without a manifest.
    CHECK(run_cli({"voxelize", "--events", (dir / "events.txt").string(), "--width", "2", "--height", "2", "--out", (dir / "h.f32").string()}).code == 0);

    // Voxelization conserves signed counts.
    const auto vox = io::read_f32(dir / "a.f32");
    double total = 0.0;
    for (const auto& f : vox) for (double v : f.values()) total += v;
    CHECK(total == 0.0);
    CHECK(vox[voxel_bin(iv, 40, -0.05)](1, 0) == 1.0);
    CHECK(vox[20](0, 1) == -1.0);
}
