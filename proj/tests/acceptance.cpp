// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "rdh/cli.hpp"
#include "support.hpp"

using namespace rdh;
using namespace rdh::test;
namespace cli = rdh::cli;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

Enhancer method(const std::string& text) { return cli::make_enhancer(cli::parse_method(text)); }

// 1. Retinex brightens, so DehRet darkens.
Outcome brightness_monotonicity() {
  const auto start = Clock::now();
  std::vector<ImageF> images;
  for (int k = 0; k < 20; ++k) images.push_back(random_image(64, 64, 3, 1000 + k));
  for (int k = 0; k < 5; ++k) images.push_back(hazy_fixture(k, 64, 64).hazy);

  const std::vector<Enhancer> backends{method("path"), method("rsr"), method("lrsr"), method("kbr")};
  double worst_dehret = -1e300, worst_retinex = -1e300;
  for (const auto& img : images)
    for (const auto& r : backends) {
      worst_retinex = std::max(worst_retinex, max_excess(img, r(img)));
      worst_dehret = std::max(worst_dehret, max_excess(dehret_unclipped(img, r), img));
    }
  const double elapsed = seconds_since(start);
  const bool pass = worst_dehret <= 1e-6 && worst_retinex <= 1e-6 && elapsed < 60;
  return {pass, fmt("max(dehret - I) = %.3g, max(I - retinex) = %.3g over 25 images x 4 backends, %.1f s", worst_dehret,
                    worst_retinex, elapsed)};
}

// 2. Ideal illumination-dividing backend undoes piecewise-constant fog.
Outcome duality_recovery_oracle() {
  const Index w = 90, h = 60;
  const ImageF j = dark_channel_zero_scene(w, h, 2);
  Plane tv(h, w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) tv(y, x) = (x < w / 3) ? 0.3 : (y < h / 2 ? 0.6 : 0.9);
  const TransmissionMap t(tv);
  const ImageF hazy = koschmieder_forward(j, t, AtmosphericLight::white());
  const Enhancer oracle{"oracle", [t](const ImageF& img) {
                          return map_planes(img, [&](const Plane& p) { return Plane(p / t.values()); });
                        }};
  const double exact = max_abs_diff(dehret(hazy, oracle), j);
  const double quantized = max_abs_diff(dehret(quantize(hazy, 16), oracle), j);
  return {exact < 1e-6 && quantized < 1e-3,
          fmt("max error %.3g before quantization, %.3g after 16-bit quantization", exact, quantized)};
}

// 3. Transmission of the inverted monochrome image is the max filter.
Outcome max_filter_equivalence() {
  double worst = 0;
  for (int k = 0; k < 10; ++k) {
    const ImageF img = random_image(48 + k, 40, 1, 3000 + k);
    for (Index r : {1, 3, 7}) {
      const TransmissionMap t = estimate_transmission(invert(img), AtmosphericLight::white(), {r}, 1.0, 0.0);
      worst = std::max(worst, max_abs_diff(t.values(), max_filter(img, {r}).plane(0)));
    }
  }
  return {worst < 1e-9, fmt("max |t - maxfilter| = %.3g over 10 images x 3 radii", worst)};
}

// 4. Unrefined DCP with known white airlight inverts constant-t fog.
Outcome dcp_exact_recovery() {
  double worst_t = 0, worst_j = 0;
  const ImageF j = dark_channel_zero_scene(80, 64, 4);
  for (double t : {0.2, 0.35, 0.5, 0.65, 0.8, 0.9}) {
    const ImageF hazy = koschmieder_forward(j, TransmissionMap::constant(80, 64, t), AtmosphericLight::white());
    DcpConfig cfg;
    cfg.refine = false;
    cfg.airlight = AtmosphericLight::white();
    const DcpResult r = dcp_dehaze_detailed(hazy, cfg);
    worst_t = std::max(worst_t, (r.transmission.values() - t).abs().maxCoeff());
    worst_j = std::max(worst_j, max_abs_diff(r.scene, j));
  }
  return {worst_t < 1e-6 && worst_j < 1e-3, fmt("max t error %.3g, max J error %.3g over 6 transmissions", worst_t, worst_j)};
}

// 5. Metric reference values.
Outcome metric_references() {
  const ImageF a = procedural_scene(64, 64, 5);
  const double s = ssim(a, a);
  const ImageF base = random_image(32, 32, 3, 5, 0.0, 0.9);
  const double p = cpsnr(base, map_planes(base, [](const Plane& x) { return Plane(x + 0.1); }));
  double worst_de = 0;
  for (const auto& q : ciede2000_pairs())
    worst_de = std::max(worst_de, std::abs(ciede2000({q[0], q[1], q[2]}, {q[3], q[4], q[5]}) - q[6]));
  const Visibility v = visibility_metrics(a, a);
  const bool vis_ok = v.e && *v.e == 0.0 && v.r && *v.r == 1.0 && v.sigma == 0.0;
  const bool pass = std::abs(s - 1.0) < 1e-12 && std::abs(p - 20.0) < 1e-6 && worst_de < 1e-4 && vis_ok;
  return {pass, fmt("SSIM(I,I) = %.15g, CPSNR = %.9f dB, max CIEDE2000 error %.2g on 34 pairs, e/r/sigma identity ", s, p,
                    worst_de) +
                    (vis_ok ? "ok" : "wrong")};
}

// 6. Directional ranking: inverted-Retinex dehazers beat the hazy input and HE.
Outcome directional_ranking() {
  const auto corpus = synthetic_corpus(10, 128, 128);
  const std::vector<std::string> names{"dcp", "dehret:msr", "dehret:rsr", "dehret:hf"};
  const Enhancer he = method("he");
  double he_psnr = 0;
  for (const auto& item : corpus) he_psnr += cpsnr(he(item.hazy), item.gt) / 10;

  bool pass = true;
  std::ostringstream detail;
  detail << "HE mean CPSNR " << fmt("%.2f", he_psnr);
  for (const auto& name : names) {
    const Enhancer e = method(name);
    int wins = 0;
    double psnr = 0;
    for (const auto& item : corpus) {
      const ImageF out = e(item.hazy);
      wins += ssim(out, item.gt) > ssim(item.hazy, item.gt);
      psnr += cpsnr(out, item.gt) / 10;
    }
    pass = pass && wins >= 8 && psnr > he_psnr;
    detail << "; " << name << " SSIM wins " << wins << "/10, CPSNR " << fmt("%.2f", psnr);
  }
  return {pass, detail.str()};
}

// 7. Fast implementations against brute-force references.
Outcome oracle_equivalence() {
  double minmax = 0, gauss = 0, guided = 0, kernel = 0, light = 0;
  for (int k = 0; k < 5; ++k) {
    const ImageF img = random_image(17 + k, 13 + 2 * k, 3, 7000 + k);
    const Plane p = img.plane(0);
    const Index r = 1 + k;
    minmax = std::max({minmax, max_abs_diff(min_filter<double>(p, r), naive_window_extremum(p, r, false)),
                       max_abs_diff(max_filter<double>(p, r), naive_window_extremum(p, r, true))});
    gauss = std::max(gauss, max_abs_diff(gaussian_blur<double>(p, 0.7 + k), naive_gaussian(p, 0.7 + k)));
    const Plane src = random_image(img.width(), img.height(), 1, 7100 + k).plane(0);
    guided = std::max({guided, max_abs_diff(guided_filter(img, src, r, 1e-3), naive_guided_filter(img, src, r, 1e-3)),
                       max_abs_diff(guided_filter(ImageF::from_plane(p), src, r, 1e-2),
                                    naive_guided_filter(ImageF::from_plane(p), src, r, 1e-2))});
    KernelRetinexConfig kc;
    kc.omega_sigma = 1.0 + k;
    kc.window = 2 + k;
    kernel = std::max(kernel, max_abs_diff(kbr(img, kc), naive_kbr(img, kc.omega_sigma, kc.window, ScalingFn::identity)));
    SprayConfig sc;
    sc.samples = 30;
    sc.seed = static_cast<std::uint64_t>(k);
    light = std::max(light, max_abs_diff(lrsr(img, sc, 3 + 2 * k, 5), naive_lrsr(img, sc, 3 + 2 * k, 5)));
  }
  const bool pass = std::max({minmax, gauss, guided, kernel, light}) < 1e-6;
  return {pass, fmt("max deviation: min/max %.2g, Gaussian %.2g, guided %.2g, KBR %.2g", minmax, gauss, guided, kernel) +
                    fmt(", LRSR %.2g (5 instances each)", light)};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

int quiet_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

// 8. CLI runs replayed from their manifests are bit-identical.
Outcome determinism() {
  ScratchDir dir("acceptance");
  std::filesystem::create_directories(dir.path() / "gt");
  std::filesystem::create_directories(dir.path() / "hazy");
  const auto corpus = synthetic_corpus(6, 48, 48);
  for (std::size_t k = 0; k < corpus.size(); ++k) save_image(dir.path() / "gt" / ("s" + std::to_string(k) + ".png"), corpus[k].gt);
  save_image(dir / "gt.png", corpus[0].gt);

  int failures = 0, checks = 0;
  auto same = [&](const std::string& a, const std::string& b) {
    ++checks;
    if (a.empty() || a != b) ++failures;
  };

  set_num_threads(1);
  quiet_run({"synth", "--gt", dir / "gt.png", "--depth", "corridor", "--amp", "0.2", "--seed", "3", "--out", dir / "hazy.png"});
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const std::string name = "s" + std::to_string(k) + ".png";
    quiet_run({"synth", "--gt", (dir.path() / "gt" / name).string(), "--depth", "ramp", "--seed", std::to_string(k), "--out",
               (dir.path() / "hazy" / name).string()});
  }
  quiet_run({"enhance", "--method", "dehret:rsr", "--seed", "5", dir / "hazy.png", dir / "rsr.png"});
  quiet_run({"enhance", "--method", "path,paths=10", "--seed", "5", dir / "hazy.png", dir / "path.png"});
  quiet_run({"eval", "--ref", dir / "gt", "--input", dir / "hazy", "-m", "dehret:rsr,n=20,sprays=5", "-m", "dcp", "-m", "he",
             "--jobs", "1", "--csv", dir / "report.csv"});
  const std::string hazy = slurp(dir / "hazy.png"), rsr_out = slurp(dir / "rsr.png"), path_out = slurp(dir / "path.png"),
                    report = slurp(dir / "report.csv");

  for (int threads : {1, 4}) {
    set_num_threads(threads);
    for (const char* name : {"hazy.png", "rsr.png", "path.png"}) quiet_run({"replay", dir / (std::string(name) + ".manifest")});
    same(slurp(dir / "hazy.png"), hazy);
    same(slurp(dir / "rsr.png"), rsr_out);
    same(slurp(dir / "path.png"), path_out);
    quiet_run({"replay", dir / "report.csv.manifest"});
    same(slurp(dir / "report.csv"), report);
    quiet_run({"eval", "--ref", dir / "gt", "--input", dir / "hazy", "-m", "dehret:rsr,n=20,sprays=5", "-m", "dcp", "-m", "he",
               "--jobs", "6", "--csv", dir / "concurrent.csv"});
    same(slurp(dir / "concurrent.csv"), report);
  }
  set_num_threads(0);
  return {failures == 0, std::to_string(checks - failures) + "/" + std::to_string(checks) +
                             " replays identical (synth, enhance, eval; 1 and 4 threads; serial and concurrent batches)"};
}

// 9. Timing on a 512x512 RGB image.
Outcome performance() {
  const ImageF img = hazy_fixture(0, 512, 512).hazy;
  bool pass = true;
  std::ostringstream detail;
  for (const char* name : {"msr", "dcp", "dehret:rsr,n=75,sprays=20"}) {
    const Enhancer e = method(name);
    const auto start = Clock::now();
    const ImageF out = e(img);
    const double elapsed = seconds_since(start);
    pass = pass && elapsed < 10 && out.all_finite();
    detail << (detail.tellp() > 0 ? ", " : "") << name << " " << fmt("%.2f s", elapsed);
  }
  return {pass, detail.str() + " (" + std::to_string(num_threads()) + " thread(s))"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 brightness monotonicity", brightness_monotonicity},
      {"2 dehret recovery oracle", duality_recovery_oracle},
      {"3 inverted-image transmission = max filter", max_filter_equivalence},
      {"4 DCP exact recovery", dcp_exact_recovery},
      {"5 metric references", metric_references},
      {"6 directional ranking", directional_ranking},
      {"7 oracle equivalence", oracle_equivalence},
      {"8 determinism", determinism},
      {"9 performance", performance},
  };
  int failed = 0;
  for (const auto& [label, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << label << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
