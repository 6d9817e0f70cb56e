#include "rdh/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <future>
#include <optional>
#include <set>
#include <sstream>

#include "rdh/core.hpp"
#include "rdh/dehaze.hpp"
#include "rdh/io.hpp"
#include "rdh/metrics.hpp"
#include "rdh/parallel.hpp"
#include "rdh/retinex.hpp"
#include "rdh/synth.hpp"

namespace rdh::cli {
namespace fs = std::filesystem;

namespace {

// --- parameter tables -----------------------------------------------------

enum class Kind { integer, real, text, real_list };

struct ParamDef {
  std::string key;
  Kind kind;
  std::string fallback;
};

struct MethodDef {
  std::string name;
  std::vector<ParamDef> params;
};

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const std::string& floor_default() {
  static const std::string s = format_real(EpsilonPolicy::kDefaultFloor);
  return s;
}

const std::vector<MethodDef>& registry() {
  static const std::vector<MethodDef> defs = [] {
    const ParamDef floor{"floor", Kind::real, floor_default()};
    const ParamDef seed{"seed", Kind::integer, ""};
    return std::vector<MethodDef>{
        {"none", {}},
        {"he", {{"bins", Kind::integer, "256"}}},
        {"ssr", {{"sigma", Kind::real, "80"}, floor}},
        {"msr", {{"sigmas", Kind::real_list, "15/80/250"}, {"weights", Kind::real_list, ""}, floor}},
        {"hf", {{"sigma", Kind::real, "80"}, floor}},
        {"rsr", {{"n", Kind::integer, "75"}, {"sprays", Kind::integer, "20"}, {"radius", Kind::real, "0"}, seed, floor}},
        {"lrsr",
         {{"n", Kind::integer, "75"}, {"radius", Kind::real, "0"}, {"k1", Kind::integer, "25"}, {"k2", Kind::integer, "25"},
          seed, floor}},
        {"kbr", {{"sigma", Kind::real, "10"}, {"window", Kind::integer, "0"}, {"f", Kind::text, "identity"}, floor}},
        {"path", {{"paths", Kind::integer, "50"}, {"length", Kind::integer, "0"}, {"f", Kind::text, "identity"}, seed, floor}},
        {"dcp",
         {{"patch", Kind::integer, "7"},
          {"retain", Kind::real, "1"},
          {"refine", Kind::integer, "1"},
          {"top", Kind::real, "0.001"},
          {"tmin", Kind::real, "0.1"},
          {"gf_radius", Kind::integer, "20"},
          {"gf_reg", Kind::real, "0.001"},
          {"airlight", Kind::text, "estimate"}}},
    };
  }();
  return defs;
}

const MethodDef& find_method(const std::string& name) {
  for (const auto& d : registry())
    if (d.name == name) return d;
  throw UsageError("unknown method '" + name + "'");
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  const auto last = s.find_last_not_of(" \t");
  return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  double v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v))
    throw UsageError("parameter '" + key + "': '" + text + "' is not a number");
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw UsageError("parameter '" + key + "': '" + text + "' is not an integer");
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, '/')) out.push_back(parse_real(key, trim(item)));
  return out;
}

std::string normalize(const ParamDef& def, const std::string& text) {
  switch (def.kind) {
    case Kind::integer:
      return std::to_string(parse_integer(def.key, text));
    case Kind::real:
      return format_real(parse_real(def.key, text));
    case Kind::real_list: {
      std::string out;
      for (double v : parse_list(def.key, text)) out += (out.empty() ? "" : "/") + format_real(v);
      return out;
    }
    case Kind::text:
      return text;
  }
  return text;
}

// --- backend construction ---------------------------------------------------

struct ParamView {
  const std::map<std::string, std::string>& p;
  double real(const std::string& k) const { return parse_real(k, p.at(k)); }
  long long integer(const std::string& k) const { return parse_integer(k, p.at(k)); }
  int small_int(const std::string& k) const {
    const long long v = integer(k);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
      throw UsageError("parameter '" + k + "' out of range");
    return static_cast<int>(v);
  }
  std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("seed")); }
  const std::string& text(const std::string& k) const { return p.at(k); }
  EpsilonPolicy eps() const { return EpsilonPolicy(real("floor")); }
  ScalingFn scaling() const {
    const auto& f = text("f");
    if (f == "identity") return ScalingFn::identity;
    if (f == "log") return ScalingFn::logarithm;
    throw UsageError("parameter 'f' must be identity or log");
  }
};

Enhancer build_backend(const std::string& name, const std::map<std::string, std::string>& params) {
  const ParamView v{params};
  if (name == "none") return Enhancer::identity();
  if (name == "he") {
    const int bins = v.small_int("bins");
    if (bins < 2) throw UsageError("he: bins must be >= 2");
    return {name, [bins](const ImageF& img) { return hist_equalize(img, bins); }};
  }
  if (name == "ssr" || name == "hf") {
    const double sigma = v.real("sigma");
    if (!(sigma > 0)) throw UsageError(name + ": sigma must be positive");
    const EpsilonPolicy eps = v.eps();
    if (name == "ssr") return {name, [=](const ImageF& img) { return ssr(img, sigma, eps); }};
    return {name, [=](const ImageF& img) { return homomorphic(img, sigma, eps); }};
  }
  if (name == "msr") {
    const auto sigmas = parse_list("sigmas", v.text("sigmas"));
    auto weights = parse_list("weights", v.text("weights"));
    if (weights.empty()) weights.assign(sigmas.size(), 1.0 / static_cast<double>(sigmas.size()));
    if (weights.size() != sigmas.size()) throw UsageError("msr: sigmas and weights differ in length");
    std::vector<ScaleBank::Scale> scales;
    for (std::size_t i = 0; i < sigmas.size(); ++i) scales.push_back({sigmas[i], weights[i]});
    const ScaleBank bank(scales);
    const EpsilonPolicy eps = v.eps();
    return {name, [=](const ImageF& img) { return msr(img, bank, eps); }};
  }
  if (name == "rsr" || name == "lrsr") {
    SprayConfig cfg;
    cfg.samples = v.small_int("n");
    cfg.sprays = name == "rsr" ? v.small_int("sprays") : 1;
    cfg.radius = v.real("radius");
    cfg.seed = v.seed();
    cfg.eps = v.eps();
    if (cfg.samples < 1 || cfg.sprays < 1 || cfg.radius < 0) throw UsageError(name + ": invalid spray parameters");
    if (name == "rsr") return {name, [=](const ImageF& img) { return rsr(img, cfg); }};
    const int k1 = v.small_int("k1"), k2 = v.small_int("k2");
    if (k1 < 1 || k2 < 1 || k1 % 2 == 0 || k2 % 2 == 0) throw UsageError("lrsr: k1 and k2 must be odd and positive");
    return {name, [=](const ImageF& img) { return lrsr(img, cfg, k1, k2); }};
  }
  if (name == "kbr") {
    KernelRetinexConfig cfg;
    cfg.omega_sigma = v.real("sigma");
    cfg.window = v.integer("window");
    cfg.f = v.scaling();
    cfg.eps = v.eps();
    if (!(cfg.omega_sigma > 0) || cfg.window < 0) throw UsageError("kbr: invalid kernel parameters");
    return {name, [=](const ImageF& img) { return kbr(img, cfg); }};
  }
  if (name == "path") {
    PathConfig cfg;
    cfg.num_paths = v.small_int("paths");
    cfg.path_length = v.small_int("length");
    cfg.f = v.scaling();
    cfg.seed = v.seed();
    cfg.eps = v.eps();
    if (cfg.num_paths < 1 || cfg.path_length < 0) throw UsageError("path: invalid path parameters");
    return {name, [=](const ImageF& img) { return path_retinex(img, cfg); }};
  }
  if (name == "dcp") {
    DcpConfig cfg;
    cfg.patch.radius = v.integer("patch");
    cfg.retain = v.real("retain");
    cfg.refine = v.integer("refine") != 0;
    cfg.top_fraction = v.real("top");
    cfg.t_min = v.real("tmin");
    cfg.guide_radius = v.integer("gf_radius");
    cfg.guide_reg = v.real("gf_reg");
    const auto& airlight = v.text("airlight");
    if (airlight == "white") cfg.airlight = AtmosphericLight::white();
    else if (airlight != "estimate") throw UsageError("dcp: airlight must be estimate or white");
    if (cfg.patch.radius < 0 || !(cfg.retain > 0 && cfg.retain <= 1) || !(cfg.top_fraction > 0 && cfg.top_fraction <= 1) ||
        !(cfg.t_min > 0 && cfg.t_min < 1) || cfg.guide_radius < 0 || !(cfg.guide_reg > 0))
      throw UsageError("dcp: parameter out of range");
    return {name, [=](const ImageF& img) {
              if (img.channels() != 3) throw std::invalid_argument("dcp: RGB input required");
              return dcp_dehaze(img, cfg);
            }};
  }
  throw UsageError("unknown method '" + name + "'");
}

// --- commands -------------------------------------------------------------

struct Reporter {
  std::ostream& out;
  std::ostream& err;
};

std::string composition_prefix(Composition c) {
  switch (c) {
    case Composition::dehret:
      return "dehret:";
    case Composition::retdeh:
      return "retdeh:";
    case Composition::none:
      break;
  }
  return "";
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

template <typename Fn>
int guarded(Reporter& r, Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    r.err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    r.err << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    r.err << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    r.err << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  }
}

struct EnhanceArgs {
  std::string method;
  std::optional<std::uint64_t> seed;
  int bits = 8;
  std::string input, output;
};

int do_enhance(const EnhanceArgs& a, Reporter& r) {
  const MethodSpec spec = parse_method(a.method, a.seed.value_or(default_seed_from_env()));
  if (a.bits != 8 && a.bits != 16) throw UsageError("--bits must be 8 or 16");
  const Enhancer enhancer = make_enhancer(spec);
  const ImageF input = load_image(a.input);
  const ImageF result = enhancer(input);
  if (!result.all_finite()) throw std::runtime_error("non-finite values in output");
  save_image(a.output, result, a.bits);

  RunManifest m;
  m.set("command", "enhance");
  m.set("method", spec.canonical());
  m.set("input", a.input);
  m.set("output", a.output);
  m.set("bits", std::to_string(a.bits));
  for (const auto& [k, v] : spec.params) m.set("param." + k, v);
  m.write(manifest_path_for(a.output));
  r.out << a.output << '\n';
  return kOk;
}

struct SynthArgs {
  std::string gt;
  std::string depth = "ramp";
  int levels = 4;
  double beta = 1.0;
  double amp = 0.0;
  double scale = 32.0;
  std::optional<std::uint64_t> seed;
  std::string airlight = "1,1,1";
  std::string output;
  std::string tmap;
  std::string depth_out;
  int bits = 8;
};

AtmosphericLight parse_airlight(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(parse_real("airlight", trim(item)));
  if (v.size() == 1) v.assign(3, v[0]);
  if (v.size() != 3) throw UsageError("--airlight needs one or three components");
  for (double c : v)
    if (!(c > 0 && c <= 1)) throw UsageError("--airlight components must lie in (0,1]");
  return {v[0], v[1], v[2]};
}

fs::path default_tmap_path(const fs::path& output) {
  fs::path p = output;
  p.replace_filename(output.stem().string() + "_t.png");
  return p;
}

int do_synth(const SynthArgs& a, Reporter& r) {
  if (a.bits != 8 && a.bits != 16) throw UsageError("--bits must be 8 or 16");
  if (!(a.beta >= 0)) throw UsageError("--beta must be >= 0");
  if (!(a.amp >= 0 && a.amp <= 0.5)) throw UsageError("--amp must lie in [0, 0.5]");
  if (!(a.scale > 0)) throw UsageError("--scale must be positive");
  const bool preset = a.depth == "ramp" || a.depth == "corridor" || a.depth == "steps";
  if (preset && a.levels < 2) throw UsageError("--levels must be >= 2");
  const AtmosphericLight airlight = parse_airlight(a.airlight);
  const std::uint64_t seed = a.seed.value_or(default_seed_from_env());

  const ImageF scene = load_image(a.gt);
  std::optional<DepthField> depth;
  if (preset) {
    depth.emplace(depth_preset(a.depth, scene.width(), scene.height(), a.levels));
  } else {
    const ImageF d = load_image(a.depth);
    if (d.channels() != 1 || !d.same_extent(scene)) throw UsageError("depth map must be a single-channel image matching --gt");
    depth.emplace(d.plane(0));
  }
  FogSpec spec;
  spec.beta = a.beta;
  spec.airlight = airlight;
  spec.perturb_amp = a.amp;
  spec.perturb_scale = a.scale;
  spec.seed = seed;
  const FoggyImage fog = synth_fog(scene, *depth, spec);

  const fs::path tmap = a.tmap.empty() ? default_tmap_path(a.output) : fs::path(a.tmap);
  save_image(a.output, fog.hazy, a.bits);
  save_image(tmap, fog.transmission.as_image(), 16);
  if (!a.depth_out.empty()) save_image(a.depth_out, ImageF::from_plane(depth->values().min(1.0)), 16);

  RunManifest m;
  m.set("command", "synth");
  m.set("gt", a.gt);
  m.set("depth", a.depth);
  m.set("levels", std::to_string(a.levels));
  m.set("beta", format_real(a.beta));
  m.set("amp", format_real(a.amp));
  m.set("scale", format_real(a.scale));
  m.set("seed", std::to_string(seed));
  m.set("airlight", format_real(airlight[0]) + "," + format_real(airlight[1]) + "," + format_real(airlight[2]));
  m.set("output", a.output);
  m.set("tmap", tmap.string());
  if (!a.depth_out.empty()) m.set("depth_out", a.depth_out);
  m.set("bits", std::to_string(a.bits));
  m.write(manifest_path_for(a.output));
  r.out << a.output << '\n';
  return kOk;
}

struct EvalArgs {
  std::string ref, input;
  std::vector<std::string> methods;
  std::optional<std::uint64_t> seed;
  std::string csv;
  int jobs = 0;
};

struct EvalItem {
  std::string id;
  fs::path ref, input;
};

std::vector<EvalItem> collect_items(const EvalArgs& a) {
  const fs::path ref(a.ref), input(a.input);
  if (!fs::exists(ref)) throw IoError("no such file or directory: " + a.ref);
  if (!fs::exists(input)) throw IoError("no such file or directory: " + a.input);
  std::vector<EvalItem> items;
  if (fs::is_directory(ref)) {
    if (!fs::is_directory(input)) throw UsageError("--ref is a directory, so --input must be one too");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(ref))
      if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no images in " + a.ref);
    for (const auto& f : files) items.push_back({f.filename().string(), f, input / f.filename()});
  } else {
    items.push_back({input.filename().string(), ref, input});
  }
  return items;
}

std::vector<MetricReport> evaluate_item(const EvalItem& item, const std::vector<MethodSpec>& specs,
                                        const std::vector<Enhancer>& enhancers, std::string& warning) {
  std::vector<MetricReport> rows;
  auto blank_rows = [&] {
    for (const auto& s : specs) rows.push_back({item.id, s.canonical(), {}, {}, {}, {}, {}, {}});
  };
  ImageF ref, input;
  try {
    ref = load_image(item.ref);
    input = load_image(item.input);
  } catch (const IoError& e) {
    warning = e.what();
    blank_rows();
    return rows;
  }
  if (!ref.same_extent(input)) {
    warning = item.id + ": reference and input dimensions differ";
    blank_rows();
    return rows;
  }
  if (ref.channels() != input.channels()) {
    // Compare in RGB when one side is gray.
    auto to_rgb = [](const ImageF& g) { return g.channels() == 3 ? g : ImageF({g.plane(0), g.plane(0), g.plane(0)}); };
    ref = to_rgb(ref);
    input = to_rgb(input);
  }
  for (std::size_t k = 0; k < specs.size(); ++k) {
    MetricReport row{item.id, specs[k].canonical(), {}, {}, {}, {}, {}, {}};
    try {
      const ImageF out = enhancers[k](input);
      row.ssim = ssim(out, ref);
      row.cpsnr = cpsnr(out, ref);
      row.de00 = de00(out, ref);
      const Visibility vis = visibility_metrics(input, out);
      row.e = vis.e;
      row.r = vis.r;
      row.sigma = vis.sigma;
    } catch (const std::exception& e) {
      warning = item.id + " / " + specs[k].canonical() + ": " + e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

int do_eval(const EvalArgs& a, Reporter& r) {
  const std::uint64_t seed = a.seed.value_or(default_seed_from_env());
  std::vector<MethodSpec> specs;
  for (const auto& m : (a.methods.empty() ? std::vector<std::string>{"none"} : a.methods)) specs.push_back(parse_method(m, seed));
  std::vector<Enhancer> enhancers;
  for (const auto& s : specs) enhancers.push_back(make_enhancer(s));
  if (a.jobs < 0) throw UsageError("--jobs must be >= 0");

  const std::vector<EvalItem> items = collect_items(a);
  const std::size_t jobs = a.jobs > 0 ? static_cast<std::size_t>(a.jobs) : static_cast<std::size_t>(num_threads());

  // Images are evaluated concurrently; rows are emitted in input-path order.
  std::vector<std::vector<MetricReport>> per_item(items.size());
  std::vector<std::string> warnings(items.size());
  for (std::size_t start = 0; start < items.size(); start += jobs) {
    std::vector<std::future<void>> batch;
    for (std::size_t i = start; i < std::min(items.size(), start + jobs); ++i)
      batch.push_back(std::async(std::launch::async, [&, i] { per_item[i] = evaluate_item(items[i], specs, enhancers, warnings[i]); }));
    for (auto& f : batch) f.get();
  }

  std::vector<MetricReport> rows;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!warnings[i].empty()) r.err << "warning: " << warnings[i] << '\n';
    rows.insert(rows.end(), per_item[i].begin(), per_item[i].end());
  }
  const auto means = aggregate_means(rows);

  std::ostringstream report;
  report << csv_header() << '\n';
  for (const auto& row : rows) report << csv_row(row) << '\n';
  for (const auto& row : means) report << csv_row(row) << '\n';

  if (a.csv.empty()) {
    r.out << report.str();
  } else {
    std::ofstream f(a.csv, std::ios::binary);
    if (!f) throw IoError("cannot write " + a.csv);
    f << report.str();
    if (!f) throw IoError("write failed for " + a.csv);
    RunManifest m;
    m.set("command", "eval");
    m.set("ref", a.ref);
    m.set("input", a.input);
    for (const auto& s : specs) m.set("method", s.canonical());
    m.set("seed", std::to_string(seed));
    m.set("csv", a.csv);
    m.write(manifest_path_for(a.csv));
    r.out << a.csv << '\n';
  }
  return kOk;
}

int do_replay(const std::string& manifest_file, Reporter& r) {
  const RunManifest m = RunManifest::read(manifest_file);
  const std::string command = m.get("command");
  if (command == "enhance") {
    EnhanceArgs a;
    a.method = m.get("method");
    a.input = m.get("input");
    a.output = m.get("output");
    a.bits = static_cast<int>(parse_integer("bits", m.get("bits")));
    return do_enhance(a, r);
  }
  if (command == "synth") {
    SynthArgs a;
    a.gt = m.get("gt");
    a.depth = m.get("depth");
    a.levels = static_cast<int>(parse_integer("levels", m.get("levels")));
    a.beta = parse_real("beta", m.get("beta"));
    a.amp = parse_real("amp", m.get("amp"));
    a.scale = parse_real("scale", m.get("scale"));
    a.seed = static_cast<std::uint64_t>(parse_integer("seed", m.get("seed")));
    a.airlight = m.get("airlight");
    a.output = m.get("output");
    a.tmap = m.get("tmap");
    if (m.has("depth_out")) a.depth_out = m.get("depth_out");
    a.bits = static_cast<int>(parse_integer("bits", m.get("bits")));
    return do_synth(a, r);
  }
  if (command == "eval") {
    EvalArgs a;
    a.ref = m.get("ref");
    a.input = m.get("input");
    a.methods = m.get_all("method");
    a.seed = static_cast<std::uint64_t>(parse_integer("seed", m.get("seed")));
    a.csv = m.get("csv");
    return do_eval(a, r);
  }
  throw UsageError("manifest has unknown command '" + command + "'");
}

}  // namespace

// --- public API -------------------------------------------------------------

std::string MethodSpec::canonical() const {
  std::string s = composition_prefix(composition) + name;
  for (const auto& [k, v] : params) s += "," + k + "=" + v;
  return s;
}

std::vector<std::string> method_names() {
  std::vector<std::string> out;
  for (const auto& d : registry()) out.push_back(d.name);
  return out;
}

MethodSpec parse_method(const std::string& text, std::uint64_t default_seed) {
  MethodSpec spec;
  std::string rest = trim(text);
  for (const auto c : {Composition::dehret, Composition::retdeh}) {
    const std::string prefix = composition_prefix(c);
    if (rest.rfind(prefix, 0) == 0) {
      spec.composition = c;
      rest = rest.substr(prefix.size());
      break;
    }
  }
  std::vector<std::string> parts;
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  if (parts.empty() || parts[0].empty()) throw UsageError("empty method string");
  spec.name = parts[0];
  const MethodDef& def = find_method(spec.name);

  std::map<std::string, std::string> given;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw UsageError("expected key=value in method string, got '" + parts[i] + "'");
    const std::string key = trim(parts[i].substr(0, eq));
    if (given.count(key)) throw UsageError("parameter '" + key + "' given twice");
    given[key] = trim(parts[i].substr(eq + 1));
  }
  for (const auto& [k, v] : given) {
    const bool known = std::any_of(def.params.begin(), def.params.end(), [&](const ParamDef& p) { return p.key == k; });
    if (!known) throw UsageError("method '" + spec.name + "' has no parameter '" + k + "'");
  }
  for (const auto& p : def.params) {
    std::string value = given.count(p.key) ? given[p.key] : p.fallback;
    if (p.key == "seed" && !given.count(p.key)) value = std::to_string(default_seed);
    spec.params[p.key] = normalize(p, value);
  }
  try {
    (void)build_backend(spec.name, spec.params);
  } catch (const UsageError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return spec;
}

Enhancer make_enhancer(const MethodSpec& spec) {
  Enhancer backend = build_backend(spec.name, spec.params);
  const std::string label = spec.canonical();
  switch (spec.composition) {
    case Composition::dehret:
      return {label, [backend](const ImageF& img) { return dehret(img, backend); }};
    case Composition::retdeh:
      return {label, [backend](const ImageF& img) { return retdeh(img, backend); }};
    case Composition::none:
      break;
  }
  return {label, [backend](const ImageF& img) { return backend(img); }};
}

std::uint64_t default_seed_from_env() {
  if (const char* env = std::getenv("RDH_SEED")) {
    const std::string s(env);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return v;
  }
  return 0;
}

void RunManifest::set(const std::string& key, const std::string& value) {
  if (key.find('=') != std::string::npos || key.find('\n') != std::string::npos || value.find('\n') != std::string::npos)
    throw std::invalid_argument("manifest entries must be single-line key=value pairs");
  if (key != "method") {
    for (auto& [k, v] : entries)
      if (k == key) {
        v = value;
        return;
      }
  }
  entries.emplace_back(key, value);
}

bool RunManifest::has(const std::string& key) const {
  return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.first == key; });
}

std::string RunManifest::get(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  throw UsageError("manifest is missing '" + key + "'");
}

std::vector<std::string> RunManifest::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries)
    if (k == key) out.push_back(v);
  return out;
}

void RunManifest::write(const fs::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  for (const auto& [k, v] : entries) f << k << '=' << v << '\n';
  if (!f) throw IoError("write failed for " + path.string());
}

RunManifest RunManifest::read(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  RunManifest m;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("malformed manifest line: " + line);
    m.entries.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return m;
}

fs::path manifest_path_for(const fs::path& output) {
  fs::path p = output;
  p += ".manifest";
  return p;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Reporter r{out, err};
  CLI::App app{"Retinex / dehazing duality toolkit", "rdh"};
  app.require_subcommand(1);

  EnhanceArgs enhance;
  auto* enh = app.add_subcommand("enhance", "Run one method on one image");
  enh->add_option("-m,--method", enhance.method, "Method string, e.g. msr or dehret:rsr,n=75")->required();
  enh->add_option("-s,--seed", enhance.seed, "Seed for stochastic methods (default: $RDH_SEED or 0)");
  enh->add_option("--bits", enhance.bits, "Output bit depth (8 or 16)");
  enh->add_option("input", enhance.input, "Input image")->required();
  enh->add_option("output", enhance.output, "Output image")->required();

  SynthArgs synth;
  auto* syn = app.add_subcommand("synth", "Add synthetic fog to a haze-free image");
  syn->add_option("--gt", synth.gt, "Haze-free image")->required();
  syn->add_option("--depth", synth.depth, "Depth preset (ramp, corridor, steps) or a 16-bit PGM");
  syn->add_option("--levels", synth.levels, "Number of bands for the steps preset");
  syn->add_option("--beta", synth.beta, "Extinction coefficient");
  syn->add_option("--amp", synth.amp, "Perturbation amplitude in [0, 0.5]");
  syn->add_option("--scale", synth.scale, "Perturbation correlation length in pixels");
  syn->add_option("-s,--seed", synth.seed, "Perturbation seed (default: $RDH_SEED or 0)");
  syn->add_option("--airlight", synth.airlight, "Airlight r,g,b in (0,1]");
  syn->add_option("-o,--out", synth.output, "Hazy output image")->required();
  syn->add_option("--tmap", synth.tmap, "Transmission output (16-bit PNG; default <out>_t.png)");
  syn->add_option("--depth-out", synth.depth_out, "Also write the depth map as a 16-bit PGM");
  syn->add_option("--bits", synth.bits, "Hazy image bit depth (8 or 16)");

  EvalArgs eval;
  auto* ev = app.add_subcommand("eval", "Score methods against references and write a CSV report");
  ev->add_option("--ref", eval.ref, "Reference image or directory")->required();
  ev->add_option("--input", eval.input, "Degraded image or directory (paired by file name)")->required();
  ev->add_option("-m,--method", eval.methods, "Method string; repeat for several (default: none)");
  ev->add_option("-s,--seed", eval.seed, "Seed for stochastic methods (default: $RDH_SEED or 0)");
  ev->add_option("--csv", eval.csv, "Report path (default: stdout)");
  ev->add_option("-j,--jobs", eval.jobs, "Images processed concurrently (default: thread count)");

  std::string manifest;
  auto* rep = app.add_subcommand("replay", "Re-run a command from its manifest");
  rep->add_option("manifest", manifest, "Manifest file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kUsage;
  }

  if (*enh) return guarded(r, [&] { return do_enhance(enhance, r); });
  if (*syn) return guarded(r, [&] { return do_synth(synth, r); });
  if (*ev) return guarded(r, [&] { return do_eval(eval, r); });
  if (*rep) return guarded(r, [&] { return do_replay(manifest, r); });
  return kUsage;
}

}  // namespace rdh::cli
