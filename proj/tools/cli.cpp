#include "cli.hpp"

#include "curves.hpp"
#include "toprec/engine.hpp"
#include "toprec/newton.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

namespace toprec::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string cache = ".toprec-cache";
  unsigned precision = 256;
  unsigned threads = 1;
  std::string format = "table";
};

struct CurveArgs {
  std::string curve;
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> given;

  CurveSpec spec(unsigned bits) const {
    CurveSpec s;
    s.curve = curve;
    s.bits = bits;
    for (auto& [name, opt] : given)
      if (opt->count()) s.args[name] = raw.at(name);
    return s;
  }
};

void add_curve_options(CLI::App* sub, CurveArgs& ca) {
  sub->add_option("--curve", ca.curve, "Curve preset (see `toprec curves`)")->required();
  std::set<std::string> names;
  for (auto& p : presets()) names.insert(p.options.begin(), p.options.end());
  for (auto& n : names) ca.given[n] = sub->add_option("--" + n, ca.raw[n], "Curve parameter");
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string idx_csv(const AiryStructure& q, const IndexList& k) {
  std::string s;
  for (auto& i : k) {
    if (!s.empty()) s += ";";
    s += q.points.name(i.point) + ":" + std::to_string(i.degree);
  }
  return s;
}

std::string idx_table(const AiryStructure& q, const IndexList& k) {
  std::string s;
  for (auto& i : k) {
    if (!s.empty()) s += " ";
    s += "(" + q.points.name(i.point) + "," + std::to_string(i.degree) + ")";
  }
  return s;
}

std::string render(const Scalar& v, int decimal) { return decimal > 0 ? v.decimal(decimal) : v.str(); }

std::string params_str(const std::map<std::string, std::string>& p) {
  std::string s;
  for (auto& [k, v] : p) s += (s.empty() ? "" : " ") + k + "=" + v;
  return s;
}

void check_stable(int g, int n) {
  if (g < 0 || n < 1) throw EngineError("need g >= 0 and n >= 1");
  if (2 * g - 2 + n <= 0)
    throw EngineError("unstable (g,n) = (" + std::to_string(g) + "," + std::to_string(n) + "): need 2g-2+n > 0");
}

// Attaches the disk cache and records how to rebuild the curve.
void attach_cache(AiryStructure& q, const CurveSpec& spec, const std::string& root) {
  q.disk = std::make_shared<DiskCache>(root);
  auto dir = q.disk->curve_dir(q);
  fs::create_directories(dir);
  if (!fs::exists(dir / "manifest.json")) q.disk->write_manifest(q);
  if (!fs::exists(dir / "job.json")) write_file(dir / "job.json", spec.to_json() + "\n");
}

// --- compute -------------------------------------------------------------------

struct ComputeArgs {
  CurveArgs curve;
  int g = -1, n = -1, level = -1;
  std::string method = "default";
  int decimal = 0;
  size_t cap = 1000000;
  bool no_cache = false;
};

int cmd_compute(const Globals& gl, const ComputeArgs& a, std::ostream& out) {
  std::vector<std::pair<int, int>> cells;
  if (a.level >= 1) {
    for (int level = 1; level <= a.level; ++level)
      for (int g = 0; 2 * g - 2 < level; ++g)
        if (int n = level - 2 * g + 2; n >= 1) cells.push_back({g, n});
  } else {
    if (a.g < 0 || a.n < 0) throw EngineError("compute needs --g and --n, or --level");
    check_stable(a.g, a.n);
    cells.push_back({a.g, a.n});
  }

  CurveSpec spec = a.curve.spec(gl.precision);
  BuiltCurve b = build(spec);
  AiryStructure& q = b.q;
  q.options.threads = gl.threads;
  q.options.cap = a.cap;
  if (!a.no_cache) attach_cache(q, spec, gl.cache);
  Method m = a.method == "abcd"      ? Method::abcd
             : a.method == "general" ? Method::general
                                     : q.default_method();

  std::vector<LabeledTensor> tensors;
  for (auto [g, n] : cells) tensors.push_back(q.F(g, n, m));

  if (gl.format == "json") {
    json j;
    j["curve"] = q.family;
    j["params"] = q.params;
    j["cells"] = json::array();
    for (size_t c = 0; c < cells.size(); ++c) {
      json entries = json::array();
      for (auto& k : tensors[c].sorted_keys()) {
        json idx = json::array();
        for (auto& i : k) idx.push_back({q.points.name(i.point), i.degree});
        entries.push_back({{"idx", idx}, {"value", render(tensors[c].at(k), a.decimal)}});
      }
      j["cells"].push_back({{"g", cells[c].first}, {"n", cells[c].second}, {"entries", entries}});
    }
    out << j.dump(2) << "\n";
  } else if (gl.format == "csv") {
    const bool multi = cells.size() > 1;
    out << (multi ? "g,n,idx,value\n" : "idx,value\n");
    for (size_t c = 0; c < cells.size(); ++c)
      for (auto& k : tensors[c].sorted_keys()) {
        if (multi) out << cells[c].first << "," << cells[c].second << ",";
        out << csv_field(idx_csv(q, k)) << "," << csv_field(render(tensors[c].at(k), a.decimal)) << "\n";
      }
  } else {
    for (size_t c = 0; c < cells.size(); ++c) {
      if (c) out << "\n";
      out << "F_{" << cells[c].first << "," << cells[c].second << "}  " << q.family;
      if (!q.params.empty()) out << "  " << params_str(q.params);
      out << "\n";
      for (auto& k : tensors[c].sorted_keys()) out << idx_table(q, k) << "  " << render(tensors[c].at(k), a.decimal) << "\n";
    }
  }
  return 0;
}

// --- omega ---------------------------------------------------------------------

struct OmegaArgs {
  CurveArgs curve;
  int g = -1, n = -1;
  std::vector<std::string> at;
  int decimal = 0;
  bool no_cache = false;
};

int cmd_omega(const Globals& gl, const OmegaArgs& a, std::ostream& out) {
  check_stable(a.g, a.n);
  if (static_cast<int>(a.at.size()) != a.n)
    throw EngineError("--at needs " + std::to_string(a.n) + " points, got " + std::to_string(a.at.size()));
  CurveSpec spec = a.curve.spec(gl.precision);
  BuiltCurve b = build(spec);
  b.q.options.threads = gl.threads;
  if (!a.no_cache) attach_cache(b.q, spec, gl.cache);

  Scalar value;
  if (b.newton) {
    // points are x@y on the curve
    std::vector<std::pair<Complex, Complex>> pts;
    for (auto& s : a.at) {
      auto at = s.find('@');
      if (at == std::string::npos) throw EngineError("newton points are written x@y, got '" + s + "'");
      pts.push_back({parse_point(s.substr(0, at), gl.precision).to_complex(gl.precision),
                     parse_point(s.substr(at + 1), gl.precision).to_complex(gl.precision)});
    }
    value = Scalar::complex(newton::omega_at(b.q, *b.newton, a.g, pts), gl.precision);
  } else {
    std::vector<Scalar> pts;
    for (auto& s : a.at) pts.push_back(parse_point(s, gl.precision));
    value = omega_eval(b.q, a.g, a.n, pts);
  }

  std::string v = render(value, a.decimal);
  if (gl.format == "json") {
    json j{{"curve", b.q.family}, {"params", b.q.params}, {"g", a.g}, {"n", a.n}, {"points", a.at}, {"value", v}};
    out << j.dump(2) << "\n";
  } else if (gl.format == "csv") {
    std::string pts;
    for (auto& s : a.at) pts += (pts.empty() ? "" : ";") + s;
    out << "points,value\n" << csv_field(pts) << "," << csv_field(v) << "\n";
  } else {
    out << "omega_{" << a.g << "," << a.n << "}(";
    for (size_t i = 0; i < a.at.size(); ++i) out << (i ? ", " : "") << a.at[i];
    out << ") = " << v << "\n";
  }
  return 0;
}

// --- cache ---------------------------------------------------------------------

struct CurveDir {
  fs::path path;
  json manifest;
  std::vector<std::tuple<int, int, fs::path>> cells;
};

std::vector<fs::path> curve_dirs(const fs::path& root) {
  std::vector<fs::path> out;
  if (!fs::is_directory(root)) return out;
  for (auto& e : fs::directory_iterator(root))
    if (e.is_directory() && fs::exists(e.path() / "manifest.json")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

CurveDir scan(const fs::path& dir) {
  static const std::regex re(R"(F_(\d+)_(\d+)\.json)");
  CurveDir c;
  c.path = dir;
  c.manifest = json::parse(read_file(dir / "manifest.json"));
  for (auto& e : fs::directory_iterator(dir)) {
    std::smatch m;
    std::string name = e.path().filename().string();
    if (std::regex_match(name, m, re)) c.cells.push_back({std::stoi(m[1]), std::stoi(m[2]), e.path()});
  }
  std::sort(c.cells.begin(), c.cells.end());
  return c;
}

int cmd_cache_list(const Globals& gl, std::ostream& out) {
  auto dirs = curve_dirs(gl.cache);
  out << dirs.size() << (dirs.size() == 1 ? " curve" : " curves") << "\n";
  for (auto& d : dirs) {
    auto c = scan(d);
    out << d.filename().string() << "  " << c.manifest.value("family", "?");
    auto params = c.manifest.value("parameters", std::map<std::string, std::string>{});
    if (!params.empty()) out << "  " << params_str(params);
    out << "  F:";
    for (auto& [g, n, p] : c.cells) out << " (" << g << "," << n << ")";
    out << "\n";
  }
  return 0;
}

int cmd_cache_verify(const Globals& gl, std::optional<unsigned> seed, std::ostream& out) {
  if (!fs::is_directory(gl.cache)) throw EngineError("no cache directory at " + gl.cache);
  std::mt19937 rng(seed ? *seed : std::random_device{}());
  int problems = 0;
  for (auto& d : curve_dirs(gl.cache)) {
    CurveDir c;
    try {
      c = scan(d);
    } catch (const std::exception& e) {
      out << "CORRUPT " << (d / "manifest.json").string() << ": " << e.what() << "\n";
      ++problems;
      continue;
    }
    PointNames points;
    points.names = c.manifest.value("points", std::vector<std::string>{"0"});
    std::map<std::pair<int, int>, LabeledTensor> stored;
    for (auto& [g, n, p] : c.cells) {
      try {
        std::string text = read_file(p);
        auto t = LabeledTensor::from_json(text, points);
        if (t.to_json(points) + "\n" != text) throw TensorError("not in canonical form");
        stored[{g, n}] = t;
      } catch (const std::exception& e) {
        out << "CORRUPT " << p.string() << ": " << e.what() << "\n";
        ++problems;
      }
    }
    if (stored.empty() || !fs::exists(d / "job.json")) continue;

    CurveSpec spec = CurveSpec::from_json(read_file(d / "job.json"));
    PrecisionScope ps(spec.bits);
    BuiltCurve b = build(spec);
    if (b.q.digest() != d.filename().string()) {
      out << "MISMATCH " << d.string() << ": job.json describes curve " << b.q.digest() << "\n";
      ++problems;
      continue;
    }
    auto pick = stored.begin();
    std::advance(pick, std::uniform_int_distribution<size_t>(0, stored.size() - 1)(rng));
    auto [g, n] = pick->first;
    LabeledTensor fresh = b.q.F(g, n);
    std::set<IndexList> keys;
    for (auto& k : pick->second.sorted_keys()) keys.insert(k);
    for (auto& k : fresh.sorted_keys()) keys.insert(k);
    for (auto& k : keys) {
      Scalar s = pick->second.at(k), f = fresh.at(k);
      if (s.to_json() == f.to_json()) continue;
      out << "MISMATCH " << d.filename().string() << " F_{" << g << "," << n << "} idx " << idx_csv(b.q, k)
          << ": stored " << s.str() << ", computed " << f.str() << "\n";
      ++problems;
    }
  }
  if (problems) return 1;
  out << "OK\n";
  return 0;
}

int cmd_cache_clear(const Globals& gl, std::ostream& out) {
  auto dirs = curve_dirs(gl.cache);
  for (auto& d : dirs) fs::remove_all(d);
  out << "removed " << dirs.size() << (dirs.size() == 1 ? " curve" : " curves") << "\n";
  return 0;
}

int cmd_curves(const Globals& gl, std::ostream& out) {
  if (gl.format == "json") {
    json j = json::array();
    for (auto& p : presets()) j.push_back({{"name", p.name}, {"options", p.options}, {"summary", p.summary}});
    out << j.dump(2) << "\n";
    return 0;
  }
  for (auto& p : presets()) {
    std::string opts;
    for (auto& o : p.options) opts += (opts.empty() ? "" : " ") + ("--" + o);
    out << p.name << std::string(p.name.size() < 16 ? 16 - p.name.size() : 1, ' ') << opts
        << std::string(opts.size() < 22 ? 22 - opts.size() : 1, ' ') << p.summary << "\n";
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Topological recursion coefficients for spectral curves", "toprec"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals gl;
  app.add_option("--cache", gl.cache, "Cache directory")->capture_default_str();
  app.add_option("--precision", gl.precision, "Working precision in bits for numeric curves")
      ->capture_default_str()
      ->check(CLI::Range(64u, 8192u));
  app.add_option("--threads", gl.threads, "Engine threads")->capture_default_str()->check(CLI::Range(1u, 256u));
  app.add_option("--format", gl.format, "Output format")->capture_default_str()->check(
      CLI::IsMember({"json", "csv", "table"}));

  ComputeArgs ca;
  auto* compute = app.add_subcommand("compute", "Compute F_{g,n} tables");
  add_curve_options(compute, ca.curve);
  compute->add_option("--g", ca.g, "Genus");
  compute->add_option("--n", ca.n, "Number of points");
  compute->add_option("--level", ca.level, "All stable (g,n) with 2g-2+n up to this level")->excludes("--g")->excludes(
      "--n");
  compute->add_option("--method", ca.method, "Recursion form")->check(CLI::IsMember({"default", "abcd", "general"}));
  compute->add_option("--decimal", ca.decimal, "Print values as decimals with this many digits");
  compute->add_option("--cap", ca.cap, "Maximum generated product entries per (g,n)")->capture_default_str();
  compute->add_flag("--no-cache", ca.no_cache, "Do not read or write the cache");

  OmegaArgs oa;
  auto* omega = app.add_subcommand("omega", "Evaluate omega_{g,n} at points in the curve coordinate");
  add_curve_options(omega, oa.curve);
  omega->add_option("--g", oa.g, "Genus")->required();
  omega->add_option("--n", oa.n, "Number of points")->required();
  omega->add_option("--at", oa.at, "Points, comma separated (newton curves: x@y)")->required()->delimiter(',');
  omega->add_option("--decimal", oa.decimal, "Print the value as a decimal with this many digits");
  omega->add_flag("--no-cache", oa.no_cache, "Do not read or write the cache");

  auto* cache = app.add_subcommand("cache", "Inspect the cache");
  cache->require_subcommand(1);
  auto* list = cache->add_subcommand("list", "List cached curves");
  auto* verify = cache->add_subcommand("verify", "Re-read every tensor and recompute one cell per curve");
  std::optional<unsigned> seed;
  verify->add_option("--seed", seed, "Seed for the recomputed cell");
  auto* clear = cache->add_subcommand("clear", "Remove cached curves");

  auto* curves = app.add_subcommand("curves", "List curve presets");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    PrecisionScope ps(gl.precision);
    if (*compute) return cmd_compute(gl, ca, out);
    if (*omega) return cmd_omega(gl, oa, out);
    if (*list) return cmd_cache_list(gl, out);
    if (*verify) return cmd_cache_verify(gl, seed, out);
    if (*clear) return cmd_cache_clear(gl, out);
    if (*curves) return cmd_curves(gl, out);
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const PoleError& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const EngineError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const TensorError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ScalarError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace toprec::cli
