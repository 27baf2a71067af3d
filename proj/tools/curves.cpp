#include "curves.hpp"

#include "toprec/elliptic.hpp"
#include "toprec/gue.hpp"
#include "toprec/kdv.hpp"
#include "toprec/rs.hpp"

#include <json.hpp>

#include <algorithm>
#include <regex>

namespace toprec::cli {

namespace {

std::optional<Rational> try_rational(const std::string& s) {
  static const std::regex re(R"(\s*[-+]?\d+(/\d+)?\s*)");
  if (!std::regex_match(s, re)) return std::nullopt;
  std::string t;
  for (char c : s)
    if (c != ' ' && c != '+') t += c;
  Rational q;
  if (q.set_str(t, 10) != 0 || q.get_den() == 0) return std::nullopt;
  q.canonicalize();
  return q;
}

Rational rational_arg(const std::string& name, const std::string& text) {
  auto q = try_rational(text);
  if (!q) throw EngineError("--" + name + " expects a rational, got '" + text + "'");
  return *q;
}

int int_arg(const std::string& name, const std::string& text) {
  auto q = try_rational(text);
  if (!q || q->get_den() != 1 || !q->get_num().fits_sint_p())
    throw EngineError("--" + name + " expects an integer, got '" + text + "'");
  return static_cast<int>(q->get_num().get_si());
}

}  // namespace

std::string CurveSpec::to_json() const {
  nlohmann::json j;
  j["curve"] = curve;
  j["args"] = args;
  j["bits"] = bits;
  return j.dump();
}

CurveSpec CurveSpec::from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    CurveSpec s;
    s.curve = j.at("curve").get<std::string>();
    s.args = j.at("args").get<std::map<std::string, std::string>>();
    s.bits = j.at("bits").get<unsigned>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw EngineError(std::string("bad curve job file: ") + e.what());
  }
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> p{
      {"airy", {}, "x = z^2/2, y = z; Witten-Kontsevich numbers"},
      {"kdv", {"times"}, "KdV times, e.g. --times 3:-2,5:1/3"},
      {"weil-petersson", {}, "y = sin(2 pi z) / (2 pi); Weil-Petersson volumes"},
      {"painleve", {"u"}, "Painleve I times at u (default 1)"},
      {"minimal-model", {"p", "times"}, "(p,2) minimal model with the given times"},
      {"gue", {"potential"}, "one-cut model x = z + 1/z, y = sum u_j z^-j (default 1:1)"},
      {"weierstrass", {"tau", "G2"}, "x = wp(z) on C/(Z + tau Z) (defaults tau 2i, G2 0)"},
      {"legendre", {"tau", "G2"}, "x = sn(4Kw) on C/(Z + tau/2 Z) (defaults tau 2i, G2 0)"},
      {"rs", {"r", "s"}, "x = z^r / r, y = z^s"},
      {"newton", {"poly", "t", "kmax"}, "plane curve P(x, y) = 0, e.g. --poly \"x^3+y^3+t*x*y+1\" --t 1"},
  };
  return p;
}

BuiltCurve build(const CurveSpec& spec) {
  auto it = std::find_if(presets().begin(), presets().end(), [&](const Preset& p) { return p.name == spec.curve; });
  if (it == presets().end()) throw EngineError("unknown curve '" + spec.curve + "' (see `toprec curves`)");
  for (auto& [k, v] : spec.args)
    if (std::find(it->options.begin(), it->options.end(), k) == it->options.end())
      throw EngineError("option --" + k + " does not apply to curve " + spec.curve);
  auto arg = [&](const std::string& k, const std::string& dflt) {
    auto a = spec.args.find(k);
    return a == spec.args.end() ? dflt : a->second;
  };
  auto required = [&](const std::string& k) {
    auto a = spec.args.find(k);
    if (a == spec.args.end()) throw EngineError("curve " + spec.curve + " needs --" + k);
    return a->second;
  };

  BuiltCurve out;
  const std::string& c = spec.curve;
  if (c == "airy") {
    out.q = kdv::make_structure(kdv::airy());
  } else if (c == "kdv") {
    out.q = kdv::make_structure(kdv::parse_times(required("times")));
  } else if (c == "weil-petersson") {
    out.q = kdv::make_structure(kdv::weil_petersson());
  } else if (c == "painleve") {
    out.q = kdv::make_structure(kdv::painleve1(Scalar(rational_arg("u", arg("u", "1")))));
  } else if (c == "minimal-model") {
    auto t = kdv::parse_times(arg("times", ""));
    out.q = kdv::make_structure(kdv::minimal_model(int_arg("p", required("p")), t.table));
  } else if (c == "gue") {
    out.q = gue::make_structure(gue::parse_potential(arg("potential", "1:1")));
  } else if (c == "weierstrass" || c == "legendre") {
    Complex tau = elliptic::parse_complex(arg("tau", "2i"), spec.bits);
    Complex G2 = elliptic::parse_complex(arg("G2", "0"), spec.bits);
    auto curve = c == "weierstrass" ? elliptic::weierstrass_curve(tau, G2, spec.bits)
                                    : elliptic::legendre_curve(tau, G2, spec.bits);
    out.q = elliptic::make_structure(curve);
  } else if (c == "rs") {
    out.q = rs::make_structure(rs::make_curve(int_arg("r", required("r")), int_arg("s", required("s"))));
  } else if (c == "newton") {
    auto P = newton::PlanePolynomial::parse(required("poly"));
    if (P.has_param()) P = P.specialize(rational_arg("t", required("t")));
    else if (spec.args.count("t")) throw EngineError("--t given but the polynomial has no parameter t");
    newton::CurveOptions o;
    o.bits = spec.bits;
    o.kmax = int_arg("kmax", arg("kmax", "6"));
    out.newton = std::make_shared<newton::Curve>(P, o);
    out.q = newton::make_structure(out.newton);
  }
  return out;
}

Scalar parse_point(const std::string& text, unsigned bits) {
  if (auto q = try_rational(text)) return Scalar(*q);
  return Scalar::complex(elliptic::parse_complex(text, bits), bits);
}

}  // namespace toprec::cli
