#pragma once

#include "toprec/engine.hpp"
#include "toprec/newton.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace toprec::cli {

// A curve as named on the command line. `args` holds only the options that
// were given; defaults are filled in by build().
struct CurveSpec {
  std::string curve;
  std::map<std::string, std::string> args;
  unsigned bits = 256;

  std::string to_json() const;
  static CurveSpec from_json(const std::string& text);
};

struct Preset {
  std::string name;
  std::vector<std::string> options;  // option names without dashes
  std::string summary;
};
const std::vector<Preset>& presets();

struct BuiltCurve {
  AiryStructure q;
  std::shared_ptr<const newton::Curve> newton;  // only for newton curves
};

// Throws EngineError for unknown curves, stray options or bad values.
BuiltCurve build(const CurveSpec& spec);

// "3", "-1/2", "0.25", "2i", "0.5-1.5i". Rationals stay exact.
Scalar parse_point(const std::string& text, unsigned bits);

}  // namespace toprec::cli
