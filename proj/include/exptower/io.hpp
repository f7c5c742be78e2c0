#pragma once

// Canonical JSON artifacts (sorted keys, 17 significant digits), PPM images
// and CSV tables.

#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "exptower/dynamics.hpp"
#include "exptower/inverse_branches.hpp"
#include "exptower/poincare.hpp"
#include "exptower/target_set.hpp"
#include "exptower/tower.hpp"

namespace exptower::io {

using Json = nlohmann::json;

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "%.17g" with a trailing ".0" for integral values; non-finite values become null.
std::string format_double(double v);
/// Sorted keys, two-space indent, numeric arrays on one line, trailing newline.
std::string canonical_dump(const Json& j);

Json to_json(Complex z);
Complex complex_from_json(const Json& j);
Json to_json(const std::vector<Complex>& v);
std::vector<Complex> complex_vector_from_json(const Json& j);

Json to_json(const TargetSetSpec& spec);
TargetSetSpec target_from_json(const Json& j);
Json to_json(const LambdaSolution& sol);
LambdaSolution solution_from_json(const Json& j);
Json to_json(const TowerModel& model);
TowerModel model_from_json(const Json& j);
Json to_json(const BuildRules& rules);
BuildRules rules_from_json(const Json& j);
Json to_json(const TowerBuildDiagnostics& d);
TowerBuildDiagnostics diagnostics_from_json(const Json& j);

Json to_json(const SingularSetReport& r);
Json to_json(const OrbitRecord& r);
Json to_json(const Example2Result& r);
Json to_json(const Example3Result& r);
Json to_json(const PoincareModel& m);
Json to_json(const ContractionReport& r);

inline constexpr int kArtifactVersion = 1;

struct TowerArtifact {
  TargetSetSpec target;
  std::uint64_t seed = 0;
  DenseSequence sequence;
  LambdaSolution solution;
  BuildRules rules;
  TowerModel model;
  TowerBuildDiagnostics diagnostics;
  std::optional<Json> certificate;
};

Json to_json(const TowerArtifact& a);
/// Throws LoadError on a malformed or inconsistent document.
TowerArtifact artifact_from_json(const Json& j);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);
Json parse_json(const std::string& text);

TowerArtifact load_artifact(const std::string& path);
void save_artifact(const std::string& path, const TowerArtifact& a);

/// RGB for an escape value; bounded is black and uncertified is magenta.
struct Rgb {
  unsigned char r, g, b;
};
Rgb palette(int value, int max_iter);

/// Binary P6 image of a row-major value grid.
std::string encode_ppm(std::size_t width, std::size_t height, const std::vector<int>& values, int max_iter);

/// probe,family,n,gap,bound,pass
std::string report_csv(const SingularSetReport& r);
/// x,y,status,time
std::string grid_csv(const EscapeGrid& g);
/// re_lambda,im_lambda,escaped,time
std::string scan_csv(const BoundednessMap& m);

}  // namespace exptower::io
