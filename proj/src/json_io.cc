//
// Copyright 2026 The Shuffle Privacy Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "shuffle_privacy/json_io.h"

#include <algorithm>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/string_view.h"
#include "shuffle_privacy/status_macros.h"

namespace shuffle_privacy {
namespace {

absl::Status ParseError(absl::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat("ParseError: ", what));
}

// Typed field access with ParseError on a missing or mistyped key.
template <typename T>
absl::StatusOr<T> Field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    return ParseError(absl::StrCat("missing field '", key, "'"));
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    return ParseError(absl::StrCat("field '", key, "': ", e.what()));
  }
}

template <typename T>
absl::StatusOr<T> FieldOr(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return Field<T>(j, key);
}

}  // namespace

absl::StatusOr<Json> ParseJson(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    const size_t offset = std::min<size_t>(e.byte == 0 ? 0 : e.byte - 1,
                                           text.size());
    int line = 1;
    size_t line_start = 0;
    for (size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        line_start = i + 1;
      }
    }
    return ParseError(absl::StrCat("line ", line, ", column ",
                                   offset - line_start + 1, ": ", e.what()));
  }
}

absl::StatusOr<Channel> ChannelFromJson(const Json& j) {
  SP_ASSIGN_OR_RETURN(int d, Field<int>(j, "d"));
  SP_ASSIGN_OR_RETURN(auto rows,
                      Field<std::vector<std::vector<double>>>(j, "rows"));
  SP_ASSIGN_OR_RETURN(auto outputs, FieldOr<std::vector<std::string>>(
                                        j, "outputs", {}));
  if (static_cast<int>(rows.size()) != d) {
    return absl::InvalidArgumentError(absl::StrCat(
        "ShapeMismatch: d = ", d, " but ", rows.size(), " rows given"));
  }
  return ValidateChannel(d, std::move(outputs), rows);
}

Json ChannelToJson(const Channel& ch) {
  Json j;
  j["d"] = ch.d();
  j["outputs"] = ch.outputs();
  j["rows"] = ch.Rows();
  return j;
}

absl::StatusOr<LrLaw> LrLawFromJson(const Json& j) {
  SP_ASSIGN_OR_RETURN(Json atoms_json, Field<Json>(j, "atoms"));
  if (!atoms_json.is_array()) return ParseError("'atoms' must be an array");
  std::vector<LrAtom> atoms;
  for (const Json& a : atoms_json) {
    LrAtom atom;
    SP_ASSIGN_OR_RETURN(atom.ratio, Field<double>(a, "r"));
    SP_ASSIGN_OR_RETURN(atom.mass, Field<double>(a, "p"));
    SP_ASSIGN_OR_RETURN(atom.levels,
                        FieldOr<std::vector<int>>(a, "levels", {}));
    atoms.push_back(std::move(atom));
  }
  std::optional<double> eps0;
  if (j.contains("eps0")) {
    SP_ASSIGN_OR_RETURN(double e, Field<double>(j, "eps0"));
    eps0 = e;
  }
  return MakeLrLaw(std::move(atoms), eps0);
}

Json LrLawToJson(const LrLaw& law) {
  Json atoms = Json::array();
  for (const LrAtom& a : law.atoms) {
    atoms.push_back({{"r", a.ratio}, {"p", a.mass}, {"levels", a.levels}});
  }
  return {{"atoms", atoms}, {"eps0", law.epsilon0}};
}

absl::StatusOr<MechanismSpec> MechanismSpecFromJson(const Json& j) {
  SP_ASSIGN_OR_RETURN(std::string kind, Field<std::string>(j, "kind"));
  SP_ASSIGN_OR_RETURN(int d, Field<int>(j, "d"));
  if (kind == "grr") {
    SP_ASSIGN_OR_RETURN(double lambda, Field<double>(j, "lambda"));
    return GrrParams{d, lambda};
  }
  if (kind == "half_block") {
    SP_ASSIGN_OR_RETURN(double lambda, Field<double>(j, "lambda"));
    return HalfBlockParams{d, lambda};
  }
  if (kind == "aug_grr") {
    SP_ASSIGN_OR_RETURN(double p, Field<double>(j, "p"));
    SP_ASSIGN_OR_RETURN(double lambda, Field<double>(j, "lambda"));
    return AugGrrParams{d, p, lambda};
  }
  if (kind == "subset") {
    SP_ASSIGN_OR_RETURN(int s, Field<int>(j, "s"));
    SP_ASSIGN_OR_RETURN(double lambda, Field<double>(j, "lambda"));
    return SubsetParams{d, s, lambda};
  }
  if (kind == "interp") {
    SP_ASSIGN_OR_RETURN(int m, Field<int>(j, "m"));
    SP_ASSIGN_OR_RETURN(double theta, Field<double>(j, "theta"));
    SP_ASSIGN_OR_RETURN(double lambda, Field<double>(j, "lambda"));
    return InterpParams{d, m, theta, lambda};
  }
  if (kind == "mixture") {
    MixtureSpec spec;
    spec.d = d;
    SP_ASSIGN_OR_RETURN(Json blocks, Field<Json>(j, "blocks"));
    if (!blocks.is_array()) return ParseError("'blocks' must be an array");
    for (const Json& b : blocks) {
      MixtureBlock block;
      SP_ASSIGN_OR_RETURN(block.p, Field<double>(b, "p"));
      SP_ASSIGN_OR_RETURN(block.lambda, Field<double>(b, "lambda"));
      spec.blocks.push_back(block);
    }
    SP_ASSIGN_OR_RETURN(spec.null_masses,
                        FieldOr<std::vector<double>>(j, "null_masses", {}));
    return spec;
  }
  if (kind == "orbit") {
    EquivariantChannel ec;
    ec.d = d;
    SP_ASSIGN_OR_RETURN(Json orbits, Field<Json>(j, "orbits"));
    if (!orbits.is_array()) return ParseError("'orbits' must be an array");
    for (const Json& o : orbits) {
      OrbitTemplate t;
      SP_ASSIGN_OR_RETURN(t.mass, Field<double>(o, "mass"));
      SP_ASSIGN_OR_RETURN(t.a, Field<std::vector<double>>(o, "a"));
      ec.orbits.push_back(std::move(t));
    }
    SP_ASSIGN_OR_RETURN(ec.null_mass, FieldOr<double>(j, "null_mass", 0.0));
    return ec;
  }
  return ParseError(absl::StrCat("unknown mechanism kind '", kind, "'"));
}

Json MechanismSpecToJson(const MechanismSpec& spec) {
  Json j;
  j["kind"] = MechanismKind(spec);
  j["d"] = MechanismD(spec);
  std::visit(
      [&j](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GrrParams> ||
                      std::is_same_v<T, HalfBlockParams>) {
          j["lambda"] = s.lambda;
        } else if constexpr (std::is_same_v<T, AugGrrParams>) {
          j["p"] = s.p;
          j["lambda"] = s.lambda;
        } else if constexpr (std::is_same_v<T, SubsetParams>) {
          j["s"] = s.s;
          j["lambda"] = s.lambda;
        } else if constexpr (std::is_same_v<T, InterpParams>) {
          j["m"] = s.m;
          j["theta"] = s.theta;
          j["lambda"] = s.lambda;
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          Json blocks = Json::array();
          for (const MixtureBlock& b : s.blocks) {
            blocks.push_back({{"p", b.p}, {"lambda", b.lambda}});
          }
          j["blocks"] = blocks;
          j["null_masses"] = s.null_masses;
        } else {
          Json orbits = Json::array();
          for (const OrbitTemplate& t : s.orbits) {
            orbits.push_back({{"mass", t.mass}, {"a", t.a}});
          }
          j["orbits"] = orbits;
          j["null_mass"] = s.null_mass;
        }
      },
      spec);
  return j;
}

Json CurveToJson(const PrivacyCurve& curve) {
  Json points = Json::array();
  for (const CurvePoint& p : curve.points) {
    points.push_back({{"eps", p.eps},
                      {"delta_fwd", p.delta_fwd},
                      {"delta_rev", p.delta_rev},
                      {"delta_two_sided", p.two_sided()}});
  }
  return {{"n", curve.n},
          {"provenance", ProvenanceName(curve.provenance)},
          {"points", points}};
}

Json SimResultToJson(const SimResult& r) {
  return {{"mean_risk", r.mean_risk},   {"std_error", r.std_error},
          {"reps", r.reps},             {"seed", r.seed},
          {"closed_form", r.closed_form}, {"z_score", r.z_score}};
}

Json BoundsReportToJson(const CrBound& cr, const AssouadResult& assouad) {
  return {{"cr", cr.formula},
          {"cr_trace", cr.trace},
          {"assouad", assouad.bound},
          {"regime_ok", assouad.regime_ok},
          {"chi_star", cr.chi_star}};
}

}  // namespace shuffle_privacy
