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

// shuffle_priv: command-line front end for the shuffle_privacy library.
//
//   shuffle_priv analyze  --mech grr --d 10 --lambda 3
//   shuffle_priv curve    --mech half_block --d 4 --lambda 2.718281828 --n 100
//   shuffle_priv frontier --d 10 --c-grid 0.01:0.444:50
//   shuffle_priv reproduce [--with-sim --reps 100000 --n 100 --seed 0]
//   shuffle_priv simulate risk --mech grr --d 10 --lambda 3 --n 100
//   shuffle_priv bounds   --mech grr --d 4 --lambda 2 --n 1000
//
// Every command writes CSV (default) or JSON to --out ("-" is stdout).

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "shuffle_privacy/channel.h"
#include "shuffle_privacy/design_frontier.h"
#include "shuffle_privacy/estimation_bounds.h"
#include "shuffle_privacy/json_io.h"
#include "shuffle_privacy/mechanisms.h"
#include "shuffle_privacy/privacy_curve.h"
#include "shuffle_privacy/shuffle_sim.h"
#include "shuffle_privacy/status_macros.h"

namespace shuffle_privacy {
namespace {

struct MechOptions {
  std::string mech;
  std::string spec;     // path, "-", or inline JSON
  std::string channel;  // path, "-", or inline JSON
  int d = 0;
  double lambda = 0.0;
  double p = 1.0;
  int s = 1;
  int m = 0;
  double theta = 1.0;
};

struct CommonOptions {
  std::string out = "-";
  std::string format = "csv";
  uint64_t seed = 0;
};

struct ResolvedChannel {
  Channel ch;
  std::optional<MechanismSpec> spec;
};

absl::Status AssertionFailure(const std::string& what) {
  return absl::InternalError(absl::StrCat("AssertionFailure: ", what));
}

std::string Num(double x) { return absl::StrFormat("%.17g", x); }

absl::StatusOr<std::string> ReadSource(const std::string& source) {
  if (!source.empty() && (source[0] == '{' || source[0] == '[')) return source;
  std::ostringstream buf;
  if (source == "-") {
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(source);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("IoError: cannot read ", source));
  }
  buf << in.rdbuf();
  return buf.str();
}

// Writes to a sibling temp file and renames it into place.
absl::Status WriteOutput(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return absl::OkStatus();
  }
  const std::string tmp = absl::StrCat(path, ".tmp.", ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      return absl::PermissionDeniedError(
          absl::StrCat("IoError: cannot write ", tmp));
    }
    out << text;
    if (!out.flush()) {
      return absl::DataLossError(absl::StrCat("IoError: short write ", tmp));
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    return absl::PermissionDeniedError(
        absl::StrCat("IoError: cannot rename onto ", path));
  }
  return absl::OkStatus();
}

// A table is an ordered list of flat JSON objects; CSV and JSON renderings
// share the same values.
std::string CsvCell(const Json& v) {
  if (v.is_number_float()) return Num(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

std::string RenderCsv(const std::vector<std::string>& columns,
                      const std::vector<Json>& rows,
                      const std::vector<std::string>& preamble = {}) {
  std::string out;
  for (const std::string& line : preamble) absl::StrAppend(&out, "# ", line, "\n");
  absl::StrAppend(&out, absl::StrJoin(columns, ","), "\n");
  for (const Json& row : rows) {
    std::vector<std::string> cells;
    for (const std::string& c : columns) {
      cells.push_back(row.contains(c) ? CsvCell(row.at(c)) : "");
    }
    absl::StrAppend(&out, absl::StrJoin(cells, ","), "\n");
  }
  return out;
}

std::string RenderJson(const Json& j) { return j.dump(2) + "\n"; }

void AppendLeaves(const std::string& path, const Json& v,
                  std::vector<std::string>* out) {
  if (v.is_object()) {
    for (const auto& [k, child] : v.items()) {
      AppendLeaves(path + "." + k, child, out);
    }
  } else if (v.is_array()) {
    for (size_t i = 0; i < v.size(); ++i) {
      AppendLeaves(absl::StrCat(path, "[", i, "]"), v[i], out);
    }
  } else {
    out->push_back(absl::StrCat(path, " = ", CsvCell(v)));
  }
}

// Document-level fields of the JSON rendering, as "# key = value" CSV
// preamble lines.
std::vector<std::string> MetaPreamble(const Json& doc,
                                      const std::vector<std::string>& keys) {
  std::vector<std::string> out;
  for (const std::string& k : keys) {
    if (doc.contains(k)) AppendLeaves(k, doc.at(k), &out);
  }
  return out;
}

absl::Status Emit(const CommonOptions& common,
                  const std::vector<std::string>& columns,
                  const std::vector<Json>& rows, Json json_doc,
                  const std::vector<std::string>& preamble = {}) {
  if (common.format == "json") {
    return WriteOutput(common.out, RenderJson(json_doc));
  }
  return WriteOutput(common.out, RenderCsv(columns, rows, preamble));
}

absl::StatusOr<MechanismSpec> SpecFromFlags(const MechOptions& o) {
  if (o.d == 0) {
    return absl::InvalidArgumentError("BadParams: --d is required");
  }
  if (o.mech == "grr") return GrrParams{o.d, o.lambda};
  if (o.mech == "half_block") return HalfBlockParams{o.d, o.lambda};
  if (o.mech == "aug_grr") return AugGrrParams{o.d, o.p, o.lambda};
  if (o.mech == "subset") return SubsetParams{o.d, o.s, o.lambda};
  if (o.mech == "interp") return InterpParams{o.d, o.m, o.theta, o.lambda};
  return absl::InvalidArgumentError(absl::StrCat(
      "BadParams: --mech ", o.mech,
      " needs a JSON spec (use --spec for mixture and orbit)"));
}

absl::StatusOr<ResolvedChannel> Resolve(const MechOptions& o) {
  if (!o.channel.empty()) {
    SP_ASSIGN_OR_RETURN(std::string text, ReadSource(o.channel));
    SP_ASSIGN_OR_RETURN(Json j, ParseJson(text));
    SP_ASSIGN_OR_RETURN(Channel ch, ChannelFromJson(j));
    return ResolvedChannel{std::move(ch), std::nullopt};
  }
  MechanismSpec spec;
  if (!o.spec.empty()) {
    SP_ASSIGN_OR_RETURN(std::string text, ReadSource(o.spec));
    SP_ASSIGN_OR_RETURN(Json j, ParseJson(text));
    SP_ASSIGN_OR_RETURN(spec, MechanismSpecFromJson(j));
  } else if (!o.mech.empty()) {
    SP_ASSIGN_OR_RETURN(spec, SpecFromFlags(o));
  } else {
    return absl::InvalidArgumentError(
        "BadParams: one of --mech, --spec or --channel is required");
  }
  SP_ASSIGN_OR_RETURN(Channel ch, BuildChannel(spec));
  return ResolvedChannel{std::move(ch), spec};
}

// Opposite inputs for half-block channels, the worst pair otherwise.
std::pair<int, int> DefaultPair(const ResolvedChannel& rc) {
  if (rc.spec.has_value() && std::holds_alternative<HalfBlockParams>(*rc.spec)) {
    return {0, OppositeInput(rc.ch.d(), 0)};
  }
  const WorstPair wp = FindWorstPair(rc.ch);
  return {wp.a, wp.b};
}

void AddMechOptions(CLI::App* app, MechOptions* o) {
  app->add_option("--mech", o->mech,
                  "grr | half_block | aug_grr | subset | interp");
  app->add_option("--spec", o->spec, "mechanism spec JSON (path, - or inline)");
  app->add_option("--channel", o->channel, "channel JSON (path, - or inline)");
  app->add_option("--d", o->d, "input alphabet size");
  app->add_option("--lambda", o->lambda, "likelihood-ratio level");
  app->add_option("--p", o->p, "informative mass (aug_grr)");
  app->add_option("--s", o->s, "subset size (subset)");
  app->add_option("--m", o->m, "informative inputs (interp)");
  app->add_option("--theta", o->theta, "interpolation weight (interp)");
}

void AddCommonOptions(CLI::App* app, CommonOptions* c) {
  app->add_option("--out,-o", c->out, "output path, - for stdout");
  app->add_option("--format", c->format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--seed", c->seed, "random seed (default 0)");
}

// "a:b:k" is k evenly spaced points from a to b; otherwise a comma list.
absl::StatusOr<std::vector<double>> ParseGrid(const std::string& text) {
  std::vector<std::string> parts = absl::StrSplit(text, ':');
  std::vector<double> out;
  if (parts.size() == 3) {
    double lo = 0.0;
    double hi = 0.0;
    int k = 0;
    if (!absl::SimpleAtod(parts[0], &lo) || !absl::SimpleAtod(parts[1], &hi) ||
        !absl::SimpleAtoi(parts[2], &k) || k < 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("ParseError: bad grid '", text, "'"));
    }
    for (int i = 0; i < k; ++i) {
      out.push_back(k == 1 ? lo : lo + (hi - lo) * i / (k - 1));
    }
    return out;
  }
  for (absl::string_view part : absl::StrSplit(text, ',')) {
    double v = 0.0;
    if (!absl::SimpleAtod(part, &v)) {
      return absl::InvalidArgumentError(
          absl::StrCat("ParseError: bad number '", part, "' in grid"));
    }
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
  int64_t n = 1000;
  double rho = 0.0;
};

absl::StatusOr<std::pair<std::optional<CrBound>, AssouadResult>> Bounds(
    const Channel& ch, int64_t n, double rho, std::optional<double> delta) {
  std::optional<CrBound> cr;
  absl::StatusOr<CrBound> cr_or = CramerRaoBound(ch, n, rho);
  if (cr_or.ok()) {
    cr = *cr_or;
  } else if (!absl::IsFailedPrecondition(cr_or.status())) {
    return cr_or.status();
  }
  SP_ASSIGN_OR_RETURN(AssouadResult assouad, AssouadBound(ch, n, delta));
  return std::make_pair(cr, assouad);
}

double DefaultRho(int d) { return 1.0 / (2.0 * d); }

absl::Status RunAnalyze(const MechOptions& mo, const CommonOptions& common,
                        const AnalyzeOptions& ao) {
  SP_ASSIGN_OR_RETURN(ResolvedChannel rc, Resolve(mo));
  const Channel& ch = rc.ch;
  const int d = ch.d();
  const double eps0 = LdpParameter(ch);
  const double lambda = std::exp(eps0);
  const WorstPair wp = FindWorstPair(ch);
  const std::vector<double> chi2 = PairwiseChi2Matrix(ch);

  Json doc;
  if (rc.spec.has_value()) doc["mechanism"] = MechanismSpecToJson(*rc.spec);
  doc["d"] = d;
  doc["num_outputs"] = ch.num_outputs();
  doc["eps0"] = eps0;
  doc["chi_star"] = wp.chi2;
  doc["universal_bound"] = (lambda - 1.0) * (lambda - 1.0) / lambda;
  doc["worst_pair"] = {{"a", wp.a}, {"b", wp.b}};
  std::vector<Json> rows;
  rows.push_back({{"quantity", "d"}, {"value", d}});
  rows.push_back({{"quantity", "num_outputs"}, {"value", ch.num_outputs()}});
  rows.push_back({{"quantity", "eps0"}, {"value", eps0}});
  rows.push_back({{"quantity", "chi_star"}, {"value", wp.chi2}});
  rows.push_back(
      {{"quantity", "universal_bound"}, {"value", doc["universal_bound"]}});
  rows.push_back({{"quantity", "worst_pair"}, {"a", wp.a}, {"b", wp.b}});

  Json matrix = Json::array();
  Json pairs = Json::array();
  Json extremal = Json::array();
  for (int a = 0; a < d; ++a) {
    Json row = Json::array();
    for (int b = 0; b < d; ++b) {
      row.push_back(chi2[a * d + b]);
      if (a == b) continue;
      SP_ASSIGN_OR_RETURN(LrLaw law, PairwiseLrLaw(ch, a, b));
      const ExtremalReport ext = IsExtremal(law, lambda);
      pairs.push_back({{"a", a},
                       {"b", b},
                       {"chi2", chi2[a * d + b]},
                       {"extremal", ext.extremal},
                       {"lr_law", LrLawToJson(law)}});
      if (ext.extremal) extremal.push_back({a, b});
      rows.push_back({{"quantity", "chi2"}, {"a", a}, {"b", b},
                      {"value", chi2[a * d + b]}});
      rows.push_back({{"quantity", "extremal"}, {"a", a}, {"b", b},
                      {"value", ext.extremal ? 1 : 0}});
      for (size_t k = 0; k < law.atoms.size(); ++k) {
        rows.push_back({{"quantity", absl::StrCat("lr_atom_ratio_", k)},
                        {"a", a}, {"b", b}, {"value", law.atoms[k].ratio}});
        rows.push_back({{"quantity", absl::StrCat("lr_atom_mass_", k)},
                        {"a", a}, {"b", b}, {"value", law.atoms[k].mass}});
      }
    }
    matrix.push_back(row);
  }
  doc["chi2_matrix"] = matrix;
  doc["extremal_pairs"] = extremal;
  doc["pairs"] = pairs;

  const std::vector<double> uniform(d, 1.0 / d);
  SP_ASSIGN_OR_RETURN(FisherInfo info, ComputeFisherInfo(ch, uniform, ao.n));
  std::vector<double> eig(info.tangent_eigenvalues.data(),
                          info.tangent_eigenvalues.data() +
                              info.tangent_eigenvalues.size());
  doc["n"] = ao.n;
  doc["fisher_uniform_eigenvalues"] = eig;
  doc["fisher_singular"] = info.singular;
  for (size_t k = 0; k < eig.size(); ++k) {
    rows.push_back({{"quantity", "fisher_eigenvalue"},
                    {"a", static_cast<int>(k)}, {"value", eig[k]}});
  }
  const double rho = ao.rho > 0.0 ? ao.rho : DefaultRho(d);
  SP_ASSIGN_OR_RETURN(auto bounds, Bounds(ch, ao.n, rho, std::nullopt));
  const auto& [cr, assouad] = bounds;
  doc["rho"] = rho;
  rows.push_back({{"quantity", "n"}, {"value", ao.n}});
  rows.push_back({{"quantity", "rho"}, {"value", rho}});
  rows.push_back({{"quantity", "fisher_singular"},
                  {"value", info.singular ? 1 : 0}});
  doc["cr"] = cr ? Json(cr->formula) : Json(nullptr);
  doc["cr_trace"] = cr ? Json(cr->trace) : Json(nullptr);
  doc["assouad"] = assouad.bound;
  doc["assouad_regime_ok"] = assouad.regime_ok;
  rows.push_back({{"quantity", "cr"}, {"value", doc["cr"]}});
  rows.push_back({{"quantity", "cr_trace"}, {"value", doc["cr_trace"]}});
  rows.push_back({{"quantity", "assouad"}, {"value", assouad.bound}});
  rows.push_back(
      {{"quantity", "assouad_regime_ok"}, {"value", assouad.regime_ok ? 1 : 0}});
  return Emit(common, {"quantity", "a", "b", "value"}, rows, doc);
}

// ---------------------------------------------------------------- curve

struct CurveOptions {
  int64_t n = 0;
  std::string law;
  std::string eps_grid;
  int a = -1;
  int b = -1;
  bool gdp = false;
  bool oracle = false;
};

absl::Status RunCurve(const MechOptions& mo, const CommonOptions& common,
                      const CurveOptions& co) {
  if (co.n < 1) return absl::InvalidArgumentError("BadN: --n must be >= 1");
  LrLaw law;
  std::optional<ResolvedChannel> rc;
  int a = co.a;
  int b = co.b;
  if (!co.law.empty()) {
    SP_ASSIGN_OR_RETURN(std::string text, ReadSource(co.law));
    SP_ASSIGN_OR_RETURN(Json j, ParseJson(text));
    SP_ASSIGN_OR_RETURN(law, LrLawFromJson(j));
  } else {
    SP_ASSIGN_OR_RETURN(rc, Resolve(mo));
    if (a < 0 || b < 0) std::tie(a, b) = DefaultPair(*rc);
    SP_ASSIGN_OR_RETURN(law, PairwiseLrLaw(rc->ch, a, b));
  }
  std::vector<double> eps;
  if (co.eps_grid.empty()) {
    eps = DefaultEpsGrid(std::exp(law.epsilon0));
  } else {
    SP_ASSIGN_OR_RETURN(eps, ParseGrid(co.eps_grid));
  }
  SP_ASSIGN_OR_RETURN(PrivacyCurve curve, PrivacyCurveExact(law, co.n, eps));

  Json doc = CurveToJson(curve);
  doc["lr_law"] = LrLawToJson(law);
  if (rc.has_value()) doc["pair"] = {a, b};
  std::vector<std::string> columns = {"eps", "delta_fwd", "delta_rev",
                                      "delta_two_sided"};
  std::vector<Json> rows;
  const double mu = GdpScale(law.Chi2(), co.n);
  for (size_t i = 0; i < curve.points.size(); ++i) {
    const CurvePoint& p = curve.points[i];
    Json row = {{"eps", p.eps},
                {"delta_fwd", p.delta_fwd},
                {"delta_rev", p.delta_rev},
                {"delta_two_sided", p.two_sided()}};
    if (co.gdp) {
      double g = 0.0;
      if (mu > 0.0) {
        SP_ASSIGN_OR_RETURN(g, GdpDelta(mu, p.eps));
      }
      row["gdp"] = g;
      doc["points"][i]["gdp"] = g;
    }
    rows.push_back(std::move(row));
  }
  if (co.gdp) {
    columns.push_back("gdp");
    doc["gdp_mu"] = mu;
  }
  if (co.oracle) {
    if (!rc.has_value()) {
      return absl::InvalidArgumentError(
          "BadParams: --oracle needs a channel, not a bare law");
    }
    SP_ASSIGN_OR_RETURN(OracleReport report,
                        SufficiencyOracle(rc->ch, a, b, co.n, eps));
    doc["oracle"] = {{"histograms", report.histograms},
                     {"max_abs_diff", report.max_abs_diff},
                     {"equal", report.equal}};
    if (!report.equal) {
      return AssertionFailure(absl::StrCat(
          "full-histogram and quotient privacy curves differ by ",
          Num(report.max_abs_diff),
          " (the likelihood-ratio quotient must be sufficient)"));
    }
  }
  return Emit(common, columns, rows, doc,
              MetaPreamble(doc, {"n", "provenance", "pair", "gdp_mu", "lr_law",
                                 "oracle"}));
}

// ---------------------------------------------------------------- frontier

struct FrontierOptions {
  int d = 0;
  std::optional<double> c;
  std::string c_grid;
  bool exploratory = false;
  bool subset_table = false;
};

absl::Status RunFrontier(const CommonOptions& common,
                         const FrontierOptions& fo) {
  SP_ASSIGN_OR_RETURN(double c_star, CStar(fo.d));
  if (fo.exploratory || fo.subset_table) {
    if (!fo.c.has_value()) {
      return absl::InvalidArgumentError("BadParams: --c is required");
    }
  }
  if (fo.exploratory) {
    SP_ASSIGN_OR_RETURN(ExploratoryScan scan, ExploreHighBudget(fo.d, *fo.c));
    std::vector<Json> rows;
    Json cands = Json::array();
    for (const ExploratoryCandidate& cand : scan.best) {
      std::vector<std::string> levels;
      for (double l : cand.levels) levels.push_back(Num(l));
      Json row = {{"shape", cand.shape},
                  {"levels", absl::StrJoin(levels, ";")},
                  {"multiplicities", absl::StrJoin(cand.multiplicities, ";")},
                  {"orbit_budget", cand.orbit_budget},
                  {"orbit_signal", cand.orbit_signal},
                  {"signal_at_budget", cand.signal_at_budget},
                  {"grr_signal", scan.grr_signal}};
      rows.push_back(row);
      row["levels"] = cand.levels;
      row["multiplicities"] = cand.multiplicities;
      cands.push_back(row);
    }
    Json doc = {{"banner", scan.banner},
                {"d", fo.d},
                {"C", scan.budget},
                {"C_star", c_star},
                {"grr_signal", scan.grr_signal},
                {"candidates", cands}};
    return Emit(common,
                {"shape", "levels", "multiplicities", "orbit_budget",
                 "orbit_signal", "signal_at_budget", "grr_signal"},
                rows, doc, [&] {
                  std::vector<std::string> pre = {scan.banner};
                  for (std::string& line :
                       MetaPreamble(doc, {"d", "C", "C_star", "grr_signal"})) {
                    pre.push_back(std::move(line));
                  }
                  return pre;
                }());
  }
  if (fo.subset_table) {
    SP_ASSIGN_OR_RETURN(SsMatchedTable table, SsMatchedRisk(fo.d, *fo.c));
    std::vector<Json> rows;
    for (const SsMatchedRow& r : table.rows) {
      rows.push_back({{"s", r.s},
                      {"lambda_s", r.lambda_s},
                      {"matched_risk_times_n", r.matched_risk_times_n}});
    }
    Json doc = {{"d", fo.d},
                {"C", *fo.c},
                {"strictly_increasing", table.strictly_increasing},
                {"rows", rows}};
    return Emit(common, {"s", "lambda_s", "matched_risk_times_n"}, rows, doc,
                MetaPreamble(doc, {"d", "C", "strictly_increasing"}));
  }

  std::vector<double> grid;
  if (fo.c.has_value()) {
    grid.push_back(*fo.c);
  } else if (!fo.c_grid.empty()) {
    SP_ASSIGN_OR_RETURN(grid, ParseGrid(fo.c_grid));
  } else {
    return absl::InvalidArgumentError("BadParams: --c or --c-grid is required");
  }
  std::vector<Json> rows;
  for (double c : grid) {
    SP_ASSIGN_OR_RETURN(FrontierPoint pt, SOpt(fo.d, c));
    SP_ASSIGN_OR_RETURN(OptRisk risk, ComputeOptRisk(fo.d, c));
    rows.push_back({{"C", c},
                    {"S_opt", pt.S},
                    {"risk_opt_times_n", pt.risk_times_n},
                    {"risk_grr_times_n", risk.r_grr_times_n},
                    {"ratio", risk.ratio},
                    {"mech_kind", pt.mech_kind},
                    {"p", pt.p},
                    {"lambda", pt.lambda}});
  }
  Json doc = {{"d", fo.d}, {"C_star", c_star}, {"rows", rows}};
  return Emit(common,
              {"C", "S_opt", "risk_opt_times_n", "risk_grr_times_n", "ratio",
               "mech_kind", "p", "lambda"},
              rows, doc, MetaPreamble(doc, {"d", "C_star"}));
}

// ---------------------------------------------------------------- reproduce

struct ReproduceOptions {
  bool with_sim = false;
  int64_t reps = 100000;
  int64_t n = 100;
};

constexpr double kPublishedTolerance = 1e-3;
constexpr double kInternalTolerance = 1e-10;

class GoldenTable {
 public:
  void Add(const std::string& quantity, double value, double reference,
           const std::string& kind, double tolerance, bool relative) {
    const double err = relative
                           ? std::abs(value - reference) / std::abs(reference)
                           : std::abs(value - reference);
    const bool pass = err <= tolerance;
    rows_.push_back({{"quantity", quantity},
                     {"value", value},
                     {"reference", reference},
                     {"kind", kind},
                     {"tolerance", tolerance},
                     {"error", err},
                     {"pass", pass}});
    if (!pass) failures_.push_back(quantity);
  }

  void AddCheck(const std::string& quantity, bool pass) {
    rows_.push_back({{"quantity", quantity},
                     {"value", pass ? 1 : 0},
                     {"reference", 1},
                     {"kind", "check"},
                     {"pass", pass}});
    if (!pass) failures_.push_back(quantity);
  }

  void AddValue(const std::string& quantity, double value) {
    rows_.push_back({{"quantity", quantity},
                     {"value", value},
                     {"kind", "table"},
                     {"pass", true}});
  }

  const std::vector<Json>& rows() const { return rows_; }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::vector<Json> rows_;
  std::vector<std::string> failures_;
};

// Closed forms evaluated here, independently of the library's frontier code.
double OptRiskFormula(int d, double c) {
  return (d - 1.0) / (d * 1.0) * ((d + 2.0 * std::sqrt(d - 1.0)) / c - 1.0);
}

double GrrRiskFormula(int d, double lambda, double c) {
  return (d - 1.0) / (d * 1.0) *
         ((d + lambda + (d - 1.0) / lambda) / c - 1.0);
}

absl::Status ReproduceInstance(int d, double c, double published_p,
                               double published_opt, double published_grr,
                               GoldenTable* table) {
  const std::string tag = absl::StrCat("[d=", d, ",C=", c, "]");
  SP_ASSIGN_OR_RETURN(double c_star, CStar(d));
  SP_ASSIGN_OR_RETURN(FrontierPoint pt, SOpt(d, c));
  SP_ASSIGN_OR_RETURN(OptRisk risk, ComputeOptRisk(d, c));
  const double c_star_ref =
      d == 3 ? (3.0 - 2.0 * std::sqrt(2.0)) / 2.0
             : d == 10 ? 4.0 / 9.0
             : std::pow(std::sqrt(d - 1.0) - 1.0, 2) *
                   (std::sqrt(d - 1.0) + 1.0) /
                   (std::sqrt(d - 1.0) * (std::sqrt(d - 1.0) + d - 1.0));
  table->Add("C_star" + tag, c_star, c_star_ref, "closed_form", 1e-12, false);
  table->Add("p" + tag, pt.p, published_p, "published", kPublishedTolerance, true);
  table->Add("p" + tag, pt.p, c / c_star, "closed_form", kInternalTolerance,
             true);
  table->Add("lambda" + tag, pt.lambda, std::sqrt(d - 1.0), "closed_form",
             kInternalTolerance, true);
  table->Add("risk_opt_times_n" + tag, risk.r_opt_times_n, published_opt, "published",
             kPublishedTolerance, true);
  table->Add("risk_opt_times_n" + tag, risk.r_opt_times_n,
             OptRiskFormula(d, c), "closed_form", kInternalTolerance, true);
  table->Add("risk_grr_times_n" + tag, risk.r_grr_times_n, published_grr, "published",
             kPublishedTolerance, true);
  table->Add("risk_grr_times_n" + tag, risk.r_grr_times_n,
             GrrRiskFormula(d, risk.lambda_c, c), "closed_form",
             kInternalTolerance, true);
  const double l = risk.lambda_c;
  const double ratio_ref = (d + 2.0 * std::sqrt(d - 1.0) - c) /
                           (d + l + (d - 1.0) / l - c);
  table->Add("ratio" + tag, risk.ratio, ratio_ref, "closed_form",
             kInternalTolerance, true);
  SP_ASSIGN_OR_RETURN(double budget_at_lambda, GrrBudget(d, l));
  table->Add("grr_budget_at_lambda_c" + tag, budget_at_lambda, c,
             "closed_form", kInternalTolerance, true);
  return absl::OkStatus();
}

absl::Status RunReproduce(const CommonOptions& common,
                          const ReproduceOptions& ro) {
  GoldenTable table;
  SP_RETURN_IF_ERROR(
      ReproduceInstance(3, 0.05, 0.582843, 77.0457, 77.1653, &table));
  SP_RETURN_IF_ERROR(ReproduceInstance(10, 0.1, 0.225, 143.1, 149.7150, &table));

  // Subset selection: matched-budget risk increases with s.
  for (int d : {5, 10}) {
    for (double c : {0.01, 0.1, 0.5}) {
      SP_ASSIGN_OR_RETURN(SsMatchedTable ss, SsMatchedRisk(d, c));
      const std::string tag = absl::StrCat("[d=", d, ",C=", c, "]");
      for (const SsMatchedRow& r : ss.rows) {
        table.AddValue(absl::StrCat("ss_matched_risk_times_n[s=", r.s, "]", tag),
                       r.matched_risk_times_n);
      }
      table.AddCheck("ss_matched_risk_increasing_in_s" + tag,
                     ss.strictly_increasing);
      SP_ASSIGN_OR_RETURN(double l1, LambdaOfBudget(d, c));
      table.Add("ss_s1_equals_grr" + tag, ss.rows[0].matched_risk_times_n,
                GrrRiskFormula(d, l1, c), "closed_form", kInternalTolerance,
                true);
    }
  }

  // Orbit slope bound: attained by s = 1 at lambda = sqrt(d - 1) only.
  for (int d : {3, 4, 6, 10}) {
    const double bound = OrbitSlopeBound(d);
    const std::string tag = absl::StrCat("[d=", d, "]");
    table.Add("orbit_slope_bound" + tag, bound,
              1.0 / (d + 2.0 * std::sqrt(d - 1.0)), "closed_form",
              kInternalTolerance, true);
    SP_ASSIGN_OR_RETURN(TwoLevelSlope s1,
                        ComputeTwoLevelSlope(d, 1, std::sqrt(d - 1.0)));
    table.Add("two_level_slope[s=1]" + tag, s1.slope, bound, "closed_form",
              kInternalTolerance, true);
    bool below = true;
    for (int s = 2; s < d; ++s) {
      SP_ASSIGN_OR_RETURN(TwoLevelSlope t, ComputeTwoLevelSlope(d, s, 2.0));
      below = below && t.max_slope < bound;
    }
    table.AddCheck("two_level_slope_below_bound_for_s>=2" + tag, below);
  }

  if (ro.with_sim) {
    SP_ASSIGN_OR_RETURN(FrontierPoint pt3, SOpt(3, 0.05));
    const std::vector<std::pair<std::string, MechanismSpec>> mechs = {
        {"grr(10,3)", GrrParams{10, 3.0}},
        {"aug_grr(10,0.225,3)", AugGrrParams{10, 0.225, 3.0}},
        {"aug_grr(3,p_opt,sqrt2)",
         AugGrrParams{3, pt3.p, std::sqrt(2.0)}},
        {"subset(6,2,2)", SubsetParams{6, 2, 2.0}},
    };
    for (const auto& [name, spec] : mechs) {
      SP_ASSIGN_OR_RETURN(Channel ch, BuildChannel(spec));
      SP_ASSIGN_OR_RETURN(AffineEstimator est, PrepareDefaultEstimator(ch));
      SP_ASSIGN_OR_RETURN(
          SimResult r,
          EmpiricalRisk(ch, est, UniformishComposition(ch.d(), ro.n), ro.reps,
                        common.seed, SamplingMode::kFixedComposition));
      const double nn = static_cast<double>(ro.n);
      table.Add("mc_risk_times_n[" + name + "]", r.mean_risk * nn,
                r.closed_form * nn, "monte_carlo_3se", 3.0 * r.std_error * nn,
                false);
    }
  }

  Json doc = {{"rows", table.rows()}, {"failures", table.failures()}};
  SP_RETURN_IF_ERROR(Emit(common,
                          {"quantity", "value", "reference", "kind",
                           "tolerance", "error", "pass"},
                          table.rows(), doc));
  if (!table.failures().empty()) {
    return absl::InternalError(
        absl::StrCat("ReproductionFailure: ",
                     absl::StrJoin(table.failures(), ", ")));
  }
  return absl::OkStatus();
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string mode = "risk";
  int64_t n = 100;
  int64_t reps = 100000;
  std::string estimator = "auto";
  bool iid = false;
  std::string composition;
  int a = -1;
  int b = -1;
};

absl::Status RunSimulateRisk(const ResolvedChannel& rc,
                             const CommonOptions& common,
                             const SimulateOptions& so) {
  const Channel& ch = rc.ch;
  AffineEstimator est;
  if (so.estimator == "auto") {
    SP_ASSIGN_OR_RETURN(est, PrepareDefaultEstimator(ch));
  } else {
    SP_ASSIGN_OR_RETURN(EstimatorKind kind, ParseEstimatorKind(so.estimator));
    SP_ASSIGN_OR_RETURN(est, PrepareEstimator(kind, ch));
  }
  Composition comp = UniformishComposition(ch.d(), so.n);
  if (!so.composition.empty()) {
    comp.counts.clear();
    for (absl::string_view part : absl::StrSplit(so.composition, ',')) {
      int64_t c = 0;
      if (!absl::SimpleAtoi(part, &c)) {
        return absl::InvalidArgumentError("ParseError: bad --composition");
      }
      comp.counts.push_back(c);
    }
  }
  SP_ASSIGN_OR_RETURN(
      SimResult r,
      EmpiricalRisk(ch, est, comp, so.reps, common.seed,
                    so.iid ? SamplingMode::kIid
                           : SamplingMode::kFixedComposition));
  Json doc = SimResultToJson(r);
  const double n = static_cast<double>(comp.n());
  doc["n"] = comp.n();
  doc["estimator"] = EstimatorKindName(est.kind);
  doc["mode"] = so.iid ? "iid" : "fixed_composition";
  doc["risk_times_n"] = r.mean_risk * n;
  doc["closed_form_times_n"] = r.closed_form * n;
  Json row = doc;
  std::vector<std::string> columns = {
      "mean_risk", "std_error", "reps", "seed", "closed_form", "z_score",
      "n", "estimator", "mode", "risk_times_n", "closed_form_times_n"};
  for (size_t i = 0; i < r.coord_mean.size(); ++i) {
    const std::string mean_key = absl::StrCat("coord_mean_", i);
    const std::string se_key = absl::StrCat("coord_std_error_", i);
    row[mean_key] = r.coord_mean[i];
    row[se_key] = r.coord_std_error[i];
    columns.push_back(mean_key);
    columns.push_back(se_key);
  }
  doc["coord_mean"] = r.coord_mean;
  doc["coord_std_error"] = r.coord_std_error;
  return Emit(common, columns, {row}, doc);
}

absl::Status RunSimulateClt(const ResolvedChannel& rc,
                            const CommonOptions& common,
                            const SimulateOptions& so) {
  int a = so.a;
  int b = so.b;
  if (a < 0 || b < 0) std::tie(a, b) = DefaultPair(rc);
  SP_ASSIGN_OR_RETURN(ScoreResult r,
                      EmpiricalScore(rc.ch, a, b, so.n, so.reps, common.seed));
  const double lambda = std::exp(LdpParameter(rc.ch));
  SP_ASSIGN_OR_RETURN(double cert, BeCertificate(lambda, so.n, r.chi2));
  const double threshold = cert + 3.0 / std::sqrt(static_cast<double>(so.reps));
  const double shift_z = (r.alt_mean - r.shift) / r.alt_mean_std_error;
  Json doc = {{"a", a},
              {"b", b},
              {"n", so.n},
              {"reps", so.reps},
              {"seed", common.seed},
              {"chi2", r.chi2},
              {"ks_null", r.ks_null},
              {"ks_alt", r.ks_alt},
              {"be_certificate", cert},
              {"ks_threshold", threshold},
              {"alt_mean", r.alt_mean},
              {"alt_mean_std_error", r.alt_mean_std_error},
              {"shift", r.shift},
              {"shift_z", shift_z}};
  SP_RETURN_IF_ERROR(Emit(common,
                          {"a", "b", "n", "reps", "seed", "chi2", "ks_null",
                           "ks_alt", "be_certificate", "ks_threshold",
                           "alt_mean", "alt_mean_std_error", "shift",
                           "shift_z"},
                          {doc}, doc));
  if (r.ks_null > threshold) {
    return AssertionFailure(absl::StrCat(
        "null score Kolmogorov distance ", Num(r.ks_null),
        " exceeds the Berry-Esseen certificate plus 3/sqrt(reps) = ",
        Num(threshold)));
  }
  if (std::abs(shift_z) > 4.0) {
    return AssertionFailure(absl::StrCat(
        "alternative score mean is ", Num(shift_z),
        " standard errors from the shift sqrt(I/n)"));
  }
  return absl::OkStatus();
}

absl::Status RunSimulate(const MechOptions& mo, const CommonOptions& common,
                         const SimulateOptions& so) {
  SP_ASSIGN_OR_RETURN(ResolvedChannel rc, Resolve(mo));
  if (so.mode == "clt") return RunSimulateClt(rc, common, so);
  return RunSimulateRisk(rc, common, so);
}

// ---------------------------------------------------------------- bounds

struct BoundsOptions {
  int64_t n = 0;
  double rho = 0.0;
  std::optional<double> delta;
};

absl::Status RunBounds(const MechOptions& mo, const CommonOptions& common,
                       const BoundsOptions& bo) {
  if (bo.n < 1) return absl::InvalidArgumentError("BadN: --n must be >= 1");
  SP_ASSIGN_OR_RETURN(ResolvedChannel rc, Resolve(mo));
  const double rho = bo.rho > 0.0 ? bo.rho : DefaultRho(rc.ch.d());
  SP_ASSIGN_OR_RETURN(auto bounds, Bounds(rc.ch, bo.n, rho, bo.delta));
  const auto& [cr, assouad] = bounds;
  Json doc;
  if (cr.has_value()) {
    doc = BoundsReportToJson(*cr, assouad);
  } else {
    // Singular Fisher information: the Cramer-Rao bound is vacuous.
    CrBound vacuous;
    vacuous.chi_star = ChiStar(rc.ch);
    doc = BoundsReportToJson(vacuous, assouad);
  }
  doc["cr_vacuous"] = !cr.has_value();
  doc["rho"] = rho;
  doc["n"] = bo.n;
  doc["assouad_delta"] = assouad.delta;
  return Emit(common,
              {"cr", "cr_trace", "assouad", "regime_ok", "chi_star",
               "cr_vacuous", "rho", "n", "assouad_delta"},
              {doc}, doc);
}

int Report(const absl::Status& status) {
  if (status.ok()) return 0;
  std::cerr << "shuffle_priv: " << status.message() << "\n";
  return 1;
}

int Main(int argc, char** argv) {
  CLI::App app{"Shuffle-model privacy curves, bounds and optimal designs"};
  app.require_subcommand(1);
  MechOptions mo;
  CommonOptions common;

  CLI::App* analyze = app.add_subcommand("analyze", "channel report");
  AnalyzeOptions ao;
  AddMechOptions(analyze, &mo);
  AddCommonOptions(analyze, &common);
  analyze->add_option("--n", ao.n, "users for Fisher and bounds");
  analyze->add_option("--rho", ao.rho, "near-vertex offset, default 1/(2d)");

  CLI::App* curve = app.add_subcommand("curve", "exact privacy curve");
  CurveOptions co;
  AddMechOptions(curve, &mo);
  AddCommonOptions(curve, &common);
  curve->add_option("--n", co.n, "number of users")->required();
  curve->add_option("--law", co.law, "LR law JSON (path, - or inline)");
  curve->add_option("--eps-grid", co.eps_grid, "a:b:k or comma list");
  curve->add_option("--a", co.a, "first input of the pair");
  curve->add_option("--b", co.b, "second input of the pair");
  curve->add_flag("--gdp", co.gdp, "add the Gaussian DP reference column");
  curve->add_flag("--oracle", co.oracle,
                  "check against full-histogram enumeration");

  CLI::App* frontier = app.add_subcommand("frontier", "optimal design frontier");
  FrontierOptions fo;
  AddCommonOptions(frontier, &common);
  frontier->add_option("--d", fo.d, "input alphabet size")->required();
  frontier->add_option("--c", fo.c, "chi-square budget");
  frontier->add_option("--c-grid", fo.c_grid, "a:b:k budget grid");
  frontier->add_flag("--exploratory", fo.exploratory,
                     "high-budget template scan (no optimality claim)");
  frontier->add_flag("--subset-table", fo.subset_table,
                     "matched-budget subset selection risks");

  CLI::App* reproduce = app.add_subcommand("reproduce", "golden table");
  ReproduceOptions ro;
  AddCommonOptions(reproduce, &common);
  reproduce->add_flag("--with-sim", ro.with_sim, "add Monte Carlo checks");
  reproduce->add_option("--reps", ro.reps, "Monte Carlo replications");
  reproduce->add_option("--n", ro.n, "users in the Monte Carlo checks");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo checks");
  SimulateOptions so;
  AddMechOptions(simulate, &mo);
  AddCommonOptions(simulate, &common);
  simulate->add_option("mode", so.mode, "risk | clt")
      ->check(CLI::IsMember({"risk", "clt"}));
  simulate->add_option("--n", so.n, "number of users");
  simulate->add_option("--reps", so.reps, "replications");
  simulate->add_option("--estimator", so.estimator,
                       "auto | mixture_projected | orbit_projected | "
                       "ss_inverse");
  simulate->add_flag("--iid", so.iid, "draw inputs i.i.d. from theta");
  simulate->add_option("--composition", so.composition,
                       "comma-separated input counts");
  simulate->add_option("--a", so.a, "first input of the pair (clt)");
  simulate->add_option("--b", so.b, "second input of the pair (clt)");

  CLI::App* bounds = app.add_subcommand("bounds", "estimation lower bounds");
  BoundsOptions bo;
  AddMechOptions(bounds, &mo);
  AddCommonOptions(bounds, &common);
  bounds->add_option("--n", bo.n, "number of users")->required();
  bounds->add_option("--rho", bo.rho, "near-vertex offset, default 1/(2d)");
  bounds->add_option("--delta", bo.delta, "Assouad perturbation");

  CLI11_PARSE(app, argc, argv);

  if (*analyze) return Report(RunAnalyze(mo, common, ao));
  if (*curve) return Report(RunCurve(mo, common, co));
  if (*frontier) return Report(RunFrontier(common, fo));
  if (*reproduce) return Report(RunReproduce(common, ro));
  if (*simulate) return Report(RunSimulate(mo, common, so));
  if (*bounds) return Report(RunBounds(mo, common, bo));
  return 1;
}

}  // namespace
}  // namespace shuffle_privacy

int main(int argc, char** argv) { return shuffle_privacy::Main(argc, argv); }
