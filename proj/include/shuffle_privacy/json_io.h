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

// JSON readers and writers for channels, LR laws, mechanism specs and
// reports.

#ifndef SHUFFLE_PRIVACY_JSON_IO_H_
#define SHUFFLE_PRIVACY_JSON_IO_H_

#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "shuffle_privacy/channel.h"
#include "shuffle_privacy/estimation_bounds.h"
#include "shuffle_privacy/mechanisms.h"
#include "shuffle_privacy/privacy_curve.h"
#include "shuffle_privacy/shuffle_sim.h"

namespace shuffle_privacy {

using Json = nlohmann::ordered_json;

// Errors carry "ParseError: line L, column C: ...".
absl::StatusOr<Json> ParseJson(std::string_view text);

absl::StatusOr<Channel> ChannelFromJson(const Json& j);
Json ChannelToJson(const Channel& ch);

// "levels" and "eps0" are optional on input.
absl::StatusOr<LrLaw> LrLawFromJson(const Json& j);
Json LrLawToJson(const LrLaw& law);

absl::StatusOr<MechanismSpec> MechanismSpecFromJson(const Json& j);
Json MechanismSpecToJson(const MechanismSpec& spec);

Json CurveToJson(const PrivacyCurve& curve);
Json SimResultToJson(const SimResult& r);
Json BoundsReportToJson(const CrBound& cr, const AssouadResult& assouad);

}  // namespace shuffle_privacy

#endif  // SHUFFLE_PRIVACY_JSON_IO_H_
