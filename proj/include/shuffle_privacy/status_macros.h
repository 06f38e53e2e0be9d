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

#ifndef SHUFFLE_PRIVACY_STATUS_MACROS_H_
#define SHUFFLE_PRIVACY_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define SP_STATUS_CONCAT_INNER_(x, y) x##y
#define SP_STATUS_CONCAT_(x, y) SP_STATUS_CONCAT_INNER_(x, y)

#define SP_RETURN_IF_ERROR(expr)              \
  do {                                        \
    const absl::Status sp_status_ = (expr);   \
    if (!sp_status_.ok()) return sp_status_; \
  } while (0)

#define SP_ASSIGN_OR_RETURN_IMPL_(statusor, lhs, rexpr) \
  auto statusor = (rexpr);                              \
  if (!statusor.ok()) return statusor.status();         \
  lhs = std::move(statusor).value()

// lhs may be a declaration, e.g. SP_ASSIGN_OR_RETURN(Channel ch, Grr(3, 2.0)).
#define SP_ASSIGN_OR_RETURN(lhs, rexpr) \
  SP_ASSIGN_OR_RETURN_IMPL_(            \
      SP_STATUS_CONCAT_(sp_statusor_, __LINE__), lhs, rexpr)

#endif  // SHUFFLE_PRIVACY_STATUS_MACROS_H_
