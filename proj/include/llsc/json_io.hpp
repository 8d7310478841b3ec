/*
 * Copyright 2026 The llsc-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// JSON shapes shared by trace headers and scenario files.

#pragma once

#include <json.hpp>

#include "llsc/sched.hpp"
#include "llsc/tamper.hpp"

namespace llsc {

using ordered_json = nlohmann::ordered_json;

ordered_json tamper_to_json(const TamperSpec& spec);
/// Throws std::invalid_argument on a malformed object.
TamperSpec tamper_from_json(const nlohmann::ordered_json& j);

/// [{"thread":1,"steps":8}, ...]
ordered_json entries_to_json(const std::vector<ScheduleEntry>& entries);
std::vector<ScheduleEntry> entries_from_json(const nlohmann::ordered_json& j);

/// "R7" / 7 -> 7
std::uint8_t register_from_json(const nlohmann::ordered_json& j);

}  // namespace llsc
