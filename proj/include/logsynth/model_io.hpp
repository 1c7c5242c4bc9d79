#pragma once

#include <string>
#include <string_view>

#include "logsynth/model.hpp"

namespace logsynth {

// Line-oriented model file:
//   M <id> <name> [component]
//   A <method-id> <activity-id> <ENTRY|EXIT|LOG|CALL|ASSIGN|BRANCH> [payload]
//   E <method-id> <from> <to> [T:<var>|F:<var>|TRUE|FALSE]
//   C <caller-id> <site-activity-id> <callee-id>
// Records appear in M, A, E, C order; `#` starts a comment line. Statement ids
// are implied by the order of LOG records. Probing flags are not stored.
std::string serialize_model(const ProgramModel& model);
ProgramModel parse_model(std::string_view text, const std::string& path = "<model>");

void save_model(const ProgramModel& model, const std::string& path);
ProgramModel load_model(const std::string& path);

}  // namespace logsynth
