#pragma once

#include <filesystem>
#include <string>

#include "latres/model.hpp"

namespace latres {

// {"N": int, "masses": [...], "springs": [...], "gammas": [...]}; each gamma
// is a number or {"re": x, "im": y}. The result is validated.
StructureParams parse_structure(const std::string& json_text);
StructureParams load_structure(const std::filesystem::path& path);
std::string structure_to_json(const StructureParams& params);

// 17 significant digits; parses back to the same double.
std::string format_real(double x);

}  // namespace latres
