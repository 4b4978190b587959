#include "latres/structure_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace latres {

using nlohmann::json;

namespace {

cplx parse_gamma(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_object() && j.contains("re")) {
    return {j.at("re").get<double>(), j.value("im", 0.0)};
  }
  throw Error(ErrorCode::invalid_argument, "structure: gamma must be a number or {re, im}");
}

}  // namespace

StructureParams parse_structure(const std::string& json_text) {
  StructureParams p;
  try {
    const json doc = json::parse(json_text);
    p.N = doc.at("N").get<int>();
    p.masses = doc.at("masses").get<std::vector<double>>();
    p.springs = doc.at("springs").get<std::vector<double>>();
    for (const auto& g : doc.at("gammas")) p.gammas.push_back(parse_gamma(g));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("structure: ") + e.what());
  }
  p.validate();
  return p;
}

StructureParams load_structure(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_argument, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_structure(ss.str());
}

std::string structure_to_json(const StructureParams& params) {
  json doc;
  doc["N"] = params.N;
  doc["masses"] = params.masses;
  doc["springs"] = params.springs;
  json gammas = json::array();
  for (cplx g : params.gammas) {
    if (g.imag() == 0.0) {
      gammas.push_back(g.real());
    } else {
      gammas.push_back({{"re", g.real()}, {"im", g.imag()}});
    }
  }
  doc["gammas"] = gammas;
  return doc.dump();
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace latres
