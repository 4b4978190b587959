#include "output.hpp"

#include <iostream>

namespace latres::cli {

Output::Output(const std::string& path) : out_(&std::cout) {
  if (path.empty() || path == "-") return;
  file_ = std::make_unique<std::ofstream>(path);
  if (!*file_) throw Error(ErrorCode::invalid_argument, "cannot write " + path);
  out_ = file_.get();
}

nlohmann::json to_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

nlohmann::json to_json(const CVector& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(to_json(v(i)));
  return arr;
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  Output out(path);
  out.stream() << doc.dump(2) << '\n';
}

}  // namespace latres::cli
