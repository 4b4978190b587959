#pragma once

#include <fstream>
#include <iosfwd>
#include <memory>
#include <string>

#include <json.hpp>

#include "latres/numerics.hpp"

namespace latres::cli {

// "-" or empty writes to stdout.
class Output {
 public:
  explicit Output(const std::string& path);
  std::ostream& stream() { return *out_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

nlohmann::json to_json(cplx z);
nlohmann::json to_json(const CVector& v);

// Pretty-printed with a trailing newline.
void write_json(const std::string& path, const nlohmann::json& doc);

}  // namespace latres::cli
