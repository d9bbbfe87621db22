#include "bmv/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bmv {

namespace {

using nlohmann::json;

double finite_number(const json& j, const char* where) {
  if (!j.is_number()) raise(errc::bad_input, std::string("expected a number at ") + where);
  double v = j.get<double>();
  if (!std::isfinite(v)) raise(errc::bad_input, std::string("non-finite value at ") + where);
  return v;
}

}  // namespace

BMVProblem parse_problem(const std::string& text, double sym_tol) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    raise(errc::bad_input, std::string("problem file is not valid JSON: ") + e.what());
  }
  if (!j.contains("A") || !j.contains("B"))
    raise(errc::bad_input, "problem file needs fields \"A\" (3x3) and \"B\" (3)");
  const json& ja = j["A"];
  const json& jb = j["B"];
  if (!ja.is_array() || ja.size() != 3) raise(errc::bad_input, "\"A\" must be a 3x3 array");
  Eigen::Matrix3d a;
  for (int i = 0; i < 3; ++i) {
    if (!ja[static_cast<std::size_t>(i)].is_array() || ja[static_cast<std::size_t>(i)].size() != 3)
      raise(errc::bad_input, "\"A\" must be a 3x3 array");
    for (int jj = 0; jj < 3; ++jj)
      a(i, jj) = finite_number(ja[static_cast<std::size_t>(i)][static_cast<std::size_t>(jj)], "A");
  }
  if (!jb.is_array() || jb.size() != 3) raise(errc::bad_input, "\"B\" must list 3 entries");
  Eigen::Vector3d b;
  for (int i = 0; i < 3; ++i) b(i) = finite_number(jb[static_cast<std::size_t>(i)], "B");
  return ingest(a, b, sym_tol);
}

BMVProblem load_problem(const std::string& path, double sym_tol) {
  std::ifstream in(path);
  if (!in) raise(errc::bad_input, "cannot open problem file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str(), sym_tol);
}

std::string problem_to_json(const BMVProblem& p) {
  json j;
  for (int i = 0; i < 3; ++i) {
    json row = json::array();
    for (int k = 0; k < 3; ++k) row.push_back(p.A.a(i, k));
    j["A"].push_back(row);
  }
  for (int i = 0; i < 3; ++i) j["B"].push_back(p.B.b(i));
  return j.dump(2);
}

}  // namespace bmv
