#pragma once

#include <string>

#include "bmv/core.hpp"

namespace bmv {

// Problem file format: {"A": [[..],[..],[..]], "B": [b1, b2, b3]} with plain
// decimal floats; NaN/Inf rejected.
BMVProblem load_problem(const std::string& path, double sym_tol = 1e-12);
BMVProblem parse_problem(const std::string& text, double sym_tol = 1e-12);
std::string problem_to_json(const BMVProblem& p);

}  // namespace bmv
