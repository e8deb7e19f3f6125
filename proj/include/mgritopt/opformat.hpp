#pragma once

#include <string>

#include "mgritopt/types.hpp"

namespace mgritopt {

// Exact hex-float text encoding; to_hex/from_hex round-trip every finite
// double bitwise.
std::string to_hex(double v);
double from_hex(const std::string& s);

// Serialized coarse operator with provenance. The stencil values round-trip
// bitwise, so a loaded operator reproduces the exact mu-spectrum of the one
// that was saved.
struct OperatorFile {
    Scheme scheme = Scheme::SDIRK3;
    int order = 3;
    int m = 2;
    Relax relax = Relax::F;
    std::string strategy;  // "trunc", "lls", "nls", ...
    double objective_initial = 0.0;
    double objective_final = 0.0;
    TimeStepper psi;  // sparse columns + coarse dt
};

void write_operator_file(const std::string& path, const OperatorFile& op);
OperatorFile read_operator_file(const std::string& path);

}  // namespace mgritopt
