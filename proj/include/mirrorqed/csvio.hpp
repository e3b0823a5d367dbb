#pragma once

// Deterministic text output: every float is rendered with 12 significant
// digits so identical runs produce byte-identical artifacts.

#include "mirrorqed/errors.hpp"

#include <cstdio>
#include <fstream>
#include <string>

namespace mirrorqed {

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file: " + path);
    return out;
}

} // namespace mirrorqed
