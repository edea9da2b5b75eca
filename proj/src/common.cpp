#include "itgan/common.hpp"

#include <atomic>
#include <iostream>

namespace itgan {

namespace {
std::atomic<bool> g_warnings{true};
}

std::string_view label_name(int label) {
    switch (label) {
        case 0: return "NonMalicious";
        case 1: return "S1";
        case 2: return "S2";
        case 3: return "S3";
        default: fail(ErrorCode::InvalidArgument, "unknown class index " + std::to_string(label));
    }
}

int parse_label(std::string_view name) {
    if (name == "NonMalicious") return 0;
    if (name == "S1") return 1;
    if (name == "S2") return 2;
    if (name == "S3") return 3;
    fail(ErrorCode::Parse, "unknown class label '" + std::string(name) + "'");
}

void warn(const std::string& msg) {
    if (g_warnings.load()) std::cerr << "warning: " << msg << '\n';
}

void set_warnings_enabled(bool enabled) { g_warnings.store(enabled); }

}  // namespace itgan
