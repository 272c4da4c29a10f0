#pragma once

#include <ostream>

namespace qkdfs::cli {

// Entry point behind the qkdfs executable; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qkdfs::cli
