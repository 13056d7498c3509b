#pragma once

// Byte-stable CSV serialization of trace records. Two runs of the same
// configuration must produce identical bytes, so doubles are printed with
// %.17g (round-trip exact) and nothing locale-dependent is used.

#include <filesystem>
#include <string>
#include <vector>

#include "mixcaladin/core.hpp"

namespace mixcaladin {

inline constexpr const char* kTraceCsvHeader =
    "stage,iter,step_norm,objective,gamma,alpha,energy";

std::string format_double(double v);

/// Header plus one line per record; the energy field is left empty
/// outside stage 2.
std::string to_csv(const std::vector<TraceRecord>& trace);

void write_text_file(const std::filesystem::path& path,
                     const std::string& contents);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace mixcaladin
