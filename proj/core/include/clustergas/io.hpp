#pragma once

#include <filesystem>
#include <string>

namespace clustergas {

/// Decimal with 17 significant digits (round-trip exact); "inf"/"nan" for
/// non-finite values.
std::string fmt_double(double x);

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: to a temporary, then rename.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace clustergas
