#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace t2v::io {

std::ifstream open_in(const std::string& path);
std::ofstream open_out(const std::string& path);

std::vector<std::string_view> split(std::string_view s, char delim);
std::vector<std::string_view> split_ws(std::string_view s);
std::string_view trim(std::string_view s);

/// Strict numeric parsing; return false on any trailing garbage.
bool parse_double(std::string_view s, double& out);
bool parse_int64(std::string_view s, long long& out);
bool parse_uint64(std::string_view s, unsigned long long& out);

double to_double(std::string_view s, std::string_view what);

}  // namespace t2v::io
