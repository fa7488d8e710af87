#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgverify/dense.hpp"

namespace mgv {

std::string sha256_hex(const std::string& data);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

nlohmann::json read_json(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& j);

/// Newline-delimited bitstrings, qubit 0 first.
std::vector<Bitstring> read_bitstrings(const std::string& path);
void write_bitstrings(const std::string& path, const std::vector<Bitstring>& xs);

/// One number per line.
std::vector<double> read_values(const std::string& path);
void write_values(const std::string& path, const std::vector<double>& v);

std::string library_version();

}  // namespace mgv
