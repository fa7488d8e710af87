#include "mgverify/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace mgv {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw SimulationError("SHA-256 computation failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SimulationError("cannot write " + path);
  out << contents;
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("cannot parse " + path + ": " + e.what());
  }
}

void write_json(const std::string& path, const nlohmann::json& j) { write_file(path, j.dump(2) + "\n"); }

std::vector<Bitstring> read_bitstrings(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<Bitstring> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(parse_bitstring(line));
    if (out.back().size() != out.front().size()) throw ValidationError("mixed bitstring lengths in " + path);
  }
  return out;
}

void write_bitstrings(const std::string& path, const std::vector<Bitstring>& xs) {
  std::string s;
  for (const auto& x : xs) {
    s += to_string(x);
    s += '\n';
  }
  write_file(path, s);
}

std::vector<double> read_values(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(line, &used));
      if (used != line.size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      throw ValidationError("cannot parse value '" + line + "' in " + path);
    }
  }
  return out;
}

void write_values(const std::string& path, const std::vector<double>& v) {
  std::string s;
  char buf[64];
  for (double x : v) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", x);
    s += buf;
  }
  write_file(path, s);
}

std::string library_version() { return MGVERIFY_VERSION; }

}  // namespace mgv
