#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pitcheval {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kFormatVersion = "1";

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

// Hash of a file's raw bytes, hex-encoded. Throws Error(IoFailure) if the
// file cannot be read.
std::string hash_file(const std::string& path);

// Provenance block embedded in every output file: tool version, a hash of
// the effective configuration, the seed in effect, and input file hashes.
// Deliberately contains nothing time- or host-dependent so reruns are
// byte-identical.
struct MetaBlock {
  std::string config_hash;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::vector<std::pair<std::string, std::string>> input_hashes;  // (path, hash)

  // "# key: value" comment lines for CSV-style outputs.
  std::string to_csv_comments() const;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace pitcheval
