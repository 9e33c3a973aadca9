#include "pitcheval/meta.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pitcheval/error.hpp"

namespace pitcheval {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write file: " + path);
  out << content;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

std::string hash_file(const std::string& path) {
  return fnv1a64_hex(read_text_file(path));
}

std::string MetaBlock::to_csv_comments() const {
  std::ostringstream out;
  out << "# tool_version: " << kToolVersion << "\n";
  out << "# format_version: " << kFormatVersion << "\n";
  if (!config_hash.empty()) out << "# config_hash: " << config_hash << "\n";
  if (has_seed) out << "# seed: " << seed << "\n";
  for (const auto& [path, hash] : input_hashes) {
    out << "# input: " << path << " " << hash << "\n";
  }
  return out.str();
}

}  // namespace pitcheval
