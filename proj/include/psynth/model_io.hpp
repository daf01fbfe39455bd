#pragma once
// Line-oriented text format for explicit POMDPs.
//
//   pomdp <name>
//   states <N>
//   observations <Z>            (optional; defaults to 1 + largest observed id)
//   actions <a0> <a1> ...
//   observe <s> -> <z>
//   trans <s> <a> : <p> -> <s'> [, <p> -> <s'>]*
//   reward <s> <a> = <r>
//   label <ap> : <s> <s> ...
//   init <s>
//
// '#' starts a comment. States may be written as "3" or "s3"; the arrow may
// also be written as U+2192.

#include <filesystem>
#include <string>
#include <string_view>

#include "psynth/model.hpp"

namespace psynth {

// Syntax errors carry a 1-based line and column.
class ParseError : public ModelError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

Pomdp parse_model(std::string_view text);
std::string serialize_model(const Pomdp& m);

Pomdp load_model(const std::filesystem::path& path);
void save_model(const Pomdp& m, const std::filesystem::path& path);

// FNV-1a hash of the serialized model, hex encoded.
std::string model_hash(const Pomdp& m);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace psynth
