#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ifit/error.hpp"
#include "ifit/geometry.hpp"
#include "ifit/solver.hpp"
#include "ifit/systems.hpp"

namespace ifit {

class ConfigError : public Error {
public:
  ConfigError(std::string source, int line, const std::string& message);
  int line() const { return line_; }

private:
  int line_;
};

// Config grammar (EBNF):
//
//   file    = { line } ;
//   line    = [ section | pair ] , [ "#" , { any } ] , newline ;
//   section = "[" , name , [ integer ] , "]" ;
//   pair    = key , "=" , value ;
//   value   = string | bool | array | constant ;
//   string  = '"' , { char | '\"' | '\\' } , '"' ;
//   bool    = "true" | "false" ;
//   array   = "[" , [ value , { "," , value } ] , "]" ;
//   constant = expression without variables, e.g. 1.5, -2e-3, 2*pi ;
//
// Keys are unique within a section. Arrays may not span lines.
struct ConfigValue {
  using Array = std::vector<ConfigValue>;
  std::variant<double, bool, std::string, Array> data;
  int line = 0;

  bool is_number() const { return std::holds_alternative<double>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }
};

struct ConfigSection {
  std::string name;  // "problem", "stage 2", ...
  int line = 0;
  std::map<std::string, ConfigValue> entries;
};

struct ConfigFile {
  std::string source;
  std::vector<ConfigSection> sections;
};

ConfigFile parse_config_text(std::string_view text, const std::string& source = "<config>");

enum class Mode { Polynomial, Analytic, Dyadic, System };
const char* to_string(Mode m);

struct RunConfig {
  std::string source;
  std::string label;
  Mode mode = Mode::Polynomial;
  std::vector<std::string> independent;
  std::vector<std::string> dependent;
  std::vector<std::string> equations;
  Rect R;
  Rect I;  // one axis per dependent variable
  std::vector<double> center;
  MultiIndex N;
  std::vector<int> schedule;
  int depth = 0;
  std::optional<std::vector<int>> order;  // 0-based equation per dependent variable
  std::vector<StageSpec> stages;
  FitOptions options;
  std::string out_dir;
  int surface_points = 0;
};

RunConfig build_run_config(const ConfigFile& file);
RunConfig load_config(const std::string& path);

}  // namespace ifit
