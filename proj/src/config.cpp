#include "ifit/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ifit/expr.hpp"

namespace ifit {

ConfigError::ConfigError(std::string source, int line, const std::string& message)
    : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

const char* to_string(Mode m) {
  switch (m) {
    case Mode::Polynomial: return "polynomial";
    case Mode::Analytic: return "analytic";
    case Mode::Dyadic: return "dyadic";
    case Mode::System: return "system";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

class LineParser {
public:
  LineParser(std::string_view text, const std::string& source, int line) : s_(text), source_(source), line_(line) {}

  ConfigValue value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    ConfigValue v;
    v.line = line_;
    const char c = s_[pos_];
    if (c == '"') {
      v.data = string();
    } else if (c == '[') {
      ++pos_;
      ConfigValue::Array items;
      skip_ws();
      if (peek() == ']') {
        ++pos_;
      } else {
        for (;;) {
          items.push_back(value());
          skip_ws();
          const char d = peek();
          ++pos_;
          if (d == ']') break;
          if (d != ',') fail(d == '\0' ? "unterminated array" : "expected ',' or ']' in array");
        }
      }
      v.data = std::move(items);
    } else {
      v.data = 0.0;
      scalar(v);
    }
    return v;
  }

  // Rest of the line must be blank or a comment.
  void finish() {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != '#') fail("unexpected text after value: '" + trim(s_.substr(pos_)) + "'");
  }

private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(source_, line_, msg); }

  std::string string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size()) {
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        const char e = s_[pos_++];
        if (e != '"' && e != '\\') fail(std::string("unknown escape '\\") + e + "'");
        out += e;
      } else {
        out += c;
      }
    }
    fail("unterminated string");
  }

  void scalar(ConfigValue& v) {
    const std::size_t start = pos_;
    int depth = 0;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (depth <= 0 && (c == ',' || c == ']' || c == '#')) break;
      ++pos_;
    }
    const std::string tok = trim(s_.substr(start, pos_ - start));
    if (tok.empty()) fail("missing value");
    if (tok == "true" || tok == "false") {
      v.data = tok == "true";
      return;
    }
    try {
      const double x = Expr::parse(tok, {}).eval({});
      if (!std::isfinite(x)) fail("value '" + tok + "' is not finite");
      v.data = x;
    } catch (const ParseError& e) {
      fail("invalid value '" + tok + "': " + e.detail());
    } catch (const EvalError& e) {
      fail("invalid value '" + tok + "': " + e.what());
    }
  }

  std::string_view s_;
  const std::string& source_;
  int line_;
  std::size_t pos_ = 0;
};

// Typed access to one section with line-numbered errors.
class Reader {
public:
  Reader(const ConfigFile& f, const ConfigSection& s) : file_(f), sec_(s) {}

  bool has(const std::string& key) const { return sec_.entries.count(key) > 0; }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : sec_.entries)
      if (!ok.count(k)) fail(v.line, "unknown key '" + k + "' in [" + sec_.name + "]");
  }

  const ConfigValue& get(const std::string& key) const {
    auto it = sec_.entries.find(key);
    if (it == sec_.entries.end()) fail(sec_.line, "[" + sec_.name + "] needs '" + key + "'");
    return it->second;
  }

  double number(const ConfigValue& v, const std::string& what) const {
    if (!v.is_number()) fail(v.line, what + " must be a number");
    return std::get<double>(v.data);
  }
  int integer(const ConfigValue& v, const std::string& what) const {
    const double x = number(v, what);
    if (x != std::floor(x) || std::fabs(x) > 1e9) fail(v.line, what + " must be an integer");
    return static_cast<int>(x);
  }
  double number(const std::string& key) const { return number(get(key), "'" + key + "'"); }
  int integer(const std::string& key) const { return integer(get(key), "'" + key + "'"); }
  bool boolean(const std::string& key) const {
    const ConfigValue& v = get(key);
    if (!v.is_bool()) fail(v.line, "'" + key + "' must be true or false");
    return std::get<bool>(v.data);
  }
  std::string string(const std::string& key) const {
    const ConfigValue& v = get(key);
    if (!v.is_string()) fail(v.line, "'" + key + "' must be a quoted string");
    return std::get<std::string>(v.data);
  }

  const ConfigValue::Array& array(const ConfigValue& v, const std::string& what) const {
    if (!v.is_array()) fail(v.line, what + " must be an array");
    return std::get<ConfigValue::Array>(v.data);
  }

  std::vector<std::string> strings(const std::string& key) const {
    const ConfigValue& v = get(key);
    if (v.is_string()) return {std::get<std::string>(v.data)};
    std::vector<std::string> out;
    for (const auto& item : array(v, "'" + key + "'")) {
      if (!item.is_string()) fail(item.line, "'" + key + "' must hold quoted strings");
      out.push_back(std::get<std::string>(item.data));
    }
    return out;
  }

  std::vector<double> numbers(const std::string& key) const {
    const ConfigValue& v = get(key);
    if (v.is_number()) return {std::get<double>(v.data)};
    std::vector<double> out;
    for (const auto& item : array(v, "'" + key + "'")) out.push_back(number(item, "'" + key + "' entries"));
    return out;
  }

  std::vector<int> integers(const std::string& key) const {
    const ConfigValue& v = get(key);
    if (v.is_number()) return {integer(v, "'" + key + "'")};
    std::vector<int> out;
    for (const auto& item : array(v, "'" + key + "'")) out.push_back(integer(item, "'" + key + "' entries"));
    return out;
  }

  // [lo, hi] or [[lo, hi], ...].
  Rect box(const std::string& key) const {
    const ConfigValue& v = get(key);
    const auto& items = array(v, "'" + key + "'");
    if (items.empty()) fail(v.line, "'" + key + "' is empty");
    std::vector<double> lo, hi;
    auto pair = [&](const ConfigValue& p) {
      const auto& ends = array(p, "'" + key + "' intervals");
      if (ends.size() != 2) fail(p.line, "'" + key + "' intervals need exactly two numbers");
      lo.push_back(number(ends[0], "'" + key + "' bounds"));
      hi.push_back(number(ends[1], "'" + key + "' bounds"));
    };
    if (items.front().is_number())
      pair(v);
    else
      for (const auto& p : items) pair(p);
    try {
      return Rect(lo, hi);
    } catch (const GeometryError& e) {
      fail(v.line, "'" + key + "': " + e.what());
    }
  }

  int line(const std::string& key) const { return get(key).line; }
  int section_line() const { return sec_.line; }
  [[noreturn]] void fail(int line, const std::string& msg) const { throw ConfigError(file_.source, line, msg); }

private:
  const ConfigFile& file_;
  const ConfigSection& sec_;
};

}  // namespace

ConfigFile parse_config_text(std::string_view text, const std::string& source) {
  ConfigFile file;
  file.source = source;
  std::set<std::string> seen;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') {
      if (end == text.size()) break;
      continue;
    }
    if (line[0] == '[') {
      const std::size_t close = line.find(']');
      if (close == std::string::npos) throw ConfigError(source, lineno, "unterminated section header");
      const std::string rest = trim(std::string_view(line).substr(close + 1));
      if (!rest.empty() && rest[0] != '#') throw ConfigError(source, lineno, "unexpected text after section header");
      std::istringstream words(line.substr(1, close - 1));
      std::string name, word, extra;
      words >> name >> word >> extra;
      if (!extra.empty() || !is_identifier(name)) throw ConfigError(source, lineno, "malformed section header");
      if (!word.empty()) {
        for (char c : word)
          if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ConfigError(source, lineno, "section index must be a positive integer");
        name += " " + std::to_string(std::stoi(word));
      }
      if (!seen.insert(name).second) throw ConfigError(source, lineno, "duplicate section [" + name + "]");
      file.sections.push_back(ConfigSection{name, lineno, {}});
    } else {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(source, lineno, "expected 'key = value' or a section header");
      const std::string key = trim(std::string_view(line).substr(0, eq));
      if (!is_identifier(key)) throw ConfigError(source, lineno, "invalid key '" + key + "'");
      if (file.sections.empty()) throw ConfigError(source, lineno, "'" + key + "' appears before any section");
      LineParser lp(std::string_view(line).substr(eq + 1), source, lineno);
      ConfigValue v = lp.value();
      lp.finish();
      auto& entries = file.sections.back().entries;
      if (entries.count(key)) throw ConfigError(source, lineno, "duplicate key '" + key + "'");
      entries.emplace(key, std::move(v));
    }
    if (end == text.size()) break;
  }
  return file;
}

RunConfig build_run_config(const ConfigFile& file) {
  RunConfig cfg;
  cfg.source = file.source;
  const ConfigSection* problem = nullptr;
  const ConfigSection* fit = nullptr;
  const ConfigSection* tol = nullptr;
  const ConfigSection* output = nullptr;
  std::map<int, const ConfigSection*> stage_secs;
  for (const auto& s : file.sections) {
    if (s.name == "problem") problem = &s;
    else if (s.name == "fit") fit = &s;
    else if (s.name == "tolerances") tol = &s;
    else if (s.name == "output") output = &s;
    else if (s.name.rfind("stage ", 0) == 0) stage_secs[std::stoi(s.name.substr(6))] = &s;
    else throw ConfigError(file.source, s.line, "unknown section [" + s.name + "]");
  }
  if (!problem) throw ConfigError(file.source, 1, "missing [problem] section");
  const Reader pr(file, *problem);
  pr.allow({"label", "mode", "independent", "dependent", "equation", "equations", "R", "I", "center"});

  cfg.label = pr.has("label") ? pr.string("label") : std::string("fit");
  const std::string mode = pr.has("mode") ? pr.string("mode") : std::string("polynomial");
  if (mode == "polynomial") cfg.mode = Mode::Polynomial;
  else if (mode == "analytic") cfg.mode = Mode::Analytic;
  else if (mode == "dyadic") cfg.mode = Mode::Dyadic;
  else if (mode == "system") cfg.mode = Mode::System;
  else pr.fail(pr.line("mode"), "mode must be polynomial, analytic, dyadic or system");

  cfg.independent = pr.strings("independent");
  cfg.dependent = pr.strings("dependent");
  if (cfg.independent.empty()) pr.fail(pr.line("independent"), "need at least one independent variable");
  if (cfg.dependent.empty()) pr.fail(pr.line("dependent"), "need at least one dependent variable");
  const bool system = cfg.mode == Mode::System;
  if (!system && cfg.dependent.size() != 1)
    pr.fail(pr.line("dependent"), "mode " + mode + " takes exactly one dependent variable");
  if (pr.has("equation") == pr.has("equations"))
    pr.fail(problem->line, "give exactly one of 'equation' or 'equations'");
  cfg.equations = pr.has("equation") ? pr.strings("equation") : pr.strings("equations");
  const std::string eq_key = pr.has("equation") ? "equation" : "equations";
  if (cfg.equations.size() != cfg.dependent.size())
    pr.fail(pr.line(eq_key), std::to_string(cfg.equations.size()) + " equations for " +
                                 std::to_string(cfg.dependent.size()) + " dependent variables");
  std::vector<std::string> vars = cfg.independent;
  vars.insert(vars.end(), cfg.dependent.begin(), cfg.dependent.end());
  for (const auto& e : cfg.equations) {
    try {
      Expr::parse(e, vars);
    } catch (const Error& err) {
      pr.fail(pr.line(eq_key), std::string("equation: ") + err.what());
    }
  }

  cfg.R = pr.box("R");
  if (cfg.R.dim() != cfg.independent.size())
    pr.fail(pr.line("R"), "R has " + std::to_string(cfg.R.dim()) + " axes for " +
                              std::to_string(cfg.independent.size()) + " independent variables");
  cfg.I = pr.box("I");
  if (cfg.I.dim() != cfg.dependent.size())
    pr.fail(pr.line("I"), "I has " + std::to_string(cfg.I.dim()) + " axes for " +
                              std::to_string(cfg.dependent.size()) + " dependent variables");
  cfg.center = pr.has("center") ? pr.numbers("center") : cfg.R.center();
  if (pr.has("center")) {
    if (system) pr.fail(pr.line("center"), "system centers are set per stage");
    if (cfg.center.size() != cfg.R.dim()) pr.fail(pr.line("center"), "center has wrong dimension");
    if (!cfg.R.contains(cfg.center)) pr.fail(pr.line("center"), "center lies outside R");
  }

  const std::size_t n = cfg.R.dim();
  if (fit) {
    const Reader fr(file, *fit);
    fr.allow({"N", "schedule", "depth", "order"});
    if (fr.has("N")) {
      auto N = fr.integers("N");
      if (N.size() == 1 && n > 1) N.assign(n, N[0]);
      if (N.size() != n) fr.fail(fr.line("N"), "N needs one entry per independent variable");
      for (int v : N)
        if (v < 1) fr.fail(fr.line("N"), "N entries must be positive");
      cfg.N = MultiIndex(N);
    }
    if (fr.has("schedule")) cfg.schedule = fr.integers("schedule");
    if (fr.has("depth")) cfg.depth = fr.integer("depth");
    if (fr.has("order")) {
      auto order = fr.integers("order");
      for (int& v : order) {
        if (v < 1 || static_cast<std::size_t>(v) > cfg.dependent.size())
          fr.fail(fr.line("order"), "order entries must be equation numbers 1.." +
                                        std::to_string(cfg.dependent.size()));
        --v;
      }
      if (order.size() != cfg.dependent.size()) fr.fail(fr.line("order"), "order needs one entry per dependent variable");
      cfg.order = order;
    }
    switch (cfg.mode) {
      case Mode::Polynomial:
        if (!fr.has("N")) fr.fail(fit->line, "polynomial mode needs 'N'");
        break;
      case Mode::Analytic:
        if (!fr.has("schedule")) fr.fail(fit->line, "analytic mode needs 'schedule'");
        if (cfg.schedule.empty()) fr.fail(fr.line("schedule"), "schedule is empty");
        for (std::size_t i = 0; i < cfg.schedule.size(); ++i)
          if (cfg.schedule[i] < 1 || (i > 0 && cfg.schedule[i] <= cfg.schedule[i - 1]))
            fr.fail(fr.line("schedule"), "schedule must be positive and strictly increasing");
        break;
      case Mode::Dyadic:
        if (!fr.has("depth")) fr.fail(fit->line, "dyadic mode needs 'depth'");
        if (cfg.depth < 1 || cfg.depth > 16) fr.fail(fr.line("depth"), "depth must be between 1 and 16");
        break;
      case Mode::System:
        break;
    }
  } else if (!system) {
    throw ConfigError(file.source, problem->line, "missing [fit] section");
  }

  if (tol) {
    const Reader tr(file, *tol);
    tr.allow({"bisect", "quad_order", "extended_threshold", "cond_warn", "validation_points",
              "orientation_samples", "reference_blocks", "seed"});
    FitOptions& o = cfg.options;
    if (tr.has("bisect")) o.bisect_tol = tr.number("bisect");
    if (tr.has("quad_order")) o.quad_order = tr.integer("quad_order");
    if (tr.has("extended_threshold")) o.extended_threshold = tr.integer("extended_threshold");
    if (tr.has("cond_warn")) o.cond_warn = tr.number("cond_warn");
    if (tr.has("validation_points")) o.validation_points = tr.integer("validation_points");
    if (tr.has("orientation_samples")) o.orientation_samples = static_cast<std::size_t>(tr.integer("orientation_samples"));
    if (tr.has("reference_blocks")) o.reference_blocks = tr.integer("reference_blocks");
    if (tr.has("seed")) o.seed = static_cast<std::uint64_t>(tr.integer("seed"));
    if (!(o.bisect_tol > 0)) tr.fail(tr.line("bisect"), "bisect must be positive");
    if (o.quad_order < 1 || o.quad_order > 512) tr.fail(tr.line("quad_order"), "quad_order must be in 1..512");
  }

  if (output) {
    const Reader orr(file, *output);
    orr.allow({"dir", "surface_points"});
    if (orr.has("dir")) cfg.out_dir = orr.string("dir");
    if (orr.has("surface_points")) cfg.surface_points = orr.integer("surface_points");
  }

  if (!stage_secs.empty() && !system)
    throw ConfigError(file.source, stage_secs.begin()->second->line, "[stage] sections need mode = \"system\"");
  if (system) {
    const std::size_t m = cfg.dependent.size();
    cfg.stages.resize(m);
    for (const auto& [idx, sec] : stage_secs)
      if (idx < 1 || static_cast<std::size_t>(idx) > m)
        throw ConfigError(file.source, sec->line, "there is no stage " + std::to_string(idx));
    for (std::size_t i = 0; i < m; ++i) {
      auto it = stage_secs.find(static_cast<int>(i + 1));
      if (it == stage_secs.end())
        throw ConfigError(file.source, problem->line, "missing [stage " + std::to_string(i + 1) + "] section");
      const Reader sr(file, *it->second);
      sr.allow({"N", "center", "R", "I", "analytic"});
      StageSpec& st = cfg.stages[i];
      auto N = sr.integers("N");
      const std::size_t d = n + i;
      if (N.size() == 1 && d > 1) N.assign(d, N[0]);
      if (N.size() != d) sr.fail(sr.line("N"), "stage " + std::to_string(i + 1) + " N needs " + std::to_string(d) + " entries");
      for (int v : N)
        if (v < 1) sr.fail(sr.line("N"), "N entries must be positive");
      st.N = MultiIndex(N);
      if (sr.has("center")) st.center = sr.numbers("center");
      if (sr.has("R")) st.R = sr.box("R");
      if (sr.has("I")) st.I = sr.box("I");
      if (sr.has("analytic")) st.analytic = sr.boolean("analytic");
      if (st.R && st.R->dim() != n) sr.fail(sr.line("R"), "stage R needs " + std::to_string(n) + " axes");
      if (st.I && st.I->dim() != i + 1)
        sr.fail(sr.line("I"), "stage I must cover the first " + std::to_string(i + 1) + " dependent variables");
      if (st.center && st.center->size() != d)
        sr.fail(sr.line("center"), "stage center needs " + std::to_string(d) + " entries");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, "cannot read config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return build_run_config(parse_config_text(ss.str(), path));
}

}  // namespace ifit
