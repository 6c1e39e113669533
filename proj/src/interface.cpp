#include "tbgen/interface.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "tbgen/errors.hpp"

namespace tbgen {

const PortDecl* ModuleInterface::find(std::string_view name) const {
  for (const auto& p : ports) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::vector<const PortDecl*> ModuleInterface::data_inputs() const {
  std::vector<const PortDecl*> out;
  for (const auto& p : ports) {
    if (p.direction == Direction::input && !p.is_clock) out.push_back(&p);
  }
  return out;
}

std::vector<const PortDecl*> ModuleInterface::outputs() const {
  std::vector<const PortDecl*> out;
  for (const auto& p : ports) {
    if (p.direction == Direction::output) out.push_back(&p);
  }
  return out;
}

bool ModuleInterface::has_clock() const {
  return std::any_of(ports.begin(), ports.end(), [](const PortDecl& p) { return p.is_clock; });
}

std::optional<std::string> select_clock(const ModuleInterface& iface) {
  std::optional<std::string> clock;
  for (const auto& p : iface.ports) {
    if (!p.is_clock) continue;
    if (clock) {
      throw AmbiguousClockError("module " + iface.module_name + " has two clock candidates: " +
                                *clock + " and " + p.name);
    }
    clock = p.name;
  }
  return clock;
}

void validate_interface(const ModuleInterface& iface) {
  if (iface.module_name.empty()) throw ValidationError("module name is empty");
  std::set<std::string> names;
  bool any_input = false, any_output = false;
  for (const auto& p : iface.ports) {
    if (p.name.empty()) throw ValidationError("port with empty name");
    if (!names.insert(p.name).second) throw ValidationError("duplicate port '" + p.name + "'");
    if (p.width == 0) throw ValidationError("port '" + p.name + "' has zero width");
    if (p.is_clock && (p.direction != Direction::input || p.width != 1)) {
      throw ValidationError("clock port '" + p.name + "' must be a 1-bit input");
    }
    any_input |= p.direction == Direction::input;
    any_output |= p.direction == Direction::output;
  }
  if (!any_input || !any_output) {
    throw ValidationError("module " + iface.module_name +
                          " needs at least one input and one output port");
  }
  select_clock(iface);
}

namespace {

struct Token {
  enum class Kind { ident, number, punct, end } kind;
  std::string text;
  int line;
  int col;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space_and_comments();
      if (pos_ >= src_.size()) break;
      int line = line_, col = col_;
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
        std::string id;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '_' || src_[pos_] == '$')) {
          id.push_back(advance());
        }
        out.push_back({Token::Kind::ident, std::move(id), line, col});
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::string num;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '\'' || src_[pos_] == '_')) {
          num.push_back(advance());
        }
        out.push_back({Token::Kind::number, std::move(num), line, col});
      } else {
        out.push_back({Token::Kind::punct, std::string(1, advance()), line, col});
      }
    }
    out.push_back({Token::Kind::end, "", line_, col_});
    return out;
  }

 private:
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (src_.substr(pos_, 2) == "//") {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (src_.substr(pos_, 2) == "/*") {
        advance();
        advance();
        while (pos_ < src_.size() && src_.substr(pos_, 2) != "*/") advance();
        if (pos_ < src_.size()) {
          advance();
          advance();
        }
      } else if (c == '`') {
        // Compiler directives (`timescale, `default_nettype): skip the line.
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

[[noreturn]] void fail(const Token& at, const std::string& what) {
  throw ParseError(std::to_string(at.line) + ":" + std::to_string(at.col) + ": " + what);
}

bool is_data_type_keyword(const std::string& s) {
  return s == "wire" || s == "reg" || s == "logic" || s == "var" || s == "tri";
}

class HeaderParser {
 public:
  explicit HeaderParser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ModuleInterface parse() {
    std::size_t module_at = toks_.size();
    int modules = 0;
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      if (toks_[i].kind == Token::Kind::ident &&
          (toks_[i].text == "module" || toks_[i].text == "macromodule")) {
        if (modules++ == 0) module_at = i;
      }
    }
    if (modules == 0) fail(toks_.back(), "no module declaration found");
    if (modules > 1) fail(toks_[module_at], "expected exactly one module declaration");

    pos_ = module_at + 1;
    ModuleInterface iface;
    const Token& name = next();
    if (name.kind != Token::Kind::ident) fail(name, "expected module name");
    iface.module_name = name.text;

    if (peek().text == "#") {
      next();
      expect("(");
      skip_balanced_parens();
    }
    if (peek().text == ";") fail(peek(), "module has no port list");
    expect("(");
    parse_ports(iface);
    expect(";");

    for (auto& p : iface.ports) {
      std::string lower = p.name;
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      p.is_clock = (lower == "clk" || lower == "clock") && p.direction == Direction::input &&
                   p.width == 1;
      p.is_reset = lower.find("reset") != std::string::npos || lower == "rst" ||
                   lower == "areset";
    }
    try {
      validate_interface(iface);
    } catch (const AmbiguousClockError&) {
      throw;
    } catch (const ValidationError& e) {
      fail(name, e.what());
    }
    return iface;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (t.kind != Token::Kind::end) ++pos_;
    return t;
  }
  void expect(const std::string& text) {
    const Token& t = next();
    if (t.text != text) fail(t, "expected '" + text + "' but found '" + t.text + "'");
  }
  void skip_balanced_parens() {
    int depth = 1;
    while (depth > 0) {
      const Token& t = next();
      if (t.kind == Token::Kind::end) fail(t, "unterminated parameter list");
      if (t.text == "(") ++depth;
      if (t.text == ")") --depth;
    }
  }

  int parse_int(const Token& t) {
    if (t.kind != Token::Kind::number ||
        !std::all_of(t.text.begin(), t.text.end(),
                     [](unsigned char c) { return std::isdigit(c) || c == '_'; })) {
      fail(t, "unsupported parameterized width '" + t.text + "'");
    }
    int v = 0;
    for (char c : t.text) {
      if (c != '_') v = v * 10 + (c - '0');
    }
    return v;
  }

  void parse_range(PortDecl& port) {
    expect("[");
    const Token& hi_tok = next();
    int hi = parse_int(hi_tok);
    if (peek().text != ":") fail(peek(), "unsupported parameterized width expression");
    next();
    const Token& lo_tok = next();
    int lo = parse_int(lo_tok);
    if (peek().text != "]") fail(peek(), "unsupported parameterized width expression");
    next();
    if (hi < lo) fail(hi_tok, "ascending range [" + std::to_string(hi) + ":" +
                                  std::to_string(lo) + "] is not supported");
    port.width = static_cast<unsigned>(hi - lo + 1);
    port.lsb = lo;
  }

  void parse_ports(ModuleInterface& iface) {
    if (peek().text == ")") {
      next();
      return;
    }
    std::optional<PortDecl> current;  // direction and range carried across commas
    std::set<std::string> seen;
    while (true) {
      const Token& t = peek();
      if (t.kind == Token::Kind::ident && (t.text == "input" || t.text == "output")) {
        next();
        current = PortDecl{};
        current->direction = t.text == "input" ? Direction::input : Direction::output;
        if (peek().kind == Token::Kind::ident && is_data_type_keyword(peek().text)) next();
        if (peek().text == "signed" || peek().text == "unsigned") next();
        if (peek().text == "[") parse_range(*current);
      } else if (t.kind == Token::Kind::ident && t.text == "inout") {
        fail(t, "inout ports are not supported");
      } else if (t.kind == Token::Kind::ident && is_data_type_keyword(t.text)) {
        if (!current) fail(t, "non-ANSI port list: missing direction");
        next();
        current->width = 1;
        current->lsb = 0;
        if (peek().text == "[") parse_range(*current);
      } else if (!current) {
        fail(t, "non-ANSI port list: port '" + t.text + "' has no direction");
      }

      const Token& name = next();
      if (name.kind != Token::Kind::ident) fail(name, "expected port name, found '" + name.text + "'");
      if (!seen.insert(name.text).second) fail(name, "duplicate port '" + name.text + "'");
      if (peek().text == "[") fail(peek(), "unpacked port dimensions are not supported");
      PortDecl port = *current;
      port.name = name.text;
      iface.ports.push_back(port);

      const Token& sep = next();
      if (sep.text == ")") return;
      if (sep.text != ",") fail(sep, "expected ',' or ')' in port list, found '" + sep.text + "'");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

ModuleInterface parse_verilog_interface(std::string_view source) {
  return HeaderParser(Lexer(source).run()).parse();
}

std::string render_port_table(const ModuleInterface& iface) {
  std::ostringstream os;
  os << "| port | direction | width | range | role |\n";
  os << "|---|---|---|---|---|\n";
  for (const auto& p : iface.ports) {
    os << "| " << p.name << " | " << (p.direction == Direction::input ? "input" : "output")
       << " | " << p.width << " | [" << p.msb() << ":" << p.lsb << "] | "
       << (p.is_clock ? "clock" : p.is_reset ? "reset" : "data") << " |\n";
  }
  return os.str();
}

}  // namespace tbgen
