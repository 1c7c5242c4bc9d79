#include <cctype>
#include <algorithm>
#include <array>
#include <set>
#include <string_view>

#include "logsynth/error.hpp"
#include "logsynth/minilang.hpp"

namespace logsynth::minilang {

bool If::operator==(const If& other) const {
  return cond == other.cond && then_block == other.then_block && else_block == other.else_block;
}

bool While::operator==(const While& other) const {
  return cond == other.cond && body == other.body;
}

namespace {

enum class Tok { kIdent, kString, kLParen, kRParen, kLBrace, kRBrace, kSemi, kComma, kPlus, kAssign, kBang, kEof };

struct Token {
  Tok kind;
  std::string text;  // identifier name or unescaped string value
  int line;
  int column;
};

constexpr std::array<std::string_view, 9> kReserved = {"void", "component", "log",  "if",   "else",
                                                      "while", "return",   "true", "false"};

bool is_reserved(std::string_view word) {
  return std::find(kReserved.begin(), kReserved.end(), word) != kReserved.end();
}

std::string_view describe(Tok kind) {
  switch (kind) {
    case Tok::kIdent:
      return "identifier";
    case Tok::kString:
      return "string";
    case Tok::kLParen:
      return "'('";
    case Tok::kRParen:
      return "')'";
    case Tok::kLBrace:
      return "'{'";
    case Tok::kRBrace:
      return "'}'";
    case Tok::kSemi:
      return "';'";
    case Tok::kComma:
      return "','";
    case Tok::kPlus:
      return "'+'";
    case Tok::kAssign:
      return "'='";
    case Tok::kBang:
      return "'!'";
    case Tok::kEof:
      return "end of input";
  }
  return "token";
}

std::string describe(const Token& t) {
  if (t.kind == Tok::kIdent) return "'" + t.text + "'";
  if (t.kind == Tok::kString) return "string literal";
  return std::string(describe(t.kind));
}

// Returns the byte offset of the first invalid UTF-8 sequence, or npos.
std::size_t find_invalid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > s.size()) return i;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (cc & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
    i += len;
  }
  return std::string_view::npos;
}

class Lexer {
 public:
  explicit Lexer(const SourceUnit& unit) : unit_(unit), text_(unit.text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      const int line = line_;
      const int col = col_;
      if (pos_ >= text_.size()) {
        out.push_back({Tok::kEof, {}, line, col});
        return out;
      }
      const char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
          advance();
        }
        out.push_back({Tok::kIdent, std::string(text_.substr(start, pos_ - start)), line, col});
        continue;
      }
      if (c == '"') {
        out.push_back({Tok::kString, read_string(), line, col});
        continue;
      }
      Tok kind;
      switch (c) {
        case '(':
          kind = Tok::kLParen;
          break;
        case ')':
          kind = Tok::kRParen;
          break;
        case '{':
          kind = Tok::kLBrace;
          break;
        case '}':
          kind = Tok::kRBrace;
          break;
        case ';':
          kind = Tok::kSemi;
          break;
        case ',':
          kind = Tok::kComma;
          break;
        case '+':
          kind = Tok::kPlus;
          break;
        case '=':
          kind = Tok::kAssign;
          break;
        case '!':
          kind = Tok::kBang;
          break;
        default:
          error(line, col, "unexpected character '" + std::string(1, c) + "'");
      }
      advance();
      out.push_back({kind, {}, line, col});
    }
  }

 private:
  [[noreturn]] void error(int line, int col, const std::string& msg) const {
    throw ParseError(unit_.path, line, col, msg);
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(text_[pos_]) & 0xC0) != 0x80) {
      ++col_;
    }
    ++pos_;
    // Continuation bytes do not start a new column.
    while (pos_ < text_.size() && (static_cast<unsigned char>(text_[pos_]) & 0xC0) == 0x80) ++pos_;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  std::string read_string() {
    const int line = line_;
    const int col = col_;
    advance();  // opening quote
    std::string value;
    for (;;) {
      if (pos_ >= text_.size() || text_[pos_] == '\n') error(line, col, "unterminated string literal");
      const char c = text_[pos_];
      if (c == '"') {
        advance();
        return value;
      }
      if (c == '\\') {
        const int esc_line = line_;
        const int esc_col = col_;
        advance();
        if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\\')) {
          error(esc_line, esc_col, "invalid escape sequence in string literal");
        }
        value += text_[pos_];
        advance();
        continue;
      }
      const std::size_t start = pos_;
      advance();
      value.append(text_.substr(start, pos_ - start));
    }
  }

  const SourceUnit& unit_;
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(const SourceUnit& unit, std::vector<Token> tokens) : unit_(unit), toks_(std::move(tokens)) {}

  std::vector<AstMethod> parse_unit() {
    std::vector<AstMethod> methods;
    std::set<std::string> names;
    while (peek().kind != Tok::kEof) {
      std::optional<std::string> component;
      if (is_word("component")) {
        ++pos_;
        component = expect(Tok::kString).text;
      }
      const Token& kw = peek();
      if (!is_word("void")) error(kw, "expected 'void' but found " + describe(kw));
      ++pos_;
      const Token& name = expect_ident("method name");
      if (!names.insert(name.text).second) error(name, "duplicate method '" + name.text + "'");
      expect(Tok::kLParen);
      expect(Tok::kRParen);
      AstMethod m;
      m.name = name.text;
      m.component = std::move(component);
      m.line = kw.line;
      m.body = parse_block();
      methods.push_back(std::move(m));
    }
    return methods;
  }

 private:
  [[noreturn]] void error(const Token& at, const std::string& msg) const {
    throw ParseError(unit_.path, at.line, at.column, msg);
  }

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }

  bool is_word(std::string_view word, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::kIdent && t.text == word;
  }

  const Token& expect(Tok kind) {
    const Token& t = peek();
    if (t.kind != kind) {
      error(t, "expected " + std::string(describe(kind)) + " but found " + describe(t));
    }
    ++pos_;
    return t;
  }

  const Token& expect_ident(std::string_view what) {
    const Token& t = peek();
    if (t.kind != Tok::kIdent) error(t, "expected " + std::string(what) + " but found " + describe(t));
    if (is_reserved(t.text)) error(t, "'" + t.text + "' is a reserved word");
    ++pos_;
    return t;
  }

  Block parse_block() {
    expect(Tok::kLBrace);
    Block block;
    while (peek().kind != Tok::kRBrace) {
      if (peek().kind == Tok::kEof) error(peek(), "expected '}' but found end of input");
      block.push_back(parse_stmt());
    }
    ++pos_;
    return block;
  }

  Condition parse_cond() {
    Condition cond;
    if (is_word("true")) {
      ++pos_;
      cond.kind = Condition::Kind::kTrue;
    } else if (is_word("false")) {
      ++pos_;
      cond.kind = Condition::Kind::kFalse;
    } else if (peek().kind == Tok::kBang) {
      ++pos_;
      cond.kind = Condition::Kind::kNotVar;
      cond.var = expect_ident("condition variable").text;
    } else {
      cond.kind = Condition::Kind::kVar;
      cond.var = expect_ident("condition").text;
    }
    return cond;
  }

  LogPart parse_part() {
    const Token& t = peek();
    if (t.kind == Tok::kString) {
      ++pos_;
      return LogPart::literal(t.text);
    }
    if (t.kind == Tok::kIdent) return LogPart::var(expect_ident("log argument").text);
    error(t, "expected string or variable but found " + describe(t));
  }

  Stmt parse_stmt() {
    const Token& first = peek();
    Stmt stmt;
    stmt.line = first.line;
    stmt.column = first.column;
    if (first.kind != Tok::kIdent) error(first, "expected statement but found " + describe(first));

    if (first.text == "log") {
      ++pos_;
      expect(Tok::kLParen);
      const Token& level_tok = peek();
      const auto level = level_tok.kind == Tok::kIdent ? parse_level(level_tok.text) : std::nullopt;
      if (!level) error(level_tok, "expected log level (info, warn, error) but found " + describe(level_tok));
      ++pos_;
      expect(Tok::kComma);
      LogCall call;
      call.level = *level;
      call.parts.push_back(parse_part());
      while (peek().kind == Tok::kPlus) {
        ++pos_;
        call.parts.push_back(parse_part());
      }
      expect(Tok::kRParen);
      expect(Tok::kSemi);
      stmt.node = std::move(call);
    } else if (first.text == "return") {
      ++pos_;
      expect(Tok::kSemi);
      stmt.node = Return{};
    } else if (first.text == "if") {
      ++pos_;
      If node;
      expect(Tok::kLParen);
      node.cond = parse_cond();
      expect(Tok::kRParen);
      node.then_block = parse_block();
      if (is_word("else")) {
        ++pos_;
        node.else_block = parse_block();
      }
      stmt.node = std::move(node);
    } else if (first.text == "while") {
      ++pos_;
      While node;
      expect(Tok::kLParen);
      node.cond = parse_cond();
      expect(Tok::kRParen);
      node.body = parse_block();
      stmt.node = std::move(node);
    } else {
      const std::string name = expect_ident("statement").text;
      if (peek().kind == Tok::kLParen) {
        ++pos_;
        expect(Tok::kRParen);
        expect(Tok::kSemi);
        stmt.node = Invoke{name};
      } else if (peek().kind == Tok::kAssign) {
        ++pos_;
        std::string value = expect(Tok::kString).text;
        expect(Tok::kSemi);
        stmt.node = Assign{name, std::move(value)};
      } else {
        error(peek(), "expected '(' or '=' after '" + name + "' but found " + describe(peek()));
      }
    }
    return stmt;
  }

  const SourceUnit& unit_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

void position_of(std::string_view text, std::size_t offset, int& line, int& col) {
  line = 1;
  col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
      ++col;
    }
  }
}

}  // namespace

std::vector<AstMethod> parse_unit(const SourceUnit& source) {
  if (const auto bad = find_invalid_utf8(source.text); bad != std::string_view::npos) {
    int line;
    int col;
    position_of(source.text, bad, line, col);
    throw ParseError(source.path, line, col, "invalid UTF-8");
  }
  Parser parser(source, Lexer(source).run());
  return parser.parse_unit();
}

namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string cond_text(const Condition& c) {
  switch (c.kind) {
    case Condition::Kind::kTrue:
      return "true";
    case Condition::Kind::kFalse:
      return "false";
    case Condition::Kind::kVar:
      return c.var;
    case Condition::Kind::kNotVar:
      return "!" + c.var;
  }
  return "true";
}

void print_block(const Block& block, int depth, std::string& out);

void print_stmt(const Stmt& s, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LogCall>) {
          out += pad + "log(" + std::string(to_string(n.level)) + ", ";
          for (std::size_t i = 0; i < n.parts.size(); ++i) {
            if (i) out += " + ";
            out += n.parts[i].kind == LogPart::Kind::kLiteral ? quote(n.parts[i].text) : n.parts[i].text;
          }
          out += ");\n";
        } else if constexpr (std::is_same_v<T, Invoke>) {
          out += pad + n.target + "();\n";
        } else if constexpr (std::is_same_v<T, Assign>) {
          out += pad + n.var + " = " + quote(n.value) + ";\n";
        } else if constexpr (std::is_same_v<T, If>) {
          out += pad + "if (" + cond_text(n.cond) + ") {\n";
          print_block(n.then_block, depth + 1, out);
          if (n.else_block) {
            out += pad + "} else {\n";
            print_block(*n.else_block, depth + 1, out);
          }
          out += pad + "}\n";
        } else if constexpr (std::is_same_v<T, While>) {
          out += pad + "while (" + cond_text(n.cond) + ") {\n";
          print_block(n.body, depth + 1, out);
          out += pad + "}\n";
        } else {
          out += pad + "return;\n";
        }
      },
      s.node);
}

void print_block(const Block& block, int depth, std::string& out) {
  for (const auto& s : block) print_stmt(s, depth, out);
}

}  // namespace

std::string print(std::span<const AstMethod> methods) {
  std::string out;
  for (const auto& m : methods) {
    if (m.component) out += "component " + quote(*m.component) + "\n";
    out += "void " + m.name + "() {\n";
    print_block(m.body, 1, out);
    out += "}\n";
  }
  return out;
}

}  // namespace logsynth::minilang
