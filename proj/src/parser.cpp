#include <cctype>
#include <charconv>
#include <string>
#include <vector>

#include "ivr/program.hpp"

namespace ivr {

namespace {

enum class Tok {
  Ident,
  Int,
  Decimal,
  Symbol,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  const auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  static const char* const kMulti[] = {"->", "..", "<=", ">=", "!="};
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    const std::size_t l0 = line, c0 = col, start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_'))
        advance(1);
      out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), l0, c0});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) advance(1);
      Tok kind = Tok::Int;
      // A '.' starts a fraction unless it is the '..' of a range.
      if (i + 1 < src.size() && src[i] == '.' && src[i + 1] != '.') {
        kind = Tok::Decimal;
        advance(1);
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) advance(1);
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          kind = Tok::Decimal;
          advance(j - i);
          while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) advance(1);
        }
      }
      out.push_back({kind, std::string(src.substr(start, i - start)), l0, c0});
      continue;
    }
    bool matched = false;
    for (const char* m : kMulti) {
      if (src.substr(i, 2) == m) {
        advance(2);
        out.push_back({Tok::Symbol, m, l0, c0});
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("[]():;+-*/=<>&|!'").find(c) != std::string_view::npos) {
      advance(1);
      out.push_back({Tok::Symbol, std::string(1, c), l0, c0});
      continue;
    }
    throw ParseError(l0, c0, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  Program run() {
    Program p;
    while (peek().kind != Tok::End) {
      if (is_ident("var")) {
        declaration(p);
      } else if (is_ident("init")) {
        const Token& at = next();
        if (p.has_init_block) throw ParseError(at.line, at.column, "duplicate init block");
        ExprPtr e = expression(p);
        expect_ident("endinit");
        p.init = e;
        p.has_init_block = true;
      } else if (is_symbol("[")) {
        command(p);
      } else {
        fail(peek(), "expected 'var', 'init' or a command");
      }
    }
    if (!p.has_init_block) {
      std::vector<ExprPtr> parts;
      for (std::size_t v = 0; v < p.vars.size(); ++v)
        parts.push_back(expr::eq(v, p.vars[v].initial.value_or(p.vars[v].domain.lower)));
      p.init = expr::all_of(parts);
    }
    validate(p);
    return p;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_symbol(std::string_view s, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Symbol && peek(ahead).text == s;
  }
  bool is_ident(std::string_view s) const {
    return peek().kind == Tok::Ident && peek().text == s;
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(t.line, t.column,
                     msg + (t.kind == Tok::End ? " at end of input" : ", found '" + t.text + "'"));
  }
  void expect_symbol(std::string_view s) {
    if (!is_symbol(s)) fail(peek(), "expected '" + std::string(s) + "'");
    next();
  }
  void expect_ident(std::string_view s) {
    if (!is_ident(s)) fail(peek(), "expected '" + std::string(s) + "'");
    next();
  }
  std::string identifier() {
    if (peek().kind != Tok::Ident) fail(peek(), "expected an identifier");
    return next().text;
  }

  std::int64_t integer_literal() {
    bool negative = false;
    if (is_symbol("-")) {
      next();
      negative = true;
    }
    const Token& t = peek();
    if (t.kind != Tok::Int) fail(t, "expected an integer");
    next();
    std::int64_t v = 0;
    const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc()) throw ParseError(t.line, t.column, "integer out of range");
    return negative ? -v : v;
  }

  void declaration(Program& p) {
    next();  // var
    const Token& at = peek();
    VarDecl d;
    d.name = identifier();
    if (p.find_var(d.name)) throw ParseError(at.line, at.column, "duplicate declaration of " + d.name);
    expect_symbol(":");
    expect_symbol("[");
    d.domain.lower = integer_literal();
    expect_symbol("..");
    d.domain.upper = integer_literal();
    expect_symbol("]");
    if (d.domain.lower > d.domain.upper)
      throw ParseError(at.line, at.column, "empty domain for " + d.name);
    if (is_ident("init")) {
      next();
      d.initial = integer_literal();
    }
    expect_symbol(";");
    p.vars.push_back(std::move(d));
  }

  void command(Program& p) {
    expect_symbol("[");
    Command c;
    if (peek().kind == Tok::Ident) c.action = next().text;
    expect_symbol("]");
    c.guard = expression(p);
    expect_symbol("->");
    do {
      c.branches.push_back(branch(p));
    } while (is_symbol("+") && next().kind == Tok::Symbol);
    expect_symbol(";");
    p.commands.push_back(std::move(c));
  }

  double probability() {
    const Token& t = next();
    if (t.kind != Tok::Int && t.kind != Tok::Decimal) fail(t, "expected a probability");
    double value = std::stod(t.text);
    if (is_symbol("/")) {
      next();
      const Token& d = next();
      if (d.kind != Tok::Int && d.kind != Tok::Decimal) fail(d, "expected a denominator");
      const double den = std::stod(d.text);
      if (den == 0.0) throw ParseError(d.line, d.column, "zero denominator");
      value /= den;
    }
    return value;
  }

  Branch branch(Program& p) {
    Branch b{1.0, {}};
    const bool has_probability = (peek().kind == Tok::Int || peek().kind == Tok::Decimal);
    if (has_probability) {
      b.probability = probability();
      expect_symbol(":");
    }
    if (is_ident("true")) {
      next();
      return b;
    }
    do {
      expect_symbol("(");
      const Token& at = peek();
      const std::string name = identifier();
      const auto v = p.find_var(name);
      if (!v) throw ParseError(at.line, at.column, "undeclared variable " + name);
      expect_symbol("'");
      expect_symbol("=");
      b.updates.push_back({*v, expression(p)});
      expect_symbol(")");
    } while (is_symbol("&") && next().kind == Tok::Symbol);
    return b;
  }

  // or > and > not > relation > additive > multiplicative > unary > atom
  ExprPtr expression(Program& p) { return disjunction(p); }

  ExprPtr disjunction(Program& p) {
    ExprPtr e = conjunction(p);
    while (is_symbol("|")) {
      next();
      e = expr::binary(ExprKind::Or, e, conjunction(p));
    }
    return e;
  }

  ExprPtr conjunction(Program& p) {
    ExprPtr e = negation(p);
    while (is_symbol("&")) {
      next();
      e = expr::binary(ExprKind::And, e, negation(p));
    }
    return e;
  }

  ExprPtr negation(Program& p) {
    if (is_symbol("!")) {
      next();
      return expr::unary(ExprKind::Not, negation(p));
    }
    return relation(p);
  }

  ExprPtr relation(Program& p) {
    ExprPtr e = additive(p);
    static const std::pair<const char*, ExprKind> kRel[] = {
        {"=", ExprKind::Eq}, {"!=", ExprKind::Ne}, {"<", ExprKind::Lt},
        {"<=", ExprKind::Le}, {">", ExprKind::Gt}, {">=", ExprKind::Ge}};
    for (const auto& [sym, kind] : kRel) {
      if (is_symbol(sym)) {
        next();
        return expr::binary(kind, e, additive(p));
      }
    }
    return e;
  }

  ExprPtr additive(Program& p) {
    ExprPtr e = multiplicative(p);
    while (is_symbol("+") || is_symbol("-")) {
      const ExprKind k = next().text == "+" ? ExprKind::Add : ExprKind::Sub;
      e = expr::binary(k, e, multiplicative(p));
    }
    return e;
  }

  ExprPtr multiplicative(Program& p) {
    ExprPtr e = unary(p);
    while (is_symbol("*") || is_symbol("/")) {
      const ExprKind k = next().text == "*" ? ExprKind::Mul : ExprKind::Div;
      e = expr::binary(k, e, unary(p));
    }
    return e;
  }

  ExprPtr unary(Program& p) {
    if (is_symbol("-")) {
      if (peek(1).kind == Tok::Int) return expr::integer(integer_literal());
      next();
      return expr::unary(ExprKind::Neg, unary(p));
    }
    return atom(p);
  }

  ExprPtr atom(Program& p) {
    const Token& t = peek();
    if (t.kind == Tok::Int) return expr::integer(integer_literal());
    if (t.kind == Tok::Decimal) fail(t, "non-integer literal in expression");
    if (is_symbol("(")) {
      next();
      ExprPtr e = expression(p);
      expect_symbol(")");
      return e;
    }
    if (t.kind == Tok::Ident) {
      next();
      if (t.text == "true") return expr::boolean(true);
      if (t.text == "false") return expr::boolean(false);
      const auto v = p.find_var(t.text);
      if (!v) throw ParseError(t.line, t.column, "undeclared variable " + t.text);
      return expr::var(*v);
    }
    fail(t, "expected an expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Program parse(std::string_view source) { return Parser(source).run(); }

}  // namespace ivr
