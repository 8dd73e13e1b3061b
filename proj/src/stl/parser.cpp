#include "stlsynth/stl/parser.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <optional>

namespace stlsynth {

ParseError::ParseError(const std::string& msg, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      msg_(msg),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Number, Ident, Sym, End };

struct Token {
  Tok type;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') advance(1);
      continue;
    }
    Token t{Tok::Sym, "", 0.0, line, col};
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          j = k;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        }
      }
      t.type = Tok::Number;
      t.text = s.substr(i, j - i);
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
        throw ParseError("malformed number '" + t.text + "'", line, col);
      advance(j - i);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      t.type = Tok::Ident;
      t.text = s.substr(i, j - i);
      advance(j - i);
    } else if (c == ':' && i + 1 < s.size() && s[i + 1] == '=') {
      t.text = ":=";
      advance(2);
    } else if (std::string("&|!()[],+-*/<>;").find(c) != std::string::npos) {
      t.text = std::string(1, c);
      advance(1);
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(std::move(t));
  }
  out.push_back({Tok::End, "", 0.0, line, col});
  return out;
}

struct Linear {
  Eigen::VectorXd coeffs;
  double constant = 0.0;
  bool isConstant() const { return coeffs.isZero(0.0); }
};

class Parser {
 public:
  Parser(std::vector<Token> toks, const std::vector<std::string>& vars)
      : toks_(std::move(toks)), vars_(vars) {}

  Formula parseFile() {
    // Definitions: IDENT ':=' formula ';'
    while (peek().type == Tok::Ident && peek(1).text == ":=") {
      Token name = next();
      next();
      if (isKeyword(name.text) || varIndex(name.text))
        fail("definition name '" + name.text + "' clashes with a variable or operator", name);
      Formula f = parseOr();
      expect(";");
      defs_[name.text] = f;
    }
    Formula f = parseOr();
    if (peek().type != Tok::End) fail("unexpected '" + peek().text + "'", peek());
    return f;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  const std::vector<std::string>& vars_;
  std::map<std::string, Formula> defs_;

  const Token& peek(size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(const char* sym) {
    if (peek().type == Tok::Sym && peek().text == sym) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg, const Token& t) const {
    throw ParseError(msg, t.line, t.column);
  }
  void expect(const char* sym) {
    if (!accept(sym)) {
      const Token& t = peek();
      fail(std::string("expected '") + sym + "' but found " +
               (t.type == Tok::End ? std::string("end of input") : "'" + t.text + "'"),
           t);
    }
  }
  static bool isKeyword(const std::string& s) { return s == "G" || s == "F" || s == "U"; }
  std::optional<int> varIndex(const std::string& s) const {
    for (size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == s) return static_cast<int>(i);
    return std::nullopt;
  }

  Formula parseOr() {
    std::vector<Formula> parts{parseAnd()};
    while (accept("|")) parts.push_back(parseAnd());
    return Formula::disj(std::move(parts));
  }

  Formula parseAnd() {
    std::vector<Formula> parts{parseUntil()};
    while (accept("&")) parts.push_back(parseUntil());
    return Formula::conj(std::move(parts));
  }

  Formula parseUntil() {
    Formula lhs = parseUnary();
    while (peek().type == Tok::Ident && peek().text == "U") {
      Token op = next();
      Interval iv = parseInterval(op);
      Formula rhs = parseUnary();
      lhs = Formula::until(iv, lhs, rhs);
    }
    return lhs;
  }

  Interval parseInterval(const Token& op) {
    if (!(peek().type == Tok::Sym && peek().text == "["))
      fail("unbounded temporal operator '" + op.text + "': an interval [a,b] is required", op);
    next();
    double a = parseNumber();
    expect(",");
    double b = parseNumber();
    expect("]");
    if (!(a >= 0.0 && b >= a)) fail("interval bounds must satisfy 0 <= a <= b", op);
    return {a, b};
  }

  double parseNumber() {
    if (peek().type != Tok::Number) fail("expected a number", peek());
    return next().number;
  }

  Formula parseUnary() {
    if (accept("!")) {
      Token at = toks_[pos_ - 1];
      Formula inner = parseUnary();
      try {
        return inner.negate();
      } catch (const std::invalid_argument& e) {
        fail(e.what(), at);
      }
    }
    if (peek().type == Tok::Ident && (peek().text == "G" || peek().text == "F")) {
      Token op = next();
      Interval iv = parseInterval(op);
      Formula inner = parseUnary();
      return op.text == "G" ? Formula::always(iv, inner) : Formula::eventually(iv, inner);
    }
    if (peek().type == Tok::Ident && peek().text == "U") fail("until needs a left operand", peek());
    return parseAtom();
  }

  bool atComparisonOrArith() const {
    if (peek().type != Tok::Sym) return false;
    const auto& t = peek().text;
    return t == "<" || t == ">" || t == "+" || t == "-" || t == "*" || t == "/";
  }

  Formula parseAtom() {
    if (peek().type == Tok::Sym && peek().text == "(") {
      size_t save = pos_;
      std::optional<ParseError> formulaErr;
      try {
        next();
        Formula f = parseOr();
        expect(")");
        if (!atComparisonOrArith()) return f;
      } catch (const ParseError& e) {
        formulaErr = e;
      }
      size_t formulaPos = pos_;
      pos_ = save;
      try {
        return parsePredicateChain();
      } catch (const ParseError& e) {
        // Report whichever reading got further into the input.
        if (formulaErr && formulaPos > pos_) throw *formulaErr;
        throw;
      }
    }
    if (peek().type == Tok::Ident) {
      auto it = defs_.find(peek().text);
      if (it != defs_.end()) {
        next();
        return it->second;
      }
    }
    return parsePredicateChain();
  }

  Formula parsePredicateChain() {
    Token start = peek();
    Linear lhs = parseLinear();
    std::vector<Formula> preds;
    while (peek().type == Tok::Sym && (peek().text == "<" || peek().text == ">")) {
      Token cmp = next();
      Linear rhs = parseLinear();
      Linear diff{lhs.coeffs - rhs.coeffs, lhs.constant - rhs.constant};
      if (cmp.text == "<") diff = {-diff.coeffs, -diff.constant};
      if (diff.isConstant()) fail("comparison has no variables", cmp);
      preds.push_back(Formula::pred({diff.coeffs, diff.constant}));
      lhs = rhs;
    }
    if (preds.empty()) {
      if (peek().type == Tok::Ident && !varIndex(peek().text) && !isKeyword(peek().text))
        fail("unknown variable '" + peek().text + "'", peek());
      fail("expected a comparison '<' or '>'", peek());
    }
    (void)start;
    return Formula::conj(std::move(preds));
  }

  Linear zero() const { return {Eigen::VectorXd::Zero(static_cast<int>(vars_.size())), 0.0}; }

  Linear parseLinear() {
    Linear acc = zero();
    bool first = true;
    while (true) {
      double sign = 1.0;
      if (accept("+")) {
      } else if (accept("-")) {
        sign = -1.0;
      } else if (!first) {
        break;
      }
      Linear t = parseTerm();
      acc.coeffs += sign * t.coeffs;
      acc.constant += sign * t.constant;
      first = false;
    }
    return acc;
  }

  Linear parseTerm() {
    Linear acc = parseFactor();
    while (peek().type == Tok::Sym && (peek().text == "*" || peek().text == "/")) {
      Token op = next();
      Linear rhs = parseFactor();
      if (op.text == "*") {
        if (!acc.isConstant() && !rhs.isConstant()) fail("nonlinear product", op);
        if (acc.isConstant()) std::swap(acc, rhs);
        acc.coeffs *= rhs.constant;
        acc.constant *= rhs.constant;
      } else {
        if (!rhs.isConstant()) fail("division by a variable", op);
        if (rhs.constant == 0.0) fail("division by zero", op);
        acc.coeffs /= rhs.constant;
        acc.constant /= rhs.constant;
      }
    }
    return acc;
  }

  Linear parseFactor() {
    const Token& t = peek();
    if (accept("-")) {
      Linear f = parseFactor();
      return {-f.coeffs, -f.constant};
    }
    if (t.type == Tok::Number) {
      Linear l = zero();
      l.constant = next().number;
      return l;
    }
    if (t.type == Tok::Ident) {
      if (isKeyword(t.text)) fail("unbounded temporal operator '" + t.text + "': an interval [a,b] is required", t);
      auto idx = varIndex(t.text);
      if (!idx) fail("unknown variable '" + t.text + "'", t);
      next();
      Linear l = zero();
      l.coeffs[*idx] = 1.0;
      return l;
    }
    if (accept("(")) {
      Linear l = parseLinear();
      expect(")");
      return l;
    }
    fail(t.type == Tok::End ? "unexpected end of input" : "unexpected '" + t.text + "'", t);
  }
};

}  // namespace

Formula parse_formula(const std::string& text, const std::vector<std::string>& varNames) {
  Parser p(tokenize(text), varNames);
  return p.parseFile();
}

}  // namespace stlsynth
