// Copyright 2026 The nc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nc/parser.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

namespace nc {

SyntaxError::SyntaxError(const SourceSpan& span,
                         std::vector<std::string> expected,
                         const std::string& message)
    : std::runtime_error(span.file.str() + ":" + std::to_string(span.line) +
                         ":" + std::to_string(span.col) + ": " + message),
      span_(span),
      expected_(std::move(expected)) {}

namespace {

enum class Tok { kEnd, kNumber, kIdent, kKeyword, kPunct };

struct Token {
  Tok kind;
  std::string text;
  SourceSpan span;
};

const std::set<std::string>& keywords() {
  static const std::set<std::string>* k = new std::set<std::string>{
      "def",  "rep",  "nbr",   "foldhood", "if",   "else", "let",
      "in",   "True", "False", "Null",     "Pair", "Cons", "PositiveInfinity"};
  return *k;
}

std::vector<Token> lex(std::string_view src, Symbol file) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  std::size_t line_start = 0;
  auto span_at = [&](std::size_t start, std::size_t end) {
    return SourceSpan{file, start, end, line,
                      static_cast<int>(start - line_start) + 1};
  };
  static const char* const kPuncts[] = {"=>", "==", "!=", "<=", ">=", "&&",
                                        "||", "(",  ")",  "{",  "}",  ",",
                                        "=",  "<",  ">",  "+",  "-",  "*",
                                        "/",  "%",  "!",  ";"};
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++i;
      ++line;
      line_start = i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      if (i + 1 < src.size() && src[i] == '.' &&
          std::isdigit(static_cast<unsigned char>(src[i + 1]))) {
        ++i;
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          i = j;
          while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
        }
      }
      out.push_back({Tok::kNumber, std::string(src.substr(start, i - start)),
                     span_at(start, i)});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) ||
                                src[i] == '_')) {
        ++i;
      }
      std::string word(src.substr(start, i - start));
      Tok kind = keywords().count(word) != 0 ? Tok::kKeyword : Tok::kIdent;
      out.push_back({kind, std::move(word), span_at(start, i)});
      continue;
    }
    bool matched = false;
    for (const char* p : kPuncts) {
      std::string_view pv(p);
      if (src.substr(i, pv.size()) == pv) {
        i += pv.size();
        out.push_back({Tok::kPunct, std::string(pv), span_at(start, i)});
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw SyntaxError(span_at(start, start + 1), {},
                        std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::kEnd, "", span_at(src.size(), src.size())});
  return out;
}

std::string describe(const Token& t) {
  return t.kind == Tok::kEnd ? "end of input" : "'" + t.text + "'";
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const Builtins& builtins)
      : toks_(std::move(tokens)), builtins_(builtins) {}

  void parse_declarations(std::vector<FunctionDecl>* out) {
    while (is_keyword("def")) out->push_back(parse_decl());
  }

  ExprPtr parse_main() {
    if (peek().kind == Tok::kEnd) {
      fail({"expression"}, "missing main expression");
    }
    ExprPtr e = parse_expr();
    expect_end();
    return e;
  }

  void expect_end() {
    if (peek().kind != Tok::kEnd) {
      fail({"end of input"}, "unexpected " + describe(peek()));
    }
  }

  ExprPtr parse_expr() {
    if (is_keyword("let")) {
      SourceSpan span = next().span;
      Symbol x = Symbol(expect_ident());
      expect("=");
      ExprPtr init = parse_expr();
      expect_keyword("in");
      ExprPtr body = parse_expr();
      return Expression::let(x, init, body, span);
    }
    if (lambda_ahead()) return parse_lambda();
    return parse_binary(1);
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool is_punct(std::string_view p, std::size_t k = 0) const {
    return peek(k).kind == Tok::kPunct && peek(k).text == p;
  }
  bool is_keyword(std::string_view w) const {
    return peek().kind == Tok::kKeyword && peek().text == w;
  }

  [[noreturn]] void fail(std::vector<std::string> expected,
                         const std::string& message) const {
    throw SyntaxError(peek().span, std::move(expected), message);
  }

  void expect(std::string_view p) {
    if (!is_punct(p)) {
      fail({std::string(p)},
           "expected '" + std::string(p) + "', got " + describe(peek()));
    }
    next();
  }

  void expect_keyword(std::string_view w) {
    if (!is_keyword(w)) {
      fail({std::string(w)},
           "expected '" + std::string(w) + "', got " + describe(peek()));
    }
    next();
  }

  std::string expect_ident() {
    if (peek().kind != Tok::kIdent) {
      fail({"identifier"}, "expected identifier, got " + describe(peek()));
    }
    return next().text;
  }

  FunctionDecl parse_decl() {
    FunctionDecl d;
    d.span = next().span;
    d.name = Symbol(expect_ident());
    d.params = parse_params();
    if (is_punct("{")) {
      d.body = parse_block();
    } else if (is_punct("=")) {
      next();
      d.body = parse_expr();
    } else {
      fail({"{", "="}, "expected function body, got " + describe(peek()));
    }
    return d;
  }

  std::vector<Symbol> parse_params() {
    expect("(");
    std::vector<Symbol> params;
    if (!is_punct(")")) {
      params.emplace_back(expect_ident());
      while (is_punct(",")) {
        next();
        params.emplace_back(expect_ident());
      }
    }
    expect(")");
    return params;
  }

  ExprPtr parse_block() {
    expect("{");
    ExprPtr e = parse_expr();
    expect("}");
    return e;
  }

  bool lambda_ahead() const {
    if (!is_punct("(")) return false;
    std::size_t k = 1;
    if (peek(k).kind == Tok::kPunct && peek(k).text == ")") {
      return is_punct("=>", k + 1);
    }
    while (true) {
      if (peek(k).kind != Tok::kIdent) return false;
      ++k;
      if (is_punct(")", k)) return is_punct("=>", k + 1);
      if (!is_punct(",", k)) return false;
      ++k;
    }
  }

  ExprPtr parse_lambda() {
    SourceSpan span = peek().span;
    std::vector<Symbol> params = parse_params();
    expect("=>");
    ExprPtr body = is_punct("{") ? parse_block() : parse_expr();
    return Expression::lambda(std::move(params), body, Symbol(), span);
  }

  const BuiltinInfo* infix_at() const {
    if (peek().kind != Tok::kPunct) return nullptr;
    return builtins_.find_infix(peek().text);
  }

  ExprPtr parse_binary(int min_prec) {
    ExprPtr lhs = parse_unary();
    while (true) {
      const BuiltinInfo* op = infix_at();
      if (op == nullptr || op->precedence < min_prec) return lhs;
      SourceSpan span = next().span;
      ExprPtr rhs = parse_binary(op->precedence + 1);
      lhs = Expression::apply(Expression::value(Value::builtin(op), span),
                              {lhs, rhs}, span);
    }
  }

  ExprPtr parse_unary() {
    if (is_punct("!")) {
      SourceSpan span = next().span;
      ExprPtr e = parse_unary();
      return Expression::apply(
          Expression::value(Value::builtin(builtins_.find("not")), span), {e},
          span);
    }
    if (is_punct("-") && !operator_value_ahead()) {
      SourceSpan span = next().span;
      ExprPtr e = parse_unary();
      if (e->kind() == Expression::Kind::kValue && e->value().is_number()) {
        return Expression::value(Value::number(-e->value().as_number()), span);
      }
      return Expression::apply(
          Expression::value(Value::builtin(builtins_.find("neg")), span), {e},
          span);
    }
    return parse_postfix();
  }

  bool operator_value_ahead() const {
    return is_punct(",", 1) || is_punct(")", 1);
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    while (is_punct("(")) {
      SourceSpan span = peek().span;
      std::vector<ExprPtr> args = parse_args();
      e = Expression::apply(e, std::move(args), span);
    }
    return e;
  }

  std::vector<ExprPtr> parse_args() {
    expect("(");
    std::vector<ExprPtr> args;
    if (!is_punct(")")) {
      args.push_back(parse_expr());
      while (is_punct(",")) {
        next();
        args.push_back(parse_expr());
      }
    }
    expect(")");
    return args;
  }

  Value literal_arg() {
    ExprPtr e = parse_expr();
    if (e->kind() != Expression::Kind::kValue) {
      throw SyntaxError(e->span(), {"value"},
                        "constructor arguments must be values");
    }
    return e->value();
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    SourceSpan span = t.span;
    if (t.kind == Tok::kNumber) {
      next();
      double d = 0;
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), d);
      if (res.ec != std::errc()) fail({"number"}, "bad number " + t.text);
      return Expression::value(Value::number(d), span);
    }
    if (t.kind == Tok::kIdent) {
      next();
      return Expression::variable(Symbol(t.text), span);
    }
    if (t.kind == Tok::kKeyword) {
      const std::string& w = t.text;
      if (w == "True" || w == "False") {
        next();
        return Expression::value(Value::boolean(w == "True"), span);
      }
      if (w == "Null") {
        next();
        return Expression::value(Value::null(), span);
      }
      if (w == "PositiveInfinity") {
        next();
        return Expression::value(
            Value::number(std::numeric_limits<double>::infinity()), span);
      }
      if (w == "Pair" || w == "Cons") {
        next();
        expect("(");
        Value a = literal_arg();
        expect(",");
        Value b = literal_arg();
        expect(")");
        return Expression::value(
            w == "Pair" ? Value::pair(a, b) : Value::cons(a, b), span);
      }
      if (w == "rep") {
        next();
        expect("(");
        ExprPtr init = parse_expr();
        expect(")");
        ExprPtr update = parse_block();
        return Expression::rep(init, update, span);
      }
      if (w == "nbr") {
        next();
        return Expression::nbr(parse_block(), span);
      }
      if (w == "foldhood") {
        next();
        std::vector<ExprPtr> args = parse_args();
        if (args.size() != 3) {
          throw SyntaxError(span, {}, "foldhood takes 3 arguments");
        }
        return Expression::foldhood(args[0], args[1], args[2], span);
      }
      if (w == "if") {
        next();
        expect("(");
        ExprPtr c = parse_expr();
        expect(")");
        ExprPtr a = parse_block();
        if (is_keyword("else")) next();
        ExprPtr b = parse_block();
        return Expression::if_then_else(c, a, b, span);
      }
    }
    if (t.kind == Tok::kPunct) {
      if (t.text == "(") {
        next();
        ExprPtr e = parse_expr();
        expect(")");
        return e;
      }
      if (t.text == "{") return parse_block();
      const BuiltinInfo* op = builtins_.find_infix(t.text);
      if (op != nullptr && (operator_value_ahead() || is_punct("(", 1))) {
        next();
        return Expression::value(Value::builtin(op), span);
      }
    }
    fail({"expression"}, "expected expression, got " + describe(t));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Builtins& builtins_;
};

// Replaces free variables naming functions or built-ins by function values.
class Resolver {
 public:
  Resolver(const std::set<Symbol>& functions, const Builtins& builtins)
      : functions_(functions), builtins_(builtins) {}

  ExprPtr resolve(const ExprPtr& e, std::vector<Symbol>* bound) {
    switch (e->kind()) {
      case Expression::Kind::kVariable: {
        for (Symbol b : *bound) {
          if (b == e->name()) return e;
        }
        if (functions_.count(e->name()) != 0) {
          return Expression::value(Value::defined(e->name()), e->span());
        }
        if (const BuiltinInfo* b = builtins_.find(e->name())) {
          return Expression::value(Value::builtin(b), e->span());
        }
        throw SyntaxError(e->span(), {},
                          "unknown identifier '" + e->name().str() + "'");
      }
      case Expression::Kind::kValue:
        return e;
      case Expression::Kind::kLambda: {
        std::size_t mark = bound->size();
        bound->insert(bound->end(), e->params().begin(), e->params().end());
        ExprPtr body = resolve(e->body(), bound);
        bound->resize(mark);
        return Expression::lambda(e->params(), body, e->tag(), e->span());
      }
      case Expression::Kind::kLet: {
        ExprPtr init = resolve(e->child(0), bound);
        bound->push_back(e->name());
        ExprPtr body = resolve(e->child(1), bound);
        bound->pop_back();
        return Expression::let(e->name(), init, body, e->span());
      }
      default: {
        std::vector<ExprPtr> cs;
        for (const ExprPtr& c : e->children()) cs.push_back(resolve(c, bound));
        return std::make_shared<const Expression>(e->kind(), e->name(),
                                                  e->value(), e->params(),
                                                  std::move(cs), e->span());
      }
    }
  }

 private:
  const std::set<Symbol>& functions_;
  const Builtins& builtins_;
};

}  // namespace

ExprPtr desugar(const ExprPtr& e) {
  switch (e->kind()) {
    case Expression::Kind::kVariable:
    case Expression::Kind::kValue:
      return e;
    case Expression::Kind::kIf: {
      const SourceSpan& s = e->span();
      ExprPtr mux = Expression::value(
          Value::builtin(Builtins::standard().find("mux")), s);
      ExprPtr selected = Expression::apply(
          mux,
          {desugar(e->child(0)),
           Expression::lambda({}, desugar(e->child(1)), Symbol(),
                              e->child(1)->span()),
           Expression::lambda({}, desugar(e->child(2)), Symbol(),
                              e->child(2)->span())},
          s);
      return Expression::apply(selected, {}, s);
    }
    case Expression::Kind::kLet:
      return Expression::apply(
          Expression::lambda({e->name()}, desugar(e->child(1)), Symbol(),
                             e->span()),
          {desugar(e->child(0))}, e->span());
    default: {
      std::vector<ExprPtr> cs;
      bool changed = false;
      for (const ExprPtr& c : e->children()) {
        cs.push_back(desugar(c));
        changed = changed || cs.back() != c;
      }
      if (!changed) return e;
      return std::make_shared<const Expression>(e->kind(), e->name(),
                                                e->value(), e->params(),
                                                std::move(cs), e->span());
    }
  }
}

Program parse_program(std::string_view source, const ParseOptions& options,
                      const std::string& file) {
  const Builtins& builtins =
      options.builtins != nullptr ? *options.builtins : Builtins::standard();
  Program p;
  p.id = options.program_id;
  for (const SourceFile& f : options.prelude) {
    Parser parser(lex(f.text, Symbol(f.name)), builtins);
    parser.parse_declarations(&p.functions);
    parser.expect_end();
  }
  Parser parser(lex(source, Symbol(file)), builtins);
  parser.parse_declarations(&p.functions);
  p.main = parser.parse_main();

  std::set<Symbol> names;
  for (const FunctionDecl& d : p.functions) {
    if (!names.insert(d.name).second) {
      throw SyntaxError(d.span, {}, "duplicate function '" + d.name.str() + "'");
    }
    if (builtins.find(d.name) != nullptr) {
      throw SyntaxError(d.span, {},
                        "'" + d.name.str() + "' is a built-in name");
    }
  }
  Resolver resolver(names, builtins);
  for (FunctionDecl& d : p.functions) {
    std::vector<Symbol> bound = d.params;
    d.body = resolver.resolve(d.body, &bound);
  }
  std::vector<Symbol> none;
  p.main = resolver.resolve(p.main, &none);
  if (options.desugar) {
    for (FunctionDecl& d : p.functions) d.body = desugar(d.body);
    p.main = desugar(p.main);
  }
  if (options.tag) p = tag_anonymous_functions(p);
  return p;
}

ExprPtr parse_expression(std::string_view source, const Program* context,
                         const Builtins* builtins) {
  const Builtins& b = builtins != nullptr ? *builtins : Builtins::standard();
  Parser parser(lex(source, Symbol("<expr>")), b);
  ExprPtr e = parser.parse_main();
  std::set<Symbol> names;
  if (context != nullptr) {
    for (const FunctionDecl& d : context->functions) names.insert(d.name);
  }
  Resolver resolver(names, b);
  std::vector<Symbol> none;
  return desugar(resolver.resolve(e, &none));
}

namespace {

constexpr int kLambdaPrec = 0;
constexpr int kPostfixPrec = 100;

class Printer {
 public:
  std::string print(const ExprPtr& e, int ctx) {
    switch (e->kind()) {
      case Expression::Kind::kVariable:
        return e->name().str();
      case Expression::Kind::kValue:
        return print_value(e->value(), ctx);
      case Expression::Kind::kLambda:
        return wrap(ctx > kLambdaPrec, print_lambda(e));
      case Expression::Kind::kApply:
        return print_apply(e, ctx);
      case Expression::Kind::kRep:
        return "rep(" + print(e->child(0), 0) + ") { " +
               print(e->child(1), 0) + " }";
      case Expression::Kind::kNbr:
        return "nbr { " + print(e->body(), 0) + " }";
      case Expression::Kind::kFoldhood:
        return "foldhood(" + print(e->child(0), 0) + ", " +
               print(e->child(1), 0) + ", " + print(e->child(2), 0) + ")";
      case Expression::Kind::kIf:
        return "if (" + print(e->child(0), 0) + ") { " + print(e->child(1), 0) +
               " } { " + print(e->child(2), 0) + " }";
      case Expression::Kind::kLet:
        return wrap(ctx > kLambdaPrec,
                    "let " + e->name().str() + " = " + print(e->child(0), 0) +
                        " in " + print(e->child(1), 0));
    }
    return "?";
  }

 private:
  static std::string wrap(bool parens, std::string s) {
    return parens ? "(" + s + ")" : s;
  }

  std::string print_lambda(const ExprPtr& e) {
    std::string out = "(";
    for (std::size_t i = 0; i < e->params().size(); ++i) {
      if (i > 0) out += ", ";
      out += e->params()[i].str();
    }
    return out + ") => { " + print(e->body(), 0) + " }";
  }

  std::string print_value(const Value& v, int ctx) {
    switch (v.kind()) {
      case Value::Kind::kBuiltin:
        if (!v.as_builtin().infix.empty()) {
          return wrap(ctx >= kPostfixPrec, v.as_builtin().infix);
        }
        return v.as_builtin().name.str();
      case Value::Kind::kClosure:
        return wrap(ctx > kLambdaPrec, print_lambda(materialize(v.as_closure())));
      case Value::Kind::kNumber:
        if (v.as_number() < 0 && ctx >= kPostfixPrec) {
          return "(" + to_string(v) + ")";
        }
        return to_string(v);
      default:
        return to_string(v);
    }
  }

  std::string print_apply(const ExprPtr& e, int ctx) {
    const ExprPtr& callee = e->callee();
    if (callee->kind() == Expression::Kind::kValue &&
        callee->value().kind() == Value::Kind::kBuiltin &&
        !callee->value().as_builtin().infix.empty() && e->arg_count() == 2) {
      const BuiltinInfo& b = callee->value().as_builtin();
      std::string s = print(e->arg(0), b.precedence) + " " + b.infix + " " +
                      print(e->arg(1), b.precedence + 1);
      return wrap(ctx > b.precedence, s);
    }
    std::string out = print(callee, kPostfixPrec) + "(";
    for (std::size_t i = 0; i < e->arg_count(); ++i) {
      if (i > 0) out += ", ";
      out += print(e->arg(i), 0);
    }
    return out + ")";
  }
};

}  // namespace

std::string pretty_print(const ExprPtr& e) { return Printer().print(e, 0); }

std::string pretty_print(const Program& p) {
  std::string out;
  Printer printer;
  for (const FunctionDecl& d : p.functions) {
    out += "def " + d.name.str() + "(";
    for (std::size_t i = 0; i < d.params.size(); ++i) {
      if (i > 0) out += ", ";
      out += d.params[i].str();
    }
    out += ") {\n  " + printer.print(d.body, 0) + "\n}\n";
  }
  out += printer.print(p.main, 0) + "\n";
  return out;
}

}  // namespace nc
