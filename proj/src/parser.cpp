#include <cctype>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "costlam/syntax.hpp"

namespace costlam {

namespace {

enum class Tok {
  Ident,
  Int,
  Backslash,
  Dot,
  Comma,
  LParen,
  RParen,
  LBracket,
  RBracket,
  LBrace,
  RBrace,
  At,
  Equals,
  Colon,
  Semi,
  Plus,
  Hash,
  Star,
  Bang,
  Arrow,        // ->
  EffectOpen,   // -{
  EffectClose,  // }->
  PreLabel,     // l>
  PostLabel,    // >l
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

const std::set<std::string>& keywords() {
  static const std::set<std::string> k{"let",    "in",     "proj",
                                       "pack",   "newreg", "dispose",
                                       "exists", "forall", "assume"};
  return k;
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto push = [&](Tok k, std::string text, std::size_t len) {
    out.push_back({k, std::move(text), line, col});
    advance(len);
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '-') {
      while (i < s.size() && s[i] != '\n') advance(1);
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      std::string word(s.substr(i, j - i));
      bool pre = j < s.size() && s[j] == '>' &&
                 !(j + 1 < s.size() && ident_start(s[j + 1]));
      if (pre && !keywords().count(word)) {
        push(Tok::PreLabel, word, j - i + 1);
      } else {
        push(Tok::Ident, word, j - i);
      }
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      push(Tok::Int, std::string(s.substr(i, j - i)), j - i);
      continue;
    }
    if (c == '>' && i + 1 < s.size() && ident_start(s[i + 1])) {
      std::size_t j = i + 1;
      while (j < s.size() && ident_char(s[j])) ++j;
      push(Tok::PostLabel, std::string(s.substr(i + 1, j - i - 1)), j - i);
      continue;
    }
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      push(Tok::Arrow, "->", 2);
      continue;
    }
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '{') {
      push(Tok::EffectOpen, "-{", 2);
      continue;
    }
    if (c == '}' && s.substr(i, 3) == "}->") {
      push(Tok::EffectClose, "}->", 3);
      continue;
    }
    Tok k;
    switch (c) {
      case '\\': k = Tok::Backslash; break;
      case '.': k = Tok::Dot; break;
      case ',': k = Tok::Comma; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '[': k = Tok::LBracket; break;
      case ']': k = Tok::RBracket; break;
      case '{': k = Tok::LBrace; break;
      case '}': k = Tok::RBrace; break;
      case '@': k = Tok::At; break;
      case '=': k = Tok::Equals; break;
      case ':': k = Tok::Colon; break;
      case ';': k = Tok::Semi; break;
      case '+': k = Tok::Plus; break;
      case '#': k = Tok::Hash; break;
      case '*': k = Tok::Star; break;
      case '!': k = Tok::Bang; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line,
                         col);
    }
    push(k, std::string(1, c), 1);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

struct RawType;
using RawTypePtr = std::shared_ptr<RawType>;

struct RawType {
  enum Kind { Var, Result, Arrow, Product, Exists } kind;
  int line = 0, col = 0;
  std::string name;                  // Var, Exists binder
  std::vector<RawTypePtr> kids;      // Arrow domain, Product items, Exists body
  RawTypePtr codomain;               // Arrow
  bool region_arrow = false;         // written with -{e}->
  std::vector<std::string> regions;  // ∀ binders
  std::vector<std::string> effect;
  std::optional<std::string> at;  // Product/Exists allocated at a region
};

struct Raw;
using RawPtr = std::shared_ptr<Raw>;

struct Raw {
  enum Kind {
    Var,
    Lam,
    App,
    Let,
    Tuple,
    Proj,
    Pre,
    Post,
    Lit,
    Add,
    NewReg,
    Dispose,
    Pack
  } kind;
  int line = 0, col = 0;
  std::string name;
  std::vector<std::pair<std::string, RawTypePtr>> params;
  std::vector<std::string> regions;
  std::optional<std::vector<std::string>> effect;
  std::optional<std::string> at;
  RawTypePtr pack_type;
  std::vector<RawPtr> kids;
  long index = 0;
  std::uint64_t lit = 0;
};

struct Decl {
  std::string name;
  RawTypePtr type;
  int line, col;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  std::vector<Decl> decls() {
    std::vector<Decl> out;
    while (is_word("assume")) {
      Token kw = next();
      std::string x = ident("declared name");
      expect(Tok::Colon, "':'");
      RawTypePtr t = type();
      expect(Tok::Semi, "';'");
      out.push_back({x, t, kw.line, kw.col});
    }
    return out;
  }

  RawPtr term() {
    const Token& t = peek();
    if (t.kind == Tok::Backslash) return lambda();
    if (is_word("let")) {
      RawPtr r = node(Raw::Let);
      next();
      r->name = ident("let binder");
      expect(Tok::Equals, "'='");
      r->kids.push_back(term());
      expect_word("in");
      r->kids.push_back(term());
      return r;
    }
    if (is_word("newreg") || is_word("dispose")) {
      RawPtr r = node(is_word("newreg") ? Raw::NewReg : Raw::Dispose);
      next();
      r->name = ident("region");
      expect_word("in");
      r->kids.push_back(term());
      return r;
    }
    if (t.kind == Tok::PreLabel) {
      RawPtr r = node(Raw::Pre);
      r->name = next().text;
      r->kids.push_back(term());
      return r;
    }
    return sum();
  }

  RawTypePtr type() {
    if (is_word("exists")) {
      RawTypePtr r = tnode(RawType::Exists);
      next();
      r->name = ident("type variable");
      expect(Tok::Dot, "'.'");
      r->kids.push_back(type());
      return r;
    }
    if (is_word("forall")) {
      Token kw = next();
      std::vector<std::string> rs;
      while (peek().kind == Tok::Ident) rs.push_back(ident("region"));
      expect(Tok::Dot, "'.'");
      RawTypePtr r = type();
      if (r->kind != RawType::Arrow || !r->region_arrow)
        throw ParseError("forall must quantify a region arrow", kw.line,
                         kw.col);
      r->regions = rs;
      return r;
    }
    const Token& start = peek();
    std::vector<RawTypePtr> dom;
    RawTypePtr base;
    if (start.kind == Tok::LParen) {
      next();
      dom.push_back(type());
      while (accept(Tok::Comma)) dom.push_back(type());
      expect(Tok::RParen, "')'");
      if (peek().kind != Tok::Arrow && peek().kind != Tok::EffectOpen) {
        if (dom.size() != 1)
          throw ParseError("type list must be followed by an arrow",
                           start.line, start.col);
        base = dom[0];
        if (peek().kind == Tok::At) {
          next();
          if (base->kind != RawType::Exists)
            throw ParseError("only existential types take '@'", start.line,
                             start.col);
          base->at = ident("region");
        }
        return base;
      }
    } else {
      base = tbase();
      dom.push_back(base);
      if (peek().kind != Tok::Arrow && peek().kind != Tok::EffectOpen)
        return base;
    }
    RawTypePtr r = tnode(RawType::Arrow);
    r->line = start.line;
    r->col = start.col;
    r->kids = dom;
    if (accept(Tok::Arrow)) {
      r->codomain = type();
    } else {
      expect(Tok::EffectOpen, "'-{'");
      r->region_arrow = true;
      r->effect = region_list(Tok::EffectClose);
      expect(Tok::EffectClose, "'}->'");
      r->codomain = type();
    }
    return r;
  }

  void end() {
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    next();
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().col);
  }
  void expect(Tok k, const char* what) {
    if (!accept(k))
      fail(std::string("expected ") + what + " but found '" + peek().text +
           "'");
  }
  bool is_word(const char* w) const {
    return peek().kind == Tok::Ident && peek().text == w;
  }
  void expect_word(const char* w) {
    if (!is_word(w)) fail(std::string("expected '") + w + "'");
    next();
  }
  std::string ident(const char* what) {
    if (peek().kind != Tok::Ident || keywords().count(peek().text))
      fail(std::string("expected ") + what);
    return next().text;
  }
  RawPtr node(Raw::Kind k) {
    auto r = std::make_shared<Raw>();
    r->kind = k;
    r->line = peek().line;
    r->col = peek().col;
    return r;
  }
  RawTypePtr tnode(RawType::Kind k) {
    auto r = std::make_shared<RawType>();
    r->kind = k;
    r->line = peek().line;
    r->col = peek().col;
    return r;
  }

  std::vector<std::string> region_list(Tok close) {
    std::vector<std::string> rs;
    if (peek().kind == close) return rs;
    rs.push_back(ident("region"));
    while (accept(Tok::Comma)) rs.push_back(ident("region"));
    return rs;
  }

  RawPtr lambda() {
    RawPtr r = node(Raw::Lam);
    expect(Tok::Backslash, "'\\'");
    if (accept(Tok::LBracket)) {
      r->regions = region_list(Tok::RBracket);
      expect(Tok::RBracket, "']'");
    }
    while (true) {
      if (peek().kind == Tok::Ident) {
        r->params.emplace_back(ident("parameter"), nullptr);
      } else if (peek().kind == Tok::LParen) {
        next();
        std::string x = ident("parameter");
        expect(Tok::Colon, "':'");
        RawTypePtr t = type();
        expect(Tok::RParen, "')'");
        r->params.emplace_back(x, t);
      } else {
        break;
      }
    }
    if (r->params.empty()) fail("lambda needs at least one parameter");
    if (accept(Tok::Bang)) {
      expect(Tok::LBrace, "'{'");
      r->effect = region_list(Tok::RBrace);
      expect(Tok::RBrace, "'}'");
    }
    expect(Tok::Dot, "'.'");
    r->kids.push_back(term());
    return r;
  }

  RawPtr sum() {
    RawPtr left = postfix();
    while (peek().kind == Tok::Plus) {
      RawPtr r = node(Raw::Add);
      next();
      r->kids = {left, postfix()};
      left = r;
    }
    return left;
  }

  RawPtr postfix() {
    RawPtr e = prefix();
    while (true) {
      if (peek().kind == Tok::At) {
        const Token& after = peek(1);
        if (after.kind == Tok::LParen || after.kind == Tok::LBracket) {
          RawPtr r = node(Raw::App);
          next();
          if (accept(Tok::LBracket)) {
            r->regions = region_list(Tok::RBracket);
            expect(Tok::RBracket, "']'");
          }
          expect(Tok::LParen, "'('");
          r->kids.push_back(e);
          if (peek().kind != Tok::RParen) {
            r->kids.push_back(term());
            while (accept(Tok::Comma)) r->kids.push_back(term());
          }
          expect(Tok::RParen, "')'");
          e = r;
          continue;
        }
        if (after.kind == Tok::Ident) {
          if (e->kind != Raw::Tuple && e->kind != Raw::Pack && e->kind != Raw::Var)
            fail("only tuples are allocated at a region");
          next();
          if (e->kind == Raw::Var) {
            // (x)@r: a parenthesised identifier allocated as a 1-tuple.
            RawPtr t = std::make_shared<Raw>();
            t->kind = Raw::Tuple;
            t->line = e->line;
            t->col = e->col;
            t->kids.push_back(e);
            e = t;
          }
          e->at = ident("region");
          continue;
        }
        fail("expected '(' or a region after '@'");
      }
      if (peek().kind == Tok::PostLabel) {
        RawPtr r = node(Raw::Post);
        r->name = next().text;
        r->kids.push_back(e);
        e = r;
        continue;
      }
      return e;
    }
  }

  RawPtr prefix() {
    if (is_word("proj")) {
      RawPtr r = node(Raw::Proj);
      next();
      if (peek().kind != Tok::Int) fail("expected projection index");
      r->index = std::stol(next().text);
      r->kids.push_back(prefix());
      return r;
    }
    if (is_word("pack")) {
      RawPtr r = node(Raw::Pack);
      next();
      expect(Tok::LBracket, "'['");
      r->pack_type = type();
      expect(Tok::RBracket, "']'");
      r->kids.push_back(prefix());
      return r;
    }
    return atom();
  }

  RawPtr atom() {
    const Token& t = peek();
    if (t.kind == Tok::Ident) {
      RawPtr r = node(Raw::Var);
      r->name = ident("identifier");
      return r;
    }
    if (t.kind == Tok::Hash) {
      RawPtr r = node(Raw::Lit);
      next();
      if (peek().kind != Tok::Int) fail("expected cost literal");
      r->lit = std::stoull(next().text);
      return r;
    }
    if (t.kind == Tok::LParen) {
      RawPtr r = node(Raw::Tuple);
      next();
      if (accept(Tok::RParen)) return r;
      RawPtr first = term();
      if (accept(Tok::RParen)) return first;
      r->kids.push_back(first);
      while (accept(Tok::Comma)) {
        if (peek().kind == Tok::RParen) break;
        r->kids.push_back(term());
      }
      expect(Tok::RParen, "')'");
      return r;
    }
    fail("unexpected '" + t.text + "'");
  }

  RawTypePtr tbase() {
    const Token& t = peek();
    if (t.kind == Tok::Star) {
      RawTypePtr r = tnode(RawType::Product);
      next();
      expect(Tok::LParen, "'('");
      if (peek().kind != Tok::RParen) {
        r->kids.push_back(type());
        while (accept(Tok::Comma)) r->kids.push_back(type());
      }
      expect(Tok::RParen, "')'");
      if (accept(Tok::At)) r->at = ident("region");
      return r;
    }
    if (t.kind == Tok::Ident) {
      RawTypePtr r = tnode(RawType::Var);
      r->name = ident("type");
      if (r->name == "R") r->kind = RawType::Result;
      return r;
    }
    fail("expected a type");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---- conversion from raw trees ----

class Converter {
 public:
  explicit Converter(ParseOptions opts) : opts_(opts) {}

  [[noreturn]] static void fail(const Raw& r, const std::string& msg) {
    throw ParseError(msg, r.line, r.col);
  }
  [[noreturn]] static void fail(const RawType& r, const std::string& msg) {
    throw ParseError(msg, r.line, r.col);
  }

  void check_name(const std::string& s, int line, int col) const {
    if (!opts_.allow_reserved && is_reserved_name(s))
      throw ParseError("reserved name '" + s + "'", line, col);
  }
  Ident use(const std::string& s, const Raw& at) const {
    check_name(s, at.line, at.col);
    return Ident(s);
  }
  Ident binder(const std::string& s, const Raw& at) const {
    check_name(s, at.line, at.col);
    if (s == kHalt.text) fail(at, "'halt' cannot be bound");
    return Ident(s);
  }
  Label label(const std::string& s, const Raw& at) const {
    check_name(s, at.line, at.col);
    return Label(s);
  }
  RegionId region(const std::string& s, int line, int col) const {
    check_name(s, line, col);
    return RegionId(s);
  }

  Type type(const RawType& r) const {
    if (r.at || r.region_arrow) fail(r, "region annotation in a plain type");
    switch (r.kind) {
      case RawType::Var:
        check_name(r.name, r.line, r.col);
        return type_var(TyVar(r.name));
      case RawType::Result:
        return result_type();
      case RawType::Arrow: {
        std::vector<Type> dom;
        for (const auto& k : r.kids) dom.push_back(type(*k));
        return arrow(std::move(dom), type(*r.codomain));
      }
      case RawType::Product: {
        std::vector<Type> items;
        for (const auto& k : r.kids) items.push_back(type(*k));
        return product(std::move(items));
      }
      case RawType::Exists:
        check_name(r.name, r.line, r.col);
        return exists(TyVar(r.name), type(*r.kids[0]));
    }
    fail(r, "bad type");
  }

  rgn::Type region_type(const RawType& r) const {
    switch (r.kind) {
      case RawType::Var:
        if (r.at) fail(r, "type variable allocated at a region");
        check_name(r.name, r.line, r.col);
        return rgn::type_var(TyVar(r.name));
      case RawType::Result:
        fail(r, "R only appears as an arrow result");
      case RawType::Arrow: {
        if (!r.region_arrow) fail(r, "region arrows are written -{e}->");
        if (r.codomain->kind != RawType::Result)
          fail(r, "region arrows return R");
        std::vector<rgn::Type> dom;
        for (const auto& k : r.kids) dom.push_back(region_type(*k));
        std::vector<RegionId> rs;
        for (const auto& x : r.regions) rs.push_back(region(x, r.line, r.col));
        rgn::Effect e;
        for (const auto& x : r.effect) e.insert(region(x, r.line, r.col));
        return rgn::forall(std::move(rs), std::move(dom), std::move(e));
      }
      case RawType::Product: {
        if (r.kids.empty()) {
          if (r.at) fail(r, "the empty product carries no region");
          return rgn::unit_type();
        }
        if (!r.at) fail(r, "nonempty product needs '@region'");
        std::vector<rgn::Type> items;
        for (const auto& k : r.kids) items.push_back(region_type(*k));
        return rgn::product_at(std::move(items), region(*r.at, r.line, r.col));
      }
      case RawType::Exists:
        if (!r.at) fail(r, "existential needs '@region'");
        check_name(r.name, r.line, r.col);
        return rgn::exists_at(TyVar(r.name), region_type(*r.kids[0]),
                              region(*r.at, r.line, r.col));
    }
    fail(r, "bad type");
  }

  std::vector<Param> params(const Raw& r) const {
    if (!r.regions.empty() || r.effect) fail(r, "region lambda outside regions");
    std::vector<Param> ps;
    std::set<std::string> seen;
    for (const auto& [x, t] : r.params) {
      if (!seen.insert(x).second) fail(r, "repeated parameter '" + x + "'");
      ps.push_back(Param{binder(x, r), t ? type(*t) : nullptr});
    }
    return ps;
  }

  src::Term source(const Raw& r) const {
    if (r.at) fail(r, "region annotation outside regions");
    switch (r.kind) {
      case Raw::Var:
        return src::var(use(r.name, r));
      case Raw::Lam:
        return src::lam(params(r), source(*r.kids[0]));
      case Raw::App: {
        if (!r.regions.empty()) fail(r, "region arguments outside regions");
        if (r.kids.size() < 2) fail(r, "application needs an argument");
        std::vector<src::Term> args;
        for (std::size_t i = 1; i < r.kids.size(); ++i)
          args.push_back(source(*r.kids[i]));
        return src::app(source(*r.kids[0]), std::move(args));
      }
      case Raw::Let:
        return src::let(binder(r.name, r), source(*r.kids[0]),
                        source(*r.kids[1]));
      case Raw::Tuple: {
        std::vector<src::Term> items;
        for (const auto& k : r.kids) items.push_back(source(*k));
        return src::tuple(std::move(items));
      }
      case Raw::Proj:
        if (r.index < 1) fail(r, "projection index must be at least 1");
        return src::proj(static_cast<int>(r.index), source(*r.kids[0]));
      case Raw::Pre:
        return src::pre(label(r.name, r), source(*r.kids[0]));
      case Raw::Post:
        return src::post(label(r.name, r), source(*r.kids[0]));
      case Raw::Lit:
        return src::cost_lit(r.lit);
      case Raw::Add:
        return src::cost_add(source(*r.kids[0]), source(*r.kids[1]));
      default:
        fail(r, "construct not available in the source calculus");
    }
  }

  cps::Value cps_value(const Raw& r) const {
    if (r.at) fail(r, "region annotation outside regions");
    switch (r.kind) {
      case Raw::Var:
        return cps::var(use(r.name, r));
      case Raw::Lam:
        return cps::lam(params(r), cps_term(*r.kids[0]));
      case Raw::Tuple: {
        std::vector<cps::Value> items;
        for (const auto& k : r.kids) items.push_back(cps_value(*k));
        return cps::tuple(std::move(items));
      }
      default:
        fail(r, "expected a CPS value");
    }
  }

  cps::Term cps_term(const Raw& r) const {
    switch (r.kind) {
      case Raw::App: {
        if (!r.regions.empty()) fail(r, "region arguments outside regions");
        if (r.kids.size() < 2) fail(r, "application needs an argument");
        std::vector<cps::Value> args;
        for (std::size_t i = 1; i < r.kids.size(); ++i)
          args.push_back(cps_value(*r.kids[i]));
        return cps::app(cps_value(*r.kids[0]), std::move(args));
      }
      case Raw::Let: {
        const Raw& b = *r.kids[0];
        if (b.kind != Raw::Proj) fail(b, "CPS lets bind projections only");
        if (b.index < 1) fail(b, "projection index must be at least 1");
        return cps::let_proj(binder(r.name, r), static_cast<int>(b.index),
                             cps_value(*b.kids[0]), cps_term(*r.kids[1]));
      }
      case Raw::Pre:
        return cps::pre(label(r.name, r), cps_term(*r.kids[0]));
      default:
        fail(r, "expected a CPS term");
    }
  }

  Ident var_only(const Raw& r) const {
    if (r.kind != Raw::Var) fail(r, "expected an identifier");
    return use(r.name, r);
  }

  vn::Bindable vn_bindable(const Raw& b) const {
    if (b.at) fail(b, "region annotation outside regions");
    switch (b.kind) {
      case Raw::Lam:
        return vn::lam(params(b), vn_term(*b.kids[0]));
      case Raw::Tuple: {
        std::vector<Ident> items;
        for (const auto& k : b.kids) items.push_back(var_only(*k));
        return vn::tuple(std::move(items));
      }
      case Raw::Pack: {
        const Raw& inner = *b.kids[0];
        Ident x = inner.kind == Raw::Tuple && inner.kids.size() == 1
                      ? var_only(*inner.kids[0])
                      : var_only(inner);
        Type t = type(*b.pack_type);
        if (!std::holds_alternative<ty::Exists>(t->v))
          fail(b, "pack needs an existential type");
        return vn::pack(x, t);
      }
      case Raw::Proj:
        if (b.index < 1) fail(b, "projection index must be at least 1");
        return vn::proj(static_cast<int>(b.index), var_only(*b.kids[0]));
      default:
        fail(b, "expected a value-named binding");
    }
  }

  vn::Term vn_term(const Raw& r) const {
    switch (r.kind) {
      case Raw::App: {
        if (!r.regions.empty()) fail(r, "region arguments outside regions");
        if (r.kids.size() < 2) fail(r, "application needs an argument");
        std::vector<Ident> args;
        for (std::size_t i = 1; i < r.kids.size(); ++i)
          args.push_back(var_only(*r.kids[i]));
        return vn::app(var_only(*r.kids[0]), std::move(args));
      }
      case Raw::Let:
        return vn::let(binder(r.name, r), vn_bindable(*r.kids[0]),
                       vn_term(*r.kids[1]));
      case Raw::Pre:
        return vn::pre(label(r.name, r), vn_term(*r.kids[0]));
      default:
        fail(r, "expected a value-named term");
    }
  }

  rgn::Bindable region_bindable(const Raw& b) const {
    switch (b.kind) {
      case Raw::Tuple: {
        if (b.kids.empty()) {
          if (b.at) fail(b, "the empty tuple carries no region");
          return rgn::UnitTuple{};
        }
        if (!b.at) fail(b, "nonempty tuple needs '@region'");
        std::vector<Ident> items;
        for (const auto& k : b.kids) items.push_back(var_only(*k));
        return rgn::TupleAt{std::move(items), region(*b.at, b.line, b.col),
                            std::nullopt};
      }
      case Raw::Pack: {
        if (!b.at) fail(b, "pack needs '@region'");
        const Raw& inner = *b.kids[0];
        Ident x = inner.kind == Raw::Tuple && inner.kids.size() == 1
                      ? var_only(*inner.kids[0])
                      : var_only(inner);
        const RawType& t = *b.pack_type;
        if (t.kind != RawType::Exists || t.at)
          fail(b, "pack annotation is written 'exists t. A'");
        check_name(t.name, t.line, t.col);
        return rgn::TupleAt{{x},
                            region(*b.at, b.line, b.col),
                            std::make_pair(TyVar(t.name),
                                           region_type(*t.kids[0]))};
      }
      case Raw::Proj:
        if (b.index < 1) fail(b, "projection index must be at least 1");
        return rgn::Proj{static_cast<int>(b.index), var_only(*b.kids[0])};
      default:
        fail(b, "expected a region binding");
    }
  }

  rgn::Term region_term(const Raw& r) const {
    switch (r.kind) {
      case Raw::App: {
        if (r.kids.size() < 2) fail(r, "application needs an argument");
        std::vector<RegionId> rs;
        for (const auto& x : r.regions) rs.push_back(region(x, r.line, r.col));
        std::vector<Ident> args;
        for (std::size_t i = 1; i < r.kids.size(); ++i)
          args.push_back(var_only(*r.kids[i]));
        return rgn::app(var_only(*r.kids[0]), std::move(rs), std::move(args));
      }
      case Raw::Let:
        if (r.kids[0]->kind == Raw::Lam)
          fail(r, "function definitions must precede the main term");
        return rgn::let(binder(r.name, r), region_bindable(*r.kids[0]),
                        region_term(*r.kids[1]));
      case Raw::Pre:
        return rgn::pre(label(r.name, r), region_term(*r.kids[0]));
      case Raw::NewReg:
        return rgn::newreg(region(r.name, r.line, r.col),
                           region_term(*r.kids[0]));
      case Raw::Dispose:
        return rgn::dispose(region(r.name, r.line, r.col),
                            region_term(*r.kids[0]));
      default:
        fail(r, "expected a region term");
    }
  }

  rgn::Program region_program(const Raw& top) const {
    rgn::Program p;
    const Raw* cur = &top;
    while (cur->kind == Raw::Let && cur->kids[0]->kind == Raw::Lam) {
      const Raw& f = *cur->kids[0];
      rgn::Def d;
      d.name = binder(cur->name, *cur);
      for (const auto& x : f.regions) d.regions.push_back(region(x, f.line, f.col));
      std::set<std::string> seen;
      for (const auto& [x, t] : f.params) {
        if (!seen.insert(x).second) fail(f, "repeated parameter '" + x + "'");
        d.params.push_back(
            rgn::Param{binder(x, f), t ? region_type(*t) : nullptr});
      }
      if (f.effect) {
        rgn::Effect e;
        for (const auto& x : *f.effect) e.insert(region(x, f.line, f.col));
        d.latent = e;
      }
      d.body = region_term(*f.kids[0]);
      p.defs.push_back(std::move(d));
      cur = cur->kids[1].get();
    }
    p.main = region_term(*cur);
    return p;
  }

 private:
  ParseOptions opts_;
};

template <class F>
auto parse_with(std::string_view text, F&& f) {
  Parser p(text);
  RawPtr r = p.term();
  p.end();
  return f(*r);
}

TypeCtx plain_ctx(const std::vector<Decl>& ds, const Converter& c) {
  TypeCtx ctx;
  for (const auto& d : ds) {
    c.check_name(d.name, d.line, d.col);
    ctx.emplace_back(Ident(d.name), c.type(*d.type));
  }
  return ctx;
}

}  // namespace

src::Term parse_source(std::string_view text, ParseOptions opts) {
  Converter c(opts);
  return parse_with(text, [&](const Raw& r) { return c.source(r); });
}

cps::Term parse_cps(std::string_view text, ParseOptions opts) {
  Converter c(opts);
  return parse_with(text, [&](const Raw& r) { return c.cps_term(r); });
}

vn::Term parse_vn(std::string_view text, ParseOptions opts) {
  Converter c(opts);
  return parse_with(text, [&](const Raw& r) { return c.vn_term(r); });
}

HoistProgram parse_hoist(std::string_view text, ParseOptions opts) {
  vn::Term t = parse_vn(text, opts);
  try {
    return to_program(t);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), 1, 1);
  }
}

rgn::Program parse_region(std::string_view text, ParseOptions opts) {
  Converter c(opts);
  return parse_with(text, [&](const Raw& r) { return c.region_program(r); });
}

Type parse_type(std::string_view text, ParseOptions opts) {
  Parser p(text);
  RawTypePtr t = p.type();
  p.end();
  return Converter(opts).type(*t);
}

rgn::Type parse_region_type(std::string_view text, ParseOptions opts) {
  Parser p(text);
  RawTypePtr t = p.type();
  p.end();
  return Converter(opts).region_type(*t);
}

SourceInput parse_source_input(std::string_view text, ParseOptions opts) {
  Parser p(text);
  Converter c(opts);
  auto ds = p.decls();
  RawPtr r = p.term();
  p.end();
  return {plain_ctx(ds, c), c.source(*r)};
}

CpsInput parse_cps_input(std::string_view text, ParseOptions opts) {
  Parser p(text);
  Converter c(opts);
  auto ds = p.decls();
  RawPtr r = p.term();
  p.end();
  return {plain_ctx(ds, c), c.cps_term(*r)};
}

VnInput parse_vn_input(std::string_view text, ParseOptions opts) {
  Parser p(text);
  Converter c(opts);
  auto ds = p.decls();
  RawPtr r = p.term();
  p.end();
  return {plain_ctx(ds, c), c.vn_term(*r)};
}

RegionInput parse_region_input(std::string_view text, ParseOptions opts) {
  Parser p(text);
  Converter c(opts);
  auto ds = p.decls();
  RawPtr r = p.term();
  p.end();
  RegionInput in;
  for (const auto& d : ds) {
    c.check_name(d.name, d.line, d.col);
    in.ctx.emplace_back(Ident(d.name), c.region_type(*d.type));
  }
  in.program = c.region_program(*r);
  return in;
}

}  // namespace costlam
