#include <cctype>
#include <vector>

#include "liocell/syntax.hpp"

namespace liocell {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column) {}

namespace {

struct SExpr {
  bool is_atom = false;
  std::string atom;
  std::vector<SExpr> items;
  int line = 1;
  int col = 1;
};

class Reader {
 public:
  explicit Reader(std::string_view src) : src_(src) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip_space();
    while (pos_ < src_.size()) {
      out.push_back(read_one());
      skip_space();
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(line_, col_, msg); }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  SExpr read_one() {
    SExpr e;
    e.line = line_;
    e.col = col_;
    char c = src_[pos_];
    if (c == ')') fail("unexpected ')'");
    if (c == '#' || c == '<') {
      if (src_.substr(pos_, 2) != "<-")
        fail("trusted-computing-base syntax is not allowed in programs");
    }
    if (c == '(') {
      advance();
      skip_space();
      while (pos_ < src_.size() && src_[pos_] != ')') {
        e.items.push_back(read_one());
        skip_space();
      }
      if (pos_ >= src_.size()) throw ParseError(e.line, e.col, "unclosed '('");
      advance();
      return e;
    }
    e.is_atom = true;
    while (pos_ < src_.size()) {
      char d = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';')
        break;
      e.atom.push_back(d);
      advance();
    }
    return e;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''))
      return false;
  return true;
}

bool is_tcb_keyword(const std::string& s) {
  static const char* kw[] = {"LIO", "Lb", "Ref", "WrapRef", "unwrap", "diverge",
                             "bottom", "upgradeStore", "writeRef!"};
  for (const char* k : kw)
    if (s == k) return true;
  return false;
}

class Builder {
 public:
  explicit Builder(const Lattice& lat) : lat_(lat) {}

  Term build(const SExpr& e) {
    if (e.is_atom) return atom(e);
    if (e.items.empty()) fail(e, "empty form '()'");
    const SExpr& head = e.items[0];
    if (!head.is_atom) fail(head, "form head must be a keyword");
    const std::string& h = head.atom;
    if (is_tcb_keyword(h)) fail(head, "'" + h + "' is a trusted-computing-base construct");

    if (h == "bool") {
      arity(e, 1);
      const SExpr& v = e.items[1];
      if (v.is_atom && v.atom == "true") return mk::tru();
      if (v.is_atom && v.atom == "false") return mk::fls();
      fail(v, "expected 'true' or 'false'");
    }
    if (h == "unit") {
      arity(e, 0);
      return mk::unit();
    }
    if (h == "var") {
      arity(e, 1);
      return variable(e.items[1]);
    }
    if (h == "lam") {
      if (e.items.size() < 3) fail(e, "lam expects binder(s) and a body");
      Term body = build(e.items.back());
      for (std::size_t i = e.items.size() - 2; i >= 1; --i) {
        body = mk::lam(binder(e.items[i]), body);
      }
      return body;
    }
    if (h == "app") {
      if (e.items.size() < 3) fail(e, "app expects a function and argument(s)");
      Term t = build(e.items[1]);
      for (std::size_t i = 2; i < e.items.size(); ++i) t = mk::app(t, build(e.items[i]));
      return t;
    }
    if (h == "fix") return mk::fix(unary(e));
    if (h == "if") {
      arity(e, 3);
      return mk::ite(build(e.items[1]), build(e.items[2]), build(e.items[3]));
    }
    if (h == "when") {
      arity(e, 2);
      return mk::ite(build(e.items[1]), build(e.items[2]), mk::ret(mk::unit()));
    }
    if (h == "lop") {
      arity(e, 3);
      const SExpr& o = e.items[1];
      LabelOpKind op;
      if (o.is_atom && o.atom == "join") op = LabelOpKind::Join;
      else if (o.is_atom && o.atom == "meet") op = LabelOpKind::Meet;
      else if (o.is_atom && o.atom == "flows") op = LabelOpKind::Flows;
      else fail(o, "expected join, meet or flows");
      return mk::label_op(op, build(e.items[2]), build(e.items[3]));
    }
    if (h == "return") return mk::ret(unary(e));
    if (h == "bind") {
      arity(e, 2);
      return mk::bind(build(e.items[1]), build(e.items[2]));
    }
    if (h == "do") return do_block(e, 1);
    if (h == "seq") {
      if (e.items.size() < 2) fail(e, "seq expects at least one term");
      Term t = build(e.items.back());
      for (std::size_t i = e.items.size() - 2; i >= 1; --i)
        t = mk::seq(build(e.items[i]), t);
      return t;
    }
    if (h == "getLabel") {
      arity(e, 0);
      return mk::get_label();
    }
    if (h == "label") {
      arity(e, 2);
      return mk::label(build(e.items[1]), build(e.items[2]));
    }
    if (h == "unlabel") return mk::unlabel(unary(e));
    if (h == "labelOf") return mk::label_of(unary(e));
    if (h == "toLabeled") {
      arity(e, 2);
      return mk::to_labeled(build(e.items[1]), build(e.items[2]));
    }
    if (h == "newRef") {
      arity(e, 3);
      return mk::new_ref(flavor(e.items[1]), build(e.items[2]), build(e.items[3]));
    }
    if (h == "readRef") {
      arity(e, 2);
      return mk::read_ref(flavor(e.items[1]), build(e.items[2]));
    }
    if (h == "writeRef") {
      arity(e, 3);
      return mk::write_ref(flavor(e.items[1]), build(e.items[2]), build(e.items[3]));
    }
    if (h == "labelOfRef") {
      arity(e, 2);
      return mk::label_of_ref(flavor(e.items[1]), build(e.items[2]));
    }
    if (h == "copyRef") {
      arity(e, 2);
      return mk::copy_ref(build(e.items[1]), build(e.items[2]));
    }
    if (h == "upgrade") {
      arity(e, 2);
      return mk::upgrade(build(e.items[1]), build(e.items[2]));
    }
    if (h == "downgrade") {
      arity(e, 2);
      return mk::downgrade(build(e.items[1]), build(e.items[2]));
    }
    if (h == "withRefs") {
      arity(e, 2);
      return mk::with_refs(build(e.items[1]), build(e.items[2]));
    }
    if (h == "fork") return mk::fork(unary(e));
    if (h == "bag") {
      std::vector<Term> elems;
      for (std::size_t i = 1; i < e.items.size(); ++i) elems.push_back(build(e.items[i]));
      return mk::bag(std::move(elems));
    }
    fail(head, "unknown form '" + h + "'");
  }

 private:
  [[noreturn]] static void fail(const SExpr& e, const std::string& msg) {
    throw ParseError(e.line, e.col, msg);
  }

  static void arity(const SExpr& e, std::size_t n) {
    if (e.items.size() != n + 1)
      fail(e, "'" + e.items[0].atom + "' expects " + std::to_string(n) +
                  " argument(s), got " + std::to_string(e.items.size() - 1));
  }

  Term unary(const SExpr& e) {
    arity(e, 1);
    return build(e.items[1]);
  }

  Flavor flavor(const SExpr& e) {
    if (e.is_atom && e.atom == "fi") return Flavor::FI;
    if (e.is_atom && e.atom == "fs") return Flavor::FS;
    fail(e, "expected reference flavor 'fi' or 'fs'");
  }

  std::string binder(const SExpr& e) {
    if (!e.is_atom || !is_identifier(e.atom)) fail(e, "expected a binder name");
    if (lat_.find(e.atom)) fail(e, "'" + e.atom + "' is a label and cannot be bound");
    if (is_tcb_keyword(e.atom)) fail(e, "'" + e.atom + "' is reserved");
    return e.atom;
  }

  Term variable(const SExpr& e) {
    if (!e.is_atom || !is_identifier(e.atom)) fail(e, "expected a variable name");
    if (e.atom == kWildcard) fail(e, "'_' cannot be referenced");
    return mk::var(e.atom);
  }

  Term atom(const SExpr& e) {
    if (e.atom == "<-") fail(e, "'<-' is only valid inside a do binding");
    if (is_tcb_keyword(e.atom))
      fail(e, "'" + e.atom + "' is a trusted-computing-base construct");
    if (auto l = lat_.find(e.atom)) return mk::label_const(*l);
    return variable(e);
  }

  static bool is_binding(const SExpr& s) {
    return !s.is_atom && s.items.size() == 3 && s.items[1].is_atom &&
           s.items[1].atom == "<-";
  }

  Term do_block(const SExpr& e, std::size_t from) {
    if (from >= e.items.size()) fail(e, "do block needs a final term");
    const SExpr& s = e.items[from];
    if (from + 1 == e.items.size()) {
      if (is_binding(s)) fail(s, "do block cannot end with a binding");
      return build(s);
    }
    Term rest = do_block(e, from + 1);
    if (is_binding(s)) return mk::bind(build(s.items[2]), mk::lam(binder(s.items[0]), rest));
    return mk::seq(build(s), rest);
  }

  const Lattice& lat_;
};

}  // namespace

Term parse_program(std::string_view source, const Lattice& lattice) {
  auto forms = Reader(source).read_all();
  if (forms.empty()) throw ParseError(1, 1, "empty program");
  if (forms.size() > 1)
    throw ParseError(forms[1].line, forms[1].col, "trailing input after program");
  return Builder(lattice).build(forms[0]);
}

}  // namespace liocell
