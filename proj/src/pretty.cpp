#include "liocell/syntax.hpp"

namespace liocell {

namespace {

const char* flavor_token(Flavor f) { return f == Flavor::FI ? "fi" : "fs"; }

const char* op_token(LabelOpKind op) {
  switch (op) {
    case LabelOpKind::Join: return "join";
    case LabelOpKind::Meet: return "meet";
    case LabelOpKind::Flows: return "flows";
  }
  return "?";
}

void emit(const Term& t, std::string& out);

void form(std::string& out, const char* head, const std::vector<Term>& kids) {
  out += '(';
  out += head;
  for (const auto& k : kids) {
    out += ' ';
    emit(k, out);
  }
  out += ')';
}

void emit(const Term& t, std::string& out) {
  const auto& k = t->kids;
  switch (t->kind) {
    case Kind::True: out += "(bool true)"; return;
    case Kind::False: out += "(bool false)"; return;
    case Kind::Unit: out += "(unit)"; return;
    case Kind::Var: out += t->name; return;
    case Kind::Lam:
      out += "(lam ";
      out += t->name;
      out += ' ';
      emit(k[0], out);
      out += ')';
      return;
    case Kind::App: form(out, "app", k); return;
    case Kind::Fix: form(out, "fix", k); return;
    case Kind::If: form(out, "if", k); return;
    case Kind::LabelConst: out += to_string(t->label); return;
    case Kind::LabelOp:
      out += "(lop ";
      out += op_token(t->op);
      for (const auto& c : k) {
        out += ' ';
        emit(c, out);
      }
      out += ')';
      return;
    case Kind::Return: form(out, "return", k); return;
    case Kind::Bind: form(out, "bind", k); return;
    case Kind::GetLabel: out += "(getLabel)"; return;
    case Kind::MkLabel: form(out, "label", k); return;
    case Kind::Unlabel: form(out, "unlabel", k); return;
    case Kind::LabelOf: form(out, "labelOf", k); return;
    case Kind::ToLabeled: form(out, "toLabeled", k); return;
    case Kind::NewRef:
    case Kind::ReadRef:
    case Kind::WriteRef:
    case Kind::LabelOfRef: {
      bool trusted = t->kind == Kind::WriteRef && t->diverge_on_fail;
      out += trusted ? "#(writeRef! " : "(";
      if (!trusted) out += kind_name(t->kind), out += ' ';
      out += flavor_token(t->flavor);
      for (const auto& c : k) {
        out += ' ';
        emit(c, out);
      }
      out += ')';
      return;
    }
    case Kind::CopyRef: form(out, "copyRef", k); return;
    case Kind::Upgrade: form(out, "upgrade", k); return;
    case Kind::Downgrade: form(out, "downgrade", k); return;
    case Kind::WithRefs: form(out, "withRefs", k); return;
    case Kind::Fork: form(out, "fork", k); return;
    case Kind::Bag: form(out, "bag", k); return;
    case Kind::LioVal:
      out += '#';
      form(out, "LIO", k);
      return;
    case Kind::Labeled:
      out += "#(Lb ";
      out += to_string(t->label);
      out += ' ';
      emit(k[0], out);
      out += ')';
      return;
    case Kind::RefFi:
      out += "#(Ref fi ";
      out += to_string(t->label);
      out += ' ';
      out += std::to_string(t->addr);
      out += ')';
      return;
    case Kind::RefFs:
      out += "#(Ref fs ";
      out += std::to_string(t->addr);
      out += ')';
      return;
    case Kind::WrapRef:
      out += '#';
      form(out, "WrapRef", k);
      return;
    case Kind::Unwrap:
      out += '#';
      form(out, "unwrap", k);
      return;
    case Kind::Diverge: out += "<diverge>"; return;
    case Kind::Bottom: out += "<bottom>"; return;
    case Kind::UpgradeStore:
      out += '#';
      form(out, "upgradeStore", k);
      return;
  }
}

}  // namespace

std::string pretty(const Term& t) {
  std::string out;
  emit(t, out);
  return out;
}

}  // namespace liocell
