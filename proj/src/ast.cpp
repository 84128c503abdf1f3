#include "chkcc/ast.hpp"

#include "chkcc/render.hpp"
#include "chkcc/token.hpp"

#include <cstdint>

namespace chkcc {

ExprPtr make_int(long long v, Span sp) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::IntLit;
  e->int_value = v;
  e->span = sp;
  return e;
}

ExprPtr make_ident(std::string name, Span sp) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Ident;
  e->text = std::move(name);
  e->span = sp;
  return e;
}

ExprPtr make_binary(std::string op, ExprPtr lhs, ExprPtr rhs) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Binary;
  e->text = std::move(op);
  e->span = lhs ? lhs->span : Span{};
  e->a = std::move(lhs);
  e->b = std::move(rhs);
  return e;
}

ExprPtr make_call(std::string callee, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Call;
  e->a = make_ident(std::move(callee));
  e->args = std::move(args);
  return e;
}

bool side_effect_free(const Expr &e) {
  switch (e.kind) {
  case ExprKind::Assign:
  case ExprKind::PostIncDec:
  case ExprKind::Call:
    return false;
  case ExprKind::Unary:
    if (e.text == "++" || e.text == "--") return false;
    return !e.a || side_effect_free(*e.a);
  default:
    break;
  }
  if (e.a && !side_effect_free(*e.a)) return false;
  if (e.b && !side_effect_free(*e.b)) return false;
  if (e.c && !side_effect_free(*e.c)) return false;
  for (const auto &arg : e.args)
    if (arg && !side_effect_free(*arg)) return false;
  return true;
}

int scalar_size(ScalarKind k) {
  switch (k) {
  case ScalarKind::Void: return 1;
  case ScalarKind::Char:
  case ScalarKind::SChar:
  case ScalarKind::UChar: return 1;
  case ScalarKind::Short:
  case ScalarKind::UShort: return 2;
  case ScalarKind::Int:
  case ScalarKind::UInt:
  case ScalarKind::Long:
  case ScalarKind::ULong: return 4;
  }
  return 4;
}

int base_size(const BaseType &b, const std::vector<RecordDef *> &records) {
  if (b.is_opaque) return 0;
  if (b.is_record) {
    for (auto *r : records) {
      if (r && r->name == b.record_name) {
        int total = 0;
        for (const auto &f : r->fields) {
          if (f.type.is_pointer()) total += 4;
          else total += base_size(f.type.base, records);
        }
        return total;
      }
    }
    return 0;
  }
  return scalar_size(b.scalar);
}

bool structurally_equal(const SourceUnit &a, const SourceUnit &b) {
  return token_equal_source(render(a, Spelling::Native),
                            render(b, Spelling::Native));
}

std::optional<long long> const_eval(const Expr &e) {
  auto wrap32 = [](long long v) {
    return (long long)(int32_t)(uint32_t)(unsigned long long)v;
  };
  switch (e.kind) {
  case ExprKind::IntLit:
  case ExprKind::CharLit:
    return wrap32(e.int_value);
  case ExprKind::Unary: {
    if (!e.a) return std::nullopt;
    auto v = const_eval(*e.a);
    if (!v) return std::nullopt;
    if (e.text == "-") return wrap32(-*v);
    if (e.text == "!") return *v == 0 ? 1 : 0;
    if (e.text == "~") return wrap32(~*v);
    return std::nullopt;
  }
  case ExprKind::Binary: {
    if (!e.a || !e.b) return std::nullopt;
    auto l = const_eval(*e.a), r = const_eval(*e.b);
    if (!l || !r) return std::nullopt;
    const std::string &op = e.text;
    if (op == "+") return wrap32(*l + *r);
    if (op == "-") return wrap32(*l - *r);
    if (op == "*") return wrap32(*l * *r);
    if (op == "/") return *r == 0 ? std::nullopt : std::optional(wrap32(*l / *r));
    if (op == "%") return *r == 0 ? std::nullopt : std::optional(wrap32(*l % *r));
    if (op == "<<") return wrap32(*l << (*r & 31));
    if (op == ">>") return wrap32(*l >> (*r & 31));
    if (op == "&") return wrap32(*l & *r);
    if (op == "|") return wrap32(*l | *r);
    if (op == "^") return wrap32(*l ^ *r);
    if (op == "==") return *l == *r ? 1 : 0;
    if (op == "!=") return *l != *r ? 1 : 0;
    if (op == "<") return *l < *r ? 1 : 0;
    if (op == "<=") return *l <= *r ? 1 : 0;
    if (op == ">") return *l > *r ? 1 : 0;
    if (op == ">=") return *l >= *r ? 1 : 0;
    if (op == "&&") return (*l != 0 && *r != 0) ? 1 : 0;
    if (op == "||") return (*l != 0 || *r != 0) ? 1 : 0;
    return std::nullopt;
  }
  case ExprKind::SizeofType: {
    if (!e.sizeof_type) return std::nullopt;
    const Type &t = *e.sizeof_type;
    if (t.is_pointer()) return 4;
    if (t.base.is_record || t.base.is_opaque) return std::nullopt;
    return scalar_size(t.base.scalar);
  }
  case ExprKind::Ternary: {
    if (!e.a || !e.b || !e.c) return std::nullopt;
    auto cv = const_eval(*e.a);
    if (!cv) return std::nullopt;
    return *cv != 0 ? const_eval(*e.b) : const_eval(*e.c);
  }
  default:
    return std::nullopt;
  }
}

bool expr_tokens_equal(const Expr &a, const Expr &b) {
  return token_equal_source(render_expr(a), render_expr(b));
}

} // namespace chkcc
