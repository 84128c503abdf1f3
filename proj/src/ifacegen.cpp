#include "chkcc/ifacegen.hpp"

#include "chkcc/render.hpp"

namespace chkcc {

namespace {

bool is_size_typed(const Decl &p) {
  if (p.type.is_pointer() || p.name.empty()) return false;
  const BaseType &b = p.type.base;
  if (b.is_record || b.is_opaque) return false;
  if (b.spelling == "size_t") return true;
  if (b.spelling == "int" || (b.spelling.empty() && b.scalar == ScalarKind::Int))
    return true;
  // unsigned integer typedefs ending in _t
  bool unsigned_scalar = b.scalar == ScalarKind::UChar ||
                         b.scalar == ScalarKind::UShort ||
                         b.scalar == ScalarKind::UInt ||
                         b.scalar == ScalarKind::ULong;
  if (unsigned_scalar && b.spelling.size() > 2 &&
      b.spelling.substr(b.spelling.size() - 2) == "_t")
    return true;
  return false;
}

bool byte_pointee(const Type &t) {
  if (t.extra_stars > 0 || t.base.is_record || t.base.is_opaque) return false;
  switch (t.base.scalar) {
  case ScalarKind::Void:
  case ScalarKind::Char:
  case ScalarKind::SChar:
  case ScalarKind::UChar:
    return true;
  default:
    return false;
  }
}

const char *confidence_name(StubConfidence c) {
  return c == StubConfidence::High ? "high" : "low";
}

} // namespace

StubResult generate_stubs(const SourceUnit &header) {
  StubResult res;
  res.unit = header;
  res.unit.items.clear();

  for (const auto &item : header.items) {
    if (!item) continue;
    if (item->kind != ItemKind::Function) {
      if (item->kind == ItemKind::GlobalVar || item->kind == ItemKind::Record ||
          item->kind == ItemKind::Typedef || item->kind == ItemKind::Verbatim ||
          item->kind == ItemKind::CondBlock) {
        res.unit.items.push_back(item);
        continue;
      }
      res.unit.items.push_back(item);
      continue;
    }
    const Function &fn = *item->fn;
    if (!fn.is_prototype()) {
      res.diags.error("E-STUBS-INPUT",
                      "'" + fn.name + "' is not a prototype", fn.span);
      res.unit.items.push_back(item);
      continue;
    }

    auto annotated = std::make_shared<Function>(fn);
    for (size_t i = 0; i < annotated->params.size(); ++i) {
      Decl &p = annotated->params[i];
      if (p.type.kind != PtrKind::PlainPtr) continue;
      if (p.annotated()) {
        res.notes.push_back({fn.name, p.name, render_decl(p, Spelling::Macro),
                             "already annotated", StubConfidence::High});
        continue;
      }
      if (p.type.extra_stars > 0) {
        res.notes.push_back({fn.name, p.name, "(none)",
                             "multi-level pointer, no rule",
                             StubConfidence::Low});
        continue;
      }
      const Decl *next =
          i + 1 < annotated->params.size() ? &annotated->params[i + 1] : nullptr;
      const Decl *next2 =
          i + 2 < annotated->params.size() ? &annotated->params[i + 2] : nullptr;
      const Decl *next3 =
          i + 3 < annotated->params.size() ? &annotated->params[i + 3] : nullptr;

      bool two_sizes = next && next2 && is_size_typed(*next) &&
                       is_size_typed(*next2) && !(next3 && is_size_typed(*next3));
      bool one_size = next && is_size_typed(*next) &&
                      !(next2 && is_size_typed(*next2));

      StubNote note;
      note.function = fn.name;
      note.target = p.name;
      if (two_sizes && byte_pointee(p.type)) {
        p.bounds.form = BoundsForm::ByteCount;
        p.bounds.e1 =
            make_binary("*", make_ident(next->name), make_ident(next2->name));
        note.annotation =
            "abyte_count(" + next->name + " * " + next2->name + ")";
        note.rule = "pointer followed by two size-typed parameters";
        note.confidence = StubConfidence::High;
      } else if (one_size) {
        p.bounds.form = BoundsForm::Count;
        p.bounds.e1 = make_ident(next->name);
        note.annotation = "acount(" + next->name + ")";
        note.rule = "pointer followed by one size-typed parameter";
        note.confidence = StubConfidence::High;
      } else {
        InterfaceType it;
        it.kind = PtrKind::Ptr;
        it.pointee = p.type.base;
        p.interface = it;
        note.annotation = "atype(ptr(" + p.type.base.spelling + "))";
        note.rule = "lone object pointer";
        note.confidence = StubConfidence::Low;
      }
      res.notes.push_back(std::move(note));
    }

    if (annotated->ret.kind == PtrKind::PlainPtr &&
        annotated->ret.extra_stars == 0 && !annotated->ret_interface &&
        !annotated->ret_bounds.present()) {
      InterfaceType it;
      it.kind = PtrKind::Ptr;
      it.pointee = annotated->ret.base;
      annotated->ret_interface = it;
      res.notes.push_back({fn.name, "<return>",
                           "atype(ptr(" + annotated->ret.base.spelling + "))",
                           "pointer return value", StubConfidence::Low});
    }

    auto copy = std::make_shared<Item>(*item);
    copy->fn = std::move(annotated);
    res.unit.items.push_back(std::move(copy));
  }
  return res;
}

std::string format_stub_notes(const std::vector<StubNote> &notes) {
  std::string out;
  for (const auto &n : notes) {
    out += n.function;
    out += '.';
    out += n.target;
    out += ": ";
    out += n.annotation;
    out += " [";
    out += confidence_name(n.confidence);
    out += "] ";
    out += n.rule;
    out += '\n';
  }
  return out;
}

} // namespace chkcc
