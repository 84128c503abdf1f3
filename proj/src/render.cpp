#include "chkcc/render.hpp"

#include <stdexcept>

namespace chkcc {

namespace {

// precedence levels for minimal-paren printing
int expr_prec(const Expr &e) {
  switch (e.kind) {
  case ExprKind::Assign: return 1;
  case ExprKind::Ternary: return 2;
  case ExprKind::Binary: {
    const std::string &op = e.text;
    if (op == "||") return 3;
    if (op == "&&") return 4;
    if (op == "|") return 5;
    if (op == "^") return 6;
    if (op == "&") return 7;
    if (op == "==" || op == "!=") return 8;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 9;
    if (op == "<<" || op == ">>") return 10;
    if (op == "+" || op == "-") return 11;
    return 12; // * / %
  }
  case ExprKind::Unary:
  case ExprKind::SizeofExpr: return 13;
  default: return 14; // postfix and primary
  }
}

std::string encode_string(const std::string &s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
    case '\n': out += "\\n"; break;
    case '\t': out += "\\t"; break;
    case '\r': out += "\\r"; break;
    case '\0': out += "\\0"; break;
    case '\\': out += "\\\\"; break;
    case '"': out += "\\\""; break;
    default: out += c; break;
    }
  }
  out += '"';
  return out;
}

const char *scalar_name(ScalarKind k) {
  switch (k) {
  case ScalarKind::Void: return "void";
  case ScalarKind::Char: return "char";
  case ScalarKind::SChar: return "signed char";
  case ScalarKind::UChar: return "unsigned char";
  case ScalarKind::Short: return "short";
  case ScalarKind::UShort: return "unsigned short";
  case ScalarKind::Int: return "int";
  case ScalarKind::UInt: return "unsigned int";
  case ScalarKind::Long: return "long";
  case ScalarKind::ULong: return "unsigned long";
  }
  return "int";
}

std::string base_spelling(const BaseType &b) {
  std::string out;
  if (b.is_const) out += "const ";
  if (!b.spelling.empty()) out += b.spelling;
  else if (b.is_record) out += "struct " + b.record_name;
  else if (b.is_opaque) out += b.record_name;
  else out += scalar_name(b.scalar);
  return out;
}

const char *checked_native_name(PtrKind k) {
  switch (k) {
  case PtrKind::Ptr: return "_Ptr";
  case PtrKind::ArrayPtr: return "_Array_ptr";
  case PtrKind::NtArrayPtr: return "_Nt_array_ptr";
  default: return "";
  }
}

const char *checked_macro_name(PtrKind k) {
  switch (k) {
  case PtrKind::Ptr: return "ptr";
  case PtrKind::ArrayPtr: return "array_ptr";
  case PtrKind::NtArrayPtr: return "nt_array_ptr";
  default: return "";
  }
}

void render_expr_prec(const Expr &e, int min_prec, std::string &out);

void render_operand(const ExprPtr &e, int min_prec, std::string &out) {
  if (!e) {
    out += "0";
    return;
  }
  render_expr_prec(*e, min_prec, out);
}

void render_expr_prec(const Expr &e, int min_prec, std::string &out) {
  int prec = expr_prec(e);
  bool paren = prec < min_prec;
  if (paren) out += '(';
  switch (e.kind) {
  case ExprKind::IntLit:
    out += e.raw.empty() ? std::to_string(e.int_value) : e.raw;
    break;
  case ExprKind::CharLit:
    if (!e.raw.empty()) out += e.raw;
    else out += std::to_string(e.int_value);
    break;
  case ExprKind::StrLit:
    out += e.raw.empty() ? encode_string(e.text) : e.raw;
    break;
  case ExprKind::Ident:
    out += e.text;
    break;
  case ExprKind::Unary: {
    out += e.text;
    size_t before = out.size();
    std::string inner;
    render_operand(e.a, 13, inner);
    // avoid `--x` / `&&x` when a sign-like prefix meets an identical one
    if (!inner.empty() && !e.text.empty() && inner[0] == e.text.back() &&
        (inner[0] == '-' || inner[0] == '&' || inner[0] == '+'))
      out += ' ';
    (void)before;
    out += inner;
    break;
  }
  case ExprKind::Binary:
    render_operand(e.a, prec, out);
    out += ' ';
    out += e.text;
    out += ' ';
    render_operand(e.b, prec + 1, out);
    break;
  case ExprKind::Assign:
    render_operand(e.a, prec + 1, out);
    out += ' ';
    out += e.text;
    out += ' ';
    render_operand(e.b, prec, out);
    break;
  case ExprKind::PostIncDec:
    render_operand(e.a, 14, out);
    out += e.text;
    break;
  case ExprKind::Index:
    render_operand(e.a, 14, out);
    out += '[';
    render_operand(e.b, 0, out);
    out += ']';
    break;
  case ExprKind::Call: {
    render_operand(e.a, 14, out);
    out += '(';
    bool first = true;
    for (const auto &arg : e.args) {
      if (!first) out += ", ";
      first = false;
      render_operand(arg, 1, out);
    }
    out += ')';
    break;
  }
  case ExprKind::Member:
    render_operand(e.a, 14, out);
    out += e.arrow ? "->" : ".";
    out += e.member;
    break;
  case ExprKind::Ternary:
    render_operand(e.a, 3, out);
    out += " ? ";
    render_operand(e.b, 0, out);
    out += " : ";
    render_operand(e.c, 2, out);
    break;
  case ExprKind::SizeofType:
    out += "sizeof(";
    if (e.sizeof_type) out += render_type_prefix(*e.sizeof_type, Spelling::Native);
    out += ')';
    break;
  case ExprKind::SizeofExpr:
    out += "sizeof(";
    render_operand(e.a, 0, out);
    out += ')';
    break;
  }
  if (paren) out += ')';
}

class Printer {
public:
  Printer(Spelling spelling) : spelling_(spelling) {}

  std::string print_unit(const SourceUnit &unit) {
    if (unit.scope_default == ScopeDefault::Checked) {
      if (spelling_ == Spelling::Legacy)
        throw std::logic_error("legacy render of a checked-scope unit");
      out_ += "#pragma CHECKED_SCOPE on\n";
    }
    if (unit.has_compat_include && spelling_ == Spelling::Macro)
      out_ += "#include \"checkedc_compat.h\"\n";
    print_items(unit.items);
    return out_;
  }

  void print_items(const std::vector<ItemPtr> &items) {
    for (const auto &item : items)
      if (item) print_item(*item);
  }

private:
  Spelling spelling_;
  std::string out_;
  int indent_ = 0;

  void line_start() { out_.append((size_t)indent_ * 2, ' '); }

  void print_item(const Item &item) {
    switch (item.kind) {
    case ItemKind::Verbatim:
      out_ += item.verbatim;
      out_ += '\n';
      break;
    case ItemKind::Record: {
      const RecordDef &r = *item.record;
      out_ += "struct " + r.name + " {\n";
      for (const auto &f : r.fields)
        out_ += "  " + render_decl_spelled(f) + ";\n";
      out_ += "};\n";
      break;
    }
    case ItemKind::Typedef:
      out_ += "typedef " + type_with_name(item.type_def->aliased,
                                          item.type_def->name) + ";\n";
      break;
    case ItemKind::GlobalVar:
      out_ += render_decl_spelled(*item.global);
      out_ += ";\n";
      break;
    case ItemKind::Function:
      print_function(*item.fn);
      break;
    case ItemKind::CondBlock:
      out_ += item.cond_negated ? "#ifndef " : "#ifdef ";
      out_ += item.cond_name;
      out_ += '\n';
      print_items(item.then_items);
      if (item.has_else) {
        out_ += "#else\n";
        print_items(item.else_items);
      }
      out_ += "#endif\n";
      break;
    }
  }

  std::string marker_text(ScopeMarker m) {
    if (m == ScopeMarker::None) return "";
    if (spelling_ == Spelling::Legacy)
      throw std::logic_error("legacy render of a scope marker");
    if (spelling_ == Spelling::Native)
      return m == ScopeMarker::Checked ? "_Checked" : "_Unchecked";
    return m == ScopeMarker::Checked ? "checked_scope" : "unchecked_scope";
  }

  void print_function(const Function &fn) {
    std::string sig;
    if (fn.is_static) sig += "static ";
    sig += type_with_name(fn.ret, fn.name);
    sig += '(';
    if (fn.void_params) {
      sig += "void";
    } else {
      bool first = true;
      for (const auto &p : fn.params) {
        if (!first) sig += ", ";
        first = false;
        sig += render_decl_spelled(p);
      }
      if (fn.varargs) {
        if (!first) sig += ", ";
        sig += "...";
      }
    }
    sig += ')';
    sig += annotation_text(fn.ret_bounds, fn.ret_interface);
    out_ += sig;
    if (!fn.body) {
      out_ += ";\n";
      return;
    }
    if (fn.body_marker != ScopeMarker::None)
      out_ += ' ' + marker_text(fn.body_marker);
    out_ += ' ';
    print_compound(*fn.body, /*own_line=*/false);
  }

  void print_compound(const Stmt &s, bool own_line) {
    if (own_line) line_start();
    if (s.marker != ScopeMarker::None) out_ += marker_text(s.marker) + " ";
    out_ += "{\n";
    ++indent_;
    for (const auto &st : s.body)
      if (st) print_stmt(*st);
    --indent_;
    line_start();
    out_ += "}\n";
  }

  void print_stmt(const Stmt &s) {
    switch (s.kind) {
    case StmtKind::Compound:
      print_compound(s, /*own_line=*/true);
      return;
    case StmtKind::CondBlock:
      out_ += s.cond_negated ? "#ifndef " : "#ifdef ";
      out_ += s.cond_name;
      out_ += '\n';
      for (const auto &st : s.body)
        if (st) print_stmt(*st);
      if (s.has_else) {
        out_ += "#else\n";
        for (const auto &st : s.else_body)
          if (st) print_stmt(*st);
      }
      out_ += "#endif\n";
      return;
    default:
      break;
    }
    line_start();
    print_stmt_inline(s);
    out_ += '\n';
  }

  // statement text without trailing newline; nested simple statements stay
  // on the same line
  void print_stmt_inline(const Stmt &s) {
    switch (s.kind) {
    case StmtKind::Empty:
      out_ += ';';
      break;
    case StmtKind::ExprStmt:
      if (s.value) render_expr_prec(*s.value, 0, out_);
      out_ += ';';
      break;
    case StmtKind::Return:
      out_ += "return";
      if (s.value) {
        out_ += ' ';
        render_expr_prec(*s.value, 0, out_);
      }
      out_ += ';';
      break;
    case StmtKind::DeclStmt:
      out_ += render_decl_spelled(*s.decl);
      out_ += ';';
      break;
    case StmtKind::If:
      out_ += "if (";
      if (s.cond) render_expr_prec(*s.cond, 0, out_);
      out_ += ") ";
      print_substmt(s.then_stmt);
      if (s.else_stmt) {
        out_ += " else ";
        print_substmt(s.else_stmt);
      }
      break;
    case StmtKind::While:
      out_ += "while (";
      if (s.cond) render_expr_prec(*s.cond, 0, out_);
      out_ += ") ";
      print_substmt(s.loop_body);
      break;
    case StmtKind::For:
      out_ += "for (";
      if (s.init_decl) {
        out_ += render_decl_spelled(*s.init_decl);
        out_ += ';';
      } else {
        if (s.init_expr) render_expr_prec(*s.init_expr, 0, out_);
        out_ += ';';
      }
      out_ += ' ';
      if (s.cond) render_expr_prec(*s.cond, 0, out_);
      out_ += "; ";
      if (s.step_expr) render_expr_prec(*s.step_expr, 0, out_);
      out_ += ") ";
      print_substmt(s.loop_body);
      break;
    case StmtKind::Compound:
    case StmtKind::CondBlock:
      // handled by print_stmt
      break;
    }
  }

  void print_substmt(const StmtPtr &s) {
    if (!s) {
      out_ += ';';
      return;
    }
    if (s->kind == StmtKind::Compound) {
      if (s->marker != ScopeMarker::None) out_ += marker_text(s->marker) + " ";
      out_ += "{\n";
      ++indent_;
      for (const auto &st : s->body)
        if (st) print_stmt(*st);
      --indent_;
      line_start();
      out_ += '}';
      return;
    }
    if (s->kind == StmtKind::CondBlock) {
      // conditional blocks need their own lines; wrap in a block
      out_ += "{\n";
      ++indent_;
      print_stmt(*s);
      --indent_;
      line_start();
      out_ += '}';
      return;
    }
    print_stmt_inline(*s);
  }

  std::string render_decl_spelled(const Decl &d) {
    std::string out;
    if (d.is_static) out += "static ";
    out += type_with_name(d.type, d.name);
    if (d.array_size) out += "[" + std::to_string(*d.array_size) + "]";
    out += annotation_text(d.bounds, d.interface);
    if (d.init.present()) {
      out += " = ";
      if (d.init.is_list) {
        out += '{';
        bool first = true;
        for (const auto &e : d.init.list) {
          if (!first) out += ", ";
          first = false;
          if (e) render_expr_prec(*e, 1, out);
        }
        out += '}';
      } else if (d.init.expr) {
        render_expr_prec(*d.init.expr, 1, out);
      }
    }
    return out;
  }

  std::string type_with_name(const Type &t, const std::string &name) {
    std::string prefix = render_type_prefix(t, spelling_);
    if (name.empty()) return prefix;
    if (!prefix.empty() && prefix.back() == '*') return prefix + name;
    return prefix + " " + name;
  }

  std::string annotation_text(const BoundsExpr &b,
                              const std::optional<InterfaceType> &itype) {
    std::string out;
    if (b.present()) {
      if (spelling_ == Spelling::Legacy)
        throw std::logic_error("legacy render of a bounds annotation");
      out += spelling_ == Spelling::Native ? " : " : " ";
      out += render_bounds(b, spelling_);
    }
    if (itype) {
      if (spelling_ == Spelling::Legacy)
        throw std::logic_error("legacy render of an interface annotation");
      const char *inner = checked_macro_name(itype->kind);
      if (spelling_ == Spelling::Native) {
        out += " : itype(";
        out += inner;
        out += '<' + base_spelling(itype->pointee) + ">)";
      } else {
        out += " atype(";
        out += inner;
        out += '(' + base_spelling(itype->pointee) + "))";
      }
    }
    return out;
  }
};

} // namespace

std::string render_type_prefix(const Type &t, Spelling spelling) {
  if (t.kind == PtrKind::NonPointer) return base_spelling(t.base);
  if (t.kind == PtrKind::PlainPtr) {
    std::string out = base_spelling(t.base) + " *";
    for (int i = 0; i < t.extra_stars; ++i) out += '*';
    return out;
  }
  if (spelling == Spelling::Legacy)
    throw std::logic_error("legacy render of a checked pointer type");
  if (spelling == Spelling::Native)
    return std::string(checked_native_name(t.kind)) + "<" +
           base_spelling(t.base) + ">";
  return std::string(checked_macro_name(t.kind)) + "(" +
         base_spelling(t.base) + ")";
}

std::string render_expr(const Expr &e) {
  std::string out;
  render_expr_prec(e, 0, out);
  return out;
}

std::string render_bounds(const BoundsExpr &b, Spelling spelling) {
  std::string out;
  bool native = spelling == Spelling::Native;
  switch (b.form) {
  case BoundsForm::Unknown:
    return out;
  case BoundsForm::Count:
    out += native ? "count(" : "acount(";
    if (b.e1) render_expr_prec(*b.e1, 0, out);
    out += ')';
    return out;
  case BoundsForm::ByteCount:
    out += native ? "byte_count(" : "abyte_count(";
    if (b.e1) render_expr_prec(*b.e1, 0, out);
    out += ')';
    return out;
  case BoundsForm::Range:
    out += native ? "bounds(" : "abounds(";
    if (b.e1) render_expr_prec(*b.e1, 0, out);
    out += ", ";
    if (b.e2) render_expr_prec(*b.e2, 0, out);
    out += ')';
    return out;
  }
  return out;
}

std::string render_decl(const Decl &d, Spelling spelling) {
  SourceUnit u;
  auto item = std::make_shared<Item>();
  item->kind = ItemKind::GlobalVar;
  item->global = std::make_shared<Decl>(d);
  u.items.push_back(item);
  std::string text = render(u, spelling);
  // strip trailing ";\n"
  if (text.size() >= 2 && text.substr(text.size() - 2) == ";\n")
    text.resize(text.size() - 2);
  return text;
}

std::string render(const SourceUnit &unit, Spelling spelling) {
  Printer p(spelling);
  return p.print_unit(unit);
}

} // namespace chkcc
