#include "chkcc/emit.hpp"

#include "chkcc/token.hpp"

namespace chkcc {

namespace {

// --- conditional resolution --------------------------------------------------

struct CondPolicy {
  const std::map<std::string, bool> &known;
  bool preserve_unknown;

  // returns: 1 keep then-branch, 0 keep else-branch, -1 preserve the block
  int decide(const std::string &name, bool negated) const {
    auto it = known.find(name);
    bool defined;
    if (it != known.end()) defined = it->second;
    else if (preserve_unknown) return -1;
    else defined = false;
    bool then_active = negated ? !defined : defined;
    return then_active ? 1 : 0;
  }
};

StmtPtr resolve_stmt(const StmtPtr &s, const CondPolicy &policy);

std::vector<StmtPtr> resolve_stmts(const std::vector<StmtPtr> &stmts,
                                   const CondPolicy &policy) {
  std::vector<StmtPtr> out;
  for (const auto &s : stmts) {
    if (!s) continue;
    if (s->kind == StmtKind::CondBlock) {
      int pick = policy.decide(s->cond_name, s->cond_negated);
      if (pick == 1) {
        auto resolved = resolve_stmts(s->body, policy);
        out.insert(out.end(), resolved.begin(), resolved.end());
        continue;
      }
      if (pick == 0) {
        auto resolved = resolve_stmts(s->else_body, policy);
        out.insert(out.end(), resolved.begin(), resolved.end());
        continue;
      }
      auto copy = std::make_shared<Stmt>(*s);
      copy->body = resolve_stmts(s->body, policy);
      copy->else_body = resolve_stmts(s->else_body, policy);
      out.push_back(std::move(copy));
      continue;
    }
    out.push_back(resolve_stmt(s, policy));
  }
  return out;
}

StmtPtr resolve_stmt(const StmtPtr &s, const CondPolicy &policy) {
  if (!s) return s;
  auto copy = std::make_shared<Stmt>(*s);
  switch (s->kind) {
  case StmtKind::Compound:
    copy->body = resolve_stmts(s->body, policy);
    break;
  case StmtKind::If:
    copy->then_stmt = resolve_stmt(s->then_stmt, policy);
    copy->else_stmt = resolve_stmt(s->else_stmt, policy);
    break;
  case StmtKind::While:
  case StmtKind::For:
    copy->loop_body = resolve_stmt(s->loop_body, policy);
    break;
  default:
    break;
  }
  return copy;
}

std::vector<ItemPtr> resolve_items(const std::vector<ItemPtr> &items,
                                   const CondPolicy &policy) {
  std::vector<ItemPtr> out;
  for (const auto &item : items) {
    if (!item) continue;
    if (item->kind == ItemKind::CondBlock) {
      int pick = policy.decide(item->cond_name, item->cond_negated);
      if (pick == 1) {
        auto resolved = resolve_items(item->then_items, policy);
        out.insert(out.end(), resolved.begin(), resolved.end());
        continue;
      }
      if (pick == 0) {
        auto resolved = resolve_items(item->else_items, policy);
        out.insert(out.end(), resolved.begin(), resolved.end());
        continue;
      }
      auto copy = std::make_shared<Item>(*item);
      copy->then_items = resolve_items(item->then_items, policy);
      copy->else_items = resolve_items(item->else_items, policy);
      out.push_back(std::move(copy));
      continue;
    }
    if (item->kind == ItemKind::Function && item->fn && item->fn->body) {
      auto fn = std::make_shared<Function>(*item->fn);
      Stmt body = *item->fn->body;
      body.body = resolve_stmts(item->fn->body->body, policy);
      fn->body = std::move(body);
      auto copy = std::make_shared<Item>(*item);
      copy->fn = std::move(fn);
      out.push_back(std::move(copy));
      continue;
    }
    out.push_back(item);
  }
  return out;
}

// --- structural lowering -----------------------------------------------------

Type lower_type(const Type &t) {
  Type out = t;
  if (t.is_checked_pointer()) {
    out.kind = PtrKind::PlainPtr;
    out.extra_stars = 0;
  }
  return out;
}

ExprPtr lower_expr(const ExprPtr &e) {
  if (!e) return e;
  auto copy = std::make_shared<Expr>(*e);
  copy->a = lower_expr(e->a);
  copy->b = lower_expr(e->b);
  copy->c = lower_expr(e->c);
  copy->args.clear();
  for (const auto &arg : e->args) copy->args.push_back(lower_expr(arg));
  if (e->kind == ExprKind::SizeofType && e->sizeof_type)
    copy->sizeof_type = std::make_shared<Type>(lower_type(*e->sizeof_type));
  return copy;
}

Decl lower_decl(const Decl &d) {
  Decl out = d;
  out.type = lower_type(d.type);
  out.bounds = BoundsExpr{};
  out.interface.reset();
  if (out.init.present()) {
    Initializer init;
    init.is_list = d.init.is_list;
    init.expr = lower_expr(d.init.expr);
    for (const auto &e : d.init.list) init.list.push_back(lower_expr(e));
    out.init = std::move(init);
  }
  return out;
}

StmtPtr lower_stmt(const StmtPtr &s) {
  if (!s) return s;
  auto copy = std::make_shared<Stmt>(*s);
  copy->marker = ScopeMarker::None;
  copy->cond = lower_expr(s->cond);
  copy->value = lower_expr(s->value);
  copy->init_expr = lower_expr(s->init_expr);
  copy->step_expr = lower_expr(s->step_expr);
  if (s->decl) copy->decl = std::make_shared<Decl>(lower_decl(*s->decl));
  if (s->init_decl)
    copy->init_decl = std::make_shared<Decl>(lower_decl(*s->init_decl));
  copy->body.clear();
  for (const auto &st : s->body) copy->body.push_back(lower_stmt(st));
  copy->else_body.clear();
  for (const auto &st : s->else_body) copy->else_body.push_back(lower_stmt(st));
  copy->then_stmt = lower_stmt(s->then_stmt);
  copy->else_stmt = lower_stmt(s->else_stmt);
  copy->loop_body = lower_stmt(s->loop_body);
  return copy;
}

ItemPtr lower_item(const ItemPtr &item) {
  if (!item) return item;
  auto copy = std::make_shared<Item>(*item);
  switch (item->kind) {
  case ItemKind::GlobalVar:
    copy->global = std::make_shared<Decl>(lower_decl(*item->global));
    break;
  case ItemKind::Function: {
    auto fn = std::make_shared<Function>(*item->fn);
    fn->ret = lower_type(fn->ret);
    fn->ret_bounds = BoundsExpr{};
    fn->ret_interface.reset();
    fn->body_marker = ScopeMarker::None;
    std::vector<Decl> params;
    for (const auto &p : fn->params) params.push_back(lower_decl(p));
    fn->params = std::move(params);
    if (item->fn->body) {
      Stmt body = *item->fn->body;
      body.marker = ScopeMarker::None;
      std::vector<StmtPtr> stmts;
      for (const auto &st : item->fn->body->body) stmts.push_back(lower_stmt(st));
      body.body = std::move(stmts);
      fn->body = std::move(body);
    }
    copy->fn = std::move(fn);
    break;
  }
  case ItemKind::Record: {
    auto rec = std::make_shared<RecordDef>(*item->record);
    for (auto &f : rec->fields) f = lower_decl(f);
    copy->record = std::move(rec);
    break;
  }
  case ItemKind::Typedef: {
    auto td = std::make_shared<TypedefDef>(*item->type_def);
    td->aliased = lower_type(td->aliased);
    copy->type_def = std::move(td);
    break;
  }
  case ItemKind::CondBlock: {
    copy->then_items.clear();
    for (const auto &it : item->then_items)
      copy->then_items.push_back(lower_item(it));
    copy->else_items.clear();
    for (const auto &it : item->else_items)
      copy->else_items.push_back(lower_item(it));
    break;
  }
  default:
    break;
  }
  return copy;
}

} // namespace

SourceUnit resolve_conditionals(const SourceUnit &unit,
                                const std::map<std::string, bool> &known,
                                bool preserve_unknown) {
  CondPolicy policy{known, preserve_unknown};
  SourceUnit out = unit;
  out.items = resolve_items(unit.items, policy);
  return out;
}

SourceUnit lower_to_legacy(const SourceUnit &unit) {
  SourceUnit out;
  out.source_name = unit.source_name;
  out.scope_default = ScopeDefault::Unchecked;
  out.has_compat_include = false;
  for (const auto &item : unit.items) out.items.push_back(lower_item(item));
  return out;
}

std::string emit_strip(const SourceUnit &unit) {
  SourceUnit resolved =
      resolve_conditionals(unit, {{"USE_CHECKEDC", false}}, true);
  return render(lower_to_legacy(resolved), Spelling::Legacy);
}

std::string emit_macro(const SourceUnit &unit) {
  SourceUnit copy = unit;
  copy.has_compat_include = true;
  return render(copy, Spelling::Macro);
}

std::string gen_compat_header() {
  return "#ifndef CHECKEDC_COMPAT_H\n"
         "#define CHECKEDC_COMPAT_H\n"
         "\n"
         "#ifdef USE_CHECKEDC\n"
         "#define ptr(t) _Ptr<t>\n"
         "#define array_ptr(t) _Array_ptr<t>\n"
         "#define nt_array_ptr(t) _Nt_array_ptr<t>\n"
         "#define acount(e) : count(e)\n"
         "#define abyte_count(e) : byte_count(e)\n"
         "#define abounds(a, b) : bounds(a, b)\n"
         "#define atype(t) : itype(t)\n"
         "#define checked_scope _Checked\n"
         "#define unchecked_scope _Unchecked\n"
         "#else\n"
         "#define ptr(t) t *\n"
         "#define array_ptr(t) t *\n"
         "#define nt_array_ptr(t) t *\n"
         "#define acount(e)\n"
         "#define abyte_count(e)\n"
         "#define abounds(a, b)\n"
         "#define atype(t)\n"
         "#define checked_scope\n"
         "#define unchecked_scope\n"
         "#endif\n"
         "\n"
         "#endif\n";
}

// --- textual macro expansion ---------------------------------------------------

namespace {

struct Expander {
  const std::vector<Token> &toks;
  bool checked;
  DiagList &diags;
  std::string out;
  bool at_line_start = true;

  explicit Expander(const std::vector<Token> &t, bool c, DiagList &d)
      : toks(t), checked(c), diags(d) {}

  // true once emitted text no longer tracks the original token adjacency
  bool dirty_ = false;

  void emit_tok(const Token &t) {
    if (!t.leading.empty()) out += t.leading;
    else if (dirty_ && !out.empty() && needs_gap(t.text)) out += ' ';
    out += t.text;
    dirty_ = false;
  }

  void emit_text(const std::string &text) {
    if (!out.empty() && needs_gap(text)) out += ' ';
    out += text;
    dirty_ = true;
  }

  // carries the trigger token's leading trivia into an expansion
  void emit_lead(const Token &t) {
    if (!t.leading.empty()) {
      out += t.leading;
    }
  }

  bool needs_gap(const std::string &next) const {
    if (out.empty() || next.empty()) return false;
    char prev = out.back();
    char c = next[0];
    if (prev == '\n' || prev == ' ' || prev == '\t') return false;
    if (prev == '>' && c == '>') return true; // keep `> >` from lexing as `>>`
    if (c == ',' || c == ';' || c == ')' || c == ']' || c == '(') return false;
    if (c == '<' || c == '>') return false;
    if (prev == '(' || prev == '[' || prev == '<') return false;
    return true;
  }

  size_t line_end(size_t i) const {
    size_t j = i + 1;
    while (j < toks.size() && toks[j].kind != TokenKind::Eof &&
           !toks[j].starts_line)
      ++j;
    return j;
  }

  void copy_line(size_t i, size_t end) {
    for (size_t k = i; k < end; ++k) emit_tok(toks[k]);
  }

  // Collects the argument token ranges of `name(...)`, starting at the '('.
  // Returns the index one past the closing ')' or 0 on failure.
  size_t collect_args(size_t open,
                      std::vector<std::pair<size_t, size_t>> &args) {
    int depth = 0;
    size_t i = open;
    size_t arg_begin = open + 1;
    for (; i < toks.size() && toks[i].kind != TokenKind::Eof; ++i) {
      const std::string &t = toks[i].text;
      if (toks[i].kind == TokenKind::Punctuation) {
        if (t == "(") {
          ++depth;
          continue;
        }
        if (t == ")") {
          --depth;
          if (depth == 0) {
            if (i > arg_begin) args.push_back({arg_begin, i});
            return i + 1;
          }
          continue;
        }
        if (t == "," && depth == 1) {
          args.push_back({arg_begin, i});
          arg_begin = i + 1;
        }
      }
    }
    return 0;
  }

  // Emits argument tokens, recursively expanding nested compat macros.
  void emit_arg(size_t begin, size_t end, bool itype_interior) {
    size_t i = begin;
    while (i < end) {
      const Token &t = toks[i];
      if (t.kind == TokenKind::Identifier && is_type_macro(t.text) &&
          i + 1 < end && toks[i + 1].is_punct("(")) {
        std::vector<std::pair<size_t, size_t>> args;
        size_t next = collect_args(i + 1, args);
        if (next != 0 && args.size() == 1) {
          if (itype_interior) {
            // Fig. 2 native form: itype(ptr<FILE>)
            emit_text(t.text);
            emit_text("<");
            emit_arg(args[0].first, args[0].second, false);
            emit_text(">");
          } else if (checked) {
            emit_text(native_of(t.text));
            emit_text("<");
            emit_arg(args[0].first, args[0].second, false);
            emit_text(">");
          } else {
            emit_arg(args[0].first, args[0].second, false);
            emit_text("*");
          }
          i = next;
          continue;
        }
      }
      emit_tok(t);
      ++i;
    }
  }

  static bool is_type_macro(const std::string &s) {
    return s == "ptr" || s == "array_ptr" || s == "nt_array_ptr";
  }

  static const char *native_of(const std::string &s) {
    if (s == "ptr") return "_Ptr";
    if (s == "array_ptr") return "_Array_ptr";
    return "_Nt_array_ptr";
  }

  void run() {
    struct CondState {
      bool is_uc;
      bool keep_then;
      bool in_else = false;
      bool outer_emitting;
    };
    std::vector<CondState> stack;
    auto emitting = [&]() {
      for (const auto &s : stack)
        if (s.is_uc && (s.in_else ? s.keep_then : !s.keep_then)) return false;
      return true;
    };

    size_t i = 0;
    while (i < toks.size() && toks[i].kind != TokenKind::Eof) {
      const Token &t = toks[i];

      if (t.is_punct("#") && t.starts_line) {
        size_t end = line_end(i);
        std::string word = i + 1 < toks.size() ? toks[i + 1].text : "";
        std::string arg = i + 2 < toks.size() ? toks[i + 2].text : "";
        if (word == "ifdef" || word == "ifndef") {
          bool is_uc = arg == "USE_CHECKEDC";
          bool defined = checked;
          bool then_active = word == "ifndef" ? !defined : defined;
          stack.push_back({is_uc, is_uc ? then_active : true, false, true});
          if (!is_uc && emitting()) copy_line(i, end);
          else dirty_ = true;
          i = end;
          continue;
        }
        if (word == "else" && !stack.empty()) {
          if (!stack.back().is_uc && emitting()) copy_line(i, end);
          else dirty_ = true;
          stack.back().in_else = true;
          i = end;
          continue;
        }
        if (word == "endif" && !stack.empty()) {
          if (!stack.back().is_uc && emitting()) copy_line(i, end);
          else dirty_ = true;
          stack.pop_back();
          i = end;
          continue;
        }
        if (!emitting()) {
          dirty_ = true;
          i = end;
          continue;
        }
        if (word == "include") {
          std::string line;
          for (size_t k = i; k < end; ++k) line += toks[k].text;
          if (line.find("\"checkedc_compat.h\"") != std::string::npos) {
            dirty_ = true;
            i = end;
            continue;
          }
        }
        if (word == "pragma" && arg == "CHECKED_SCOPE" && !checked) {
          dirty_ = true;
          i = end;
          continue;
        }
        copy_line(i, end);
        i = end;
        continue;
      }

      if (!emitting()) {
        dirty_ = true;
        ++i;
        continue;
      }

      if (t.kind == TokenKind::Identifier) {
        if (t.text == "checked_scope" || t.text == "unchecked_scope") {
          if (checked) {
            emit_lead(t);
            emit_text(t.text == "checked_scope" ? "_Checked" : "_Unchecked");
          } else {
            dirty_ = true;
          }
          ++i;
          continue;
        }
        bool type_macro = is_type_macro(t.text);
        bool ann_macro = t.text == "acount" || t.text == "abyte_count" ||
                         t.text == "abounds" || t.text == "atype";
        if ((type_macro || ann_macro) && i + 1 < toks.size() &&
            toks[i + 1].is_punct("(")) {
          std::vector<std::pair<size_t, size_t>> args;
          size_t next = collect_args(i + 1, args);
          size_t want = t.text == "abounds" ? 2 : 1;
          if (next == 0 || args.size() != want) {
            diags.error("E-MACRO-ARITY",
                        "macro '" + t.text + "' expects " +
                            std::to_string(want) + " argument(s)",
                        t.span);
            return;
          }
          if (type_macro) {
            emit_lead(t);
            if (checked) {
              emit_text(native_of(t.text));
              emit_text("<");
              emit_arg(args[0].first, args[0].second, false);
              emit_text(">");
            } else {
              emit_arg(args[0].first, args[0].second, false);
              emit_text("*");
            }
          } else if (checked) {
            emit_lead(t);
            if (t.text == "acount") {
              emit_text(":");
              emit_text("count");
              emit_text("(");
              emit_arg(args[0].first, args[0].second, false);
              emit_text(")");
            } else if (t.text == "abyte_count") {
              emit_text(":");
              emit_text("byte_count");
              emit_text("(");
              emit_arg(args[0].first, args[0].second, false);
              emit_text(")");
            } else if (t.text == "abounds") {
              emit_text(":");
              emit_text("bounds");
              emit_text("(");
              emit_arg(args[0].first, args[0].second, false);
              emit_text(",");
              emit_arg(args[1].first, args[1].second, false);
              emit_text(")");
            } else { // atype
              emit_text(":");
              emit_text("itype");
              emit_text("(");
              emit_arg(args[0].first, args[0].second, /*itype_interior=*/true);
              emit_text(")");
            }
          }
          else dirty_ = true; // legacy: annotation macros erase to nothing
          i = next;
          continue;
        }
      }

      emit_tok(t);
      ++i;
    }
  }
};

} // namespace

ExpandResult expand_macros(std::string_view source, bool checked) {
  ExpandResult res;
  auto toks = tokenize(source);
  if (!toks.ok()) {
    res.diags = toks.diags;
    return res;
  }
  Expander ex(toks.tokens, checked, res.diags);
  ex.run();
  res.text = std::move(ex.out);
  if (!res.text.empty() && res.text.back() != '\n') res.text += '\n';
  return res;
}

} // namespace chkcc
