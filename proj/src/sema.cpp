#include "chkcc/sema.hpp"

#include "chkcc/render.hpp"

#include <functional>

namespace chkcc {

namespace {

ExprPtr clone_expr(const ExprPtr &e) { return e; } // expressions are immutable

ExprPtr offset_add(ExprPtr a, ExprPtr b) {
  auto ca = a ? const_eval(*a) : std::nullopt;
  auto cb = b ? const_eval(*b) : std::nullopt;
  if (ca && *ca == 0) return b;
  if (cb && *cb == 0) return a;
  return make_binary("+", std::move(a), std::move(b));
}

ExprPtr times_size(ExprPtr e, int size) {
  if (size == 1) return e;
  return make_binary("*", std::move(e), make_int(size));
}

// Substitutes parameter names with argument expressions (for boundary
// guards evaluated in the caller).
ExprPtr subst_expr(const ExprPtr &e,
                   const std::map<std::string, ExprPtr> &map) {
  if (!e) return e;
  if (e->kind == ExprKind::Ident) {
    auto it = map.find(e->text);
    if (it != map.end()) return it->second;
    return e;
  }
  auto copy = std::make_shared<Expr>(*e);
  copy->a = subst_expr(e->a, map);
  copy->b = subst_expr(e->b, map);
  copy->c = subst_expr(e->c, map);
  copy->args.clear();
  for (const auto &arg : e->args) copy->args.push_back(subst_expr(arg, map));
  return copy;
}

// The view a declaration provides over the memory it points at.
struct View {
  enum Kind { None, Singleton, Counted } kind = None;
  ExprPtr lo_off;   // elements, relative to the declared pointer
  ExprPtr hi_off;
  ExprPtr byte_cap; // byte-granular region instead of [lo, hi)
  bool nt = false;
  int element_size = 1;
};

PtrKind effective_kind(const Decl &d) {
  if (d.type.is_checked_pointer()) return d.type.kind;
  if (d.type.kind == PtrKind::PlainPtr) {
    if (d.interface) return d.interface->kind;
    if (d.bounds.present()) return PtrKind::ArrayPtr;
  }
  return d.type.kind;
}

int pointee_size(const Decl &d, const std::vector<RecordDef *> &records) {
  if (d.type.kind == PtrKind::PlainPtr && d.type.extra_stars > 0) return 4;
  int sz = base_size(d.type.base, records);
  return sz > 0 ? sz : 1;
}

View view_of_decl(const Decl &d, const std::vector<RecordDef *> &records) {
  View v;
  PtrKind k = effective_kind(d);
  v.element_size = pointee_size(d, records);
  if (k == PtrKind::Ptr) {
    v.kind = View::Singleton;
    v.lo_off = make_int(0);
    v.hi_off = make_int(1);
    return v;
  }
  if ((k == PtrKind::ArrayPtr || k == PtrKind::NtArrayPtr) &&
      d.bounds.present()) {
    v.kind = View::Counted;
    v.nt = k == PtrKind::NtArrayPtr;
    switch (d.bounds.form) {
    case BoundsForm::Count:
      v.lo_off = make_int(0);
      v.hi_off = d.bounds.e1;
      break;
    case BoundsForm::ByteCount:
      if (v.element_size == 1) {
        v.lo_off = make_int(0);
        v.hi_off = d.bounds.e1;
      } else {
        v.lo_off = make_int(0);
        v.byte_cap = d.bounds.e1;
      }
      break;
    case BoundsForm::Range: {
      ExprPtr self = make_ident(d.name);
      v.lo_off = make_binary("-", d.bounds.e1, self);
      v.hi_off = make_binary("-", d.bounds.e2, make_ident(d.name));
      break;
    }
    default:
      v.kind = View::None;
      break;
    }
    return v;
  }
  return v;
}

ExprPtr view_capacity_bytes(const View &v) {
  if (v.kind == View::None) return nullptr;
  if (v.byte_cap) return v.byte_cap;
  ExprPtr span = v.hi_off;
  auto lo_const = v.lo_off ? const_eval(*v.lo_off) : std::nullopt;
  if (!(lo_const && *lo_const == 0))
    span = make_binary("-", v.hi_off, v.lo_off);
  return times_size(span, v.element_size);
}

// Inference result: just enough typing to apply the scope rules.
struct ValType {
  bool is_ptr = false;
  PtrKind kind = PtrKind::NonPointer; // effective kind for pointers
  const Decl *root = nullptr;          // governing declaration, if any
  bool string_lit = false;
  int lit_len = 0;
  BaseType base;                       // pointee for pointers
  int extra_stars = 0;
};

struct Sym {
  const Decl *decl = nullptr;
  const Function *fn = nullptr;
  bool is_array = false;
};

class Analyzer {
public:
  explicit Analyzer(const SourceUnit &unit) : unit_(unit) {}

  UnitAnalysis run() {
    collect_records(unit_.items);
    for (const auto &item : unit_.items) top_item(item);
    return std::move(result_);
  }

private:
  const SourceUnit &unit_;
  UnitAnalysis result_;
  std::vector<RecordDef *> records_;
  std::map<std::string, const RecordDef *> record_map_;
  std::map<std::string, const Function *> functions_;
  std::vector<std::map<std::string, Sym>> scopes_{1};
  bool checked_ = false;
  const Function *current_fn_ = nullptr;

  void err(const std::string &code, const std::string &msg, Span sp) {
    result_.diags.error(code, msg, sp);
  }
  void warn(const std::string &code, const std::string &msg, Span sp) {
    result_.diags.warning(code, msg, sp);
  }

  void collect_records(const std::vector<ItemPtr> &items) {
    for (const auto &item : items) {
      if (!item) continue;
      if (item->kind == ItemKind::Record) {
        records_.push_back(item->record.get());
        record_map_[item->record->name] = item->record.get();
      } else if (item->kind == ItemKind::CondBlock) {
        collect_records(item->then_items);
        collect_records(item->else_items);
      }
    }
  }

  const Sym *lookup(const std::string &name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  void declare(const std::string &name, Sym sym, Span sp) {
    auto &scope = scopes_.back();
    if (!name.empty() && scope.count(name))
      err("E-REDECL", "redeclaration of '" + name + "'", sp);
    scope[name] = sym;
  }

  // --- items ---------------------------------------------------------------

  void top_item(const ItemPtr &item) {
    if (!item) return;
    switch (item->kind) {
    case ItemKind::Verbatim:
    case ItemKind::Record:
    case ItemKind::Typedef:
      return;
    case ItemKind::GlobalVar:
      check_decl(*item->global, unit_checked());
      declare(item->global->name, {item->global.get(), nullptr, item->global->array_size.has_value()},
              item->global->span);
      return;
    case ItemKind::Function:
      check_function(*item->fn);
      return;
    case ItemKind::CondBlock: {
      bool old = checked_;
      // the branch that only a legacy compiler sees is unchecked by nature
      for (const auto &it : item->then_items) {
        checked_ = old && !(item->cond_name == "USE_CHECKEDC" && item->cond_negated);
        top_item(it);
      }
      for (const auto &it : item->else_items) {
        checked_ = old && !(item->cond_name == "USE_CHECKEDC" && !item->cond_negated);
        top_item(it);
      }
      checked_ = old;
      return;
    }
    }
  }

  bool unit_checked() const {
    return unit_.scope_default == ScopeDefault::Checked;
  }

  void check_function(const Function &fn) {
    bool dup = functions_.count(fn.name) > 0;
    const Function *prev = dup ? functions_[fn.name] : nullptr;
    if (dup && prev->body && fn.body)
      err("E-REDECL", "redefinition of function '" + fn.name + "'", fn.span);
    // a definition supersedes a prototype for later lookups
    if (!dup || fn.body) functions_[fn.name] = &fn;

    bool fn_checked = unit_checked();
    if (fn.body_marker == ScopeMarker::Checked) fn_checked = true;
    if (fn.body_marker == ScopeMarker::Unchecked) fn_checked = false;

    scopes_.push_back({});
    bool old = checked_;
    checked_ = fn_checked;
    const Function *old_fn = current_fn_;
    current_fn_ = &fn;

    for (const auto &p : fn.params) {
      check_param(p, fn_checked);
      if (!p.name.empty())
        declare(p.name, {&p, nullptr, false}, p.span);
    }
    if (fn.body) check_stmt(*fn.body);

    current_fn_ = old_fn;
    checked_ = old;
    scopes_.pop_back();
  }

  void check_param(const Decl &p, bool fn_checked) {
    check_bounds_wellformed(p);
    if (fn_checked && p.type.kind == PtrKind::PlainPtr && !p.annotated())
      err("E-SCOPE-RAWPTR",
          "unchecked pointer parameter '" + p.name + "' in checked scope",
          p.span);
    if (p.type.kind == PtrKind::NtArrayPtr && p.bounds.form == BoundsForm::ByteCount)
      err("E-CHECKED-UNSUPPORTED",
          "byte_count bounds on nt_array_ptr are not supported", p.span);
  }

  // bounds expressions: side-effect-free, identifiers visible at the site
  void check_bounds_wellformed(const Decl &d) {
    auto check_expr_ids = [&](const ExprPtr &e) {
      if (!e) return;
      if (!side_effect_free(*e)) {
        err("E-BOUNDS-ILLFORMED",
            "bounds expression of '" + d.name + "' has side effects", d.span);
        return;
      }
      std::function<void(const Expr &)> walk = [&](const Expr &x) {
        if (x.kind == ExprKind::Ident && x.text != d.name) {
          if (!lookup(x.text) && !in_current_params(x.text))
            err("E-BOUNDS-UNRESOLVED",
                "bounds of '" + d.name + "' reference unknown identifier '" +
                    x.text + "'",
                d.span);
        }
        if (x.a) walk(*x.a);
        if (x.b) walk(*x.b);
        if (x.c) walk(*x.c);
        for (const auto &arg : x.args)
          if (arg) walk(*arg);
      };
      walk(*e);
    };
    check_expr_ids(d.bounds.e1);
    check_expr_ids(d.bounds.e2);
  }

  bool in_current_params(const std::string &name) const {
    if (!current_fn_) return false;
    for (const auto &p : current_fn_->params)
      if (p.name == name) return true;
    return false;
  }

  // --- statements ------------------------------------------------------------

  void check_stmt(const Stmt &s) {
    switch (s.kind) {
    case StmtKind::Compound: {
      bool old = checked_;
      if (s.marker == ScopeMarker::Checked) checked_ = true;
      if (s.marker == ScopeMarker::Unchecked) checked_ = false;
      scopes_.push_back({});
      for (const auto &st : s.body)
        if (st) check_stmt(*st);
      scopes_.pop_back();
      checked_ = old;
      return;
    }
    case StmtKind::CondBlock: {
      bool old = checked_;
      bool then_unchecked =
          s.cond_name == "USE_CHECKEDC" && s.cond_negated;
      bool else_unchecked =
          s.cond_name == "USE_CHECKEDC" && !s.cond_negated;
      scopes_.push_back({});
      checked_ = old && !then_unchecked;
      for (const auto &st : s.body)
        if (st) check_stmt(*st);
      scopes_.pop_back();
      scopes_.push_back({});
      checked_ = old && !else_unchecked;
      for (const auto &st : s.else_body)
        if (st) check_stmt(*st);
      scopes_.pop_back();
      checked_ = old;
      return;
    }
    case StmtKind::If:
      check_expr_opt(s.cond);
      if (s.then_stmt) check_substmt(*s.then_stmt);
      if (s.else_stmt) check_substmt(*s.else_stmt);
      return;
    case StmtKind::While:
      check_expr_opt(s.cond);
      if (s.loop_body) check_substmt(*s.loop_body);
      return;
    case StmtKind::For: {
      scopes_.push_back({});
      if (s.init_decl) check_local(*s.init_decl);
      check_expr_opt(s.init_expr, /*stmt_position=*/true);
      check_expr_opt(s.cond);
      check_expr_opt(s.step_expr, /*stmt_position=*/true);
      if (s.loop_body) check_substmt(*s.loop_body);
      scopes_.pop_back();
      return;
    }
    case StmtKind::Return:
      check_expr_opt(s.value);
      return;
    case StmtKind::ExprStmt:
      check_expr_opt(s.value, /*stmt_position=*/true);
      return;
    case StmtKind::DeclStmt:
      if (s.decl) check_local(*s.decl);
      return;
    case StmtKind::Empty:
      return;
    }
  }

  void check_substmt(const Stmt &s) {
    if (s.kind == StmtKind::Compound || s.kind == StmtKind::CondBlock) {
      check_stmt(s);
      return;
    }
    scopes_.push_back({});
    check_stmt(s);
    scopes_.pop_back();
  }

  void check_local(const Decl &d) {
    check_decl(d, checked_);
    declare(d.name, {&d, nullptr, d.array_size.has_value()}, d.span);
  }

  void check_decl(const Decl &d, bool in_checked) {
    check_bounds_wellformed(d);
    if (in_checked && d.type.kind == PtrKind::PlainPtr && !d.annotated()) {
      err("E-SCOPE-RAWPTR",
          "unchecked pointer declaration '" + d.name + "' in checked scope",
          d.span);
      return;
    }
    if (d.type.kind == PtrKind::NtArrayPtr &&
        d.bounds.form == BoundsForm::ByteCount) {
      err("E-CHECKED-UNSUPPORTED",
          "byte_count bounds on nt_array_ptr are not supported", d.span);
    }
    if (d.init.present()) {
      if (d.init.is_list) {
        for (const auto &e : d.init.list) check_expr_opt(e);
      } else if (d.init.expr) {
        bool addr_init = in_checked && d.type.kind == PtrKind::Ptr &&
                         d.init.expr->kind == ExprKind::Unary &&
                         d.init.expr->text == "&";
        if (addr_init) {
          // taking the address of an object to seed a singleton pointer
          if (d.init.expr->a) check_expr_opt(d.init.expr->a);
        } else {
          check_expr_opt(d.init.expr);
        }
        if (in_checked && d.type.is_checked_pointer())
          check_init_containment(d);
      }
    }
  }

  // Declared bounds must not widen the initializer's view.
  void check_init_containment(const Decl &d) {
    if (!d.init.expr) return;
    const Expr &init = *d.init.expr;

    // bounds(root + c1, root + c2) over a fixed-size array: decidable
    if (d.bounds.form == BoundsForm::Range && d.bounds.e1 && d.bounds.e2) {
      AccessPath lo = normalize_access(*d.bounds.e1);
      AccessPath hi = normalize_access(*d.bounds.e2);
      if (lo.ok && hi.ok && lo.root == hi.root) {
        const Sym *sym = lookup(lo.root);
        if (sym && sym->is_array && sym->decl) {
          auto lo_c = lo.offset ? const_eval(*lo.offset) : std::nullopt;
          auto hi_c = hi.offset ? const_eval(*hi.offset) : std::nullopt;
          long long n = sym->decl->array_size.value_or(0);
          if (lo_c.has_value() && hi_c.has_value()) {
            long long lo_v = lo_c.value_or(0);
            long long hi_v = hi_c.value_or(0);
            if (lo_v < 0 || hi_v > n || lo_v > hi_v)
              err("E-BOUNDS-WIDEN",
                  "declared bounds of '" + d.name +
                      "' exceed the underlying array",
                  d.span);
            return;
          }
        }
      }
    }

    View declared = view_of_decl(d, records_);
    if (declared.kind != View::Counted) return;

    auto hi_const = declared.hi_off ? const_eval(*declared.hi_off) : std::nullopt;
    auto lo_const = declared.lo_off ? const_eval(*declared.lo_off) : std::nullopt;
    if (lo_const && *lo_const < 0) {
      err("E-BOUNDS-WIDEN", "declared bounds of '" + d.name +
                                "' start below the initializer view",
          d.span);
      return;
    }

    // initializer capacity in elements, when derivable
    std::optional<long long> cap;
    ExprPtr cap_expr;
    if (init.kind == ExprKind::StrLit) {
      cap = (long long)init.text.size();
    } else {
      ValType vt = infer(init);
      if (vt.root) {
        if (lookup_is_array(vt.root)) {
          cap = vt.root->array_size ? std::optional<long long>(*vt.root->array_size)
                                    : std::nullopt;
        } else {
          View src = view_of_decl(*vt.root, records_);
          if (src.kind == View::Counted && src.hi_off) {
            auto c = const_eval(*src.hi_off);
            if (c) cap = *c;
            else cap_expr = src.hi_off;
          }
        }
      }
    }

    if (hi_const && cap) {
      if (*hi_const > *cap)
        err("E-BOUNDS-WIDEN",
            "declared bounds of '" + d.name + "' exceed the initializer view",
            d.span);
      return;
    }
    if (declared.hi_off && cap_expr) {
      if (expr_tokens_equal(*declared.hi_off, *cap_expr)) return;
      err("E-CHECKED-UNSUPPORTED",
          "cannot relate declared bounds of '" + d.name +
              "' to the initializer view",
          d.span);
      return;
    }
    if (!hi_const && !cap && !cap_expr) {
      // e.g. counted view over a parameter copy with matching bounds text
      ValType vt = infer(init);
      if (vt.root) {
        View src = view_of_decl(*vt.root, records_);
        if (src.kind == View::Counted && src.hi_off && declared.hi_off &&
            expr_tokens_equal(*declared.hi_off, *src.hi_off))
          return;
      }
      err("E-CHECKED-UNSUPPORTED",
          "cannot relate declared bounds of '" + d.name +
              "' to the initializer view",
          d.span);
    }
  }

  bool lookup_is_array(const Decl *d) const {
    return d && d->array_size.has_value();
  }

  // --- expressions -------------------------------------------------------------

  void check_expr_opt(const ExprPtr &e, bool stmt_position = false) {
    if (e) check_expr(*e, stmt_position);
  }

  void check_expr(const Expr &e, bool stmt_position = false) {
    if (!checked_) {
      walk_unchecked(e);
      return;
    }
    walk_checked(e, stmt_position);
  }

  // In unchecked scope everything legal legacy C is accepted; we only
  // resolve names so later passes can rely on the symbol table.
  void walk_unchecked(const Expr &e) {
    if (e.kind == ExprKind::Ident) {
      if (!lookup(e.text) && !functions_.count(e.text) &&
          !is_runtime_name(e.text))
        err("E-NAME", "use of undeclared identifier '" + e.text + "'", e.span);
      return;
    }
    if (e.kind == ExprKind::Call && e.a && e.a->kind == ExprKind::Ident) {
      if (!functions_.count(e.a->text) && !is_runtime_name(e.a->text) &&
          !lookup(e.a->text))
        err("E-NAME", "call to undeclared function '" + e.a->text + "'",
            e.span);
      for (const auto &arg : e.args)
        if (arg) walk_unchecked(*arg);
      return;
    }
    if (e.a) walk_unchecked(*e.a);
    if (e.b) walk_unchecked(*e.b);
    if (e.c) walk_unchecked(*e.c);
    for (const auto &arg : e.args)
      if (arg) walk_unchecked(*arg);
  }

  static bool is_runtime_name(const std::string &n) {
    return n == "print_int" || n == "__checked_trap" || n == "memset";
  }

  void walk_checked(const Expr &e, bool stmt_position) {
    switch (e.kind) {
    case ExprKind::IntLit:
    case ExprKind::CharLit:
    case ExprKind::StrLit:
      return;
    case ExprKind::Ident: {
      const Sym *sym = lookup(e.text);
      if (!sym) {
        if (!functions_.count(e.text) && !is_runtime_name(e.text))
          err("E-NAME", "use of undeclared identifier '" + e.text + "'",
              e.span);
        return;
      }
      const Decl *d = sym->decl;
      if (d && d->type.kind == PtrKind::PlainPtr && !d->annotated())
        err("E-SCOPE-RAWPTR",
            "use of unchecked pointer '" + e.text + "' in checked scope",
            e.span);
      return;
    }
    case ExprKind::Unary:
      if (e.text == "*") {
        record_access(e, *e.a, /*is_write=*/false, nullptr, stmt_position);
        return;
      }
      if (e.text == "&") {
        err("E-SCOPE-RAWPTR",
            "address-of produces an unchecked pointer in checked scope",
            e.span);
        return;
      }
      if (e.text == "++" || e.text == "--") {
        check_mutation_target(*e.a);
        return;
      }
      if (e.a) walk_checked(*e.a, false);
      return;
    case ExprKind::Binary: {
      ValType lt = e.a ? infer(*e.a) : ValType{};
      ValType rt = e.b ? infer(*e.b) : ValType{};
      if ((e.text == "+" || e.text == "-")) {
        if (lt.is_ptr && lt.kind == PtrKind::Ptr)
          err("E-PTR-ARITH", "arithmetic on singleton checked pointer", e.span);
        if (rt.is_ptr && rt.kind == PtrKind::Ptr)
          err("E-PTR-ARITH", "arithmetic on singleton checked pointer", e.span);
      }
      if (e.a) walk_checked(*e.a, false);
      if (e.b) walk_checked(*e.b, false);
      return;
    }
    case ExprKind::Assign: {
      if (!e.a) return;
      const Expr &lhs = *e.a;
      if (lhs.kind == ExprKind::Unary && lhs.text == "*") {
        record_access(lhs, *lhs.a, /*is_write=*/true, e.b, stmt_position,
                      &e);
      } else if (lhs.kind == ExprKind::Index) {
        record_access(lhs, lhs, /*is_write=*/true, e.b, stmt_position, &e);
      } else if (lhs.kind == ExprKind::Ident) {
        check_mutation_target(lhs);
      } else if (lhs.kind == ExprKind::Member) {
        walk_checked(lhs, false);
      } else {
        err("E-CHECKED-UNSUPPORTED", "unsupported assignment target", e.span);
      }
      if (e.text != "=" &&
          (lhs.kind == ExprKind::Unary || lhs.kind == ExprKind::Index)) {
        err("E-CHECKED-UNSUPPORTED",
            "compound assignment through a pointer in checked scope", e.span);
      }
      if (e.b) walk_checked(*e.b, false);
      return;
    }
    case ExprKind::PostIncDec:
      if (e.a) check_mutation_target(*e.a);
      return;
    case ExprKind::Index:
      record_access(e, e, /*is_write=*/false, nullptr, stmt_position);
      return;
    case ExprKind::Call:
      check_call(e);
      return;
    case ExprKind::Member:
      if (e.arrow && e.a) {
        ValType t = infer(*e.a);
        if (t.is_ptr && t.kind == PtrKind::PlainPtr && t.root &&
            !t.root->annotated()) {
          err("E-SCOPE-RAWPTR",
              "use of unchecked pointer in checked scope", e.span);
          return;
        }
        // `p->m` is a singleton dereference
        if (t.is_ptr) record_access(e, *e.a, false, nullptr, stmt_position);
        return;
      }
      if (e.a) walk_checked(*e.a, false);
      return;
    case ExprKind::Ternary: {
      ValType bt = e.b ? infer(*e.b) : ValType{};
      ValType ct = e.c ? infer(*e.c) : ValType{};
      if (bt.is_ptr || ct.is_ptr)
        err("E-CHECKED-UNSUPPORTED",
            "conditional expression over pointers in checked scope", e.span);
      if (e.a) walk_checked(*e.a, false);
      if (e.b) walk_checked(*e.b, false);
      if (e.c) walk_checked(*e.c, false);
      return;
    }
    case ExprKind::SizeofType:
    case ExprKind::SizeofExpr:
      return;
    }
  }

  void check_mutation_target(const Expr &target) {
    if (target.kind == ExprKind::Unary && target.text == "*") {
      err("E-CHECKED-UNSUPPORTED",
          "increment/decrement through a pointer in checked scope",
          target.span);
      return;
    }
    if (target.kind == ExprKind::Index) {
      err("E-CHECKED-UNSUPPORTED",
          "increment/decrement through a pointer in checked scope",
          target.span);
      return;
    }
    if (target.kind != ExprKind::Ident) {
      err("E-CHECKED-UNSUPPORTED", "unsupported mutation target", target.span);
      return;
    }
    const Sym *sym = lookup(target.text);
    if (!sym) {
      err("E-NAME", "use of undeclared identifier '" + target.text + "'",
          target.span);
      return;
    }
    const Decl *d = sym->decl;
    if (!d) return;
    if (d->type.kind == PtrKind::PlainPtr && !d->annotated()) {
      err("E-SCOPE-RAWPTR",
          "use of unchecked pointer '" + target.text + "' in checked scope",
          target.span);
      return;
    }
    PtrKind k = effective_kind(*d);
    if (k == PtrKind::ArrayPtr || k == PtrKind::NtArrayPtr) {
      err("E-CHECKED-UNSUPPORTED",
          "rebinding bounds-carrying pointer '" + target.text +
              "' in checked scope",
          target.span);
      return;
    }
    // mutating a variable named in live bounds stays legal: guards evaluate
    // bounds at access time
  }

  // Registers a guarded access. `site` is the full access expression
  // (Index node or the Unary-* node or Member-> node); `ptr_or_index` is
  // either the pointer operand (deref) or the Index node itself.
  void record_access(const Expr &site, const Expr &ptr_or_index, bool is_write,
                     const ExprPtr &written_value, bool stmt_position,
                     const Expr *assign_node = nullptr) {
    AccessPath path;
    ExprPtr index_extra;
    if (ptr_or_index.kind == ExprKind::Index) {
      if (!ptr_or_index.a) return;
      path = normalize_access(*ptr_or_index.a);
      index_extra = ptr_or_index.b;
      if (ptr_or_index.b) walk_checked(*ptr_or_index.b, false);
    } else {
      path = normalize_access(ptr_or_index);
    }
    if (!path.ok) {
      err("E-CHECKED-UNSUPPORTED",
          "checked-scope access is not a root pointer plus offset", site.span);
      return;
    }
    const Sym *sym = lookup(path.root);
    if (!sym || !sym->decl) {
      if (!sym)
        err("E-NAME", "use of undeclared identifier '" + path.root + "'",
            site.span);
      return;
    }
    const Decl &root = *sym->decl;

    if (sym->is_array) {
      // fixed-size arrays carry their own extent; accesses are guarded
      // against [0, N)
      AccessInfo info;
      info.root = &root;
      info.root_name = path.root;
      info.offset = offset_add(path.offset, index_extra);
      info.lo_off = make_int(0);
      info.hi_off = make_int(root.array_size.value_or(0));
      info.element_size = pointee_size(root, records_);
      info.is_write = is_write;
      info.span = site.span;
      result_.accesses[&site] = info;
      return;
    }

    if (!root.type.is_pointer()) {
      err("E-CHECKED-UNSUPPORTED", "dereference of a non-pointer", site.span);
      return;
    }
    if (root.type.kind == PtrKind::PlainPtr && !root.annotated()) {
      err("E-SCOPE-RAWPTR",
          "use of unchecked pointer '" + path.root + "' in checked scope",
          site.span);
      return;
    }
    PtrKind kind = effective_kind(root);
    ExprPtr offset = offset_add(path.offset, index_extra);

    if (kind == PtrKind::Ptr) {
      auto off_const = offset ? const_eval(*offset) : std::optional<long long>(0);
      if (!(off_const && *off_const == 0)) {
        err("E-PTR-ARITH", "arithmetic on singleton checked pointer",
            site.span);
        return;
      }
      if (root.type.base.scalar == ScalarKind::Void && !root.type.base.is_record &&
          !root.type.base.is_opaque && root.type.extra_stars == 0 &&
          root.interface == std::nullopt && site.kind != ExprKind::Member) {
        // fallthrough: member access on opaque handled elsewhere
      }
      AccessInfo info;
      info.root = &root;
      info.root_name = path.root;
      info.offset = make_int(0);
      info.singleton = true;
      info.element_size = pointee_size(root, records_);
      info.is_write = is_write;
      info.span = site.span;
      result_.accesses[&site] = info;
      return;
    }

    // ArrayPtr / NtArrayPtr
    View v = view_of_decl(root, records_);
    if (v.kind != View::Counted) {
      err("E-BOUNDS-MISSING",
          "dereference of '" + path.root + "' without reachable bounds",
          site.span);
      return;
    }
    if (root.type.base.scalar == ScalarKind::Void && !root.type.base.is_record) {
      err("E-DEREF-VOID", "cannot dereference a void pointer", site.span);
      return;
    }

    AccessInfo info;
    info.root = &root;
    info.root_name = path.root;
    info.offset = offset ? offset : make_int(0);
    info.lo_off = v.lo_off;
    info.hi_off = v.hi_off;
    info.byte_cap = v.byte_cap;
    info.element_size = v.element_size;
    info.nt = v.nt;
    info.is_write = is_write;
    info.span = site.span;

    if (is_write && v.nt) {
      // static terminator rule: constant-visible non-zero write at hi
      auto idx_c = info.offset ? const_eval(*info.offset) : std::nullopt;
      auto hi_c = info.hi_off ? const_eval(*info.hi_off) : std::nullopt;
      auto val_c = written_value ? const_eval(*written_value) : std::nullopt;
      bool at_terminator =
          (idx_c && hi_c && *idx_c == *hi_c) ||
          (info.offset && info.hi_off &&
           expr_tokens_equal(*info.offset, *info.hi_off));
      if (at_terminator && val_c && *val_c != 0) {
        err("E-NT-OVERWRITE",
            "write of non-zero value at the null terminator of '" +
                path.root + "'",
            site.span);
        return;
      }
      bool const_value = val_c.has_value();
      if (!const_value && written_value && side_effect_free(*written_value))
        const_value = true; // duplicable without observable effects
      if (!stmt_position && !const_value) {
        err("E-CHECKED-UNSUPPORTED",
            "nt terminator write with side-effectful value outside "
            "statement position",
            site.span);
        return;
      }
      info.hoisted_nt_write = stmt_position && assign_node != nullptr;
    }
    result_.accesses[&site] = info;
  }

  // --- calls ---------------------------------------------------------------

  void check_call(const Expr &e) {
    if (!e.a || e.a->kind != ExprKind::Ident) {
      err("E-CHECKED-UNSUPPORTED", "indirect calls are not supported", e.span);
      return;
    }
    const std::string &name = e.a->text;

    if (name == "memset") {
      check_memset(e);
      return;
    }
    if (name == "print_int" || name == "__checked_trap") {
      for (const auto &arg : e.args)
        if (arg) walk_checked(*arg, false);
      return;
    }

    auto fit = functions_.find(name);
    if (fit == functions_.end()) {
      err("E-NAME", "call to undeclared function '" + name + "'", e.span);
      return;
    }
    const Function &callee = *fit->second;
    if (e.args.size() < callee.params.size() ||
        (e.args.size() > callee.params.size() && !callee.varargs)) {
      err("E-CALL-ARITY", "wrong number of arguments to '" + name + "'",
          e.span);
      return;
    }

    CallBinding binding;
    binding.callee = name;
    binding.span = e.span;

    std::map<std::string, ExprPtr> subst;
    for (size_t i = 0; i < callee.params.size() && i < e.args.size(); ++i)
      if (!callee.params[i].name.empty())
        subst[callee.params[i].name] = e.args[i];

    for (size_t i = 0; i < callee.params.size() && i < e.args.size(); ++i) {
      const Decl &p = callee.params[i];
      const ExprPtr &arg = e.args[i];
      if (!arg) continue;

      bool param_plain_raw =
          p.type.kind == PtrKind::PlainPtr && !p.annotated();
      if (param_plain_raw) {
        ValType at = infer(*arg);
        auto is_null = const_eval(*arg);
        if (at.is_ptr || at.string_lit || (is_null && *is_null == 0)) {
          err("E-SCOPE-RAWPTR",
              "passing a pointer to unchecked parameter '" + p.name +
                  "' of '" + name + "' in checked scope",
              e.span);
          continue;
        }
      }

      // argument expression checks (address-of allowed here as the
      // interface-argument position)
      if (arg->kind == ExprKind::Unary && arg->text == "&") {
        if (!p.annotated() && !p.type.is_checked_pointer())
          err("E-SCOPE-RAWPTR",
              "address-of argument requires a bounds-safe interface",
              arg->span);
        if (arg->a) walk_checked(*arg->a, false);
      } else {
        walk_checked(*arg, false);
      }

      ArgGuard guard = make_arg_guard(p, arg, i, e.span, subst);
      if (guard.nonnull_only || guard.need_bytes)
        binding.guards.push_back(std::move(guard));
    }
    if (!binding.guards.empty()) result_.calls[&e] = binding;
  }

  ArgGuard make_arg_guard(const Decl &p, const ExprPtr &arg, size_t idx,
                          Span call_span,
                          const std::map<std::string, ExprPtr> &subst) {
    ArgGuard g;
    g.arg_index = idx;
    g.arg_pointer = arg;
    g.span = call_span;

    PtrKind pk = effective_kind(p);
    bool interfaced = p.interface.has_value() || (p.type.kind == PtrKind::PlainPtr && p.bounds.present());
    if (pk == PtrKind::Ptr) {
      // non-null contract applies at bounds-safe interfaces only
      if (interfaced) g.nonnull_only = true;
      return g;
    }
    if ((pk == PtrKind::ArrayPtr || pk == PtrKind::NtArrayPtr) &&
        p.bounds.present()) {
      int esz = pointee_size(p, records_);
      switch (p.bounds.form) {
      case BoundsForm::Count:
        g.need_bytes = times_size(subst_expr(p.bounds.e1, subst), esz);
        break;
      case BoundsForm::ByteCount:
        g.need_bytes = subst_expr(p.bounds.e1, subst);
        break;
      case BoundsForm::Range: {
        ExprPtr hi = subst_expr(p.bounds.e2, subst);
        g.need_bytes =
            times_size(make_binary("-", hi, arg), esz);
        break;
      }
      default:
        break;
      }
      if (g.need_bytes) {
        // required size check needs a side-effect-free requirement
        if (!side_effect_free(*g.need_bytes)) {
          err("E-CHECKED-UNSUPPORTED",
              "size argument bound by callee bounds must be side-effect-free",
              call_span);
          g.need_bytes = nullptr;
          return g;
        }
        g.have_bytes = capacity_of_arg(arg, call_span);
        if (!g.have_bytes) {
          err("E-IFACE-UNEVAL",
              "cannot evaluate the argument's view at the call site",
              call_span);
          g.need_bytes = nullptr;
        }
      }
    }
    return g;
  }

  ExprPtr capacity_of_arg(const ExprPtr &arg, Span span) {
    (void)span;
    if (!arg) return nullptr;
    if (arg->kind == ExprKind::StrLit)
      return make_int((long long)arg->text.size());
    if (arg->kind == ExprKind::Unary && arg->text == "&" && arg->a) {
      ValType t = infer(*arg->a);
      int sz = t.base.is_record ? base_size(t.base, records_)
                                : scalar_size(t.base.scalar);
      return make_int(sz > 0 ? sz : 1);
    }
    AccessPath path = normalize_access(*arg);
    if (!path.ok) return nullptr;
    const Sym *sym = lookup(path.root);
    if (!sym || !sym->decl) return nullptr;
    const Decl &root = *sym->decl;
    int esz = pointee_size(root, records_);
    ExprPtr total;
    if (sym->is_array) {
      total = make_int((long long)root.array_size.value_or(0) * esz);
    } else {
      View v = view_of_decl(root, records_);
      total = view_capacity_bytes(v);
      if (!total) return nullptr;
    }
    if (path.offset) {
      auto off_c = const_eval(*path.offset);
      if (!(off_c && *off_c == 0))
        total = make_binary("-", total, times_size(path.offset, esz));
    }
    return total;
  }

  void check_memset(const Expr &e) {
    for (const auto &arg : e.args)
      if (arg) {
        if (arg->kind == ExprKind::Unary && arg->text == "&") {
          if (arg->a) walk_checked(*arg->a, false);
        } else {
          walk_checked(*arg, false);
        }
      }
    if (e.args.empty() || !e.args[0]) return;
    const Expr *dest = e.args[0].get();
    if (dest->kind == ExprKind::Unary && dest->text == "&" && dest->a)
      dest = dest->a.get();
    AccessPath path = normalize_access(*dest);
    if (!path.ok) return;
    const Sym *sym = lookup(path.root);
    if (!sym || !sym->decl) return;
    if (effective_kind(*sym->decl) == PtrKind::NtArrayPtr) {
      err("E-NT-OVERWRITE",
          "memset over nt_array_ptr '" + path.root +
              "' may overwrite the null terminator",
          e.span);
      return;
    }
    err("E-SCOPE-RAWPTR",
        "memset requires an unchecked scope", e.span);
  }

  // --- inference -------------------------------------------------------------

  ValType infer(const Expr &e) {
    ValType t;
    switch (e.kind) {
    case ExprKind::StrLit:
      t.is_ptr = true;
      t.kind = PtrKind::NtArrayPtr;
      t.string_lit = true;
      t.lit_len = (int)e.text.size();
      t.base.scalar = ScalarKind::Char;
      return t;
    case ExprKind::Ident: {
      const Sym *sym = lookup(e.text);
      if (!sym || !sym->decl) return t;
      const Decl &d = *sym->decl;
      t.root = &d;
      if (sym->is_array) {
        t.is_ptr = true;
        t.kind = PtrKind::ArrayPtr;
        t.base = d.type.base;
        return t;
      }
      if (d.type.is_pointer()) {
        t.is_ptr = true;
        t.kind = effective_kind(d);
        t.base = d.type.base;
        t.extra_stars = d.type.extra_stars;
      } else {
        t.base = d.type.base;
      }
      return t;
    }
    case ExprKind::Unary:
      if (e.text == "*" && e.a) {
        ValType inner = infer(*e.a);
        if (inner.is_ptr) {
          ValType out;
          out.base = inner.base;
          out.root = inner.root;
          if (inner.extra_stars > 0) {
            out.is_ptr = true;
            out.kind = PtrKind::PlainPtr;
            out.extra_stars = inner.extra_stars - 1;
          }
          return out;
        }
        return t;
      }
      if (e.text == "&" && e.a) {
        ValType inner = infer(*e.a);
        t.is_ptr = true;
        t.kind = PtrKind::PlainPtr;
        t.base = inner.base;
        t.root = inner.root;
        return t;
      }
      return e.a ? infer(*e.a) : t;
    case ExprKind::Binary:
      if (e.text == "+" || e.text == "-") {
        ValType lt = e.a ? infer(*e.a) : ValType{};
        ValType rt = e.b ? infer(*e.b) : ValType{};
        if (lt.is_ptr && rt.is_ptr) return t; // ptr difference: integer
        if (lt.is_ptr) return lt;
        if (rt.is_ptr) return rt;
      }
      return t;
    case ExprKind::Index: {
      if (!e.a) return t;
      ValType inner = infer(*e.a);
      ValType out;
      out.base = inner.base;
      out.root = inner.root;
      if (inner.extra_stars > 0) {
        out.is_ptr = true;
        out.kind = PtrKind::PlainPtr;
        out.extra_stars = inner.extra_stars - 1;
      }
      return out;
    }
    case ExprKind::Call: {
      if (!e.a || e.a->kind != ExprKind::Ident) return t;
      auto fit = functions_.find(e.a->text);
      if (fit == functions_.end()) return t;
      const Function &fn = *fit->second;
      if (fn.ret.is_pointer()) {
        t.is_ptr = true;
        t.kind = fn.ret_interface ? fn.ret_interface->kind
                                  : (fn.ret.is_checked_pointer()
                                         ? fn.ret.kind
                                         : PtrKind::PlainPtr);
        t.base = fn.ret.base;
      } else {
        t.base = fn.ret.base;
      }
      return t;
    }
    case ExprKind::Member: {
      if (!e.a) return t;
      ValType inner = infer(*e.a);
      auto rit = record_map_.find(inner.base.record_name);
      if (rit == record_map_.end()) return t;
      for (const auto &f : rit->second->fields) {
        if (f.name == e.member) {
          if (f.type.is_pointer()) {
            t.is_ptr = true;
            t.kind = f.type.kind;
            t.base = f.type.base;
            t.root = &f;
          } else {
            t.base = f.type.base;
          }
          return t;
        }
      }
      return t;
    }
    case ExprKind::Assign:
      return e.a ? infer(*e.a) : t;
    case ExprKind::Ternary: {
      ValType bt = e.b ? infer(*e.b) : ValType{};
      return bt;
    }
    default:
      return t;
    }
  }
};

} // namespace

AccessPath normalize_access(const Expr &e) {
  AccessPath path;
  switch (e.kind) {
  case ExprKind::Ident:
    path.root = e.text;
    path.offset = make_int(0);
    path.ok = true;
    return path;
  case ExprKind::Binary: {
    if (e.text != "+" && e.text != "-") return path;
    if (!e.a || !e.b) return path;
    AccessPath inner = normalize_access(*e.a);
    if (inner.ok && side_effect_free(*e.b)) {
      path.root = inner.root;
      ExprPtr delta = e.b;
      if (e.text == "-") {
        auto neg = std::make_shared<Expr>();
        neg->kind = ExprKind::Unary;
        neg->text = "-";
        neg->a = e.b;
        neg->span = e.b->span;
        delta = neg;
      }
      path.offset = offset_add(inner.offset, delta);
      path.ok = true;
      return path;
    }
    // int + ptr
    if (e.text == "+") {
      AccessPath rhs = normalize_access(*e.b);
      if (rhs.ok && side_effect_free(*e.a)) {
        path.root = rhs.root;
        path.offset = offset_add(rhs.offset, e.a);
        path.ok = true;
      }
    }
    return path;
  }
  default:
    return path;
  }
}

UnitAnalysis analyze_unit(const SourceUnit &unit) {
  Analyzer a(unit);
  return a.run();
}

DiagList check_unit(const SourceUnit &unit) {
  return analyze_unit(unit).diags;
}

ResolvedBounds resolve_bounds(const Decl &decl, ExprPtr root,
                              const std::vector<RecordDef *> &records,
                              DiagList &diags) {
  ResolvedBounds rb;
  PtrKind k = effective_kind(decl);
  rb.element_size = pointee_size(decl, records);
  rb.nt = k == PtrKind::NtArrayPtr;
  if (k == PtrKind::Ptr) {
    rb.singleton = true;
    rb.lo = root;
    rb.hi = offset_add(root, make_int(1));
    rb.count = make_int(1);
    return rb;
  }
  switch (decl.bounds.form) {
  case BoundsForm::Count:
    rb.lo = root;
    rb.count = decl.bounds.e1;
    rb.hi = make_binary("+", root, decl.bounds.e1);
    return rb;
  case BoundsForm::ByteCount: {
    auto bytes = decl.bounds.e1;
    if (rb.element_size == 1) {
      rb.lo = root;
      rb.count = bytes;
      rb.hi = make_binary("+", root, bytes);
      return rb;
    }
    auto c = bytes ? const_eval(*bytes) : std::nullopt;
    if (c && *c % rb.element_size != 0)
      diags.warning("W-BYTECOUNT-ALIGN",
                    "byte_count of '" + decl.name +
                        "' is not a multiple of the element size",
                    decl.span);
    rb.byte_count = bytes;
    rb.lo = root;
    rb.count = make_binary("/", bytes, make_int(rb.element_size));
    rb.hi = make_binary("+", root, rb.count);
    return rb;
  }
  case BoundsForm::Range:
    rb.lo = decl.bounds.e1;
    rb.hi = decl.bounds.e2;
    rb.count = make_binary("-", rb.hi, rb.lo);
    return rb;
  default:
    diags.error("E-BOUNDS-MISSING",
                "no bounds declared for '" + decl.name + "'", decl.span);
    return rb;
  }
}

ExprPtr arg_capacity_bytes(const Expr &arg, const Decl *root_decl,
                           const std::vector<RecordDef *> &records) {
  if (arg.kind == ExprKind::StrLit)
    return make_int((long long)arg.text.size());
  if (!root_decl) return nullptr;
  View v = view_of_decl(*root_decl, records);
  (void)clone_expr;
  return view_capacity_bytes(v);
}

} // namespace chkcc
