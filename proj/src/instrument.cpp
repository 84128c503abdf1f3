#include "chkcc/instrument.hpp"

#include "chkcc/emit.hpp"
#include "chkcc/sema.hpp"

#include <algorithm>

namespace chkcc {

const char *check_kind_name(CheckKind k) {
  switch (k) {
  case CheckKind::DerefRead: return "deref-read";
  case CheckKind::DerefWrite: return "deref-write";
  case CheckKind::Index: return "index";
  case CheckKind::InterfaceBoundary: return "interface-boundary";
  case CheckKind::NtTerminatorWrite: return "nt-terminator-write";
  }
  return "index";
}

namespace {

const char *kPrelude =
    "#ifndef CHECKEDC_TRAP_HANDLER\n"
    "#include <stdio.h>\n"
    "#include <stdlib.h>\n"
    "static void __checked_trap(int id) {\n"
    "  fprintf(stderr, \"checked trap %d\\n\", id);\n"
    "  abort();\n"
    "}\n"
    "#else\n"
    "void __checked_trap(int id);\n"
    "#endif\n"
    "\n"
    "static int __ck_idx(int id, int off, int lo, int hi) {\n"
    "  if (off < lo) {\n"
    "    __checked_trap(id);\n"
    "  }\n"
    "  if (off >= hi) {\n"
    "    __checked_trap(id);\n"
    "  }\n"
    "  return off;\n"
    "}\n"
    "\n"
    "static int __ck_idx_b(int id, int off, int esz, int cap) {\n"
    "  if (off < 0) {\n"
    "    __checked_trap(id);\n"
    "  }\n"
    "  if ((off + 1) * esz > cap) {\n"
    "    __checked_trap(id);\n"
    "  }\n"
    "  return off;\n"
    "}\n"
    "\n"
    "static int __ck_nt_widx(int id, int off, int lo, int hi, int is_zero) {\n"
    "  if (off < lo) {\n"
    "    __checked_trap(id);\n"
    "  }\n"
    "  if (off > hi) {\n"
    "    __checked_trap(id);\n"
    "  }\n"
    "  if (off == hi) {\n"
    "    if (!is_zero) {\n"
    "      __checked_trap(id);\n"
    "    }\n"
    "  }\n"
    "  return off;\n"
    "}\n"
    "\n"
    "static int __ck_nonnull(int id, int nonnull) {\n"
    "  if (!nonnull) {\n"
    "    __checked_trap(id);\n"
    "  }\n"
    "  return 0;\n"
    "}\n"
    "\n"
    "static int __ck_span(int id, int need, int have) {\n"
    "  if (need > have) {\n"
    "    __checked_trap(id);\n"
    "  }\n"
    "  return 0;\n"
    "}\n"
    "\n";

struct SiteKey {
  size_t pos;
  int sub; // tie-break: argument index for boundary guards, -1 for accesses
  const void *node;
};

class Rewriter {
public:
  Rewriter(const UnitAnalysis &analysis) : analysis_(analysis) {}

  std::vector<CheckSite> assign_sites() {
    struct Entry {
      SiteKey key;
      CheckKind kind;
      Span span;
      const Expr *node;
      size_t arg = 0;
    };
    std::vector<Entry> entries;
    for (const auto &[node, info] : analysis_.accesses) {
      CheckKind kind;
      if (info.nt && info.is_write) kind = CheckKind::NtTerminatorWrite;
      else if (node->kind == ExprKind::Index) kind = CheckKind::Index;
      else kind = info.is_write ? CheckKind::DerefWrite : CheckKind::DerefRead;
      entries.push_back({{info.span.begin, -1, node}, kind, info.span, node});
    }
    for (const auto &[node, binding] : analysis_.calls) {
      for (const auto &g : binding.guards)
        entries.push_back({{binding.span.begin, (int)g.arg_index, node},
                           CheckKind::InterfaceBoundary,
                           g.span,
                           node,
                           g.arg_index});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry &a, const Entry &b) {
      if (a.key.pos != b.key.pos) return a.key.pos < b.key.pos;
      return a.key.sub < b.key.sub;
    });
    std::vector<CheckSite> sites;
    int next_id = 1;
    for (const auto &e : entries) {
      CheckSite site;
      site.id = next_id++;
      site.kind = e.kind;
      site.span = e.span;
      sites.push_back(site);
      if (e.kind == CheckKind::InterfaceBoundary)
        call_ids_[{e.node, e.arg}] = site.id;
      else
        access_ids_[e.node] = site.id;
    }
    return sites;
  }

  SourceUnit rewrite(const SourceUnit &unit) {
    SourceUnit out = unit;
    out.items.clear();
    for (const auto &item : unit.items) out.items.push_back(rewrite_item(item));
    return out;
  }

private:
  const UnitAnalysis &analysis_;
  std::map<const Expr *, int> access_ids_;
  std::map<std::pair<const Expr *, size_t>, int> call_ids_;

  ItemPtr rewrite_item(const ItemPtr &item) {
    if (!item) return item;
    switch (item->kind) {
    case ItemKind::Function: {
      if (!item->fn || !item->fn->body) return item;
      auto fn = std::make_shared<Function>(*item->fn);
      Stmt body = *item->fn->body;
      body.body.clear();
      for (const auto &s : item->fn->body->body)
        body.body.push_back(rewrite_stmt(s));
      fn->body = std::move(body);
      auto copy = std::make_shared<Item>(*item);
      copy->fn = std::move(fn);
      return copy;
    }
    case ItemKind::CondBlock: {
      auto copy = std::make_shared<Item>(*item);
      copy->then_items.clear();
      for (const auto &it : item->then_items)
        copy->then_items.push_back(rewrite_item(it));
      copy->else_items.clear();
      for (const auto &it : item->else_items)
        copy->else_items.push_back(rewrite_item(it));
      return copy;
    }
    default:
      return item;
    }
  }

  StmtPtr rewrite_stmt(const StmtPtr &s) {
    if (!s) return s;
    // statement-position nt terminator writes hoist index and value
    if (s->kind == StmtKind::ExprStmt && s->value &&
        s->value->kind == ExprKind::Assign && s->value->text == "=" &&
        s->value->a) {
      auto ait = analysis_.accesses.find(s->value->a.get());
      if (ait != analysis_.accesses.end() && ait->second.hoisted_nt_write)
        return hoist_nt_write(*s->value, ait->second);
    }
    auto copy = std::make_shared<Stmt>(*s);
    copy->cond = rewrite_expr(s->cond);
    copy->value = rewrite_expr(s->value);
    copy->init_expr = rewrite_expr(s->init_expr);
    copy->step_expr = rewrite_expr(s->step_expr);
    if (s->decl) copy->decl = rewrite_decl(*s->decl);
    if (s->init_decl) copy->init_decl = rewrite_decl(*s->init_decl);
    copy->body.clear();
    for (const auto &st : s->body) copy->body.push_back(rewrite_stmt(st));
    copy->else_body.clear();
    for (const auto &st : s->else_body)
      copy->else_body.push_back(rewrite_stmt(st));
    copy->then_stmt = rewrite_stmt(s->then_stmt);
    copy->else_stmt = rewrite_stmt(s->else_stmt);
    copy->loop_body = rewrite_stmt(s->loop_body);
    return copy;
  }

  std::shared_ptr<Decl> rewrite_decl(const Decl &d) {
    auto copy = std::make_shared<Decl>(d);
    if (d.init.present()) {
      Initializer init;
      init.is_list = d.init.is_list;
      init.expr = rewrite_expr(d.init.expr);
      for (const auto &e : d.init.list) init.list.push_back(rewrite_expr(e));
      copy->init = std::move(init);
    }
    return copy;
  }

  ExprPtr guard_call(const char *helper, std::vector<ExprPtr> args) {
    return make_call(helper, std::move(args));
  }

  ExprPtr nt_read_hi(const AccessInfo &info) {
    return make_binary("+", info.hi_off, make_int(1));
  }

  // Rewrites a guarded access into root[<guard helper>] form.
  ExprPtr rewrite_access(const Expr &e, const AccessInfo &info) {
    int id = access_ids_.count(&e) ? access_ids_.at(&e) : 0;
    ExprPtr root = make_ident(info.root_name, info.span);

    if (e.kind == ExprKind::Member) {
      // p->m with a singleton guard
      auto copy = std::make_shared<Expr>(e);
      ExprPtr nonnull = guard_call(
          "__ck_nonnull",
          {make_int(id),
           make_binary("!=", make_ident(info.root_name), make_int(0))});
      copy->a = make_binary("+", root, nonnull);
      return copy;
    }

    ExprPtr off = rewrite_expr(info.offset);
    ExprPtr guarded_index;
    if (info.singleton) {
      guarded_index = guard_call(
          "__ck_nonnull",
          {make_int(id),
           make_binary("!=", make_ident(info.root_name), make_int(0))});
    } else if (info.byte_cap) {
      guarded_index = guard_call(
          "__ck_idx_b", {make_int(id), off, make_int(info.element_size),
                         rewrite_expr(info.byte_cap)});
    } else if (info.nt && !info.is_write) {
      guarded_index =
          guard_call("__ck_idx", {make_int(id), off, rewrite_expr(info.lo_off),
                                  rewrite_expr(nt_read_hi(info))});
    } else if (info.nt && info.is_write && !info.hoisted_nt_write) {
      // non-hoisted nt write: the value is duplicable
      // (validated by sema); the zero test rides in the guard
      guarded_index = nullptr; // filled by caller, needs the value
    } else {
      guarded_index =
          guard_call("__ck_idx", {make_int(id), off, rewrite_expr(info.lo_off),
                                  rewrite_expr(info.hi_off)});
    }

    if (!guarded_index) return nullptr;
    auto access = std::make_shared<Expr>();
    access->kind = ExprKind::Index;
    access->span = e.span;
    access->a = root;
    access->b = guarded_index;
    return access;
  }

  ExprPtr rewrite_nt_write_expr(const Expr &assign, const AccessInfo &info) {
    // s[i] = v  with duplicable v:  s[__ck_nt_widx(id, i, lo, hi, (v)==0)] = v
    int id = access_ids_.count(assign.a.get()) ? access_ids_.at(assign.a.get()) : 0;
    ExprPtr value = rewrite_expr(assign.b);
    ExprPtr off = rewrite_expr(info.offset);
    ExprPtr guard = guard_call(
        "__ck_nt_widx",
        {make_int(id), off, rewrite_expr(info.lo_off), rewrite_expr(info.hi_off),
         make_binary("==", value, make_int(0))});
    auto access = std::make_shared<Expr>();
    access->kind = ExprKind::Index;
    access->span = assign.a->span;
    access->a = make_ident(info.root_name, info.span);
    access->b = guard;

    auto copy = std::make_shared<Expr>(assign);
    copy->a = access;
    copy->b = rewrite_expr(assign.b);
    return copy;
  }

  StmtPtr hoist_nt_write(const Expr &assign, const AccessInfo &info) {
    int id = access_ids_.count(assign.a.get()) ? access_ids_.at(assign.a.get()) : 0;
    std::string idx_name = "__ck_i" + std::to_string(id);
    std::string val_name = "__ck_v" + std::to_string(id);

    auto block = std::make_shared<Stmt>();
    block->kind = StmtKind::Compound;
    block->span = assign.span;

    // int __ck_iN = (offset);
    auto idx_decl = std::make_shared<Stmt>();
    idx_decl->kind = StmtKind::DeclStmt;
    idx_decl->span = assign.span;
    auto idecl = std::make_shared<Decl>();
    idecl->name = idx_name;
    idecl->type.base.scalar = ScalarKind::Int;
    idecl->init.expr = rewrite_expr(info.offset);
    idx_decl->decl = idecl;
    block->body.push_back(idx_decl);

    // <elem> __ck_vN = (value);
    auto val_decl = std::make_shared<Stmt>();
    val_decl->kind = StmtKind::DeclStmt;
    val_decl->span = assign.span;
    auto vdecl = std::make_shared<Decl>();
    vdecl->name = val_name;
    vdecl->type.base = info.root ? info.root->type.base : BaseType{};
    vdecl->init.expr = rewrite_expr(assign.b);
    val_decl->decl = vdecl;
    block->body.push_back(val_decl);

    // __ck_nt_widx(id, __ck_iN, lo, hi, (__ck_vN) == 0);
    auto check = std::make_shared<Stmt>();
    check->kind = StmtKind::ExprStmt;
    check->span = assign.span;
    check->value = guard_call(
        "__ck_nt_widx",
        {make_int(id), make_ident(idx_name), rewrite_expr(info.lo_off),
         rewrite_expr(info.hi_off),
         make_binary("==", make_ident(val_name), make_int(0))});
    block->body.push_back(check);

    // root[__ck_iN] = __ck_vN;
    auto store = std::make_shared<Stmt>();
    store->kind = StmtKind::ExprStmt;
    store->span = assign.span;
    auto lhs = std::make_shared<Expr>();
    lhs->kind = ExprKind::Index;
    lhs->span = assign.span;
    lhs->a = make_ident(info.root_name);
    lhs->b = make_ident(idx_name);
    auto st = std::make_shared<Expr>();
    st->kind = ExprKind::Assign;
    st->text = "=";
    st->span = assign.span;
    st->a = lhs;
    st->b = make_ident(val_name);
    store->value = st;
    block->body.push_back(store);
    return block;
  }

  ExprPtr rewrite_expr(const ExprPtr &e) {
    if (!e) return e;
    return rewrite_expr(*e);
  }

  ExprPtr rewrite_expr(const Expr &e) {
    // guarded access?
    auto ait = analysis_.accesses.find(&e);
    if (ait != analysis_.accesses.end() && !ait->second.hoisted_nt_write &&
        !(ait->second.nt && ait->second.is_write)) {
      ExprPtr rewritten = rewrite_access(e, ait->second);
      if (rewritten) return rewritten;
    }

    // assignment whose lhs is a guarded access
    if (e.kind == ExprKind::Assign && e.a) {
      auto lit = analysis_.accesses.find(e.a.get());
      if (lit != analysis_.accesses.end()) {
        const AccessInfo &info = lit->second;
        if (info.nt && info.is_write && !info.hoisted_nt_write)
          return rewrite_nt_write_expr(e, info);
        auto copy = std::make_shared<Expr>(e);
        ExprPtr lhs = rewrite_access(*e.a, info);
        copy->a = lhs ? lhs : rewrite_expr(e.a);
        copy->b = rewrite_expr(e.b);
        return copy;
      }
    }

    // call with boundary guards
    if (e.kind == ExprKind::Call) {
      auto cit = analysis_.calls.find(&e);
      auto copy = std::make_shared<Expr>(e);
      copy->a = rewrite_expr(e.a);
      copy->args.clear();
      for (size_t i = 0; i < e.args.size(); ++i) {
        ExprPtr arg = rewrite_expr(e.args[i]);
        if (cit != analysis_.calls.end()) {
          for (const auto &g : cit->second.guards) {
            if (g.arg_index != i) continue;
            int id = call_ids_.count({&e, i}) ? call_ids_.at({&e, i}) : 0;
            ExprPtr guard;
            if (g.nonnull_only) {
              guard = guard_call(
                  "__ck_nonnull",
                  {make_int(id),
                   make_binary("!=", rewrite_expr(g.arg_pointer), make_int(0))});
            } else {
              auto have = std::make_shared<Expr>();
              have->kind = ExprKind::Ternary;
              have->span = g.span;
              have->a = make_binary("!=", rewrite_expr(g.arg_pointer), make_int(0));
              have->b = rewrite_expr(g.have_bytes);
              auto neg = std::make_shared<Expr>();
              neg->kind = ExprKind::Unary;
              neg->text = "-";
              neg->a = make_int(1);
              have->c = neg;
              guard = guard_call("__ck_span",
                                 {make_int(id), rewrite_expr(g.need_bytes), have});
            }
            arg = make_binary("+", arg, guard);
          }
        }
        copy->args.push_back(arg);
      }
      return copy;
    }

    auto copy = std::make_shared<Expr>(e);
    copy->a = rewrite_expr(e.a);
    copy->b = rewrite_expr(e.b);
    copy->c = rewrite_expr(e.c);
    copy->args.clear();
    for (const auto &arg : e.args) copy->args.push_back(rewrite_expr(arg));
    return copy;
  }
};

} // namespace

InstrumentResult instrument_unit(const SourceUnit &unit) {
  InstrumentResult result;
  SourceUnit resolved =
      resolve_conditionals(unit, {{"USE_CHECKEDC", true}}, true);
  UnitAnalysis analysis = analyze_unit(resolved);
  result.diags = analysis.diags;
  if (!analysis.accepted()) return result;

  Rewriter rw(analysis);
  result.sites = rw.assign_sites();
  SourceUnit guarded = rw.rewrite(resolved);
  SourceUnit lowered = lower_to_legacy(guarded);
  // the runtime prelude is only needed when something calls into it
  std::string prelude = result.sites.empty() ? "" : std::string(kPrelude);
  result.code = prelude + render(lowered, Spelling::Legacy);
  return result;
}

std::string format_site_map(const std::vector<CheckSite> &sites,
                            const std::string &source) {
  std::string out;
  for (const auto &s : sites) {
    LineCol lc = line_col_at(source, s.span.begin);
    out += std::to_string(s.id);
    out += '\t';
    out += check_kind_name(s.kind);
    out += '\t';
    out += std::to_string(lc.line) + ":" + std::to_string(lc.col);
    out += '\n';
  }
  return out;
}

} // namespace chkcc
