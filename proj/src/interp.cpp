#include "chkcc/interp.hpp"

#include "chkcc/emit.hpp"
#include "chkcc/sema.hpp"

#include <cstdint>
#include <functional>

namespace chkcc {

namespace {

long long wrap32(long long v) {
  return (long long)(int32_t)(uint32_t)(unsigned long long)v;
}

long long truncate_to(long long v, int size) {
  switch (size) {
  case 1: return (long long)(int8_t)(uint8_t)(unsigned long long)v;
  case 2: return (long long)(int16_t)(uint16_t)(unsigned long long)v;
  default: return wrap32(v);
  }
}

struct Value {
  bool is_ptr = false;
  long long i = 0;     // integer value
  int obj = 0;         // object id; 0 = null
  long long off = 0;   // element offset
  bool checked = false; // derives from a checked declaration

  bool is_null() const { return is_ptr && obj == 0; }
  bool truthy() const { return is_ptr ? obj != 0 || off != 0 : i != 0; }
};

struct MemObject {
  std::vector<Value> elems;
  int elem_size = 4;
  std::vector<int> field_sizes; // structs: per-field truncation widths
  bool is_struct = false;
  std::string record_name;
  bool nt = false;  // last element is a terminator slot
  bool alive = true;
  std::string name;
};

struct TrapSignal {
  int id;
};
struct ViolationSignal {
  int obj;
  long long off;
  std::string access;
  Span span;
};
struct ErrorSignal {
  std::string message;
};

struct FieldInfo {
  std::string name;
  int index = 0;
  int size = 4;
  bool is_ptr = false;
};

class Interp {
public:
  Interp(const SourceUnit &unit, const ExecOptions &opts)
      : unit_(unit), opts_(opts) {
    objects_.push_back({}); // object 0 = null
  }

  ExecOutcome run(const std::string &entry) {
    ExecOutcome outcome;
    try {
      collect(unit_.items);
      if (opts_.mode == ExecMode::Oracle) {
        analysis_ = analyze_unit(unit_);
        if (analysis_.diags.has_errors())
          throw ErrorSignal{"unit rejected by sema"};
      }
      init_globals();
      auto it = functions_.find(entry);
      if (it == functions_.end())
        throw ErrorSignal{"entry function '" + entry + "' not found"};
      const Function &fn = *it->second;
      if (!fn.body) throw ErrorSignal{"entry function has no body"};
      std::vector<Value> args;
      for (size_t i = 0; i < fn.params.size(); ++i) {
        Value v;
        v.i = i < opts_.args.size() ? wrap32(opts_.args[i]) : 0;
        args.push_back(v);
      }
      Value ret = call_function(fn, args);
      if (ret.is_ptr) throw ErrorSignal{"entry function returned a pointer"};
      outcome.kind = OutcomeKind::Normal;
      outcome.value = wrap32(ret.i);
    } catch (const TrapSignal &t) {
      outcome.kind = OutcomeKind::Trap;
      outcome.trap_id = t.id;
    } catch (const ViolationSignal &v) {
      outcome.kind = OutcomeKind::Violation;
      outcome.violation_object = v.obj;
      outcome.violation_offset = v.off;
      outcome.violation_access = v.access;
      outcome.violation_span = v.span;
    } catch (const ErrorSignal &e) {
      outcome.kind = OutcomeKind::Error;
      outcome.error = e.message;
    }
    outcome.print_log = std::move(log_);
    outcome.steps = steps_;
    outcome.call_counts = std::move(call_counts_);
    return outcome;
  }

private:
  const SourceUnit &unit_;
  const ExecOptions &opts_;
  UnitAnalysis analysis_;
  std::vector<MemObject> objects_;
  std::map<std::string, const Function *> functions_;
  std::map<std::string, std::vector<FieldInfo>> records_;
  std::vector<RecordDef *> record_defs_;
  std::map<std::string, const Decl *> global_decls_;
  std::vector<std::pair<const Decl *, bool>> global_order_; // (decl, is_global)

  // scope stack: name -> object id (and decl for arrays/typing)
  struct Binding {
    int obj = 0;
    const Decl *decl = nullptr;
    bool is_array = false;
  };
  std::vector<std::map<std::string, Binding>> scopes_;
  std::map<const Expr *, int> literal_objects_;
  std::vector<long long> log_;
  std::map<std::string, long long> call_counts_;
  long long steps_ = 0;
  // guard expressions are meta-level: the provenance arithmetic rule does
  // not apply while evaluating them
  bool guard_eval_ = false;

  struct GuardEval {
    Interp &in;
    bool saved;
    explicit GuardEval(Interp &i) : in(i), saved(i.guard_eval_) {
      in.guard_eval_ = true;
    }
    ~GuardEval() { in.guard_eval_ = saved; }
  };

  void step() {
    if (++steps_ > opts_.fuel) throw ErrorSignal{"fuel exhausted"};
  }

  // --- setup -----------------------------------------------------------------

  void collect(const std::vector<ItemPtr> &items) {
    for (const auto &item : items) {
      if (!item) continue;
      switch (item->kind) {
      case ItemKind::Function: {
        const Function &fn = *item->fn;
        auto it = functions_.find(fn.name);
        if (it == functions_.end() || fn.body) functions_[fn.name] = &fn;
        break;
      }
      case ItemKind::Record: {
        record_defs_.push_back(item->record.get());
        std::vector<FieldInfo> fields;
        int idx = 0;
        for (const auto &f : item->record->fields) {
          FieldInfo fi;
          fi.name = f.name;
          fi.index = idx++;
          fi.is_ptr = f.type.is_pointer();
          fi.size = fi.is_ptr ? 4 : base_size(f.type.base, record_defs_);
          fields.push_back(fi);
        }
        records_[item->record->name] = std::move(fields);
        break;
      }
      case ItemKind::GlobalVar:
        global_order_.push_back({item->global.get(), true});
        global_decls_[item->global->name] = item->global.get();
        break;
      case ItemKind::CondBlock:
        // execution requires resolved conditionals; treat both branches as
        // unreachable declarations is wrong, so resolve-by-default instead
        collect(item->cond_negated ? item->then_items : item->else_items);
        break;
      default:
        break;
      }
    }
  }

  void init_globals() {
    scopes_.push_back({});
    for (auto &[decl, is_global] : global_order_) {
      (void)is_global;
      define_var(*decl);
    }
  }

  int new_object(MemObject obj) {
    objects_.push_back(std::move(obj));
    return (int)objects_.size() - 1;
  }

  int elem_size_of(const Decl &d) {
    if (d.type.is_pointer()) {
      // the object an array-of-pointers owns holds pointer slots
      return 4;
    }
    int sz = base_size(d.type.base, record_defs_);
    return sz > 0 ? sz : 1;
  }

  void define_var(const Decl &d) {
    MemObject obj;
    obj.name = d.name;
    bool array = d.array_size.has_value();
    if (!array && !d.type.is_pointer() && d.type.base.is_record) {
      auto rit = records_.find(d.type.base.record_name);
      if (rit == records_.end())
        throw ErrorSignal{"unknown record type 'struct " +
                          d.type.base.record_name + "'"};
      obj.is_struct = true;
      obj.record_name = d.type.base.record_name;
      obj.elems.resize(rit->second.size());
      for (const auto &f : rit->second) obj.field_sizes.push_back(f.size);
      obj.elem_size = 1;
      for (size_t fi = 0; fi < rit->second.size(); ++fi)
        if (rit->second[fi].is_ptr) obj.elems[fi].is_ptr = true;
    } else {
      size_t n = array ? (size_t)*d.array_size : 1;
      obj.elems.resize(n);
      if (!array && d.type.is_pointer()) {
        for (auto &e : obj.elems) e.is_ptr = true;
      }
      obj.elem_size = array ? elem_size_of(d) : (d.type.is_pointer() ? 4 : elem_size_of(d));
    }
    int id = new_object(std::move(obj));
    scopes_.back()[d.name] = {id, &d, array};

    if (d.init.present()) {
      if (d.init.is_list) {
        for (size_t i = 0; i < d.init.list.size() && i < objects_[id].elems.size();
             ++i) {
          if (!d.init.list[i]) continue;
          Value v = eval(*d.init.list[i]);
          store_slot(id, (long long)i, v, Span{});
        }
      } else if (d.init.expr) {
        Value v = eval(*d.init.expr);
        if (d.type.is_pointer() && !v.is_ptr && v.i == 0) v.is_ptr = true;
        if (d.type.is_checked_pointer()) v.checked = true;
        if (!v.is_ptr && !d.type.is_pointer())
          v.i = truncate_to(v.i, objects_[id].elem_size);
        objects_[id].elems[0] = v;
      }
    }
  }

  // --- helpers ----------------------------------------------------------------

  MemObject &obj(int id) {
    if (id <= 0 || id >= (int)objects_.size())
      throw ErrorSignal{"invalid object reference"};
    return objects_[(size_t)id];
  }

  Binding *lookup(const std::string &name) {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  Value load_slot(int id, long long index, Span span) {
    MemObject &o = obj(id);
    if (!o.alive) throw ErrorSignal{"use of dead object '" + o.name + "'"};
    if (index < 0 || index >= (long long)o.elems.size())
      throw ViolationSignal{id, index, "read", span};
    return o.elems[(size_t)index];
  }

  void store_slot(int id, long long index, Value v, Span span) {
    MemObject &o = obj(id);
    if (!o.alive) throw ErrorSignal{"use of dead object '" + o.name + "'"};
    if (index < 0 || index >= (long long)o.elems.size())
      throw ViolationSignal{id, index, "write", span};
    if (!v.is_ptr) {
      int size = o.is_struct && index < (long long)o.field_sizes.size()
                     ? o.field_sizes[(size_t)index]
                     : o.elem_size;
      v.i = truncate_to(v.i, size);
    }
    o.elems[(size_t)index] = v;
  }

  int literal_object(const Expr &e) {
    auto it = literal_objects_.find(&e);
    if (it != literal_objects_.end()) return it->second;
    MemObject o;
    o.name = "<string>";
    o.elem_size = 1;
    o.nt = true;
    for (char c : e.text) {
      Value v;
      v.i = (long long)(unsigned char)c;
      o.elems.push_back(v);
    }
    o.elems.push_back(Value{}); // terminator slot
    int id = new_object(std::move(o));
    literal_objects_[&e] = id;
    return id;
  }

  // --- execution ----------------------------------------------------------------

  struct Frame {
    Value ret;
    bool returned = false;
  };

  Value call_function(const Function &fn, const std::vector<Value> &args) {
    call_counts_[fn.name]++;
    scopes_.push_back({});
    size_t scope_mark = scopes_.size();
    std::vector<int> owned;
    for (size_t i = 0; i < fn.params.size(); ++i) {
      const Decl &p = fn.params[i];
      MemObject po;
      po.name = p.name;
      po.elem_size = p.type.is_pointer() ? 4 : elem_size_of(p);
      po.elems.resize(1);
      Value v = i < args.size() ? args[i] : Value{};
      if (p.type.is_pointer() && !v.is_ptr && v.i == 0) v.is_ptr = true;
      if (p.type.is_checked_pointer() || p.annotated()) v.checked = true;
      if (!v.is_ptr && !p.type.is_pointer())
        v.i = truncate_to(v.i, po.elem_size);
      po.elems[0] = v;
      int id = new_object(std::move(po));
      owned.push_back(id);
      if (!p.name.empty()) scopes_.back()[p.name] = {id, &p, false};
    }
    Frame frame;
    if (fn.body) exec_block(fn.body->body, frame);
    while (scopes_.size() > scope_mark - 1) scopes_.pop_back();
    for (int id : owned) objects_[(size_t)id].alive = false;
    if (!frame.returned) frame.ret = Value{};
    return frame.ret;
  }

  void exec_block(const std::vector<StmtPtr> &stmts, Frame &frame) {
    scopes_.push_back({});
    std::vector<int> locals;
    for (const auto &s : stmts) {
      if (!s) continue;
      exec_stmt(*s, frame, locals);
      if (frame.returned) break;
    }
    for (auto &[name, b] : scopes_.back())
      if (b.obj > 0) objects_[(size_t)b.obj].alive = false;
    scopes_.pop_back();
  }

  void exec_stmt(const Stmt &s, Frame &frame, std::vector<int> &locals) {
    (void)locals;
    step();
    switch (s.kind) {
    case StmtKind::Compound:
      exec_block(s.body, frame);
      return;
    case StmtKind::CondBlock:
      throw ErrorSignal{"unresolved conditional block at execution time"};
    case StmtKind::Empty:
      return;
    case StmtKind::DeclStmt:
      if (s.decl) define_var(*s.decl);
      return;
    case StmtKind::ExprStmt:
      if (s.value) eval(*s.value);
      return;
    case StmtKind::Return:
      frame.ret = s.value ? eval(*s.value) : Value{};
      frame.returned = true;
      return;
    case StmtKind::If: {
      Value c = s.cond ? eval(*s.cond) : Value{};
      if (c.truthy()) {
        if (s.then_stmt) exec_sub(*s.then_stmt, frame);
      } else if (s.else_stmt) {
        exec_sub(*s.else_stmt, frame);
      }
      return;
    }
    case StmtKind::While: {
      while (true) {
        step();
        Value c = s.cond ? eval(*s.cond) : Value{};
        if (!c.truthy()) break;
        if (s.loop_body) {
          exec_sub(*s.loop_body, frame);
          if (frame.returned) return;
        }
      }
      return;
    }
    case StmtKind::For: {
      scopes_.push_back({});
      if (s.init_decl) define_var(*s.init_decl);
      if (s.init_expr) eval(*s.init_expr);
      while (true) {
        step();
        if (s.cond) {
          Value c = eval(*s.cond);
          if (!c.truthy()) break;
        }
        if (s.loop_body) {
          exec_sub(*s.loop_body, frame);
          if (frame.returned) break;
        }
        if (s.step_expr) eval(*s.step_expr);
      }
      for (auto &[name, b] : scopes_.back())
        if (b.obj > 0) objects_[(size_t)b.obj].alive = false;
      scopes_.pop_back();
      return;
    }
    }
  }

  void exec_sub(const Stmt &s, Frame &frame) {
    if (s.kind == StmtKind::Compound) {
      exec_block(s.body, frame);
      return;
    }
    std::vector<int> locals;
    scopes_.push_back({});
    exec_stmt(s, frame, locals);
    for (auto &[name, b] : scopes_.back())
      if (b.obj > 0) objects_[(size_t)b.obj].alive = false;
    scopes_.pop_back();
  }

  // --- lvalues ------------------------------------------------------------------

  struct Location {
    int obj = 0;
    long long index = 0;
  };

  // Oracle-mode declared-bounds guard for an access through `info`.
  // `eff_off` is the effective element offset from the root's current value.
  void oracle_guard(const AccessInfo &info, long long eff_off, bool is_write,
                    const Value &written, bool value_known, Span span) {
    if (opts_.mode != ExecMode::Oracle) return;
    if (info.singleton) return; // null handled by physical access on obj 0
    GuardEval guard(*this);
    long long lo = info.lo_off ? eval_int(*info.lo_off) : 0;
    if (info.byte_cap) {
      long long cap = eval_int(*info.byte_cap);
      long long first = eff_off * info.element_size;
      long long last = (eff_off + 1) * info.element_size;
      if (first < lo * info.element_size || last > cap)
        throw ViolationSignal{root_obj(info), eff_off,
                              is_write ? "write" : "read", span};
      return;
    }
    long long hi = info.hi_off ? eval_int(*info.hi_off) : 0;
    if (!is_write) {
      long long limit = info.nt ? hi + 1 : hi;
      if (eff_off < lo || eff_off >= limit)
        throw ViolationSignal{root_obj(info), eff_off, "read", span};
      return;
    }
    if (eff_off >= lo && eff_off < hi) return;
    if (info.nt && eff_off == hi && value_known && !written.is_ptr &&
        truncate_to(written.i, info.element_size) == 0)
      return;
    throw ViolationSignal{root_obj(info), eff_off, "write", span};
  }

  int root_obj(const AccessInfo &info) {
    Binding *b = lookup(info.root_name);
    if (!b) return 0;
    if (b->is_array) return b->obj;
    Value v = objects_[(size_t)b->obj].elems[0];
    return v.obj;
  }

  Value root_pointer(const AccessInfo &info) {
    Binding *b = lookup(info.root_name);
    if (!b) throw ErrorSignal{"unbound root '" + info.root_name + "'"};
    if (b->is_array) {
      Value v;
      v.is_ptr = true;
      v.obj = b->obj;
      return v;
    }
    return objects_[(size_t)b->obj].elems[0];
  }

  const AccessInfo *access_info(const Expr &e) {
    if (opts_.mode != ExecMode::Oracle) return nullptr;
    auto it = analysis_.accesses.find(&e);
    return it == analysis_.accesses.end() ? nullptr : &it->second;
  }

  // Resolves a deref/index access to a location, running oracle guards.
  // For nt-guarded writes the value check runs in store paths below.
  Location access_location(const Expr &site, const Value &ptr, long long idx,
                           bool is_write, const Value *written, Span span) {
    const AccessInfo *info = access_info(site);
    if (info) {
      Value root = root_pointer(*info);
      if (ptr.obj != root.obj && !(ptr.is_null() && root.is_null()))
        throw ErrorSignal{"access root mismatch"};
      long long eff = ptr.off + idx - root.off;
      if (info->singleton && ptr.is_null())
        throw ViolationSignal{0, 0, is_write ? "write" : "read", span};
      oracle_guard(*info, eff, is_write, written ? *written : Value{},
                   written != nullptr, span);
    }
    if (ptr.is_null())
      throw ViolationSignal{0, ptr.off + idx, is_write ? "write" : "read",
                            span};
    return Location{ptr.obj, ptr.off + idx};
  }

  // --- expression evaluation -------------------------------------------------------

  long long eval_int(const Expr &e) {
    Value v = eval(e);
    if (v.is_ptr) throw ErrorSignal{"expected an integer value"};
    return wrap32(v.i);
  }

  Value eval(const Expr &e) {
    step();
    switch (e.kind) {
    case ExprKind::IntLit:
    case ExprKind::CharLit: {
      Value v;
      v.i = wrap32(e.int_value);
      return v;
    }
    case ExprKind::StrLit: {
      Value v;
      v.is_ptr = true;
      v.obj = literal_object(e);
      v.checked = true;
      return v;
    }
    case ExprKind::Ident: {
      Binding *b = lookup(e.text);
      if (!b) throw ErrorSignal{"use of unbound identifier '" + e.text + "'"};
      if (b->is_array) {
        Value v;
        v.is_ptr = true;
        v.obj = b->obj;
        v.checked = opts_.mode == ExecMode::Oracle;
        return v;
      }
      MemObject &o = obj(b->obj);
      if (!o.alive)
        throw ErrorSignal{"use of dead object '" + e.text + "'"};
      return o.elems[0];
    }
    case ExprKind::Unary:
      return eval_unary(e);
    case ExprKind::Binary:
      return eval_binary(e);
    case ExprKind::Assign:
      return eval_assign(e);
    case ExprKind::PostIncDec: {
      if (!e.a) throw ErrorSignal{"malformed increment"};
      Value old = eval(*e.a);
      Value next = incdec(old, e.text == "++" ? 1 : -1, e.span);
      store_into(*e.a, next, e.span);
      return old;
    }
    case ExprKind::Index: {
      if (!e.a || !e.b) throw ErrorSignal{"malformed index expression"};
      Value ptr = eval(*e.a);
      long long idx = eval_int(*e.b);
      if (!ptr.is_ptr) throw ErrorSignal{"indexing a non-pointer value"};
      Location loc = access_location(e, ptr, idx, false, nullptr, e.span);
      return load_slot(loc.obj, loc.index, e.span);
    }
    case ExprKind::Call:
      return eval_call(e);
    case ExprKind::Member:
      return load_member(e);
    case ExprKind::Ternary: {
      if (!e.a) throw ErrorSignal{"malformed conditional"};
      Value c = eval(*e.a);
      if (c.truthy()) return e.b ? eval(*e.b) : Value{};
      return e.c ? eval(*e.c) : Value{};
    }
    case ExprKind::SizeofType: {
      Value v;
      v.i = static_sizeof_type(e);
      return v;
    }
    case ExprKind::SizeofExpr: {
      Value v;
      v.i = static_sizeof_expr(e);
      return v;
    }
    }
    throw ErrorSignal{"unsupported expression"};
  }

  long long static_sizeof_type(const Expr &e) {
    if (!e.sizeof_type) throw ErrorSignal{"malformed sizeof"};
    const Type &t = *e.sizeof_type;
    if (t.is_pointer()) return 4;
    int sz = base_size(t.base, record_defs_);
    if (sz <= 0) throw ErrorSignal{"sizeof of an opaque type"};
    return sz;
  }

  long long static_sizeof_expr(const Expr &e) {
    if (!e.a || e.a->kind != ExprKind::Ident)
      throw ErrorSignal{"sizeof supports identifiers and types only"};
    Binding *b = lookup(e.a->text);
    if (!b || !b->decl) throw ErrorSignal{"sizeof of unknown identifier"};
    const Decl &d = *b->decl;
    if (b->is_array)
      return (long long)d.array_size.value_or(0) * elem_size_of(d);
    if (d.type.is_pointer()) return 4;
    return elem_size_of(d);
  }

  Value eval_unary(const Expr &e) {
    if (!e.a) throw ErrorSignal{"malformed unary expression"};
    const std::string &op = e.text;
    if (op == "*") {
      Value ptr = eval(*e.a);
      if (!ptr.is_ptr) throw ErrorSignal{"dereference of a non-pointer value"};
      Location loc = access_location(e, ptr, 0, false, nullptr, e.span);
      return load_slot(loc.obj, loc.index, e.span);
    }
    if (op == "&") {
      return address_of(*e.a);
    }
    if (op == "++" || op == "--") {
      Value old = eval(*e.a);
      Value next = incdec(old, op == "++" ? 1 : -1, e.span);
      store_into(*e.a, next, e.span);
      return next;
    }
    Value v = eval(*e.a);
    if (v.is_ptr) {
      if (op == "!") {
        Value out;
        out.i = v.truthy() ? 0 : 1;
        return out;
      }
      throw ErrorSignal{"arithmetic on a pointer value"};
    }
    Value out;
    if (op == "-") out.i = wrap32(-v.i);
    else if (op == "!") out.i = v.i == 0 ? 1 : 0;
    else if (op == "~") out.i = wrap32(~v.i);
    else throw ErrorSignal{"unsupported unary operator '" + op + "'"};
    return out;
  }

  Value address_of(const Expr &target) {
    if (target.kind == ExprKind::Ident) {
      Binding *b = lookup(target.text);
      if (!b)
        throw ErrorSignal{"use of unbound identifier '" + target.text + "'"};
      Value v;
      v.is_ptr = true;
      v.obj = b->obj;
      v.off = 0;
      return v;
    }
    if (target.kind == ExprKind::Index) {
      Value ptr = eval(*target.a);
      long long idx = eval_int(*target.b);
      if (!ptr.is_ptr) throw ErrorSignal{"indexing a non-pointer value"};
      Value v = ptr;
      v.off += idx;
      return v;
    }
    if (target.kind == ExprKind::Unary && target.text == "*")
      return eval(*target.a);
    throw ErrorSignal{"unsupported address-of target"};
  }

  Value incdec(const Value &v, int delta, Span span) {
    if (v.is_ptr) {
      Value out = v;
      out.off += delta;
      check_arith(out, span);
      return out;
    }
    Value out;
    out.i = wrap32(v.i + delta);
    return out;
  }

  void check_arith(const Value &v, Span span) {
    if (opts_.mode != ExecMode::Oracle || !v.checked || !v.is_ptr) return;
    if (guard_eval_) return;
    if (v.is_null()) return;
    MemObject &o = obj(v.obj);
    if (v.off < 0 || v.off > (long long)o.elems.size())
      throw ViolationSignal{v.obj, v.off, "arith", span};
  }

  Value eval_binary(const Expr &e) {
    const std::string &op = e.text;
    if (op == "&&") {
      Value l = eval(*e.a);
      Value out;
      if (!l.truthy()) return out;
      Value r = eval(*e.b);
      out.i = r.truthy() ? 1 : 0;
      return out;
    }
    if (op == "||") {
      Value l = eval(*e.a);
      Value out;
      if (l.truthy()) {
        out.i = 1;
        return out;
      }
      Value r = eval(*e.b);
      out.i = r.truthy() ? 1 : 0;
      return out;
    }
    Value l = eval(*e.a);
    Value r = eval(*e.b);

    if (l.is_ptr || r.is_ptr) return pointer_binary(op, l, r, e.span);

    Value out;
    long long a = wrap32(l.i), b = wrap32(r.i);
    if (op == "+") out.i = wrap32(a + b);
    else if (op == "-") out.i = wrap32(a - b);
    else if (op == "*") out.i = wrap32(a * b);
    else if (op == "/") {
      if (b == 0) throw ErrorSignal{"division by zero"};
      out.i = wrap32(a / b);
    } else if (op == "%") {
      if (b == 0) throw ErrorSignal{"division by zero"};
      out.i = wrap32(a % b);
    } else if (op == "<<") out.i = wrap32(a << (b & 31));
    else if (op == ">>") out.i = wrap32(a >> (b & 31));
    else if (op == "&") out.i = wrap32(a & b);
    else if (op == "|") out.i = wrap32(a | b);
    else if (op == "^") out.i = wrap32(a ^ b);
    else if (op == "==") out.i = a == b;
    else if (op == "!=") out.i = a != b;
    else if (op == "<") out.i = a < b;
    else if (op == "<=") out.i = a <= b;
    else if (op == ">") out.i = a > b;
    else if (op == ">=") out.i = a >= b;
    else throw ErrorSignal{"unsupported operator '" + op + "'"};
    return out;
  }

  Value pointer_binary(const std::string &op, const Value &l, const Value &r,
                       Span span) {
    Value out;
    if (op == "==" || op == "!=") {
      bool same = l.is_ptr == r.is_ptr
                      ? (l.is_ptr ? (l.obj == r.obj && l.off == r.off)
                                  : l.i == r.i)
                      : (l.is_ptr ? l.is_null() && r.i == 0
                                  : r.is_null() && l.i == 0);
      out.i = (op == "==") == same;
      return out;
    }
    if (op == "-" && l.is_ptr && r.is_ptr) {
      if (l.obj != r.obj)
        throw ViolationSignal{l.obj, l.off, "arith", span};
      out.i = wrap32(l.off - r.off);
      return out;
    }
    if ((op == "+" || op == "-")) {
      const Value &p = l.is_ptr ? l : r;
      const Value &n = l.is_ptr ? r : l;
      if (n.is_ptr) throw ErrorSignal{"invalid pointer arithmetic"};
      Value res = p;
      res.off = op == "+" ? p.off + wrap32(n.i)
                          : p.off - wrap32(n.i);
      check_arith(res, span);
      return res;
    }
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
      if (!(l.is_ptr && r.is_ptr && l.obj == r.obj))
        throw ErrorSignal{"ordered comparison of unrelated pointers"};
      long long a = l.off, b = r.off;
      out.i = op == "<" ? a < b : op == "<=" ? a <= b : op == ">" ? a > b : a >= b;
      return out;
    }
    throw ErrorSignal{"unsupported pointer operation '" + op + "'"};
  }

  // --- assignment -----------------------------------------------------------------

  Value eval_assign(const Expr &e) {
    if (!e.a || !e.b) throw ErrorSignal{"malformed assignment"};
    const Expr &lhs = *e.a;
    const std::string &op = e.text;

    if (op != "=") {
      Value old = eval(lhs);
      Value rhs = eval(*e.b);
      if (old.is_ptr) {
        if (rhs.is_ptr) throw ErrorSignal{"invalid pointer arithmetic"};
        Value res = old;
        res.off += (op == "+=" ? 1 : -1) * wrap32(rhs.i);
        check_arith(res, e.span);
        store_into(lhs, res, e.span);
        return res;
      }
      Value res;
      res.i = wrap32(op == "+=" ? old.i + rhs.i : old.i - rhs.i);
      store_into(lhs, res, e.span);
      return res;
    }

    // plain assignment: resolve the target location first, then the value
    if (lhs.kind == ExprKind::Index || (lhs.kind == ExprKind::Unary && lhs.text == "*")) {
      Value ptr;
      long long idx = 0;
      if (lhs.kind == ExprKind::Index) {
        ptr = eval(*lhs.a);
        idx = eval_int(*lhs.b);
      } else {
        ptr = eval(*lhs.a);
      }
      if (!ptr.is_ptr) throw ErrorSignal{"store through a non-pointer value"};
      Value rhs = eval(*e.b);
      Location loc = access_location(lhs, ptr, idx, true, &rhs, e.span);
      store_slot(loc.obj, loc.index, rhs, e.span);
      return rhs;
    }
    Value rhs = eval(*e.b);
    store_into(lhs, rhs, e.span);
    return rhs;
  }

  void store_into(const Expr &lhs, Value v, Span span) {
    switch (lhs.kind) {
    case ExprKind::Ident: {
      Binding *b = lookup(lhs.text);
      if (!b)
        throw ErrorSignal{"use of unbound identifier '" + lhs.text + "'"};
      if (b->is_array) throw ErrorSignal{"assignment to an array"};
      MemObject &o = obj(b->obj);
      if (!o.alive) throw ErrorSignal{"use of dead object '" + lhs.text + "'"};
      if (b->decl && b->decl->type.is_pointer() && !v.is_ptr && v.i == 0)
        v.is_ptr = true;
      if (b->decl && b->decl->type.is_checked_pointer()) v.checked = true;
      if (!v.is_ptr && b->decl && !b->decl->type.is_pointer())
        v.i = truncate_to(v.i, o.elem_size);
      o.elems[0] = v;
      return;
    }
    case ExprKind::Index: {
      Value ptr = eval(*lhs.a);
      long long idx = eval_int(*lhs.b);
      if (!ptr.is_ptr) throw ErrorSignal{"store through a non-pointer value"};
      Location loc = access_location(lhs, ptr, idx, true, &v, span);
      store_slot(loc.obj, loc.index, v, span);
      return;
    }
    case ExprKind::Unary:
      if (lhs.text == "*") {
        Value ptr = eval(*lhs.a);
        if (!ptr.is_ptr) throw ErrorSignal{"store through a non-pointer value"};
        Location loc = access_location(lhs, ptr, 0, true, &v, span);
        store_slot(loc.obj, loc.index, v, span);
        return;
      }
      break;
    case ExprKind::Member: {
      Location loc = member_location(lhs);
      store_slot(loc.obj, loc.index, v, span);
      return;
    }
    default:
      break;
    }
    throw ErrorSignal{"unsupported assignment target"};
  }

  // --- members --------------------------------------------------------------------

  Location member_location(const Expr &e) {
    if (!e.a) throw ErrorSignal{"malformed member access"};
    int target_obj = 0;
    if (!e.arrow && e.a->kind == ExprKind::Ident) {
      Binding *b = lookup(e.a->text);
      if (!b)
        throw ErrorSignal{"use of unbound identifier '" + e.a->text + "'"};
      target_obj = b->obj;
    } else {
      Value ptr = eval(*e.a);
      if (!ptr.is_ptr || ptr.is_null()) {
        const AccessInfo *info = access_info(e);
        if (info && ptr.is_null())
          throw ViolationSignal{0, 0, "read", e.span};
        if (ptr.is_null()) throw ViolationSignal{0, 0, "read", e.span};
        throw ErrorSignal{"member access through a non-pointer"};
      }
      if (ptr.off != 0)
        throw ErrorSignal{"member access through an offset pointer"};
      target_obj = ptr.obj;
    }
    MemObject &o = obj(target_obj);
    if (!o.is_struct) throw ErrorSignal{"member access on a non-record object"};
    int idx = member_index(o, e.member);
    if (idx < 0) throw ErrorSignal{"unknown member '" + e.member + "'"};
    return Location{target_obj, idx};
  }

  int member_index(const MemObject &o, const std::string &member) {
    auto rit = records_.find(o.record_name);
    if (rit == records_.end()) return -1;
    for (const auto &f : rit->second)
      if (f.name == member) return f.index;
    return -1;
  }

  Value load_member(const Expr &e) {
    Location loc = member_location(e);
    return load_slot(loc.obj, loc.index, e.span);
  }

  // --- calls -----------------------------------------------------------------------

  Value eval_call(const Expr &e) {
    if (!e.a || e.a->kind != ExprKind::Ident)
      throw ErrorSignal{"indirect calls are not supported"};
    const std::string &name = e.a->text;

    if (name == "print_int") {
      if (e.args.size() != 1 || !e.args[0])
        throw ErrorSignal{"print_int expects one argument"};
      long long v = eval_int(*e.args[0]);
      log_.push_back(v);
      call_counts_[name]++;
      return Value{};
    }
    if (name == "__checked_trap") {
      long long id = e.args.empty() || !e.args[0] ? 0 : eval_int(*e.args[0]);
      throw TrapSignal{(int)id};
    }

    auto it = functions_.find(name);
    if (it == functions_.end())
      throw ErrorSignal{"call to unknown external function '" + name + "'"};
    const Function &fn = *it->second;
    if (!fn.body)
      throw ErrorSignal{"call to unknown external function '" + name + "'"};

    const CallBinding *binding = nullptr;
    if (opts_.mode == ExecMode::Oracle) {
      auto bit = analysis_.calls.find(&e);
      if (bit != analysis_.calls.end()) binding = &bit->second;
    }

    std::vector<Value> args;
    for (size_t i = 0; i < e.args.size(); ++i) {
      if (!e.args[i]) {
        args.push_back(Value{});
        continue;
      }
      Value v = eval(*e.args[i]);
      if (binding) {
        for (const auto &g : binding->guards) {
          if (g.arg_index != i) continue;
          apply_arg_guard(g, v, e.span);
        }
      }
      args.push_back(v);
    }
    return call_function(fn, args);
  }

  void apply_arg_guard(const ArgGuard &g, const Value &arg, Span span) {
    if (g.nonnull_only) {
      bool null = arg.is_ptr ? arg.is_null() : arg.i == 0;
      if (null) throw ViolationSignal{0, 0, "bind", span};
      return;
    }
    if (!g.need_bytes) return;
    GuardEval guard(*this);
    long long need = eval_int(*g.need_bytes);
    bool null = arg.is_ptr ? arg.is_null() : arg.i == 0;
    long long have = -1;
    if (!null && g.have_bytes) have = eval_int(*g.have_bytes);
    if (need > have)
      throw ViolationSignal{arg.is_ptr ? arg.obj : 0, arg.off, "bind", span};
  }
};

} // namespace

std::string ExecOutcome::summary() const {
  switch (kind) {
  case OutcomeKind::Normal: return "NORMAL " + std::to_string(value);
  case OutcomeKind::Trap: return "TRAP " + std::to_string(trap_id);
  case OutcomeKind::Violation:
    return "VIOLATION " + std::to_string(violation_object) + ":" +
           std::to_string(violation_offset);
  case OutcomeKind::Error: return "ERROR " + error;
  }
  return "ERROR";
}

ExecOutcome execute(const SourceUnit &unit, const std::string &entry,
                    const ExecOptions &opts) {
  std::map<std::string, bool> known;
  if (opts.mode == ExecMode::Oracle) known["USE_CHECKEDC"] = true;
  SourceUnit resolved = resolve_conditionals(unit, known, false);
  Interp interp(resolved, opts);
  return interp.run(entry);
}

} // namespace chkcc
