#pragma once

#include "chkcc/diagnostics.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace chkcc {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

// Pointer discipline of a declared type.
enum class PtrKind {
  NonPointer,
  PlainPtr,   // legacy `T *`
  Ptr,        // singleton checked pointer
  ArrayPtr,   // checked pointer with element bounds
  NtArrayPtr, // checked pointer to null-terminated data
};

enum class ScalarKind {
  Void,
  Char,
  SChar,
  UChar,
  Short,
  UShort,
  Int,
  UInt,
  Long,
  ULong,
};

// Base (pointee or value) type: a scalar, or a record reference.
struct BaseType {
  ScalarKind scalar = ScalarKind::Int;
  bool is_record = false;
  bool is_opaque = false;     // opaque builtin (FILE): named, never sized
  std::string record_name;    // tag for records / name for opaques
  std::string spelling;       // how the source spelled it (typedef name kept)
  bool is_const = false;

  bool same_shape(const BaseType &o) const {
    if (is_record != o.is_record || is_opaque != o.is_opaque) return false;
    if (is_record || is_opaque) return record_name == o.record_name;
    return scalar == o.scalar;
  }
};

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

enum class BoundsForm { Unknown, Count, ByteCount, Range };

struct BoundsExpr {
  BoundsForm form = BoundsForm::Unknown;
  ExprPtr e1; // count / byte count / low
  ExprPtr e2; // high (Range only)
  bool present() const { return form != BoundsForm::Unknown; }
};

// Bounds-safe interface type (the itype) on an unchecked declaration.
struct InterfaceType {
  PtrKind kind = PtrKind::Ptr; // Ptr / ArrayPtr / NtArrayPtr
  BaseType pointee;
};

struct Type {
  PtrKind kind = PtrKind::NonPointer;
  BaseType base;      // the value type, or the pointee for pointer kinds
  int extra_stars = 0; // additional indirections on PlainPtr (e.g. `int **`)

  bool is_pointer() const { return kind != PtrKind::NonPointer; }
  bool is_checked_pointer() const {
    return kind == PtrKind::Ptr || kind == PtrKind::ArrayPtr ||
           kind == PtrKind::NtArrayPtr;
  }
};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class ExprKind {
  IntLit,
  CharLit,
  StrLit,
  Ident,
  Unary,   // - ! ~ * &  and pre ++/--
  Binary,  // arithmetic / comparison / logical / shifts
  Assign,  // = += -=
  PostIncDec,
  Index,
  Call,
  Member,  // . and ->
  Ternary,
  SizeofType,
  SizeofExpr,
};

struct Expr {
  ExprKind kind = ExprKind::IntLit;
  Span span;

  long long int_value = 0;      // IntLit / CharLit
  std::string text;             // Ident name, StrLit contents (decoded), op spelling
  std::string raw;              // original lexeme for literals (render fidelity)

  ExprPtr a, b, c;              // operands
  std::vector<ExprPtr> args;    // Call arguments
  std::string member;           // Member field name
  bool arrow = false;           // Member: -> vs .
  std::shared_ptr<Type> sizeof_type; // SizeofType
};

ExprPtr make_int(long long v, Span sp = {});
ExprPtr make_ident(std::string name, Span sp = {});
ExprPtr make_binary(std::string op, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_call(std::string callee, std::vector<ExprPtr> args);

// True if the expression contains no assignment, call, increment/decrement
// or comma-like side effects (the bounds-expression discipline).
bool side_effect_free(const Expr &e);

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

enum class ScopeMarker { None, Checked, Unchecked };

struct Decl; // variable declaration (local, global, parameter, field)

enum class StmtKind {
  Compound,
  If,
  While,
  For,
  Return,
  ExprStmt,
  DeclStmt,
  Empty,
  CondBlock, // #ifdef/#ifndef NAME ... [#else ...] #endif at statement level
};

struct Stmt {
  StmtKind kind = StmtKind::Compound;
  Span span;

  ScopeMarker marker = ScopeMarker::None;  // Compound: _Checked/_Unchecked prefix
  std::vector<StmtPtr> body;               // Compound / CondBlock then-branch
  std::vector<StmtPtr> else_body;          // CondBlock else-branch
  ExprPtr cond;                            // If/While/For condition
  StmtPtr then_stmt, else_stmt;            // If
  StmtPtr loop_body;                       // While/For
  ExprPtr init_expr, step_expr;            // For (init may be a decl instead)
  std::shared_ptr<Decl> init_decl;         // For-init declaration
  ExprPtr value;                           // Return (optional) / ExprStmt
  std::shared_ptr<Decl> decl;              // DeclStmt
  std::string cond_name;                   // CondBlock macro name
  bool cond_negated = false;               // CondBlock: #ifndef
  bool has_else = false;                   // CondBlock had an #else
};

// ---------------------------------------------------------------------------
// Declarations and top-level items
// ---------------------------------------------------------------------------

struct Initializer {
  ExprPtr expr;                 // scalar initializer
  std::vector<ExprPtr> list;    // brace list
  bool is_list = false;
  bool present() const { return expr != nullptr || is_list; }
};

struct Decl {
  std::string name;
  Type type;
  std::optional<int> array_size;       // fixed-size array declarator
  BoundsExpr bounds;                   // count/byte_count/bounds annotation
  std::optional<InterfaceType> interface; // itype annotation
  Initializer init;
  bool is_static = false;
  Span span;

  bool annotated() const { return bounds.present() || interface.has_value(); }
};

struct RecordDef {
  std::string name;
  std::vector<Decl> fields;
  Span span;
};

struct TypedefDef {
  std::string name;   // the alias
  Type aliased;
  Span span;
};

struct Item;
using ItemPtr = std::shared_ptr<Item>;

struct Function {
  Type ret;
  BoundsExpr ret_bounds;
  std::optional<InterfaceType> ret_interface;
  std::string name;
  std::vector<Decl> params;
  bool varargs = false;
  bool void_params = false;  // spelled `(void)`
  std::optional<Stmt> body;  // absent for prototypes
  ScopeMarker body_marker = ScopeMarker::None; // `f(...) _Checked { ... }`
  bool is_static = false;
  Span span;

  bool is_prototype() const { return !body.has_value(); }
};

enum class ItemKind {
  Function,
  GlobalVar,
  Record,
  Typedef,
  Verbatim,  // #include / #define / other pragmas, preserved byte-for-byte
  CondBlock, // #ifdef/#ifndef NAME ... [#else ...] #endif at top level
};

struct Item {
  ItemKind kind = ItemKind::Verbatim;
  Span span;

  std::shared_ptr<Function> fn;
  std::shared_ptr<Decl> global;
  std::shared_ptr<RecordDef> record;
  std::shared_ptr<TypedefDef> type_def;
  std::string verbatim;    // exact directive line(s), no trailing newline

  std::string cond_name;   // CondBlock
  bool cond_negated = false;
  bool has_else = false;
  std::vector<ItemPtr> then_items;
  std::vector<ItemPtr> else_items;
};

enum class ScopeDefault { Unchecked, Checked };

struct SourceUnit {
  std::vector<ItemPtr> items;
  ScopeDefault scope_default = ScopeDefault::Unchecked;
  std::string source_name;
  bool has_compat_include = false; // saw `#include "checkedc_compat.h"`
};

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

// Size in bytes of a scalar under the 32-bit model. Void counts as 1
// (byte-granular regions).
int scalar_size(ScalarKind k);

// Element size of a base type; records are the packed sum of their fields.
// Opaque bases have no size (returns 0).
int base_size(const BaseType &b, const std::vector<RecordDef *> &records);

// Structural equality, defined as native-render token equality.
bool structurally_equal(const SourceUnit &a, const SourceUnit &b);

// Constant folding for static checks; returns nullopt when not constant.
std::optional<long long> const_eval(const Expr &e);

// Token-level equality of two expressions (used by bounds containment and
// the nt terminator rule).
bool expr_tokens_equal(const Expr &a, const Expr &b);

} // namespace chkcc
