#include "chkcc/parser.hpp"

#include <cstdlib>
#include <map>

namespace chkcc {

namespace {

bool is_macro_type_name(const std::string &s) {
  return s == "ptr" || s == "array_ptr" || s == "nt_array_ptr";
}

bool is_macro_ann_name(const std::string &s) {
  return s == "acount" || s == "abyte_count" || s == "abounds" || s == "atype";
}

PtrKind macro_type_kind(const std::string &s) {
  if (s == "ptr") return PtrKind::Ptr;
  if (s == "array_ptr") return PtrKind::ArrayPtr;
  return PtrKind::NtArrayPtr;
}

PtrKind native_type_kind(const std::string &s) {
  if (s == "_Ptr") return PtrKind::Ptr;
  if (s == "_Array_ptr") return PtrKind::ArrayPtr;
  return PtrKind::NtArrayPtr;
}

long long decode_int(const std::string &lexeme) {
  return std::strtoll(lexeme.c_str(), nullptr, 0);
}

long long decode_char(const std::string &lexeme) {
  // lexeme includes the quotes
  if (lexeme.size() < 3) return 0;
  if (lexeme[1] != '\\') return (unsigned char)lexeme[1];
  switch (lexeme[2]) {
  case 'n': return '\n';
  case 't': return '\t';
  case 'r': return '\r';
  case '0': return 0;
  case '\\': return '\\';
  case '\'': return '\'';
  case '"': return '"';
  default: return (unsigned char)lexeme[2];
  }
}

std::string decode_string(const std::string &lexeme) {
  std::string out;
  for (size_t i = 1; i + 1 < lexeme.size(); ++i) {
    char c = lexeme[i];
    if (c == '\\' && i + 2 < lexeme.size() + 1) {
      ++i;
      switch (lexeme[i]) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      case '0': out += '\0'; break;
      case '\\': out += '\\'; break;
      case '"': out += '"'; break;
      case '\'': out += '\''; break;
      default: out += lexeme[i]; break;
      }
    } else {
      out += c;
    }
  }
  return out;
}

struct BuiltinType {
  const char *name;
  ScalarKind scalar;
  bool opaque;
};

const BuiltinType kBuiltinTypedefs[] = {
    {"size_t", ScalarKind::UInt, false},   {"ssize_t", ScalarKind::Int, false},
    {"ptrdiff_t", ScalarKind::Int, false}, {"uint8_t", ScalarKind::UChar, false},
    {"uint16_t", ScalarKind::UShort, false}, {"uint32_t", ScalarKind::UInt, false},
    {"int8_t", ScalarKind::SChar, false},  {"int16_t", ScalarKind::Short, false},
    {"int32_t", ScalarKind::Int, false},   {"FILE", ScalarKind::Void, true},
};

class Parser {
public:
  Parser(const std::vector<Token> &toks, std::string source_name)
      : toks_(toks), name_(std::move(source_name)) {
    for (const auto &b : kBuiltinTypedefs) {
      Type t;
      if (b.opaque) {
        t.base.is_opaque = true;
        t.base.record_name = b.name;
      } else {
        t.base.scalar = b.scalar;
      }
      t.base.spelling = b.name;
      typedefs_[b.name] = t;
    }
  }

  ParseResult run() {
    ParseResult res;
    res.unit.source_name = name_;
    parse_items(res.unit.items, res.unit, /*top=*/true, /*in_cond=*/false);
    res.diags = diags_;
    return res;
  }

private:
  const std::vector<Token> &toks_;
  std::string name_;
  size_t pos_ = 0;
  DiagList diags_;
  std::map<std::string, Type> typedefs_;
  std::map<std::string, bool> record_tags_;
  bool fatal_ = false;

  const Token &cur() const { return toks_[pos_]; }
  const Token &peek(size_t k = 1) const {
    size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at_end() const { return cur().kind == TokenKind::Eof; }
  const Token &consume() {
    const Token &t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool match_punct(std::string_view p) {
    if (cur().is_punct(p)) {
      consume();
      return true;
    }
    return false;
  }
  bool expect_punct(std::string_view p) {
    if (match_punct(p)) return true;
    error("E-PARSE", std::string("expected '") + std::string(p) + "', got '" +
                         cur().text + "'");
    return false;
  }
  void error(const std::string &code, const std::string &msg) {
    if (fatal_) return;
    diags_.error(code, msg, cur().span);
    fatal_ = true;
  }
  void soft_error(const std::string &code, const std::string &msg, Span sp) {
    diags_.error(code, msg, sp);
  }

  // --- type detection ------------------------------------------------------

  bool is_scalar_keyword(const Token &t) const {
    return t.is_kw("void") || t.is_kw("char") || t.is_kw("short") ||
           t.is_kw("int") || t.is_kw("long") || t.is_kw("unsigned") ||
           t.is_kw("signed");
  }

  bool starts_type(const Token &t) const {
    if (t.is_kw("const") || t.is_kw("struct") || is_scalar_keyword(t))
      return true;
    if (t.kind == TokenKind::CheckedKeyword &&
        (t.text == "_Ptr" || t.text == "_Array_ptr" || t.text == "_Nt_array_ptr"))
      return true;
    if (t.kind == TokenKind::Identifier) {
      if (is_macro_type_name(t.text)) return true;
      return typedefs_.count(t.text) > 0;
    }
    return false;
  }

  bool starts_decl(const Token &t) const {
    if (t.is_kw("static") || t.is_kw("typedef")) return true;
    if (t.kind == TokenKind::Identifier && is_macro_type_name(t.text))
      return peek().is_punct("(");
    return starts_type(t);
  }

  // --- directives ----------------------------------------------------------

  // Reassembles directive text from the '#' token to the end of its line.
  std::string directive_text(size_t from) {
    std::string out = toks_[from].text;
    size_t i = from + 1;
    while (i < toks_.size() && toks_[i].kind != TokenKind::Eof &&
           !toks_[i].starts_line) {
      out += toks_[i].leading;
      out += toks_[i].text;
      ++i;
    }
    return out;
  }

  size_t directive_end(size_t from) const {
    size_t i = from + 1;
    while (i < toks_.size() && toks_[i].kind != TokenKind::Eof &&
           !toks_[i].starts_line)
      ++i;
    return i;
  }

  struct DirectiveHead {
    std::string word;  // include / define / pragma / ifdef / ifndef / else / endif
    std::string arg1;
  };

  DirectiveHead directive_head() const {
    DirectiveHead h;
    if (pos_ + 1 < toks_.size()) h.word = toks_[pos_ + 1].text;
    if (pos_ + 2 < toks_.size()) h.arg1 = toks_[pos_ + 2].text;
    return h;
  }

  // --- items ---------------------------------------------------------------

  // Parses items until EOF (top level) or a #else/#endif directive
  // (inside a conditional block). Returns the stopping directive word.
  std::string parse_items(std::vector<ItemPtr> &out, SourceUnit &unit,
                          bool top, bool in_cond) {
    (void)top;
    while (!at_end() && !fatal_) {
      if (cur().is_punct("#")) {
        DirectiveHead h = directive_head();
        if (in_cond && (h.word == "else" || h.word == "endif")) return h.word;
        if (h.word == "ifdef" || h.word == "ifndef") {
          out.push_back(parse_cond_item(unit));
          continue;
        }
        if (h.word == "else" || h.word == "endif") {
          error("E-PARSE", "#" + h.word + " without matching #ifdef");
          return "";
        }
        parse_plain_directive(out, unit);
        continue;
      }
      ItemPtr item = parse_item();
      if (item) out.push_back(std::move(item));
    }
    if (in_cond && !fatal_) error("E-PARSE", "missing #endif");
    return "";
  }

  void parse_plain_directive(std::vector<ItemPtr> &out, SourceUnit &unit) {
    size_t start = pos_;
    DirectiveHead h = directive_head();
    std::string text = directive_text(start);
    Span sp = {toks_[start].span.begin, toks_[directive_end(start) - 1].span.end};
    pos_ = directive_end(start);

    if (h.word == "include" && text.find("\"checkedc_compat.h\"") != std::string::npos) {
      unit.has_compat_include = true;
      return;
    }
    if (h.word == "pragma" && h.arg1 == "CHECKED_SCOPE") {
      bool before_items = true;
      for (const auto &it : unit.items)
        if (it) { before_items = false; break; }
      if (before_items && out.empty()) {
        unit.scope_default = ScopeDefault::Checked;
      } else {
        diags_.warning("W-PRAGMA-LATE",
                       "checked-scope pragma after first item ignored", sp);
      }
      return;
    }
    auto item = std::make_shared<Item>();
    item->kind = ItemKind::Verbatim;
    item->verbatim = std::move(text);
    item->span = sp;
    out.push_back(std::move(item));
  }

  ItemPtr parse_cond_item(SourceUnit &unit) {
    auto item = std::make_shared<Item>();
    item->kind = ItemKind::CondBlock;
    item->span = cur().span;
    DirectiveHead h = directive_head();
    item->cond_negated = (h.word == "ifndef");
    item->cond_name = h.arg1;
    pos_ = directive_end(pos_);

    std::string stop = parse_items(item->then_items, unit, false, true);
    if (stop == "else") {
      item->has_else = true;
      pos_ = directive_end(pos_);
      stop = parse_items(item->else_items, unit, false, true);
    }
    if (stop == "endif") pos_ = directive_end(pos_);
    return item;
  }

  ItemPtr parse_item() {
    Span start_span = cur().span;
    if (cur().is_kw("typedef")) return parse_typedef();
    if (cur().is_kw("struct") && peek().kind == TokenKind::Identifier &&
        peek(2).is_punct("{"))
      return parse_record();

    bool is_static = false;
    if (cur().is_kw("static")) {
      is_static = true;
      consume();
    }
    if (!starts_type(cur())) {
      error("E-PARSE", "expected declaration, got '" + cur().text + "'");
      return nullptr;
    }
    Type base = parse_type();
    if (fatal_) return nullptr;

    Decl d = parse_declarator(base);
    if (fatal_) return nullptr;

    if (cur().is_punct("(")) return parse_function(std::move(d), is_static, start_span);

    parse_annotation(d);
    validate_annotation(d);
    if (cur().is_punct("=")) {
      consume();
      d.init = parse_initializer();
    }
    if (cur().is_punct(",")) {
      error("E-PARSE", "multiple declarators per declaration are not supported");
      return nullptr;
    }
    expect_punct(";");
    d.is_static = is_static;
    d.span = start_span;

    auto item = std::make_shared<Item>();
    item->kind = ItemKind::GlobalVar;
    item->global = std::make_shared<Decl>(std::move(d));
    item->span = start_span;
    return item;
  }

  ItemPtr parse_typedef() {
    Span sp = cur().span;
    consume(); // typedef
    Type t = parse_type();
    if (fatal_) return nullptr;
    while (match_punct("*")) {
      if (t.kind == PtrKind::NonPointer) t.kind = PtrKind::PlainPtr;
      else ++t.extra_stars;
    }
    if (cur().kind != TokenKind::Identifier) {
      error("E-PARSE", "expected typedef name");
      return nullptr;
    }
    std::string alias = consume().text;
    expect_punct(";");
    typedefs_[alias] = t;

    auto td = std::make_shared<TypedefDef>();
    td->name = alias;
    td->aliased = t;
    td->span = sp;
    auto item = std::make_shared<Item>();
    item->kind = ItemKind::Typedef;
    item->type_def = std::move(td);
    item->span = sp;
    return item;
  }

  ItemPtr parse_record() {
    Span sp = cur().span;
    consume(); // struct
    std::string tag = consume().text;
    record_tags_[tag] = true;
    expect_punct("{");
    auto rec = std::make_shared<RecordDef>();
    rec->name = tag;
    rec->span = sp;
    while (!cur().is_punct("}") && !at_end() && !fatal_) {
      Type ft = parse_type();
      if (fatal_) break;
      Decl f = parse_declarator(ft);
      if (fatal_) break;
      if (cur().is_punct(":") || (cur().kind == TokenKind::Identifier &&
                                  is_macro_ann_name(cur().text))) {
        soft_error("E-ANN-FIELD", "annotations are not supported on record fields",
                   cur().span);
        parse_annotation(f);
        f.bounds = BoundsExpr{};
        f.interface.reset();
      }
      if (f.array_size.has_value()) {
        soft_error("E-PARSE-FIELD", "array fields are not supported", f.span);
      }
      expect_punct(";");
      rec->fields.push_back(std::move(f));
    }
    expect_punct("}");
    expect_punct(";");
    auto item = std::make_shared<Item>();
    item->kind = ItemKind::Record;
    item->record = std::move(rec);
    item->span = sp;
    return item;
  }

  ItemPtr parse_function(Decl head, bool is_static, Span sp) {
    auto fn = std::make_shared<Function>();
    fn->ret = head.type;
    fn->name = head.name;
    fn->is_static = is_static;
    fn->span = sp;
    consume(); // '('

    if (cur().is_kw("void") && peek().is_punct(")")) {
      consume();
      fn->void_params = true;
    }
    while (!cur().is_punct(")") && !at_end() && !fatal_) {
      if (cur().is_punct("...")) {
        consume();
        fn->varargs = true;
        break;
      }
      Type pt = parse_type();
      if (fatal_) break;
      Decl p;
      if (cur().is_punct("*") || cur().kind == TokenKind::Identifier) {
        p = parse_declarator(pt);
      } else {
        p.type = pt; // unnamed parameter
        p.span = cur().span;
      }
      parse_annotation(p);
      validate_annotation(p);
      fn->params.push_back(std::move(p));
      if (!cur().is_punct(")")) {
        if (!expect_punct(",")) break;
      }
    }
    expect_punct(")");

    // return annotation (itype/bounds) after the parameter list
    Decl ret_holder;
    ret_holder.type = fn->ret;
    parse_annotation(ret_holder);
    fn->ret_bounds = ret_holder.bounds;
    fn->ret_interface = ret_holder.interface;
    if (fn->ret_interface && fn->ret.kind != PtrKind::PlainPtr)
      soft_error("E-ANN-ITYPE", "itype requires an unchecked pointer type",
                 ret_holder.span);

    if (cur().kind == TokenKind::CheckedKeyword &&
        (cur().text == "_Checked" || cur().text == "_Unchecked")) {
      fn->body_marker =
          cur().text == "_Checked" ? ScopeMarker::Checked : ScopeMarker::Unchecked;
      consume();
      if (!cur().is_punct("{"))
        error("E-PARSE", "expected '{' after scope marker");
    } else if (cur().kind == TokenKind::Identifier &&
               (cur().text == "checked_scope" || cur().text == "unchecked_scope") &&
               peek().is_punct("{")) {
      fn->body_marker = cur().text == "checked_scope" ? ScopeMarker::Checked
                                                      : ScopeMarker::Unchecked;
      consume();
    }

    if (cur().is_punct("{")) {
      fn->body = parse_compound(ScopeMarker::None);
    } else {
      if (fn->body_marker != ScopeMarker::None)
        error("E-PARSE", "scope marker on a prototype");
      expect_punct(";");
    }

    auto item = std::make_shared<Item>();
    item->kind = ItemKind::Function;
    item->fn = std::move(fn);
    item->span = sp;
    return item;
  }

  // --- types and declarators ----------------------------------------------

  Type parse_type() {
    Type t;
    if (cur().is_kw("const")) {
      t.base.is_const = true;
      consume();
    }
    bool outer_const = t.base.is_const;
    const Token &tok = cur();
    if (tok.kind == TokenKind::CheckedKeyword &&
        (tok.text == "_Ptr" || tok.text == "_Array_ptr" ||
         tok.text == "_Nt_array_ptr")) {
      t.kind = native_type_kind(tok.text);
      consume();
      expect_punct("<");
      t.base = parse_base_type();
      t.base.is_const = t.base.is_const || outer_const;
      expect_punct(">");
      return t;
    }
    if (tok.kind == TokenKind::Identifier && is_macro_type_name(tok.text) &&
        peek().is_punct("(")) {
      t.kind = macro_type_kind(tok.text);
      consume();
      consume(); // '('
      t.base = parse_base_type();
      expect_punct(")");
      return t;
    }
    t.base = parse_base_type();
    t.base.is_const = t.base.is_const || outer_const;
    while (cur().is_punct("*")) {
      consume();
      if (t.kind == PtrKind::NonPointer) t.kind = PtrKind::PlainPtr;
      else ++t.extra_stars;
    }
    return t;
  }

  BaseType parse_base_type() {
    BaseType b;
    if (cur().is_kw("const")) {
      b.is_const = true;
      consume();
    }
    if (cur().is_kw("struct")) {
      consume();
      if (cur().kind != TokenKind::Identifier) {
        error("E-PARSE", "expected struct tag");
        return b;
      }
      b.is_record = true;
      b.record_name = consume().text;
      b.spelling = "struct " + b.record_name;
      return b;
    }
    if (is_scalar_keyword(cur())) {
      std::vector<std::string> words;
      while (is_scalar_keyword(cur())) words.push_back(consume().text);
      b.scalar = combine_scalar(words);
      std::string sp;
      for (const auto &w : words) {
        if (!sp.empty()) sp += ' ';
        sp += w;
      }
      b.spelling = sp;
      return b;
    }
    if (cur().kind == TokenKind::Identifier) {
      auto it = typedefs_.find(cur().text);
      if (it != typedefs_.end()) {
        const Type &al = it->second;
        if (al.is_pointer()) {
          error("E-PARSE", "pointer typedefs are not usable as base types");
          return b;
        }
        b = al.base;
        b.spelling = cur().text;
        consume();
        return b;
      }
    }
    error("E-PARSE", "expected type, got '" + cur().text + "'");
    return b;
  }

  ScalarKind combine_scalar(const std::vector<std::string> &words) {
    bool has_unsigned = false, has_signed = false;
    std::string core;
    for (const auto &w : words) {
      if (w == "unsigned") has_unsigned = true;
      else if (w == "signed") has_signed = true;
      else if (core.empty()) core = w;
      else if (core == "short" || core == "long") {
        if (w == "int") continue; // short int / long int
        core = w;
      } else core = w;
    }
    if (core.empty() || core == "int")
      return has_unsigned ? ScalarKind::UInt : ScalarKind::Int;
    if (core == "void") return ScalarKind::Void;
    if (core == "char") {
      if (has_unsigned) return ScalarKind::UChar;
      if (has_signed) return ScalarKind::SChar;
      return ScalarKind::Char;
    }
    if (core == "short") return has_unsigned ? ScalarKind::UShort : ScalarKind::Short;
    if (core == "long") return has_unsigned ? ScalarKind::ULong : ScalarKind::Long;
    return ScalarKind::Int;
  }

  Decl parse_declarator(Type base) {
    Decl d;
    d.type = base;
    d.span = cur().span;
    while (cur().is_punct("*")) {
      consume();
      if (d.type.kind == PtrKind::NonPointer) d.type.kind = PtrKind::PlainPtr;
      else if (d.type.kind == PtrKind::PlainPtr) ++d.type.extra_stars;
      else {
        soft_error("E-PARSE", "'*' declarator on a checked pointer type",
                   cur().span);
      }
    }
    if (cur().kind != TokenKind::Identifier) {
      error("E-PARSE", "expected identifier, got '" + cur().text + "'");
      return d;
    }
    d.name = consume().text;
    if (match_punct("[")) {
      ExprPtr n = parse_expr();
      auto v = n ? const_eval(*n) : std::nullopt;
      if (!v || *v < 0)
        soft_error("E-PARSE", "array size must be a non-negative constant",
                   d.span);
      else
        d.array_size = (int)*v;
      expect_punct("]");
    }
    return d;
  }

  // --- annotations ----------------------------------------------------------

  void parse_annotation(Decl &d) {
    // native: `: count(e)` / `: byte_count(e)` / `: bounds(a,b)` / `: itype(T)`
    if (cur().is_punct(":")) {
      consume();
      if (cur().kind != TokenKind::Identifier) {
        error("E-PARSE", "expected annotation after ':'");
        return;
      }
      std::string word = consume().text;
      if (word == "count") d.bounds = parse_bounds_args(BoundsForm::Count);
      else if (word == "byte_count") d.bounds = parse_bounds_args(BoundsForm::ByteCount);
      else if (word == "bounds") d.bounds = parse_bounds_args(BoundsForm::Range);
      else if (word == "itype") d.interface = parse_itype(/*macro_form=*/false);
      else error("E-PARSE", "unknown annotation '" + word + "'");
      return;
    }
    // macro: `acount(e)` etc. directly after the declarator
    if (cur().kind == TokenKind::Identifier && is_macro_ann_name(cur().text)) {
      std::string word = consume().text;
      if (word == "acount") d.bounds = parse_bounds_args(BoundsForm::Count);
      else if (word == "abyte_count") d.bounds = parse_bounds_args(BoundsForm::ByteCount);
      else if (word == "abounds") d.bounds = parse_bounds_args(BoundsForm::Range);
      else d.interface = parse_itype(/*macro_form=*/true);
    }
  }

  BoundsExpr parse_bounds_args(BoundsForm form) {
    BoundsExpr b;
    b.form = form;
    expect_punct("(");
    b.e1 = parse_expr();
    if (form == BoundsForm::Range) {
      expect_punct(",");
      b.e2 = parse_expr();
    }
    expect_punct(")");
    return b;
  }

  std::optional<InterfaceType> parse_itype(bool macro_form) {
    expect_punct("(");
    InterfaceType it;
    const Token &tok = cur();
    if (tok.kind == TokenKind::CheckedKeyword &&
        (tok.text == "_Ptr" || tok.text == "_Array_ptr" ||
         tok.text == "_Nt_array_ptr")) {
      it.kind = native_type_kind(tok.text);
      consume();
      expect_punct("<");
      it.pointee = parse_base_type();
      expect_punct(">");
    } else if (tok.kind == TokenKind::Identifier && is_macro_type_name(tok.text)) {
      it.kind = macro_type_kind(tok.text);
      consume();
      // native itype spells the argument `ptr<T>`, macro form `ptr(T)`
      if (match_punct("<")) {
        it.pointee = parse_base_type();
        expect_punct(">");
      } else {
        expect_punct("(");
        it.pointee = parse_base_type();
        expect_punct(")");
      }
    } else {
      error("E-PARSE", "expected checked pointer type in itype");
      (void)macro_form;
      return std::nullopt;
    }
    expect_punct(")");
    return it;
  }

  void validate_annotation(Decl &d) {
    if (!d.annotated()) return;
    if (!d.type.is_pointer()) {
      soft_error("E-ANN-NONPTR",
                 "bounds annotation on non-pointer declarator '" + d.name + "'",
                 d.span);
      d.bounds = BoundsExpr{};
      d.interface.reset();
      return;
    }
    if (d.type.kind == PtrKind::Ptr && d.bounds.present()) {
      soft_error("E-ANN-PTR-BOUNDS",
                 "singleton checked pointer '" + d.name + "' cannot carry bounds",
                 d.span);
      d.bounds = BoundsExpr{};
    }
    if (d.interface && d.type.kind != PtrKind::PlainPtr) {
      soft_error("E-ANN-ITYPE",
                 "itype on '" + d.name + "' requires an unchecked pointer type",
                 d.span);
      d.interface.reset();
    }
  }

  Initializer parse_initializer() {
    Initializer init;
    if (match_punct("{")) {
      init.is_list = true;
      while (!cur().is_punct("}") && !at_end() && !fatal_) {
        init.list.push_back(parse_expr());
        if (!cur().is_punct("}")) {
          if (!expect_punct(",")) break;
        }
      }
      expect_punct("}");
      return init;
    }
    init.expr = parse_expr();
    return init;
  }

  // --- statements -----------------------------------------------------------

  Stmt parse_compound(ScopeMarker marker) {
    Stmt s;
    s.kind = StmtKind::Compound;
    s.marker = marker;
    s.span = cur().span;
    expect_punct("{");
    while (!cur().is_punct("}") && !at_end() && !fatal_) {
      StmtPtr st = parse_stmt();
      if (st) s.body.push_back(std::move(st));
    }
    expect_punct("}");
    return s;
  }

  StmtPtr parse_stmt() {
    auto s = std::make_shared<Stmt>();
    s->span = cur().span;

    if (cur().is_punct("#")) {
      DirectiveHead h = directive_head();
      if (h.word == "ifdef" || h.word == "ifndef") return parse_cond_stmt();
      error("E-PARSE", "unsupported directive '#" + h.word + "' inside a function");
      return nullptr;
    }
    if (cur().kind == TokenKind::CheckedKeyword &&
        (cur().text == "_Checked" || cur().text == "_Unchecked")) {
      ScopeMarker m = cur().text == "_Checked" ? ScopeMarker::Checked
                                               : ScopeMarker::Unchecked;
      consume();
      *s = parse_compound(m);
      return s;
    }
    if (cur().kind == TokenKind::Identifier &&
        (cur().text == "checked_scope" || cur().text == "unchecked_scope") &&
        peek().is_punct("{")) {
      ScopeMarker m = cur().text == "checked_scope" ? ScopeMarker::Checked
                                                    : ScopeMarker::Unchecked;
      consume();
      *s = parse_compound(m);
      return s;
    }
    if (cur().is_punct("{")) {
      *s = parse_compound(ScopeMarker::None);
      return s;
    }
    if (cur().is_punct(";")) {
      consume();
      s->kind = StmtKind::Empty;
      return s;
    }
    if (cur().is_kw("if")) {
      consume();
      s->kind = StmtKind::If;
      expect_punct("(");
      s->cond = parse_expr();
      expect_punct(")");
      s->then_stmt = parse_stmt();
      if (cur().is_kw("else")) {
        consume();
        s->else_stmt = parse_stmt();
      }
      return s;
    }
    if (cur().is_kw("while")) {
      consume();
      s->kind = StmtKind::While;
      expect_punct("(");
      s->cond = parse_expr();
      expect_punct(")");
      s->loop_body = parse_stmt();
      return s;
    }
    if (cur().is_kw("for")) {
      consume();
      s->kind = StmtKind::For;
      expect_punct("(");
      if (!cur().is_punct(";")) {
        if (starts_decl(cur())) {
          s->init_decl = parse_local_decl();
        } else {
          s->init_expr = parse_expr();
          expect_punct(";");
        }
      } else {
        consume();
      }
      if (!cur().is_punct(";")) s->cond = parse_expr();
      expect_punct(";");
      if (!cur().is_punct(")")) s->step_expr = parse_expr();
      expect_punct(")");
      s->loop_body = parse_stmt();
      return s;
    }
    if (cur().is_kw("return")) {
      consume();
      s->kind = StmtKind::Return;
      if (!cur().is_punct(";")) s->value = parse_expr();
      expect_punct(";");
      return s;
    }
    if (starts_decl(cur())) {
      s->kind = StmtKind::DeclStmt;
      s->decl = parse_local_decl();
      return s;
    }
    s->kind = StmtKind::ExprStmt;
    s->value = parse_expr();
    expect_punct(";");
    return s;
  }

  StmtPtr parse_cond_stmt() {
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::CondBlock;
    s->span = cur().span;
    DirectiveHead h = directive_head();
    s->cond_negated = (h.word == "ifndef");
    s->cond_name = h.arg1;
    pos_ = directive_end(pos_);

    auto parse_branch = [&](std::vector<StmtPtr> &into) -> std::string {
      while (!at_end() && !fatal_) {
        if (cur().is_punct("#")) {
          DirectiveHead d = directive_head();
          if (d.word == "else" || d.word == "endif") return d.word;
          if (d.word == "ifdef" || d.word == "ifndef") {
            into.push_back(parse_cond_stmt());
            continue;
          }
          error("E-PARSE", "unsupported directive '#" + d.word + "' inside a function");
          return "";
        }
        StmtPtr st = parse_stmt();
        if (st) into.push_back(std::move(st));
      }
      error("E-PARSE", "missing #endif");
      return "";
    };

    std::string stop = parse_branch(s->body);
    if (stop == "else") {
      s->has_else = true;
      pos_ = directive_end(pos_);
      stop = parse_branch(s->else_body);
    }
    if (stop == "endif") pos_ = directive_end(pos_);
    return s;
  }

  std::shared_ptr<Decl> parse_local_decl() {
    auto d = std::make_shared<Decl>();
    bool is_static = false;
    if (cur().is_kw("static")) {
      is_static = true;
      consume();
    }
    Type t = parse_type();
    *d = parse_declarator(t);
    d->is_static = is_static;
    parse_annotation(*d);
    validate_annotation(*d);
    if (match_punct("=")) d->init = parse_initializer();
    expect_punct(";");
    return d;
  }

  // --- expressions -----------------------------------------------------------

  ExprPtr parse_expr() { return parse_assign(); }

  ExprPtr parse_assign() {
    ExprPtr lhs = parse_ternary();
    if (cur().is_punct("=") || cur().is_punct("+=") || cur().is_punct("-=")) {
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Assign;
      e->text = consume().text;
      e->span = lhs ? lhs->span : cur().span;
      e->a = std::move(lhs);
      e->b = parse_assign();
      return e;
    }
    return lhs;
  }

  ExprPtr parse_ternary() {
    ExprPtr c = parse_binary(0);
    if (cur().is_punct("?")) {
      consume();
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Ternary;
      e->span = c ? c->span : cur().span;
      e->a = std::move(c);
      e->b = parse_expr();
      expect_punct(":");
      e->c = parse_ternary();
      return e;
    }
    return c;
  }

  struct OpLevel {
    std::vector<std::string_view> ops;
  };

  const std::vector<OpLevel> &op_levels() const {
    static const std::vector<OpLevel> levels = {
        {{"||"}},
        {{"&&"}},
        {{"|"}},
        {{"^"}},
        {{"&"}},
        {{"==", "!="}},
        {{"<", "<=", ">", ">="}},
        {{"<<", ">>"}},
        {{"+", "-"}},
        {{"*", "/", "%"}},
    };
    return levels;
  }

  ExprPtr parse_binary(size_t level) {
    const auto &levels = op_levels();
    if (level >= levels.size()) return parse_unary();
    ExprPtr lhs = parse_binary(level + 1);
    while (!fatal_) {
      bool matched = false;
      for (auto op : levels[level].ops) {
        if (cur().is_punct(op)) {
          consume();
          ExprPtr rhs = parse_binary(level + 1);
          lhs = make_binary(std::string(op), std::move(lhs), std::move(rhs));
          matched = true;
          break;
        }
      }
      if (!matched) break;
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    const Token &t = cur();
    if (t.is_punct("-") || t.is_punct("!") || t.is_punct("~") ||
        t.is_punct("*") || t.is_punct("&") || t.is_punct("++") ||
        t.is_punct("--")) {
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Unary;
      e->span = t.span;
      e->text = consume().text;
      e->a = parse_unary();
      return e;
    }
    if (t.is_kw("sizeof")) {
      Span sp = t.span;
      consume();
      if (cur().is_punct("(") && starts_type(peek())) {
        consume();
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::SizeofType;
        e->span = sp;
        e->sizeof_type = std::make_shared<Type>(parse_type());
        expect_punct(")");
        return e;
      }
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::SizeofExpr;
      e->span = sp;
      e->a = parse_unary();
      return e;
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    while (!fatal_) {
      if (cur().is_punct("[")) {
        consume();
        auto idx = std::make_shared<Expr>();
        idx->kind = ExprKind::Index;
        idx->span = e ? e->span : cur().span;
        idx->a = std::move(e);
        idx->b = parse_expr();
        expect_punct("]");
        e = std::move(idx);
        continue;
      }
      if (cur().is_punct("(")) {
        consume();
        auto call = std::make_shared<Expr>();
        call->kind = ExprKind::Call;
        call->span = e ? e->span : cur().span;
        call->a = std::move(e);
        while (!cur().is_punct(")") && !at_end() && !fatal_) {
          call->args.push_back(parse_assign());
          if (!cur().is_punct(")")) {
            if (!expect_punct(",")) break;
          }
        }
        expect_punct(")");
        e = std::move(call);
        continue;
      }
      if (cur().is_punct(".") || cur().is_punct("->")) {
        bool arrow = cur().is_punct("->");
        consume();
        auto m = std::make_shared<Expr>();
        m->kind = ExprKind::Member;
        m->arrow = arrow;
        m->span = e ? e->span : cur().span;
        m->a = std::move(e);
        if (cur().kind != TokenKind::Identifier) {
          error("E-PARSE", "expected member name");
          return m;
        }
        m->member = consume().text;
        e = std::move(m);
        continue;
      }
      if (cur().is_punct("++") || cur().is_punct("--")) {
        auto p = std::make_shared<Expr>();
        p->kind = ExprKind::PostIncDec;
        p->span = e ? e->span : cur().span;
        p->text = consume().text;
        p->a = std::move(e);
        e = std::move(p);
        continue;
      }
      break;
    }
    return e;
  }

  ExprPtr parse_primary() {
    const Token &t = cur();
    auto e = std::make_shared<Expr>();
    e->span = t.span;
    switch (t.kind) {
    case TokenKind::IntLiteral:
      e->kind = ExprKind::IntLit;
      e->raw = t.text;
      e->int_value = decode_int(t.text);
      consume();
      return e;
    case TokenKind::CharLiteral:
      e->kind = ExprKind::CharLit;
      e->raw = t.text;
      e->int_value = decode_char(t.text);
      consume();
      return e;
    case TokenKind::StringLiteral:
      e->kind = ExprKind::StrLit;
      e->raw = t.text;
      e->text = decode_string(t.text);
      consume();
      return e;
    case TokenKind::Identifier:
      e->kind = ExprKind::Ident;
      e->text = t.text;
      consume();
      return e;
    case TokenKind::Punctuation:
      if (t.text == "(") {
        consume();
        ExprPtr inner = parse_expr();
        expect_punct(")");
        return inner;
      }
      break;
    default:
      break;
    }
    error("E-PARSE", "expected expression, got '" + t.text + "'");
    return e;
  }
};

} // namespace

ParseResult parse(const std::vector<Token> &tokens, std::string source_name) {
  Parser p(tokens, std::move(source_name));
  return p.run();
}

ParseResult parse_source(std::string_view source, std::string source_name) {
  auto toks = tokenize(source);
  if (!toks.ok()) {
    ParseResult res;
    res.unit.source_name = source_name;
    res.diags = toks.diags;
    return res;
  }
  return parse(toks.tokens, std::move(source_name));
}

} // namespace chkcc
