#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dceval/srcdiff.hpp"

namespace dceval::srcdiff {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Ident, Keyword, Number, Char, String, Op, End };

struct Token {
  Tok type = Tok::End;
  std::string_view text;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

const std::unordered_set<std::string_view>& keywords() {
  static const std::unordered_set<std::string_view> k = {
      "abstract", "assert",     "boolean",  "break",     "byte",      "case",       "catch",     "char",
      "class",    "const",      "continue", "default",   "do",        "double",     "else",      "enum",
      "extends",  "final",      "finally",  "float",     "for",       "goto",       "if",        "implements",
      "import",   "instanceof", "int",      "interface", "long",      "native",     "new",       "package",
      "private",  "protected",  "public",   "return",    "short",     "static",     "strictfp",  "super",
      "switch",   "synchronized", "this",   "throw",     "throws",    "transient",  "try",       "void",
      "volatile", "while",      "true",     "false",     "null"};
  return k;
}

bool is_primitive(std::string_view s) {
  return s == "boolean" || s == "byte" || s == "char" || s == "short" || s == "int" || s == "long" || s == "float" ||
         s == "double" || s == "void";
}

bool is_modifier(std::string_view s) {
  return s == "public" || s == "protected" || s == "private" || s == "static" || s == "abstract" || s == "final" ||
         s == "native" || s == "synchronized" || s == "transient" || s == "volatile" || s == "strictfp";
}

// '>' is always a single token so nested type arguments close cleanly; the
// expression parser glues adjacent ones back into shift operators.
constexpr std::array<std::string_view, 39> kOperators = {
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "<<",  "(",   ")",  "{",  "}",  "[",  "]",  ";",  ",",  ".",  "@",  "=",  "<",  "!",  "~",  "?",  ":",  "+",  "-",
    "*"};
constexpr std::array<std::string_view, 6> kMoreOperators = {"/", "&", "|", "^", "%", ">"};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.begin = pos_;
      t.line = line_;
      t.column = pos_ - line_start_ + 1;
      if (pos_ >= src_.size()) {
        t.type = Tok::End;
        t.end = pos_;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' || static_cast<unsigned char>(c) >= 0x80) {
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
                                      src_[pos_] == '$' || static_cast<unsigned char>(src_[pos_]) >= 0x80))
          ++pos_;
        t.text = src_.substr(t.begin, pos_ - t.begin);
        t.type = keywords().contains(t.text) ? Tok::Keyword : Tok::Ident;
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        number();
        t.type = Tok::Number;
      } else if (c == '"' || c == '\'') {
        quoted(c, t);
        t.type = c == '"' ? Tok::String : Tok::Char;
      } else {
        t.type = Tok::Op;
        std::size_t len = 0;
        for (auto op : kOperators)
          if (src_.substr(pos_, op.size()) == op) {
            len = op.size();
            break;
          }
        if (len == 0)
          for (auto op : kMoreOperators)
            if (src_.substr(pos_, op.size()) == op) {
              len = op.size();
              break;
            }
        if (len == 0) throw ParseError(t.line, t.column, std::string("unexpected character '") + c + "'");
        pos_ += len;
      }
      t.end = pos_;
      t.text = src_.substr(t.begin, t.end - t.begin);
      out.push_back(t);
    }
  }

 private:
  void newline_at(std::size_t i) {
    ++line_;
    line_start_ = i + 1;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        newline_at(pos_);
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c)) || c == '\f') {
        ++pos_;
      } else if (src_.substr(pos_, 2) == "//") {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (src_.substr(pos_, 2) == "/*") {
        std::size_t l = line_, col = pos_ - line_start_ + 1;
        std::size_t close = src_.find("*/", pos_ + 2);
        if (close == std::string_view::npos) throw ParseError(l, col, "unterminated comment");
        for (std::size_t i = pos_; i < close; ++i)
          if (src_[i] == '\n') newline_at(i);
        pos_ = close + 2;
      } else {
        break;
      }
    }
  }

  void number() {
    auto digitish = [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.'; };
    bool hex = src_.substr(pos_, 2) == "0x" || src_.substr(pos_, 2) == "0X";
    while (pos_ < src_.size()) {
      char ch = src_[pos_];
      if (ch == '.' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '.') break;
      if (digitish(ch)) {
        ++pos_;
        bool exp = hex ? (ch == 'p' || ch == 'P') : (ch == 'e' || ch == 'E');
        if (exp && pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      } else {
        break;
      }
    }
  }

  void quoted(char q, const Token& t) {
    ++pos_;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') throw ParseError(t.line, t.column, "unterminated literal");
      char ch = src_[pos_++];
      if (ch == '\\') {
        ++pos_;
      } else if (ch == q) {
        return;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;
};

struct Backtrack {};

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

  SourceTree run() {
    std::size_t b = cur().begin;
    int cu = make(NodeKind::CompilationUnit, "", b);
    std::vector<int> kids;
    std::size_t save = pos_;
    auto annos = modifiers();
    if (is_kw("package")) {
      std::size_t pb = cur().begin;
      next();
      int pkg = make(NodeKind::PackageDeclaration, "", pb);
      for (int a : annos) attach(pkg, a);
      attach(pkg, name());
      expect(";");
      close(pkg);
      kids.push_back(pkg);
    } else {
      pos_ = save;
      tree_.nodes.resize(static_cast<std::size_t>(cu) + 1);
    }
    while (is_kw("import")) kids.push_back(import_decl());
    while (cur().type != Tok::End) {
      if (accept(";")) continue;
      kids.push_back(type_declaration(modifiers()));
    }
    for (int k : kids) attach(cu, k);
    tree_.nodes[static_cast<std::size_t>(cu)].end = toks_.size() > 1 ? toks_[toks_.size() - 2].end : b;
    if (kids.empty()) tree_.nodes[static_cast<std::size_t>(cu)].end = b;
    tree_.root = cu;
    tree_.link_parents();
    return std::move(tree_);
  }

 private:
  // Token access ------------------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t n = 1) const { return toks_[std::min(pos_ + n, toks_.size() - 1)]; }
  void next() {
    if (cur().type != Tok::End) ++pos_;
  }
  bool is(std::string_view op) const { return cur().type == Tok::Op && cur().text == op; }
  bool is_at(std::size_t n, std::string_view op) const { return peek(n).type == Tok::Op && peek(n).text == op; }
  bool is_kw(std::string_view kw) const { return cur().type == Tok::Keyword && cur().text == kw; }
  bool is_ident() const { return cur().type == Tok::Ident; }
  bool accept(std::string_view op) {
    if (!is(op)) return false;
    next();
    return true;
  }
  bool accept_kw(std::string_view kw) {
    if (!is_kw(kw)) return false;
    next();
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    if (speculating_ > 0) throw Backtrack{};
    const Token& t = cur();
    std::string got = t.type == Tok::End ? "end of input" : "'" + std::string(t.text) + "'";
    throw ParseError(t.line, t.column, "expected " + what + ", found " + got);
  }
  void expect(std::string_view op) {
    if (!accept(op)) fail("'" + std::string(op) + "'");
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("'" + std::string(kw) + "'");
  }
  std::string_view ident() {
    if (!is_ident()) fail("identifier");
    auto t = cur().text;
    next();
    return t;
  }

  // Tree building -----------------------------------------------------------

  int make(NodeKind kind, std::string_view label, std::size_t begin) {
    Node n;
    n.kind = kind;
    n.label = std::string(label);
    n.begin = begin;
    n.end = begin;
    tree_.nodes.push_back(std::move(n));
    return static_cast<int>(tree_.nodes.size() - 1);
  }
  Node& node(int id) { return tree_.nodes[static_cast<std::size_t>(id)]; }
  void attach(int parent, int child) { node(parent).children.push_back(child); }
  int close(int id) {
    node(id).end = pos_ > 0 ? toks_[pos_ - 1].end : 0;
    return id;
  }
  // Wraps an already built node as the first child of a new one.
  int wrap(NodeKind kind, std::string_view label, int child) {
    int w = make(kind, label, node(child).begin);
    attach(w, child);
    node(w).end = node(child).end;
    return w;
  }
  int simple_name() {
    std::size_t b = cur().begin;
    auto id = ident();
    return close(make(NodeKind::SimpleName, id, b));
  }
  int name() {
    int n = simple_name();
    while (is(".") && peek().type == Tok::Ident) {
      next();
      int q = wrap(NodeKind::QualifiedName, "", n);
      attach(q, simple_name());
      n = close(q);
    }
    return n;
  }

  template <typename F>
  std::optional<int> attempt(F&& f) {
    std::size_t save = pos_;
    std::size_t size = tree_.nodes.size();
    ++speculating_;
    try {
      int r = f();
      --speculating_;
      return r;
    } catch (const Backtrack&) {
      --speculating_;
      pos_ = save;
      tree_.nodes.resize(size);
      return std::nullopt;
    }
  }

  // Declarations ------------------------------------------------------------

  int import_decl() {
    std::size_t b = cur().begin;
    expect_kw("import");
    bool is_static = accept_kw("static");
    int n = name();
    bool star = false;
    if (accept(".")) {
      expect("*");
      star = true;
    }
    expect(";");
    std::string label = std::string(is_static ? "static" : "") + (is_static && star ? " " : "") + (star ? ".*" : "");
    int imp = make(NodeKind::ImportDeclaration, label, b);
    attach(imp, n);
    return close(imp);
  }

  int annotation() {
    std::size_t b = cur().begin;
    expect("@");
    int n = name();
    if (!accept("(")) {
      int a = make(NodeKind::MarkerAnnotation, "", b);
      attach(a, n);
      return close(a);
    }
    if (accept(")")) {
      int a = make(NodeKind::NormalAnnotation, "", b);
      attach(a, n);
      return close(a);
    }
    if (is_ident() && is_at(1, "=")) {
      int a = make(NodeKind::NormalAnnotation, "", b);
      attach(a, n);
      do {
        std::size_t pb = cur().begin;
        int pair = make(NodeKind::MemberValuePair, "", pb);
        attach(pair, simple_name());
        expect("=");
        attach(pair, element_value());
        attach(a, close(pair));
      } while (accept(","));
      expect(")");
      return close(a);
    }
    int a = make(NodeKind::SingleMemberAnnotation, "", b);
    attach(a, n);
    attach(a, element_value());
    expect(")");
    return close(a);
  }

  int element_value() {
    if (is("@")) return annotation();
    if (is("{")) {
      std::size_t b = cur().begin;
      next();
      int init = make(NodeKind::ArrayInitializer, "", b);
      while (!is("}")) {
        attach(init, element_value());
        if (!accept(",")) break;
      }
      expect("}");
      return close(init);
    }
    return conditional();
  }

  std::vector<int> modifiers() {
    std::vector<int> out;
    while (true) {
      if (is("@") && !(peek().type == Tok::Keyword && peek().text == "interface")) {
        out.push_back(annotation());
      } else if (cur().type == Tok::Keyword && is_modifier(cur().text)) {
        std::size_t b = cur().begin;
        auto kw = cur().text;
        next();
        out.push_back(close(make(NodeKind::Modifier, kw, b)));
      } else if (is_kw("default") && !is_at(1, ":")) {
        std::size_t b = cur().begin;
        next();
        out.push_back(close(make(NodeKind::Modifier, "default", b)));
      } else {
        return out;
      }
    }
  }

  int type_declaration(const std::vector<int>& mods) {
    std::size_t b = mods.empty() ? cur().begin : node(mods.front()).begin;
    if (accept_kw("class")) {
      std::size_t nb = cur().begin;
      auto id = ident();
      int decl = make(NodeKind::TypeDeclaration, id, b);
      for (int m : mods) attach(decl, m);
      attach(decl, close(make(NodeKind::SimpleName, id, nb)));
      type_parameters(decl);
      if (accept_kw("extends")) attach(decl, type());
      if (is_kw("implements")) {
        std::size_t ib = cur().begin;
        next();
        attach(decl, type_list(NodeKind::SuperInterfaceTypes, ib));
      }
      class_body(decl);
      return close(decl);
    }
    if (accept_kw("interface")) {
      std::size_t nb = cur().begin;
      auto id = ident();
      int decl = make(NodeKind::InterfaceDeclaration, id, b);
      for (int m : mods) attach(decl, m);
      attach(decl, close(make(NodeKind::SimpleName, id, nb)));
      type_parameters(decl);
      if (is_kw("extends")) {
        std::size_t ib = cur().begin;
        next();
        attach(decl, type_list(NodeKind::SuperInterfaceTypes, ib));
      }
      class_body(decl);
      return close(decl);
    }
    if (accept_kw("enum")) {
      std::size_t nb = cur().begin;
      auto id = ident();
      int decl = make(NodeKind::EnumDeclaration, id, b);
      for (int m : mods) attach(decl, m);
      attach(decl, close(make(NodeKind::SimpleName, id, nb)));
      if (is_kw("implements")) {
        std::size_t ib = cur().begin;
        next();
        attach(decl, type_list(NodeKind::SuperInterfaceTypes, ib));
      }
      enum_body(decl);
      return close(decl);
    }
    if (is("@") && peek().type == Tok::Keyword && peek().text == "interface") {
      next();
      next();
      std::size_t nb = cur().begin;
      auto id = ident();
      int decl = make(NodeKind::AnnotationTypeDeclaration, id, b);
      for (int m : mods) attach(decl, m);
      attach(decl, close(make(NodeKind::SimpleName, id, nb)));
      expect("{");
      while (!accept("}")) {
        if (accept(";")) continue;
        auto member_mods = modifiers();
        if (is_kw("class") || is_kw("interface") || is_kw("enum") || is("@")) {
          attach(decl, type_declaration(member_mods));
          continue;
        }
        std::size_t mb = member_mods.empty() ? cur().begin : node(member_mods.front()).begin;
        int t = type();
        if (is_ident() && is_at(1, "(")) {
          int m = make(NodeKind::AnnotationTypeMemberDeclaration, "", mb);
          for (int x : member_mods) attach(m, x);
          attach(m, t);
          attach(m, simple_name());
          expect("(");
          expect(")");
          if (accept_kw("default")) attach(m, element_value());
          expect(";");
          attach(decl, close(m));
        } else {
          attach(decl, field_rest(member_mods, t, mb));
        }
      }
      return close(decl);
    }
    fail("type declaration");
  }

  int type_list(NodeKind kind, std::size_t b) {
    int list = make(kind, "", b);
    do attach(list, type());
    while (accept(","));
    return close(list);
  }

  std::vector<int> type_parameters() {
    std::vector<int> out;
    if (!accept("<")) return out;
    do {
      auto annos = modifiers();
      std::size_t b = annos.empty() ? cur().begin : node(annos.front()).begin;
      int tp = make(NodeKind::TypeParameter, "", b);
      for (int a : annos) attach(tp, a);
      attach(tp, simple_name());
      if (accept_kw("extends")) {
        do attach(tp, type());
        while (accept("&"));
      }
      out.push_back(close(tp));
    } while (accept(","));
    expect(">");
    return out;
  }

  void type_parameters(int owner) {
    for (int t : type_parameters()) attach(owner, t);
  }

  void class_body(int owner) {
    expect("{");
    while (!accept("}")) {
      if (cur().type == Tok::End) fail("'}'");
      if (accept(";")) continue;
      attach(owner, member());
    }
  }

  void enum_body(int owner) {
    expect("{");
    while (!is(";") && !is("}")) {
      auto annos = modifiers();
      std::size_t b = annos.empty() ? cur().begin : node(annos.front()).begin;
      int c = make(NodeKind::EnumConstantDeclaration, "", b);
      for (int a : annos) attach(c, a);
      attach(c, simple_name());
      if (is("(")) arguments(c);
      if (is("{")) attach(c, anonymous_body());
      attach(owner, close(c));
      if (!accept(",")) break;
    }
    if (accept(";")) {
      while (!is("}")) {
        if (cur().type == Tok::End) fail("'}'");
        if (accept(";")) continue;
        attach(owner, member());
      }
    }
    expect("}");
  }

  int anonymous_body() {
    int body = make(NodeKind::AnonymousClassDeclaration, "", cur().begin);
    class_body(body);
    return close(body);
  }

  int member() {
    auto mods = modifiers();
    std::size_t b = mods.empty() ? cur().begin : node(mods.front()).begin;
    if (is("{")) {
      int init = make(NodeKind::Initializer, "", b);
      for (int m : mods) attach(init, m);
      attach(init, block());
      return close(init);
    }
    if (is_kw("class") || is_kw("interface") || is_kw("enum") || (is("@") && peek().text == "interface"))
      return type_declaration(mods);
    auto tparams = type_parameters();
    auto method = [&](int return_type) {
      int decl = make(NodeKind::MethodDeclaration, "", b);
      for (int m : mods) attach(decl, m);
      for (int t : tparams) attach(decl, t);
      if (return_type >= 0) attach(decl, return_type);
      attach(decl, simple_name());
      return method_rest(decl);
    };
    if (is_ident() && is_at(1, "(")) return method(-1);
    int t = type();
    if (is_ident() && is_at(1, "(")) return method(t);
    if (!tparams.empty()) fail("method declaration");
    return field_rest(mods, t, b);
  }

  int method_rest(int decl) {
    expect("(");
    if (!is(")")) {
      do attach(decl, parameter());
      while (accept(","));
    }
    expect(")");
    while (is("[")) {
      std::size_t b = cur().begin;
      next();
      expect("]");
      attach(decl, close(make(NodeKind::Dimension, "", b)));
    }
    if (accept_kw("throws")) {
      do attach(decl, type());
      while (accept(","));
    }
    if (is("{")) {
      attach(decl, block());
    } else {
      if (accept_kw("default")) attach(decl, element_value());
      expect(";");
    }
    return close(decl);
  }

  int parameter() {
    auto mods = modifiers();
    std::size_t b = mods.empty() ? cur().begin : node(mods.front()).begin;
    int t = type();
    bool varargs = accept("...");
    int p = make(NodeKind::SingleVariableDeclaration, varargs ? "..." : "", b);
    for (int m : mods) attach(p, m);
    attach(p, t);
    attach(p, simple_name());
    dimensions(p);
    return close(p);
  }

  void dimensions(int owner) {
    while (is("[") && is_at(1, "]")) {
      std::size_t b = cur().begin;
      next();
      next();
      attach(owner, close(make(NodeKind::Dimension, "", b)));
    }
  }

  int fragment() {
    int f = make(NodeKind::VariableDeclarationFragment, "", cur().begin);
    attach(f, simple_name());
    dimensions(f);
    if (accept("=")) attach(f, is("{") ? array_initializer() : expression());
    return close(f);
  }

  int field_rest(const std::vector<int>& mods, int t, std::size_t b) {
    int fd = make(NodeKind::FieldDeclaration, "", b);
    for (int m : mods) attach(fd, m);
    attach(fd, t);
    do attach(fd, fragment());
    while (accept(","));
    expect(";");
    return close(fd);
  }

  // Types -------------------------------------------------------------------

  int type() {
    std::size_t b = cur().begin;
    int t;
    if (cur().type == Tok::Keyword && is_primitive(cur().text)) {
      auto kw = cur().text;
      next();
      t = close(make(NodeKind::PrimitiveType, kw, b));
    } else {
      t = class_type();
    }
    return array_dims(t);
  }

  int array_dims(int t) {
    while (is("[") && is_at(1, "]")) {
      next();
      next();
      int a = wrap(NodeKind::ArrayType, "", t);
      t = close(a);
    }
    return t;
  }

  int class_type() {
    int n = simple_name();
    while (is(".") && peek().type == Tok::Ident) {
      next();
      int q = wrap(NodeKind::QualifiedName, "", n);
      attach(q, simple_name());
      n = close(q);
    }
    int t = wrap(NodeKind::SimpleType, "", n);
    if (is("<")) {
      int p = wrap(NodeKind::ParameterizedType, "", t);
      type_arguments(p);
      t = close(p);
      if (is(".") && peek().type == Tok::Ident) fail("type without qualified parameterized segments");
    }
    return t;
  }

  void type_arguments(int owner) {
    expect("<");
    if (accept(">")) return;
    do {
      auto annos = modifiers();
      if (is("?")) {
        std::size_t b = cur().begin;
        next();
        if (accept_kw("extends")) {
          int w = make(NodeKind::WildcardType, "? extends", b);
          attach(w, type());
          attach(owner, close(w));
        } else if (accept_kw("super")) {
          int w = make(NodeKind::WildcardType, "? super", b);
          attach(w, type());
          attach(owner, close(w));
        } else {
          attach(owner, close(make(NodeKind::WildcardType, "?", b)));
        }
      } else {
        attach(owner, type());
      }
      (void)annos;
    } while (accept(","));
    expect(">");
  }

  // Statements --------------------------------------------------------------

  int block() {
    std::size_t b = cur().begin;
    expect("{");
    int blk = make(NodeKind::Block, "", b);
    while (!accept("}")) {
      if (cur().type == Tok::End) fail("'}'");
      attach(blk, block_statement());
    }
    return close(blk);
  }

  bool starts_local_class() const {
    return is_kw("class") || is_kw("interface") || is_kw("enum") ||
           ((is_kw("abstract") || is_kw("final") || is_kw("static")) && peek().type == Tok::Keyword &&
            (peek().text == "class" || peek().text == "interface"));
  }

  int block_statement() {
    if (starts_local_class()) {
      std::size_t b = cur().begin;
      int s = make(NodeKind::TypeDeclarationStatement, "", b);
      attach(s, type_declaration(modifiers()));
      return close(s);
    }
    if (is_kw("final") || (is("@") && !(peek().text == "interface"))) {
      std::size_t b = cur().begin;
      auto mods = modifiers();
      if (is_kw("class") || is_kw("interface") || is_kw("enum")) {
        int s = make(NodeKind::TypeDeclarationStatement, "", b);
        attach(s, type_declaration(mods));
        return close(s);
      }
      int s = local_declaration(NodeKind::VariableDeclarationStatement, mods, b);
      expect(";");
      return close(s);
    }
    if (looks_like_declaration()) {
      std::size_t b = cur().begin;
      int s = local_declaration(NodeKind::VariableDeclarationStatement, {}, b);
      expect(";");
      return close(s);
    }
    return statement();
  }

  // Speculatively checks for `Type Ident` at the current position.
  bool looks_like_declaration() {
    if (!(is_ident() || (cur().type == Tok::Keyword && is_primitive(cur().text) && cur().text != "void")))
      return false;
    std::size_t save = pos_;
    std::size_t size = tree_.nodes.size();
    bool ok = attempt([&] {
                int t = type();
                if (!is_ident()) fail("identifier");
                next();
                if (!(is("=") || is(",") || is(";") || is("[") || is(":"))) fail("declarator");
                return t;
              }).has_value();
    pos_ = save;
    tree_.nodes.resize(size);
    return ok;
  }

  int local_declaration(NodeKind kind, const std::vector<int>& mods, std::size_t b) {
    int s = make(kind, "", b);
    for (int m : mods) attach(s, m);
    attach(s, type());
    do attach(s, fragment());
    while (accept(","));
    return close(s);
  }

  int paren_expression() {
    expect("(");
    int e = expression();
    expect(")");
    return e;
  }

  int statement() {
    std::size_t b = cur().begin;
    const Token& t = cur();
    if (is("{")) return block();
    if (accept(";")) return close(make(NodeKind::EmptyStatement, "", b));
    if (t.type == Tok::Ident && is_at(1, ":")) {
      int s = make(NodeKind::LabeledStatement, "", b);
      attach(s, simple_name());
      expect(":");
      attach(s, statement());
      return close(s);
    }
    if (t.type == Tok::Keyword) {
      std::string_view kw = t.text;
      if (kw == "if") {
        next();
        int s = make(NodeKind::IfStatement, "", b);
        attach(s, paren_expression());
        attach(s, statement());
        if (accept_kw("else")) attach(s, statement());
        return close(s);
      }
      if (kw == "while") {
        next();
        int s = make(NodeKind::WhileStatement, "", b);
        attach(s, paren_expression());
        attach(s, statement());
        return close(s);
      }
      if (kw == "do") {
        next();
        int s = make(NodeKind::DoStatement, "", b);
        attach(s, statement());
        expect_kw("while");
        attach(s, paren_expression());
        expect(";");
        return close(s);
      }
      if (kw == "for") return for_statement();
      if (kw == "try") return try_statement();
      if (kw == "switch") return switch_statement();
      if (kw == "return" || kw == "throw") {
        next();
        int s = make(kw == "return" ? NodeKind::ReturnStatement : NodeKind::ThrowStatement, "", b);
        if (!is(";")) attach(s, expression());
        expect(";");
        return close(s);
      }
      if (kw == "break" || kw == "continue") {
        next();
        int s = make(kw == "break" ? NodeKind::BreakStatement : NodeKind::ContinueStatement, "", b);
        if (is_ident()) attach(s, simple_name());
        expect(";");
        return close(s);
      }
      if (kw == "synchronized") {
        next();
        int s = make(NodeKind::SynchronizedStatement, "", b);
        attach(s, paren_expression());
        attach(s, block());
        return close(s);
      }
      if (kw == "assert") {
        next();
        int s = make(NodeKind::AssertStatement, "", b);
        attach(s, expression());
        if (accept(":")) attach(s, expression());
        expect(";");
        return close(s);
      }
      if ((kw == "this" || kw == "super") && is_at(1, "(")) {
        next();
        int s = make(kw == "this" ? NodeKind::ConstructorInvocation : NodeKind::SuperConstructorInvocation, "", b);
        arguments(s);
        expect(";");
        return close(s);
      }
    }
    int e = expression();
    int s = make(NodeKind::ExpressionStatement, "", b);
    attach(s, e);
    expect(";");
    return close(s);
  }

  int for_statement() {
    std::size_t b = cur().begin;
    expect_kw("for");
    expect("(");
    std::size_t hb = cur().begin;
    auto mods = modifiers();
    if (!mods.empty() || looks_like_declaration()) {
      std::size_t db = mods.empty() ? cur().begin : node(mods.front()).begin;
      std::size_t save = pos_;
      std::size_t size = tree_.nodes.size();
      auto enhanced = attempt([&] {
        int t = type();
        int p = make(NodeKind::SingleVariableDeclaration, "", db);
        for (int m : mods) attach(p, m);
        attach(p, t);
        attach(p, simple_name());
        close(p);
        if (!is(":")) fail("':'");
        return p;
      });
      if (enhanced) {
        expect(":");
        int s = make(NodeKind::EnhancedForStatement, "", b);
        attach(s, *enhanced);
        attach(s, expression());
        expect(")");
        attach(s, statement());
        return close(s);
      }
      pos_ = save;
      tree_.nodes.resize(size);
      int s = make(NodeKind::ForStatement, "", b);
      int init = make(NodeKind::ForInit, "", hb);
      attach(init, close(local_declaration(NodeKind::VariableDeclarationExpression, mods, db)));
      attach(s, close(init));
      return for_rest(s);
    }
    int s = make(NodeKind::ForStatement, "", b);
    if (!is(";")) {
      int init = make(NodeKind::ForInit, "", hb);
      do attach(init, expression());
      while (accept(","));
      attach(s, close(init));
    }
    return for_rest(s);
  }

  int for_rest(int s) {
    expect(";");
    if (!is(";")) attach(s, expression());
    expect(";");
    if (!is(")")) {
      int upd = make(NodeKind::ForUpdate, "", cur().begin);
      do attach(upd, expression());
      while (accept(","));
      attach(s, close(upd));
    }
    expect(")");
    attach(s, statement());
    return close(s);
  }

  int try_statement() {
    std::size_t b = cur().begin;
    expect_kw("try");
    int s = make(NodeKind::TryStatement, "", b);
    if (accept("(")) {
      while (!is(")")) {
        auto mods = modifiers();
        std::size_t rb = mods.empty() ? cur().begin : node(mods.front()).begin;
        int r = make(NodeKind::VariableDeclarationExpression, "", rb);
        for (int m : mods) attach(r, m);
        attach(r, type());
        attach(r, fragment());
        attach(s, close(r));
        if (!accept(";")) break;
      }
      expect(")");
    }
    attach(s, block());
    bool handled = false;
    while (is_kw("catch")) {
      std::size_t cb = cur().begin;
      next();
      int c = make(NodeKind::CatchClause, "", cb);
      expect("(");
      auto mods = modifiers();
      std::size_t pb = mods.empty() ? cur().begin : node(mods.front()).begin;
      int p = make(NodeKind::SingleVariableDeclaration, "", pb);
      for (int m : mods) attach(p, m);
      int t = type();
      if (is("|")) {
        int u = wrap(NodeKind::UnionType, "", t);
        while (accept("|")) attach(u, type());
        t = close(u);
      }
      attach(p, t);
      attach(p, simple_name());
      attach(c, close(p));
      expect(")");
      attach(c, block());
      attach(s, close(c));
      handled = true;
    }
    if (accept_kw("finally")) {
      attach(s, block());
      handled = true;
    }
    if (!handled && node(s).children.size() == 1) fail("'catch' or 'finally'");
    return close(s);
  }

  int switch_statement() {
    std::size_t b = cur().begin;
    expect_kw("switch");
    int s = make(NodeKind::SwitchStatement, "", b);
    attach(s, paren_expression());
    expect("{");
    while (!accept("}")) {
      if (cur().type == Tok::End) fail("'}'");
      std::size_t cb = cur().begin;
      if (accept_kw("case")) {
        int c = make(NodeKind::SwitchCase, "", cb);
        attach(c, conditional());
        expect(":");
        attach(s, close(c));
      } else if (is_kw("default") && is_at(1, ":")) {
        next();
        next();
        attach(s, close(make(NodeKind::SwitchCase, "", cb)));
      } else {
        attach(s, block_statement());
      }
    }
    return close(s);
  }

  // Expressions -------------------------------------------------------------

  void arguments(int owner) {
    expect("(");
    if (!is(")")) {
      do attach(owner, expression());
      while (accept(","));
    }
    expect(")");
  }

  // Operator at the cursor, gluing adjacent '>' tokens; sets `len` to the
  // number of tokens it spans.
  std::string_view operator_here(std::size_t& len) const {
    len = 1;
    if (cur().type != Tok::Op) return cur().type == Tok::Keyword && cur().text == "instanceof" ? "instanceof" : "";
    if (cur().text != ">") return cur().text;
    auto adjacent = [&](std::size_t n, std::string_view op) {
      return peek(n).type == Tok::Op && peek(n).text == op && peek(n).begin == peek(n - 1).end;
    };
    if (adjacent(1, ">")) {
      if (adjacent(2, ">")) {
        if (adjacent(3, "=")) {
          len = 4;
          return ">>>=";
        }
        len = 3;
        return ">>>";
      }
      if (adjacent(2, "=")) {
        len = 3;
        return ">>=";
      }
      len = 2;
      return ">>";
    }
    if (adjacent(1, "=")) {
      len = 2;
      return ">=";
    }
    return ">";
  }

  static bool is_assign_op(std::string_view op) {
    return op == "=" || op == "+=" || op == "-=" || op == "*=" || op == "/=" || op == "%=" || op == "&=" ||
           op == "|=" || op == "^=" || op == "<<=" || op == ">>=" || op == ">>>=";
  }

  static int precedence(std::string_view op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == ">" || op == "<=" || op == ">=" || op == "instanceof") return 7;
    if (op == "<<" || op == ">>" || op == ">>>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    return 0;
  }

  int expression() {
    if (auto lambda = try_lambda()) return *lambda;
    int lhs = conditional();
    std::size_t len;
    std::string_view op = operator_here(len);
    if (is_assign_op(op)) {
      std::string label(op);
      pos_ += len;
      int a = wrap(NodeKind::Assignment, label, lhs);
      attach(a, expression());
      return close(a);
    }
    return lhs;
  }

  std::optional<int> try_lambda() {
    std::size_t b = cur().begin;
    if (is_ident() && is_at(1, "->")) {
      int l = make(NodeKind::LambdaExpression, "", b);
      int f = make(NodeKind::VariableDeclarationFragment, "", b);
      attach(f, simple_name());
      attach(l, close(f));
      expect("->");
      attach(l, is("{") ? block() : expression());
      return close(l);
    }
    if (!is("(")) return std::nullopt;
    std::size_t depth = 0, i = pos_;
    for (; i < toks_.size(); ++i) {
      if (toks_[i].type != Tok::Op) continue;
      if (toks_[i].text == "(") ++depth;
      if (toks_[i].text == ")" && --depth == 0) break;
    }
    if (i + 1 >= toks_.size() || toks_[i + 1].type != Tok::Op || toks_[i + 1].text != "->") return std::nullopt;
    next();
    int l = make(NodeKind::LambdaExpression, "", b);
    if (!is(")")) {
      bool bare = is_ident() && (is_at(1, ",") || is_at(1, ")"));
      do {
        if (bare) {
          int f = make(NodeKind::VariableDeclarationFragment, "", cur().begin);
          attach(f, simple_name());
          attach(l, close(f));
        } else {
          attach(l, parameter());
        }
      } while (accept(","));
    }
    expect(")");
    expect("->");
    attach(l, is("{") ? block() : expression());
    return close(l);
  }

  int conditional() {
    int c = binary(1);
    if (!is("?")) return c;
    next();
    int q = wrap(NodeKind::ConditionalExpression, "", c);
    attach(q, expression());
    expect(":");
    if (auto lambda = try_lambda()) attach(q, *lambda);
    else attach(q, conditional());
    return close(q);
  }

  int binary(int min_prec) {
    int lhs = unary();
    while (true) {
      std::size_t len;
      std::string_view op = operator_here(len);
      int prec = precedence(op);
      if (prec == 0 || prec < min_prec) return lhs;
      if (op == "instanceof") {
        next();
        int e = wrap(NodeKind::InstanceofExpression, "", lhs);
        attach(e, type());
        lhs = close(e);
        continue;
      }
      std::string label(op);
      pos_ += len;
      int e = wrap(NodeKind::InfixExpression, label, lhs);
      attach(e, binary(prec + 1));
      lhs = close(e);
    }
  }

  bool can_follow_cast() const {
    const Token& t = cur();
    if (t.type == Tok::Ident || t.type == Tok::Number || t.type == Tok::Char || t.type == Tok::String) return true;
    if (t.type == Tok::Keyword)
      return t.text == "this" || t.text == "super" || t.text == "new" || t.text == "true" || t.text == "false" ||
             t.text == "null" || is_primitive(t.text);
    return t.text == "(" || t.text == "!" || t.text == "~";
  }

  int unary() {
    std::size_t b = cur().begin;
    if (is("++") || is("--") || is("+") || is("-") || is("!") || is("~")) {
      std::string op(cur().text);
      next();
      int p = make(NodeKind::PrefixExpression, op, b);
      attach(p, unary());
      return close(p);
    }
    if (is("(")) {
      if (peek().type == Tok::Keyword && is_primitive(peek().text)) {
        auto cast = attempt([&] {
          next();
          int t = type();
          expect(")");
          return t;
        });
        if (cast) {
          int c = make(NodeKind::CastExpression, "", b);
          attach(c, *cast);
          attach(c, unary());
          return close(c);
        }
      }
      auto cast = attempt([&] {
        next();
        int t = type();
        expect(")");
        if (!can_follow_cast()) fail("cast operand");
        return t;
      });
      if (cast) {
        int c = make(NodeKind::CastExpression, "", b);
        attach(c, *cast);
        if (auto lambda = try_lambda()) attach(c, *lambda);
        else attach(c, unary());
        return close(c);
      }
    }
    int e = postfix(primary());
    while (is("++") || is("--")) {
      std::string op(cur().text);
      next();
      int p = wrap(NodeKind::PostfixExpression, op, e);
      e = close(p);
    }
    return e;
  }

  static bool is_name(NodeKind k) { return k == NodeKind::SimpleName || k == NodeKind::QualifiedName; }

  int literal(NodeKind kind) {
    std::size_t b = cur().begin;
    auto text = cur().text;
    next();
    return close(make(kind, text, b));
  }

  int primary() {
    std::size_t b = cur().begin;
    const Token& t = cur();
    switch (t.type) {
      case Tok::Number: return literal(NodeKind::NumberLiteral);
      case Tok::String: return literal(NodeKind::StringLiteral);
      case Tok::Char: return literal(NodeKind::CharacterLiteral);
      case Tok::Ident: {
        if (is_at(1, "(")) {
          int m = make(NodeKind::MethodInvocation, "", b);
          attach(m, simple_name());
          arguments(m);
          return close(m);
        }
        int n = simple_name();
        // Array type literal or method reference on an array type.
        if (is("[") && is_at(1, "]")) {
          int at = array_dims(wrap(NodeKind::SimpleType, "", n));
          return type_suffix(at, b);
        }
        if (is("<")) {
          auto generic = attempt([&] {
            int st = wrap(NodeKind::SimpleType, "", n);
            int p = wrap(NodeKind::ParameterizedType, "", st);
            type_arguments(p);
            close(p);
            if (!is("::")) fail("'::'");
            return p;
          });
          if (generic) return method_reference(*generic);
        }
        return n;
      }
      case Tok::Keyword: {
        std::string_view kw = t.text;
        if (kw == "true" || kw == "false") return literal(NodeKind::BooleanLiteral);
        if (kw == "null") {
          next();
          return close(make(NodeKind::NullLiteral, "", b));
        }
        if (kw == "this") {
          next();
          int e = close(make(NodeKind::ThisExpression, "", b));
          if (is("(")) fail("expression");
          return e;
        }
        if (kw == "super") {
          next();
          if (accept("::")) {
            int r = make(NodeKind::SuperMethodReference, "", b);
            attach(r, simple_name());
            return close(r);
          }
          expect(".");
          return super_member(b, -1);
        }
        if (kw == "new") return creator(b, -1);
        if (is_primitive(kw)) {
          int pt = type();
          return type_suffix(pt, b);
        }
        break;
      }
      case Tok::Op:
        if (is("(")) {
          next();
          int p = make(NodeKind::ParenthesizedExpression, "", b);
          attach(p, expression());
          expect(")");
          return close(p);
        }
        break;
      default: break;
    }
    fail("expression");
  }

  // After a type in expression position: `.class` or `::`.
  int type_suffix(int type_node, std::size_t b) {
    if (is("::")) return method_reference(type_node);
    expect(".");
    expect_kw("class");
    int lit = make(NodeKind::TypeLiteral, "", b);
    attach(lit, type_node);
    return close(lit);
  }

  int method_reference(int lhs) {
    expect("::");
    if (accept_kw("new")) {
      int r = wrap(NodeKind::CreationReference, "", lhs);
      return close(r);
    }
    int r = wrap(NodeKind::MethodReference, "", lhs);
    attach(r, simple_name());
    return close(r);
  }

  // `super.name` or `super.name(...)`, optionally qualified.
  int super_member(std::size_t b, int qualifier) {
    if (is_ident() && is_at(1, "(")) {
      int m = make(NodeKind::SuperMethodInvocation, "", b);
      if (qualifier >= 0) attach(m, wrap(NodeKind::Receiver, "", qualifier));
      attach(m, simple_name());
      arguments(m);
      return close(m);
    }
    int f = make(NodeKind::SuperFieldAccess, "", b);
    if (qualifier >= 0) attach(f, wrap(NodeKind::Receiver, "", qualifier));
    attach(f, simple_name());
    return close(f);
  }

  int creator(std::size_t b, int outer) {
    expect_kw("new");
    int t;
    std::size_t tb = cur().begin;
    if (cur().type == Tok::Keyword && is_primitive(cur().text)) {
      auto kw = cur().text;
      next();
      t = close(make(NodeKind::PrimitiveType, kw, tb));
    } else {
      if (is("<")) fail("constructor type arguments");
      int n = simple_name();
      while (is(".") && peek().type == Tok::Ident) {
        next();
        int q = wrap(NodeKind::QualifiedName, "", n);
        attach(q, simple_name());
        n = close(q);
      }
      t = wrap(NodeKind::SimpleType, "", n);
      if (is("<")) {
        int p = wrap(NodeKind::ParameterizedType, "", t);
        type_arguments(p);
        t = close(p);
      }
    }
    if (is("[")) {
      std::vector<int> dims;
      int at = t;
      bool open_dim = false;
      while (is("[")) {
        next();
        if (is("]")) {
          open_dim = true;
        } else {
          if (open_dim) fail("']'");
          dims.push_back(expression());
        }
        expect("]");
        at = close(wrap(NodeKind::ArrayType, "", at));
      }
      int c = make(NodeKind::ArrayCreation, "", b);
      attach(c, at);
      for (int d : dims) attach(c, d);
      if (is("{")) {
        if (!dims.empty()) fail("';'");
        attach(c, array_initializer());
      }
      return close(c);
    }
    int c = make(NodeKind::ClassInstanceCreation, "", b);
    if (outer >= 0) attach(c, wrap(NodeKind::Receiver, "", outer));
    attach(c, t);
    arguments(c);
    if (is("{")) attach(c, anonymous_body());
    return close(c);
  }

  int array_initializer() {
    std::size_t b = cur().begin;
    expect("{");
    int init = make(NodeKind::ArrayInitializer, "", b);
    while (!is("}")) {
      attach(init, is("{") ? array_initializer() : expression());
      if (!accept(",")) break;
    }
    expect("}");
    return close(init);
  }

  int postfix(int e) {
    std::size_t b = node(e).begin;
    while (true) {
      if (is(".")) {
        next();
        if (is("<")) {
          int m = make(NodeKind::MethodInvocation, "", b);
          attach(m, wrap(NodeKind::Receiver, "", e));
          type_arguments(m);
          attach(m, simple_name());
          arguments(m);
          e = close(m);
          continue;
        }
        if (is_kw("new")) {
          e = creator(b, e);
          continue;
        }
        if (is_kw("this") && is_name(node(e).kind)) {
          next();
          int t = make(NodeKind::ThisExpression, "", b);
          attach(t, e);
          e = close(t);
          continue;
        }
        if (is_kw("class") && is_name(node(e).kind)) {
          next();
          int lit = make(NodeKind::TypeLiteral, "", b);
          attach(lit, wrap(NodeKind::SimpleType, "", e));
          e = close(lit);
          continue;
        }
        if (is_kw("super") && is_name(node(e).kind)) {
          next();
          if (accept("::")) {
            int r = make(NodeKind::SuperMethodReference, "", b);
            attach(r, wrap(NodeKind::Receiver, "", e));
            attach(r, simple_name());
            e = close(r);
            continue;
          }
          expect(".");
          e = super_member(b, e);
          continue;
        }
        if (is_ident() && is_at(1, "(")) {
          int m = make(NodeKind::MethodInvocation, "", b);
          attach(m, wrap(NodeKind::Receiver, "", e));
          attach(m, simple_name());
          arguments(m);
          e = close(m);
          continue;
        }
        if (!is_ident()) fail("identifier");
        if (is_name(node(e).kind)) {
          int q = wrap(NodeKind::QualifiedName, "", e);
          attach(q, simple_name());
          e = close(q);
        } else {
          int f = wrap(NodeKind::FieldAccess, "", e);
          attach(f, simple_name());
          e = close(f);
        }
        continue;
      }
      if (is("[")) {
        if (is_at(1, "]") && is_name(node(e).kind)) {
          int at = array_dims(wrap(NodeKind::SimpleType, "", e));
          return type_suffix(at, b);
        }
        next();
        int a = wrap(NodeKind::ArrayAccess, "", e);
        attach(a, expression());
        expect("]");
        e = close(a);
        continue;
      }
      if (is("::")) {
        e = method_reference(e);
        continue;
      }
      return e;
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int speculating_ = 0;
  SourceTree tree_;
};

}  // namespace

SourceTree parse_source(std::string_view text) {
  SourceTree raw = Parser(text).run();
  // Renumber reachable nodes in preorder so ids are dense and stable.
  std::vector<int> order = raw.preorder();
  std::vector<int> index(raw.nodes.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) index[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
  SourceTree out;
  out.nodes.reserve(order.size());
  for (int id : order) {
    Node n = std::move(raw.nodes[static_cast<std::size_t>(id)]);
    for (int& c : n.children) c = index[static_cast<std::size_t>(c)];
    out.nodes.push_back(std::move(n));
  }
  out.root = 0;
  out.link_parents();
  return out;
}

}  // namespace dceval::srcdiff
