#include <algorithm>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dceval/srcdiff.hpp"

namespace dceval::srcdiff {

namespace {

constexpr std::string_view kKindNames[] = {
#define DCEVAL_NAME_ITEM(k) #k,
    DCEVAL_NODE_KINDS(DCEVAL_NAME_ITEM)
#undef DCEVAL_NAME_ITEM
};

bool is_type_kind(NodeKind k) {
  return k == NodeKind::PrimitiveType || k == NodeKind::SimpleType || k == NodeKind::ArrayType ||
         k == NodeKind::ParameterizedType || k == NodeKind::WildcardType || k == NodeKind::UnionType;
}

bool is_modifier_kind(NodeKind k) {
  return k == NodeKind::Modifier || k == NodeKind::MarkerAnnotation || k == NodeKind::SingleMemberAnnotation ||
         k == NodeKind::NormalAnnotation;
}

class Printer {
 public:
  explicit Printer(const SourceTree& t) : t_(t) {}

  std::string run() {
    std::string out;
    for (int c : kids(t_.root)) {
      out += decl(c, 0);
      out += "\n";
    }
    return out;
  }

 private:
  const Node& n(int id) const { return t_.at(id); }
  const std::vector<int>& kids(int id) const { return n(id).children; }
  NodeKind kind(int id) const { return n(id).kind; }
  static std::string pad(int depth) { return std::string(static_cast<std::size_t>(depth) * 2, ' '); }

  std::string join(const std::vector<int>& ids, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i) out += sep;
      out += expr(ids[i]);
    }
    return out;
  }

  std::string mods(int id) {
    std::string out;
    for (int c : kids(id))
      if (is_modifier_kind(kind(c))) out += expr(c) + " ";
    return out;
  }

  std::string type_params(int id) {
    std::vector<int> tps;
    for (int c : kids(id))
      if (kind(c) == NodeKind::TypeParameter) tps.push_back(c);
    return tps.empty() ? "" : "<" + join(tps, ", ") + ">";
  }

  std::string body(int id, std::size_t from, int depth) {
    std::string out = "{\n";
    for (std::size_t i = from; i < kids(id).size(); ++i) out += decl(kids(id)[i], depth + 1) + "\n";
    return out + pad(depth) + "}";
  }

  // Index of the first child that belongs to a declaration's body.
  std::size_t body_start(int id) {
    std::size_t i = 0;
    const auto& k = kids(id);
    while (i < k.size() && (is_modifier_kind(kind(k[i])) || kind(k[i]) == NodeKind::SimpleName ||
                            kind(k[i]) == NodeKind::TypeParameter || kind(k[i]) == NodeKind::SuperInterfaceTypes ||
                            is_type_kind(kind(k[i]))))
      ++i;
    return i;
  }

  std::string decl(int id, int depth) {
    const Node& d = n(id);
    std::string p = pad(depth);
    switch (d.kind) {
      case NodeKind::PackageDeclaration: {
        std::string out = p;
        for (int c : d.children)
          if (is_modifier_kind(kind(c))) out += expr(c) + " ";
        return out + "package " + expr(d.children.back()) + ";";
      }
      case NodeKind::ImportDeclaration: {
        bool is_static = d.label.find("static") != std::string::npos;
        bool star = d.label.find(".*") != std::string::npos;
        return p + "import " + (is_static ? "static " : "") + expr(d.children[0]) + (star ? ".*" : "") + ";";
      }
      case NodeKind::TypeDeclaration:
      case NodeKind::InterfaceDeclaration: {
        bool cls = d.kind == NodeKind::TypeDeclaration;
        std::string out = p + mods(id) + (cls ? "class " : "interface ") + d.label + type_params(id);
        for (int c : d.children) {
          if (is_type_kind(kind(c))) out += " extends " + expr(c);
          if (kind(c) == NodeKind::SuperInterfaceTypes) out += (cls ? " implements " : " extends ") + expr(c);
        }
        return out + " " + body(id, body_start(id), depth);
      }
      case NodeKind::EnumDeclaration: {
        std::string out = p + mods(id) + "enum " + d.label;
        std::vector<int> constants, members;
        for (int c : d.children) {
          if (kind(c) == NodeKind::SuperInterfaceTypes) out += " implements " + expr(c);
          if (kind(c) == NodeKind::EnumConstantDeclaration) constants.push_back(c);
        }
        for (std::size_t i = body_start(id); i < d.children.size(); ++i)
          if (kind(d.children[i]) != NodeKind::EnumConstantDeclaration) members.push_back(d.children[i]);
        out += " {\n";
        for (std::size_t i = 0; i < constants.size(); ++i)
          out += decl(constants[i], depth + 1) + (i + 1 < constants.size() ? ",\n" : "\n");
        out += pad(depth + 1) + ";\n";
        for (int m : members) out += decl(m, depth + 1) + "\n";
        return out + p + "}";
      }
      case NodeKind::AnnotationTypeDeclaration:
        return p + mods(id) + "@interface " + d.label + " " + body(id, body_start(id), depth);
      case NodeKind::AnnotationTypeMemberDeclaration: {
        std::string out = p + mods(id);
        std::size_t i = 0;
        while (is_modifier_kind(kind(d.children[i]))) ++i;
        out += expr(d.children[i]) + " " + expr(d.children[i + 1]) + "()";
        if (i + 2 < d.children.size()) out += " default " + expr(d.children[i + 2]);
        return out + ";";
      }
      case NodeKind::EnumConstantDeclaration: {
        std::string out = p;
        std::vector<int> args;
        int anon = -1;
        bool named = false;
        for (int c : d.children) {
          if (is_modifier_kind(kind(c))) out += expr(c) + " ";
          else if (!named && kind(c) == NodeKind::SimpleName) {
            out += expr(c);
            named = true;
          } else if (kind(c) == NodeKind::AnonymousClassDeclaration) anon = c;
          else args.push_back(c);
        }
        if (!args.empty()) out += "(" + join(args, ", ") + ")";
        if (anon >= 0) out += " " + body(anon, 0, depth);
        return out;
      }
      case NodeKind::FieldDeclaration: {
        std::vector<int> frags;
        std::string type;
        for (int c : d.children) {
          if (is_type_kind(kind(c))) type = expr(c);
          if (kind(c) == NodeKind::VariableDeclarationFragment) frags.push_back(c);
        }
        return p + mods(id) + type + " " + join(frags, ", ") + ";";
      }
      case NodeKind::MethodDeclaration: return p + method(id, depth);
      case NodeKind::Initializer: return p + mods(id) + stmt(d.children.back(), depth);
      default: return p + stmt(id, depth);
    }
  }

  std::string method(int id, int depth) {
    const Node& d = n(id);
    std::string out = mods(id);
    std::string tps = type_params(id);
    if (!tps.empty()) out += tps + " ";
    std::size_t i = 0;
    while (is_modifier_kind(kind(d.children[i])) || kind(d.children[i]) == NodeKind::TypeParameter) ++i;
    if (is_type_kind(kind(d.children[i]))) out += expr(d.children[i++]) + " ";
    out += expr(d.children[i++]);
    std::vector<int> params, thrown;
    std::string dims, tail = ";";
    for (; i < d.children.size(); ++i) {
      int c = d.children[i];
      if (kind(c) == NodeKind::SingleVariableDeclaration) params.push_back(c);
      else if (kind(c) == NodeKind::Dimension) dims += "[]";
      else if (is_type_kind(kind(c))) thrown.push_back(c);
      else if (kind(c) == NodeKind::Block) tail = " " + stmt(c, depth);
      else tail = " default " + expr(c) + ";";
    }
    out += "(" + join(params, ", ") + ")" + dims;
    if (!thrown.empty()) out += " throws " + join(thrown, ", ");
    return out + tail;
  }

  std::string block(int id, int depth) {
    std::string out = "{\n";
    for (int c : kids(id)) out += pad(depth + 1) + stmt(c, depth + 1) + "\n";
    return out + pad(depth) + "}";
  }

  std::string local(int id) {
    std::vector<int> frags;
    std::string type;
    for (int c : kids(id)) {
      if (is_type_kind(kind(c))) type = expr(c);
      if (kind(c) == NodeKind::VariableDeclarationFragment) frags.push_back(c);
    }
    return mods(id) + type + " " + join(frags, ", ");
  }

  std::string stmt(int id, int depth) {
    const Node& d = n(id);
    const auto& k = d.children;
    switch (d.kind) {
      case NodeKind::Block: return block(id, depth);
      case NodeKind::EmptyStatement: return ";";
      case NodeKind::ExpressionStatement: return expr(k[0]) + ";";
      case NodeKind::VariableDeclarationStatement: return local(id) + ";";
      case NodeKind::TypeDeclarationStatement: {
        std::string s = decl(k[0], depth);
        return s.substr(static_cast<std::size_t>(depth) * 2);
      }
      case NodeKind::IfStatement: {
        std::string out = "if (" + expr(k[0]) + ") " + stmt(k[1], depth);
        if (k.size() > 2) out += " else " + stmt(k[2], depth);
        return out;
      }
      case NodeKind::WhileStatement: return "while (" + expr(k[0]) + ") " + stmt(k[1], depth);
      case NodeKind::DoStatement: return "do " + stmt(k[0], depth) + " while (" + expr(k[1]) + ");";
      case NodeKind::ForStatement: {
        std::string init, cond, upd;
        for (std::size_t i = 0; i + 1 < k.size(); ++i) {
          if (kind(k[i]) == NodeKind::ForInit) init = expr(k[i]);
          else if (kind(k[i]) == NodeKind::ForUpdate) upd = expr(k[i]);
          else cond = expr(k[i]);
        }
        return "for (" + init + "; " + cond + "; " + upd + ") " + stmt(k.back(), depth);
      }
      case NodeKind::EnhancedForStatement:
        return "for (" + expr(k[0]) + " : " + expr(k[1]) + ") " + stmt(k[2], depth);
      case NodeKind::SwitchStatement: {
        std::string out = "switch (" + expr(k[0]) + ") {\n";
        for (std::size_t i = 1; i < k.size(); ++i) {
          if (kind(k[i]) == NodeKind::SwitchCase)
            out += pad(depth + 1) + (kids(k[i]).empty() ? "default:" : "case " + expr(kids(k[i])[0]) + ":") + "\n";
          else
            out += pad(depth + 2) + stmt(k[i], depth + 2) + "\n";
        }
        return out + pad(depth) + "}";
      }
      case NodeKind::BreakStatement: return k.empty() ? "break;" : "break " + expr(k[0]) + ";";
      case NodeKind::ContinueStatement: return k.empty() ? "continue;" : "continue " + expr(k[0]) + ";";
      case NodeKind::ReturnStatement: return k.empty() ? "return;" : "return " + expr(k[0]) + ";";
      case NodeKind::ThrowStatement: return "throw " + expr(k[0]) + ";";
      case NodeKind::TryStatement: {
        std::vector<int> resources;
        std::string out = "try";
        bool seen_body = false;
        std::string rest;
        for (int c : k) {
          if (kind(c) == NodeKind::VariableDeclarationExpression) resources.push_back(c);
          else if (kind(c) == NodeKind::CatchClause) rest += " " + stmt(c, depth);
          else if (!seen_body) {
            if (!resources.empty()) out += " (" + join(resources, "; ") + ")";
            out += " " + stmt(c, depth);
            seen_body = true;
          } else {
            rest += " finally " + stmt(c, depth);
          }
        }
        return out + rest;
      }
      case NodeKind::CatchClause: return "catch (" + expr(k[0]) + ") " + stmt(k[1], depth);
      case NodeKind::SynchronizedStatement: return "synchronized (" + expr(k[0]) + ") " + stmt(k[1], depth);
      case NodeKind::LabeledStatement: return expr(k[0]) + ": " + stmt(k[1], depth);
      case NodeKind::AssertStatement:
        return "assert " + expr(k[0]) + (k.size() > 1 ? " : " + expr(k[1]) : "") + ";";
      case NodeKind::ConstructorInvocation: return "this(" + join(k, ", ") + ");";
      case NodeKind::SuperConstructorInvocation: return "super(" + join(k, ", ") + ");";
      default: return expr(id) + ";";
    }
  }

  std::string expr(int id) {
    const Node& d = n(id);
    const auto& k = d.children;
    switch (d.kind) {
      case NodeKind::SimpleName:
      case NodeKind::Modifier:
      case NodeKind::PrimitiveType:
      case NodeKind::NumberLiteral:
      case NodeKind::StringLiteral:
      case NodeKind::CharacterLiteral:
      case NodeKind::BooleanLiteral: return d.label;
      case NodeKind::NullLiteral: return "null";
      case NodeKind::QualifiedName: return expr(k[0]) + "." + expr(k[1]);
      case NodeKind::MarkerAnnotation: return "@" + expr(k[0]);
      case NodeKind::SingleMemberAnnotation: return "@" + expr(k[0]) + "(" + expr(k[1]) + ")";
      case NodeKind::NormalAnnotation: {
        std::vector<int> pairs(k.begin() + 1, k.end());
        return "@" + expr(k[0]) + "(" + join(pairs, ", ") + ")";
      }
      case NodeKind::MemberValuePair: return expr(k[0]) + " = " + expr(k[1]);
      case NodeKind::SuperInterfaceTypes:
      case NodeKind::ForInit:
      case NodeKind::ForUpdate: return join(k, ", ");
      case NodeKind::TypeParameter: {
        std::string out;
        std::vector<int> bounds;
        bool named = false;
        for (int c : k) {
          if (is_modifier_kind(kind(c))) out += expr(c) + " ";
          else if (!named) {
            out += expr(c);
            named = true;
          } else bounds.push_back(c);
        }
        return bounds.empty() ? out : out + " extends " + join(bounds, " & ");
      }
      case NodeKind::SingleVariableDeclaration: {
        std::string out = mods(id);
        for (int c : k) {
          if (is_type_kind(kind(c))) out += expr(c) + d.label + " ";
          else if (kind(c) == NodeKind::SimpleName) out += expr(c);
          else if (kind(c) == NodeKind::Dimension) out += "[]";
        }
        return out;
      }
      case NodeKind::VariableDeclarationFragment: {
        std::string out = expr(k[0]);
        for (std::size_t i = 1; i < k.size(); ++i)
          out += kind(k[i]) == NodeKind::Dimension ? "[]" : " = " + expr(k[i]);
        return out;
      }
      case NodeKind::Dimension: return "[]";
      case NodeKind::SimpleType: return expr(k[0]);
      case NodeKind::ArrayType: return expr(k[0]) + "[]";
      case NodeKind::ParameterizedType: {
        std::vector<int> args(k.begin() + 1, k.end());
        return expr(k[0]) + "<" + join(args, ", ") + ">";
      }
      case NodeKind::WildcardType: return k.empty() ? d.label : d.label + " " + expr(k[0]);
      case NodeKind::UnionType: return join(k, " | ");
      case NodeKind::Assignment: return expr(k[0]) + " " + d.label + " " + expr(k[1]);
      case NodeKind::InfixExpression: return expr(k[0]) + " " + d.label + " " + expr(k[1]);
      case NodeKind::PrefixExpression: {
        std::string operand = expr(k[0]);
        bool sep = !operand.empty() && (operand[0] == '+' || operand[0] == '-') && (d.label[0] == '+' || d.label[0] == '-');
        return d.label + (sep ? " " : "") + operand;
      }
      case NodeKind::PostfixExpression: return expr(k[0]) + d.label;
      case NodeKind::ConditionalExpression: return expr(k[0]) + " ? " + expr(k[1]) + " : " + expr(k[2]);
      case NodeKind::CastExpression: return "(" + expr(k[0]) + ") " + expr(k[1]);
      case NodeKind::InstanceofExpression: return expr(k[0]) + " instanceof " + expr(k[1]);
      case NodeKind::ParenthesizedExpression: return "(" + expr(k[0]) + ")";
      case NodeKind::Receiver: return expr(k[0]);
      case NodeKind::MethodInvocation: {
        std::string out;
        std::size_t i = 0;
        if (kind(k[0]) == NodeKind::Receiver) out += expr(k[i++]) + ".";
        std::vector<int> targs;
        while (is_type_kind(kind(k[i]))) targs.push_back(k[i++]);
        if (!targs.empty()) out += "<" + join(targs, ", ") + ">";
        out += expr(k[i++]);
        std::vector<int> args(k.begin() + static_cast<std::ptrdiff_t>(i), k.end());
        return out + "(" + join(args, ", ") + ")";
      }
      case NodeKind::SuperMethodInvocation: {
        std::size_t i = 0;
        std::string out = kind(k[0]) == NodeKind::Receiver ? expr(k[i++]) + ".super." : "super.";
        out += expr(k[i++]);
        std::vector<int> args(k.begin() + static_cast<std::ptrdiff_t>(i), k.end());
        return out + "(" + join(args, ", ") + ")";
      }
      case NodeKind::FieldAccess: return expr(k[0]) + "." + expr(k[1]);
      case NodeKind::SuperFieldAccess:
        return k.size() > 1 ? expr(k[0]) + ".super." + expr(k[1]) : "super." + expr(k[0]);
      case NodeKind::ArrayAccess: return expr(k[0]) + "[" + expr(k[1]) + "]";
      case NodeKind::ArrayCreation: {
        int t = k[0];
        int depth = 0;
        while (kind(t) == NodeKind::ArrayType) {
          t = kids(t)[0];
          ++depth;
        }
        std::string out = "new " + expr(t);
        int given = 0;
        std::string init;
        for (std::size_t i = 1; i < k.size(); ++i) {
          if (kind(k[i]) == NodeKind::ArrayInitializer) init = " " + expr(k[i]);
          else {
            out += "[" + expr(k[i]) + "]";
            ++given;
          }
        }
        for (int i = given; i < depth; ++i) out += "[]";
        return out + init;
      }
      case NodeKind::ArrayInitializer: return "{" + join(k, ", ") + "}";
      case NodeKind::ClassInstanceCreation: {
        std::size_t i = 0;
        std::string out;
        if (kind(k[0]) == NodeKind::Receiver) out += expr(k[i++]) + ".";
        out += "new " + expr(k[i++]);
        std::vector<int> args;
        int anon = -1;
        for (; i < k.size(); ++i) {
          if (kind(k[i]) == NodeKind::AnonymousClassDeclaration) anon = k[i];
          else args.push_back(k[i]);
        }
        out += "(" + join(args, ", ") + ")";
        if (anon >= 0) out += " " + body(anon, 0, anon_depth_);
        return out;
      }
      case NodeKind::ThisExpression: return k.empty() ? "this" : expr(k[0]) + ".this";
      case NodeKind::TypeLiteral: return expr(k[0]) + ".class";
      case NodeKind::LambdaExpression: {
        std::vector<int> params(k.begin(), k.end() - 1);
        std::string b = kind(k.back()) == NodeKind::Block ? block(k.back(), anon_depth_) : expr(k.back());
        return "(" + join(params, ", ") + ") -> " + b;
      }
      case NodeKind::MethodReference: return expr(k[0]) + "::" + expr(k[1]);
      case NodeKind::CreationReference: return expr(k[0]) + "::new";
      case NodeKind::SuperMethodReference:
        return k.size() > 1 ? expr(k[0]) + ".super::" + expr(k[1]) : "super::" + expr(k[0]);
      case NodeKind::VariableDeclarationExpression: return local(id);
      case NodeKind::AnonymousClassDeclaration: return body(id, 0, anon_depth_);
      default: return stmt(id, anon_depth_);
    }
  }

  const SourceTree& t_;
  int anon_depth_ = 1;
};

}  // namespace

std::string_view to_string(NodeKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<NodeKind> node_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i)
    if (kKindNames[i] == name) return static_cast<NodeKind>(i);
  return std::nullopt;
}

const std::vector<NodeKind>& all_node_kinds() {
  static const std::vector<NodeKind> kinds = [] {
    std::vector<NodeKind> v;
    for (std::size_t i = 0; i < std::size(kKindNames); ++i) v.push_back(static_cast<NodeKind>(i));
    return v;
  }();
  return kinds;
}

bool has_identifier_label(NodeKind kind) {
  return kind == NodeKind::SimpleName || kind == NodeKind::TypeDeclaration || kind == NodeKind::InterfaceDeclaration ||
         kind == NodeKind::EnumDeclaration || kind == NodeKind::AnnotationTypeDeclaration;
}

std::size_t SourceTree::node_count() const { return root < 0 ? 0 : preorder().size(); }

int SourceTree::add(NodeKind kind, std::string label, int parent) {
  Node n;
  n.kind = kind;
  n.label = std::move(label);
  n.parent = parent;
  nodes.push_back(std::move(n));
  int id = static_cast<int>(nodes.size() - 1);
  if (parent < 0) root = id;
  else nodes[static_cast<std::size_t>(parent)].children.push_back(id);
  return id;
}

void SourceTree::link_parents() {
  for (auto& n : nodes) n.parent = -1;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (int c : nodes[i].children) nodes[static_cast<std::size_t>(c)].parent = static_cast<int>(i);
}

std::vector<int> SourceTree::preorder() const {
  std::vector<int> out;
  if (root < 0) return out;
  std::vector<int> stack{root};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    out.push_back(id);
    const auto& k = at(id).children;
    for (auto it = k.rbegin(); it != k.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<int> SourceTree::postorder() const {
  std::vector<int> out;
  if (root < 0) return out;
  std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [id, next] = stack.back();
    const auto& k = at(id).children;
    if (next < k.size()) {
      int c = k[next++];
      stack.push_back({c, 0});
    } else {
      out.push_back(id);
      stack.pop_back();
    }
  }
  return out;
}

int SourceTree::height(int id) const {
  int h = 0;
  for (int c : at(id).children) h = std::max(h, height(c));
  return h + 1;
}

int SourceTree::subtree_size(int id) const {
  int s = 1;
  for (int c : at(id).children) s += subtree_size(c);
  return s;
}

std::string SourceTree::to_text() const {
  std::string out;
  std::function<void(int, int)> walk = [&](int id, int depth) {
    const Node& n = at(id);
    out += std::string(static_cast<std::size_t>(depth) * 2, ' ') + std::string(srcdiff::to_string(n.kind));
    if (!n.label.empty()) out += ": " + n.label;
    out += "\n";
    for (int c : n.children) walk(c, depth + 1);
  };
  if (root >= 0) walk(root, 0);
  return out;
}

bool isomorphic(const SourceTree& a, int x, const SourceTree& b, int y) {
  const Node& p = a.at(x);
  const Node& q = b.at(y);
  if (p.kind != q.kind || p.label != q.label || p.children.size() != q.children.size()) return false;
  for (std::size_t i = 0; i < p.children.size(); ++i)
    if (!isomorphic(a, p.children[i], b, q.children[i])) return false;
  return true;
}

bool isomorphic(const SourceTree& a, const SourceTree& b) {
  if (a.root < 0 || b.root < 0) return a.root < 0 && b.root < 0;
  return isomorphic(a, a.root, b, b.root);
}

std::string reprint(const SourceTree& tree) {
  if (tree.root < 0 || tree.at(tree.root).kind != NodeKind::CompilationUnit)
    throw std::invalid_argument("reprint needs a compilation unit");
  return Printer(tree).run();
}

}  // namespace dceval::srcdiff
