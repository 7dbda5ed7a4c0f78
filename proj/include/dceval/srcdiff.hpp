#pragma once

// Labeled ordered Java ASTs, an edit-script differ over them and the
// syntactic distortion score derived from a script.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dceval::srcdiff {

#define DCEVAL_NODE_KINDS(X)                                                                                       \
  X(CompilationUnit) X(PackageDeclaration) X(ImportDeclaration) X(TypeDeclaration) X(InterfaceDeclaration)       \
  X(EnumDeclaration) X(AnnotationTypeDeclaration) X(AnnotationTypeMemberDeclaration) X(EnumConstantDeclaration)  \
  X(AnonymousClassDeclaration) X(SuperInterfaceTypes) X(TypeParameter) X(FieldDeclaration) X(MethodDeclaration)  \
  X(Initializer) X(Modifier) X(MarkerAnnotation) X(SingleMemberAnnotation) X(NormalAnnotation) X(MemberValuePair) \
  X(SingleVariableDeclaration) X(VariableDeclarationFragment) X(Dimension) X(PrimitiveType) X(SimpleType)         \
  X(ArrayType) X(ParameterizedType) X(WildcardType) X(UnionType) X(SimpleName) X(QualifiedName) X(Block)          \
  X(EmptyStatement) X(ExpressionStatement) X(VariableDeclarationStatement) X(TypeDeclarationStatement)            \
  X(IfStatement) X(WhileStatement) X(DoStatement) X(ForStatement) X(ForInit) X(ForUpdate)                         \
  X(EnhancedForStatement) X(SwitchStatement) X(SwitchCase) X(BreakStatement) X(ContinueStatement)                 \
  X(ReturnStatement) X(ThrowStatement) X(TryStatement) X(CatchClause) X(SynchronizedStatement)                    \
  X(LabeledStatement) X(AssertStatement) X(ConstructorInvocation) X(SuperConstructorInvocation) X(Assignment)     \
  X(InfixExpression) X(PrefixExpression) X(PostfixExpression) X(ConditionalExpression) X(CastExpression)          \
  X(InstanceofExpression) X(ParenthesizedExpression) X(MethodInvocation) X(SuperMethodInvocation) X(Receiver)     \
  X(FieldAccess) X(SuperFieldAccess) X(ArrayAccess) X(ArrayCreation) X(ArrayInitializer)                          \
  X(ClassInstanceCreation) X(ThisExpression) X(TypeLiteral) X(LambdaExpression) X(MethodReference)                \
  X(CreationReference) X(SuperMethodReference) X(VariableDeclarationExpression) X(NumberLiteral)                  \
  X(StringLiteral) X(CharacterLiteral) X(BooleanLiteral) X(NullLiteral)

enum class NodeKind : std::uint8_t {
#define DCEVAL_ENUM_ITEM(k) k,
  DCEVAL_NODE_KINDS(DCEVAL_ENUM_ITEM)
#undef DCEVAL_ENUM_ITEM
};

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> node_kind_from_string(std::string_view name);
const std::vector<NodeKind>& all_node_kinds();

// Kinds whose label is an identifier chosen by the programmer: SimpleName and
// the declarations labeled with their own name.
bool has_identifier_label(NodeKind kind);

struct Node {
  NodeKind kind = NodeKind::CompilationUnit;
  std::string label;
  std::vector<int> children;
  int parent = -1;
  std::size_t begin = 0;  // byte span in the source text, [begin, end)
  std::size_t end = 0;
};

// Nodes are stored in a flat vector and addressed by index.
class SourceTree {
 public:
  std::vector<Node> nodes;
  int root = -1;

  std::size_t node_count() const;
  const Node& at(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
  int add(NodeKind kind, std::string label, int parent);
  // Recomputes parent links from the child lists.
  void link_parents();
  std::vector<int> preorder() const;
  std::vector<int> postorder() const;
  int height(int id) const;
  int subtree_size(int id) const;
  // One line per node, indented by depth: `Kind: label`.
  std::string to_text() const;
};

bool isomorphic(const SourceTree& a, int a_node, const SourceTree& b, int b_node);
bool isomorphic(const SourceTree& a, const SourceTree& b);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

SourceTree parse_source(std::string_view text);

// Renders a tree back to Java text; parsing the result gives an isomorphic
// tree.
std::string reprint(const SourceTree& tree);

enum class ActionType { Insert, Delete, Update, Move };
std::string_view to_string(ActionType type);

// Node ids refer to the working tree the script is applied to: ids below the
// original tree's node vector size are original nodes, and inserted nodes are
// numbered from there on. Parent -1 is the virtual root above both trees.
struct Action {
  ActionType type = ActionType::Insert;
  int node = -1;
  NodeKind kind = NodeKind::CompilationUnit;
  std::string label;      // node label, or the new label for Update
  std::string old_label;  // Update only
  int parent = -1;        // Insert and Move
  std::size_t position = 0;

  std::string to_text() const;
  bool operator==(const Action&) const = default;
};

struct EditScript {
  std::vector<Action> actions;
  std::size_t size() const { return actions.size(); }
  bool empty() const { return actions.empty(); }
  bool operator==(const EditScript&) const = default;
};

struct DiffOptions {
  int min_height = 2;
  double min_dice = 0.5;
  // Subtree pairs up to this size get an exact edit-distance recovery pass.
  int max_recovery_size = 100;
  // Trees whose node-count product is at most this get a mapping refinement
  // pass that minimizes script length by local search.
  std::size_t refine_limit = 60000;
  // Trees admitting at most this many kind-preserving partial mappings are
  // matched by exhaustive search for the shortest script.
  std::size_t exact_limit = 50000;
};

// Node pairs (original id, decompiled id).
using Mapping = std::vector<std::pair<int, int>>;

Mapping match_trees(const SourceTree& original, const SourceTree& decompiled, const DiffOptions& options = {});
EditScript generate_script(const SourceTree& original, const SourceTree& decompiled, const Mapping& mapping);
EditScript diff(const SourceTree& original, const SourceTree& decompiled, const DiffOptions& options = {});

// Script length a mapping induces, without materializing the script.
std::size_t script_cost(const SourceTree& original, const SourceTree& decompiled, const Mapping& mapping);

// Applies the script to a copy of `original`; throws std::invalid_argument on
// an action that does not fit the working tree. The result has exactly one
// root when the script is well formed.
SourceTree apply_script(const SourceTree& original, const EditScript& script);

struct DistortionScore {
  std::size_t counted_edits = 0;
  std::size_t original_nodes = 1;
  double ratio = 0.0;
  bool operator==(const DistortionScore&) const = default;
};

DistortionScore distortion(const EditScript& script, const SourceTree& original);

// One line of the distortion JSONL output. `score` is absent when either
// side failed to parse, with the parser message in `error`.
struct DistortionRecord {
  std::string path;
  std::optional<DistortionScore> score;
  std::size_t inserts = 0;
  std::size_t deletes = 0;
  std::size_t updates = 0;
  std::size_t moves = 0;
  std::size_t renames = 0;
  std::vector<std::string> actions;  // first few actions, rendered
  std::string error;
  bool operator==(const DistortionRecord&) const = default;
};

DistortionRecord score_sources(const std::string& path, std::string_view original, std::string_view decompiled,
                               const DiffOptions& options = {});

void to_json(nlohmann::json& j, const DistortionScore& s);
void from_json(const nlohmann::json& j, DistortionScore& s);
void to_json(nlohmann::json& j, const DistortionRecord& r);
void from_json(const nlohmann::json& j, DistortionRecord& r);

}  // namespace dceval::srcdiff
