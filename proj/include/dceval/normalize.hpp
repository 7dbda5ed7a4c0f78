#pragma once

// Pool-independent view of a class and the strict-equivalence check built on
// it. Two class files that differ only in constant-pool layout (and in the
// attributes named by the ignore set) normalize to equal values.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "dceval/classfile.hpp"

namespace dceval::classfile {

using AttributeIgnoreSet = std::set<std::string, std::less<>>;

// SourceFile, LineNumberTable, LocalVariableTable, LocalVariableTypeTable,
// StackMapTable.
AttributeIgnoreSet default_ignore_set();

struct NormalizedAttribute {
  std::string name;
  std::string rendering;
  auto operator<=>(const NormalizedAttribute&) const = default;
};

struct NormalizedMember {
  std::string name;
  std::string descriptor;
  std::uint16_t access_flags = 0;
  bool has_code = false;
  std::string frame;                  // "stack=N locals=M"
  std::vector<std::string> code;      // one symbolic instruction per entry
  std::vector<std::string> handlers;  // "[@s,@e) -> @h catch T"
  std::vector<NormalizedAttribute> attributes;  // sorted; Code sub-attributes prefixed "Code."
  bool operator==(const NormalizedMember&) const = default;
};

struct NormalizedClass {
  std::uint16_t major_version = 0;
  std::uint16_t minor_version = 0;
  std::string name;
  std::string super_name;
  std::uint16_t access_flags = 0;
  std::vector<std::string> interfaces;
  std::vector<NormalizedMember> fields;   // sorted by (name, descriptor)
  std::vector<NormalizedMember> methods;  // sorted by (name, descriptor)
  std::vector<NormalizedAttribute> attributes;
  bool operator==(const NormalizedClass&) const = default;
};

// Symbolic rendering of one pool entry; instruction operands in a
// NormalizedClass are always one of these strings.
std::string render_constant(const ConstantPool& pool, std::uint32_t index);

NormalizedClass normalize(const RawClassFile& cls, const AttributeIgnoreSet& ignore = default_ignore_set());

struct Difference {
  std::string location;
  std::string kind;
  std::string original;
  std::string recompiled;
  bool operator==(const Difference&) const = default;
};

struct EquivalenceReport {
  bool equal = true;
  std::vector<Difference> differences;

  std::string to_text() const;
  bool operator==(const EquivalenceReport&) const = default;
};

void to_json(nlohmann::json& j, const Difference& d);
void from_json(const nlohmann::json& j, Difference& d);
void to_json(nlohmann::json& j, const EquivalenceReport& r);
void from_json(const nlohmann::json& j, EquivalenceReport& r);

// Each member contributes at most `max_hunks_per_member` differences; the
// first one is always the first divergence in that member.
EquivalenceReport strict_equivalence(const NormalizedClass& original, const NormalizedClass& recompiled,
                                     std::size_t max_hunks_per_member = 8);

}  // namespace dceval::classfile
