#pragma once

// Structural model of a JVM class file: decoding, byte-exact re-encoding and
// constant-pool permutation. The normalized (pool-free) view lives in
// normalize.hpp.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dceval::classfile {

inline constexpr std::uint32_t kMagic = 0xCAFEBABE;

enum class ErrorKind {
  BadMagic,
  Truncated,
  BadPoolRef,
  TrailingBytes,
  BadInstruction,
  InconsistentPool,
  InvalidPermutation,
};

std::string_view to_string(ErrorKind kind);

// Every decoding failure carries the byte offset where it was detected.
class ClassFileError : public std::runtime_error {
 public:
  ClassFileError(ErrorKind kind, std::size_t offset, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  ErrorKind kind_;
  std::size_t offset_;
};

enum class Tag : std::uint8_t {
  Utf8 = 1,
  Integer = 3,
  Float = 4,
  Long = 5,
  Double = 6,
  Class = 7,
  String = 8,
  Fieldref = 9,
  Methodref = 10,
  InterfaceMethodref = 11,
  NameAndType = 12,
  MethodHandle = 15,
  MethodType = 16,
  Dynamic = 17,
  InvokeDynamic = 18,
  Module = 19,
  Package = 20,
};

std::string_view to_string(Tag tag);

// Bit set of acceptable tags for a pool reference.
using TagMask = std::uint32_t;
constexpr TagMask mask(Tag t) { return TagMask{1} << static_cast<unsigned>(t); }
constexpr TagMask operator|(Tag a, Tag b) { return mask(a) | mask(b); }
constexpr TagMask operator|(TagMask a, Tag b) { return a | mask(b); }
inline constexpr TagMask kAnyLoadable = Tag::Integer | Tag::Float | Tag::Long | Tag::Double |
                                        Tag::Class | Tag::String | Tag::MethodHandle |
                                        Tag::MethodType | Tag::Dynamic;
inline constexpr TagMask kAnyTag = ~TagMask{0};

struct PoolEntry {
  Tag tag = Tag::Utf8;
  // Utf8 payload, kept as the stored (modified UTF-8) bytes.
  std::string text;
  // Integer/Float use the low 32 bits; Long/Double all 64.
  std::uint64_t bits = 0;
  // First reference: Class/String/MethodType/Module/Package target, member
  // owner class, NameAndType name, MethodHandle reference, bootstrap index.
  std::uint16_t ref1 = 0;
  // Second reference: member NameAndType, NameAndType descriptor.
  std::uint16_t ref2 = 0;
  std::uint8_t ref_kind = 0;

  bool is_wide() const noexcept { return tag == Tag::Long || tag == Tag::Double; }
  bool operator==(const PoolEntry&) const = default;
};

class ConstantPool {
 public:
  // slots[0] and the slot following every Long/Double stay empty.
  std::vector<std::optional<PoolEntry>> slots;

  // constant_pool_count as written in the file.
  std::size_t count() const noexcept { return slots.size(); }
  bool usable(std::uint32_t index) const noexcept {
    return index > 0 && index < slots.size() && slots[index].has_value();
  }

  const PoolEntry& at(std::uint32_t index, std::size_t offset = 0) const;
  const PoolEntry& expect(std::uint32_t index, TagMask tags, std::size_t offset = 0) const;
  const std::string& utf8(std::uint32_t index) const;
  const std::string& class_name(std::uint32_t index) const;

  bool operator==(const ConstantPool&) const = default;
};

struct Attribute;

struct ExceptionHandler {
  std::uint16_t start_pc = 0;
  std::uint16_t end_pc = 0;
  std::uint16_t handler_pc = 0;
  std::uint16_t catch_type = 0;  // 0 = any
  bool operator==(const ExceptionHandler&) const = default;
};

struct CodeAttribute {
  std::uint16_t max_stack = 0;
  std::uint16_t max_locals = 0;
  std::vector<std::uint8_t> code;
  std::vector<ExceptionHandler> exception_table;
  std::vector<Attribute> attributes;
  bool operator==(const CodeAttribute&) const;
};

struct Attribute {
  std::uint16_t name_index = 0;
  // Code is decoded; every other attribute is kept as its raw info bytes.
  std::variant<std::vector<std::uint8_t>, CodeAttribute> body;

  bool is_code() const noexcept { return std::holds_alternative<CodeAttribute>(body); }
  const CodeAttribute& code() const { return std::get<CodeAttribute>(body); }
  CodeAttribute& code() { return std::get<CodeAttribute>(body); }
  const std::vector<std::uint8_t>& raw() const { return std::get<std::vector<std::uint8_t>>(body); }
  std::vector<std::uint8_t>& raw() { return std::get<std::vector<std::uint8_t>>(body); }
  bool operator==(const Attribute&) const = default;
};

struct Member {
  std::uint16_t access_flags = 0;
  std::uint16_t name_index = 0;
  std::uint16_t descriptor_index = 0;
  std::vector<Attribute> attributes;
  bool operator==(const Member&) const = default;
};

struct RawClassFile {
  std::uint32_t magic = kMagic;
  std::uint16_t minor_version = 0;
  std::uint16_t major_version = 0;
  ConstantPool constant_pool;
  std::uint16_t access_flags = 0;
  std::uint16_t this_class = 0;
  std::uint16_t super_class = 0;
  std::vector<std::uint16_t> interfaces;
  std::vector<Member> fields;
  std::vector<Member> methods;
  std::vector<Attribute> attributes;

  std::string name() const { return constant_pool.class_name(this_class); }
  bool operator==(const RawClassFile&) const = default;
};

// Class-file majors the structural model is written against (Java 1.1 to 8).
inline constexpr std::uint16_t kMinSupportedMajor = 45;
inline constexpr std::uint16_t kMaxSupportedMajor = 52;

struct ParseOptions {
  // Receives a message when a class outside 45..52 is decoded best-effort.
  void (*warn)(const std::string&) = nullptr;
};

RawClassFile parse_class(std::span<const std::uint8_t> bytes, const ParseOptions& options = {});
std::vector<std::uint8_t> serialize_class(const RawClassFile& cls);

RawClassFile read_class_file(const std::string& path);
std::vector<std::uint8_t> read_bytes(const std::string& path);

// perm[old_index] == new_index. perm[0] must be 0 and every Long/Double pair
// must map onto an adjacent pair in the same order.
using PoolPermutation = std::vector<std::uint16_t>;

PoolPermutation identity_permutation(const ConstantPool& pool);
PoolPermutation reversal_permutation(const ConstantPool& pool);
PoolPermutation random_permutation(const ConstantPool& pool, std::mt19937_64& rng);
void validate_permutation(const ConstantPool& pool, std::span<const std::uint16_t> perm);

// Rewrites every pool reference through perm. An ldc whose operand no longer
// fits in one byte is widened to ldc_w and the method is relocated.
RawClassFile permute_constant_pool(const RawClassFile& cls, std::span<const std::uint16_t> perm);

}  // namespace dceval::classfile
