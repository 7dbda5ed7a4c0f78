#pragma once

// Field-level decoding of the standard (Java SE 8) attributes other than Code.
// Each attribute is flattened into a list of typed fields so that validation,
// pool permutation, relocation and normalization can share one layout table.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dceval/classfile.hpp"

namespace dceval::classfile {

enum class FieldRole : std::uint8_t {
  Number,      // plain integer (counts, flags, line numbers, tags)
  PoolRef,     // index into the constant pool
  Pc,          // absolute bytecode offset in the enclosing Code
  PcLength,    // length of a pc range starting at the preceding Pc field
  FrameDelta,  // StackMapTable offset delta (explicit or folded into the frame type)
  Bytes,       // opaque payload (SourceDebugExtension)
};

struct AttrField {
  FieldRole role = FieldRole::Number;
  std::uint32_t pos = 0;   // byte position inside the attribute info
  std::uint8_t width = 2;  // 0 when the value is folded into another byte
  std::uint32_t value = 0;
  TagMask tags = 0;        // PoolRef only
  bool nullable = false;   // PoolRef only: 0 allowed
};

struct DecodedAttribute {
  std::string name;
  bool known = false;
  std::vector<AttrField> fields;
};

bool is_known_attribute(std::string_view name);

// Decodes `info` according to the layout of attribute `name`. Unknown names
// yield known=false and no fields. Errors report `base_offset` + position.
DecodedAttribute decode_attribute(std::string_view name, std::span<const std::uint8_t> info,
                                  std::size_t base_offset = 0);

// Throws BadPoolRef if a PoolRef field is out of range or of the wrong tag.
void check_pool_refs(const ConstantPool& pool, const DecodedAttribute& attr, std::size_t base_offset);

// StackMapTable frames with absolute offsets, used when code is relocated.
struct VerificationType {
  std::uint8_t tag = 0;
  std::uint16_t data = 0;  // Object: pool index; Uninitialized: pc
};

struct StackMapFrame {
  std::uint8_t frame_type = 0;
  std::uint32_t offset = 0;
  std::vector<VerificationType> locals;  // append/full frames
  std::vector<VerificationType> stack;   // same_locals_1 / full frames
};

std::vector<StackMapFrame> decode_stack_map(std::span<const std::uint8_t> info, std::size_t base_offset = 0);
// Re-encodes frames; the frame type is kept when the delta still fits it and
// otherwise promoted to the extended form.
std::vector<std::uint8_t> encode_stack_map(const std::vector<StackMapFrame>& frames);

}  // namespace dceval::classfile
