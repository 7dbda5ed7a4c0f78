#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace dceval::classfile {

enum class OperandKind : std::uint8_t {
  None,
  Local,           // u1 local index (u2 under wide)
  Byte,            // s1 immediate (bipush)
  Short,           // s2 immediate (sipush)
  PoolNarrow,      // u1 pool index (ldc)
  Pool,            // u2 pool index
  Branch,          // s2 relative offset
  BranchWide,      // s4 relative offset
  Iinc,            // local + s1 (u2 + s2 under wide)
  NewArray,        // u1 array type
  InvokeInterface, // u2 pool index, u1 count, u1 zero
  InvokeDynamic,   // u2 pool index, u2 zero
  MultiANewArray,  // u2 pool index, u1 dimensions
  TableSwitch,
  LookupSwitch,
  Wide,
};

struct OpcodeInfo {
  std::string_view mnemonic;
  OperandKind kind = OperandKind::None;
  bool valid = false;
};

const OpcodeInfo& opcode_info(std::uint8_t opcode);

namespace op {
inline constexpr std::uint8_t ldc = 0x12;
inline constexpr std::uint8_t ldc_w = 0x13;
inline constexpr std::uint8_t ldc2_w = 0x14;
inline constexpr std::uint8_t iinc = 0x84;
inline constexpr std::uint8_t goto_ = 0xa7;
inline constexpr std::uint8_t jsr = 0xa8;
inline constexpr std::uint8_t tableswitch = 0xaa;
inline constexpr std::uint8_t lookupswitch = 0xab;
inline constexpr std::uint8_t invokeinterface = 0xb9;
inline constexpr std::uint8_t invokedynamic = 0xba;
inline constexpr std::uint8_t wide = 0xc4;
inline constexpr std::uint8_t goto_w = 0xc8;
inline constexpr std::uint8_t jsr_w = 0xc9;
}  // namespace op

struct Instruction {
  std::uint32_t offset = 0;
  std::uint32_t length = 0;
  std::uint8_t opcode = 0;
  bool wide = false;
  std::uint16_t pool_index = 0;
  std::uint16_t local = 0;
  // bipush/sipush value, iinc increment, newarray type, invokeinterface
  // count, multianewarray dimensions.
  std::int32_t immediate = 0;
  // Absolute branch targets. Switches: default first, then one per case.
  std::vector<std::int64_t> targets;
  std::int32_t low = 0;
  std::int32_t high = 0;
  std::vector<std::int32_t> keys;  // lookupswitch match values

  OperandKind kind() const { return opcode_info(opcode).kind; }
};

// Throws ClassFileError(BadInstruction/Truncated) with the offset relative to
// the start of the code array plus `base_offset`.
std::vector<Instruction> decode_code(std::span<const std::uint8_t> code, std::size_t base_offset = 0);

// Lays out `instrs` afresh, ignoring their stored offsets and treating each
// entry of `targets` as an index into `instrs` (or instrs.size() for the end
// of code). Conditional branches that no longer fit raise BadInstruction;
// goto/jsr are widened automatically. Fills `new_offsets` with the new start
// offset of each instruction followed by the new code length.
std::vector<std::uint8_t> encode_code(std::vector<Instruction> instrs,
                                      std::vector<std::uint32_t>& new_offsets);

}  // namespace dceval::classfile
