#include "dceval/bytecode.hpp"

#include <array>
#include <string>

#include "byte_io.hpp"

namespace dceval::classfile {

namespace {

std::array<OpcodeInfo, 256> build_table() {
  std::array<OpcodeInfo, 256> t{};
  t[0x00] = {"nop", OperandKind::None, true};
  t[0x01] = {"aconst_null", OperandKind::None, true};
  t[0x02] = {"iconst_m1", OperandKind::None, true};
  t[0x03] = {"iconst_0", OperandKind::None, true};
  t[0x04] = {"iconst_1", OperandKind::None, true};
  t[0x05] = {"iconst_2", OperandKind::None, true};
  t[0x06] = {"iconst_3", OperandKind::None, true};
  t[0x07] = {"iconst_4", OperandKind::None, true};
  t[0x08] = {"iconst_5", OperandKind::None, true};
  t[0x09] = {"lconst_0", OperandKind::None, true};
  t[0x0a] = {"lconst_1", OperandKind::None, true};
  t[0x0b] = {"fconst_0", OperandKind::None, true};
  t[0x0c] = {"fconst_1", OperandKind::None, true};
  t[0x0d] = {"fconst_2", OperandKind::None, true};
  t[0x0e] = {"dconst_0", OperandKind::None, true};
  t[0x0f] = {"dconst_1", OperandKind::None, true};
  t[0x10] = {"bipush", OperandKind::Byte, true};
  t[0x11] = {"sipush", OperandKind::Short, true};
  t[0x12] = {"ldc", OperandKind::PoolNarrow, true};
  t[0x13] = {"ldc_w", OperandKind::Pool, true};
  t[0x14] = {"ldc2_w", OperandKind::Pool, true};
  t[0x15] = {"iload", OperandKind::Local, true};
  t[0x16] = {"lload", OperandKind::Local, true};
  t[0x17] = {"fload", OperandKind::Local, true};
  t[0x18] = {"dload", OperandKind::Local, true};
  t[0x19] = {"aload", OperandKind::Local, true};
  t[0x1a] = {"iload_0", OperandKind::None, true};
  t[0x1b] = {"iload_1", OperandKind::None, true};
  t[0x1c] = {"iload_2", OperandKind::None, true};
  t[0x1d] = {"iload_3", OperandKind::None, true};
  t[0x1e] = {"lload_0", OperandKind::None, true};
  t[0x1f] = {"lload_1", OperandKind::None, true};
  t[0x20] = {"lload_2", OperandKind::None, true};
  t[0x21] = {"lload_3", OperandKind::None, true};
  t[0x22] = {"fload_0", OperandKind::None, true};
  t[0x23] = {"fload_1", OperandKind::None, true};
  t[0x24] = {"fload_2", OperandKind::None, true};
  t[0x25] = {"fload_3", OperandKind::None, true};
  t[0x26] = {"dload_0", OperandKind::None, true};
  t[0x27] = {"dload_1", OperandKind::None, true};
  t[0x28] = {"dload_2", OperandKind::None, true};
  t[0x29] = {"dload_3", OperandKind::None, true};
  t[0x2a] = {"aload_0", OperandKind::None, true};
  t[0x2b] = {"aload_1", OperandKind::None, true};
  t[0x2c] = {"aload_2", OperandKind::None, true};
  t[0x2d] = {"aload_3", OperandKind::None, true};
  t[0x2e] = {"iaload", OperandKind::None, true};
  t[0x2f] = {"laload", OperandKind::None, true};
  t[0x30] = {"faload", OperandKind::None, true};
  t[0x31] = {"daload", OperandKind::None, true};
  t[0x32] = {"aaload", OperandKind::None, true};
  t[0x33] = {"baload", OperandKind::None, true};
  t[0x34] = {"caload", OperandKind::None, true};
  t[0x35] = {"saload", OperandKind::None, true};
  t[0x36] = {"istore", OperandKind::Local, true};
  t[0x37] = {"lstore", OperandKind::Local, true};
  t[0x38] = {"fstore", OperandKind::Local, true};
  t[0x39] = {"dstore", OperandKind::Local, true};
  t[0x3a] = {"astore", OperandKind::Local, true};
  t[0x3b] = {"istore_0", OperandKind::None, true};
  t[0x3c] = {"istore_1", OperandKind::None, true};
  t[0x3d] = {"istore_2", OperandKind::None, true};
  t[0x3e] = {"istore_3", OperandKind::None, true};
  t[0x3f] = {"lstore_0", OperandKind::None, true};
  t[0x40] = {"lstore_1", OperandKind::None, true};
  t[0x41] = {"lstore_2", OperandKind::None, true};
  t[0x42] = {"lstore_3", OperandKind::None, true};
  t[0x43] = {"fstore_0", OperandKind::None, true};
  t[0x44] = {"fstore_1", OperandKind::None, true};
  t[0x45] = {"fstore_2", OperandKind::None, true};
  t[0x46] = {"fstore_3", OperandKind::None, true};
  t[0x47] = {"dstore_0", OperandKind::None, true};
  t[0x48] = {"dstore_1", OperandKind::None, true};
  t[0x49] = {"dstore_2", OperandKind::None, true};
  t[0x4a] = {"dstore_3", OperandKind::None, true};
  t[0x4b] = {"astore_0", OperandKind::None, true};
  t[0x4c] = {"astore_1", OperandKind::None, true};
  t[0x4d] = {"astore_2", OperandKind::None, true};
  t[0x4e] = {"astore_3", OperandKind::None, true};
  t[0x4f] = {"iastore", OperandKind::None, true};
  t[0x50] = {"lastore", OperandKind::None, true};
  t[0x51] = {"fastore", OperandKind::None, true};
  t[0x52] = {"dastore", OperandKind::None, true};
  t[0x53] = {"aastore", OperandKind::None, true};
  t[0x54] = {"bastore", OperandKind::None, true};
  t[0x55] = {"castore", OperandKind::None, true};
  t[0x56] = {"sastore", OperandKind::None, true};
  t[0x57] = {"pop", OperandKind::None, true};
  t[0x58] = {"pop2", OperandKind::None, true};
  t[0x59] = {"dup", OperandKind::None, true};
  t[0x5a] = {"dup_x1", OperandKind::None, true};
  t[0x5b] = {"dup_x2", OperandKind::None, true};
  t[0x5c] = {"dup2", OperandKind::None, true};
  t[0x5d] = {"dup2_x1", OperandKind::None, true};
  t[0x5e] = {"dup2_x2", OperandKind::None, true};
  t[0x5f] = {"swap", OperandKind::None, true};
  t[0x60] = {"iadd", OperandKind::None, true};
  t[0x61] = {"ladd", OperandKind::None, true};
  t[0x62] = {"fadd", OperandKind::None, true};
  t[0x63] = {"dadd", OperandKind::None, true};
  t[0x64] = {"isub", OperandKind::None, true};
  t[0x65] = {"lsub", OperandKind::None, true};
  t[0x66] = {"fsub", OperandKind::None, true};
  t[0x67] = {"dsub", OperandKind::None, true};
  t[0x68] = {"imul", OperandKind::None, true};
  t[0x69] = {"lmul", OperandKind::None, true};
  t[0x6a] = {"fmul", OperandKind::None, true};
  t[0x6b] = {"dmul", OperandKind::None, true};
  t[0x6c] = {"idiv", OperandKind::None, true};
  t[0x6d] = {"ldiv", OperandKind::None, true};
  t[0x6e] = {"fdiv", OperandKind::None, true};
  t[0x6f] = {"ddiv", OperandKind::None, true};
  t[0x70] = {"irem", OperandKind::None, true};
  t[0x71] = {"lrem", OperandKind::None, true};
  t[0x72] = {"frem", OperandKind::None, true};
  t[0x73] = {"drem", OperandKind::None, true};
  t[0x74] = {"ineg", OperandKind::None, true};
  t[0x75] = {"lneg", OperandKind::None, true};
  t[0x76] = {"fneg", OperandKind::None, true};
  t[0x77] = {"dneg", OperandKind::None, true};
  t[0x78] = {"ishl", OperandKind::None, true};
  t[0x79] = {"lshl", OperandKind::None, true};
  t[0x7a] = {"ishr", OperandKind::None, true};
  t[0x7b] = {"lshr", OperandKind::None, true};
  t[0x7c] = {"iushr", OperandKind::None, true};
  t[0x7d] = {"lushr", OperandKind::None, true};
  t[0x7e] = {"iand", OperandKind::None, true};
  t[0x7f] = {"land", OperandKind::None, true};
  t[0x80] = {"ior", OperandKind::None, true};
  t[0x81] = {"lor", OperandKind::None, true};
  t[0x82] = {"ixor", OperandKind::None, true};
  t[0x83] = {"lxor", OperandKind::None, true};
  t[0x84] = {"iinc", OperandKind::Iinc, true};
  t[0x85] = {"i2l", OperandKind::None, true};
  t[0x86] = {"i2f", OperandKind::None, true};
  t[0x87] = {"i2d", OperandKind::None, true};
  t[0x88] = {"l2i", OperandKind::None, true};
  t[0x89] = {"l2f", OperandKind::None, true};
  t[0x8a] = {"l2d", OperandKind::None, true};
  t[0x8b] = {"f2i", OperandKind::None, true};
  t[0x8c] = {"f2l", OperandKind::None, true};
  t[0x8d] = {"f2d", OperandKind::None, true};
  t[0x8e] = {"d2i", OperandKind::None, true};
  t[0x8f] = {"d2l", OperandKind::None, true};
  t[0x90] = {"d2f", OperandKind::None, true};
  t[0x91] = {"i2b", OperandKind::None, true};
  t[0x92] = {"i2c", OperandKind::None, true};
  t[0x93] = {"i2s", OperandKind::None, true};
  t[0x94] = {"lcmp", OperandKind::None, true};
  t[0x95] = {"fcmpl", OperandKind::None, true};
  t[0x96] = {"fcmpg", OperandKind::None, true};
  t[0x97] = {"dcmpl", OperandKind::None, true};
  t[0x98] = {"dcmpg", OperandKind::None, true};
  t[0x99] = {"ifeq", OperandKind::Branch, true};
  t[0x9a] = {"ifne", OperandKind::Branch, true};
  t[0x9b] = {"iflt", OperandKind::Branch, true};
  t[0x9c] = {"ifge", OperandKind::Branch, true};
  t[0x9d] = {"ifgt", OperandKind::Branch, true};
  t[0x9e] = {"ifle", OperandKind::Branch, true};
  t[0x9f] = {"if_icmpeq", OperandKind::Branch, true};
  t[0xa0] = {"if_icmpne", OperandKind::Branch, true};
  t[0xa1] = {"if_icmplt", OperandKind::Branch, true};
  t[0xa2] = {"if_icmpge", OperandKind::Branch, true};
  t[0xa3] = {"if_icmpgt", OperandKind::Branch, true};
  t[0xa4] = {"if_icmple", OperandKind::Branch, true};
  t[0xa5] = {"if_acmpeq", OperandKind::Branch, true};
  t[0xa6] = {"if_acmpne", OperandKind::Branch, true};
  t[0xa7] = {"goto", OperandKind::Branch, true};
  t[0xa8] = {"jsr", OperandKind::Branch, true};
  t[0xa9] = {"ret", OperandKind::Local, true};
  t[0xaa] = {"tableswitch", OperandKind::TableSwitch, true};
  t[0xab] = {"lookupswitch", OperandKind::LookupSwitch, true};
  t[0xac] = {"ireturn", OperandKind::None, true};
  t[0xad] = {"lreturn", OperandKind::None, true};
  t[0xae] = {"freturn", OperandKind::None, true};
  t[0xaf] = {"dreturn", OperandKind::None, true};
  t[0xb0] = {"areturn", OperandKind::None, true};
  t[0xb1] = {"return", OperandKind::None, true};
  t[0xb2] = {"getstatic", OperandKind::Pool, true};
  t[0xb3] = {"putstatic", OperandKind::Pool, true};
  t[0xb4] = {"getfield", OperandKind::Pool, true};
  t[0xb5] = {"putfield", OperandKind::Pool, true};
  t[0xb6] = {"invokevirtual", OperandKind::Pool, true};
  t[0xb7] = {"invokespecial", OperandKind::Pool, true};
  t[0xb8] = {"invokestatic", OperandKind::Pool, true};
  t[0xb9] = {"invokeinterface", OperandKind::InvokeInterface, true};
  t[0xba] = {"invokedynamic", OperandKind::InvokeDynamic, true};
  t[0xbb] = {"new", OperandKind::Pool, true};
  t[0xbc] = {"newarray", OperandKind::NewArray, true};
  t[0xbd] = {"anewarray", OperandKind::Pool, true};
  t[0xbe] = {"arraylength", OperandKind::None, true};
  t[0xbf] = {"athrow", OperandKind::None, true};
  t[0xc0] = {"checkcast", OperandKind::Pool, true};
  t[0xc1] = {"instanceof", OperandKind::Pool, true};
  t[0xc2] = {"monitorenter", OperandKind::None, true};
  t[0xc3] = {"monitorexit", OperandKind::None, true};
  t[0xc4] = {"wide", OperandKind::Wide, true};
  t[0xc5] = {"multianewarray", OperandKind::MultiANewArray, true};
  t[0xc6] = {"ifnull", OperandKind::Branch, true};
  t[0xc7] = {"ifnonnull", OperandKind::Branch, true};
  t[0xc8] = {"goto_w", OperandKind::BranchWide, true};
  t[0xc9] = {"jsr_w", OperandKind::BranchWide, true};
  return t;
}

bool is_wideable(std::uint8_t opcode) {
  return (opcode >= 0x15 && opcode <= 0x19) || (opcode >= 0x36 && opcode <= 0x3a) ||
         opcode == 0xa9 || opcode == op::iinc;
}

std::uint32_t switch_padding(std::uint32_t offset) { return (4 - ((offset + 1) % 4)) % 4; }

[[noreturn]] void bad(std::size_t offset, const std::string& what) {
  throw ClassFileError(ErrorKind::BadInstruction, offset, what);
}

}  // namespace

const OpcodeInfo& opcode_info(std::uint8_t opcode) {
  static const std::array<OpcodeInfo, 256> table = build_table();
  return table[opcode];
}

std::vector<Instruction> decode_code(std::span<const std::uint8_t> code, std::size_t base_offset) {
  detail::Reader in(code, base_offset);
  std::vector<Instruction> out;
  while (!in.at_end()) {
    Instruction ins;
    ins.offset = static_cast<std::uint32_t>(in.pos());
    ins.opcode = in.u1();
    const OpcodeInfo* info = &opcode_info(ins.opcode);
    if (!info->valid) bad(in.file_offset() - 1, "unknown opcode " + std::to_string(ins.opcode));
    if (info->kind == OperandKind::Wide) {
      ins.wide = true;
      ins.opcode = in.u1();
      info = &opcode_info(ins.opcode);
      if (!info->valid || !is_wideable(ins.opcode))
        bad(in.file_offset() - 1, "opcode " + std::to_string(ins.opcode) + " cannot follow wide");
    }
    const std::int64_t here = ins.offset;
    switch (info->kind) {
      case OperandKind::None:
        break;
      case OperandKind::Local:
        ins.local = ins.wide ? in.u2() : in.u1();
        break;
      case OperandKind::Byte:
        ins.immediate = static_cast<std::int8_t>(in.u1());
        break;
      case OperandKind::Short:
        ins.immediate = static_cast<std::int16_t>(in.u2());
        break;
      case OperandKind::PoolNarrow:
        ins.pool_index = in.u1();
        break;
      case OperandKind::Pool:
        ins.pool_index = in.u2();
        break;
      case OperandKind::Branch:
        ins.targets.push_back(here + static_cast<std::int16_t>(in.u2()));
        break;
      case OperandKind::BranchWide:
        ins.targets.push_back(here + static_cast<std::int32_t>(in.u4()));
        break;
      case OperandKind::Iinc:
        if (ins.wide) {
          ins.local = in.u2();
          ins.immediate = static_cast<std::int16_t>(in.u2());
        } else {
          ins.local = in.u1();
          ins.immediate = static_cast<std::int8_t>(in.u1());
        }
        break;
      case OperandKind::NewArray:
        ins.immediate = in.u1();
        break;
      case OperandKind::InvokeInterface:
        ins.pool_index = in.u2();
        ins.immediate = in.u1();
        in.u1();
        break;
      case OperandKind::InvokeDynamic:
        ins.pool_index = in.u2();
        in.u2();
        break;
      case OperandKind::MultiANewArray:
        ins.pool_index = in.u2();
        ins.immediate = in.u1();
        break;
      case OperandKind::TableSwitch: {
        in.bytes(switch_padding(ins.offset));
        ins.targets.push_back(here + static_cast<std::int32_t>(in.u4()));
        ins.low = static_cast<std::int32_t>(in.u4());
        ins.high = static_cast<std::int32_t>(in.u4());
        if (ins.high < ins.low) bad(in.file_offset(), "tableswitch high < low");
        const std::int64_t n = std::int64_t{ins.high} - ins.low + 1;
        in.need(static_cast<std::size_t>(n) * 4);
        for (std::int64_t i = 0; i < n; ++i)
          ins.targets.push_back(here + static_cast<std::int32_t>(in.u4()));
        break;
      }
      case OperandKind::LookupSwitch: {
        in.bytes(switch_padding(ins.offset));
        ins.targets.push_back(here + static_cast<std::int32_t>(in.u4()));
        const auto npairs = static_cast<std::int32_t>(in.u4());
        if (npairs < 0) bad(in.file_offset(), "lookupswitch npairs < 0");
        in.need(static_cast<std::size_t>(npairs) * 8);
        for (std::int32_t i = 0; i < npairs; ++i) {
          ins.keys.push_back(static_cast<std::int32_t>(in.u4()));
          ins.targets.push_back(here + static_cast<std::int32_t>(in.u4()));
        }
        break;
      }
      case OperandKind::Wide:
        bad(in.file_offset(), "nested wide");
    }
    ins.length = static_cast<std::uint32_t>(in.pos() - ins.offset);
    out.push_back(std::move(ins));
  }

  std::vector<bool> starts(code.size() + 1, false);
  for (const auto& ins : out) starts[ins.offset] = true;
  for (const auto& ins : out)
    for (auto t : ins.targets)
      if (t < 0 || t >= static_cast<std::int64_t>(code.size()) || !starts[static_cast<std::size_t>(t)])
        bad(base_offset + ins.offset, "branch target " + std::to_string(t) + " is not an instruction");
  return out;
}

namespace {

std::uint32_t encoded_size(const Instruction& ins, std::uint32_t offset) {
  switch (ins.kind()) {
    case OperandKind::None: return 1;
    case OperandKind::Local: return ins.wide ? 4 : 2;
    case OperandKind::Byte: return 2;
    case OperandKind::Short: return 3;
    case OperandKind::PoolNarrow: return 2;
    case OperandKind::Pool: return 3;
    case OperandKind::Branch: return 3;
    case OperandKind::BranchWide: return 5;
    case OperandKind::Iinc: return ins.wide ? 6 : 3;
    case OperandKind::NewArray: return 2;
    case OperandKind::InvokeInterface: return 5;
    case OperandKind::InvokeDynamic: return 5;
    case OperandKind::MultiANewArray: return 4;
    case OperandKind::TableSwitch:
      return 1 + switch_padding(offset) + 12 + 4 * static_cast<std::uint32_t>(ins.targets.size() - 1);
    case OperandKind::LookupSwitch:
      return 1 + switch_padding(offset) + 8 + 8 * static_cast<std::uint32_t>(ins.keys.size());
    case OperandKind::Wide: break;
  }
  return 1;
}

}  // namespace

std::vector<std::uint8_t> encode_code(std::vector<Instruction> instrs,
                                      std::vector<std::uint32_t>& new_offsets) {
  for (auto& ins : instrs) {
    if (ins.opcode == op::ldc && ins.pool_index > 0xff) ins.opcode = op::ldc_w;
    if ((ins.kind() == OperandKind::Local || ins.kind() == OperandKind::Iinc) &&
        (ins.local > 0xff || (ins.kind() == OperandKind::Iinc && (ins.immediate < -128 || ins.immediate > 127))))
      ins.wide = true;
  }

  new_offsets.assign(instrs.size() + 1, 0);
  for (bool changed = true; changed;) {
    changed = false;
    std::uint32_t at = 0;
    for (std::size_t i = 0; i < instrs.size(); ++i) {
      new_offsets[i] = at;
      at += encoded_size(instrs[i], at);
    }
    new_offsets[instrs.size()] = at;
    for (std::size_t i = 0; i < instrs.size(); ++i) {
      auto& ins = instrs[i];
      if (ins.kind() != OperandKind::Branch) continue;
      const std::int64_t delta =
          std::int64_t{new_offsets[static_cast<std::size_t>(ins.targets[0])]} - new_offsets[i];
      if (delta >= -32768 && delta <= 32767) continue;
      if (ins.opcode == op::goto_) {
        ins.opcode = op::goto_w;
      } else if (ins.opcode == op::jsr) {
        ins.opcode = op::jsr_w;
      } else {
        bad(new_offsets[i], "conditional branch offset out of range after relocation");
      }
      changed = true;
    }
  }

  detail::Writer w;
  for (std::size_t i = 0; i < instrs.size(); ++i) {
    const auto& ins = instrs[i];
    const std::uint32_t here = new_offsets[i];
    auto rel = [&](std::int64_t target_index) {
      return static_cast<std::uint32_t>(std::int64_t{new_offsets[static_cast<std::size_t>(target_index)]} - here);
    };
    if (ins.wide) w.u1(op::wide);
    w.u1(ins.opcode);
    switch (ins.kind()) {
      case OperandKind::None: break;
      case OperandKind::Local:
        if (ins.wide) w.u2(ins.local); else w.u1(ins.local);
        break;
      case OperandKind::Byte: w.u1(static_cast<std::uint32_t>(ins.immediate)); break;
      case OperandKind::Short: w.u2(static_cast<std::uint32_t>(ins.immediate)); break;
      case OperandKind::PoolNarrow: w.u1(ins.pool_index); break;
      case OperandKind::Pool: w.u2(ins.pool_index); break;
      case OperandKind::Branch: w.u2(rel(ins.targets[0])); break;
      case OperandKind::BranchWide: w.u4(rel(ins.targets[0])); break;
      case OperandKind::Iinc:
        if (ins.wide) {
          w.u2(ins.local);
          w.u2(static_cast<std::uint32_t>(ins.immediate));
        } else {
          w.u1(ins.local);
          w.u1(static_cast<std::uint32_t>(ins.immediate));
        }
        break;
      case OperandKind::NewArray: w.u1(static_cast<std::uint32_t>(ins.immediate)); break;
      case OperandKind::InvokeInterface:
        w.u2(ins.pool_index);
        w.u1(static_cast<std::uint32_t>(ins.immediate));
        w.u1(0);
        break;
      case OperandKind::InvokeDynamic:
        w.u2(ins.pool_index);
        w.u2(0);
        break;
      case OperandKind::MultiANewArray:
        w.u2(ins.pool_index);
        w.u1(static_cast<std::uint32_t>(ins.immediate));
        break;
      case OperandKind::TableSwitch:
        for (std::uint32_t p = switch_padding(here); p > 0; --p) w.u1(0);
        w.u4(rel(ins.targets[0]));
        w.u4(static_cast<std::uint32_t>(ins.low));
        w.u4(static_cast<std::uint32_t>(ins.high));
        for (std::size_t k = 1; k < ins.targets.size(); ++k) w.u4(rel(ins.targets[k]));
        break;
      case OperandKind::LookupSwitch:
        for (std::uint32_t p = switch_padding(here); p > 0; --p) w.u1(0);
        w.u4(rel(ins.targets[0]));
        w.u4(static_cast<std::uint32_t>(ins.keys.size()));
        for (std::size_t k = 0; k < ins.keys.size(); ++k) {
          w.u4(static_cast<std::uint32_t>(ins.keys[k]));
          w.u4(rel(ins.targets[k + 1]));
        }
        break;
      case OperandKind::Wide: break;
    }
  }
  return std::move(w.out);
}

}  // namespace dceval::classfile
