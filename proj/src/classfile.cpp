#include "dceval/classfile.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <numeric>

#include "byte_io.hpp"
#include "dceval/attributes.hpp"
#include "dceval/bytecode.hpp"

namespace dceval::classfile {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::Truncated: return "Truncated";
    case ErrorKind::BadPoolRef: return "BadPoolRef";
    case ErrorKind::TrailingBytes: return "TrailingBytes";
    case ErrorKind::BadInstruction: return "BadInstruction";
    case ErrorKind::InconsistentPool: return "InconsistentPool";
    case ErrorKind::InvalidPermutation: return "InvalidPermutation";
  }
  return "?";
}

ClassFileError::ClassFileError(ErrorKind kind, std::size_t offset, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + " at byte " + std::to_string(offset) + ": " + detail),
      kind_(kind),
      offset_(offset) {}

std::string_view to_string(Tag tag) {
  switch (tag) {
    case Tag::Utf8: return "Utf8";
    case Tag::Integer: return "Integer";
    case Tag::Float: return "Float";
    case Tag::Long: return "Long";
    case Tag::Double: return "Double";
    case Tag::Class: return "Class";
    case Tag::String: return "String";
    case Tag::Fieldref: return "Fieldref";
    case Tag::Methodref: return "Methodref";
    case Tag::InterfaceMethodref: return "InterfaceMethodref";
    case Tag::NameAndType: return "NameAndType";
    case Tag::MethodHandle: return "MethodHandle";
    case Tag::MethodType: return "MethodType";
    case Tag::Dynamic: return "Dynamic";
    case Tag::InvokeDynamic: return "InvokeDynamic";
    case Tag::Module: return "Module";
    case Tag::Package: return "Package";
  }
  return "?";
}

bool CodeAttribute::operator==(const CodeAttribute& o) const {
  return max_stack == o.max_stack && max_locals == o.max_locals && code == o.code &&
         exception_table == o.exception_table && attributes == o.attributes;
}

const PoolEntry& ConstantPool::at(std::uint32_t index, std::size_t offset) const {
  if (!usable(index))
    throw ClassFileError(ErrorKind::BadPoolRef, offset,
                         "constant pool index " + std::to_string(index) + " is not a usable slot (count " +
                             std::to_string(slots.size()) + ")");
  return *slots[index];
}

const PoolEntry& ConstantPool::expect(std::uint32_t index, TagMask tags, std::size_t offset) const {
  const PoolEntry& e = at(index, offset);
  if ((tags & mask(e.tag)) == 0)
    throw ClassFileError(ErrorKind::BadPoolRef, offset,
                         "constant pool index " + std::to_string(index) + " has unexpected tag " +
                             std::string(to_string(e.tag)));
  return e;
}

const std::string& ConstantPool::utf8(std::uint32_t index) const { return expect(index, mask(Tag::Utf8)).text; }

const std::string& ConstantPool::class_name(std::uint32_t index) const {
  return utf8(expect(index, mask(Tag::Class)).ref1);
}

namespace {

using detail::Reader;
using detail::Writer;

TagMask instruction_pool_tags(std::uint8_t opcode, std::uint16_t major) {
  switch (opcode) {
    case op::ldc:
    case op::ldc_w:
      return Tag::Integer | Tag::Float | Tag::String | Tag::Class | Tag::MethodHandle | Tag::MethodType |
             Tag::Dynamic;
    case op::ldc2_w: return Tag::Long | Tag::Double | Tag::Dynamic;
    case 0xb2: case 0xb3: case 0xb4: case 0xb5: return mask(Tag::Fieldref);
    case 0xb6: return mask(Tag::Methodref);
    case 0xb7:
    case 0xb8:
      return major >= 52 ? (Tag::Methodref | Tag::InterfaceMethodref) : mask(Tag::Methodref);
    case op::invokeinterface: return mask(Tag::InterfaceMethodref);
    case op::invokedynamic: return mask(Tag::InvokeDynamic);
    default: return mask(Tag::Class);  // new, anewarray, checkcast, instanceof, multianewarray
  }
}

void check_entry_refs(const ConstantPool& pool, std::uint32_t index, std::size_t offset) {
  const PoolEntry& e = *pool.slots[index];
  const auto utf8 = mask(Tag::Utf8);
  switch (e.tag) {
    case Tag::Class:
    case Tag::String:
    case Tag::MethodType:
    case Tag::Module:
    case Tag::Package:
      pool.expect(e.ref1, utf8, offset);
      break;
    case Tag::Fieldref:
    case Tag::Methodref:
    case Tag::InterfaceMethodref:
      pool.expect(e.ref1, mask(Tag::Class), offset);
      pool.expect(e.ref2, mask(Tag::NameAndType), offset);
      break;
    case Tag::NameAndType:
      pool.expect(e.ref1, utf8, offset);
      pool.expect(e.ref2, utf8, offset);
      break;
    case Tag::MethodHandle: {
      TagMask target = 0;
      if (e.ref_kind >= 1 && e.ref_kind <= 4) target = mask(Tag::Fieldref);
      else if (e.ref_kind == 5 || e.ref_kind == 8) target = mask(Tag::Methodref);
      else if (e.ref_kind == 6 || e.ref_kind == 7) target = Tag::Methodref | Tag::InterfaceMethodref;
      else if (e.ref_kind == 9) target = mask(Tag::InterfaceMethodref);
      else
        throw ClassFileError(ErrorKind::BadPoolRef, offset,
                             "method handle kind " + std::to_string(e.ref_kind) + " is invalid");
      pool.expect(e.ref1, target, offset);
      break;
    }
    case Tag::Dynamic:
    case Tag::InvokeDynamic:
      pool.expect(e.ref2, mask(Tag::NameAndType), offset);
      break;
    default:
      break;
  }
}

ConstantPool parse_pool(Reader& in) {
  ConstantPool pool;
  const std::uint16_t count = in.u2();
  pool.slots.resize(count);
  std::vector<std::size_t> offsets(count, 0);
  for (std::uint32_t i = 1; i < count; ++i) {
    offsets[i] = in.file_offset();
    PoolEntry e;
    const std::uint8_t tag = in.u1();
    e.tag = static_cast<Tag>(tag);
    switch (tag) {
      case 1: {
        const auto len = in.u2();
        const auto bytes = in.bytes(len);
        e.text.assign(bytes.begin(), bytes.end());
        break;
      }
      case 3: case 4: e.bits = in.u4(); break;
      case 5: case 6: {
        const std::uint64_t hi = in.u4();
        e.bits = (hi << 32) | in.u4();
        break;
      }
      case 7: case 8: case 16: case 19: case 20: e.ref1 = in.u2(); break;
      case 9: case 10: case 11: case 12: case 17: case 18:
        e.ref1 = in.u2();
        e.ref2 = in.u2();
        break;
      case 15:
        e.ref_kind = in.u1();
        e.ref1 = in.u2();
        break;
      default:
        throw ClassFileError(ErrorKind::BadPoolRef, offsets[i],
                             "unknown constant pool tag " + std::to_string(tag) + " at index " + std::to_string(i));
    }
    const bool wide = e.is_wide();
    pool.slots[i] = std::move(e);
    if (wide) {
      if (i + 1 >= count)
        throw ClassFileError(ErrorKind::BadPoolRef, offsets[i],
                             "8-byte constant at index " + std::to_string(i) + " has no second slot");
      ++i;
    }
  }
  for (std::uint32_t i = 1; i < count; ++i)
    if (pool.slots[i]) check_entry_refs(pool, i, offsets[i]);
  return pool;
}

std::vector<Attribute> parse_attributes(Reader& in, const ConstantPool& pool, std::uint16_t major);

CodeAttribute parse_code(std::span<const std::uint8_t> info, std::size_t base, const ConstantPool& pool,
                         std::uint16_t major) {
  Reader in(info, base);
  CodeAttribute code;
  code.max_stack = in.u2();
  code.max_locals = in.u2();
  const std::uint32_t length = in.u4();
  const std::size_t code_base = in.file_offset();
  const auto bytes = in.bytes(length);
  code.code.assign(bytes.begin(), bytes.end());
  for (const auto& ins : decode_code(bytes, code_base)) {
    if (ins.kind() == OperandKind::PoolNarrow || ins.kind() == OperandKind::Pool ||
        ins.kind() == OperandKind::InvokeInterface || ins.kind() == OperandKind::InvokeDynamic ||
        ins.kind() == OperandKind::MultiANewArray)
      pool.expect(ins.pool_index, instruction_pool_tags(ins.opcode, major), code_base + ins.offset + 1);
  }
  const std::uint16_t handlers = in.u2();
  for (std::uint32_t i = 0; i < handlers; ++i) {
    ExceptionHandler h;
    h.start_pc = in.u2();
    h.end_pc = in.u2();
    h.handler_pc = in.u2();
    const std::size_t at = in.file_offset();
    h.catch_type = in.u2();
    if (h.catch_type != 0) pool.expect(h.catch_type, mask(Tag::Class), at);
    code.exception_table.push_back(h);
  }
  code.attributes = parse_attributes(in, pool, major);
  if (!in.at_end())
    throw ClassFileError(ErrorKind::TrailingBytes, in.file_offset(), "trailing bytes in Code attribute");
  return code;
}

std::vector<Attribute> parse_attributes(Reader& in, const ConstantPool& pool, std::uint16_t major) {
  std::vector<Attribute> attrs;
  const std::uint16_t count = in.u2();
  for (std::uint32_t i = 0; i < count; ++i) {
    Attribute a;
    const std::size_t at = in.file_offset();
    a.name_index = in.u2();
    const std::string& name = pool.expect(a.name_index, mask(Tag::Utf8), at).text;
    const std::uint32_t length = in.u4();
    const std::size_t info_base = in.file_offset();
    const auto info = in.bytes(length);
    if (name == "Code") {
      a.body = parse_code(info, info_base, pool, major);
    } else {
      check_pool_refs(pool, decode_attribute(name, info, info_base), info_base);
      a.body = std::vector<std::uint8_t>(info.begin(), info.end());
    }
    attrs.push_back(std::move(a));
  }
  return attrs;
}

std::vector<Member> parse_members(Reader& in, const ConstantPool& pool, std::uint16_t major) {
  std::vector<Member> members;
  const std::uint16_t count = in.u2();
  for (std::uint32_t i = 0; i < count; ++i) {
    Member m;
    m.access_flags = in.u2();
    std::size_t at = in.file_offset();
    m.name_index = in.u2();
    pool.expect(m.name_index, mask(Tag::Utf8), at);
    at = in.file_offset();
    m.descriptor_index = in.u2();
    pool.expect(m.descriptor_index, mask(Tag::Utf8), at);
    m.attributes = parse_attributes(in, pool, major);
    members.push_back(std::move(m));
  }
  return members;
}

void write_attributes(Writer& w, const std::vector<Attribute>& attrs);

void write_attribute(Writer& w, const Attribute& a) {
  w.u2(a.name_index);
  if (!a.is_code()) {
    w.u4(static_cast<std::uint32_t>(a.raw().size()));
    w.bytes(a.raw());
    return;
  }
  const CodeAttribute& c = a.code();
  Writer body;
  body.u2(c.max_stack);
  body.u2(c.max_locals);
  body.u4(static_cast<std::uint32_t>(c.code.size()));
  body.bytes(c.code);
  body.u2(static_cast<std::uint32_t>(c.exception_table.size()));
  for (const auto& h : c.exception_table) {
    body.u2(h.start_pc);
    body.u2(h.end_pc);
    body.u2(h.handler_pc);
    body.u2(h.catch_type);
  }
  write_attributes(body, c.attributes);
  w.u4(static_cast<std::uint32_t>(body.out.size()));
  w.bytes(body.out);
}

void write_attributes(Writer& w, const std::vector<Attribute>& attrs) {
  w.u2(static_cast<std::uint32_t>(attrs.size()));
  for (const auto& a : attrs) write_attribute(w, a);
}

void write_members(Writer& w, const std::vector<Member>& members) {
  w.u2(static_cast<std::uint32_t>(members.size()));
  for (const auto& m : members) {
    w.u2(m.access_flags);
    w.u2(m.name_index);
    w.u2(m.descriptor_index);
    write_attributes(w, m.attributes);
  }
}

}  // namespace

RawClassFile parse_class(std::span<const std::uint8_t> bytes, const ParseOptions& options) {
  Reader in(bytes);
  RawClassFile cls;
  cls.magic = in.u4();
  if (cls.magic != kMagic) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08X", cls.magic);
    throw ClassFileError(ErrorKind::BadMagic, 0, std::string("magic is ") + buf + ", expected 0xCAFEBABE");
  }
  cls.minor_version = in.u2();
  cls.major_version = in.u2();
  if ((cls.major_version < kMinSupportedMajor || cls.major_version > kMaxSupportedMajor) && options.warn)
    options.warn("class file major version " + std::to_string(cls.major_version) +
                 " is outside 45..52; decoding best-effort");
  cls.constant_pool = parse_pool(in);
  const ConstantPool& pool = cls.constant_pool;
  cls.access_flags = in.u2();
  std::size_t at = in.file_offset();
  cls.this_class = in.u2();
  pool.expect(cls.this_class, mask(Tag::Class), at);
  at = in.file_offset();
  cls.super_class = in.u2();
  if (cls.super_class != 0) pool.expect(cls.super_class, mask(Tag::Class), at);
  const std::uint16_t interfaces = in.u2();
  for (std::uint32_t i = 0; i < interfaces; ++i) {
    at = in.file_offset();
    const auto idx = in.u2();
    pool.expect(idx, mask(Tag::Class), at);
    cls.interfaces.push_back(idx);
  }
  cls.fields = parse_members(in, pool, cls.major_version);
  cls.methods = parse_members(in, pool, cls.major_version);
  cls.attributes = parse_attributes(in, pool, cls.major_version);
  if (!in.at_end())
    throw ClassFileError(ErrorKind::TrailingBytes, in.file_offset(),
                         std::to_string(in.remaining()) + " byte(s) after the last class attribute");
  return cls;
}

std::vector<std::uint8_t> serialize_class(const RawClassFile& cls) {
  Writer w;
  w.u4(cls.magic);
  w.u2(cls.minor_version);
  w.u2(cls.major_version);
  const auto& slots = cls.constant_pool.slots;
  w.u2(static_cast<std::uint32_t>(slots.size()));
  for (std::size_t i = 1; i < slots.size(); ++i) {
    if (!slots[i])
      throw ClassFileError(ErrorKind::InconsistentPool, w.out.size(),
                           "constant pool slot " + std::to_string(i) + " is empty but not shadowed by an 8-byte entry");
    const PoolEntry& e = *slots[i];
    w.u1(static_cast<std::uint32_t>(e.tag));
    switch (e.tag) {
      case Tag::Utf8:
        w.u2(static_cast<std::uint32_t>(e.text.size()));
        w.bytes(std::span(reinterpret_cast<const std::uint8_t*>(e.text.data()), e.text.size()));
        break;
      case Tag::Integer: case Tag::Float: w.u4(static_cast<std::uint32_t>(e.bits)); break;
      case Tag::Long: case Tag::Double:
        w.u4(static_cast<std::uint32_t>(e.bits >> 32));
        w.u4(static_cast<std::uint32_t>(e.bits));
        if (i + 1 >= slots.size() || slots[i + 1])
          throw ClassFileError(ErrorKind::InconsistentPool, w.out.size(),
                               "8-byte constant at slot " + std::to_string(i) + " is not followed by an empty slot");
        ++i;
        break;
      case Tag::Class: case Tag::String: case Tag::MethodType: case Tag::Module: case Tag::Package:
        w.u2(e.ref1);
        break;
      case Tag::MethodHandle:
        w.u1(e.ref_kind);
        w.u2(e.ref1);
        break;
      default:
        w.u2(e.ref1);
        w.u2(e.ref2);
        break;
    }
  }
  w.u2(cls.access_flags);
  w.u2(cls.this_class);
  w.u2(cls.super_class);
  w.u2(static_cast<std::uint32_t>(cls.interfaces.size()));
  for (auto i : cls.interfaces) w.u2(i);
  write_members(w, cls.fields);
  write_members(w, cls.methods);
  write_attributes(w, cls.attributes);

  // Every reference must resolve; re-decoding is the authoritative check.
  try {
    parse_class(w.out);
  } catch (const ClassFileError& e) {
    if (e.kind() == ErrorKind::BadPoolRef)
      throw ClassFileError(ErrorKind::InconsistentPool, e.offset(), e.what());
    throw;
  }
  return std::move(w.out);
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

RawClassFile read_class_file(const std::string& path) { return parse_class(read_bytes(path)); }

// ---------------------------------------------------------------------------
// Permutation

PoolPermutation identity_permutation(const ConstantPool& pool) {
  PoolPermutation p(pool.count());
  std::iota(p.begin(), p.end(), std::uint16_t{0});
  return p;
}

namespace {

struct PoolUnit {
  std::uint16_t start;
  std::uint16_t width;
};

std::vector<PoolUnit> pool_units(const ConstantPool& pool) {
  std::vector<PoolUnit> units;
  for (std::uint32_t i = 1; i < pool.count(); ++i) {
    if (!pool.slots[i]) continue;
    const std::uint16_t width = pool.slots[i]->is_wide() ? 2 : 1;
    units.push_back({static_cast<std::uint16_t>(i), width});
    i += width - 1;
  }
  return units;
}

PoolPermutation assign_units(const ConstantPool& pool, const std::vector<PoolUnit>& order) {
  PoolPermutation p(pool.count(), 0);
  std::uint16_t next = 1;
  for (const auto& u : order)
    for (std::uint16_t k = 0; k < u.width; ++k) p[u.start + k] = next++;
  return p;
}

}  // namespace

PoolPermutation reversal_permutation(const ConstantPool& pool) {
  auto units = pool_units(pool);
  std::reverse(units.begin(), units.end());
  return assign_units(pool, units);
}

PoolPermutation random_permutation(const ConstantPool& pool, std::mt19937_64& rng) {
  auto units = pool_units(pool);
  std::shuffle(units.begin(), units.end(), rng);
  return assign_units(pool, units);
}

void validate_permutation(const ConstantPool& pool, std::span<const std::uint16_t> perm) {
  auto fail = [](const std::string& why) { throw ClassFileError(ErrorKind::InvalidPermutation, 0, why); };
  if (perm.size() != pool.count())
    fail("permutation has " + std::to_string(perm.size()) + " entries, pool count is " +
         std::to_string(pool.count()));
  if (!perm.empty() && perm[0] != 0) fail("slot 0 must map to itself");
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] >= perm.size() || seen[perm[i]]) fail("permutation is not a bijection at index " + std::to_string(i));
    seen[perm[i]] = true;
  }
  for (std::size_t i = 1; i < pool.count(); ++i)
    if (pool.slots[i] && pool.slots[i]->is_wide() && perm[i + 1] != perm[i] + 1)
      fail("8-byte constant at index " + std::to_string(i) + " would be split");
}

namespace {

class Permuter {
 public:
  Permuter(const RawClassFile& source, std::span<const std::uint16_t> perm) : src_(source), perm_(perm) {}

  RawClassFile run() {
    RawClassFile out = src_;
    const ConstantPool& old_pool = src_.constant_pool;
    out.constant_pool.slots.assign(old_pool.count(), std::nullopt);
    for (std::size_t i = 1; i < old_pool.count(); ++i) {
      if (!old_pool.slots[i]) continue;
      PoolEntry e = *old_pool.slots[i];
      switch (e.tag) {
        case Tag::Utf8: case Tag::Integer: case Tag::Float: case Tag::Long: case Tag::Double: break;
        case Tag::Dynamic:
        case Tag::InvokeDynamic:
          e.ref2 = map(e.ref2);  // ref1 indexes BootstrapMethods, not the pool
          break;
        default:
          e.ref1 = map(e.ref1);
          if (e.ref2 != 0) e.ref2 = map(e.ref2);
      }
      out.constant_pool.slots[perm_[i]] = std::move(e);
    }
    out.this_class = map(out.this_class);
    if (out.super_class != 0) out.super_class = map(out.super_class);
    for (auto& i : out.interfaces) i = map(i);
    for (auto& m : out.fields) member(m);
    for (auto& m : out.methods) member(m);
    attributes(out.attributes);
    return out;
  }

 private:
  std::uint16_t map(std::uint32_t old) const { return perm_[old]; }

  void member(Member& m) {
    m.name_index = map(m.name_index);
    m.descriptor_index = map(m.descriptor_index);
    attributes(m.attributes);
  }

  void attributes(std::vector<Attribute>& attrs) {
    for (auto& a : attrs) {
      const std::string& name = src_.constant_pool.utf8(a.name_index);
      a.name_index = map(a.name_index);
      if (a.is_code()) {
        code(a.code());
      } else {
        raw_attribute(name, a.raw());
      }
    }
  }

  void raw_attribute(const std::string& name, std::vector<std::uint8_t>& info) {
    const auto decoded = decode_attribute(name, info);
    for (const auto& f : decoded.fields)
      if (f.role == FieldRole::PoolRef && !(f.nullable && f.value == 0)) detail::put_u2(info, f.pos, map(f.value));
  }

  void code(CodeAttribute& c) {
    auto instrs = decode_code(c.code);
    bool relocate = false;
    for (auto& ins : instrs) {
      switch (ins.kind()) {
        case OperandKind::PoolNarrow:
        case OperandKind::Pool:
        case OperandKind::InvokeInterface:
        case OperandKind::InvokeDynamic:
        case OperandKind::MultiANewArray:
          ins.pool_index = map(ins.pool_index);
          if (ins.kind() == OperandKind::PoolNarrow) {
            if (ins.pool_index > 0xff) relocate = true;
            else c.code[ins.offset + 1] = static_cast<std::uint8_t>(ins.pool_index);
          } else {
            detail::put_u2(c.code, ins.offset + 1, ins.pool_index);
          }
          break;
        default:
          break;
      }
    }
    for (auto& h : c.exception_table)
      if (h.catch_type != 0) h.catch_type = map(h.catch_type);

    std::vector<std::uint32_t> remap;  // old offset -> new offset (identity unless relocating)
    if (relocate) {
      std::vector<std::size_t> index_of(c.code.size() + 1, 0);
      for (std::size_t i = 0; i < instrs.size(); ++i) index_of[instrs[i].offset] = i;
      index_of[c.code.size()] = instrs.size();
      const auto old_offsets = [&] {
        std::vector<std::uint32_t> o;
        for (const auto& ins : instrs) o.push_back(ins.offset);
        o.push_back(static_cast<std::uint32_t>(c.code.size()));
        return o;
      }();
      for (auto& ins : instrs)
        for (auto& t : ins.targets) t = static_cast<std::int64_t>(index_of[static_cast<std::size_t>(t)]);
      std::vector<std::uint32_t> new_offsets;
      c.code = encode_code(instrs, new_offsets);
      remap.assign(old_offsets.back() + 1, 0);
      for (std::size_t i = 0; i < old_offsets.size(); ++i) remap[old_offsets[i]] = new_offsets[i];
      for (auto& h : c.exception_table) {
        h.start_pc = static_cast<std::uint16_t>(remap[h.start_pc]);
        h.end_pc = static_cast<std::uint16_t>(remap[h.end_pc]);
        h.handler_pc = static_cast<std::uint16_t>(remap[h.handler_pc]);
      }
    }

    for (auto& a : c.attributes) {
      const std::string& name = src_.constant_pool.utf8(a.name_index);
      a.name_index = map(a.name_index);
      auto& info = a.raw();
      if (relocate && name == "StackMapTable") {
        auto frames = decode_stack_map(info);
        for (auto& f : frames) {
          f.offset = remap.at(f.offset);
          for (auto* list : {&f.locals, &f.stack})
            for (auto& v : *list) {
              if (v.tag == 7) v.data = map(v.data);
              else if (v.tag == 8) v.data = static_cast<std::uint16_t>(remap.at(v.data));
            }
        }
        info = encode_stack_map(frames);
        continue;
      }
      const auto decoded = decode_attribute(name, info);
      raw_attribute(name, info);
      if (!relocate) continue;
      std::uint32_t range_start = 0;
      for (const auto& f : decoded.fields) {
        if (f.role == FieldRole::Pc) {
          range_start = f.value;
          detail::put_u2(info, f.pos, static_cast<std::uint16_t>(remap.at(f.value)));
        } else if (f.role == FieldRole::PcLength) {
          const auto end = remap.at(range_start + f.value);
          detail::put_u2(info, f.pos, static_cast<std::uint16_t>(end - remap.at(range_start)));
        }
      }
    }
  }

  const RawClassFile& src_;
  std::span<const std::uint16_t> perm_;
};

}  // namespace

RawClassFile permute_constant_pool(const RawClassFile& cls, std::span<const std::uint16_t> perm) {
  validate_permutation(cls.constant_pool, perm);
  return Permuter(cls, perm).run();
}

}  // namespace dceval::classfile
