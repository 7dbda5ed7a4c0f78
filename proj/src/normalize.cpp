#include "dceval/normalize.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>

#include "dceval/attributes.hpp"
#include "dceval/bytecode.hpp"

namespace dceval::classfile {

AttributeIgnoreSet default_ignore_set() {
  return {"SourceFile", "LineNumberTable", "LocalVariableTable", "LocalVariableTypeTable", "StackMapTable"};
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20 || c == 0x7f) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\x%02x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out + "\"";
}

std::string hex(std::uint64_t v, int digits) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%0*llx", digits, static_cast<unsigned long long>(v));
  return buf;
}

std::string hex_bytes(std::span<const std::uint8_t> b) {
  std::string out;
  char buf[4];
  for (auto c : b) {
    std::snprintf(buf, sizeof buf, "%02x", c);
    out += buf;
  }
  return out;
}

std::string member_ref(const ConstantPool& pool, const PoolEntry& e) {
  const PoolEntry& nat = pool.at(e.ref2);
  return pool.class_name(e.ref1) + "." + pool.utf8(nat.ref1) + ":" + pool.utf8(nat.ref2);
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// Maps byte offsets inside one method to instruction ordinals.
class Ordinals {
 public:
  Ordinals() = default;
  explicit Ordinals(const std::vector<Instruction>& instrs, std::size_t code_length) {
    for (std::size_t i = 0; i < instrs.size(); ++i) map_[instrs[i].offset] = i;
    map_[static_cast<std::uint32_t>(code_length)] = instrs.size();
  }
  std::string at(std::int64_t offset) const {
    const auto it = map_.find(static_cast<std::uint32_t>(offset));
    if (it == map_.end()) return "@?" + std::to_string(offset);
    return "@" + std::to_string(it->second);
  }

 private:
  std::map<std::uint32_t, std::size_t> map_;
};

std::string render_instruction(const ConstantPool& pool, const Instruction& ins, const Ordinals& ord) {
  std::string_view mnemonic = opcode_info(ins.opcode).mnemonic;
  if (ins.opcode == op::ldc_w) mnemonic = "ldc";
  if (ins.opcode == op::goto_w) mnemonic = "goto";
  if (ins.opcode == op::jsr_w) mnemonic = "jsr";
  std::string out = upper(mnemonic);
  switch (ins.kind()) {
    case OperandKind::None:
    case OperandKind::Wide:
      break;
    case OperandKind::Local:
      out += " " + std::to_string(ins.local);
      break;
    case OperandKind::Byte:
    case OperandKind::Short:
    case OperandKind::NewArray:
      out += " " + std::to_string(ins.immediate);
      break;
    case OperandKind::PoolNarrow:
    case OperandKind::Pool:
    case OperandKind::InvokeDynamic:
      out += " " + render_constant(pool, ins.pool_index);
      break;
    case OperandKind::InvokeInterface:
    case OperandKind::MultiANewArray:
      out += " " + render_constant(pool, ins.pool_index) + " " + std::to_string(ins.immediate);
      break;
    case OperandKind::Branch:
    case OperandKind::BranchWide:
      out += " " + ord.at(ins.targets[0]);
      break;
    case OperandKind::Iinc:
      out += " " + std::to_string(ins.local) + " " + std::to_string(ins.immediate);
      break;
    case OperandKind::TableSwitch:
      out += " " + std::to_string(ins.low) + ".." + std::to_string(ins.high) + " default " + ord.at(ins.targets[0]) +
             " [";
      for (std::size_t k = 1; k < ins.targets.size(); ++k) out += (k > 1 ? " " : "") + ord.at(ins.targets[k]);
      out += "]";
      break;
    case OperandKind::LookupSwitch:
      out += " default " + ord.at(ins.targets[0]) + " [";
      for (std::size_t k = 0; k < ins.keys.size(); ++k)
        out += (k > 0 ? " " : "") + std::to_string(ins.keys[k]) + ":" + ord.at(ins.targets[k + 1]);
      out += "]";
      break;
  }
  return out;
}

std::string render_fields(const ConstantPool& pool, const DecodedAttribute& attr, std::span<const std::uint8_t> info,
                          const Ordinals* ord) {
  std::string out;
  std::int64_t range_start = 0;
  std::int64_t frame_offset = -1;
  auto add = [&out](const std::string& s) {
    if (!out.empty()) out += ' ';
    out += s;
  };
  for (const auto& f : attr.fields) {
    switch (f.role) {
      case FieldRole::Number:
        add(std::to_string(f.value));
        break;
      case FieldRole::PoolRef:
        add(f.value == 0 ? std::string("-") : render_constant(pool, f.value));
        break;
      case FieldRole::Pc:
        range_start = f.value;
        add(ord ? ord->at(f.value) : "pc" + std::to_string(f.value));
        break;
      case FieldRole::PcLength:
        add("to " + (ord ? ord->at(range_start + f.value) : "pc" + std::to_string(range_start + f.value)));
        break;
      case FieldRole::FrameDelta:
        frame_offset = frame_offset < 0 ? f.value : frame_offset + f.value + 1;
        add("frame " + (ord ? ord->at(frame_offset) : "pc" + std::to_string(frame_offset)));
        break;
      case FieldRole::Bytes:
        add(hex_bytes(info.subspan(f.pos, f.value)));
        break;
    }
  }
  return out;
}

NormalizedAttribute normalize_attribute(const ConstantPool& pool, const std::string& name,
                                        std::span<const std::uint8_t> info, const Ordinals* ord,
                                        const std::string& prefix) {
  NormalizedAttribute a;
  a.name = prefix + name;
  const DecodedAttribute decoded = decode_attribute(name, info);
  if (!decoded.known) {
    a.rendering = "raw " + hex_bytes(info);
  } else {
    a.rendering = render_fields(pool, decoded, info, ord);
  }
  return a;
}

NormalizedMember normalize_member(const ConstantPool& pool, const Member& m, const AttributeIgnoreSet& ignore) {
  NormalizedMember out;
  out.name = pool.utf8(m.name_index);
  out.descriptor = pool.utf8(m.descriptor_index);
  out.access_flags = m.access_flags;
  for (const auto& a : m.attributes) {
    const std::string& name = pool.utf8(a.name_index);
    if (ignore.contains(name)) continue;
    if (!a.is_code()) {
      out.attributes.push_back(normalize_attribute(pool, name, a.raw(), nullptr, ""));
      continue;
    }
    const CodeAttribute& c = a.code();
    const auto instrs = decode_code(c.code);
    const Ordinals ord(instrs, c.code.size());
    out.has_code = true;
    out.frame = "stack=" + std::to_string(c.max_stack) + " locals=" + std::to_string(c.max_locals);
    for (const auto& ins : instrs) out.code.push_back(render_instruction(pool, ins, ord));
    for (const auto& h : c.exception_table)
      out.handlers.push_back("[" + ord.at(h.start_pc) + "," + ord.at(h.end_pc) + ") -> " + ord.at(h.handler_pc) +
                             " catch " + (h.catch_type == 0 ? std::string("any") : pool.class_name(h.catch_type)));
    for (const auto& sub : c.attributes) {
      const std::string& sub_name = pool.utf8(sub.name_index);
      if (ignore.contains(sub_name)) continue;
      out.attributes.push_back(normalize_attribute(pool, sub_name, sub.raw(), &ord, "Code."));
    }
  }
  std::sort(out.attributes.begin(), out.attributes.end());
  return out;
}

bool member_less(const NormalizedMember& a, const NormalizedMember& b) {
  return std::tie(a.name, a.descriptor) < std::tie(b.name, b.descriptor);
}

}  // namespace

std::string render_constant(const ConstantPool& pool, std::uint32_t index) {
  const PoolEntry& e = pool.at(index);
  switch (e.tag) {
    case Tag::Utf8: return quote(e.text);
    case Tag::Integer: return "int:" + std::to_string(static_cast<std::int32_t>(e.bits));
    case Tag::Float: return "float:" + hex(e.bits & 0xffffffffu, 8);
    case Tag::Long: return "long:" + std::to_string(static_cast<std::int64_t>(e.bits));
    case Tag::Double: return "double:" + hex(e.bits, 16);
    case Tag::Class: return pool.utf8(e.ref1);
    case Tag::String: return quote(pool.utf8(e.ref1));
    case Tag::Fieldref:
    case Tag::Methodref: return member_ref(pool, e);
    case Tag::InterfaceMethodref: return member_ref(pool, e) + " (itf)";
    case Tag::NameAndType: return pool.utf8(e.ref1) + ":" + pool.utf8(e.ref2);
    case Tag::MethodHandle: return "handle:" + std::to_string(e.ref_kind) + " " + render_constant(pool, e.ref1);
    case Tag::MethodType: return "methodtype:" + pool.utf8(e.ref1);
    case Tag::Dynamic: return "condy:#" + std::to_string(e.ref1) + " " + render_constant(pool, e.ref2);
    case Tag::InvokeDynamic: return "indy:#" + std::to_string(e.ref1) + " " + render_constant(pool, e.ref2);
    case Tag::Module: return "module:" + pool.utf8(e.ref1);
    case Tag::Package: return "package:" + pool.utf8(e.ref1);
  }
  return "?";
}

NormalizedClass normalize(const RawClassFile& cls, const AttributeIgnoreSet& ignore) {
  const ConstantPool& pool = cls.constant_pool;
  NormalizedClass out;
  out.major_version = cls.major_version;
  out.minor_version = cls.minor_version;
  out.name = pool.class_name(cls.this_class);
  out.super_name = cls.super_class == 0 ? std::string() : pool.class_name(cls.super_class);
  out.access_flags = cls.access_flags;
  for (auto i : cls.interfaces) out.interfaces.push_back(pool.class_name(i));
  for (const auto& f : cls.fields) out.fields.push_back(normalize_member(pool, f, ignore));
  for (const auto& m : cls.methods) out.methods.push_back(normalize_member(pool, m, ignore));
  std::stable_sort(out.fields.begin(), out.fields.end(), member_less);
  std::stable_sort(out.methods.begin(), out.methods.end(), member_less);
  for (const auto& a : cls.attributes) {
    const std::string& name = pool.utf8(a.name_index);
    if (ignore.contains(name)) continue;
    out.attributes.push_back(normalize_attribute(pool, name, a.raw(), nullptr, ""));
  }
  std::sort(out.attributes.begin(), out.attributes.end());
  return out;
}

// ---------------------------------------------------------------------------
// Strict equivalence

namespace {

std::string join(const std::vector<std::string>& lines, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (!out.empty()) out += "; ";
    out += lines[i];
  }
  return out;
}

std::string flags(std::uint16_t f) { return hex(f, 4); }

std::string render_attributes(const std::vector<NormalizedAttribute>& attrs) {
  std::string out;
  for (const auto& a : attrs) {
    if (!out.empty()) out += "\n";
    out += a.name + ": " + a.rendering;
  }
  return out;
}

// Hunks of an LCS alignment between two instruction streams.
struct Hunk {
  std::size_t a_begin, a_end, b_begin, b_end;
};

std::vector<Hunk> diff_hunks(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<Hunk> hunks;
  const std::size_t n = a.size(), m = b.size();
  if (n * m > 16'000'000) {
    std::size_t i = 0;
    while (i < n && i < m && a[i] == b[i]) ++i;
    if (i < n || i < m) hunks.push_back({i, n, i, m});
    return hunks;
  }
  std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      ++i;
      ++j;
      continue;
    }
    Hunk h{i, i, j, j};
    while ((i < n || j < m) && !(i < n && j < m && a[i] == b[j])) {
      if (j >= m || (i < n && lcs[i + 1][j] >= lcs[i][j + 1])) ++i;
      else ++j;
    }
    h.a_end = i;
    h.b_end = j;
    hunks.push_back(h);
  }
  return hunks;
}

void compare_member(const std::string& kind, const NormalizedMember& a, const NormalizedMember& b,
                    std::size_t max_hunks, std::vector<Difference>& out) {
  const std::string where = kind + " " + a.name + a.descriptor;
  if (a.access_flags != b.access_flags)
    out.push_back({where, "access-flags", flags(a.access_flags), flags(b.access_flags)});
  if (a.has_code != b.has_code)
    out.push_back({where, "code-presence", a.has_code ? "code" : "no code", b.has_code ? "code" : "no code"});
  std::size_t emitted = 0;
  for (const auto& h : diff_hunks(a.code, b.code)) {
    if (emitted++ == max_hunks) break;
    out.push_back({where + " @" + std::to_string(h.a_begin), "instruction", join(a.code, h.a_begin, h.a_end),
                   join(b.code, h.b_begin, h.b_end)});
  }
  if (a.handlers != b.handlers)
    out.push_back({where, "exception-table", join(a.handlers, 0, a.handlers.size()),
                   join(b.handlers, 0, b.handlers.size())});
  if (a.frame != b.frame) out.push_back({where, "frame-size", a.frame, b.frame});
  if (a.attributes != b.attributes)
    out.push_back({where, "attributes", render_attributes(a.attributes), render_attributes(b.attributes)});
}

void compare_members(const std::string& kind, const std::vector<NormalizedMember>& a,
                     const std::vector<NormalizedMember>& b, std::size_t max_hunks, std::vector<Difference>& out) {
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size() || (i < a.size() && member_less(a[i], b[j]))) {
      out.push_back({kind + " " + a[i].name + a[i].descriptor, "missing-member", "present", "absent"});
      ++i;
    } else if (i >= a.size() || member_less(b[j], a[i])) {
      out.push_back({kind + " " + b[j].name + b[j].descriptor, "extra-member", "absent", "present"});
      ++j;
    } else {
      compare_member(kind, a[i], b[j], max_hunks, out);
      ++i;
      ++j;
    }
  }
}

}  // namespace

EquivalenceReport strict_equivalence(const NormalizedClass& a, const NormalizedClass& b, std::size_t max_hunks) {
  EquivalenceReport r;
  auto& d = r.differences;
  if (a.name != b.name) d.push_back({"class", "name", a.name, b.name});
  if (a.major_version != b.major_version || a.minor_version != b.minor_version)
    d.push_back({"class", "version", std::to_string(a.major_version) + "." + std::to_string(a.minor_version),
                 std::to_string(b.major_version) + "." + std::to_string(b.minor_version)});
  if (a.access_flags != b.access_flags) d.push_back({"class", "access-flags", flags(a.access_flags), flags(b.access_flags)});
  if (a.super_name != b.super_name) d.push_back({"class", "superclass", a.super_name, b.super_name});
  if (a.interfaces != b.interfaces)
    d.push_back({"class", "interfaces", join(a.interfaces, 0, a.interfaces.size()),
                 join(b.interfaces, 0, b.interfaces.size())});
  if (a.attributes != b.attributes)
    d.push_back({"class", "attributes", render_attributes(a.attributes), render_attributes(b.attributes)});
  compare_members("field", a.fields, b.fields, max_hunks, d);
  compare_members("method", a.methods, b.methods, max_hunks, d);
  r.equal = d.empty();
  return r;
}

std::string EquivalenceReport::to_text() const {
  if (equal) return "strictly equivalent\n";
  std::ostringstream os;
  os << differences.size() << " difference(s)\n";
  for (const auto& d : differences) {
    os << "  " << d.location << " [" << d.kind << "]\n";
    os << "    - " << d.original << "\n";
    os << "    + " << d.recompiled << "\n";
  }
  return os.str();
}

void to_json(nlohmann::json& j, const Difference& d) {
  j = nlohmann::json{{"location", d.location}, {"kind", d.kind}, {"original", d.original}, {"recompiled", d.recompiled}};
}

void from_json(const nlohmann::json& j, Difference& d) {
  j.at("location").get_to(d.location);
  j.at("kind").get_to(d.kind);
  j.at("original").get_to(d.original);
  j.at("recompiled").get_to(d.recompiled);
}

void to_json(nlohmann::json& j, const EquivalenceReport& r) {
  j = nlohmann::json{{"equal", r.equal}, {"differences", r.differences}};
}

void from_json(const nlohmann::json& j, EquivalenceReport& r) {
  j.at("equal").get_to(r.equal);
  j.at("differences").get_to(r.differences);
}

}  // namespace dceval::classfile
