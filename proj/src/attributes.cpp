#include "dceval/attributes.hpp"

#include <array>
#include <functional>

#include "byte_io.hpp"

namespace dceval::classfile {

namespace {

constexpr TagMask kUtf8 = mask(Tag::Utf8);
constexpr TagMask kClass = mask(Tag::Class);

class FieldReader {
 public:
  FieldReader(std::span<const std::uint8_t> info, std::size_t base, DecodedAttribute& out)
      : in_(info, base), out_(out) {}

  std::uint32_t number(std::uint8_t width) {
    AttrField f{FieldRole::Number, static_cast<std::uint32_t>(in_.pos()), width, 0, 0, false};
    f.value = read(width);
    out_.fields.push_back(f);
    return f.value;
  }
  void pool(TagMask tags, bool nullable = false) {
    AttrField f{FieldRole::PoolRef, static_cast<std::uint32_t>(in_.pos()), 2, 0, tags, nullable};
    f.value = in_.u2();
    out_.fields.push_back(f);
  }
  void pc() { push(FieldRole::Pc, 2); }
  void pc_length() { push(FieldRole::PcLength, 2); }
  void frame_delta_explicit() { push(FieldRole::FrameDelta, 2); }
  void frame_delta_folded(std::uint32_t pos, std::uint32_t delta) {
    out_.fields.push_back(AttrField{FieldRole::FrameDelta, pos, 0, delta, 0, false});
  }
  void bytes_rest() {
    AttrField f{FieldRole::Bytes, static_cast<std::uint32_t>(in_.pos()), 0, 0, 0, false};
    f.value = static_cast<std::uint32_t>(in_.remaining());
    in_.bytes(in_.remaining());
    out_.fields.push_back(f);
  }
  std::uint32_t pos() const { return static_cast<std::uint32_t>(in_.pos()); }
  void finish() const {
    if (!in_.at_end())
      throw ClassFileError(ErrorKind::TrailingBytes, in_.file_offset(),
                           "attribute " + out_.name + " has " + std::to_string(in_.remaining()) +
                               " unexpected trailing byte(s)");
  }

  void element_value() {
    const auto tag = static_cast<char>(number(1));
    switch (tag) {
      case 'B': case 'C': case 'I': case 'S': case 'Z': pool(mask(Tag::Integer)); break;
      case 'D': pool(mask(Tag::Double)); break;
      case 'F': pool(mask(Tag::Float)); break;
      case 'J': pool(mask(Tag::Long)); break;
      case 's': pool(kUtf8); break;
      case 'e': pool(kUtf8); pool(kUtf8); break;
      case 'c': pool(kUtf8); break;
      case '@': annotation(); break;
      case '[': {
        const auto n = number(2);
        for (std::uint32_t i = 0; i < n; ++i) element_value();
        break;
      }
      default:
        throw ClassFileError(ErrorKind::BadInstruction, in_.file_offset() - 1,
                             std::string("unknown element_value tag '") + tag + "'");
    }
  }
  void annotation() {
    pool(kUtf8);
    const auto pairs = number(2);
    for (std::uint32_t i = 0; i < pairs; ++i) {
      pool(kUtf8);
      element_value();
    }
  }
  void type_annotation() {
    const auto target = number(1);
    switch (target) {
      case 0x00: case 0x01: number(1); break;
      case 0x10: number(2); break;
      case 0x11: case 0x12: number(1); number(1); break;
      case 0x13: case 0x14: case 0x15: break;
      case 0x16: number(1); break;
      case 0x17: number(2); break;
      case 0x40: case 0x41: {
        const auto n = number(2);
        for (std::uint32_t i = 0; i < n; ++i) {
          pc();
          pc_length();
          number(2);
        }
        break;
      }
      case 0x42: number(2); break;
      case 0x43: case 0x44: case 0x45: case 0x46: pc(); break;
      case 0x47: case 0x48: case 0x49: case 0x4A: case 0x4B: pc(); number(1); break;
      default:
        throw ClassFileError(ErrorKind::BadInstruction, in_.file_offset() - 1,
                             "unknown type annotation target " + std::to_string(target));
    }
    const auto path = number(1);
    for (std::uint32_t i = 0; i < path; ++i) {
      number(1);
      number(1);
    }
    annotation();
  }
  void verification_type() {
    const auto tag = number(1);
    if (tag == 7) {
      pool(kClass);
    } else if (tag == 8) {
      pc();
    } else if (tag > 8) {
      throw ClassFileError(ErrorKind::BadInstruction, in_.file_offset() - 1,
                           "unknown verification type " + std::to_string(tag));
    }
  }

 private:
  std::uint32_t read(std::uint8_t width) {
    switch (width) {
      case 1: return in_.u1();
      case 2: return in_.u2();
      default: return in_.u4();
    }
  }
  void push(FieldRole role, std::uint8_t width) {
    AttrField f{role, static_cast<std::uint32_t>(in_.pos()), width, 0, 0, false};
    f.value = read(width);
    out_.fields.push_back(f);
  }

  detail::Reader in_;
  DecodedAttribute& out_;
};

using Layout = std::function<void(FieldReader&)>;

void stack_map_layout(FieldReader& r) {
  const auto n = r.number(2);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto type_pos = r.pos();
    const auto type = r.number(1);
    if (type <= 63) {
      r.frame_delta_folded(type_pos, type);
    } else if (type <= 127) {
      r.frame_delta_folded(type_pos, type - 64);
      r.verification_type();
    } else if (type < 247) {
      throw ClassFileError(ErrorKind::BadInstruction, type_pos, "reserved stack map frame type");
    } else if (type == 247) {
      r.frame_delta_explicit();
      r.verification_type();
    } else if (type <= 251) {
      r.frame_delta_explicit();
    } else if (type <= 254) {
      r.frame_delta_explicit();
      for (std::uint32_t k = 0; k < type - 251; ++k) r.verification_type();
    } else {
      r.frame_delta_explicit();
      const auto locals = r.number(2);
      for (std::uint32_t k = 0; k < locals; ++k) r.verification_type();
      const auto stack = r.number(2);
      for (std::uint32_t k = 0; k < stack; ++k) r.verification_type();
    }
  }
}

void local_variable_layout(FieldReader& r) {
  const auto n = r.number(2);
  for (std::uint32_t i = 0; i < n; ++i) {
    r.pc();
    r.pc_length();
    r.pool(kUtf8);
    r.pool(kUtf8);
    r.number(2);
  }
}

const std::vector<std::pair<std::string_view, Layout>>& layouts() {
  static const std::vector<std::pair<std::string_view, Layout>> table = {
      {"ConstantValue",
       [](FieldReader& r) { r.pool(Tag::Integer | Tag::Float | Tag::Long | Tag::Double | Tag::String); }},
      {"StackMapTable", stack_map_layout},
      {"Exceptions",
       [](FieldReader& r) {
         const auto n = r.number(2);
         for (std::uint32_t i = 0; i < n; ++i) r.pool(kClass);
       }},
      {"InnerClasses",
       [](FieldReader& r) {
         const auto n = r.number(2);
         for (std::uint32_t i = 0; i < n; ++i) {
           r.pool(kClass);
           r.pool(kClass, true);
           r.pool(kUtf8, true);
           r.number(2);
         }
       }},
      {"EnclosingMethod",
       [](FieldReader& r) {
         r.pool(kClass);
         r.pool(mask(Tag::NameAndType), true);
       }},
      {"Synthetic", [](FieldReader&) {}},
      {"Deprecated", [](FieldReader&) {}},
      {"Signature", [](FieldReader& r) { r.pool(kUtf8); }},
      {"SourceFile", [](FieldReader& r) { r.pool(kUtf8); }},
      {"SourceDebugExtension", [](FieldReader& r) { r.bytes_rest(); }},
      {"LineNumberTable",
       [](FieldReader& r) {
         const auto n = r.number(2);
         for (std::uint32_t i = 0; i < n; ++i) {
           r.pc();
           r.number(2);
         }
       }},
      {"LocalVariableTable", local_variable_layout},
      {"LocalVariableTypeTable", local_variable_layout},
      {"RuntimeVisibleAnnotations",
       [](FieldReader& r) {
         const auto n = r.number(2);
         for (std::uint32_t i = 0; i < n; ++i) r.annotation();
       }},
      {"RuntimeInvisibleAnnotations",
       [](FieldReader& r) {
         const auto n = r.number(2);
         for (std::uint32_t i = 0; i < n; ++i) r.annotation();
       }},
      {"RuntimeVisibleParameterAnnotations",
       [](FieldReader& r) {
         const auto params = r.number(1);
         for (std::uint32_t p = 0; p < params; ++p) {
           const auto n = r.number(2);
           for (std::uint32_t i = 0; i < n; ++i) r.annotation();
         }
       }},
      {"RuntimeInvisibleParameterAnnotations",
       [](FieldReader& r) {
         const auto params = r.number(1);
         for (std::uint32_t p = 0; p < params; ++p) {
           const auto n = r.number(2);
           for (std::uint32_t i = 0; i < n; ++i) r.annotation();
         }
       }},
      {"RuntimeVisibleTypeAnnotations",
       [](FieldReader& r) {
         const auto n = r.number(2);
         for (std::uint32_t i = 0; i < n; ++i) r.type_annotation();
       }},
      {"RuntimeInvisibleTypeAnnotations",
       [](FieldReader& r) {
         const auto n = r.number(2);
         for (std::uint32_t i = 0; i < n; ++i) r.type_annotation();
       }},
      {"AnnotationDefault", [](FieldReader& r) { r.element_value(); }},
      {"BootstrapMethods",
       [](FieldReader& r) {
         const auto n = r.number(2);
         for (std::uint32_t i = 0; i < n; ++i) {
           r.pool(mask(Tag::MethodHandle));
           const auto args = r.number(2);
           for (std::uint32_t a = 0; a < args; ++a) r.pool(kAnyLoadable);
         }
       }},
      {"MethodParameters",
       [](FieldReader& r) {
         const auto n = r.number(1);
         for (std::uint32_t i = 0; i < n; ++i) {
           r.pool(kUtf8, true);
           r.number(2);
         }
       }},
  };
  return table;
}

const Layout* find_layout(std::string_view name) {
  for (const auto& [n, layout] : layouts())
    if (n == name) return &layout;
  return nullptr;
}

}  // namespace

bool is_known_attribute(std::string_view name) { return name == "Code" || find_layout(name) != nullptr; }

DecodedAttribute decode_attribute(std::string_view name, std::span<const std::uint8_t> info,
                                  std::size_t base_offset) {
  DecodedAttribute out;
  out.name = std::string(name);
  const Layout* layout = find_layout(name);
  if (layout == nullptr) return out;
  out.known = true;
  FieldReader reader(info, base_offset, out);
  (*layout)(reader);
  reader.finish();
  return out;
}

void check_pool_refs(const ConstantPool& pool, const DecodedAttribute& attr, std::size_t base_offset) {
  for (const auto& f : attr.fields) {
    if (f.role != FieldRole::PoolRef) continue;
    if (f.nullable && f.value == 0) continue;
    pool.expect(f.value, f.tags, base_offset + f.pos);
  }
}

std::vector<StackMapFrame> decode_stack_map(std::span<const std::uint8_t> info, std::size_t base_offset) {
  detail::Reader in(info, base_offset);
  auto vtype = [&in]() {
    VerificationType v;
    v.tag = in.u1();
    if (v.tag == 7 || v.tag == 8) v.data = in.u2();
    return v;
  };
  std::vector<StackMapFrame> frames;
  const auto n = in.u2();
  std::int64_t previous = -1;
  for (std::uint32_t i = 0; i < n; ++i) {
    StackMapFrame f;
    f.frame_type = in.u1();
    std::uint32_t delta = 0;
    const auto t = f.frame_type;
    if (t <= 63) {
      delta = t;
    } else if (t <= 127) {
      delta = t - 64u;
      f.stack.push_back(vtype());
    } else if (t == 247) {
      delta = in.u2();
      f.stack.push_back(vtype());
    } else if (t >= 248 && t <= 251) {
      delta = in.u2();
    } else if (t >= 252 && t <= 254) {
      delta = in.u2();
      for (int k = 0; k < t - 251; ++k) f.locals.push_back(vtype());
    } else if (t == 255) {
      delta = in.u2();
      const auto nl = in.u2();
      for (std::uint32_t k = 0; k < nl; ++k) f.locals.push_back(vtype());
      const auto ns = in.u2();
      for (std::uint32_t k = 0; k < ns; ++k) f.stack.push_back(vtype());
    } else {
      throw ClassFileError(ErrorKind::BadInstruction, in.file_offset() - 1, "reserved stack map frame type");
    }
    f.offset = static_cast<std::uint32_t>(previous < 0 ? delta : previous + delta + 1);
    previous = f.offset;
    frames.push_back(std::move(f));
  }
  if (!in.at_end())
    throw ClassFileError(ErrorKind::TrailingBytes, in.file_offset(), "trailing bytes in StackMapTable");
  return frames;
}

std::vector<std::uint8_t> encode_stack_map(const std::vector<StackMapFrame>& frames) {
  detail::Writer w;
  auto vtype = [&w](const VerificationType& v) {
    w.u1(v.tag);
    if (v.tag == 7 || v.tag == 8) w.u2(v.data);
  };
  w.u2(static_cast<std::uint32_t>(frames.size()));
  std::int64_t previous = -1;
  for (const auto& f : frames) {
    const auto delta = static_cast<std::uint32_t>(previous < 0 ? f.offset : f.offset - previous - 1);
    previous = f.offset;
    const auto t = f.frame_type;
    if (t <= 63) {
      if (delta <= 63) {
        w.u1(delta);
      } else {
        w.u1(251);
        w.u2(delta);
      }
    } else if (t <= 127 || t == 247) {
      if (t != 247 && delta <= 63) {
        w.u1(64 + delta);
      } else {
        w.u1(247);
        w.u2(delta);
      }
      vtype(f.stack.at(0));
    } else if (t >= 248 && t <= 254) {
      w.u1(t);
      w.u2(delta);
      for (const auto& v : f.locals) vtype(v);
    } else {
      w.u1(255);
      w.u2(delta);
      w.u2(static_cast<std::uint32_t>(f.locals.size()));
      for (const auto& v : f.locals) vtype(v);
      w.u2(static_cast<std::uint32_t>(f.stack.size()));
      for (const auto& v : f.stack) vtype(v);
    }
  }
  return std::move(w.out);
}

}  // namespace dceval::classfile
