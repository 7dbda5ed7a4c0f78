#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "dceval/bytecode.hpp"
#include "dceval/classfile.hpp"
#include "dceval/normalize.hpp"
#include "fixture_paths.hpp"

using namespace dceval::classfile;
using dceval::testing::committed_class_files;
using dceval::testing::fixtures_root;

namespace {

std::string utils_path() {
  return (fixtures_root() / "utils/classes-javac/org/apache/commons/codec/net/Utils.class").string();
}

const NormalizedMember* find_method(const NormalizedClass& c, const std::string& name, const std::string& desc) {
  for (const auto& m : c.methods)
    if (m.name == name && m.descriptor == desc) return &m;
  return nullptr;
}

// Resolves an entry to a string by walking raw references; independent of
// render_constant so it can serve as a multiset oracle across permutations.
std::string deep(const ConstantPool& pool, std::uint32_t i) {
  const PoolEntry& e = *pool.slots.at(i);
  std::string t = std::to_string(static_cast<int>(e.tag)) + "(";
  switch (e.tag) {
    case Tag::Utf8: return t + e.text + ")";
    case Tag::Integer:
    case Tag::Float:
    case Tag::Long:
    case Tag::Double: return t + std::to_string(e.bits) + ")";
    case Tag::Class:
    case Tag::String:
    case Tag::MethodType:
    case Tag::Module:
    case Tag::Package: return t + deep(pool, e.ref1) + ")";
    case Tag::Fieldref:
    case Tag::Methodref:
    case Tag::InterfaceMethodref:
    case Tag::NameAndType: return t + deep(pool, e.ref1) + "," + deep(pool, e.ref2) + ")";
    case Tag::MethodHandle: return t + std::to_string(e.ref_kind) + "," + deep(pool, e.ref1) + ")";
    case Tag::Dynamic:
    case Tag::InvokeDynamic: return t + std::to_string(e.ref1) + "," + deep(pool, e.ref2) + ")";
  }
  return t + ")";
}

std::multiset<std::string> pool_multiset(const ConstantPool& pool) {
  std::multiset<std::string> out;
  for (std::uint32_t i = 1; i < pool.count(); ++i)
    if (pool.usable(i)) out.insert(deep(pool, i));
  return out;
}

}  // namespace

TEST_CASE("committed fixture set is present") {
  CHECK(committed_class_files().size() >= 40);
}

TEST_CASE("Utils parses with digit16 throwing DecoderException") {
  RawClassFile c = read_class_file(utils_path());
  CHECK(c.magic == kMagic);
  CHECK(c.name() == "org/apache/commons/codec/net/Utils");
  NormalizedClass n = normalize(c);
  const NormalizedMember* m = find_method(n, "digit16", "(B)I");
  REQUIRE(m != nullptr);
  CHECK(m->has_code);
  bool throws = false;
  for (const auto& a : m->attributes)
    if (a.name == "Exceptions" && a.rendering.find("org/apache/commons/codec/DecoderException") != std::string::npos)
      throws = true;
  CHECK(throws);
  std::size_t non_ctor = 0;
  for (const auto& mm : n.methods) non_ctor += mm.name != "<init>" && mm.name != "<clinit>";
  CHECK(non_ctor == 1);
}

TEST_CASE("malformed inputs report kind and offset") {
  std::vector<std::uint8_t> magic_only{0xCA, 0xFE, 0xBA, 0xBE};
  try {
    parse_class(magic_only);
    FAIL("expected Truncated");
  } catch (const ClassFileError& e) {
    CHECK(e.kind() == ErrorKind::Truncated);
    CHECK(e.offset() == 4);
  }
  std::vector<std::uint8_t> bad{0xCA, 0xFE, 0xBA, 0xBF, 0, 0, 0, 52};
  try {
    parse_class(bad);
    FAIL("expected BadMagic");
  } catch (const ClassFileError& e) {
    CHECK(e.kind() == ErrorKind::BadMagic);
    CHECK(e.offset() == 0);
  }
  auto bytes = read_bytes(utils_path());
  auto truncated = std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + bytes.size() / 2);
  CHECK_THROWS_AS(parse_class(truncated), ClassFileError);
  auto trailing = bytes;
  trailing.push_back(0);
  try {
    parse_class(trailing);
    FAIL("expected TrailingBytes");
  } catch (const ClassFileError& e) {
    CHECK(e.kind() == ErrorKind::TrailingBytes);
    CHECK(e.offset() == bytes.size());
  }
}

TEST_CASE("out-of-range pool reference in the input is BadPoolRef") {
  auto bytes = read_bytes(utils_path());
  RawClassFile c = parse_class(bytes);
  // this_class sits right after the pool; point it past the end of the pool.
  auto raw = serialize_class(c);
  std::size_t this_at = raw.size();
  {
    RawClassFile probe = c;
    probe.this_class = 0x7777;
    CHECK_THROWS_AS(serialize_class(probe), ClassFileError);
  }
  // Locate this_class by scanning for its big-endian value after the pool.
  for (std::size_t i = 10; i + 6 < raw.size(); ++i) {
    if (raw[i] == (c.access_flags >> 8) && raw[i + 1] == (c.access_flags & 0xff) && raw[i + 2] == (c.this_class >> 8) &&
        raw[i + 3] == (c.this_class & 0xff) && raw[i + 4] == (c.super_class >> 8) &&
        raw[i + 5] == (c.super_class & 0xff)) {
      this_at = i + 2;
    }
  }
  REQUIRE(this_at < raw.size());
  raw[this_at] = 0x27;
  raw[this_at + 1] = 0x0f;
  try {
    parse_class(raw);
    FAIL("expected BadPoolRef");
  } catch (const ClassFileError& e) {
    CHECK(e.kind() == ErrorKind::BadPoolRef);
    CHECK(e.offset() == this_at);
  }
}

TEST_CASE("serialize refuses a pool entry referencing slot 9999") {
  RawClassFile c = read_class_file(utils_path());
  for (auto& s : c.constant_pool.slots) {
    if (s && s->tag == Tag::Class) {
      s->ref1 = 9999;
      break;
    }
  }
  try {
    serialize_class(c);
    FAIL("expected InconsistentPool");
  } catch (const ClassFileError& e) {
    CHECK(e.kind() == ErrorKind::InconsistentPool);
  }
}

TEST_CASE("round trip is byte-exact on every committed binary") {
  for (const auto& p : committed_class_files()) {
    CAPTURE(p.string());
    auto bytes = read_bytes(p.string());
    RawClassFile c = parse_class(bytes);
    CHECK(serialize_class(c) == bytes);
    CHECK(parse_class(serialize_class(c)) == c);
  }
}

TEST_CASE("identity permutation leaves the structure unchanged") {
  for (const auto& p : committed_class_files()) {
    CAPTURE(p.string());
    RawClassFile c = read_class_file(p.string());
    CHECK(permute_constant_pool(c, identity_permutation(c.constant_pool)) == c);
  }
}

TEST_CASE("reversal permutation of Utils parses back and normalizes equal") {
  RawClassFile c = read_class_file(utils_path());
  RawClassFile r = permute_constant_pool(c, reversal_permutation(c.constant_pool));
  CHECK_FALSE(r.constant_pool == c.constant_pool);
  RawClassFile back = parse_class(serialize_class(r));
  CHECK(back == r);
  CHECK(normalize(back) == normalize(c));
  CHECK(strict_equivalence(normalize(c), normalize(back)).equal);
}

TEST_CASE("permuted pools keep the same multiset of entries") {
  std::mt19937_64 rng(20201);
  for (const auto& p : committed_class_files()) {
    CAPTURE(p.string());
    RawClassFile c = read_class_file(p.string());
    for (int k = 0; k < 5; ++k) {
      RawClassFile r = parse_class(serialize_class(permute_constant_pool(c, random_permutation(c.constant_pool, rng))));
      CHECK(pool_multiset(r.constant_pool) == pool_multiset(c.constant_pool));
    }
  }
}

TEST_CASE("permutations that split a wide pair or are not bijective are rejected") {
  RawClassFile c = read_class_file(
      (fixtures_root() / "fastdate/classes-javac/org/apache/commons/lang3/time/FastDatePrinter.class").string());
  const auto& slots = c.constant_pool.slots;
  std::uint16_t wide = 0;
  for (std::uint16_t i = 1; i < slots.size(); ++i)
    if (slots[i] && slots[i]->tag == Tag::Long) {
      wide = i;
      break;
    }
  REQUIRE(wide != 0);
  std::uint16_t other = wide > 3 ? 1 : static_cast<std::uint16_t>(wide + 2);
  auto split = identity_permutation(c.constant_pool);
  std::swap(split[wide], split[other]);
  try {
    permute_constant_pool(c, split);
    FAIL("expected InvalidPermutation");
  } catch (const ClassFileError& e) {
    CHECK(e.kind() == ErrorKind::InvalidPermutation);
  }
  auto dup = identity_permutation(c.constant_pool);
  dup[2] = dup[1];
  CHECK_THROWS_AS(permute_constant_pool(c, dup), ClassFileError);
  auto short_perm = identity_permutation(c.constant_pool);
  short_perm.pop_back();
  CHECK_THROWS_AS(permute_constant_pool(c, short_perm), ClassFileError);
}

TEST_CASE("ldc operands that move past 255 are widened and still normalize equal") {
  RawClassFile c = read_class_file(
      (fixtures_root() / "fastdate/classes-ecj/org/apache/commons/lang3/time/FastDatePrinter.class").string());
  REQUIRE(c.constant_pool.count() > 256);
  RawClassFile r = permute_constant_pool(c, reversal_permutation(c.constant_pool));
  auto count_ldc_w = [](const RawClassFile& k) {
    std::size_t n = 0;
    for (const auto& m : k.methods)
      for (const auto& a : m.attributes)
        if (a.is_code())
          for (const auto& ins : decode_code(a.code().code)) n += ins.opcode == 0x13;
    return n;
  };
  CHECK(count_ldc_w(r) != count_ldc_w(c));
  CHECK(normalize(parse_class(serialize_class(r))) == normalize(c));
}

TEST_CASE("normalize is invariant under random pool permutations") {
  std::mt19937_64 rng(7);
  for (const auto& p : committed_class_files()) {
    CAPTURE(p.string());
    RawClassFile c = read_class_file(p.string());
    NormalizedClass n = normalize(c);
    for (int k = 0; k < 20; ++k) {
      auto perm = random_permutation(c.constant_pool, rng);
      CHECK(normalize(parse_class(serialize_class(permute_constant_pool(c, perm)))) == n);
    }
  }
}

TEST_CASE("normalized members are sorted by name then descriptor") {
  for (const auto& p : committed_class_files()) {
    NormalizedClass n = normalize(read_class_file(p.string()));
    auto key = [](const NormalizedMember& m) { return std::make_pair(m.name, m.descriptor); };
    CHECK(std::is_sorted(n.methods.begin(), n.methods.end(),
                         [&](const auto& a, const auto& b) { return key(a) < key(b); }));
    CHECK(std::is_sorted(n.fields.begin(), n.fields.end(),
                         [&](const auto& a, const auto& b) { return key(a) < key(b); }));
  }
}

TEST_CASE("every symbolic operand comes from some pool entry") {
  
  for (const auto& p : committed_class_files()) {
    CAPTURE(p.string());
    RawClassFile c = read_class_file(p.string());
    std::set<std::string> rendered;
    for (std::uint32_t i = 1; i < c.constant_pool.count(); ++i)
      if (c.constant_pool.usable(i)) rendered.insert(render_constant(c.constant_pool, i));
    NormalizedClass n = normalize(c);
    for (const auto& m : n.methods) {
      for (const auto& ins : m.code) {
        auto sp = ins.find(' ');
        if (sp == std::string::npos) continue;
        std::string operand = ins.substr(sp + 1);
        if (operand[0] == '@' || operand[0] == '-' || std::isdigit(static_cast<unsigned char>(operand[0])) ||
            operand.rfind("default ", 0) == 0)
          continue;
        bool found = rendered.contains(operand);
        for (const auto& r : rendered)
          if (!found && operand.size() > r.size() && operand.compare(0, r.size(), r) == 0 && operand[r.size()] == ' ')
            found = true;
        CAPTURE(ins);
        CHECK(found);
      }
    }
  }
}

TEST_CASE("debug attributes are ignored by default and kept on request") {
  RawClassFile c = read_class_file(utils_path());
  NormalizedClass dflt = normalize(c);
  NormalizedClass full = normalize(c, {});
  auto has = [](const NormalizedClass& n, const std::string& name) {
    for (const auto& m : n.methods)
      for (const auto& a : m.attributes)
        if (a.name == name) return true;
    for (const auto& a : n.attributes)
      if (a.name == name) return true;
    return false;
  };
  CHECK_FALSE(has(dflt, "Code.LineNumberTable"));
  CHECK_FALSE(has(dflt, "SourceFile"));
  CHECK(has(full, "Code.LineNumberTable"));
  CHECK(has(full, "SourceFile"));
  CHECK(default_ignore_set().contains("StackMapTable"));
}

TEST_CASE("Lang pair differs at the retainAll call site") {
  NormalizedClass a = normalize(read_class_file((fixtures_root() / "pairs/lang/original/Lang.class").string()));
  NormalizedClass b = normalize(read_class_file((fixtures_root() / "pairs/lang/recompiled/Lang.class").string()));
  CHECK_FALSE(a == b);
  EquivalenceReport r = strict_equivalence(a, b);
  CHECK_FALSE(r.equal);
  REQUIRE_FALSE(r.differences.empty());
  bool at_retain = false;
  for (const auto& d : r.differences)
    if (d.kind == "instruction" && d.original.find("INVOKEINTERFACE java/util/Set.retainAll") != std::string::npos &&
        d.recompiled.find("INVOKEVIRTUAL java/util/HashSet.retainAll") != std::string::npos)
      at_retain = true;
  CHECK(at_retain);
  CHECK(r.to_text().find("retainAll") != std::string::npos);
}

TEST_CASE("report invariant and JSON round trip") {
  NormalizedClass a = normalize(read_class_file((fixtures_root() / "pairs/lang/original/Lang.class").string()));
  NormalizedClass b = normalize(read_class_file((fixtures_root() / "pairs/lang/recompiled/Lang.class").string()));
  for (const auto& r : {strict_equivalence(a, a), strict_equivalence(a, b)}) {
    CHECK(r.equal == r.differences.empty());
    nlohmann::json j = r;
    CHECK(j.get<EquivalenceReport>() == r);
  }
  CHECK(strict_equivalence(a, a).to_text() == "strictly equivalent\n");
}

TEST_CASE("hunk cap bounds differences per member") {
  NormalizedClass a = normalize(read_class_file(utils_path()));
  NormalizedClass b = a;
  for (auto& m : b.methods)
    for (std::size_t i = 0; i < m.code.size(); i += 2) m.code[i] += " X";
  auto r = strict_equivalence(a, b, 2);
  std::map<std::string, int> per_member;
  for (const auto& d : r.differences)
    if (d.kind == "instruction") per_member[d.location.substr(0, d.location.rfind(" @"))]++;
  for (const auto& [loc, n] : per_member) CHECK(n <= 2);
  CHECK_FALSE(r.equal);
}

TEST_CASE("strict equivalence is an equivalence relation on fixture triples") {
  std::vector<NormalizedClass> pool;
  std::mt19937_64 rng(99);
  for (const auto& p : committed_class_files()) {
    RawClassFile c = read_class_file(p.string());
    pool.push_back(normalize(c));
    pool.push_back(normalize(permute_constant_pool(c, random_permutation(c.constant_pool, rng))));
  }
  auto eq = [](const NormalizedClass& x, const NormalizedClass& y) { return strict_equivalence(x, y).equal; };
  for (std::size_t i = 0; i < pool.size(); ++i) {
    CHECK(eq(pool[i], pool[i]));
    for (std::size_t j = 0; j < pool.size(); ++j) {
      bool ij = eq(pool[i], pool[j]);
      CHECK(ij == eq(pool[j], pool[i]));
      CHECK(ij == (pool[i] == pool[j]));
      if (!ij) continue;
      for (std::size_t k = 0; k < pool.size(); ++k)
        if (eq(pool[j], pool[k])) CHECK(eq(pool[i], pool[k]));
    }
  }
}

TEST_CASE("javac and ecj builds of the same source are not strictly equivalent") {
  NormalizedClass j = normalize(read_class_file(utils_path()));
  NormalizedClass e = normalize(
      read_class_file((fixtures_root() / "utils/classes-ecj/org/apache/commons/codec/net/Utils.class").string()));
  auto r = strict_equivalence(j, e);
  CHECK_FALSE(r.equal);
  bool version = false;
  for (const auto& d : r.differences) version |= d.kind == "version";
  CHECK(version);
}
