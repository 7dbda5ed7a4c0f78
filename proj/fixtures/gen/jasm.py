"""Minimal JVM class-file assembler used to produce the committed fixture binaries.

The fixture corpus is assembled rather than compiled so that the binaries can be
regenerated without a JDK. Each fixture definition describes its bytecode with
the Code builder below; constant-pool order, branch encoding and StackMapTable
compression follow the conventions of the compiler flavor being imitated.
"""

import struct

OPCODES = {
    "nop": (0x00, "None"),
    "aconst_null": (0x01, "None"),
    "iconst_m1": (0x02, "None"),
    "iconst_0": (0x03, "None"),
    "iconst_1": (0x04, "None"),
    "iconst_2": (0x05, "None"),
    "iconst_3": (0x06, "None"),
    "iconst_4": (0x07, "None"),
    "iconst_5": (0x08, "None"),
    "lconst_0": (0x09, "None"),
    "lconst_1": (0x0a, "None"),
    "fconst_0": (0x0b, "None"),
    "fconst_1": (0x0c, "None"),
    "fconst_2": (0x0d, "None"),
    "dconst_0": (0x0e, "None"),
    "dconst_1": (0x0f, "None"),
    "bipush": (0x10, "Byte"),
    "sipush": (0x11, "Short"),
    "ldc": (0x12, "PoolNarrow"),
    "ldc_w": (0x13, "Pool"),
    "ldc2_w": (0x14, "Pool"),
    "iload": (0x15, "Local"),
    "lload": (0x16, "Local"),
    "fload": (0x17, "Local"),
    "dload": (0x18, "Local"),
    "aload": (0x19, "Local"),
    "iload_0": (0x1a, "None"),
    "iload_1": (0x1b, "None"),
    "iload_2": (0x1c, "None"),
    "iload_3": (0x1d, "None"),
    "lload_0": (0x1e, "None"),
    "lload_1": (0x1f, "None"),
    "lload_2": (0x20, "None"),
    "lload_3": (0x21, "None"),
    "fload_0": (0x22, "None"),
    "fload_1": (0x23, "None"),
    "fload_2": (0x24, "None"),
    "fload_3": (0x25, "None"),
    "dload_0": (0x26, "None"),
    "dload_1": (0x27, "None"),
    "dload_2": (0x28, "None"),
    "dload_3": (0x29, "None"),
    "aload_0": (0x2a, "None"),
    "aload_1": (0x2b, "None"),
    "aload_2": (0x2c, "None"),
    "aload_3": (0x2d, "None"),
    "iaload": (0x2e, "None"),
    "laload": (0x2f, "None"),
    "faload": (0x30, "None"),
    "daload": (0x31, "None"),
    "aaload": (0x32, "None"),
    "baload": (0x33, "None"),
    "caload": (0x34, "None"),
    "saload": (0x35, "None"),
    "istore": (0x36, "Local"),
    "lstore": (0x37, "Local"),
    "fstore": (0x38, "Local"),
    "dstore": (0x39, "Local"),
    "astore": (0x3a, "Local"),
    "istore_0": (0x3b, "None"),
    "istore_1": (0x3c, "None"),
    "istore_2": (0x3d, "None"),
    "istore_3": (0x3e, "None"),
    "lstore_0": (0x3f, "None"),
    "lstore_1": (0x40, "None"),
    "lstore_2": (0x41, "None"),
    "lstore_3": (0x42, "None"),
    "fstore_0": (0x43, "None"),
    "fstore_1": (0x44, "None"),
    "fstore_2": (0x45, "None"),
    "fstore_3": (0x46, "None"),
    "dstore_0": (0x47, "None"),
    "dstore_1": (0x48, "None"),
    "dstore_2": (0x49, "None"),
    "dstore_3": (0x4a, "None"),
    "astore_0": (0x4b, "None"),
    "astore_1": (0x4c, "None"),
    "astore_2": (0x4d, "None"),
    "astore_3": (0x4e, "None"),
    "iastore": (0x4f, "None"),
    "lastore": (0x50, "None"),
    "fastore": (0x51, "None"),
    "dastore": (0x52, "None"),
    "aastore": (0x53, "None"),
    "bastore": (0x54, "None"),
    "castore": (0x55, "None"),
    "sastore": (0x56, "None"),
    "pop": (0x57, "None"),
    "pop2": (0x58, "None"),
    "dup": (0x59, "None"),
    "dup_x1": (0x5a, "None"),
    "dup_x2": (0x5b, "None"),
    "dup2": (0x5c, "None"),
    "dup2_x1": (0x5d, "None"),
    "dup2_x2": (0x5e, "None"),
    "swap": (0x5f, "None"),
    "iadd": (0x60, "None"),
    "ladd": (0x61, "None"),
    "fadd": (0x62, "None"),
    "dadd": (0x63, "None"),
    "isub": (0x64, "None"),
    "lsub": (0x65, "None"),
    "fsub": (0x66, "None"),
    "dsub": (0x67, "None"),
    "imul": (0x68, "None"),
    "lmul": (0x69, "None"),
    "fmul": (0x6a, "None"),
    "dmul": (0x6b, "None"),
    "idiv": (0x6c, "None"),
    "ldiv": (0x6d, "None"),
    "fdiv": (0x6e, "None"),
    "ddiv": (0x6f, "None"),
    "irem": (0x70, "None"),
    "lrem": (0x71, "None"),
    "frem": (0x72, "None"),
    "drem": (0x73, "None"),
    "ineg": (0x74, "None"),
    "lneg": (0x75, "None"),
    "fneg": (0x76, "None"),
    "dneg": (0x77, "None"),
    "ishl": (0x78, "None"),
    "lshl": (0x79, "None"),
    "ishr": (0x7a, "None"),
    "lshr": (0x7b, "None"),
    "iushr": (0x7c, "None"),
    "lushr": (0x7d, "None"),
    "iand": (0x7e, "None"),
    "land": (0x7f, "None"),
    "ior": (0x80, "None"),
    "lor": (0x81, "None"),
    "ixor": (0x82, "None"),
    "lxor": (0x83, "None"),
    "iinc": (0x84, "Iinc"),
    "i2l": (0x85, "None"),
    "i2f": (0x86, "None"),
    "i2d": (0x87, "None"),
    "l2i": (0x88, "None"),
    "l2f": (0x89, "None"),
    "l2d": (0x8a, "None"),
    "f2i": (0x8b, "None"),
    "f2l": (0x8c, "None"),
    "f2d": (0x8d, "None"),
    "d2i": (0x8e, "None"),
    "d2l": (0x8f, "None"),
    "d2f": (0x90, "None"),
    "i2b": (0x91, "None"),
    "i2c": (0x92, "None"),
    "i2s": (0x93, "None"),
    "lcmp": (0x94, "None"),
    "fcmpl": (0x95, "None"),
    "fcmpg": (0x96, "None"),
    "dcmpl": (0x97, "None"),
    "dcmpg": (0x98, "None"),
    "ifeq": (0x99, "Branch"),
    "ifne": (0x9a, "Branch"),
    "iflt": (0x9b, "Branch"),
    "ifge": (0x9c, "Branch"),
    "ifgt": (0x9d, "Branch"),
    "ifle": (0x9e, "Branch"),
    "if_icmpeq": (0x9f, "Branch"),
    "if_icmpne": (0xa0, "Branch"),
    "if_icmplt": (0xa1, "Branch"),
    "if_icmpge": (0xa2, "Branch"),
    "if_icmpgt": (0xa3, "Branch"),
    "if_icmple": (0xa4, "Branch"),
    "if_acmpeq": (0xa5, "Branch"),
    "if_acmpne": (0xa6, "Branch"),
    "goto": (0xa7, "Branch"),
    "jsr": (0xa8, "Branch"),
    "ret": (0xa9, "Local"),
    "tableswitch": (0xaa, "TableSwitch"),
    "lookupswitch": (0xab, "LookupSwitch"),
    "ireturn": (0xac, "None"),
    "lreturn": (0xad, "None"),
    "freturn": (0xae, "None"),
    "dreturn": (0xaf, "None"),
    "areturn": (0xb0, "None"),
    "return": (0xb1, "None"),
    "getstatic": (0xb2, "Pool"),
    "putstatic": (0xb3, "Pool"),
    "getfield": (0xb4, "Pool"),
    "putfield": (0xb5, "Pool"),
    "invokevirtual": (0xb6, "Pool"),
    "invokespecial": (0xb7, "Pool"),
    "invokestatic": (0xb8, "Pool"),
    "invokeinterface": (0xb9, "InvokeInterface"),
    "invokedynamic": (0xba, "InvokeDynamic"),
    "new": (0xbb, "Pool"),
    "newarray": (0xbc, "NewArray"),
    "anewarray": (0xbd, "Pool"),
    "arraylength": (0xbe, "None"),
    "athrow": (0xbf, "None"),
    "checkcast": (0xc0, "Pool"),
    "instanceof": (0xc1, "Pool"),
    "monitorenter": (0xc2, "None"),
    "monitorexit": (0xc3, "None"),
    "wide": (0xc4, "Wide"),
    "multianewarray": (0xc5, "MultiANewArray"),
    "ifnull": (0xc6, "Branch"),
    "ifnonnull": (0xc7, "Branch"),
    "goto_w": (0xc8, "BranchWide"),
    "jsr_w": (0xc9, "BranchWide"),
}

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data):
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return "%016x" % h


def u1(v):
    return struct.pack(">B", v)


def u2(v):
    return struct.pack(">H", v)


def u4(v):
    return struct.pack(">I", v & 0xFFFFFFFF)


def s1(v):
    return struct.pack(">b", v)


def s2(v):
    return struct.pack(">h", v)


def s4(v):
    return struct.pack(">i", v)


def mutf8(s):
    out = bytearray()
    for ch in s:
        c = ord(ch)
        if 0 < c < 0x80:
            out.append(c)
        elif c < 0x800:
            out += bytes([0xC0 | (c >> 6), 0x80 | (c & 0x3F)])
        elif c < 0x10000:
            out += bytes([0xE0 | (c >> 12), 0x80 | ((c >> 6) & 0x3F), 0x80 | (c & 0x3F)])
        else:
            c -= 0x10000
            hi = 0xD800 | (c >> 10)
            lo = 0xDC00 | (c & 0x3FF)
            out += mutf8(chr(hi)) + mutf8(chr(lo))
    return bytes(out)


# Constant operands ---------------------------------------------------------

class Const:
    def key(self):
        return (type(self).__name__,) + tuple(vars(self).values())


class Cls(Const):
    def __init__(self, name):
        self.name = name


class Str(Const):
    def __init__(self, value):
        self.value = value


class Int(Const):
    def __init__(self, value):
        self.value = value


class Flt(Const):
    def __init__(self, value):
        self.value = value


class Lng(Const):
    def __init__(self, value):
        self.value = value


class Dbl(Const):
    def __init__(self, value):
        self.value = value


class Fld(Const):
    def __init__(self, owner, name, desc):
        self.owner, self.name, self.desc = owner, name, desc


class Meth(Const):
    def __init__(self, owner, name, desc):
        self.owner, self.name, self.desc = owner, name, desc


class IMeth(Const):
    def __init__(self, owner, name, desc):
        self.owner, self.name, self.desc = owner, name, desc


class Pool:
    def __init__(self):
        self.entries = [None]
        self.index = {}

    def _add(self, key, payload, wide=False):
        if key in self.index:
            return self.index[key]
        idx = len(self.entries)
        self.entries.append(payload)
        if wide:
            self.entries.append(None)
        self.index[key] = idx
        return idx

    def utf8(self, s):
        data = mutf8(s)
        return self._add(("Utf8", s), u1(1) + u2(len(data)) + data)

    def cls(self, name):
        key = ("Class", name)
        if key in self.index:
            return self.index[key]
        u = self.utf8(name)
        return self._add(key, u1(7) + u2(u))

    def string(self, s):
        key = ("String", s)
        if key in self.index:
            return self.index[key]
        u = self.utf8(s)
        return self._add(key, u1(8) + u2(u))

    def integer(self, v):
        return self._add(("Integer", v), u1(3) + s4(v))

    def float_(self, v):
        return self._add(("Float", v), u1(4) + struct.pack(">f", v))

    def long_(self, v):
        return self._add(("Long", v), u1(5) + struct.pack(">q", v), wide=True)

    def double(self, v):
        return self._add(("Double", v), u1(6) + struct.pack(">d", v), wide=True)

    def nat(self, name, desc):
        key = ("NameAndType", name, desc)
        if key in self.index:
            return self.index[key]
        n = self.utf8(name)
        d = self.utf8(desc)
        return self._add(key, u1(12) + u2(n) + u2(d))

    def _member(self, tag, tagname, owner, name, desc):
        key = (tagname, owner, name, desc)
        if key in self.index:
            return self.index[key]
        c = self.cls(owner)
        nt = self.nat(name, desc)
        return self._add(key, u1(tag) + u2(c) + u2(nt))

    def field(self, owner, name, desc):
        return self._member(9, "Fieldref", owner, name, desc)

    def method(self, owner, name, desc):
        return self._member(10, "Methodref", owner, name, desc)

    def imethod(self, owner, name, desc):
        return self._member(11, "InterfaceMethodref", owner, name, desc)

    def const(self, c):
        if isinstance(c, Cls):
            return self.cls(c.name)
        if isinstance(c, Str):
            return self.string(c.value)
        if isinstance(c, Int):
            return self.integer(c.value)
        if isinstance(c, Flt):
            return self.float_(c.value)
        if isinstance(c, Lng):
            return self.long_(c.value)
        if isinstance(c, Dbl):
            return self.double(c.value)
        if isinstance(c, Fld):
            return self.field(c.owner, c.name, c.desc)
        if isinstance(c, Meth):
            return self.method(c.owner, c.name, c.desc)
        if isinstance(c, IMeth):
            return self.imethod(c.owner, c.name, c.desc)
        raise TypeError(c)

    def bytes(self):
        out = bytearray(u2(len(self.entries)))
        for e in self.entries[1:]:
            if e is None:
                continue
            out += e
        return bytes(out)


# Verification types for StackMapTable frames --------------------------------

def vtype(pool, t, labels):
    simple = {"top": 0, "I": 1, "F": 2, "D": 3, "J": 4, "null": 5, "uthis": 6}
    if isinstance(t, tuple):
        return u1(8) + u2(labels[t[1]])
    if t in simple:
        return u1(simple[t])
    return u1(7) + u2(pool.cls(t))


def compress_frames(pool, frames, initial_locals, labels):
    """Encodes (offset, locals, stack) triples with the compact frame forms."""
    out = bytearray(u2(len(frames)))
    prev_locals = list(initial_locals)
    prev_offset = -1
    for offset, locals_, stack in frames:
        delta = offset - prev_offset - 1
        prev_offset = offset
        if not stack and locals_ == prev_locals:
            if delta <= 63:
                out += u1(delta)
            else:
                out += u1(251) + u2(delta)
        elif len(stack) == 1 and locals_ == prev_locals:
            if delta <= 63:
                out += u1(64 + delta) + vtype(pool, stack[0], labels)
            else:
                out += u1(247) + u2(delta) + vtype(pool, stack[0], labels)
        elif not stack and len(locals_) < len(prev_locals) and \
                len(prev_locals) - len(locals_) <= 3 and prev_locals[:len(locals_)] == locals_:
            out += u1(251 - (len(prev_locals) - len(locals_))) + u2(delta)
        elif not stack and len(locals_) > len(prev_locals) and \
                len(locals_) - len(prev_locals) <= 3 and locals_[:len(prev_locals)] == prev_locals:
            out += u1(251 + len(locals_) - len(prev_locals)) + u2(delta)
            for t in locals_[len(prev_locals):]:
                out += vtype(pool, t, labels)
        else:
            out += u1(255) + u2(delta) + u2(len(locals_))
            for t in locals_:
                out += vtype(pool, t, labels)
            out += u2(len(stack))
            for t in stack:
                out += vtype(pool, t, labels)
        prev_locals = list(locals_)
    return bytes(out)


# Code builder ----------------------------------------------------------------

SHORT_FORMS = {"iload", "lload", "fload", "dload", "aload", "istore", "lstore", "fstore", "dstore", "astore"}


class Code:
    def __init__(self, cls, max_stack, max_locals):
        self.cls = cls
        self.pool = cls.pool
        self.max_stack = max_stack
        self.max_locals = max_locals
        self.items = []  # (mnemonic, args)
        self.handlers = []
        self.lines = []
        self.locals = []
        self.frames = []
        self.marks = {}

    # Emission helpers
    def __getattr__(self, name):
        if name in OPCODES or name in SHORT_FORMS:
            return lambda *args: self.op(name, *args)
        raise AttributeError(name)

    def op(self, name, *args):
        if name in SHORT_FORMS and len(args) == 1 and 0 <= args[0] <= 3:
            name = "%s_%d" % (name, args[0])
            args = ()
        resolved = []
        for a in args:
            if isinstance(a, Const):
                resolved.append(self.pool.const(a))
            else:
                resolved.append(a)
        if name == "ldc" and resolved[0] > 255:
            name = "ldc_w"
        self.items.append(("op", name, resolved))
        return self

    def label(self, name):
        self.items.append(("label", name))
        return self

    def line(self, n):
        self.items.append(("line", n))
        return self

    def frame(self, locals_, stack=()):
        self.items.append(("frame", list(locals_), list(stack)))
        return self

    def handler(self, start, end, target, catch_type=None):
        self.handlers.append((start, end, target, catch_type))
        return self

    def local(self, slot, name, desc, start, end, signature=None):
        self.locals.append((slot, name, desc, start, end, signature))
        return self

    # Assembly
    def _size(self, name, args, pc):
        opcode, kind = OPCODES[name]
        if kind == "None":
            return 1
        if kind in ("Byte", "PoolNarrow", "Local", "NewArray"):
            return 2
        if kind in ("Short", "Pool", "Branch", "Iinc"):
            return 3
        if kind == "MultiANewArray":
            return 4
        if kind in ("InvokeInterface", "InvokeDynamic", "BranchWide"):
            return 5
        pad = (4 - (pc + 1) % 4) % 4
        if kind == "TableSwitch":
            low, high = args[1], args[2]
            return 1 + pad + 12 + 4 * (high - low + 1)
        if kind == "LookupSwitch":
            return 1 + pad + 8 + 8 * len(args[1])
        raise ValueError(name)

    def assemble(self):
        pc = 0
        labels = {}
        layout = []
        for item in self.items:
            if item[0] == "op":
                layout.append((pc, item))
                pc += self._size(item[1], item[2], pc)
            elif item[0] == "label":
                labels[item[1]] = pc
            else:
                layout.append((pc, item))
        labels.setdefault("_end", pc)
        code = bytearray()
        lines = []
        frames = []
        for at, item in layout:
            if item[0] == "line":
                lines.append((at, item[1]))
                continue
            if item[0] == "frame":
                frames.append((at, item[1], item[2]))
                continue
            _, name, args = item
            opcode, kind = OPCODES[name]
            assert len(code) == at
            code += u1(opcode)
            if kind == "None":
                pass
            elif kind == "Byte":
                code += s1(args[0])
            elif kind == "Short":
                code += s2(args[0])
            elif kind in ("PoolNarrow", "Local", "NewArray"):
                code += u1(args[0])
            elif kind == "Pool":
                code += u2(args[0])
            elif kind == "Iinc":
                code += u1(args[0]) + s1(args[1])
            elif kind == "Branch":
                code += s2(labels[args[0]] - at)
            elif kind == "BranchWide":
                code += s4(labels[args[0]] - at)
            elif kind == "InvokeInterface":
                code += u2(args[0]) + u1(args[1]) + u1(0)
            elif kind == "MultiANewArray":
                code += u2(args[0]) + u1(args[1])
            elif kind == "TableSwitch":
                default, low, high, targets = args
                code += b"\0" * ((4 - (at + 1) % 4) % 4)
                code += s4(labels[default] - at) + s4(low) + s4(high)
                for t in targets:
                    code += s4(labels[t] - at)
            elif kind == "LookupSwitch":
                default, pairs = args
                code += b"\0" * ((4 - (at + 1) % 4) % 4)
                code += s4(labels[default] - at) + s4(len(pairs))
                for key, t in sorted(pairs):
                    code += s4(key) + s4(labels[t] - at)
            else:
                raise ValueError(name)
        return bytes(code), labels, lines, frames


class Member:
    def __init__(self, flags, name, desc):
        self.flags, self.name, self.desc = flags, name, desc
        self.attrs = []  # (name, bytes or callable)


ACC = {
    "public": 0x0001, "private": 0x0002, "protected": 0x0004, "static": 0x0008,
    "final": 0x0010, "super": 0x0020, "synchronized": 0x0020, "volatile": 0x0040,
    "bridge": 0x0040, "transient": 0x0080, "varargs": 0x0080, "native": 0x0100,
    "interface": 0x0200, "abstract": 0x0400, "strict": 0x0800, "synthetic": 0x1000,
    "annotation": 0x2000, "enum": 0x4000,
}


def flags(spec):
    v = 0
    for w in spec.split():
        v |= ACC[w]
    return v


class ClassFile:
    def __init__(self, name, super_name="java/lang/Object", access="public super",
                 interfaces=(), major=52, minor=0, flavor="javac"):
        self.pool = Pool()
        self.name = name
        self.super_name = super_name
        self.access = flags(access)
        self.major, self.minor = major, minor
        self.flavor = flavor
        if flavor == "ecj":
            self.pool.cls(name)
            if super_name:
                self.pool.cls(super_name)
        self.interfaces = list(interfaces)
        self.fields = []
        self.methods = []
        self.attrs = []
        self.source_file = None

    def field(self, access, name, desc, constant=None, signature=None, attrs=()):
        m = Member(flags(access), name, desc)
        if constant is not None:
            m.attrs.append(("ConstantValue", u2(self.pool.const(constant))))
        if signature:
            m.attrs.append(("Signature", u2(self.pool.utf8(signature))))
        m.attrs.extend(attrs)
        self.fields.append(m)
        return m

    def method(self, access, name, desc, code=None, exceptions=(), signature=None, attrs=()):
        m = Member(flags(access), name, desc)
        self.methods.append(m)
        if code is not None:
            m.attrs.append(("Code", self._code_attr(code, m)))
        if exceptions:
            m.attrs.append(("Exceptions", u2(len(exceptions)) +
                            b"".join(u2(self.pool.cls(e)) for e in exceptions)))
        if signature:
            m.attrs.append(("Signature", u2(self.pool.utf8(signature))))
        m.attrs.extend(attrs)
        return m

    def code(self, max_stack, max_locals):
        return Code(self, max_stack, max_locals)

    def initial_locals(self, member):
        out = []
        if not member.flags & ACC["static"]:
            out.append("uthis" if member.name == "<init>" else self.name)
        desc = member.desc
        i = 1
        while desc[i] != ")":
            j = i
            while desc[j] == "[":
                j += 1
            if desc[j] == "L":
                j = desc.index(";", j)
            t = desc[i:j + 1]
            i = j + 1
            if t in ("Z", "B", "C", "S", "I"):
                out.append("I")
            elif t in ("J", "F", "D"):
                out.append(t)
            elif t.startswith("L"):
                out.append(t[1:-1])
            else:
                out.append(t)
        return out

    def _code_attr(self, code, member):
        body, labels, lines, frames = code.assemble()
        sub = []
        if lines:
            data = u2(len(lines)) + b"".join(u2(pc) + u2(n) for pc, n in lines)
            sub.append(("LineNumberTable", data))
        lvt = [l for l in code.locals]
        if lvt:
            def entry(l, use_sig):
                slot, name, desc, start, end, sig = l
                s, e = labels[start], labels[end]
                return u2(s) + u2(e - s) + u2(self.pool.utf8(name)) + \
                    u2(self.pool.utf8(sig if use_sig else desc)) + u2(slot)
            sub.append(("LocalVariableTable", u2(len(lvt)) + b"".join(entry(l, False) for l in lvt)))
            typed = [l for l in lvt if l[5]]
            if typed:
                sub.append(("LocalVariableTypeTable", u2(len(typed)) + b"".join(entry(l, True) for l in typed)))
        if frames and self.major >= 50:
            initial = self.initial_locals(member)
            sub.append(("StackMapTable", compress_frames(self.pool, frames, initial, labels)))
        handlers = bytearray(u2(len(code.handlers)))
        for start, end, target, catch in code.handlers:
            handlers += u2(labels[start]) + u2(labels[end]) + u2(labels[target]) + \
                u2(self.pool.cls(catch) if catch else 0)
        out = bytearray(u2(code.max_stack) + u2(code.max_locals) + u4(len(body)) + body + handlers)
        out += u2(len(sub))
        for name, data in sub:
            out += u2(self.pool.utf8(name)) + u4(len(data)) + data
        return bytes(out)

    def attr(self, name, data):
        self.attrs.append((name, data))

    def inner_classes(self, entries):
        """entries: (inner, outer or None, simple name or None, access string)."""
        data = bytearray(u2(len(entries)))
        for inner, outer, simple, access in entries:
            data += u2(self.pool.cls(inner)) + u2(self.pool.cls(outer) if outer else 0)
            data += u2(self.pool.utf8(simple) if simple else 0) + u2(flags(access))
        self.attrs.append(("InnerClasses", bytes(data)))

    def enclosing_method(self, owner, name=None, desc=None):
        nat = self.pool.nat(name, desc) if name else 0
        self.attrs.append(("EnclosingMethod", u2(self.pool.cls(owner)) + u2(nat)))

    def bytes(self):
        this_idx = self.pool.cls(self.name)
        super_idx = self.pool.cls(self.super_name) if self.super_name else 0
        iface = [self.pool.cls(i) for i in self.interfaces]

        def members(ms):
            out = bytearray(u2(len(ms)))
            for m in ms:
                out += u2(m.flags) + u2(self.pool.utf8(m.name)) + u2(self.pool.utf8(m.desc))
                out += u2(len(m.attrs))
                for name, data in m.attrs:
                    out += u2(self.pool.utf8(name)) + u4(len(data)) + data
            return bytes(out)

        fields = members(self.fields)
        methods = members(self.methods)
        attrs = list(self.attrs)
        if self.source_file:
            attrs.append(("SourceFile", u2(self.pool.utf8(self.source_file))))
        tail = bytearray(u2(len(attrs)))
        for name, data in attrs:
            tail += u2(self.pool.utf8(name)) + u4(len(data)) + data
        head = u4(0xCAFEBABE) + u2(self.minor) + u2(self.major)
        mid = u2(self.access) + u2(this_idx) + u2(super_idx) + u2(len(iface)) + b"".join(u2(i) for i in iface)
        return head + self.pool.bytes() + mid + fields + methods + bytes(tail)
