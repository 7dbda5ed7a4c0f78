#!/usr/bin/env python3
"""Regenerates the committed fixture corpus.

For every fixture this writes the Java sources, the seeded variant hunks, the
assembled class files for both compiler flavors (original, equiv and mutant
variants), the JUnit sources, the TestMap, the expected-category manifest, the
compile-copy catalog and the behavior catalog used by the stub test runner.

Usage: build.py [output-root]   (defaults to the fixtures/ directory)
"""

import json
import os
import shutil
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from jasm import ClassFile, Cls, Dbl, Fld, IMeth, Int, Lng, Meth, Str, fnv1a64, u2  # noqa: E402

FLAVORS = {"javac": 52, "ecj": 50}
VARIANTS = ("original", "equiv", "mutant")

OBJECT = "java/lang/Object"
STRING = "java/lang/String"
SB = "java/lang/StringBuilder"


def ln(text, needle, nth=1):
    seen = 0
    for i, line in enumerate(text.split("\n"), 1):
        if needle in line:
            seen += 1
            if seen == nth:
                return i
    raise KeyError(needle)


def apply_hunks(text, hunks):
    lines = text.split("\n")
    for h in sorted(hunks, key=lambda h: h["at"], reverse=True):
        at = h["at"] - 1
        lines[at:at + h["delete"]] = h["insert"]
    return "\n".join(lines)


def default_ctor(cf, line, access="public"):
    c = cf.code(1, 1)
    c.label("L0").line(line).aload(0).invokespecial(Meth(cf.super_name, "<init>", "()V")).op("return").label("L1")
    c.local(0, "this", "L%s;" % cf.name, "L0", "L1")
    cf.method(access, "<init>", "()V", c)


def concat_prefix(c, flavor, literal):
    """Starts a string concatenation whose first operand is a literal."""
    c.new(Cls(SB)).dup()
    if flavor == "javac":
        c.invokespecial(Meth(SB, "<init>", "()V")).ldc(Str(literal))
        c.invokevirtual(Meth(SB, "append", "(Ljava/lang/String;)Ljava/lang/StringBuilder;"))
    else:
        c.ldc(Str(literal)).invokespecial(Meth(SB, "<init>", "(Ljava/lang/String;)V"))


# ---------------------------------------------------------------------------
# utils: string concatenation with a folded static final constant

UTILS_SRC = """package org.apache.commons.codec.net;

import org.apache.commons.codec.DecoderException;

class Utils {

    private static final int RADIX = 16;

    static int digit16(final byte b) throws DecoderException {
        final int i = Character.digit((char) b, RADIX);
        if (i == -1) {
            throw new DecoderException("Invalid URL encoding: not a valid digit (radix " + RADIX + "): " + b);
        }
        return i;
    }
}
"""

UTILS_HUNKS = {
    "equiv": [{"at": 11, "delete": 4, "insert": [
        "        if (i != -1) {",
        "            return i;",
        "        }",
        "        throw new DecoderException(\"Invalid URL encoding: not a valid digit (radix \" + RADIX + \"): \" + b);",
    ]}],
    "mutant": [{"at": 12, "delete": 1, "insert": [
        "            throw new DecoderException(\"Invalid URL encoding: not a valid digit (radix \" + RADIX + \"): \""
        " + (char) b);",
    ]}],
}

UTILS_MSG = "Invalid URL encoding: not a valid digit (radix 16): "
DECODER_EX = "org/apache/commons/codec/DecoderException"


def utils_classes(flavor, variant, src):
    cf = ClassFile("org/apache/commons/codec/net/Utils", access="super", major=FLAVORS[flavor], flavor=flavor)
    cf.source_file = "Utils.java"
    if flavor == "javac":
        default_ctor(cf, ln(src, "class Utils"), "")
    cf.field("private static final", "RADIX", "I", constant=Int(16))
    if flavor == "ecj":
        default_ctor(cf, ln(src, "class Utils"), "")

    c = cf.code(4 if flavor == "javac" else 5, 2)
    c.label("L0").line(ln(src, "Character.digit"))
    c.iload(0).i2c().bipush(16).invokestatic(Meth("java/lang/Character", "digit", "(CI)I")).istore(1)
    c.label("L1")

    def throw_block():
        c.line(ln(src, "throw new DecoderException"))
        c.new(Cls(DECODER_EX)).dup()
        concat_prefix(c, flavor, UTILS_MSG)
        c.iload(0)
        if variant == "mutant":
            c.i2c().invokevirtual(Meth(SB, "append", "(C)Ljava/lang/StringBuilder;"))
        else:
            c.invokevirtual(Meth(SB, "append", "(I)Ljava/lang/StringBuilder;"))
        c.invokevirtual(Meth(SB, "toString", "()Ljava/lang/String;"))
        c.invokespecial(Meth(DECODER_EX, "<init>", "(Ljava/lang/String;)V")).athrow()

    if variant == "equiv":
        c.line(ln(src, "if (i != -1)")).iload(1).iconst_m1().if_icmpeq("L2")
        c.line(ln(src, "return i;")).iload(1).ireturn()
        c.label("L2").frame(["I", "I"])
        throw_block()
    else:
        c.line(ln(src, "if (i == -1)")).iload(1).iconst_m1().if_icmpne("L2")
        throw_block()
        c.label("L2").frame(["I", "I"])
        c.line(ln(src, "return i;")).iload(1).ireturn()
    c.label("L3")
    c.local(0, "b", "B", "L0", "L3").local(1, "i", "I", "L1", "L3")
    cf.method("static", "digit16", "(B)I", c, exceptions=[DECODER_EX])
    return {"org/apache/commons/codec/net/Utils.class": cf.bytes()}


def decoder_exception():
    cf = ClassFile(DECODER_EX, super_name="java/lang/Exception")
    cf.source_file = "DecoderException.java"
    cf.field("private static final", "serialVersionUID", "J", constant=Lng(1))
    c = cf.code(2, 2)
    c.label("L0").line(8).aload(0).aload(1).invokespecial(Meth("java/lang/Exception", "<init>", "(Ljava/lang/String;)V"))
    c.line(9).op("return").label("L1")
    c.local(0, "this", "L%s;" % DECODER_EX, "L0", "L1").local(1, "message", "Ljava/lang/String;", "L0", "L1")
    cf.method("public", "<init>", "(Ljava/lang/String;)V", c)
    return {DECODER_EX + ".class": cf.bytes()}


DECODER_EX_SRC = """package org.apache.commons.codec;

public class DecoderException extends Exception {

    private static final long serialVersionUID = 1L;

    public DecoderException(final String message) {
        super(message);
    }
}
"""

UTILS_TEST = """package org.apache.commons.codec.net;

import static org.junit.Assert.assertEquals;
import static org.junit.Assert.fail;

import org.apache.commons.codec.DecoderException;
import org.junit.Test;

public class UtilsTest {

    @Test
    public void testDigit16Valid() throws DecoderException {
        assertEquals(10, Utils.digit16((byte) 'a'));
        assertEquals(9, Utils.digit16((byte) '9'));
    }

    @Test
    public void testDigit16InvalidMessage() {
        try {
            Utils.digit16((byte) 'g');
            fail("expected DecoderException");
        } catch (final DecoderException e) {
            assertEquals("Invalid URL encoding: not a valid digit (radix 16): 103", e.getMessage());
        }
    }
}
"""

# ---------------------------------------------------------------------------
# singleton: static field setter shadowed by its parameter

BUKKIT_SRC = """package org.bukkit;

public final class Bukkit {
    private static Server server;

    private Bukkit() {
    }

    public static Server getServer() {
        return server;
    }

    public static void setServer(Server server) {
        if (Bukkit.server != null) {
            throw new UnsupportedOperationException("Cannot redefine singleton Server");
        }

        Bukkit.server = server;
        server.getLogger().info("This server is running " + getName() + " version " + getVersion());
    }

    public static String getName() {
        return server.getName();
    }

    public static String getVersion() {
        return server.getVersion();
    }
}
"""

BUKKIT_HUNKS = {
    "equiv": [{"at": 14, "delete": 1, "insert": ["        if (getServer() != null) {"]}],
    "mutant": [
        {"at": 14, "delete": 1, "insert": ["        if (server != null) {"]},
        {"at": 18, "delete": 1, "insert": ["        server = server;"]},
    ],
}

SERVER = "org/bukkit/Server"
BUKKIT = "org/bukkit/Bukkit"
LOGGER = "java/util/logging/Logger"


def bukkit_classes(flavor, variant, src):
    cf = ClassFile(BUKKIT, access="public final super", major=FLAVORS[flavor], flavor=flavor)
    cf.source_file = "Bukkit.java"
    server_field = Fld(BUKKIT, "server", "Lorg/bukkit/Server;")
    cf.field("private static", "server", "Lorg/bukkit/Server;")

    c = cf.code(1, 1)
    c.label("L0").line(ln(src, "private Bukkit()")).aload(0).invokespecial(Meth(OBJECT, "<init>", "()V"))
    c.line(ln(src, "private Bukkit()") + 1).op("return").label("L1")
    c.local(0, "this", "Lorg/bukkit/Bukkit;", "L0", "L1")
    cf.method("private", "<init>", "()V", c)

    c = cf.code(1, 0)
    c.line(ln(src, "return server;")).getstatic(server_field).areturn()
    cf.method("public static", "getServer", "()Lorg/bukkit/Server;", c)

    c = cf.code(3 if flavor == "javac" else 4, 1)
    c.label("L0").line(ln(src, "if ("))
    if variant == "mutant":
        c.aload(0)
    elif variant == "equiv":
        c.invokestatic(Meth(BUKKIT, "getServer", "()Lorg/bukkit/Server;"))
    else:
        c.getstatic(server_field)
    c.ifnull("L1")
    c.line(ln(src, "throw new UnsupportedOperationException"))
    c.new(Cls("java/lang/UnsupportedOperationException")).dup().ldc(Str("Cannot redefine singleton Server"))
    c.invokespecial(Meth("java/lang/UnsupportedOperationException", "<init>", "(Ljava/lang/String;)V")).athrow()
    c.label("L1").frame(["org/bukkit/Server"])
    if variant == "mutant":
        c.line(ln(src, "server = server;")).aload(0).astore(0)
    else:
        c.line(ln(src, "Bukkit.server = server;")).aload(0).putstatic(server_field)
    c.line(ln(src, "getLogger()")).aload(0)
    c.invokeinterface(IMeth(SERVER, "getLogger", "()Ljava/util/logging/Logger;"), 1)
    concat_prefix(c, flavor, "This server is running ")
    append_s = Meth(SB, "append", "(Ljava/lang/String;)Ljava/lang/StringBuilder;")
    c.invokestatic(Meth(BUKKIT, "getName", "()Ljava/lang/String;")).invokevirtual(append_s)
    c.ldc(Str(" version ")).invokevirtual(append_s)
    c.invokestatic(Meth(BUKKIT, "getVersion", "()Ljava/lang/String;")).invokevirtual(append_s)
    c.invokevirtual(Meth(SB, "toString", "()Ljava/lang/String;"))
    c.invokevirtual(Meth(LOGGER, "info", "(Ljava/lang/String;)V"))
    c.line(ln(src, "getLogger()") + 1).op("return").label("L2")
    c.local(0, "server", "Lorg/bukkit/Server;", "L0", "L2")
    cf.method("public static", "setServer", "(Lorg/bukkit/Server;)V", c)

    for name in ("getName", "getVersion"):
        c = cf.code(1, 0)
        c.line(ln(src, "return server.%s();" % name)).getstatic(server_field)
        c.invokeinterface(IMeth(SERVER, name, "()Ljava/lang/String;"), 1).areturn()
        cf.method("public static", name, "()Ljava/lang/String;", c)
    return {BUKKIT + ".class": cf.bytes()}


SERVER_SRC = """package org.bukkit;

import java.util.logging.Logger;

public interface Server {
    String getName();

    String getVersion();

    Logger getLogger();
}
"""


def server_interface():
    cf = ClassFile(SERVER, access="public interface abstract")
    cf.source_file = "Server.java"
    cf.method("public abstract", "getName", "()Ljava/lang/String;")
    cf.method("public abstract", "getVersion", "()Ljava/lang/String;")
    cf.method("public abstract", "getLogger", "()Ljava/util/logging/Logger;")
    return {SERVER + ".class": cf.bytes()}


BUKKIT_TEST = """package org.bukkit;

import static org.junit.Assert.assertEquals;
import static org.junit.Assert.assertSame;
import static org.junit.Assert.fail;

import java.lang.reflect.Field;
import java.util.logging.Logger;
import org.junit.Before;
import org.junit.Test;

public class BukkitTest {

    private static final class TestServer implements Server {
        public String getName() {
            return "TestServer";
        }

        public String getVersion() {
            return "1.0";
        }

        public Logger getLogger() {
            return Logger.getLogger("test");
        }
    }

    @Before
    public void reset() throws Exception {
        final Field field = Bukkit.class.getDeclaredField("server");
        field.setAccessible(true);
        field.set(null, null);
    }

    @Test
    public void testSetServer() {
        final Server server = new TestServer();
        Bukkit.setServer(server);
        assertSame(server, Bukkit.getServer());
    }

    @Test
    public void testNameAndVersion() {
        Bukkit.setServer(new TestServer());
        assertEquals("TestServer", Bukkit.getName());
        assertEquals("1.0", Bukkit.getVersion());
    }

    @Test
    public void testCannotRedefine() {
        Bukkit.setServer(new TestServer());
        try {
            Bukkit.setServer(new TestServer());
            fail("expected UnsupportedOperationException");
        } catch (final UnsupportedOperationException e) {
            assertEquals("Cannot redefine singleton Server", e.getMessage());
        }
    }
}
"""

# ---------------------------------------------------------------------------
# fastdate: overloaded generic method needing an explicit interface cast

ZONE_COUNT = 260
ZONE_IDS = ["zone-%03d" % i for i in range(ZONE_COUNT)]


def fastdate_source():
    rows = []
    for i in range(0, ZONE_COUNT, 10):
        rows.append("        " + ", ".join('"%s"' % z for z in ZONE_IDS[i:i + 10]) + ",")
    return """package org.apache.commons.lang3.time;

import java.io.IOException;
import java.io.Serializable;
import java.util.Calendar;

public class FastDatePrinter implements Serializable {

    private static final long serialVersionUID = 1L;

    private static final double MILLIS_PER_SECOND = 1000.0;

    private static final String[] ZONE_IDS = {
""" + "\n".join(rows) + """
    };

    private final String pattern;

    public FastDatePrinter(final String pattern) {
        this.pattern = pattern;
    }

    public String format(final Calendar calendar) {
        return applyRules(calendar, new StringBuffer(pattern.length() + 16)).toString();
    }

    protected StringBuffer applyRules(final Calendar calendar, final StringBuffer buf) {
        return (StringBuffer) applyRules(calendar, (Appendable) buf);
    }

    private <B extends Appendable> B applyRules(final Calendar calendar, final B buf) {
        try {
            for (int i = 0; i < pattern.length(); i++) {
                final char c = pattern.charAt(i);
                switch (c) {
                case 'y':
                    appendDigits(buf, calendar.get(Calendar.YEAR), 4);
                    break;
                case 'M':
                    appendDigits(buf, calendar.get(Calendar.MONTH) + 1, 2);
                    break;
                case 'd':
                    appendDigits(buf, calendar.get(Calendar.DAY_OF_MONTH), 2);
                    break;
                default:
                    buf.append(c);
                    break;
                }
            }
        } catch (final IOException ex) {
            throw new IllegalStateException(ex);
        }
        return buf;
    }

    private static void appendDigits(final Appendable buf, final int value, final int width) throws IOException {
        final String digits = Integer.toString(value);
        for (int pad = digits.length(); pad < width; pad++) {
            buf.append('0');
        }
        buf.append(digits);
    }

    public static String zoneId(final int index) {
        return ZONE_IDS[index % ZONE_IDS.length];
    }

    @Deprecated
    public double seconds(final long millis) {
        return millis / MILLIS_PER_SECOND;
    }
}
"""


FASTDATE_SRC = fastdate_source()
_cast_line = ln(FASTDATE_SRC, "return (StringBuffer) applyRules")
FASTDATE_HUNKS = {
    "equiv": [{"at": _cast_line, "delete": 1, "insert": [
        "        final Appendable appendable = buf;",
        "        return (StringBuffer) applyRules(calendar, appendable);",
    ]}],
    "mutant": [{"at": _cast_line, "delete": 1, "insert": ["        return this.applyRules(calendar, buf);"]}],
}

FDP = "org/apache/commons/lang3/time/FastDatePrinter"
APPENDABLE = "java/lang/Appendable"
CALENDAR = "java/util/Calendar"
STRBUF = "java/lang/StringBuffer"


def push_int(c, v):
    if -1 <= v <= 5:
        c.op("iconst_m1" if v == -1 else "iconst_%d" % v)
    elif -128 <= v <= 127:
        c.bipush(v)
    else:
        c.sipush(v)


def fastdate_classes(flavor, variant, src):
    cf = ClassFile(FDP, access="public super", interfaces=["java/io/Serializable"], major=FLAVORS[flavor],
                   flavor=flavor)
    cf.source_file = "FastDatePrinter.java"
    cf.field("private static final", "serialVersionUID", "J", constant=Lng(1))
    cf.field("private static final", "MILLIS_PER_SECOND", "D", constant=Dbl(1000.0))
    cf.field("private static final", "ZONE_IDS", "[Ljava/lang/String;")
    cf.field("private final", "pattern", "Ljava/lang/String;")
    pattern = Fld(FDP, "pattern", "Ljava/lang/String;")
    zones = Fld(FDP, "ZONE_IDS", "[Ljava/lang/String;")
    this_desc = "L%s;" % FDP

    c = cf.code(2, 2)
    c.label("L0").line(ln(src, "public FastDatePrinter(")).aload(0).invokespecial(Meth(OBJECT, "<init>", "()V"))
    c.line(ln(src, "this.pattern = pattern;")).aload(0).aload(1).putfield(pattern)
    c.line(ln(src, "this.pattern = pattern;") + 1).op("return").label("L1")
    c.local(0, "this", this_desc, "L0", "L1").local(1, "pattern", "Ljava/lang/String;", "L0", "L1")
    cf.method("public", "<init>", "(Ljava/lang/String;)V", c)

    c = cf.code(6, 2)
    c.label("L0").line(ln(src, "return applyRules(calendar, new StringBuffer"))
    c.aload(0).aload(1).new(Cls(STRBUF)).dup().aload(0).getfield(pattern)
    c.invokevirtual(Meth(STRING, "length", "()I")).bipush(16).iadd()
    c.invokespecial(Meth(STRBUF, "<init>", "(I)V"))
    c.invokevirtual(Meth(FDP, "applyRules", "(Ljava/util/Calendar;Ljava/lang/StringBuffer;)Ljava/lang/StringBuffer;"))
    c.invokevirtual(Meth(STRBUF, "toString", "()Ljava/lang/String;")).areturn().label("L1")
    c.local(0, "this", this_desc, "L0", "L1").local(1, "calendar", "Ljava/util/Calendar;", "L0", "L1")
    cf.method("public", "format", "(Ljava/util/Calendar;)Ljava/lang/String;", c)

    generic = Meth(FDP, "applyRules", "(Ljava/util/Calendar;Ljava/lang/Appendable;)Ljava/lang/Appendable;")
    c = cf.code(3, 4 if variant == "equiv" else 3)
    c.label("L0")
    if variant == "mutant":
        c.line(ln(src, "return this.applyRules")).aload(0).aload(1).aload(2)
        c.invokevirtual(Meth(FDP, "applyRules",
                             "(Ljava/util/Calendar;Ljava/lang/StringBuffer;)Ljava/lang/StringBuffer;")).areturn()
    elif variant == "equiv":
        c.line(ln(src, "final Appendable appendable = buf;")).aload(2).astore(3).label("L2")
        c.line(ln(src, "applyRules(calendar, appendable)")).aload(0).aload(1).aload(3).invokespecial(generic)
        c.checkcast(Cls(STRBUF)).areturn()
    else:
        c.line(ln(src, "return (StringBuffer) applyRules")).aload(0).aload(1).aload(2).invokespecial(generic)
        c.checkcast(Cls(STRBUF)).areturn()
    c.label("L1")
    c.local(0, "this", this_desc, "L0", "L1").local(1, "calendar", "Ljava/util/Calendar;", "L0", "L1")
    c.local(2, "buf", "Ljava/lang/StringBuffer;", "L0", "L1")
    if variant == "equiv":
        c.local(3, "appendable", "Ljava/lang/Appendable;", "L2", "L1")
    cf.method("protected", "applyRules", "(Ljava/util/Calendar;Ljava/lang/StringBuffer;)Ljava/lang/StringBuffer;", c)

    append_digits = Meth(FDP, "appendDigits", "(Ljava/lang/Appendable;II)V")
    base = [FDP, CALENDAR, APPENDABLE]
    c = cf.code(3, 5)
    c.label("L0").line(ln(src, "for (int i = 0;")).iconst_0().istore(3).label("L1")
    c.label("Lloop").frame(base + ["I"])
    c.iload(3).aload(0).getfield(pattern).invokevirtual(Meth(STRING, "length", "()I")).if_icmpge("Lexit")
    c.line(ln(src, "final char c = pattern.charAt(i);")).aload(0).getfield(pattern).iload(3)
    c.invokevirtual(Meth(STRING, "charAt", "(I)C")).istore(4).label("L2")
    c.line(ln(src, "switch (c)")).iload(4).lookupswitch("Ldef", [(121, "Ly"), (77, "LM"), (100, "Ld")])
    c.label("Ly").frame(base + ["I", "I"])
    c.line(ln(src, "Calendar.YEAR")).aload(2).aload(1).iconst_1().invokevirtual(Meth(CALENDAR, "get", "(I)I"))
    c.iconst_4().invokestatic(append_digits)
    c.line(ln(src, "Calendar.YEAR") + 1).goto("Lnext")
    c.label("LM").frame(base + ["I", "I"])
    c.line(ln(src, "Calendar.MONTH")).aload(2).aload(1).iconst_2().invokevirtual(Meth(CALENDAR, "get", "(I)I"))
    c.iconst_1().iadd().iconst_2().invokestatic(append_digits)
    c.line(ln(src, "Calendar.MONTH") + 1).goto("Lnext")
    c.label("Ld").frame(base + ["I", "I"])
    c.line(ln(src, "Calendar.DAY_OF_MONTH")).aload(2).aload(1).iconst_5()
    c.invokevirtual(Meth(CALENDAR, "get", "(I)I")).iconst_2().invokestatic(append_digits)
    c.line(ln(src, "Calendar.DAY_OF_MONTH") + 1).goto("Lnext")
    c.label("Ldef").frame(base + ["I", "I"])
    c.line(ln(src, "buf.append(c);")).aload(2).iload(4)
    c.invokeinterface(IMeth(APPENDABLE, "append", "(C)Ljava/lang/Appendable;"), 2).pop()
    c.label("Lnext").frame(base + ["I"])
    c.line(ln(src, "for (int i = 0;")).iinc(3, 1).goto("Lloop")
    c.label("Lexit").frame(base)
    c.label("Ltry_end").goto("Lret")
    c.label("Lhandler").frame(base, ["java/io/IOException"])
    c.line(ln(src, "catch (final IOException ex)")).astore(3).label("L3")
    c.line(ln(src, "throw new IllegalStateException(ex);"))
    c.new(Cls("java/lang/IllegalStateException")).dup().aload(3)
    c.invokespecial(Meth("java/lang/IllegalStateException", "<init>", "(Ljava/lang/Throwable;)V")).athrow()
    c.label("Lret").frame(base)
    c.line(ln(src, "return buf;")).aload(2).areturn().label("Lend")
    c.handler("L0", "Ltry_end", "Lhandler", "java/io/IOException")
    c.local(4, "c", "C", "L2", "Lnext").local(3, "i", "I", "L1", "Lexit")
    c.local(3, "ex", "Ljava/io/IOException;", "L3", "Lret")
    c.local(0, "this", this_desc, "L0", "Lend").local(1, "calendar", "Ljava/util/Calendar;", "L0", "Lend")
    c.local(2, "buf", "Ljava/lang/Appendable;", "L0", "Lend", signature="TB;")
    cf.method("private", "applyRules", "(Ljava/util/Calendar;Ljava/lang/Appendable;)Ljava/lang/Appendable;", c,
              signature="<B::Ljava/lang/Appendable;>(Ljava/util/Calendar;TB;)TB;")

    c = cf.code(2, 5)
    c.label("L0").line(ln(src, "final String digits = Integer.toString(value);")).iload(1)
    c.invokestatic(Meth("java/lang/Integer", "toString", "(I)Ljava/lang/String;")).astore(3).label("L1")
    c.line(ln(src, "for (int pad")).aload(3).invokevirtual(Meth(STRING, "length", "()I")).istore(4).label("L2")
    c.label("Lloop").frame([APPENDABLE, "I", "I", STRING, "I"])
    c.iload(4).iload(2).if_icmpge("Lexit")
    c.line(ln(src, "buf.append('0');")).aload(0).bipush(48)
    c.invokeinterface(IMeth(APPENDABLE, "append", "(C)Ljava/lang/Appendable;"), 2).pop()
    c.line(ln(src, "for (int pad")).iinc(4, 1).goto("Lloop")
    c.label("Lexit").frame([APPENDABLE, "I", "I", STRING])
    c.line(ln(src, "buf.append(digits);")).aload(0).aload(3)
    c.invokeinterface(IMeth(APPENDABLE, "append", "(Ljava/lang/CharSequence;)Ljava/lang/Appendable;"), 2).pop()
    c.line(ln(src, "buf.append(digits);") + 1).op("return").label("Lend")
    c.local(4, "pad", "I", "L2", "Lexit").local(0, "buf", "Ljava/lang/Appendable;", "L0", "Lend")
    c.local(1, "value", "I", "L0", "Lend").local(2, "width", "I", "L0", "Lend")
    c.local(3, "digits", "Ljava/lang/String;", "L1", "Lend")
    cf.method("private static", "appendDigits", "(Ljava/lang/Appendable;II)V", c, exceptions=["java/io/IOException"])

    c = cf.code(3, 1)
    c.label("L0").line(ln(src, "return ZONE_IDS[")).getstatic(zones).iload(0).getstatic(zones).arraylength()
    c.irem().aaload().areturn().label("L1")
    c.local(0, "index", "I", "L0", "L1")
    cf.method("public static", "zoneId", "(I)Ljava/lang/String;", c)

    c = cf.code(4, 3)
    c.label("L0").line(ln(src, "return millis / MILLIS_PER_SECOND;")).lload(1).l2d().ldc2_w(Dbl(1000.0)).ddiv()
    c.dreturn().label("L1")
    c.local(0, "this", this_desc, "L0", "L1").local(1, "millis", "J", "L0", "L1")
    annotations = u2(1) + u2(cf.pool.utf8("Ljava/lang/Deprecated;")) + u2(0)
    cf.method("public", "seconds", "(J)D", c, attrs=[("Deprecated", b""), ("RuntimeVisibleAnnotations", annotations)])

    c = cf.code(4, 0)
    c.line(ln(src, "ZONE_IDS = {"))
    push_int(c, ZONE_COUNT)
    c.anewarray(Cls(STRING))
    for i, z in enumerate(ZONE_IDS):
        c.dup()
        push_int(c, i)
        c.ldc(Str(z)).aastore()
    c.putstatic(zones).op("return")
    cf.method("static", "<clinit>", "()V", c)
    return {FDP + ".class": cf.bytes()}


FASTDATE_TEST = """package org.apache.commons.lang3.time;

import static org.junit.Assert.assertEquals;

import java.util.Calendar;
import java.util.GregorianCalendar;
import org.junit.Test;

public class FastDatePrinterTest {

    @Test
    public void testFormat() {
        final Calendar calendar = new GregorianCalendar(2019, Calendar.MARCH, 7);
        assertEquals("2019-03-07", new FastDatePrinter("y-M-d").format(calendar));
    }

    @Test
    public void testZoneId() {
        assertEquals("zone-005", FastDatePrinter.zoneId(265));
    }

    @Test
    public void testSeconds() {
        assertEquals(1.5, new FastDatePrinter("").seconds(1500L), 0.0);
    }
}
"""

# ---------------------------------------------------------------------------
# foo: loop and try/catch interplay

FOO_SRC = """package dctest;

public class Foo {
  public int foo(int i, int j) {
    while (true) {
      try {
        while (i < j) i = j++ / i;
      } catch (RuntimeException re) {
        i = 10;
        continue;
      }
      break;
    }
    return j;
  }

  public int bar(int k) {
    switch (k) {
      case 0:
        return 1;
      case 1:
        return k + 2;
      case 2:
        return k * 3;
      default:
        return k - 1;
    }
  }

  public int count(int[] values) {
    int total = 0;
    for (int v : values) {
      total += v;
    }
    return total;
  }
}
"""

FOO_HUNKS = {
    "equiv": [
        {"at": 8, "delete": 0, "insert": ["        return j;"]},
        {"at": 10, "delete": 1, "insert": []},
        {"at": 12, "delete": 1, "insert": []},
        {"at": 14, "delete": 1, "insert": []},
    ],
    "mutant": [{"at": 9, "delete": 1, "insert": ["        j = 10;"]}],
}


def foo_classes(flavor, variant, src):
    cf = ClassFile("dctest/Foo", major=FLAVORS[flavor], flavor=flavor)
    cf.source_file = "Foo.java"
    default_ctor(cf, ln(src, "public class Foo"))
    this_desc = "Ldctest/Foo;"
    base = ["dctest/Foo", "I", "I"]

    c = cf.code(2, 4)
    c.label("L0").frame(base)
    c.line(ln(src, "while (i < j)")).iload(1).iload(2).if_icmpge("Lx")
    c.iload(2).iinc(2, 1).iload(1).idiv().istore(1).goto("L0")
    c.label("Lx").frame(base)
    if variant == "equiv":
        c.line(ln(src, "return j;")).iload(2).ireturn()
        c.label("Ltry_end")
    else:
        c.label("Ltry_end").goto("Lend")
    c.label("Lhandler").frame(base, ["java/lang/RuntimeException"])
    c.line(ln(src, "catch (RuntimeException re)")).astore(3).label("L1")
    if variant == "mutant":
        c.line(ln(src, "j = 10;")).bipush(10).istore(2)
    else:
        c.line(ln(src, "i = 10;")).bipush(10).istore(1)
    if variant == "equiv":
        c.goto("L0").label("L2")
    else:
        c.line(ln(src, "continue;")).goto("L0").label("L2")
        c.label("Lend").frame(base)
        c.line(ln(src, "return j;", 1 if variant == "original" else 1)).iload(2).ireturn()
    c.label("L3")
    c.handler("L0", "Ltry_end", "Lhandler", "java/lang/RuntimeException")
    c.local(3, "re", "Ljava/lang/RuntimeException;", "L1", "L2")
    c.local(0, "this", this_desc, "L0", "L3").local(1, "i", "I", "L0", "L3").local(2, "j", "I", "L0", "L3")
    cf.method("public", "foo", "(II)I", c)

    c = cf.code(2, 2)
    c.label("L0").line(ln(src, "switch (k)")).iload(1).tableswitch("Ldef", 0, 2, ["Lc0", "Lc1", "Lc2"])
    c.label("Lc0").frame(["dctest/Foo", "I"]).line(ln(src, "return 1;")).iconst_1().ireturn()
    c.label("Lc1").frame(["dctest/Foo", "I"]).line(ln(src, "return k + 2;")).iload(1).iconst_2().iadd().ireturn()
    c.label("Lc2").frame(["dctest/Foo", "I"]).line(ln(src, "return k * 3;")).iload(1).iconst_3().imul().ireturn()
    c.label("Ldef").frame(["dctest/Foo", "I"]).line(ln(src, "return k - 1;")).iload(1).iconst_1().isub().ireturn()
    c.label("L1")
    c.local(0, "this", this_desc, "L0", "L1").local(1, "k", "I", "L0", "L1")
    cf.method("public", "bar", "(I)I", c)

    c = cf.code(2, 7)
    c.label("L0").line(ln(src, "int total = 0;")).iconst_0().istore(2).label("L1")
    c.line(ln(src, "for (int v : values)")).aload(1).astore(3).aload(3).arraylength().istore(4).iconst_0().istore(5)
    c.label("Lloop").frame(["dctest/Foo", "[I", "I", "[I", "I", "I"])
    c.iload(5).iload(4).if_icmpge("Lexit")
    c.aload(3).iload(5).iaload().istore(6).label("L2")
    c.line(ln(src, "total += v;")).iload(2).iload(6).iadd().istore(2)
    c.line(ln(src, "for (int v : values)")).iinc(5, 1).goto("Lloop")
    c.label("Lexit").frame(["dctest/Foo", "[I", "I"])
    c.line(ln(src, "return total;")).iload(2).ireturn().label("Lend")
    c.local(6, "v", "I", "L2", "Lexit")
    c.local(0, "this", this_desc, "L0", "Lend").local(1, "values", "[I", "L0", "Lend")
    c.local(2, "total", "I", "L1", "Lend")
    cf.method("public", "count", "([I)I", c)
    return {"dctest/Foo.class": cf.bytes()}


FOO_TEST = """package dctest;

import static org.junit.Assert.assertEquals;

import org.junit.Test;

public class FooTest {

    @Test
    public void testFoo() {
        assertEquals(6, new Foo().foo(0, 5));
        assertEquals(7, new Foo().foo(7, 7));
    }

    @Test
    public void testBar() {
        final Foo foo = new Foo();
        assertEquals(1, foo.bar(0));
        assertEquals(3, foo.bar(1));
        assertEquals(6, foo.bar(2));
        assertEquals(8, foo.bar(9));
    }

    @Test
    public void testCount() {
        assertEquals(6, new Foo().count(new int[] {1, 2, 3}));
    }
}
"""

# ---------------------------------------------------------------------------
# inner: a unit that produces a nested and an anonymous class

REGISTRY_SRC = """package com.example.registry;

import java.util.ArrayList;
import java.util.Collections;
import java.util.Comparator;
import java.util.List;

public class Registry {
    private final List<Entry> entries = new ArrayList<Entry>();

    public void register(String name, int priority) {
        entries.add(new Entry(name, priority));
    }

    public List<String> names() {
        List<Entry> sorted = new ArrayList<Entry>(entries);
        Collections.sort(sorted, new Comparator<Entry>() {
            public int compare(Entry a, Entry b) {
                return a.priority - b.priority;
            }
        });
        List<String> out = new ArrayList<String>();
        for (Entry e : sorted) {
            out.add(e.name);
        }
        return out;
    }

    static final class Entry {
        final String name;
        final int priority;

        Entry(String name, int priority) {
            this.name = name;
            this.priority = priority;
        }
    }
}
"""

REGISTRY_HUNKS = {
    "equiv": [{"at": 23, "delete": 3, "insert": [
        "        for (int i = 0; i < sorted.size(); i++) {",
        "            out.add(sorted.get(i).name);",
        "        }",
    ]}],
    "mutant": [{"at": 19, "delete": 1, "insert": ["                return b.priority - a.priority;"]}],
}

REG = "com/example/registry/Registry"
ENTRY = REG + "$Entry"
ANON = REG + "$1"
LIST = "java/util/List"
ARRAYLIST = "java/util/ArrayList"


def registry_classes(flavor, variant, src):
    major = FLAVORS[flavor]
    inner_entries = [(ANON, None, None, ""), (ENTRY, REG, "Entry", "static final")]
    out = {}

    cf = ClassFile(REG, major=major, flavor=flavor)
    cf.source_file = "Registry.java"
    entries = Fld(REG, "entries", "Ljava/util/List;")
    cf.field("private final", "entries", "Ljava/util/List;",
             signature="Ljava/util/List<Lcom/example/registry/Registry$Entry;>;")
    c = cf.code(3, 1)
    c.label("L0").line(ln(src, "public class Registry")).aload(0).invokespecial(Meth(OBJECT, "<init>", "()V"))
    c.line(ln(src, "private final List<Entry> entries")).aload(0).new(Cls(ARRAYLIST)).dup()
    c.invokespecial(Meth(ARRAYLIST, "<init>", "()V")).putfield(entries).op("return").label("L1")
    c.local(0, "this", "L%s;" % REG, "L0", "L1")
    cf.method("public", "<init>", "()V", c)

    c = cf.code(5, 3)
    c.label("L0").line(ln(src, "entries.add(new Entry")).aload(0).getfield(entries).new(Cls(ENTRY)).dup()
    c.aload(1).iload(2).invokespecial(Meth(ENTRY, "<init>", "(Ljava/lang/String;I)V"))
    c.invokeinterface(IMeth(LIST, "add", "(Ljava/lang/Object;)Z"), 2).pop()
    c.line(ln(src, "entries.add(new Entry") + 1).op("return").label("L1")
    c.local(0, "this", "L%s;" % REG, "L0", "L1").local(1, "name", "Ljava/lang/String;", "L0", "L1")
    c.local(2, "priority", "I", "L0", "L1")
    cf.method("public", "register", "(Ljava/lang/String;I)V", c)

    c = cf.code(4, 5 if variant != "equiv" else 4)
    c.label("L0").line(ln(src, "List<Entry> sorted")).new(Cls(ARRAYLIST)).dup().aload(0).getfield(entries)
    c.invokespecial(Meth(ARRAYLIST, "<init>", "(Ljava/util/Collection;)V")).astore(1).label("L1")
    c.line(ln(src, "Collections.sort")).aload(1).new(Cls(ANON)).dup().aload(0)
    c.invokespecial(Meth(ANON, "<init>", "(Lcom/example/registry/Registry;)V"))
    c.invokestatic(Meth("java/util/Collections", "sort", "(Ljava/util/List;Ljava/util/Comparator;)V"))
    c.line(ln(src, "List<String> out")).new(Cls(ARRAYLIST)).dup().invokespecial(Meth(ARRAYLIST, "<init>", "()V"))
    c.astore(2).label("L2")
    add = IMeth(LIST, "add", "(Ljava/lang/Object;)Z")
    if variant == "equiv":
        c.line(ln(src, "for (int i = 0;")).iconst_0().istore(3).label("L3")
        c.label("Lloop").frame([REG, LIST, LIST, "I"])
        c.iload(3).aload(1).invokeinterface(IMeth(LIST, "size", "()I"), 1).if_icmpge("Lexit")
        c.line(ln(src, "out.add(sorted.get(i).name);")).aload(2).aload(1).iload(3)
        c.invokeinterface(IMeth(LIST, "get", "(I)Ljava/lang/Object;"), 2).checkcast(Cls(ENTRY))
        c.getfield(Fld(ENTRY, "name", "Ljava/lang/String;")).invokeinterface(add, 2).pop()
        c.line(ln(src, "for (int i = 0;")).iinc(3, 1).goto("Lloop")
        c.label("Lexit").frame([REG, LIST, LIST])
        c.local(3, "i", "I", "L3", "Lexit")
    else:
        c.line(ln(src, "for (Entry e : sorted)")).aload(1)
        c.invokeinterface(IMeth(LIST, "iterator", "()Ljava/util/Iterator;"), 1).astore(3)
        c.label("Lloop").frame([REG, LIST, LIST, "java/util/Iterator"])
        c.aload(3).invokeinterface(IMeth("java/util/Iterator", "hasNext", "()Z"), 1).ifeq("Lexit")
        c.aload(3).invokeinterface(IMeth("java/util/Iterator", "next", "()Ljava/lang/Object;"), 1)
        c.checkcast(Cls(ENTRY)).astore(4).label("L3")
        c.line(ln(src, "out.add(e.name);")).aload(2).aload(4).getfield(Fld(ENTRY, "name", "Ljava/lang/String;"))
        c.invokeinterface(add, 2).pop()
        c.line(ln(src, "out.add(e.name);") + 1).goto("Lloop")
        c.label("Lexit").frame([REG, LIST, LIST])
        c.local(4, "e", "L%s;" % ENTRY, "L3", "Lexit")
    c.line(ln(src, "return out;")).aload(2).areturn().label("Lend")
    c.local(0, "this", "L%s;" % REG, "L0", "Lend")
    c.local(1, "sorted", "Ljava/util/List;", "L1", "Lend",
            signature="Ljava/util/List<Lcom/example/registry/Registry$Entry;>;")
    c.local(2, "out", "Ljava/util/List;", "L2", "Lend", signature="Ljava/util/List<Ljava/lang/String;>;")
    cf.method("public", "names", "()Ljava/util/List;", c, signature="()Ljava/util/List<Ljava/lang/String;>;")
    cf.inner_classes(inner_entries)
    out[REG + ".class"] = cf.bytes()

    cf = ClassFile(ENTRY, access="final super", major=major, flavor=flavor)
    cf.source_file = "Registry.java"
    cf.field("final", "name", "Ljava/lang/String;")
    cf.field("final", "priority", "I")
    c = cf.code(2, 3)
    c.label("L0").line(ln(src, "Entry(String name, int priority)")).aload(0)
    c.invokespecial(Meth(OBJECT, "<init>", "()V"))
    c.line(ln(src, "this.name = name;")).aload(0).aload(1).putfield(Fld(ENTRY, "name", "Ljava/lang/String;"))
    c.line(ln(src, "this.priority = priority;")).aload(0).iload(2).putfield(Fld(ENTRY, "priority", "I"))
    c.line(ln(src, "this.priority = priority;") + 1).op("return").label("L1")
    c.local(0, "this", "L%s;" % ENTRY, "L0", "L1").local(1, "name", "Ljava/lang/String;", "L0", "L1")
    c.local(2, "priority", "I", "L0", "L1")
    cf.method("", "<init>", "(Ljava/lang/String;I)V", c)
    cf.inner_classes([(ENTRY, REG, "Entry", "static final")])
    out[ENTRY + ".class"] = cf.bytes()

    cf = ClassFile(ANON, access="super", interfaces=["java/util/Comparator"], major=major, flavor=flavor)
    cf.source_file = "Registry.java"
    this0 = Fld(ANON, "this$0", "Lcom/example/registry/Registry;")
    cf.field("final synthetic", "this$0", "Lcom/example/registry/Registry;")
    c = cf.code(2, 2)
    c.label("L0").line(ln(src, "Collections.sort")).aload(0).aload(1).putfield(this0).aload(0)
    c.invokespecial(Meth(OBJECT, "<init>", "()V")).op("return").label("L1")
    c.local(0, "this", "L%s;" % ANON, "L0", "L1").local(1, "this$0", "L%s;" % REG, "L0", "L1")
    cf.method("", "<init>", "(Lcom/example/registry/Registry;)V", c)

    priority = Fld(ENTRY, "priority", "I")
    c = cf.code(2, 3)
    c.label("L0").line(ln(src, ".priority - "))
    first, second = (2, 1) if variant == "mutant" else (1, 2)
    c.aload(first).getfield(priority).aload(second).getfield(priority).isub().ireturn().label("L1")
    c.local(0, "this", "L%s;" % ANON, "L0", "L1").local(1, "a", "L%s;" % ENTRY, "L0", "L1")
    c.local(2, "b", "L%s;" % ENTRY, "L0", "L1")
    cf.method("public", "compare", "(Lcom/example/registry/Registry$Entry;Lcom/example/registry/Registry$Entry;)I", c)

    c = cf.code(3, 3)
    c.label("L0").line(ln(src, "Collections.sort")).aload(0).aload(1).checkcast(Cls(ENTRY)).aload(2)
    c.checkcast(Cls(ENTRY))
    c.invokevirtual(Meth(ANON, "compare",
                         "(Lcom/example/registry/Registry$Entry;Lcom/example/registry/Registry$Entry;)I"))
    c.ireturn().label("L1")
    c.local(0, "this", "L%s;" % ANON, "L0", "L1")
    cf.method("public bridge synthetic", "compare", "(Ljava/lang/Object;Ljava/lang/Object;)I", c)
    cf.attr("Signature", u2(cf.pool.utf8(
        "Ljava/lang/Object;Ljava/util/Comparator<Lcom/example/registry/Registry$Entry;>;")))
    cf.enclosing_method(REG, "names", "()Ljava/util/List;")
    cf.inner_classes(inner_entries)
    out[ANON + ".class"] = cf.bytes()
    return out


REGISTRY_TEST = """package com.example.registry;

import static org.junit.Assert.assertEquals;
import static org.junit.Assert.assertTrue;

import java.util.Arrays;
import org.junit.Test;

public class RegistryTest {

    @Test
    public void testNamesSorted() {
        final Registry registry = new Registry();
        registry.register("low", 1);
        registry.register("high", 9);
        registry.register("mid", 5);
        assertEquals(Arrays.asList("low", "mid", "high"), registry.names());
    }

    @Test
    public void testEmpty() {
        assertTrue(new Registry().names().isEmpty());
    }
}
"""

# ---------------------------------------------------------------------------
# Fixture table

FIXTURES = {
    "utils": {
        "unit": "org/apache/commons/codec/net/Utils.java",
        "source": UTILS_SRC,
        "hunks": UTILS_HUNKS,
        "classes": utils_classes,
        "lib": (decoder_exception, {"org/apache/commons/codec/DecoderException.java": DECODER_EX_SRC}),
        "tests": {"org/apache/commons/codec/net/UtilsTest.java": UTILS_TEST},
        "test_ids": ["org.apache.commons.codec.net.UtilsTest#testDigit16Valid",
                     "org.apache.commons.codec.net.UtilsTest#testDigit16InvalidMessage"],
        "mutant_effect": {"fail": ["org.apache.commons.codec.net.UtilsTest#testDigit16InvalidMessage"]},
    },
    "singleton": {
        "unit": "org/bukkit/Bukkit.java",
        "source": BUKKIT_SRC,
        "hunks": BUKKIT_HUNKS,
        "classes": bukkit_classes,
        "lib": (server_interface, {"org/bukkit/Server.java": SERVER_SRC}),
        "tests": {"org/bukkit/BukkitTest.java": BUKKIT_TEST},
        "test_ids": ["org.bukkit.BukkitTest#testSetServer", "org.bukkit.BukkitTest#testNameAndVersion",
                     "org.bukkit.BukkitTest#testCannotRedefine"],
        "mutant_effect": {"fail": ["org.bukkit.BukkitTest#testSetServer", "org.bukkit.BukkitTest#testNameAndVersion",
                                   "org.bukkit.BukkitTest#testCannotRedefine"]},
    },
    "fastdate": {
        "unit": "org/apache/commons/lang3/time/FastDatePrinter.java",
        "source": FASTDATE_SRC,
        "hunks": FASTDATE_HUNKS,
        "classes": fastdate_classes,
        "lib": None,
        "tests": {"org/apache/commons/lang3/time/FastDatePrinterTest.java": FASTDATE_TEST},
        "test_ids": ["org.apache.commons.lang3.time.FastDatePrinterTest#testFormat",
                     "org.apache.commons.lang3.time.FastDatePrinterTest#testZoneId",
                     "org.apache.commons.lang3.time.FastDatePrinterTest#testSeconds"],
        "mutant_effect": {"fail": ["org.apache.commons.lang3.time.FastDatePrinterTest#testFormat"]},
    },
    "foo": {
        "unit": "dctest/Foo.java",
        "source": FOO_SRC,
        "hunks": FOO_HUNKS,
        "classes": foo_classes,
        "lib": None,
        "tests": {"dctest/FooTest.java": FOO_TEST},
        "test_ids": ["dctest.FooTest#testFoo", "dctest.FooTest#testBar", "dctest.FooTest#testCount"],
        "mutant_effect": {"hang": ["dctest.FooTest#testFoo"]},
    },
    "inner": {
        "unit": "com/example/registry/Registry.java",
        "source": REGISTRY_SRC,
        "hunks": REGISTRY_HUNKS,
        "classes": registry_classes,
        "lib": None,
        "tests": {"com/example/registry/RegistryTest.java": REGISTRY_TEST},
        "test_ids": ["com.example.registry.RegistryTest#testNamesSorted",
                     "com.example.registry.RegistryTest#testEmpty"],
        "mutant_effect": {"fail": ["com.example.registry.RegistryTest#testNamesSorted"]},
    },
}

EXPECTED = {
    "identity": "StrictlyEquivalent",
    "equiv": "EquivalentModuloInputs",
    "mutant": "Deceptive",
    "crash": "EmptyOutput",
    "syntaxbreak": "SyntacticallyIncorrect",
    "empty": "EmptyOutput",
}


def write(path, data):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(path, mode) as f:
        f.write(data)


def write_json(path, obj):
    write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def build_fixture(root, name, spec):
    froot = os.path.join(root, name)
    if os.path.isdir(froot):
        shutil.rmtree(froot)
    unit = spec["unit"]
    texts = {"original": spec["source"]}
    for v in ("equiv", "mutant"):
        texts[v] = apply_hunks(spec["source"], spec["hunks"][v])
    write(os.path.join(froot, "src", unit), texts["original"])
    for v in ("equiv", "mutant"):
        write(os.path.join(froot, "variants", v, "src", unit), texts[v])
    write_json(os.path.join(froot, "stub-variants.json"), {v: {unit: spec["hunks"][v]} for v in ("equiv", "mutant")})

    catalog = {}
    binaries = {}
    for variant in VARIANTS:
        entry = {"unit": unit, "variant": variant}
        for flavor in FLAVORS:
            rel_root = "classes-%s" % flavor if variant == "original" else "variants/%s/classes-%s" % (variant, flavor)
            classes = spec["classes"](flavor, variant, texts[variant])
            for rel, data in classes.items():
                write(os.path.join(froot, rel_root, rel), data)
            binaries[(variant, flavor)] = classes
            entry[flavor] = {"root": rel_root, "files": sorted(classes)}
        catalog[fnv1a64(texts[variant].encode("utf-8"))] = entry
    write_json(os.path.join(froot, "catalog.json"), {"entries": catalog})

    classpath = []
    if spec["lib"]:
        builder, sources = spec["lib"]
        for rel, data in builder().items():
            write(os.path.join(froot, "lib", rel), data)
        for rel, text in sources.items():
            write(os.path.join(froot, "lib-src", rel), text)
        classpath.append("lib")
    for rel, text in spec["tests"].items():
        write(os.path.join(froot, "tests", rel), text)

    rules = []
    for flavor in FLAVORS:
        original = binaries[("original", flavor)]
        for rel, data in sorted(binaries[("mutant", flavor)].items()):
            if original.get(rel) != data:
                rule = {"class": rel, "hash": fnv1a64(data), "flavor": flavor}
                rule.update(spec["mutant_effect"])
                rules.append(rule)
    write_json(os.path.join(froot, "tests", "behavior.json"), {"rules": rules})
    write_json(os.path.join(froot, "testmap.json"), {"units": {unit: spec["test_ids"]}, "exclude": []})
    mutant = "TestTimeout" if "hang" in spec["mutant_effect"] else "Deceptive"
    expected = {d: {f: (mutant if d == "mutant" else c) for f in FLAVORS} for d, c in EXPECTED.items()}
    write_json(os.path.join(froot, "expected.json"), {"units": {unit: expected}})
    write_json(os.path.join(froot, "project.json"), {"id": name, "source_root": "src", "classpath": classpath,
                                                     "testmap": "testmap.json"})


# ---------------------------------------------------------------------------
# Pair with a block reorder plus interface-to-virtual receiver change

LANG = "org/apache/commons/codec/language/bm/Lang"
RULE = LANG + "$LangRule"

LANG_ORIGINAL_SRC = """package org.apache.commons.codec.language.bm;

import java.util.HashSet;
import java.util.List;
import java.util.Set;

public class Lang {
    private Set<String> languages;
    private List<LangRule> rules;

    public Set<String> guessLanguages(final String input) {
        final Set<String> langs = new HashSet<String>(this.languages);
        for (final LangRule rule : this.rules) {
            if (rule.matches(input)) {
                langs.retainAll(rule.languages);
            }
        }
        return langs;
    }
}
"""

LANG_RECOMPILED_SRC = """package org.apache.commons.codec.language.bm;

import java.util.HashSet;
import java.util.List;
import java.util.Set;

public class Lang {
    private Set<String> languages;
    private List<LangRule> rules;

    public Set<String> guessLanguages(String input) {
        HashSet<String> langs = new HashSet<String>(this.languages);
        for (LangRule rule : this.rules) {
            if (!rule.matches(input)) continue;
            langs.retainAll(rule.languages);
        }
        return langs;
    }
}
"""


def lang_class(recompiled):
    cf = ClassFile(LANG)
    cf.source_file = "Lang.java"
    cf.field("private", "languages", "Ljava/util/Set;", signature="Ljava/util/Set<Ljava/lang/String;>;")
    cf.field("private", "rules", "Ljava/util/List;",
             signature="Ljava/util/List<Lorg/apache/commons/codec/language/bm/Lang$LangRule;>;")
    default_ctor(cf, 7)
    local_type = "java/util/HashSet" if recompiled else "java/util/Set"
    c = cf.code(3, 5)
    c.label("L0").line(12).new(Cls("java/util/HashSet")).dup().aload(0)
    c.getfield(Fld(LANG, "languages", "Ljava/util/Set;"))
    c.invokespecial(Meth("java/util/HashSet", "<init>", "(Ljava/util/Collection;)V")).astore(2).label("L1")
    c.line(13).aload(0).getfield(Fld(LANG, "rules", "Ljava/util/List;"))
    c.invokeinterface(IMeth(LIST, "iterator", "()Ljava/util/Iterator;"), 1).astore(3)
    c.label("Lloop").frame([LANG, STRING, local_type, "java/util/Iterator"])
    c.aload(3).invokeinterface(IMeth("java/util/Iterator", "hasNext", "()Z"), 1).ifeq("Lexit")
    c.aload(3).invokeinterface(IMeth("java/util/Iterator", "next", "()Ljava/lang/Object;"), 1)
    c.checkcast(Cls(RULE)).astore(4).label("L2")
    c.line(14).aload(4).aload(1).invokevirtual(Meth(RULE, "matches", "(Ljava/lang/String;)Z"))
    rule_langs = Fld(RULE, "languages", "Ljava/util/Set;")
    if recompiled:
        c.ifne("Lbody").goto("Lloop")
        c.label("Lbody").frame([LANG, STRING, local_type, "java/util/Iterator", RULE])
        c.line(15).aload(2).aload(4).getfield(rule_langs)
        c.invokevirtual(Meth("java/util/HashSet", "retainAll", "(Ljava/util/Collection;)Z")).pop()
        c.line(16).goto("Lloop")
    else:
        c.ifeq("Lnext")
        c.line(15).aload(2).aload(4).getfield(rule_langs)
        c.invokeinterface(IMeth("java/util/Set", "retainAll", "(Ljava/util/Collection;)Z"), 2).pop()
        c.label("Lnext").frame([LANG, STRING, local_type, "java/util/Iterator"])
        c.line(17).goto("Lloop")
    c.label("Lexit").frame([LANG, STRING, local_type], [])
    c.line(18).aload(2).areturn().label("Lend")
    c.local(0, "this", "L%s;" % LANG, "L0", "Lend").local(1, "input", "Ljava/lang/String;", "L0", "Lend")
    c.local(2, "langs", "L%s;" % local_type, "L1", "Lend")
    c.local(4, "rule", "L%s;" % RULE, "L2", "Lexit" if recompiled else "Lnext")
    cf.method("public", "guessLanguages", "(Ljava/lang/String;)Ljava/util/Set;", c,
              signature="(Ljava/lang/String;)Ljava/util/Set<Ljava/lang/String;>;")
    return cf.bytes()


def build_pair(root):
    proot = os.path.join(root, "pairs", "lang")
    if os.path.isdir(proot):
        shutil.rmtree(proot)
    write(os.path.join(proot, "original", "Lang.java"), LANG_ORIGINAL_SRC)
    write(os.path.join(proot, "original", "Lang.class"), lang_class(False))
    write(os.path.join(proot, "recompiled", "Lang.java"), LANG_RECOMPILED_SRC)
    write(os.path.join(proot, "recompiled", "Lang.class"), lang_class(True))


def main():
    root = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    for name, spec in FIXTURES.items():
        build_fixture(root, name, spec)
    build_pair(root)


if __name__ == "__main__":
    main()
