#!/usr/bin/env python3
"""Loads the assembled fixture binaries into a real JVM and checks their behavior.

No Java compiler is needed: each check is a small driver class assembled with
jasm that calls into a fixture and prints the result. The JVM's bytecode
verifier runs on every loaded class, so malformed code or stack maps fail here.

Usage: verify_jre.py [fixtures-root]   (requires a `java` launcher; the jdk4py
package provides one)
"""

import os
import shutil
import subprocess
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from jasm import ClassFile, Cls, Fld, Meth, Str  # noqa: E402

PRINTLN = {
    "I": "(I)V",
    "D": "(D)V",
    "S": "(Ljava/lang/String;)V",
    "O": "(Ljava/lang/Object;)V",
}


def find_java():
    java = shutil.which("java")
    if java:
        return java
    try:
        import jdk4py
        return str(jdk4py.JAVA)
    except ImportError:
        sys.exit("no java launcher found")


def driver(name, body, kind):
    cf = ClassFile(name, major=52)
    c = cf.code(8, 2)
    c.getstatic(Fld("java/lang/System", "out", "Ljava/io/PrintStream;"))
    body(c)
    c.invokevirtual(Meth("java/io/PrintStream", "println", PRINTLN[kind])).op("return")
    cf.method("public static", "main", "([Ljava/lang/String;)V", c)
    return cf.bytes()


def test_server():
    cf = ClassFile("TestServer", interfaces=["org/bukkit/Server"], major=52)
    c = cf.code(1, 1)
    c.aload(0).invokespecial(Meth("java/lang/Object", "<init>", "()V")).op("return")
    cf.method("public", "<init>", "()V", c)
    for name, value in (("getName", "TestServer"), ("getVersion", "1.0")):
        c = cf.code(1, 1)
        c.ldc(Str(value)).areturn()
        cf.method("public", name, "()Ljava/lang/String;", c)
    c = cf.code(1, 1)
    c.ldc(Str("test")).invokestatic(Meth("java/util/logging/Logger", "getLogger",
                                         "(Ljava/lang/String;)Ljava/util/logging/Logger;")).areturn()
    cf.method("public", "getLogger", "()Ljava/util/logging/Logger;", c)
    return cf.bytes()


def checks():
    out = {}

    def utils_valid(c):
        c.bipush(97).invokestatic(Meth("org/apache/commons/codec/net/Utils", "digit16", "(B)I"))

    def utils_invalid(c):
        c.bipush(103).invokestatic(Meth("org/apache/commons/codec/net/Utils", "digit16", "(B)I"))

    out["utils"] = [
        ("org/apache/commons/codec/net/UtilsValid", utils_valid, "I", {"original": "10", "equiv": "10", "mutant": "10"}),
        ("org/apache/commons/codec/net/UtilsInvalid", utils_invalid, "I", {"original": "!radix 16): 103", "equiv": "!radix 16): 103",
                                              "mutant": "!radix 16): g"}),
    ]

    def bukkit(c):
        c.new(Cls("TestServer")).dup().invokespecial(Meth("TestServer", "<init>", "()V"))
        c.invokestatic(Meth("org/bukkit/Bukkit", "setServer", "(Lorg/bukkit/Server;)V"))
        c.invokestatic(Meth("org/bukkit/Bukkit", "getName", "()Ljava/lang/String;"))

    out["singleton"] = [
        ("BukkitSet", bukkit, "S", {"original": "TestServer", "equiv": "TestServer",
                                    "mutant": "!Cannot redefine singleton Server"}),
    ]

    fdp = "org/apache/commons/lang3/time/FastDatePrinter"

    def fdp_format(c):
        c.new(Cls(fdp)).dup().ldc(Str("y-M-d")).invokespecial(Meth(fdp, "<init>", "(Ljava/lang/String;)V"))
        c.new(Cls("java/util/GregorianCalendar")).dup().sipush(2019).iconst_2().bipush(7)
        c.invokespecial(Meth("java/util/GregorianCalendar", "<init>", "(III)V"))
        c.invokevirtual(Meth(fdp, "format", "(Ljava/util/Calendar;)Ljava/lang/String;"))

    def fdp_zone(c):
        c.sipush(265).invokestatic(Meth(fdp, "zoneId", "(I)Ljava/lang/String;"))

    def fdp_seconds(c):
        c.new(Cls(fdp)).dup().ldc(Str("")).invokespecial(Meth(fdp, "<init>", "(Ljava/lang/String;)V"))
        c.sipush(1500).i2l().invokevirtual(Meth(fdp, "seconds", "(J)D"))

    out["fastdate"] = [
        ("FdpFormat", fdp_format, "S", {"original": "2019-03-07", "equiv": "2019-03-07",
                                        "mutant": "!StackOverflowError"}),
        ("FdpZone", fdp_zone, "S", {v: "zone-005" for v in ("original", "equiv", "mutant")}),
        ("FdpSeconds", fdp_seconds, "D", {v: "1.5" for v in ("original", "equiv", "mutant")}),
    ]

    def foo_call(c):
        c.new(Cls("dctest/Foo")).dup().invokespecial(Meth("dctest/Foo", "<init>", "()V"))
        c.iconst_0().iconst_5().invokevirtual(Meth("dctest/Foo", "foo", "(II)I"))

    def foo_bar(c):
        c.new(Cls("dctest/Foo")).dup().invokespecial(Meth("dctest/Foo", "<init>", "()V"))
        c.bipush(9).invokevirtual(Meth("dctest/Foo", "bar", "(I)I"))

    def foo_count(c):
        c.new(Cls("dctest/Foo")).dup().invokespecial(Meth("dctest/Foo", "<init>", "()V"))
        c.iconst_3().newarray(10)
        for i in range(3):
            c.dup().op("iconst_%d" % i).op("iconst_%d" % (i + 1)).iastore()
        c.invokevirtual(Meth("dctest/Foo", "count", "([I)I"))

    out["foo"] = [
        ("FooFoo", foo_call, "I", {"original": "6", "equiv": "6", "mutant": "TIMEOUT"}),
        ("FooBar", foo_bar, "I", {v: "8" for v in ("original", "equiv", "mutant")}),
        ("FooCount", foo_count, "I", {v: "6" for v in ("original", "equiv", "mutant")}),
    ]

    reg = "com/example/registry/Registry"

    def registry(c):
        c.new(Cls(reg)).dup().invokespecial(Meth(reg, "<init>", "()V")).astore(1)
        for name, prio in (("low", 1), ("high", 9), ("mid", 5)):
            c.aload(1).ldc(Str(name)).bipush(prio).invokevirtual(Meth(reg, "register", "(Ljava/lang/String;I)V"))
        c.aload(1).invokevirtual(Meth(reg, "names", "()Ljava/util/List;"))

    out["inner"] = [
        ("RegistryNames", registry, "O", {"original": "[low, mid, high]", "equiv": "[low, mid, high]",
                                          "mutant": "[high, mid, low]"}),
    ]
    return out


def run(java, classpath, main):
    try:
        p = subprocess.run([java, "-Xshare:off", "-cp", os.pathsep.join(classpath), main],
                           capture_output=True, text=True, timeout=5)
    except subprocess.TimeoutExpired:
        return "TIMEOUT"
    if p.returncode != 0:
        return "!" + p.stderr
    return p.stdout.strip()


def main():
    root = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    java = find_java()
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        drivers = os.path.join(tmp, "drivers")
        os.makedirs(drivers)
        with open(os.path.join(drivers, "TestServer.class"), "wb") as f:
            f.write(test_server())
        for fixture, items in checks().items():
            froot = os.path.join(root, fixture)
            for main_name, body, kind, expected in items:
                path = os.path.join(drivers, main_name + ".class")
                os.makedirs(os.path.dirname(path), exist_ok=True)
                with open(path, "wb") as f:
                    f.write(driver(main_name, body, kind))
                for variant, want in expected.items():
                    for flavor in ("javac", "ecj"):
                        classes = "classes-%s" % flavor if variant == "original" else \
                            "variants/%s/classes-%s" % (variant, flavor)
                        cp = [os.path.join(froot, classes), os.path.join(froot, "lib"), drivers]
                        got = run(java, cp, main_name.replace("/", "."))
                        ok = (want[1:] in got) if want.startswith("!") else (got == want)
                        status = "ok  " if ok else "FAIL"
                        failures += not ok
                        print("%s %-9s %-14s %-8s %-5s %s" % (status, fixture, main_name, variant, flavor,
                                                             got.splitlines()[0] if got else ""))
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
