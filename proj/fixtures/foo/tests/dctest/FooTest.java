package dctest;

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
