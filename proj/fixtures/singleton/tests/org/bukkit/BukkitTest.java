package org.bukkit;

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
