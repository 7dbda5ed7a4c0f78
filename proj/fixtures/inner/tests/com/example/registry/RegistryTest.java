package com.example.registry;

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
