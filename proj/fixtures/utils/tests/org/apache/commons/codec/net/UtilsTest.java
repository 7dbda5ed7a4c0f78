package org.apache.commons.codec.net;

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
