package org.apache.commons.codec.net;

import org.apache.commons.codec.DecoderException;

class Utils {

    private static final int RADIX = 16;

    static int digit16(final byte b) throws DecoderException {
        final int i = Character.digit((char) b, RADIX);
        if (i == -1) {
            throw new DecoderException("Invalid URL encoding: not a valid digit (radix " + RADIX + "): " + (char) b);
        }
        return i;
    }
}
