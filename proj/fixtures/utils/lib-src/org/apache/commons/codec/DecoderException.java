package org.apache.commons.codec;

public class DecoderException extends Exception {

    private static final long serialVersionUID = 1L;

    public DecoderException(final String message) {
        super(message);
    }
}
