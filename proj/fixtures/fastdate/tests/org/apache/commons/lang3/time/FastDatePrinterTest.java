package org.apache.commons.lang3.time;

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
