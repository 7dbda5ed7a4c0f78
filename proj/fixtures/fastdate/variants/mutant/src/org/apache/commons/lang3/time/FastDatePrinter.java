package org.apache.commons.lang3.time;

import java.io.IOException;
import java.io.Serializable;
import java.util.Calendar;

public class FastDatePrinter implements Serializable {

    private static final long serialVersionUID = 1L;

    private static final double MILLIS_PER_SECOND = 1000.0;

    private static final String[] ZONE_IDS = {
        "zone-000", "zone-001", "zone-002", "zone-003", "zone-004", "zone-005", "zone-006", "zone-007", "zone-008", "zone-009",
        "zone-010", "zone-011", "zone-012", "zone-013", "zone-014", "zone-015", "zone-016", "zone-017", "zone-018", "zone-019",
        "zone-020", "zone-021", "zone-022", "zone-023", "zone-024", "zone-025", "zone-026", "zone-027", "zone-028", "zone-029",
        "zone-030", "zone-031", "zone-032", "zone-033", "zone-034", "zone-035", "zone-036", "zone-037", "zone-038", "zone-039",
        "zone-040", "zone-041", "zone-042", "zone-043", "zone-044", "zone-045", "zone-046", "zone-047", "zone-048", "zone-049",
        "zone-050", "zone-051", "zone-052", "zone-053", "zone-054", "zone-055", "zone-056", "zone-057", "zone-058", "zone-059",
        "zone-060", "zone-061", "zone-062", "zone-063", "zone-064", "zone-065", "zone-066", "zone-067", "zone-068", "zone-069",
        "zone-070", "zone-071", "zone-072", "zone-073", "zone-074", "zone-075", "zone-076", "zone-077", "zone-078", "zone-079",
        "zone-080", "zone-081", "zone-082", "zone-083", "zone-084", "zone-085", "zone-086", "zone-087", "zone-088", "zone-089",
        "zone-090", "zone-091", "zone-092", "zone-093", "zone-094", "zone-095", "zone-096", "zone-097", "zone-098", "zone-099",
        "zone-100", "zone-101", "zone-102", "zone-103", "zone-104", "zone-105", "zone-106", "zone-107", "zone-108", "zone-109",
        "zone-110", "zone-111", "zone-112", "zone-113", "zone-114", "zone-115", "zone-116", "zone-117", "zone-118", "zone-119",
        "zone-120", "zone-121", "zone-122", "zone-123", "zone-124", "zone-125", "zone-126", "zone-127", "zone-128", "zone-129",
        "zone-130", "zone-131", "zone-132", "zone-133", "zone-134", "zone-135", "zone-136", "zone-137", "zone-138", "zone-139",
        "zone-140", "zone-141", "zone-142", "zone-143", "zone-144", "zone-145", "zone-146", "zone-147", "zone-148", "zone-149",
        "zone-150", "zone-151", "zone-152", "zone-153", "zone-154", "zone-155", "zone-156", "zone-157", "zone-158", "zone-159",
        "zone-160", "zone-161", "zone-162", "zone-163", "zone-164", "zone-165", "zone-166", "zone-167", "zone-168", "zone-169",
        "zone-170", "zone-171", "zone-172", "zone-173", "zone-174", "zone-175", "zone-176", "zone-177", "zone-178", "zone-179",
        "zone-180", "zone-181", "zone-182", "zone-183", "zone-184", "zone-185", "zone-186", "zone-187", "zone-188", "zone-189",
        "zone-190", "zone-191", "zone-192", "zone-193", "zone-194", "zone-195", "zone-196", "zone-197", "zone-198", "zone-199",
        "zone-200", "zone-201", "zone-202", "zone-203", "zone-204", "zone-205", "zone-206", "zone-207", "zone-208", "zone-209",
        "zone-210", "zone-211", "zone-212", "zone-213", "zone-214", "zone-215", "zone-216", "zone-217", "zone-218", "zone-219",
        "zone-220", "zone-221", "zone-222", "zone-223", "zone-224", "zone-225", "zone-226", "zone-227", "zone-228", "zone-229",
        "zone-230", "zone-231", "zone-232", "zone-233", "zone-234", "zone-235", "zone-236", "zone-237", "zone-238", "zone-239",
        "zone-240", "zone-241", "zone-242", "zone-243", "zone-244", "zone-245", "zone-246", "zone-247", "zone-248", "zone-249",
        "zone-250", "zone-251", "zone-252", "zone-253", "zone-254", "zone-255", "zone-256", "zone-257", "zone-258", "zone-259",
    };

    private final String pattern;

    public FastDatePrinter(final String pattern) {
        this.pattern = pattern;
    }

    public String format(final Calendar calendar) {
        return applyRules(calendar, new StringBuffer(pattern.length() + 16)).toString();
    }

    protected StringBuffer applyRules(final Calendar calendar, final StringBuffer buf) {
        return this.applyRules(calendar, buf);
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
