package com.example.registry;

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
        for (int i = 0; i < sorted.size(); i++) {
            out.add(sorted.get(i).name);
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
