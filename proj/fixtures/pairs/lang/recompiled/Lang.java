package org.apache.commons.codec.language.bm;

import java.util.HashSet;
import java.util.List;
import java.util.Set;

public class Lang {
    private Set<String> languages;
    private List<LangRule> rules;

    public Set<String> guessLanguages(String input) {
        HashSet<String> langs = new HashSet<String>(this.languages);
        for (LangRule rule : this.rules) {
            if (!rule.matches(input)) continue;
            langs.retainAll(rule.languages);
        }
        return langs;
    }
}
