package com.example;

public final class TextKit {
    private TextKit() {}

    public static String repeat(String part, int times) {
        StringBuilder sb = new StringBuilder();
        for (int i = 0; i < times; i++) {
            sb.append(part);
        }
        return sb.toString();
    }

    public static boolean isBlank(String text) {
        return text == null || text.trim().isEmpty();
    }
}
