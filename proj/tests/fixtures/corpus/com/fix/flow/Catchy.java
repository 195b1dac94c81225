package com.fix.flow;

public class Catchy {
    public int parse(String text) {
        try {
            return Integer.parseInt(text);
        } catch (NumberFormatException e) {
            return -1;
        } catch (NullPointerException e) {
            return -2;
        } finally {
            note();
        }
    }

    public void rethrow(String text) {
        if (text == null) {
            throw new IllegalArgumentException("null text");
        }
    }

    private void note() {
    }
}
