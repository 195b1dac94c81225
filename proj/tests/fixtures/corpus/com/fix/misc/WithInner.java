package com.fix.misc;

public class WithInner {
    private int total;

    public static class Counter {
        private int n;

        public int bump() {
            n = n + 1;
            return n;
        }
    }

    public int tally(int times) {
        Counter c = new Counter();
        for (int i = 0; i < times; i++) {
            total = c.bump();
        }
        return total;
    }
}
