package com.fix.flow;

public class Nester {
    public int deep(int a, int b, int c) {
        int acc = 0;
        if (a > 0) {
            for (int i = 0; i < a; i++) {
                while (b > 0) {
                    if (c > 0) {
                        acc += 1;
                    }
                    b--;
                }
            }
        }
        return acc;
    }
}
