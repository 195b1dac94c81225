package com.fix.flow;

public class Loopy {
    public int sumTo(int n) {
        int acc = 0;
        for (int i = 0; i <= n; i++) {
            acc += i;
        }
        return acc;
    }

    public int firstDivisor(int n) {
        for (int d = 2; d < n; d++) {
            if (n % d == 0) {
                return d;
            }
        }
        return n;
    }

    public int search(int[][] grid, int want) {
        outer:
        for (int r = 0; r < grid.length; r++) {
            for (int c = 0; c < grid[r].length; c++) {
                if (grid[r][c] == want) {
                    break outer;
                }
                if (grid[r][c] < 0) {
                    continue;
                }
            }
        }
        return want;
    }

    public int spin(int n) {
        int i = 0;
        do {
            i++;
        } while (i < n);
        return i;
    }
}
