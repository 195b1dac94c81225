package com.fix.dep;

public class Base {
    protected int level;

    public int depth() {
        return 1;
    }

    public void shared() {
        level++;
    }
}
