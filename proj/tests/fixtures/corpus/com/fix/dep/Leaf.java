package com.fix.dep;

public class Leaf extends Mid {
    public int depth() {
        return 3;
    }
}
