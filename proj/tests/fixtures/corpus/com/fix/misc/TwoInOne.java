package com.fix.misc;

public class TwoInOne {
    public int first() {
        return 1;
    }
}

class Second {
    public int second() {
        return 2;
    }
}
