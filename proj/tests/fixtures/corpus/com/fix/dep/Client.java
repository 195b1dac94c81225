package com.fix.dep;

public class Client {
    public int run() {
        ServiceA a = new ServiceA();
        ServiceB b = new ServiceB();
        a.wire(b);
        int first = a.ping();
        int direct = b.pongs;
        Leaf leaf = new Leaf();
        return first + direct + leaf.depth();
    }
}
