package com.fix.misc;

import java.util.ArrayList;
import java.util.List;

public class Generic<T> {
    private List<T> items = new ArrayList<T>();

    public void push(T item) {
        items.add(item);
    }

    public T head() {
        return items.isEmpty() ? null : items.get(0);
    }
}
