package com.fix.data;

public class Config {
    private String home;
    private int retries;
    private static int instances;

    public String getHome() {
        return home;
    }

    public void setHome(String home) {
        this.home = home;
    }

    public int effectiveRetries() {
        int r = retries;
        if (r < 0) {
            r = 0;
        } else if (r > 10) {
            r = 10;
        }
        return r;
    }
}
