package com.fix.data;

class Tiny { int v; }
