package com.example;

public class Calculator {
    private final int offset;

    public Calculator(int offset) {
        this.offset = offset;
    }

    public int add(int a, int b) {
        return a + b + offset;
    }

    public int divide(int a, int b) {
        if (b == 0) {
            throw new ArithmeticException("division by zero");
        }
        return a / b;
    }

    public int clamp(int value, int lo, int hi) {
        if (value < lo) {
            return lo;
        }
        if (value > hi) {
            return hi;
        }
        return value;
    }
}
