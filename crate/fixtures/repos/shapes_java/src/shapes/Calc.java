package shapes;

public class Calc {
    public int add(int a, int b) {
        return a + b;
    }

    public int twice(int a) {
        return add(a, a);
    }
}
