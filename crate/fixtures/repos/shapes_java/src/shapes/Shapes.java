package shapes;

import java.util.ArrayList;
import java.util.List;

public final class Shapes {
    private Shapes() {
    }

    public static void main(String[] args) {
        List<Circle> circles = new ArrayList<>();
        circles.add(new Circle(1.0));
        circles.add(new Circle(2.5));
        Square square = new Square(3.0);
        System.out.println(square.area());
        System.out.println(Report.standard().render(circles));
    }
}
