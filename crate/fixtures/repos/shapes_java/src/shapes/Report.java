package shapes;

import java.util.List;

/** Builds a text report; mentions new Calc() only in this comment. */
public class Report {
    private final Calc calc = new Calc();
    private final String title = "new Calc() and add(1, 2)";

    public String render(List<Circle> circles) {
        StringBuilder out = new StringBuilder(title);
        for (Circle c : circles) {
            out.append(c.area()).append('\n');
        }
        // calc.add(1, 2) is not called here
        out.append(calc.add(circles.size(), 1));
        return out.toString();
    }

    public static Report standard() {
        return new Report();
    }
}
