from calc import Calc

CALC = Calc()
TOTAL = CALC.add(10, 20)


def mean(values):
    if not values:
        return 0.0
    return sum(values) / len(values)


class Summary:
    def __init__(self, values):
        self.values = list(values)
        self.avg = mean(self.values)

    def spread(self):
        return max(self.values) - min(self.values)
