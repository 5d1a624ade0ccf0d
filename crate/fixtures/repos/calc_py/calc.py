class Calc:
    """Accumulating calculator."""

    precision = 2
    def add(self, a, b):
        total = a + b
        self.last = total
        if total > 10 ** self.precision:
            total = round(total, self.precision)
        return total

    def mul(self, a, b):
        product = 0
        for _ in range(b):
            product = self.add(product, a)
        self.last = product
        if product < 0:
            return -product
        else:
            return product

    def describe(self):
        return f"Calc(last={self.last})"

    def reset(self):
        self.last = None

    def help(self):
        hint = "call add(a, b) or mul(a, b)"
        return hint


def main():
    calc = Calc()
    print(calc.mul(3, 4))
    print(calc.describe())
    calc.reset()
    value = calc.add(2, 3)
    # calc.add(9, 9) is not a call, just a comment
    return value
