def fmt_total(calc, a, b):
    return "%d" % calc.add(a, b)


def fmt_product(calc, a, b):
    return "%d" % calc.mul(a, b)
