"""Command-line entry point."""
import sys

from calc import Calc


def run(args):
    calc = Calc()
    if not args:
        return 0
    # note: calc.add is used below
    result = calc.add(1, 2)
    label = "add(1, 2)"
    print(label, result)
    return result


if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
