"""Test child for the external-model line protocol.

Usage: oracle_child.py MODE [ARG]

Modes: const C | index | linear a0,a1,... | product | softmax | short | extra |
garbage | die | silent
"""

import math
import sys


def main():
    mode = sys.argv[1]
    arg = sys.argv[2] if len(sys.argv) > 2 else ""
    if mode == "die":
        return 3
    if mode == "softmax":
        print("CLASSES a,b,c", flush=True)
    for line in sys.stdin:
        line = line.strip()
        if not line.startswith("PREDICT "):
            continue
        m = int(line.split()[1])
        rows = [sys.stdin.readline().strip().split(",") for _ in range(m)]
        if mode == "silent":
            continue
        out = []
        for i, cells in enumerate(rows):
            x = [float(c) for c in cells if _is_float(c)]
            if mode == "const":
                out.append(repr(float(arg)))
            elif mode == "index":
                out.append(repr(float(i)))
            elif mode == "linear":
                coef = [float(c) for c in arg.split(",")]
                out.append(repr(sum(a * b for a, b in zip(coef, x))))
            elif mode == "product":
                out.append(repr(x[0] * x[1]))
            elif mode == "softmax":
                z = [x[0], x[1], 0.0]
                e = [math.exp(v) for v in z]
                s = sum(e)
                out.append(",".join(repr(v / s) for v in e))
            elif mode in ("short", "extra"):
                out.append("1.0")
            elif mode == "garbage":
                out.append("not-a-number")
        if mode == "short":
            out = out[:-1]
        if mode == "extra":
            out.append("1.0")
        sys.stdout.write("".join(o + "\n" for o in out))
        sys.stdout.flush()
        if mode == "short":
            return 0
    return 0


def _is_float(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


if __name__ == "__main__":
    sys.exit(main())
