"""Regenerate ``src/lowdisc/data/sobol_directions.txt``.

Dev-only helper: reads the primitive polynomials and initial direction
integers that ship with scipy and writes them in the plain-text
``j s a m_1 ... m_s`` layout read by :func:`lowdisc.seqgen.read_direction_file`.

    python scripts/make_direction_file.py [max_dim]
"""
import os
import sys

import numpy as np
import scipy.stats


def main(max_dim=1024):
    path = os.path.join(os.path.dirname(scipy.stats.__file__), "_sobol_direction_numbers.npz")
    table = np.load(path)
    poly, vinit = table["poly"], table["vinit"]
    out = os.path.join(os.path.dirname(__file__), "..", "src", "lowdisc", "data", "sobol_directions.txt")
    with open(out, "w") as fh:
        fh.write("# Sobol' direction numbers: j s a m_1 ... m_s\n")
        fh.write("# dimension 1 is the identity matrix and has no line\n")
        for j in range(2, max_dim + 1):
            p = int(poly[j - 1])
            s = p.bit_length() - 1
            a = (p >> 1) & ((1 << (s - 1)) - 1)
            m = " ".join(str(int(v)) for v in vinit[j - 1, :s])
            fh.write(f"{j} {s} {a} {m}\n")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 1024)
