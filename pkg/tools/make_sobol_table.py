"""Regenerate the packaged Sobol direction-number table.

Writes the first ``NDIMS`` rows of the Joe & Kuo primitive-polynomial table
(here taken from SciPy's bundled copy of the same data) in the classic text
format ``d s a m_1 ... m_s``.  Dimension 1 is the van der Corput sequence and
carries no table row.
"""

import os

import numpy as np
import scipy.stats._sobol as _sobol

NDIMS = 520
OUT = os.path.join(
    os.path.dirname(__file__), "..", "src", "permqmc", "data",
    "sobol_direction_numbers.txt",
)

HEADER = """\
# Sobol direction-number initialisation table (Joe & Kuo primitive
# polynomials and initial direction integers).
#
# Format: one row per sequence dimension d >= 2, whitespace separated:
#   d  s  a  m_1 m_2 ... m_s
# where s is the degree of the primitive polynomial over GF(2),
# a encodes its interior coefficients (bit i of a, counting from the
# most significant of s-1 bits, is the coefficient of x^(s-i)), and
# m_1..m_s are the odd initial direction integers. Dimension 1 (not
# listed) uses the trivial polynomial with all m_k = 1.
"""


def main() -> None:
    data = np.load(
        os.path.join(os.path.dirname(_sobol.__file__), "_sobol_direction_numbers.npz")
    )
    poly = data["poly"]
    vinit = data["vinit"]
    lines = [HEADER]
    for dim in range(2, NDIMS + 1):
        p = int(poly[dim - 1])
        s = p.bit_length() - 1
        a = (p - (1 << s) - 1) >> 1
        ms = " ".join(str(int(m)) for m in vinit[dim - 1, :s])
        lines.append(f"{dim} {s} {a} {ms}")
    with open(OUT, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {OUT}: dimensions 2..{NDIMS}")


if __name__ == "__main__":
    main()
