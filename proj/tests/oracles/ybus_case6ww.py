#!/usr/bin/env python3
"""Independent oracle for the 6-bus admittance matrix.

Applies the admittance-matrix entry rules term by term to the raw
Wood-Wollenberg 6-bus branch list (r, x, total line charging b):

    Y[m][n] = -y_mn              for each branch (m,n)
    Y[n][n] = ybar_nn + sum of series admittances of branches at n
    Y[m][n] = 0                  otherwise

Series admittance y = 1/(r + jx); line-end shunts are j*b/2 at each end
(they enter the flow matrices, not this matrix). Bus shunts are all zero
in this case. Output is a frozen C++ fixture pasted into test_grid.cpp,
plus the data/case6ww.grid case file.
"""

# from, to, r, x, b_total  (per unit, 1-indexed buses)
BRANCHES = [
    (1, 2, 0.10, 0.20, 0.04),
    (1, 4, 0.05, 0.20, 0.04),
    (1, 5, 0.08, 0.30, 0.06),
    (2, 3, 0.05, 0.25, 0.06),
    (2, 4, 0.05, 0.10, 0.02),
    (2, 5, 0.10, 0.30, 0.04),
    (2, 6, 0.07, 0.20, 0.05),
    (3, 5, 0.12, 0.26, 0.05),
    (3, 6, 0.02, 0.10, 0.02),
    (4, 5, 0.20, 0.40, 0.08),
    (5, 6, 0.10, 0.30, 0.08),
]
N = 6


def main() -> None:
    Y = [[complex(0.0, 0.0) for _ in range(N)] for _ in range(N)]
    for f, t, r, x, _b in BRANCHES:
        y = 1.0 / complex(r, x)
        Y[f - 1][t - 1] -= y
        Y[t - 1][f - 1] -= y
        Y[f - 1][f - 1] += y
        Y[t - 1][t - 1] += y
    # bus shunts are zero for this case; nothing to add on the diagonal

    print("// generated by tests/oracles/ybus_case6ww.py")
    print(f"constexpr double kCase6wwYbus[{N}][{N}][2] = {{")
    for m in range(N):
        entries = ", ".join(f"{{{Y[m][n].real:.17g}, {Y[m][n].imag:.17g}}}" for n in range(N))
        print(f"    {{{entries}}},")
    print("};")

    print()
    print("---- data/case6ww.grid ----")
    print("# IEEE 6-bus test system (Wood-Wollenberg), 11 lines, per unit.")
    print("# Branch order defines line numbering (lines 1-7 = first seven rows).")
    print("psse-grid 1")
    print(f"buses {N}")
    for f, t, r, x, b in BRANCHES:
        y = 1.0 / complex(r, x)
        sh = b / 2.0
        print(
            f"branch {f} {t} {y.real:.17g} {y.imag:.17g} "
            f"0 {sh:.17g} 0 {sh:.17g}"
        )


if __name__ == "__main__":
    main()
