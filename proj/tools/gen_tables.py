#!/usr/bin/env python3
# Copyright (c) 2026 the civc authors
# SPDX-License-Identifier: Apache-2.0
#
# Regenerates the frozen numeric tables compiled into libcivc:
#   src/phi_table.inc  - standard normal CDF, 4097 samples over z in [-8, 8],
#                        stored as round(Phi(z) * 2^32) clamped to uint32.
#   src/dct_tables.inc - orthonormal DCT-II basis matrices for N = 1..8.
#
# The tables are checked in so that builds do not depend on the host libm;
# the entropy coder interpolates phi_table with integer arithmetic, which
# keeps payloads byte-identical across platforms.

import math
import sys

PHI_POINTS = 4096  # intervals; table has PHI_POINTS + 1 entries
PHI_ZMAX = 8.0


def phi(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def emit_phi(out):
    out.write("// Generated by tools/gen_tables.py; do not edit by hand.\n")
    out.write("// round(Phi(z) * 2^32) for z = -8 + 16*i/4096, i = 0..4096.\n")
    out.write("static const uint32_t kPhiTable[%d] = {\n" % (PHI_POINTS + 1,))
    vals = []
    for i in range(PHI_POINTS + 1):
        z = -PHI_ZMAX + 2.0 * PHI_ZMAX * i / PHI_POINTS
        v = int(round(phi(z) * 4294967296.0))
        v = max(0, min(0xFFFFFFFF, v))
        vals.append(v)
    for i in range(0, len(vals), 8):
        out.write("    " + ", ".join("0x%08xu" % v for v in vals[i:i + 8]) + ",\n")
    out.write("};\n")


def emit_dct(out):
    out.write("// Generated by tools/gen_tables.py; do not edit by hand.\n")
    out.write("// Orthonormal DCT-II basis rows: kDctBasis[N-1][k][n],\n")
    out.write("// D[k][n] = c_k * cos(pi*(2n+1)*k/(2N)), c_0 = sqrt(1/N), c_k = sqrt(2/N).\n")
    out.write("static const double kDctBasis[8][8][8] = {\n")
    for n_size in range(1, 9):
        out.write("    {  // N = %d\n" % n_size)
        for k in range(8):
            row = []
            for n in range(8):
                if k < n_size and n < n_size:
                    c = math.sqrt(1.0 / n_size) if k == 0 else math.sqrt(2.0 / n_size)
                    v = c * math.cos(math.pi * (2 * n + 1) * k / (2.0 * n_size))
                else:
                    v = 0.0
                row.append(v)
            out.write("        {" + ", ".join("%.17g" % v for v in row) + "},\n")
        out.write("    },\n")
    out.write("};\n")


def main():
    with open("src/phi_table.inc", "w") as f:
        emit_phi(f)
    with open("src/dct_tables.inc", "w") as f:
        emit_dct(f)
    print("wrote src/phi_table.inc and src/dct_tables.inc")


if __name__ == "__main__":
    sys.exit(main())
