#!/usr/bin/env python3
"""Flatten MATPOWER distribution cases into plain matrix-literal .m files.

Recent MATPOWER releases store some feeders in Ohms / kW / kVA and convert
them with trailing MATLAB code. The solver's case reader only understands
literal matrices, so this script evaluates those conversions and writes the
per-unit result.

usage: convert_matpower.py <matpower/data dir> <output dir>
"""
import math
import re
import sys
from pathlib import Path

CASES = {
    "case18": None,
    "case33bw": "ohm_kw",
    "case69": "ohm_kw",
    "case141": "ohm_kva_pf",
}

BUS_COLS = "bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin".split()
GEN_COLS = "bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin".split()
BRANCH_COLS = "fbus tbus r x b rateA rateB rateC ratio angle status angmin angmax".split()


def matrix(text, name):
    m = re.search(r"mpc\." + name + r"\s*=\s*\[(.*?)\];", text, re.S)
    rows = []
    for line in m.group(1).splitlines():
        line = line.split("%")[0].strip().rstrip(";").strip()
        if line:
            rows.append([float(t) for t in line.split()])
    return rows


def scalar(text, name):
    return float(re.search(r"mpc\." + name + r"\s*=\s*([0-9.eE+-]+)", text).group(1))


def fmt(v):
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def main(src, dst):
    for name, conv in CASES.items():
        text = (Path(src) / f"{name}.m").read_text()
        header = []
        for line in text.splitlines()[1:]:
            if not line.startswith("%"):
                break
            header.append(line)
        base = scalar(text, "baseMVA")
        bus = matrix(text, "bus")
        gen = matrix(text, "gen")
        branch = matrix(text, "branch")
        if conv is not None:
            zbase = (bus[0][9] * 1e3) ** 2 / (base * 1e6)
            for br in branch:
                br[2] /= zbase
                br[3] /= zbase
            for b in bus:
                b[2] /= 1e3
                b[3] /= 1e3
            if conv == "ohm_kva_pf":
                pf = 0.85
                for b in bus:
                    b[3] = b[2] * math.sin(math.acos(pf))
                    b[2] = b[2] * pf
        out = [f"function mpc = {name}"] + header
        out.append("%")
        out.append("%   Flattened to per-unit literals (branch r/x in p.u., loads in MW/MVAr).")
        out.append("")
        out.append("mpc.version = '2';")
        out.append(f"mpc.baseMVA = {fmt(base)};")
        for label, cols, rows, keep in (
            ("bus", BUS_COLS, bus, 13),
            ("gen", GEN_COLS, gen, 10),
            ("branch", BRANCH_COLS, branch, 13),
        ):
            out.append("")
            out.append("%\t" + "\t".join(cols))
            out.append(f"mpc.{label} = [")
            for r in rows:
                out.append("\t" + "\t".join(fmt(v) for v in r[:keep]) + ";")
            out.append("];")
        (Path(dst) / f"{name}.m").write_text("\n".join(out) + "\n")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
