#!/usr/bin/env python3
"""Generate the synthesized 123-node ZIP feeder and its loading scenarios.

The feeder is NOT the IEEE 123-node system; it is a deterministic radial
network of similar size with one load type (P, I or Z) per load bus.
Constant-impedance loads are sized so that lambda_Z = 60 pushes the
current-folded sweep iteration past its stability limit (spectral radius
above 1); constant-power and constant-current loads are ten times lighter so
the combined (7, 50, 60) condition still has a solution.

usage: make_case123z.py <output dir>
"""
import sys
from pathlib import Path

import numpy as np

N_NODES = 123
SEED = 123
LOAD_SCALE = 1.6
KIND_SCALE = {"P": 0.1, "I": 0.1, "Z": 1.0}


def build():
    rng = np.random.default_rng(SEED)
    parent = [-1]
    depth = [0]
    trunk = [0]
    # main trunk of 24 segments, laterals hang off trunk and each other
    for k in range(1, 25):
        parent.append(k - 1)
        depth.append(k)
        trunk.append(k)
    while len(parent) < N_NODES:
        k = len(parent)
        if rng.random() < 0.55:
            p = k - 1
        else:
            p = int(rng.integers(0, k))
        parent.append(p)
        depth.append(depth[p] + 1)
    branches = []
    for k in range(1, N_NODES):
        r = rng.uniform(0.004, 0.012)
        x = r * rng.uniform(0.8, 1.6)
        if k < 25:
            r *= 0.5
            x *= 0.5
        branches.append((parent[k], k, r, x))
    loads = []
    for k in range(1, N_NODES):
        if rng.random() < 0.3:
            loads.append((k, "none", 0.0, 0.0))
            continue
        kind = rng.choice(["P", "I", "Z"], p=[0.5, 0.2, 0.3])
        p = rng.uniform(0.002, 0.010) * LOAD_SCALE * KIND_SCALE[str(kind)]
        q = p * rng.uniform(0.3, 0.6)
        loads.append((k, kind, p, q))
    return branches, loads


def dlf(branches, n):
    a = np.zeros((n, len(branches)))
    yb = np.zeros(len(branches), complex)
    for b, (f, t, r, x) in enumerate(branches):
        a[f, b] += 1
        a[t, b] -= 1
        yb[b] = 1 / complex(r, x)
    at = a[1:, :]
    return np.linalg.inv(at @ np.diag(yb) @ at.T)


def report(branches, loads):
    d = dlf(branches, N_NODES)
    yz = np.zeros(N_NODES - 1, complex)
    for k, kind, p, q in loads:
        if kind == "Z":
            yz[k - 1] = complex(p, -q)
    for lam in (1, 40, 60):
        rho = max(abs(np.linalg.eigvals(d @ np.diag(lam * yz))))
        print(f"lambda_Z={lam}: sweep iteration spectral radius {rho:.3f}")


def c(v):
    return f"[{float(np.real(v))!r}, {float(np.imag(v))!r}]"


def write(out, branches, loads):
    lines = [
        "# Synthesized 123-node radial feeder with a mixed ZIP load model.",
        "# Not the IEEE 123-node test system; generated by scripts/make_case123z.py.",
        "",
        "[meta]",
        'name = "case123z"',
        "base_mva = 10.0",
        "base_kv = 4.16",
        "slack_id = 0",
        "slack_v0_re = 1.0",
        "slack_v0_im = 0.0",
        "",
        "[[buses]]",
        "id = 0",
        "load_P = [0.0, 0.0]",
        "load_I = [0.0, 0.0]",
        "load_Z = [0.0, 0.0]",
        "shunt = [0.0, 0.0]",
    ]
    for k, kind, p, q in loads:
        s = complex(p, q)
        lp = s if kind == "P" else 0
        li = np.conj(s) if kind == "I" else 0
        lz = np.conj(s) if kind == "Z" else 0
        lines += [
            "",
            "[[buses]]",
            f"id = {k}",
            f"load_P = {c(lp)}",
            f"load_I = {c(li)}",
            f"load_Z = {c(lz)}",
            "shunt = [0.0, 0.0]",
        ]
    for f, t, r, x in branches:
        lines += [
            "",
            "[[branches]]",
            f"from = {f}",
            f"to = {t}",
            f"series_impedance = [{r!r}, {x!r}]",
            "total_charging = [0.0, 0.0]",
            "in_service = true",
        ]
    Path(out, "case123z.toml").write_text("\n".join(lines) + "\n")
    scen = {
        "p-medium": (4, 1, 1),
        "p-high": (7, 1, 1),
        "i-medium": (1, 20, 1),
        "i-high": (1, 50, 1),
        "z-medium": (1, 1, 40),
        "z-high": (1, 1, 60),
        "medium": (4, 20, 40),
        "high": (7, 50, 60),
    }
    sdir = Path(out, "scenarios")
    sdir.mkdir(exist_ok=True)
    for name, (lp, li, lz) in scen.items():
        Path(sdir, f"case123z-{name}.toml").write_text(
            "[scenario]\n"
            f'name = "case123z-{name}"\n'
            f"lambda_P = {float(lp)!r}\n"
            f"lambda_I = {float(li)!r}\n"
            f"lambda_Z = {float(lz)!r}\n"
        )


if __name__ == "__main__":
    br, ld = build()
    report(br, ld)
    write(sys.argv[1], br, ld)
