#!/usr/bin/env python3
"""Build the reduced-network classical model of the New England 39-bus system.

Solves the AC power flow of the 39-bus network, converts loads to constant
admittances, attaches each generator through its transient reactance, and
Kron-reduces the network onto the ten internal generator nodes. Generator 1
(bus 39) is the infinite bus; generators 2..10 sit at buses 31..38 and 30.

Writes data/ne39.json, which is the parameter file read by the simulator.
The shipped file is the standard case39 operating point (bus 39 as slack).
There the three generator-8 presets behave as bounded (eq32, damped),
bounded (eq33, undamped) and coherent swing instability (eq34, undamped).
--load-scale and --gen-scale produce lighter or heavier operating points.

    python3 scripts/build_ne39.py                       # data/ne39.json
    python3 scripts/build_ne39.py --load-scale 0.8 --gen-scale 0.9 \
        --out /tmp/ne39_light.json
"""

import argparse
import json
import math

import numpy as np

BASE_MVA = 100.0

# bus: (type, Pd, Qd, Gs, Bs, Vm)   type 1=PQ, 2=PV, 3=slack
BUS = {
    1: (1, 97.6, 44.2, 0, 0, 1.0),
    2: (1, 0, 0, 0, 0, 1.0),
    3: (1, 322, 2.4, 0, 0, 1.0),
    4: (1, 500, 184, 0, 0, 1.0),
    5: (1, 0, 0, 0, 0, 1.0),
    6: (1, 0, 0, 0, 0, 1.0),
    7: (1, 233.8, 84, 0, 0, 1.0),
    8: (1, 522, 176.6, 0, 0, 1.0),
    9: (1, 6.5, -66.6, 0, 0, 1.0),
    10: (1, 0, 0, 0, 0, 1.0),
    11: (1, 0, 0, 0, 0, 1.0),
    12: (1, 8.53, 88, 0, 0, 1.0),
    13: (1, 0, 0, 0, 0, 1.0),
    14: (1, 0, 0, 0, 0, 1.0),
    15: (1, 320, 153, 0, 0, 1.0),
    16: (1, 329, 32.3, 0, 0, 1.0),
    17: (1, 0, 0, 0, 0, 1.0),
    18: (1, 158, 30, 0, 0, 1.0),
    19: (1, 0, 0, 0, 0, 1.0),
    20: (1, 680, 103, 0, 0, 1.0),
    21: (1, 274, 115, 0, 0, 1.0),
    22: (1, 0, 0, 0, 0, 1.0),
    23: (1, 247.5, 84.6, 0, 0, 1.0),
    24: (1, 308.6, -92.2, 0, 0, 1.0),
    25: (1, 224, 47.2, 0, 0, 1.0),
    26: (1, 139, 17, 0, 0, 1.0),
    27: (1, 281, 75.5, 0, 0, 1.0),
    28: (1, 206, 27.6, 0, 0, 1.0),
    29: (1, 283.5, 26.9, 0, 0, 1.0),
    30: (2, 0, 0, 0, 0, 1.0499),
    31: (3, 9.2, 4.6, 0, 0, 0.982),
    32: (2, 0, 0, 0, 0, 0.9841),
    33: (2, 0, 0, 0, 0, 0.9972),
    34: (2, 0, 0, 0, 0, 1.0123),
    35: (2, 0, 0, 0, 0, 1.0494),
    36: (2, 0, 0, 0, 0, 1.0636),
    37: (2, 0, 0, 0, 0, 1.0275),
    38: (2, 0, 0, 0, 0, 1.0265),
    39: (2, 1104, 250, 0, 0, 1.03),
}

# (from, to, r, x, b, tap)
BRANCH = [
    (1, 2, 0.0035, 0.0411, 0.6987, 0),
    (1, 39, 0.001, 0.025, 0.75, 0),
    (2, 3, 0.0013, 0.0151, 0.2572, 0),
    (2, 25, 0.007, 0.0086, 0.146, 0),
    (2, 30, 0, 0.0181, 0, 1.025),
    (3, 4, 0.0013, 0.0213, 0.2214, 0),
    (3, 18, 0.0011, 0.0133, 0.2138, 0),
    (4, 5, 0.0008, 0.0128, 0.1342, 0),
    (4, 14, 0.0008, 0.0129, 0.1382, 0),
    (5, 6, 0.0002, 0.0026, 0.0434, 0),
    (5, 8, 0.0008, 0.0112, 0.1476, 0),
    (6, 7, 0.0006, 0.0092, 0.113, 0),
    (6, 11, 0.0007, 0.0082, 0.1389, 0),
    (6, 31, 0, 0.025, 0, 1.07),
    (7, 8, 0.0004, 0.0046, 0.078, 0),
    (8, 9, 0.0023, 0.0363, 0.3804, 0),
    (9, 39, 0.001, 0.025, 1.2, 0),
    (10, 11, 0.0004, 0.0043, 0.0729, 0),
    (10, 13, 0.0004, 0.0043, 0.0729, 0),
    (10, 32, 0, 0.02, 0, 1.07),
    (12, 11, 0.0016, 0.0435, 0, 1.006),
    (12, 13, 0.0016, 0.0435, 0, 1.006),
    (13, 14, 0.0009, 0.0101, 0.1723, 0),
    (14, 15, 0.0018, 0.0217, 0.366, 0),
    (15, 16, 0.0009, 0.0094, 0.171, 0),
    (16, 17, 0.0007, 0.0089, 0.1342, 0),
    (16, 19, 0.0016, 0.0195, 0.304, 0),
    (16, 21, 0.0008, 0.0135, 0.2548, 0),
    (16, 24, 0.0003, 0.0059, 0.068, 0),
    (17, 18, 0.0007, 0.0082, 0.1319, 0),
    (17, 27, 0.0013, 0.0173, 0.3216, 0),
    (19, 20, 0.0007, 0.0138, 0, 1.06),
    (19, 33, 0.0007, 0.0142, 0, 1.07),
    (20, 34, 0.0009, 0.018, 0, 1.009),
    (21, 22, 0.0008, 0.014, 0.2565, 0),
    (22, 23, 0.0006, 0.0096, 0.1846, 0),
    (22, 35, 0, 0.0143, 0, 1.025),
    (23, 24, 0.0022, 0.035, 0.361, 0),
    (23, 36, 0.0005, 0.0272, 0, 1.0),
    (25, 26, 0.0032, 0.0323, 0.531, 0),
    (25, 37, 0.0006, 0.0232, 0, 1.025),
    (26, 27, 0.0014, 0.0147, 0.2396, 0),
    (26, 28, 0.0043, 0.0474, 0.7802, 0),
    (26, 29, 0.0057, 0.0625, 1.029, 0),
    (28, 29, 0.0014, 0.0151, 0.249, 0),
    (29, 38, 0.0008, 0.0156, 0, 1.025),
]

# generator number -> (bus, Pg MW, H s, x'd pu on 100 MVA)
GEN = {
    1: (39, 1000.0, 500.0, 0.006),
    2: (31, 677.871, 30.3, 0.0697),
    3: (32, 650.0, 35.8, 0.0531),
    4: (33, 632.0, 28.6, 0.0436),
    5: (34, 508.0, 26.0, 0.132),
    6: (35, 650.0, 34.8, 0.05),
    7: (36, 560.0, 26.4, 0.049),
    8: (37, 540.0, 24.3, 0.057),
    9: (38, 830.0, 34.5, 0.057),
    10: (30, 250.0, 42.0, 0.031),
}


def scale_operating_point(load_factor, gen_factor):
    """Scale every load by load_factor and generators 2..10 by gen_factor.

    Bus 39 (the infinite bus) is the power-flow slack, so it absorbs the
    resulting imbalance and its generation is an output of the solve.
    """
    for k, row in BUS.items():
        kind = 3 if k == 39 else (2 if row[0] == 3 else row[0])
        BUS[k] = (kind, row[1] * load_factor, row[2] * load_factor) + row[3:]
    for g, row in GEN.items():
        factor = 1.0 if g == 1 else gen_factor
        GEN[g] = (row[0], row[1] * factor) + row[2:]


def build_ybus(n):
    y = np.zeros((n, n), dtype=complex)
    for f, t, r, x, b, tap in BRANCH:
        i, j = f - 1, t - 1
        ys = 1.0 / complex(r, x)
        a = tap if tap else 1.0
        y[i, i] += (ys + 0.5j * b) / (a * a)
        y[j, j] += ys + 0.5j * b
        y[i, j] -= ys / a
        y[j, i] -= ys / a
    for k, (_, _, _, gs, bs, _) in BUS.items():
        y[k - 1, k - 1] += complex(gs, bs) / BASE_MVA
    return y


def power_flow(ybus, tol=1e-12, max_iter=30):
    n = len(BUS)
    vm = np.array([BUS[k][5] for k in range(1, n + 1)])
    va = np.zeros(n)
    p_spec = np.array([-BUS[k][1] for k in range(1, n + 1)]) / BASE_MVA
    q_spec = np.array([-BUS[k][2] for k in range(1, n + 1)]) / BASE_MVA
    for _, (bus, pg, _, _) in GEN.items():
        p_spec[bus - 1] += pg / BASE_MVA
    kinds = [BUS[k][0] for k in range(1, n + 1)]
    pv = [i for i in range(n) if kinds[i] == 2]
    pq = [i for i in range(n) if kinds[i] == 1]
    ang = pv + pq
    for _ in range(max_iter):
        v = vm * np.exp(1j * va)
        s = v * np.conj(ybus @ v)
        mis = np.concatenate([(s.real - p_spec)[ang], (s.imag - q_spec)[pq]])
        if np.max(np.abs(mis)) < tol:
            return v
        ibus = ybus @ v
        d_va = 1j * np.diag(v) @ np.conj(np.diag(ibus) - ybus @ np.diag(v))
        d_vm = np.diag(v) @ np.conj(ybus @ np.diag(v / vm)) + np.conj(np.diag(ibus)) @ np.diag(v / vm)
        jac = np.block([
            [d_va.real[np.ix_(ang, ang)], d_vm.real[np.ix_(ang, pq)]],
            [d_va.imag[np.ix_(pq, ang)], d_vm.imag[np.ix_(pq, pq)]],
        ])
        dx = np.linalg.solve(jac, -mis)
        va[ang] += dx[: len(ang)]
        vm[pq] += dx[len(ang):]
    raise RuntimeError("power flow did not converge")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--damping", type=float, default=0.005)
    ap.add_argument("--fb", type=float, default=60.0)
    ap.add_argument("--load-scale", type=float, default=1.0,
                    help="scaling of all bus loads")
    ap.add_argument("--gen-scale", type=float, default=1.0,
                    help="scaling of the scheduled output of generators 2..10")
    ap.add_argument("--out", default="data/ne39.json")
    args = ap.parse_args()

    scale_operating_point(args.load_scale, args.gen_scale)
    n = len(BUS)
    ybus = build_ybus(n)
    v = power_flow(ybus)
    s_bus = v * np.conj(ybus @ v)

    # Loads become constant admittances at the solved bus voltages.
    y_load = ybus.copy()
    for k, (_, pd, qd, _, _, _) in BUS.items():
        s_load = complex(pd, qd) / BASE_MVA
        y_load[k - 1, k - 1] += np.conj(s_load) / abs(v[k - 1]) ** 2

    gens = sorted(GEN)
    ng = len(gens)
    e = np.zeros(ng, dtype=complex)
    y_gen = np.zeros(ng, dtype=complex)
    for a, g in enumerate(gens):
        bus, _, _, xd = GEN[g]
        i = bus - 1
        s_load = complex(BUS[bus][1], BUS[bus][2]) / BASE_MVA
        s_gen = s_bus[i] + s_load
        cur = np.conj(s_gen / v[i])
        e[a] = v[i] + 1j * xd * cur
        y_gen[a] = 1.0 / (1j * xd)

    # Extended network: internal nodes first, then the 39 buses.
    y_ext = np.zeros((ng + n, ng + n), dtype=complex)
    y_ext[ng:, ng:] = y_load
    for a, g in enumerate(gens):
        i = ng + GEN[g][0] - 1
        y_ext[a, a] += y_gen[a]
        y_ext[i, i] += y_gen[a]
        y_ext[a, i] -= y_gen[a]
        y_ext[i, a] -= y_gen[a]
    y_aa = y_ext[:ng, :ng]
    y_ab = y_ext[:ng, ng:]
    y_bb = y_ext[ng:, ng:]
    y_red = y_aa - y_ab @ np.linalg.solve(y_bb, y_ext[ng:, :ng])

    g_mat = y_red.real
    b_mat = y_red.imag
    emag = np.abs(e)
    # Angles are measured from the infinite bus (generator 1).
    delta = np.angle(e) - np.angle(e[0])

    pe = np.zeros(ng)
    for i in range(ng):
        acc = emag[i] ** 2 * g_mat[i, i]
        for j in range(ng):
            if j != i:
                dij = delta[i] - delta[j]
                acc += emag[i] * emag[j] * (g_mat[i, j] * math.cos(dij) + b_mat[i, j] * math.sin(dij))
        pe[i] = acc

    dyn = list(range(1, ng))
    doc = {
        "name": "New England 39-bus, classical model, network reduced to generator internal nodes",
        "load_scale": args.load_scale,
        "gen_scale": args.gen_scale,
        "f_b": args.fb,
        "labels": [f"g{gens[i]}" for i in dyn],
        "H": [GEN[gens[i]][2] for i in dyn],
        "D": [args.damping] * len(dyn),
        "P_m": [float(pe[i]) for i in dyn],
        "E": [float(emag[i]) for i in dyn],
        "G": [[float(g_mat[i, j]) for j in dyn] for i in dyn],
        "B": [[float(b_mat[i, j]) for j in dyn] for i in dyn],
        "infinite_bus": {
            "label": f"g{gens[0]}",
            "E": float(emag[0]),
            "delta": 0.0,
            "G": [float(g_mat[i, 0]) for i in dyn],
            "B": [float(b_mat[i, 0]) for i in dyn],
        },
        "delta_guess": [float(delta[i]) for i in dyn],
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    print("wrote", args.out)
    print("E  =", np.round(emag, 4))
    print("d  =", np.round(delta, 4))
    print("Pm =", np.round(pe, 4))


if __name__ == "__main__":
    main()
