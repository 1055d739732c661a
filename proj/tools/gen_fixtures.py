#!/usr/bin/env python3
"""Writes the fixture tree: scenario suites, control-policy cases, frontiers.

Deterministic, no randomness: run it after editing and commit the result.
Layout:
  fixtures/frontiers/   baseline.json, alt1..alt5.json
  fixtures/suite66/     case-01.json .. case-66.json + manifest.json
  fixtures/cp/          cp1..cp4.json + manifest.json
  fixtures/subsets/desk10/  manifest.json (10-case slice of suite66)
"""
import json
import math
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

# Dense infusion schedules: the per-step base amount is W0 / (10 (T-1)),
# rounded up to a whole unit, and grows 3 percent per year starting from the
# base amount at t = 1. See the notes on case 57.
DENSE_ROUND_UP = True
DENSE_GROWTH_FROM_ZERO = True  # amount(t) = base * 1.03^(t-1)


def dense_infusions(T, W0):
    base = W0 / (10.0 * (T - 1))
    if DENSE_ROUND_UP:
        base = float(math.ceil(base))
    out = []
    for t in range(1, T):
        e = (t - 1) if DENSE_GROWTH_FROM_ZERO else t
        out.append([t, base * 1.03**e])
    return out


def scenario(name, T, W0, goals, infusions=None, notes=None, count=15):
    """goals: list of (t, [[cost, util], ...]) entries."""
    s = {
        "name": name,
        "horizon": T,
        "step_years": 1.0,
        "initial_wealth": W0,
        "infusions": infusions or [],
        "goals": [{"t": t, "options": opts} for t, opts in goals],
        "portfolios": {"frontier": "../frontiers/baseline.json", "count": count},
    }
    if notes:
        s["notes"] = notes
    return s


def single(t, cost, util):
    return (t, [[cost, util]])


# ---- the 33 base cases ----

def base_cases():
    cases = {}
    for i, (T, cost) in enumerate(
        [(10, 150), (10, 200), (10, 400), (40, 600), (40, 1200), (40, 2400),
         (100, 50000), (100, 500000), (100, 20000000)], start=1):
        cases[i] = (T, 100, [single(T, cost, 1)])
    cases[10] = (3, 100, [single(2, 75, 0.9), single(3, 75, 1)])
    cases[11] = (20, 100, [single(10, 200, 1.3), single(20, 500, 1)])
    cases[12] = (20, 100, [single(15, 200, 1.3), single(20, 300, 1)])
    cases[13] = (35, 100, [single(5, 50, 1), single(25, 500, 0.5), single(35, 1000, 1)])
    cases[14] = (60, 100, [single(15, 300, 0.7), single(30, 6000, 1.2),
                           single(45, 5000, 0.2), single(60, 20000, 1)])
    cases[15] = (25, 100, [single(3, 30, 0.2), single(5, 70, 0.3), single(8, 70, 0.3),
                           single(25, 1000, 1)])
    cases[16] = (40, 100, [single(10, 150, 1.5), single(30, 400, 1), single(35, 500, 1),
                           single(40, 600, 1)])
    for i, cost in [(17, 15), (18, 25), (19, 50), (20, 75)]:
        cases[i] = (20, 100, [single(t, cost, 1) for t in range(2, 21, 2)])
    cases[21] = (60, 100, [single(t, 20, 1) for t in range(1, 61)])
    cases[22] = (60, 100, [single(t, t, 1) for t in range(1, 61)])
    cases[23] = (60, 100, [single(t, t, 100 + t) for t in range(1, 61)])
    cases[24] = (60, 100, [single(t, t, 100 - t) for t in range(1, 61)])
    cases[25] = (60, 100, [single(t, 60 - t / 2, 1) for t in range(1, 61)])
    cases[26] = (60, 100, [single(t, 60 - t / 2, 100 + t) for t in range(1, 61)])
    cases[27] = (60, 100, [single(t, 60 - t / 2, 100 - t) for t in range(1, 61)])
    cases[28] = (30, 100, [single(3, 35, 1.5), single(6, 35, 1.3), single(9, 5, 0.4),
                           single(12, 50, 1), single(15, 15, 0.7), single(18, 5, 0.3),
                           single(21, 45, 0.6), single(24, 120, 0.9),
                           single(27, 170, 1.1), single(30, 160, 1)])
    ladder16 = [(1, 10.8, 11), (2, 11.66, 12), (3, 12.60, 13), (4, 13.60, 14),
                (5, 14.69, 15), (6, 15.87, 16), (7, 17.14, 17), (8, 18.50, 18),
                (9, 19.99, 19), (10, 21.59, 20), (11, 23.32, 21), (12, 25.18, 22),
                (13, 27.20, 23), (14, 29.37, 24), (15, 31.72, 25), (16, 34.25, 26)]
    picks = {29: ([16], 12.0), 30: ([8, 16], 21.63), 31: ([4, 8, 12, 16], 38.99),
             32: (list(range(2, 17, 2)), 70.27), 33: (list(range(1, 17)), 126.67)}
    for i, (times, W0) in picks.items():
        cases[i] = (16, W0, [single(t, c, u) for (t, c, u) in ladder16 if t in times])
    return cases


# case -> added single infusion [t, amount]
SINGLE_INFUSIONS = {
    34: [1, 10], 36: [1, 10], 38: [6, 12], 40: [21, 19], 42: [27, 22], 44: [6, 12],
    46: [13, 15], 48: [11, 14], 50: [10, 13], 52: [11, 14], 54: [38, 31], 56: [41, 34],
    58: [45, 38], 60: [49, 43], 62: [14, 3], 64: [15, 6], 66: [16, 21],
}

NOTES = {
    32: "cost 11.66 at t=2: comma-separated figure read as a decimal point",
    33: "cost 23.32 at t=11: comma-separated figure read as a decimal point",
    57: ("dense infusions: base W0/(10(T-1)) rounded up to a whole unit, "
         "growing 3 percent per year from t=1; the unrounded variant misses "
         "the reference optimum for this case"),
}


def write_json(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n")


def gen_suite66():
    bases = base_cases()
    names = []
    for i in range(1, 67):
        if i <= 33:
            T, W0, goals = bases[i]
            infusions = []
        else:
            T, W0, goals = bases[i - 33]
            if i in SINGLE_INFUSIONS:
                infusions = [SINGLE_INFUSIONS[i]]
            else:
                infusions = dense_infusions(T, W0)
        name = f"case-{i:02d}"
        s = scenario(name, T, W0, goals, infusions, NOTES.get(i))
        write_json(ROOT / "suite66" / f"{name}.json", s)
        names.append(f"{name}.json")
    write_json(ROOT / "suite66" / "manifest.json", {"name": "suite66", "cases": names})


# ---- concurrent / partial-goal control cases ----

def gen_cp():
    base = ROOT / "cp"
    cp1 = scenario(
        "cp1", 10, 110,
        [
            (5, [[40, 60]]),                                      # all or nothing
            (5, [[20, 25], [35, 50]]),                            # one partial level
            (5, [[10, 8], [18, 16], [25, 22], [30, 28]]),         # three partials
            (10, [[60, 85], [100, 150]]),
        ],
        notes="three concurrent goals at t=5 expand to 30 raw combinations",
    )
    write_json(base / "cp1.json", cp1)

    goals2 = []
    for t in range(5, 56, 5):
        goals2.append((t, [[22, 110], [32, 125]]))                # car, partial + full
    for t in range(2, 59, 4):
        goals2.append((t, [[7, 22], [12, 40]]))                   # trip, partial + full
    goals2.append((18, [[100, 120], [150, 200]]))                 # college
    goals2.append((30, [[180, 220], [250, 300]]))                 # house
    for t in range(1, 60):
        goals2.append((t, [[3, 6]]))                              # yearly small goal
    cp2 = scenario("cp2", 60, 50, goals2, [[t, 8] for t in range(1, 60)],
                   notes="household plan: cars, trips, college, house, yearly goals")
    write_json(base / "cp2.json", cp2)

    goals3 = [(t, [[22, 110], [32, 125]]) for t in range(5, 56, 5)]
    cp3 = scenario("cp3", 60, 25, goals3, [[t, 1] for t in range(1, 60)],
                   notes="cars every five years, two purchase levels")
    write_json(base / "cp3.json", cp3)

    goals4 = list(goals3)
    for t in range(10, 51, 10):
        goals4.append((t, [[t / 4 + 5, 55], [t / 2 + 10, 100]]))  # trip, partial + full
    cp4 = scenario("cp4", 60, 25, goals4, [[t, 1] for t in range(1, 60)],
                   notes="cars plus trips with partial levels")
    write_json(base / "cp4.json", cp4)

    write_json(base / "manifest.json",
               {"name": "cp", "cases": ["cp1.json", "cp2.json", "cp3.json", "cp4.json"]})


# ---- efficient frontiers ----

def quad_frontier(name, mu0, s0, mu1, s1, coeff=None, n_anchors=25):
    """sigma^2 = s0^2 + a (mu - mu0)^2, vertex at the minimum-volatility point."""
    a = coeff if coeff is not None else (s1 * s1 - s0 * s0) / (mu1 - mu0) ** 2
    anchors = []
    for i in range(n_anchors):
        mu = mu0 + (mu1 - mu0) * i / (n_anchors - 1)
        anchors.append([mu, math.sqrt(s0 * s0 + a * (mu - mu0) ** 2)])
    return {"name": name, "anchors": anchors, "count": 15}


def gen_frontiers():
    base = ROOT / "frontiers"
    write_json(base / "baseline.json",
               quad_frontier("baseline", 0.0526, 0.0485, 0.0886, None,
                             coeff=27.645763888))
    alts = {
        "alt1": (0.050, 0.035, 0.100, 0.16),
        "alt2": (0.065, 0.055, 0.115, 0.21),
        "alt3": (0.070, 0.070, 0.130, 0.26),
        "alt4": (0.040, 0.040, 0.095, 0.22),
        "alt5": (0.048, 0.045, 0.080, 0.15),
    }
    for name, (mu0, s0, mu1, s1) in alts.items():
        write_json(base / f"{name}.json", quad_frontier(name, mu0, s0, mu1, s1))


DESK10 = [2, 11, 13, 17, 19, 20, 30, 44, 50, 52]


def gen_subsets():
    write_json(ROOT / "subsets" / "desk10" / "manifest.json",
               {"name": "desk10",
                "cases": [f"../../suite66/case-{i:02d}.json" for i in DESK10]})


if __name__ == "__main__":
    gen_suite66()
    gen_cp()
    gen_frontiers()
    gen_subsets()
    print(f"fixtures written under {ROOT}")
