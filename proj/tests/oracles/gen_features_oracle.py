#!/usr/bin/env python3
"""Reference values for the feature layer (discounts, simulators, states).

A from-scratch implementation of the documented semantics: greedy spend
simulation with goals scanned by (utility desc, time asc), infusions eligible
for same-or-later goals and drained most-recent-first, wealth last. Values
printed here are frozen into tests/test_features.cpp.

Uses plain python floats and math.exp so arithmetic matches the C++ engine's
IEEE doubles; the z grid comes from scipy and differs from the engine's
inverse CDF by ~1e-15, so tests compare at 1e-12.
"""
import math

from scipy.stats import norm

H = 1.0


def zgrid(n=11):
    return [float(norm.ppf((i + 0.5) / n)) for i in range(n)]


def factor(mu, sigma, z, d):
    t = H * d
    return math.exp(-(mu - 0.5 * sigma * sigma) * t - sigma * z * math.sqrt(t))


def aggregate(v):
    starts = [0, 1, 2, 3, 4, 6, 10]
    ends = [1, 2, 3, 4, 6, 10, len(v) if len(v) > 10 else 10]
    out = []
    for s, e in zip(starts, ends):
        out.append(sum(v[s:e]) if s < len(v) else 0.0)
    return out


def spend_run(costs, utils, infusions, f, wealth, forced, include_current):
    """One greedy pass. forced = (cost, utility) paid first at offset 0."""
    goals = [d for d in range(len(costs)) if costs[d] > 0.0]
    goals.sort(key=lambda d: (-utils[d], d))
    inf = [(d, infusions[d]) for d in range(len(infusions)) if infusions[d] != 0.0]
    inf_disc = [amt * f[d] for d, amt in inf]
    w = wealth
    total = 0.0

    def try_pay(d, c):
        nonlocal w
        last = 0
        while last < len(inf) and inf[last][0] <= d:
            last += 1
        avail = w + sum(inf_disc[:last])
        if avail < c:
            return False
        rem = c
        for k in range(last - 1, -1, -1):
            if rem <= 0.0:
                break
            take = min(inf_disc[k], rem)
            inf_disc[k] -= take
            rem -= take
        if rem > 0.0:
            w -= rem
        return True

    if forced is not None:
        if try_pay(0, forced[0] * f[0]):
            total += forced[1]
    for d in goals:
        if not include_current and d == 0:
            continue
        if try_pay(d, costs[d] * f[d]):
            total += utils[d]
    return total


def logistic(x):
    return 1.0 / (1.0 + math.exp(-x))


def rows(mus, sigmas, z, L):
    return {(p, i): [factor(mus[p], sigmas[p], z[i], d) for d in range(L)]
            for p in range(len(mus)) for i in range(len(z))}


def g_sim(costs, utils, infusions, wealth, mus, sigmas, z):
    L = len(costs)
    fr = rows(mus, sigmas, z, L)
    cur = (costs[0], utils[0])
    max_take = max_skip = None
    for p in range(len(mus)):
        take = skip = 0.0
        for i in range(len(z)):
            take += spend_run(costs, utils, infusions, fr[(p, i)], wealth, cur, False)
            skip += spend_run(costs, utils, infusions, fr[(p, i)], wealth, None, False)
        take /= len(z)
        skip /= len(z)
        max_take = take if max_take is None or take > max_take else max_take
        max_skip = skip if max_skip is None or skip > max_skip else max_skip
    if max_take <= 0.0:
        return 0.5
    return logistic((max_take - max_skip) / max_take)


def p_sim(costs, utils, infusions, wealth, mus, sigmas, z):
    P = len(mus)
    if P <= 1:
        return 0.0
    L = len(costs)
    fr = rows(mus, sigmas, z, L)
    best, best_val = 0, None
    for p in range(P):
        v = 0.0
        for i in range(len(z)):
            v += spend_run(costs, utils, infusions, fr[(p, i)], wealth, None, True)
        v /= len(z)
        if best_val is None or v > best_val:
            best_val, best = v, p
    return best / (P - 1)


def goal_signals(costs, utils, infusions, front, wealth, mus, sigmas, z):
    if len(front) == 2:
        return (g_sim(costs, utils, infusions, wealth, mus, sigmas, z),
                p_sim(costs, utils, infusions, wealth, mus, sigmas, z), 1, 0)
    P, n, m, L = len(mus), len(z), len(front), len(costs)
    fr = rows(mus, sigmas, z, L)
    E = [[0.0] * m for _ in range(P)]
    for p in range(P):
        for i in range(n):
            for q in range(m):
                E[p][q] += spend_run(costs, utils, infusions, fr[(p, i)], wealth,
                                     front[q], False)
        for q in range(m):
            E[p][q] /= n
    col_max = [max(E[p][q] for p in range(P)) for q in range(m)]
    best = 0
    for q in range(1, m):
        if col_max[q] > col_max[best]:
            best = q
    second = 1 if best == 0 else 0
    for q in range(m):
        if q != best and col_max[q] > col_max[second]:
            second = q
    g = logistic((col_max[best] - col_max[second]) / col_max[best]) if col_max[best] > 0 else 0.5
    bp, be = 0, E[0][0]
    for p in range(P):
        for q in range(m):
            if E[p][q] > be:
                be, bp = E[p][q], p
    return g, (bp / (P - 1) if P > 1 else 0.0), best, second


# ---- probe scenario ----
MUS = [0.05, 0.07, 0.09]
SIGMAS = [0.05, 0.11, 0.17]
T = 6
INFUSIONS = [0.0, 8.0, 0.0, 12.0, 0.0, 0.0, 0.0]


def pareto(opts):
    opts = opts + [(0.0, 0.0)]
    opts.sort(key=lambda o: (o[0], -o[1]))
    front = []
    for c, u in opts:
        if not front or u > front[-1][1]:
            if front and c == front[-1][0]:
                continue
            front.append((c, u))
    return front


FRONT4 = pareto([(15, 20), (35, 70), (30, 45), (45, 65), (65, 115)])
FULL_COSTS = [0.0, 0.0, 40.0, 0.0, FRONT4[-1][0], 0.0, 50.0]
FULL_UTILS = [0.0, 0.0, 60.0, 0.0, FRONT4[-1][1], 0.0, 80.0]


def horizon(t):
    costs = FULL_COSTS[t:]
    utils = FULL_UTILS[t:]
    inf = list(INFUSIONS[t:])
    inf[0] = 0.0
    return costs, utils, inf


def discount_sum(vals, p, z):
    return sum(v * factor(MUS[p], SIGMAS[p], z, d) for d, v in enumerate(vals))


def cost_blocks(vals, p, z):
    disc = [v * factor(MUS[p], SIGMAS[p], z, d) for d, v in enumerate(vals)]
    a = aggregate(disc)
    s = sum(a)
    return [x / s for x in a] if s > 0 else [0.0] * 7


def state_pre(t, wealth, z):
    costs, utils, inf = horizon(t)
    P = len(MUS)
    den_min = discount_sum(costs, 0, -1.0)
    den_max = discount_sum(costs, P - 1, 1.0)
    sv = {
        "t_norm": t / T,
        "w_min": wealth / den_min if den_min > 0 else 10.0,
        "w_max": wealth / den_max if den_max > 0 else 10.0,
    }
    us = sum(utils)
    sv["u_agg"] = [x / us for x in aggregate(utils)] if us > 0 else [0.0] * 7
    sv["c_min"] = cost_blocks(costs, P - 1, 1.0)
    sv["c_max"] = cost_blocks(costs, 0, -1.0)
    front = {2: [(0.0, 0.0), (40.0, 60.0)], 4: FRONT4, 6: [(0.0, 0.0), (50.0, 80.0)]}.get(t)
    if front:
        g, p, _, _ = goal_signals(costs, utils, inf, front, wealth, MUS, SIGMAS, z)
        sv["g"], sv["p"] = g, p
    else:
        sv["g"], sv["p"] = 0.0, p_sim(costs, utils, inf, wealth, MUS, SIGMAS, z)
    return sv


def pr(tag, v):
    if isinstance(v, list):
        print(f"{tag} = {{{', '.join(f'{x:.17g}' for x in v)}}}")
    else:
        print(f"{tag} = {v:.17g}")


def main():
    z = zgrid()
    print("// generated by tests/oracles/gen_features_oracle.py")
    print("front at t=4:", FRONT4)

    pr("discount_factor(0.07, 0.11, z=0.5, tau=3)", factor(0.07, 0.11, 0.5, 3))
    pr("discount_factor(0.05, 0.05, z=-1, tau=1)", factor(0.05, 0.05, -1.0, 1))
    vals = [10.0, 0.0, 25.0, 40.0]
    pr("discount_sum([10,0,25,40], p=2, z=1)", discount_sum(vals, 2, 1.0))
    pr("discount_vec[3] same args", 40.0 * factor(MUS[2], SIGMAS[2], 1.0, 3))

    agg_in = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0, 5.0, 8.0, 9.0]
    pr("aggregate(13 values)", aggregate(agg_in))

    # simulators on the probe scenario
    c2, u2, i2 = horizon(2)
    pr("g_sim(t=2, W=70)", g_sim(c2, u2, i2, 70.0, MUS, SIGMAS, z))
    pr("p_sim(t=2, W=70)", p_sim(c2, u2, i2, 70.0, MUS, SIGMAS, z))
    pr("g_sim(t=2, W=20)", g_sim(c2, u2, i2, 20.0, MUS, SIGMAS, z))

    c4, u4, i4 = horizon(4)
    g, p, b, s = goal_signals(c4, u4, i4, FRONT4, 30.0, MUS, SIGMAS, z)
    print(f"goal_signals(t=4, W=30): g={g:.17g} p={p:.17g} best={b} second={s}")
    g, p, b, s = goal_signals(c4, u4, i4, FRONT4, 200.0, MUS, SIGMAS, z)
    print(f"goal_signals(t=4, W=200): g={g:.17g} p={p:.17g} best={b} second={s}")

    c3, u3, i3 = horizon(3)
    pr("p_sim(t=3, W=95)", p_sim(c3, u3, i3, 95.0, MUS, SIGMAS, z))

    for tag, t, w in [("t=2 W=70", 2, 70.0), ("t=0 W=100", 0, 100.0),
                      ("t=6 W=45", 6, 45.0)]:
        sv = state_pre(t, w, z)
        print(f"state_pre {tag}:")
        for k in ["t_norm", "w_min", "w_max", "g", "p"]:
            pr(f"  {k}", sv[k])
        for k in ["u_agg", "c_min", "c_max"]:
            pr(f"  {k}", sv[k])

    # post-goal state at t=2 after paying 40: wealth 30
    sv = state_pre(2, 30.0, z)
    pr("state_post t=2 W=30 w_min", sv["w_min"])
    pr("state_post t=2 W=30 w_max", sv["w_max"])
    pr("state_post t=2 W=30 p", sv["p"])

    # inflation closed form and scaling
    kappa, theta, sig = 0.6, 0.02, 0.015
    def ibar(i_curr, tau):
        if tau <= 0:
            return 1.0
        a = (1.0 - math.exp(-kappa * tau)) / kappa
        b = (theta - sig * sig / (2 * kappa * kappa)) * (a - tau) - sig * sig / (4 * kappa) * a * a
        return math.exp(i_curr * a - b)
    pr("expected_cum_inflation(i=0.03, tau=2)", ibar(0.03, 2.0))
    pr("expected_cum_inflation(i=0.03, tau=5)", ibar(0.03, 5.0))

    # Cross-check against the Gaussian-moment form. The integral of a Vasicek
    # rate over [0, tau] is normal with mean M = theta*tau + (i0-theta)*A and
    # variance V = (sig^2/k^2)(tau - 2A) + sig^2(1-exp(-2k tau))/(2k^3). The
    # classic A/B pair used throughout equals exp(M - V/2) (the bond-price
    # convention with the rate sign flipped), which is what we pin.
    for tau in [2.0, 5.0]:
        a = (1 - math.exp(-kappa * tau)) / kappa
        m = theta * tau + (0.03 - theta) * a
        v = (sig / kappa) ** 2 * (tau - 2 * a) + \
            sig * sig * (1 - math.exp(-2 * kappa * tau)) / (2 * kappa ** 3)
        alt = math.exp(m - v / 2)
        rel = abs(alt - ibar(0.03, tau)) / ibar(0.03, tau)
        print(f"gaussian-moment check tau={tau}: closed={ibar(0.03, tau):.12f} "
              f"exp(M-V/2)={alt:.12f} rel={rel:.2e}")
        assert rel < 1e-12

    # state with inflation: scale costs/infusions by cum_past * ibar(d)
    cum_past, rate = 1.04, 0.025
    def ibar_rate(tau):
        if tau <= 0:
            return 1.0
        a = (1.0 - math.exp(-kappa * tau)) / kappa
        b = (theta - sig * sig / (2 * kappa * kappa)) * (a - tau) - sig * sig / (4 * kappa) * a * a
        return math.exp(rate * a - b)
    t = 2
    costs = [FULL_COSTS[t + d] * cum_past * ibar_rate(H * d) for d in range(T - t + 1)]
    infl_inf = [INFUSIONS[t + d] * cum_past * ibar_rate(H * d) for d in range(T - t + 1)]
    infl_inf[0] = 0.0
    utils = FULL_UTILS[t:]
    den_min = discount_sum(costs, 0, -1.0)
    den_max = discount_sum(costs, 2, 1.0)
    pr("infl state t=2 W=70 w_min", 70.0 / den_min)
    pr("infl state t=2 W=70 w_max", 70.0 / den_max)
    pr("infl state t=2 c_min", cost_blocks(costs, 2, 1.0))
    g, p, _, _ = goal_signals(costs, utils, infl_inf,
                              [(0.0, 0.0), (40.0 * cum_past, 60.0)], 70.0, MUS, SIGMAS, z)
    pr("infl state t=2 g", g)
    pr("infl state t=2 p", p)
    pr("infl i_norm", rate / theta)


if __name__ == "__main__":
    main()
