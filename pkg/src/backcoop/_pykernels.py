"""Numpy versions of the grid kernels, used when the extension is not built.

Each slab of fixed ``t1`` is evaluated as one array; the first strict
maximizer in C order is the lexicographically smallest one.
"""
import math

import numpy as np

LN2 = np.log(2.0)


def _joint_rate(t3, e1, e2, h1a, h2a, sigma0_sq, bandwidth):
    with np.errstate(divide="ignore", invalid="ignore"):
        p1 = e1 / t3
        p2 = e2 / t3
        r = 0.5 * t3 * bandwidth * np.log1p((p1 * h1a + p2 * h2a) / sigma0_sq) / LN2
    return np.where(t3 == 0.0, 0.0, r)


def _active_rate(t, e, gain, sigma0_sq, bandwidth):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = t * bandwidth * np.log1p(e * gain / (t * sigma0_sq)) / LN2
    return np.where(t == 0.0, 0.0, r)


def _slab(nmax, i):
    """Index pairs ``(j, k)`` with ``i + j + k <= nmax`` in lexicographic order."""
    rest = nmax - i
    j, k = np.meshgrid(np.arange(rest + 1), np.arange(rest + 1), indexing="ij")
    keep = (j + k) <= rest
    return j[keep], k[keep]


def grid_backscatter(budget, m, nmax, wet1, wet2, own1, own2, recv1, recv2,
                     h1a, h2a, sigma0_sq, bandwidth, kx1, kx2):
    best, bi, bj, bk = -1.0, 0, 0, 0
    for i in range(nmax + 1):
        j, k = _slab(nmax, i)
        t1 = i / m
        t21 = j / m
        t22 = k / m
        t3 = np.maximum(budget - (t1 + t21 + t22), 0.0)
        e1 = wet1 * t1 + (own1 * t21 + recv1 * t22)
        e2 = wet2 * t1 + (recv2 * t21 + own2 * t22)
        r3 = _joint_rate(t3, e1, e2, h1a, h2a, sigma0_sq, bandwidth)
        z = np.minimum(np.minimum(kx1 * t21, kx2 * t22), r3)
        pos = int(np.argmax(z))
        if z[pos] > best:
            best, bi, bj, bk = float(z[pos]), i, int(j[pos]), int(k[pos])
    return best, bi, bj, bk


def grid_benchmark(budget, m, nmax, levels, wet1, wet2, h1a, h2a, h12, h21,
                   sigma0_sq, bandwidth):
    span = levels - 1 if levels > 1 else 1.0
    frac = np.arange(levels) / span
    best, arg = -1.0, (0, 0, 0, 0, 0)
    for i in range(nmax + 1):
        j, k = _slab(nmax, i)
        t1 = i / m
        E1, E2 = wet1 * t1, wet2 * t1
        t21 = (j / m)[:, None, None]
        t22 = (k / m)[:, None, None]
        t3 = np.maximum(budget - (t1 + t21 + t22), 0.0)
        e1 = (E1 * frac)[None, :, None]
        e2 = (E2 * frac)[None, None, :]
        x1 = _active_rate(t21, e1, h12, sigma0_sq, bandwidth)
        x2 = _active_rate(t22, e2, h21, sigma0_sq, bandwidth)
        r3 = _joint_rate(t3, E1 - e1, E2 - e2, h1a, h2a, sigma0_sq, bandwidth)
        z = np.minimum(np.minimum(x1, x2), r3)
        pos = int(np.argmax(z))
        if z.flat[pos] > best:
            p, l1, l2 = np.unravel_index(pos, z.shape)
            best, arg = float(z.flat[pos]), (i, int(j[p]), int(k[p]), int(l1), int(l2))
    return (best,) + arg


# -- active-exchange feasibility ---------------------------------------------
#
# For a target rate the cheapest energy that carries it over a link of
# duration t is phi(t) = (t / a) * expm1(q / t), convex and decreasing in t.
# The functions below invert phi and its derivative by Newton iteration
# started above the root (both residuals are convex and increasing there).

GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


def _excess_energy(u):
    """``e**u * (u - 1) + 1``, accurate for small ``u``."""
    if u < 1e-2:
        term, total = u * u / 2.0, 0.0
        for n in range(2, 12):
            total += (n - 1) * term
            term *= u / (n + 1)
        return total
    return u * math.exp(u) - math.expm1(u)


def marginal_root(y):
    """Solve ``e**u * (u - 1) + 1 = y`` for ``u > 0``."""
    if y <= 0.0:
        return 0.0
    u = min(math.sqrt(2.0 * y), max(2.0, math.log(y)))
    for _ in range(200):
        f = _excess_energy(u) - y
        step = f / (u * math.exp(u))
        u -= step
        if step <= 4e-16 * u:
            break
    return u


def energy_root(k):
    """Solve ``expm1(u) = k * u`` for ``u > 0``; needs ``k > 1``."""
    u = min(2.0 * (k - 1.0), 2.0 * math.log(k) + 2.0)
    for _ in range(200):
        f = math.expm1(u) - k * u
        step = f / (math.exp(u) - k)
        u -= step
        if step <= 4e-16 * u:
            break
    return u


def link_energy(t, q, a):
    if t <= 0.0:
        return math.inf
    x = q / t
    if x > 700.0:
        return math.inf
    return t / a * math.expm1(x)


def marginal_time(q, a, c, nu):
    """Duration where ``c * (-dphi/dt)`` equals the time price ``nu``."""
    u = marginal_root(a * nu / c)
    return math.inf if u == 0.0 else q / u


def min_time(q, a, energy):
    """Shortest duration over which ``energy`` joules carry the target."""
    k = a * energy / q
    if not k > 1.0:
        return math.inf
    return q / energy_root(k)


def _waterfill(d, lb1, lb2, q1, a1, c1, q2, a2, c2, q3, a3, nu0):
    """Split ``d`` over the two exchange slots and the joint stage at minimum cost."""
    def total(nu):
        return (max(lb1, marginal_time(q1, a1, c1, nu))
                + max(lb2, marginal_time(q2, a2, c2, nu))
                + marginal_time(q3, a3, 1.0, nu))

    lo = hi = nu0
    while total(lo) <= d:
        lo *= 0.25
    while total(hi) > d:
        hi *= 4.0
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if mid <= lo or mid >= hi or hi - lo <= 1e-15 * hi:
            break
        if total(mid) > d:
            lo = mid
        else:
            hi = mid
    x1 = max(lb1, marginal_time(q1, a1, c1, hi))
    x2 = max(lb2, marginal_time(q2, a2, c2, hi))
    return x1, x2, d - x1 - x2


def benchmark_feasibility(z, budget, wet1, wet2, h1a, h2a, h12, h21, sigma0_sq, bandwidth, tol):
    """Largest energy slack of the baseline at common rate ``z``.

    Returns ``(slack, t1, t21, t22, t3)``; the rate is achievable iff
    ``slack >= 0``.  Slack is the residual SNR-weighted energy left after
    paying the minimum exchange energies and the joint-stage requirement.
    """
    ln2 = math.log(2.0)
    q1 = q2 = z * ln2 / bandwidth
    q3 = 2.0 * z * ln2 / bandwidth
    a1, a2, a3 = h12 / sigma0_sq, h21 / sigma0_sq, 1.0 / sigma0_sq
    g = wet1 * h1a + wet2 * h2a
    infeasible = (-math.inf, 0.0, 0.0, 0.0, 0.0)

    t1_min = max(q1 / (a1 * wet1), q2 / (a2 * wet2))
    if t1_min >= budget:
        return infeasible

    def evaluate(t1):
        d = budget - t1
        lb1 = min_time(q1, a1, wet1 * t1)
        lb2 = min_time(q2, a2, wet2 * t1)
        room = d - lb1 - lb2
        if not room > 0.0:
            return (0, room), None
        x1, x2, t3 = _waterfill(d, lb1, lb2, q1, a1, h1a, q2, a2, h2a, q3, a3, g)
        cost = h1a * link_energy(x1, q1, a1) + h2a * link_energy(x2, q2, a2) + link_energy(t3, q3, a3)
        slack = g * t1 - cost
        return (1, slack), (slack, t1, x1, x2, t3)

    a, b = t1_min, budget
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    kc, sc = evaluate(c)
    kd, sd = evaluate(d)
    while b - a > tol:
        if kc >= kd:
            b, d, kd, sd = d, c, kc, sc
            c = b - GOLDEN * (b - a)
            kc, sc = evaluate(c)
        else:
            a, c, kc, sc = c, d, kd, sd
            d = a + GOLDEN * (b - a)
            kd, sd = evaluate(d)
    best = sc if kc >= kd else sd
    return infeasible if best is None else best
