# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid-enumeration kernels.

Both kernels walk the time simplex in lexicographic order of
``(t1, t21, t22)`` and keep the first strict maximizer, so ties resolve to
the lexicographically smallest allocation.
"""
from libc.math cimport log1p, exp, expm1, log, sqrt, INFINITY

cdef double LN2 = 0.6931471805599453


cdef inline double joint_rate(double t3, double e1, double e2, double h1a, double h2a,
                              double sigma0_sq, double bandwidth) nogil:
    cdef double p1, p2
    if t3 == 0.0:
        return 0.0
    p1 = e1 / t3
    p2 = e2 / t3
    return 0.5 * t3 * bandwidth * log1p((p1 * h1a + p2 * h2a) / sigma0_sq) / LN2


cdef inline double active_rate(double t, double e, double gain, double sigma0_sq,
                               double bandwidth) nogil:
    if t == 0.0:
        return 0.0
    return t * bandwidth * log1p(e * gain / (t * sigma0_sq)) / LN2


def grid_backscatter(double budget, double m, long nmax,
                     double wet1, double wet2, double own1, double own2,
                     double recv1, double recv2, double h1a, double h2a,
                     double sigma0_sq, double bandwidth, double kx1, double kx2):
    """Best common rate over grid points ``t = index / m``; returns ``(z, i, j, k)``."""
    cdef long i, j, k
    cdef double t1, t21, t22, t3, e1, e2, r3, z, best = -1.0
    cdef long bi = 0, bj = 0, bk = 0
    with nogil:
        for i in range(nmax + 1):
            t1 = i / m
            for j in range(nmax - i + 1):
                t21 = j / m
                for k in range(nmax - i - j + 1):
                    t22 = k / m
                    t3 = budget - (t1 + t21 + t22)
                    if t3 < 0.0:
                        t3 = 0.0
                    e1 = wet1 * t1 + (own1 * t21 + recv1 * t22)
                    e2 = wet2 * t1 + (recv2 * t21 + own2 * t22)
                    r3 = joint_rate(t3, e1, e2, h1a, h2a, sigma0_sq, bandwidth)
                    z = kx1 * t21
                    if kx2 * t22 < z:
                        z = kx2 * t22
                    if r3 < z:
                        z = r3
                    if z > best:
                        best = z
                        bi = i
                        bj = j
                        bk = k
    return best, bi, bj, bk


def grid_benchmark(double budget, double m, long nmax, long levels,
                   double wet1, double wet2, double h1a, double h2a,
                   double h12, double h21, double sigma0_sq, double bandwidth):
    """Best common rate of the active-exchange baseline; returns ``(z, i, j, k, l1, l2)``.

    Exchange energies take ``levels`` evenly spaced values in ``[0, E_wet]``.
    """
    cdef long i, j, k, l1, l2
    cdef double t1, t21, t22, t3, E1, E2, e1, e2, x1, x2, r3, z, best = -1.0
    cdef double span = levels - 1 if levels > 1 else 1.0
    cdef long bi = 0, bj = 0, bk = 0, bl1 = 0, bl2 = 0
    with nogil:
        for i in range(nmax + 1):
            t1 = i / m
            E1 = wet1 * t1
            E2 = wet2 * t1
            for j in range(nmax - i + 1):
                t21 = j / m
                for k in range(nmax - i - j + 1):
                    t22 = k / m
                    t3 = budget - (t1 + t21 + t22)
                    if t3 < 0.0:
                        t3 = 0.0
                    for l1 in range(levels):
                        e1 = E1 * (l1 / span)
                        x1 = active_rate(t21, e1, h12, sigma0_sq, bandwidth)
                        for l2 in range(levels):
                            e2 = E2 * (l2 / span)
                            x2 = active_rate(t22, e2, h21, sigma0_sq, bandwidth)
                            r3 = joint_rate(t3, E1 - e1, E2 - e2, h1a, h2a, sigma0_sq, bandwidth)
                            z = x1
                            if x2 < z:
                                z = x2
                            if r3 < z:
                                z = r3
                            if z > best:
                                best = z
                                bi = i
                                bj = j
                                bk = k
                                bl1 = l1
                                bl2 = l2
    return best, bi, bj, bk, bl1, bl2


# -- active-exchange feasibility ---------------------------------------------
# Mirrors the numpy module's scalar routines operation for operation.

cdef double GOLDEN = 0.6180339887498949


cdef inline double excess_energy(double u) nogil:
    cdef double term, total
    cdef int n
    if u < 1e-2:
        term = u * u / 2.0
        total = 0.0
        for n in range(2, 12):
            total += (n - 1) * term
            term *= u / (n + 1)
        return total
    return u * exp(u) - expm1(u)


cdef double marginal_root(double y) nogil:
    cdef double u, f, step, cap
    cdef int it
    if y <= 0.0:
        return 0.0
    u = sqrt(2.0 * y)
    cap = log(y)
    if cap < 2.0:
        cap = 2.0
    if cap < u:
        u = cap
    for it in range(200):
        f = excess_energy(u) - y
        step = f / (u * exp(u))
        u -= step
        if step <= 4e-16 * u:
            break
    return u


cdef double energy_root(double k) nogil:
    cdef double u, f, step
    cdef int it
    u = 2.0 * (k - 1.0)
    if 2.0 * log(k) + 2.0 < u:
        u = 2.0 * log(k) + 2.0
    for it in range(200):
        f = expm1(u) - k * u
        step = f / (exp(u) - k)
        u -= step
        if step <= 4e-16 * u:
            break
    return u


cdef inline double link_energy(double t, double q, double a) nogil:
    cdef double x
    if t <= 0.0:
        return INFINITY
    x = q / t
    if x > 700.0:
        return INFINITY
    return t / a * expm1(x)


cdef inline double marginal_time(double q, double a, double c, double nu) nogil:
    cdef double u = marginal_root(a * nu / c)
    if u == 0.0:
        return INFINITY
    return q / u


cdef inline double min_time(double q, double a, double energy) nogil:
    cdef double k = a * energy / q
    if not k > 1.0:
        return INFINITY
    return q / energy_root(k)


cdef inline double fill_total(double nu, double lb1, double lb2, double q1, double a1, double c1,
                              double q2, double a2, double c2, double q3, double a3) nogil:
    cdef double x1 = marginal_time(q1, a1, c1, nu)
    cdef double x2 = marginal_time(q2, a2, c2, nu)
    if x1 < lb1:
        x1 = lb1
    if x2 < lb2:
        x2 = lb2
    return x1 + x2 + marginal_time(q3, a3, 1.0, nu)


cdef void waterfill(double d, double lb1, double lb2, double q1, double a1, double c1,
                    double q2, double a2, double c2, double q3, double a3, double nu0,
                    double* out) nogil:
    cdef double lo = nu0, hi = nu0, mid, x1, x2
    cdef int it
    while fill_total(lo, lb1, lb2, q1, a1, c1, q2, a2, c2, q3, a3) <= d:
        lo *= 0.25
    while fill_total(hi, lb1, lb2, q1, a1, c1, q2, a2, c2, q3, a3) > d:
        hi *= 4.0
    for it in range(200):
        mid = sqrt(lo * hi)
        if mid <= lo or mid >= hi or hi - lo <= 1e-15 * hi:
            break
        if fill_total(mid, lb1, lb2, q1, a1, c1, q2, a2, c2, q3, a3) > d:
            lo = mid
        else:
            hi = mid
    x1 = marginal_time(q1, a1, c1, hi)
    x2 = marginal_time(q2, a2, c2, hi)
    if x1 < lb1:
        x1 = lb1
    if x2 < lb2:
        x2 = lb2
    out[0] = x1
    out[1] = x2
    out[2] = d - x1 - x2


cdef struct Probe:
    int feasible
    double key
    double t1
    double x1
    double x2
    double t3


cdef Probe evaluate(double t1, double budget, double q1, double a1, double c1, double wet1,
                    double q2, double a2, double c2, double wet2, double q3, double a3,
                    double g) nogil:
    cdef Probe p
    cdef double d = budget - t1
    cdef double lb1 = min_time(q1, a1, wet1 * t1)
    cdef double lb2 = min_time(q2, a2, wet2 * t1)
    cdef double room = d - lb1 - lb2
    cdef double out[3]
    p.t1 = t1
    if not room > 0.0:
        p.feasible = 0
        p.key = room
        return p
    waterfill(d, lb1, lb2, q1, a1, c1, q2, a2, c2, q3, a3, g, out)
    p.feasible = 1
    p.x1 = out[0]
    p.x2 = out[1]
    p.t3 = out[2]
    p.key = g * t1 - (c1 * link_energy(out[0], q1, a1) + c2 * link_energy(out[1], q2, a2)
                      + link_energy(out[2], q3, a3))
    return p


cdef inline bint not_worse(Probe a, Probe b) nogil:
    if a.feasible != b.feasible:
        return a.feasible > b.feasible
    return a.key >= b.key


def benchmark_feasibility(double z, double budget, double wet1, double wet2, double h1a,
                          double h2a, double h12, double h21, double sigma0_sq,
                          double bandwidth, double tol):
    """Largest energy slack of the baseline at common rate ``z``; ``(slack, t1, t21, t22, t3)``."""
    cdef double q1 = z * LN2 / bandwidth
    cdef double q2 = q1
    cdef double q3 = 2.0 * z * LN2 / bandwidth
    cdef double a1 = h12 / sigma0_sq
    cdef double a2 = h21 / sigma0_sq
    cdef double a3 = 1.0 / sigma0_sq
    cdef double g = wet1 * h1a + wet2 * h2a
    cdef double t1_min = q1 / (a1 * wet1)
    cdef double a, b, c, d
    cdef Probe pc, pd, best
    if q2 / (a2 * wet2) > t1_min:
        t1_min = q2 / (a2 * wet2)
    if t1_min >= budget:
        return -INFINITY, 0.0, 0.0, 0.0, 0.0
    with nogil:
        a = t1_min
        b = budget
        c = b - GOLDEN * (b - a)
        d = a + GOLDEN * (b - a)
        pc = evaluate(c, budget, q1, a1, h1a, wet1, q2, a2, h2a, wet2, q3, a3, g)
        pd = evaluate(d, budget, q1, a1, h1a, wet1, q2, a2, h2a, wet2, q3, a3, g)
        while b - a > tol:
            if not_worse(pc, pd):
                b = d
                d = c
                pd = pc
                c = b - GOLDEN * (b - a)
                pc = evaluate(c, budget, q1, a1, h1a, wet1, q2, a2, h2a, wet2, q3, a3, g)
            else:
                a = c
                c = d
                pc = pd
                d = a + GOLDEN * (b - a)
                pd = evaluate(d, budget, q1, a1, h1a, wet1, q2, a2, h2a, wet2, q3, a3, g)
        best = pc if not_worse(pc, pd) else pd
    if not best.feasible:
        return -INFINITY, 0.0, 0.0, 0.0, 0.0
    return best.key, best.t1, best.x1, best.x2, best.t3
