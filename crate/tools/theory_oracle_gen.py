#!/usr/bin/env python3
"""Regenerates the frozen high-precision expected values used by the
generalization-bound tests.

Evaluates the risk-bound, Rademacher-bound, and sampling-threshold formulas
with 60-digit arithmetic (mpmath) on a fixed pseudo-random parameter grid,
then emits a Rust source file with the inputs and correctly rounded f64
outputs.  Run from the repository root:

    python3 tools/theory_oracle_gen.py > crates/harness/tests/support/frozen_bounds.rs
"""

import random

from mpmath import mp, mpf, log, sqrt

mp.dps = 60

rng = random.Random(0x5EED_B0BD)


def fmt(x) -> str:
    """Render an mpmath value as the nearest f64 literal."""
    return f"{float(x):.17e}"


def theorem1_rhs(n, m, D, r1, bx, by, gamma, delta, k, emp):
    n, m, D = mpf(n), mpf(m), mpf(D)
    r1, bx, by = mpf(r1), mpf(bx), mpf(by)
    gamma, delta, k, emp = mpf(gamma), mpf(delta), mpf(k), mpf(emp)
    b = 2 * (by + D * r1 / (m * (1 - gamma))) ** 2
    c = D * r1 * bx / (1 - gamma)
    mn = m / n + 1 / sqrt(n)
    tail = b * log(1 / delta) / n
    return emp + k * (sqrt(emp) * (mn * c + sqrt(tail)) + tail + log(n) ** 3 * mn**2 * c**2)


def rademacher(n, m, D, r1, bx, gamma):
    n, m, D = mpf(n), mpf(m), mpf(D)
    r1, bx, gamma = mpf(r1), mpf(bx), mpf(gamma)
    return (50 * m / n + 14 / sqrt(n)) * 3 * D * r1 * bx / (1 - gamma)


def gamma_lower(d, mu, m, delta):
    d, mu, m, delta = mpf(d), mpf(mu), mpf(m), mpf(delta)
    return sqrt(8 * d * mu * log(2 * d / delta) / (3 * m))


def log_uniform(lo, hi):
    return mpf(lo) * (mpf(hi) / mpf(lo)) ** mpf(rng.random())


rows_t1 = []
for i in range(100):
    n = rng.randint(25, 1_000_000)
    m = rng.randint(1, min(n, 500))
    D = rng.randint(max(2, m), 10_000)
    r1 = log_uniform("0.1", "10")
    bx = log_uniform("0.1", "10")
    by = log_uniform("0.1", "10")
    gamma = mpf(rng.random()) * mpf("0.99")
    delta = log_uniform("0.001", "0.5")
    k = log_uniform("0.1", "10")
    emp = mpf(0) if i % 10 == 0 else log_uniform("0.001", "5")
    rhs = theorem1_rhs(n, m, D, r1, bx, by, gamma, delta, k, emp)
    rows_t1.append((n, m, D, r1, bx, by, gamma, delta, k, emp, rhs))

rows_rad = []
for _ in range(100):
    n = rng.randint(2, 1_000_000)
    m = rng.randint(1, 500)
    D = rng.randint(max(2, m), 10_000)
    r1 = log_uniform("0.1", "10")
    bx = log_uniform("0.1", "10")
    gamma = mpf(rng.random()) * mpf("0.99")
    rows_rad.append((n, m, D, r1, bx, gamma, rademacher(n, m, D, r1, bx, gamma)))

rows_g = []
for _ in range(100):
    d = rng.randint(1, 50)
    mu = log_uniform("1", "20")
    m = rng.randint(1, 500)
    delta = log_uniform("0.001", "0.9")
    rows_g.append((d, mu, m, delta, gamma_lower(d, mu, m, delta)))

print("//! Frozen expected values for the bound-formula tests.")
print("//!")
print("//! Generated by tools/theory_oracle_gen.py (60-digit arithmetic,")
print("//! correctly rounded to f64).  Do not edit by hand.")
print()
print("/// (n, m, D, R1, B_X, B_Y, gamma, delta, K, empirical_loss, expected_rhs)")
print("pub const THEOREM1_CASES: &[(u64, u64, u64, f64, f64, f64, f64, f64, f64, f64, f64)] = &[")
for r in rows_t1:
    n, m, D, r1, bx, by, gamma, delta, k, emp, rhs = r
    print(
        f"    ({n}, {m}, {D}, {fmt(r1)}, {fmt(bx)}, {fmt(by)}, {fmt(gamma)}, "
        f"{fmt(delta)}, {fmt(k)}, {fmt(emp)}, {fmt(rhs)}),"
    )
print("];")
print()
print("/// (n, m, D, R1, B_X, gamma, expected_bound)")
print("pub const RADEMACHER_CASES: &[(u64, u64, u64, f64, f64, f64, f64)] = &[")
for n, m, D, r1, bx, gamma, out in rows_rad:
    print(f"    ({n}, {m}, {D}, {fmt(r1)}, {fmt(bx)}, {fmt(gamma)}, {fmt(out)}),")
print("];")
print()
print("/// (d, mu, m, delta, expected_gamma1)")
print("pub const GAMMA_LOWER_CASES: &[(u64, f64, u64, f64, f64)] = &[")
for d, mu, m, delta, out in rows_g:
    print(f"    ({d}, {fmt(mu)}, {m}, {fmt(delta)}, {fmt(out)}),")
print("];")
