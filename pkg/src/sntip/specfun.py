"""Real-argument Airy function Ai and its derivative.

Maclaurin series near the origin, the standard large-|x| asymptotic
expansions further out.  No external special-function library is used so
the truncation behaviour is fully under our control.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "AiryDomainError",
    "AiryPoleError",
    "AiryEval",
    "airy",
    "airy_ai",
    "airy_ai_prime",
    "airy_first_zero",
    "airy_log_ratio",
    "SERIES_RADIUS_POS",
    "SERIES_RADIUS_NEG",
]

# Ai(0) and -Ai'(0)
_C1 = 0.355028053887817239260063186004
_C2 = 0.258819403792806798405183560189

# Series region.  On the positive side the series error is ~1e-12 at x=6.
# On the oscillatory side the asymptotic expansion only reaches ~e^{-2 zeta},
# which is 3e-9 at x=-6, so the series is kept out to x=-7 where both
# branches are near 2e-11.
SERIES_RADIUS_POS = 6.0
SERIES_RADIUS_NEG = 7.0

_FIRST_ZERO_SEED = -2.338
_POLE_TOL = 1e-8


class AiryDomainError(ValueError):
    """Raised for non-finite arguments."""


class AiryPoleError(ArithmeticError):
    """Raised when -Ai'/Ai is requested too close to a zero of Ai.

    The attribute ``nearest_zero`` holds a one-step Newton estimate of the
    zero, which for the tipping problems is the location of the singularity.
    """

    def __init__(self, x: float, nearest_zero: float):
        self.x = x
        self.nearest_zero = nearest_zero
        super().__init__(
            f"Ai has a zero within {_POLE_TOL:g} of x={x!r} "
            f"(nearest zero ~ {nearest_zero!r})"
        )


@dataclass(frozen=True)
class AiryEval:
    ai: float
    ai_prime: float


def _check(x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise AiryDomainError(f"Airy functions need a finite argument, got {x!r}")
    return x


def _series(x: float) -> tuple[float, float]:
    """Maclaurin series for (Ai, Ai'), summed with math.fsum."""
    x3 = x * x * x
    f_terms = [1.0]
    g_terms = [x]
    fp_terms = [0.5 * x * x]
    gp_terms = [1.0]
    t_f, t_g, t_fp, t_gp = 1.0, x, 0.5 * x * x, 1.0
    k = 0
    while True:
        t_f *= x3 / ((3 * k + 2) * (3 * k + 3))
        t_g *= x3 / ((3 * k + 3) * (3 * k + 4))
        t_fp *= x3 / ((3 * k + 3) * (3 * k + 5))
        t_gp *= x3 / ((3 * k + 1) * (3 * k + 3))
        f_terms.append(t_f)
        g_terms.append(t_g)
        fp_terms.append(t_fp)
        gp_terms.append(t_gp)
        k += 1
        big = max(abs(t_f), abs(t_g), abs(t_fp), abs(t_gp))
        if k > 4 and big < 1e-18:
            break
        if k > 400:
            break
    f = math.fsum(f_terms)
    g = math.fsum(g_terms)
    fp = math.fsum(fp_terms)
    gp = math.fsum(gp_terms)
    return _C1 * f - _C2 * g, _C1 * fp - _C2 * gp


def _asym_coeffs(n: int) -> tuple[list[float], list[float]]:
    # u_k = Gamma(3k+1/2) / (54^k k! Gamma(k+1/2)),  v_k = -(6k+1)/(6k-1) u_k
    u = [1.0]
    for k in range(1, n):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1)))
    v = [1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, n)]
    return u, v


_U, _V = _asym_coeffs(60)


def _truncated(coeffs, zeta: float, sign_pattern) -> float:
    """Sum coeffs[k] * s_k / zeta^k up to the smallest term."""
    total = 0.0
    last = math.inf
    zk = 1.0
    for k, c in enumerate(coeffs):
        term = c * zk * sign_pattern(k)
        if abs(term) > last:
            break
        total += term
        last = abs(term)
        zk /= zeta
    return total


def _asym_positive(x: float) -> tuple[float, float]:
    zeta = 2.0 / 3.0 * x ** 1.5
    pre = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    alt = lambda k: -1.0 if k % 2 else 1.0
    s_u = _truncated(_U, zeta, alt)
    s_v = _truncated(_V, zeta, alt)
    q = x ** 0.25
    return pre / q * s_u, -pre * q * s_v


def _asym_negative(x: float) -> tuple[float, float]:
    z = -x
    zeta = 2.0 / 3.0 * z ** 1.5
    # even / odd parts with alternating signs
    def split(c):
        even = [c[k] if (k // 2) % 2 == 0 else -c[k] for k in range(0, len(c), 2)]
        odd = [c[k] if ((k - 1) // 2) % 2 == 0 else -c[k] for k in range(1, len(c), 2)]
        return even, odd

    ue, uo = split(_U)
    ve, vo = split(_V)
    z2 = zeta * zeta
    one = lambda k: 1.0
    P_u = _truncated(ue, z2, one)
    Q_u = _truncated(uo, z2, one) / zeta
    P_v = _truncated(ve, z2, one)
    Q_v = _truncated(vo, z2, one) / zeta
    th = zeta + math.pi / 4.0
    s, c = math.sin(th), math.cos(th)
    q = z ** 0.25
    inv = 1.0 / math.sqrt(math.pi)
    ai = inv / q * (s * P_u - c * Q_u)
    aip = -inv * q * (c * P_v + s * Q_v)
    return ai, aip


def _eval(x: float) -> tuple[float, float]:
    if -SERIES_RADIUS_NEG <= x <= SERIES_RADIUS_POS:
        return _series(x)
    if x > 0:
        return _asym_positive(x)
    return _asym_negative(x)


def airy(x: float) -> AiryEval:
    x = _check(x)
    ai, aip = _eval(x)
    return AiryEval(ai, aip)


def airy_ai(x: float) -> float:
    """Ai(x), absolute error below 1e-10 on [-15, 10]."""
    return _eval(_check(x))[0]


def airy_ai_prime(x: float) -> float:
    """Ai'(x), same accuracy as :func:`airy_ai`."""
    return _eval(_check(x))[1]


def _newton_zero(seed: float, tol: float = 1e-13, max_iter: int = 50) -> tuple[float, int]:
    # Ai'' = x Ai, so Newton on Ai uses only the series pair.
    z = seed
    for it in range(1, max_iter + 1):
        ai, aip = _series(z)
        step = ai / aip
        z -= step
        if abs(step) < tol:
            return z, it
    raise RuntimeError("Newton iteration for the first Airy zero did not converge")


_FIRST_ZERO, _FIRST_ZERO_ITERS = _newton_zero(_FIRST_ZERO_SEED)


def airy_first_zero() -> float:
    """The first (largest) zero of Ai, approximately -2.338107410459767."""
    return _FIRST_ZERO


def airy_log_ratio(x: float) -> float:
    """-Ai'(x)/Ai(x).

    Raises :class:`AiryPoleError` when x is within 1e-8 of a zero of Ai.
    """
    x = _check(x)
    ai, aip = _eval(x)
    if abs(ai) <= _POLE_TOL * abs(aip):
        raise AiryPoleError(x, x - ai / aip)
    return -aip / ai
