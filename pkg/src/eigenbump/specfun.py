"""Bessel functions J_n of the first kind, real order, complex argument.

Evaluation strategy in double precision:

  * ``|z| <= 12``      ascending power series, accumulated in extended
                       (80-bit) precision to absorb the alternating-series
                       cancellation,
  * ``12 < |z| < 30``  backward (Miller) recurrence normalised by a
                       ladder sum,
  * ``|z| >= 30``      Hankel's large-argument expansion truncated at its
                       smallest term.

Beyond ``|z| ~ 3e4`` the trigonometric phase of the expansion is no longer
representable to the accuracy this library promises, so such arguments are
delegated to arbitrary-precision arithmetic with the working precision
scaled to the phase.  Ratios J_{n-1}(z)/J_n(z) are computed by a modified
Lentz continued fraction, which stays finite near zeros of the numerator
and avoids the overflow/cancellation of naive division.
"""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import AccuracyError, InvalidArgumentError, PoleError

SERIES_MAX = 12.0
ASYMPT_MIN = 30.0
# largest |z| evaluated in double precision; above this the phase error
# eps*|z| of argument reduction would exceed ~1e-11
NATIVE_MAX = 3.0e4

# mpmath's working precision is process-global; every extended-precision
# block in the package takes this (reentrant) lock so the native double
# lane stays freely concurrent
MP_LOCK = threading.RLock()

_EPS_LD = float(np.finfo(np.longdouble).eps)
_TINY_LD = np.clongdouble(1e-280)


@dataclass(frozen=True)
class BesselQuery:
    """One evaluation request: J_order(argument) to a relative tolerance."""

    order: float
    argument: complex
    accuracy_target: float = 1e-12

    def __post_init__(self):
        if not (self.accuracy_target > 0.0 and self.accuracy_target <= 1e-6):
            raise InvalidArgumentError(
                "accuracy_target must lie in (0, 1e-6], got %r" % (self.accuracy_target,))
        if not (math.isfinite(self.order) and _is_finite_c(self.argument)):
            raise InvalidArgumentError("order and argument must be finite")


def _is_finite_c(z) -> bool:
    z = complex(z)
    return math.isfinite(z.real) and math.isfinite(z.imag)


def gamma_real(x: float) -> float:
    """Gamma function for positive real x."""
    if not math.isfinite(x) or x <= 0.0:
        raise InvalidArgumentError("gamma_real requires finite x > 0, got %r" % (x,))
    try:
        return math.gamma(x)
    except OverflowError as exc:
        raise InvalidArgumentError("gamma_real overflow at x=%r" % (x,)) from exc


def _recip_gamma(x: float) -> float:
    """1/Gamma(x); zero at the poles x = 0, -1, -2, ..."""
    if x > 0.0:
        return 1.0 / math.gamma(x)
    if x == math.floor(x):
        return 0.0
    # reflection: 1/Gamma(x) = Gamma(1-x) * sin(pi x) / pi
    return math.gamma(1.0 - x) * math.sin(math.pi * x) / math.pi


def bessel_j(query: BesselQuery) -> complex:
    """Evaluate J_order(z) with relative error <= query.accuracy_target.

    Raises AccuracyError (carrying the achieved estimate) if the active
    expansion cannot reach the target, InvalidArgumentError on non-finite
    input or an argument outside the principal sector in the asymptotic
    regime.
    """
    return _jv(query.order, complex(query.argument), query.accuracy_target)


def _jv(order: float, z: complex, target: float = 1e-12) -> complex:
    if not (math.isfinite(order) and _is_finite_c(z)):
        raise InvalidArgumentError("bessel_j requires finite order and argument")

    # negative integer order: J_{-m} = (-1)^m J_m
    if order < 0.0 and order == math.floor(order):
        m = int(-order)
        return (-1.0) ** m * _jv(float(m), z, target)

    az = abs(z)
    if az == 0.0:
        if order == 0.0:
            return 1.0 + 0.0j
        if order > 0.0:
            return 0.0 + 0.0j
        raise InvalidArgumentError(
            "J_n(0) diverges for negative non-integer order %r" % (order,))

    if az > NATIVE_MAX:
        return complex(_jv_mp(order, z))
    if az <= SERIES_MAX:
        return _jv_series(order, z, target)
    if z.real < 0.0:
        # rotate into the right half-plane, where the large-argument
        # machinery keeps full accuracy: J_n(z e^{+-i pi}) = e^{+-i n pi} J_n(z)
        w = -z
        phase = cmath.exp(1j * math.pi * order) if z.imag >= 0.0 \
            else cmath.exp(-1j * math.pi * order)
        return phase * _jv(order, w, target)
    if az >= ASYMPT_MIN:
        return _jv_hankel(order, z, target)
    return _jv_miller(order, z, target)


def _jv_series(order: float, z: complex, target: float) -> complex:
    """Ascending series, extended-precision accumulation.

    J_n(z) = (z/2)^n / Gamma(n+1) * sum_k prod_{i<=k} [-(z^2/4)/(i(n+i))].
    The scale factor is applied once at the end, so its rounding is not
    amplified by the alternating sum.
    """
    zl = np.clongdouble(z.real) + 1j * np.clongdouble(z.imag)
    q = -(zl * zl) / 4.0
    term = np.clongdouble(1.0) + 0j
    total = term
    max_abs = float(abs(term))
    converged = False
    for k in range(1, 500):
        term = term * q / np.clongdouble(k * (order + k))
        total = total + term
        max_abs = max(max_abs, float(abs(term)))
        if abs(term) <= 0.1 * _EPS_LD * abs(total):
            converged = True
            break
    if not converged:
        raise AccuracyError("bessel series did not converge", achieved=float(abs(term)))

    scale_mag = _recip_gamma(order + 1.0)
    if scale_mag == 0.0:
        return 0.0 + 0.0j
    front = cmath.exp(order * cmath.log(z / 2.0)) * scale_mag
    # measure cancellation against the natural magnitude of J as well:
    # right at a zero the value-relative error is unbounded for any fixed
    # precision, but the absolute result is still good to eps * max term
    floor = _envelope(z) / max(abs(front), 1e-300)
    est = _EPS_LD * max_abs / max(float(abs(total)), floor, 1e-300) + 4e-16
    if est > target:
        raise AccuracyError("bessel series cancellation too severe", achieved=est)
    return complex(total) * front


def _jv_hankel(order: float, z: complex, target: float) -> complex:
    """Large-argument expansion J_n = sqrt(2/(pi z)) (P cos chi - Q sin chi),
    chi = z - (2n+1) pi/4, truncated at the smallest term.

    Terminates exactly for half-integer order.  The relative truncation
    error at optimal cut is ~ exp(-2|z|), far below double rounding for
    |z| >= 30 and the small orders used here.
    """
    if abs(cmath.phase(z)) >= math.pi - 1e-9:
        raise InvalidArgumentError(
            "asymptotic evaluation requires |arg z| < pi, got z=%r" % (z,))
    if abs(z.imag) > 700.0:
        raise AccuracyError("J_n exceeds the double range at Im z = %g" % z.imag,
                            achieved=math.inf)
    mu = 4.0 * order * order
    chi = z - (0.5 * order + 0.25) * math.pi
    u = 1.0 + 0.0j
    p_sum = 1.0 + 0.0j
    q_sum = 0.0 + 0.0j
    min_term = 1.0
    for k in range(1, 80):
        u = u * (mu - (2.0 * k - 1.0) ** 2) / (8.0 * k * z)
        au = abs(u)
        if au >= min_term and k > 4:
            break  # series started diverging; stop at previous (smallest) term
        min_term = min(min_term, au)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p_sum += sign * u
        else:
            q_sum += sign * u
        if au == 0.0:
            min_term = 0.0
            break  # exact termination (half-integer order)
    comb = p_sum * cmath.cos(chi) - q_sum * cmath.sin(chi)
    env = abs(cmath.cos(chi)) + abs(cmath.sin(chi))
    # truncation plus the phase rounding eps*|z| of argument reduction,
    # measured against the envelope scale e^{|Im z|} near zeros of J
    floor = math.exp(abs(z.imag))
    est = (min_term + 2.3e-16 * abs(z)) * env / max(abs(comb), floor, 1e-300) + 4e-16
    if est > target:
        raise AccuracyError("asymptotic expansion below target accuracy", achieved=est)
    return cmath.sqrt(2.0 / (math.pi * z)) * comb


def _miller_ladder(order: float, z: complex, m_start: int):
    """One backward-recurrence pass; returns the normalised J_order.

    Recurses J_{nu-1} = (2 nu / z) J_nu - J_{nu+1} down a unit ladder from
    order ``nu0 + m_start`` and rescales with the ladder sum
    sum_k (nu0+2k) Gamma(nu0+k)/k! J_{nu0+2k} = (z/2)^{nu0}
    (the classical 1 = J_0 + 2 J_2 + ... when nu0 = 0).
    """
    nu0 = order - math.floor(order)
    j_star = int(math.floor(order))
    zl = np.clongdouble(z.real) + 1j * np.clongdouble(z.imag)
    vals = np.zeros(m_start + 2, dtype=np.clongdouble)
    vals[m_start + 1] = 0.0
    vals[m_start] = _TINY_LD
    for j in range(m_start, 0, -1):
        nu = nu0 + j
        vals[j - 1] = (2.0 * nu / zl) * vals[j] - vals[j + 1]

    if nu0 == 0.0:
        s = vals[0].copy()
        for k in range(2, m_start + 1, 2):
            s = s + 2.0 * vals[k]
        norm_target = np.clongdouble(1.0) + 0j
    else:
        coef = np.clongdouble(math.gamma(nu0 + 1.0))  # (nu0+0) Gamma(nu0) / 0!
        s = coef * vals[0]
        k = 1
        while 2 * k <= m_start:
            coef = coef * np.clongdouble(
                (nu0 + 2.0 * k) * (nu0 + k - 1.0) / ((nu0 + 2.0 * k - 2.0) * k))
            s = s + coef * vals[2 * k]
            k += 1
        w = cmath.exp(nu0 * cmath.log(z / 2.0))
        norm_target = np.clongdouble(w.real) + 1j * np.clongdouble(w.imag)
    scale = norm_target / s

    if j_star >= 0:
        return complex(vals[j_star] * scale)
    # extend below the ladder; a few steps only, orders here are >= -3
    lo = vals[0] * scale
    hi = vals[1] * scale
    nu = nu0
    for _ in range(-j_star):
        lo, hi = (2.0 * nu / zl) * lo - hi, lo
        nu -= 1.0
    return complex(lo)


def _jv_miller(order: float, z: complex, target: float) -> complex:
    m_start = int(abs(z)) + 40
    v1 = _miller_ladder(order, z, m_start)
    v2 = _miller_ladder(order, z, m_start + 12)
    est = abs(v1 - v2) / max(abs(v2), _envelope(z), 1e-300) + 4e-16
    if est > target:
        raise AccuracyError("backward recurrence below target accuracy", achieved=est)
    return v2


def _envelope(z: complex) -> float:
    """Typical magnitude of J_n at z for the small orders used here."""
    return math.sqrt(2.0 / (math.pi * max(abs(z), 0.3))) * math.exp(abs(z.imag))


def _auto_dps(az: float) -> int:
    return 30 + max(0, int(math.log10(az + 1.0)))


def _jv_mp(order: float, z: complex):
    with MP_LOCK, mpmath.workdps(_auto_dps(abs(z))):
        return mpmath.besselj(order, mpmath.mpc(z))


def bessel_j_ratio(order: float, z: complex, tol: float = 1e-12) -> complex:
    """J_{order-1}(z) / J_order(z) by a modified Lentz continued fraction.

    The recurrence J_{n-1} + J_{n+1} = (2n/z) J_n gives
        J_{n-1}/J_n = 2n/z - 1/(2(n+1)/z - 1/(2(n+2)/z - ...)),
    whose tail is the minimal-solution ratio, so the fraction converges for
    every z off the poles.  Raises PoleError (with a Newton distance
    estimate) when z sits within working tolerance of a zero of J_order.
    """
    if not (math.isfinite(order) and _is_finite_c(z)):
        raise InvalidArgumentError("bessel_j_ratio requires finite inputs")
    z = complex(z)
    az = abs(z)
    if az == 0.0:
        raise InvalidArgumentError("ratio undefined at z = 0")
    if az > NATIVE_MAX:
        with MP_LOCK, mpmath.workdps(_auto_dps(az)):
            val = bessel_ratio_mp(order, mpmath.mpc(z))
            return complex(val)

    value = _lentz_ratio(order, z, az)

    # pole guard: compare |J_order| against its typical envelope
    j_n = _jv(order, z, 1e-8)
    envelope = math.sqrt(2.0 / (math.pi * max(az, 0.5))) * math.exp(abs(z.imag))
    if abs(j_n) < 1e-12 * envelope:
        j_prime = value * j_n - (order / z) * j_n  # J_{n-1} - n J_n / z
        dist = abs(j_n / j_prime) if j_prime != 0 else 0.0
        raise PoleError(
            "z=%r lies within tolerance of a zero of J_%g" % (z, order), distance=dist)
    return value


def _lentz_ratio(order: float, z: complex, az: float) -> complex:
    tiny = 1e-30
    b0 = 2.0 * order / z
    f = b0 if b0 != 0 else complex(tiny)
    c = f
    d = 0.0 + 0.0j
    n_max = int(3 * az) + 50000
    for j in range(1, n_max):
        a_j = -1.0
        b_j = 2.0 * (order + j) / z
        d = b_j + a_j * d
        if d == 0:
            d = complex(tiny)
        c = b_j + a_j / c
        if c == 0:
            c = complex(tiny)
        d = 1.0 / d
        delta = c * d
        f = f * delta
        if j > 3 and abs(delta - 1.0) < 5e-15:
            return f
    raise AccuracyError("continued fraction for Bessel ratio did not converge",
                        achieved=abs(delta - 1.0))


def bessel_ratio_mp(order: float, z) -> "mpmath.mpc":
    """J_{order-1}(z)/J_order(z) at the caller's current mpmath precision."""
    denom = mpmath.besselj(order, z)
    if denom == 0:
        raise PoleError("J_%g vanishes at z=%s" % (order, z), distance=0.0)
    return mpmath.besselj(order - 1.0, z) / denom
