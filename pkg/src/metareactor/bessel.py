"""Bessel functions of the first kind, orders 0-2, for complex arguments.

Ascending power series inside ``|z| <= 20`` and the Hankel asymptotic
expansion outside. Where the series loses too many digits to cancellation
(near the real axis at moderate ``|z|``) the same series is summed in
extended precision with mpmath. Inside the band ``15 <= |z| <= 25`` both
representations are evaluated and compared.

``scaled=True`` returns J_n(z) exp(-|Im z|), which stays finite where
J_n itself overflows; ratios of Bessel functions should use it.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np

from .errors import BesselAccuracyError, DomainError

SERIES_RADIUS = 20.0
CHECK_BAND = (15.0, 25.0)
MAX_ABS_ARG = 1e4
CHECK_RTOL = 1e-10
# exp(|z| - |Im z|) estimates how much the alternating series cancels
_CANCELLATION_LIMIT = 1e4
_SERIES_TERMS = 120


def _envelope(z):
    """Natural magnitude scale of J_n(z) away from the origin."""
    az = np.maximum(np.abs(z), 1.0)
    return np.sqrt(2.0 / (np.pi * az)) * np.exp(np.abs(z.imag))


def _series_float(order, z):
    half = z / 2.0
    q = -(half * half)
    term = half**order / math.factorial(order)
    total = term.copy()
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (k + order))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _series_mp(order, z, dps=40):
    with mpmath.workdps(dps):
        half = mpmath.mpc(z.real, z.imag) / 2
        q = -(half * half)
        term = half**order / math.factorial(order)
        total = term
        k = 1
        while True:
            term = term * q / (k * (k + order))
            total += term
            if abs(term) < mpmath.mpf(10) ** (-dps + 2) * max(abs(total), mpmath.mpf(10) ** -300):
                break
            k += 1
        return complex(total)


def _series(order, z):
    out = _series_float(order, z)
    loss = np.exp(np.abs(z) - np.abs(z.imag))
    redo = np.nonzero(loss > _CANCELLATION_LIMIT)[0]
    for i in redo:
        out[i] = _series_mp(order, z[i])
    return out


def _hankel(order, z):
    """Scaled asymptotic value J_n(z) exp(-|Im z|)."""
    # map to the right half plane: J_n(-z) = (-1)^n J_n(z)
    flip = z.real < 0
    w = np.where(flip, -z, z)
    mu = 4.0 * order * order
    p = np.ones_like(w)
    qsum = np.zeros_like(w)
    term = np.ones_like(w)
    last = np.full(w.shape, np.inf)
    active = np.ones(w.shape, dtype=bool)
    for k in range(1, 80):
        factor = (mu - (2 * k - 1) ** 2) / (k * 8.0)
        term = term * factor / w
        mag = np.abs(term)
        # stop each element at its smallest term (optimal truncation)
        active &= mag < last
        if not active.any() or factor == 0.0:
            break
        last = np.where(active, mag, last)
        if k % 2 == 0:
            sign = (-1) ** (k // 2)
            p = p + np.where(active, sign * term, 0)
        else:
            sign = (-1) ** ((k - 1) // 2)
            qsum = qsum + np.where(active, sign * term, 0)
    chi = w - (order / 2.0 + 0.25) * np.pi
    damp = np.abs(w.imag)
    e_pos = np.exp(1j * chi - damp)
    e_neg = np.exp(-1j * chi - damp)
    cos_s = 0.5 * (e_pos + e_neg)
    sin_s = -0.5j * (e_pos - e_neg)
    val = np.sqrt(2.0 / (np.pi * w)) * (p * cos_s - qsum * sin_s)
    return np.where(flip & (order % 2 == 1), -val, val)


def bessel_j(order: int, z, scaled: bool = False):
    """J_order(z) for order in {0, 1, 2} and complex ``z`` (scalar or array)."""
    if order not in (0, 1, 2):
        raise DomainError(f"order must be 0, 1 or 2, got {order}")
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    az = np.abs(zz)
    if np.any(~np.isfinite(zz)):
        raise DomainError("z must be finite")
    # unscaled values lose their phase accuracy far out on the real axis
    if not scaled and np.any(az >= MAX_ABS_ARG):
        raise DomainError(f"|z| must be below {MAX_ABS_ARG:g} (use scaled=True)")

    out = np.empty_like(zz)
    near = az <= SERIES_RADIUS
    if near.any():
        out[near] = _series(order, zz[near]) * np.exp(-np.abs(zz[near].imag))
    if (~near).any():
        out[~near] = _hankel(order, zz[~near])

    band = (az >= CHECK_BAND[0]) & (az <= CHECK_BAND[1])
    if band.any():
        zb = zz[band]
        s = _series(order, zb) * np.exp(-np.abs(zb.imag))
        h = _hankel(order, zb)
        err = np.abs(s - h) / (_envelope(zb) * np.exp(-np.abs(zb.imag)))
        if np.any(err > CHECK_RTOL):
            worst = int(np.argmax(err))
            raise BesselAccuracyError(
                f"J_{order} series/asymptotic mismatch {err[worst]:.2e} at z={zb[worst]}"
            )

    if not scaled:
        with np.errstate(over="ignore", invalid="ignore"):
            out = out * np.exp(np.abs(zz.imag))
    out = out.reshape(np.shape(z)) if not scalar else out
    return complex(out[0]) if scalar else out


def j0(z):
    return bessel_j(0, z)


def j1(z):
    return bessel_j(1, z)


def j2(z):
    return bessel_j(2, z)
