"""Truncated uniform scalar quantizer for phase-1 interference terms."""

from dataclasses import dataclass

import numpy as np

from .errors import TruncationTooSmall

__all__ = ["QuantizedInterference", "quantize", "bit_count", "truncation_value",
           "UNIT_CELL_DISTORTION"]

# E|delta|^2 for a complex value with unit-step rounding on both axes.
UNIT_CELL_DISTORTION = 1.0 / 6.0


@dataclass(frozen=True)
class QuantizedInterference:
    eta: np.ndarray
    eta_hat: np.ndarray
    delta: np.ndarray
    eta_bar: float
    bits: float
    overflow: np.ndarray


def _round_clamp(x, k):
    q = np.floor(x + 0.5)  # ties toward +inf
    over = np.abs(q) > k
    return np.clip(q, -k, k), over


def quantize(eta, eta_bar):
    """
    Round real and imaginary parts of `eta` to the nearest integer on
    ``[-ceil(eta_bar), ceil(eta_bar)]``. Out-of-range values are clamped to
    the boundary and flagged in ``overflow``.
    """
    if not eta_bar >= 1:
        raise TruncationTooSmall(f"eta_bar must be >= 1, got {eta_bar!r}")
    eta = np.asarray(eta, dtype=complex)
    k = float(np.ceil(eta_bar))
    re, over_re = _round_clamp(eta.real, k)
    im, over_im = _round_clamp(eta.imag, k)
    eta_hat = re + 1j * im
    return QuantizedInterference(eta=eta, eta_hat=eta_hat, delta=eta - eta_hat,
                                 eta_bar=float(eta_bar), bits=bit_count(eta_bar),
                                 overflow=over_re | over_im)


def bit_count(eta_bar):
    """Bits per quantized value: ``2 * log2(2 * ceil(eta_bar))``."""
    if not eta_bar >= 1:
        raise TruncationTooSmall(f"eta_bar must be >= 1, got {eta_bar!r}")
    return 2.0 * float(np.log2(2.0 * np.ceil(eta_bar)))


def truncation_value(params):
    """``P^((1 + zeta)/2) * sigma`` with ``sigma^2 = P^-alpha_prime``."""
    p = float(params.power)
    return p ** ((1.0 + params.zeta - params.alpha_prime) / 2.0)
