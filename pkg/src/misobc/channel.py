"""
Channel realizations for the two-user MISO broadcast channel with mixed
CSIT (perfect delayed, imperfect current).

Each user's channel is split into a current estimate known to the
transmitter and an independent estimation error::

    h = h_hat + h_tilde,   h_hat ~ CN(0, (1 - s2) I),  h_tilde ~ CN(0, s2 I)

with ``s2 = P ** -alpha_prime``. Slots are i.i.d. in time.
"""

from dataclasses import dataclass

import numpy as np

from . import complexla as cla
from .errors import BadPower, DegenerateRealization, OutOfRange

__all__ = ["SimParams", "ChannelState", "EquivalentCoeffs", "stream",
           "sample_state", "to_equivalent", "receive"]

DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class SimParams:
    """
    Parameters of one Monte Carlo operating point.

    `alpha_prime` is stored; ``alpha = 1 - alpha_prime`` is derived.
    `user_gains` scales each user's whole channel (estimate and error),
    which lets the two users have different fading statistics.
    """
    power: float
    alpha_prime: float
    epsilon: float = 0.05
    zeta: float = 0.01
    trials: int = 2000
    seed: int = 42
    user_gains: tuple = (1.0, 1.0)

    def __post_init__(self):
        if not self.power > 1:
            raise BadPower(f"power must exceed 1, got {self.power!r}")
        if not 0.0 <= self.alpha_prime <= 1.0:
            raise OutOfRange(f"alpha_prime must lie in [0, 1], got {self.alpha_prime!r}")
        if not self.epsilon > 0 or not self.zeta > 0:
            raise ValueError("epsilon and zeta must be positive")
        if int(self.trials) < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if len(self.user_gains) != 2 or min(self.user_gains) <= 0:
            raise ValueError("user_gains must be two positive numbers")

    @classmethod
    def from_alpha(cls, power, alpha, **kw):
        if not 0.0 <= alpha <= 1.0:
            raise OutOfRange(f"alpha must lie in [0, 1], got {alpha!r}")
        return cls(power=power, alpha_prime=1.0 - alpha, **kw)

    @classmethod
    def from_db(cls, p_db, alpha, **kw):
        return cls.from_alpha(10.0 ** (p_db / 10.0), alpha, **kw)

    @property
    def alpha(self):
        return 1.0 - self.alpha_prime

    @property
    def sigma2(self):
        return float(self.power) ** (-self.alpha_prime)

    @property
    def log2_power(self):
        return float(np.log2(self.power))


@dataclass(frozen=True)
class ChannelState:
    """One (or a batch of) channel realizations; arrays of shape (..., 2)."""
    h_hat: np.ndarray
    g_hat: np.ndarray
    h_tilde: np.ndarray
    g_tilde: np.ndarray
    sigma2: float

    @property
    def h(self):
        return self.h_hat + self.h_tilde

    @property
    def g(self):
        return self.g_hat + self.g_tilde

    def __len__(self):
        return self.h_hat.shape[0] if self.h_hat.ndim > 1 else 1


@dataclass(frozen=True)
class EquivalentCoeffs:
    h_eff: np.ndarray
    g_eff: np.ndarray
    z_scale_1: np.ndarray
    z_scale_2: np.ndarray


def stream(seed, *key):
    """
    Independent generator for a job identified by integer `key`.

    The splitting rule is ``SeedSequence(seed, spawn_key=key)``: the same
    (seed, key) always yields the same stream and distinct keys yield
    statistically independent streams.
    """
    return np.random.default_rng(
        np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def sample_state(params, rng, n=None):
    """
    Draw channel realizations for `n` i.i.d. slots (a single slot if None).

    Unit-variance Gaussians are drawn in a fixed order (h_hat, g_hat,
    h_tilde, g_tilde) and scaled afterwards, so the same stream gives
    coupled realizations at every power level.
    """
    if not params.power > 1:
        raise BadPower("power must exceed 1")
    shape = (2,) if n is None else (n, 2)
    s2 = params.sigma2
    gh, gg = params.user_gains
    raw = [cla.crandn(rng, shape) for _ in range(4)]
    return ChannelState(
        h_hat=raw[0] * np.sqrt((1.0 - s2) * gh),
        g_hat=raw[1] * np.sqrt((1.0 - s2) * gg),
        h_tilde=raw[2] * np.sqrt(s2 * gh),
        g_tilde=raw[3] * np.sqrt(s2 * gg),
        sigma2=s2,
    )


def to_equivalent(state, v, u, tol=1e-10):
    """
    Cross coefficients of the normalized two-stream model.

    With ``v`` orthogonal to ``g_hat`` and ``u`` orthogonal to ``h_hat``
    the receivers see::

        y1 / (h^H v) = x1 + [h_tilde_n^H u / h^H v] sqrt(P^(1-a')) x2 + z1'
        y2 / (g^H u) = x2 + [g_tilde_n^H v / g^H u] sqrt(P^(1-a')) x1 + z2'

    where ``h_tilde_n = h_tilde / sigma`` has identity covariance.
    """
    v = np.asarray(v, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if np.any(np.abs(cla.hermitian_dot(state.g_hat, v)) > tol) or \
            np.any(np.abs(cla.hermitian_dot(state.h_hat, u)) > tol):
        raise ValueError("v must be orthogonal to g_hat and u to h_hat")
    hv = cla.hermitian_dot(state.h, v)
    gu = cla.hermitian_dot(state.g, u)
    if np.any(np.abs(hv) < DEGENERATE_TOL) or np.any(np.abs(gu) < DEGENERATE_TOL):
        raise DegenerateRealization("vanishing direct gain h^H v or g^H u")
    sigma = np.sqrt(state.sigma2)
    h_eff = cla.hermitian_dot(state.h_tilde / sigma, u) / hv
    g_eff = cla.hermitian_dot(state.g_tilde / sigma, v) / gu
    return EquivalentCoeffs(h_eff=h_eff, g_eff=g_eff,
                            z_scale_1=1.0 / np.abs(hv), z_scale_2=1.0 / np.abs(gu))


def receive(x, state, rng, noiseless=False):
    """Return ``(h^H x + z1, g^H x + z2)`` with fresh CN(0, 1) noise."""
    y1 = cla.hermitian_dot(state.h, x)
    y2 = cla.hermitian_dot(state.g, x)
    if not noiseless:
        y1 = y1 + cla.crandn(rng, np.shape(y1))
        y2 = y2 + cla.crandn(rng, np.shape(y2))
    return y1, y2
