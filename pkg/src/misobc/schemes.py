"""
Transmission schemes for the two-user MISO BC with mixed CSIT.

All rates are Gaussian-codebook mutual informations in bits per channel
use, estimated by Monte Carlo over ``params.trials`` i.i.d. channel draws.
Every function is vectorized over trials: beamformers, symbols and channel
vectors are arrays of shape ``(n, 2)`` / ``(n,)``.

Schemes
-------
zf
    One slot, zero-forcing on the current estimates.
mat
    The three-phase scheme with the current estimate ignored
    (``alpha_prime = 0``); digital (quantize-and-multicast) variant.
kobayashi
    Phase 1 with partial zero-forcing, then the quantized interference is
    multicast at full power in phases 2 and 3.
optimal
    As kobayashi, but phases 2 and 3 superpose one zero-forced private
    symbol per user under the multicast layer.
"""

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import complexla as cla
from .channel import sample_state
from .quantizer import UNIT_CELL_DISTORTION, quantize, truncation_value

__all__ = ["PhaseOnePlan", "PhaseTwoPlan", "SchemeResult", "SCHEMES",
           "phase1_powers", "phase2_powers", "run_phase1", "run_phase2",
           "pair_rate", "reconstruct_mimo", "common_rate", "private_rate",
           "run_optimal_scheme", "run_kobayashi_scheme", "run_zf_scheme",
           "run_mat_scheme", "run_scheme", "phase1_power_levels",
           "phase2_power_levels"]

COMMON_NOISE_MODELS = ("printed", "cross-only")


def _log2_1p(x):
    return np.log1p(x) / np.log(2.0)


def _zf_direction(estimate, fallback):
    """
    Unit vector orthogonal to each row of `estimate`.

    Rows with a zero estimate (no current CSIT) take the matching row of
    `fallback`, which the caller draws unconditionally so that random
    stream consumption never depends on the data.
    """
    out = np.array(fallback, dtype=complex, copy=True)
    ok = cla.norm(estimate) > 0
    if np.any(ok):
        out[ok] = cla.orthonormal_complement(estimate[ok])
    return out


# ---------------------------------------------------------------------------
# Phase 1
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class PhaseOnePlan:
    """Beamformers, powers and unit-variance symbols of the first slot."""
    v1: np.ndarray
    v2: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    p_strong: float
    p_weak: float
    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    def transmit(self):
        ss, sw = np.sqrt(self.p_strong), np.sqrt(self.p_weak)
        return (self.v1 * (ss * self.a1)[..., None] + self.v2 * (sw * self.a2)[..., None]
                + self.u1 * (ss * self.b1)[..., None] + self.u2 * (sw * self.b2)[..., None])


class PhaseOneOutput(NamedTuple):
    y1: np.ndarray
    y2: np.ndarray
    eta1: np.ndarray
    eta2: np.ndarray
    plan: PhaseOnePlan


def phase1_powers(params):
    """(p_strong, p_weak) = ((P - P^(1-a'-eps))/2, P^(1-a'-eps)/2)."""
    p = float(params.power)
    weak = p ** (1.0 - params.alpha_prime - params.epsilon)
    return (p - weak) / 2.0, weak / 2.0


def run_phase1(params, state, rng, noiseless=False):
    """
    Send ``x = v1 a1 + v2 a2 + u1 b1 + u2 b2`` over `state`.

    `v1`/`u1` zero-force the current estimates of the other user; `v2`/`u2`
    are isotropic random directions. Returns received signals and the
    interference terms each receiver sees::

        eta1 = h_tilde^H u1 b1 + h^H u2 b2
        eta2 = g_tilde^H v1 a1 + g^H v2 a2
    """
    n = len(state)
    fb_v, fb_u = cla.random_unit(rng, n), cla.random_unit(rng, n)
    v2, u2 = cla.random_unit(rng, n), cla.random_unit(rng, n)
    a1, a2, b1, b2 = (cla.crandn(rng, n) for _ in range(4))
    v1 = _zf_direction(state.g_hat, fb_v)
    u1 = _zf_direction(state.h_hat, fb_u)
    ps, pw = phase1_powers(params)
    plan = PhaseOnePlan(v1=v1, v2=v2, u1=u1, u2=u2, p_strong=ps, p_weak=pw,
                        a1=a1, a2=a2, b1=b1, b2=b2)

    x = plan.transmit()
    y1 = cla.hermitian_dot(state.h, x)
    y2 = cla.hermitian_dot(state.g, x)
    if not noiseless:
        y1 = y1 + cla.crandn(rng, n)
        y2 = y2 + cla.crandn(rng, n)
    ss, sw = np.sqrt(ps), np.sqrt(pw)
    eta1 = (cla.hermitian_dot(state.h_tilde, u1) * ss * b1
            + cla.hermitian_dot(state.h, u2) * sw * b2)
    eta2 = (cla.hermitian_dot(state.g_tilde, v1) * ss * a1
            + cla.hermitian_dot(state.g, v2) * sw * a2)
    return PhaseOneOutput(y1, y2, eta1, eta2, plan)


def effective_mimo(state, plan, receiver):
    """
    Effective 2x2 matrix mapping the receiver's unit-variance symbol pair to
    ``[own observation minus own interference; other user's interference]``.
    Powers are folded into the columns.
    """
    ss, sw = np.sqrt(plan.p_strong), np.sqrt(plan.p_weak)
    if receiver == 1:
        own, other, c1, c2 = state.h, state.g, plan.v1, plan.v2
    elif receiver == 2:
        own, other, c1, c2 = state.g, state.h, plan.u1, plan.u2
    else:
        raise ValueError("receiver must be 1 or 2")
    m = np.empty(own.shape[:-1] + (2, 2), dtype=complex)
    m[..., 0, 0] = cla.hermitian_dot(own, c1) * ss
    m[..., 0, 1] = cla.hermitian_dot(own, c2) * sw
    m[..., 1, 0] = cla.hermitian_dot(other, c1) * ss
    m[..., 1, 1] = cla.hermitian_dot(other, c2) * sw
    return m


def pair_rate(m, distortion=UNIT_CELL_DISTORTION):
    """
    Per-trial ``log2 det(I + K^-1 M M^H)`` of the effective 2x2 channel.

    The noise covariance is ``K = diag(1 + D, D)``: thermal noise plus
    quantization error on the first row, quantization error alone on the
    second, with the quantization error treated as Gaussian.
    """
    a = np.einsum("...ij,...kj->...ik", m, np.conj(m))
    a[..., 0, 0] += 1.0 + distortion
    a[..., 1, 1] += distortion
    det_k = (1.0 + distortion) * distortion
    return np.log2(np.real(cla.det2(a)) / det_k)


class MimoEstimate(NamedTuple):
    symbols: np.ndarray
    residual: np.ndarray
    singular: np.ndarray


def reconstruct_mimo(y_phase1, eta_hat_1, eta_hat_2, state, plan, receiver=1):
    """
    Solve the stacked phase-1 system for the receiver's symbol pair.

    Receiver 1 stacks ``[y1(1) - eta_hat_1, eta_hat_2]`` and receiver 2
    stacks ``[y2(1) - eta_hat_2, eta_hat_1]``. Returns the estimated
    unit-variance symbols, the relative solve residual
    ``|M s - rhs| / |rhs|``, and a mask of singular (skipped) trials whose
    estimates are NaN.
    """
    m = effective_mimo(state, plan, receiver)
    if receiver == 1:
        rhs = np.stack([y_phase1 - eta_hat_1, eta_hat_2], axis=-1)
    else:
        rhs = np.stack([y_phase1 - eta_hat_2, eta_hat_1], axis=-1)
    rhs = np.asarray(rhs, dtype=complex)
    singular = cla.singular_mask(m)
    est = np.full(rhs.shape, np.nan, dtype=complex)
    ok = ~singular
    if np.any(ok):
        est[ok] = cla.solve2(m[ok], rhs[ok])
    resid = cla.norm(cla.matvec(m, est) - rhs) / np.maximum(cla.norm(rhs), 1e-300)
    return MimoEstimate(est, resid, singular)


# ---------------------------------------------------------------------------
# Phases 2 and 3
# ---------------------------------------------------------------------------
def phase2_powers(params):
    """
    (p_common, p_private) with ``p_common + 2 p_private = P``.

    Normally ``p_private = P^a' / 2``; the private layers are capped at
    half the budget so the multicast layer keeps power as a' -> 1.
    """
    p = float(params.power)
    private_total = min(p ** params.alpha_prime, p / 2.0)
    return p - private_total, private_total / 2.0


@dataclass(frozen=True)
class PhaseTwoPlan:
    w: np.ndarray
    v: np.ndarray
    u: np.ndarray
    p_common: float
    p_private: float
    c: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def transmit(self):
        sc, sp = np.sqrt(self.p_common), np.sqrt(self.p_private)
        return (self.w * (sc * self.c)[..., None] + self.v * (sp * self.a)[..., None]
                + self.u * (sp * self.b)[..., None])


@dataclass(frozen=True)
class PhaseTwoOutput:
    """
    Received powers per trial. Index 0 is receiver 1, index 1 receiver 2;
    ``own`` is the intended private layer, ``cross`` the other user's
    leaked private layer.
    """
    plan: PhaseTwoPlan
    common: np.ndarray
    own: np.ndarray
    cross: np.ndarray
    common_noise: str = "printed"

    @property
    def sinr_common(self):
        if self.common_noise == "printed":
            return self.common / (1.0 + self.own + self.cross)
        return self.common / (1.0 + self.cross)

    @property
    def sinr_private(self):
        return self.own / (1.0 + self.cross)


def run_phase2(params, state, rng, common_noise="printed", private=True):
    """
    One multicast slot ``x = w c + v a + u b``.

    With ``private=False`` the slot carries the multicast layer alone at
    full power (the Kobayashi et al. variant).
    """
    if common_noise not in COMMON_NOISE_MODELS:
        raise ValueError(f"unknown common noise model {common_noise!r}")
    n = len(state)
    fb_v, fb_u = cla.random_unit(rng, n), cla.random_unit(rng, n)
    w = cla.random_unit(rng, n)
    c, a, b = (cla.crandn(rng, n) for _ in range(3))
    v = _zf_direction(state.g_hat, fb_v)
    u = _zf_direction(state.h_hat, fb_u)
    if private:
        pc, pp = phase2_powers(params)
    else:
        pc, pp = float(params.power), 0.0
    plan = PhaseTwoPlan(w=w, v=v, u=u, p_common=pc, p_private=pp, c=c, a=a, b=b)

    h, g = state.h, state.g
    gain = lambda ch, bf: np.abs(cla.hermitian_dot(ch, bf)) ** 2  # noqa: E731
    common = np.stack([gain(h, w), gain(g, w)]) * pc
    own = np.stack([gain(h, v), gain(g, u)]) * pp
    cross = np.stack([gain(h, u), gain(g, v)]) * pp
    return PhaseTwoOutput(plan=plan, common=common, own=own, cross=cross,
                          common_noise=common_noise)


def common_rate(params, rng, n_mc, common_noise="printed"):
    """
    ``min_k E[log2(1 + SINR_common,k)]`` over the two receivers, with the
    private layers treated as noise.
    """
    if n_mc < 1:
        raise ValueError("n_mc must be >= 1")
    out = run_phase2(params, sample_state(params, rng, n_mc), rng, common_noise)
    return float(np.min(np.mean(_log2_1p(out.sinr_common), axis=1)))


def private_rate(params, rng, n_mc):
    """
    Mean of ``E[log2(1 + SINR_private,k)]`` over both users, after the
    multicast layer has been cancelled.
    """
    if n_mc < 1:
        raise ValueError("n_mc must be >= 1")
    out = run_phase2(params, sample_state(params, rng, n_mc), rng)
    return float(np.mean(_log2_1p(out.sinr_private)))


# ---------------------------------------------------------------------------
# End-to-end schemes
# ---------------------------------------------------------------------------
@dataclass
class SchemeResult:
    """
    Monte Carlo outcome of one scheme at one (alpha, P) point.

    Rates are per-user bits per channel use, normalized by ``duration``.
    ``mimo_residual`` is the mean squared error of the reconstructed
    unit-variance phase-1 symbols over trials without quantizer overflow
    (NaN for schemes without phase-1 reconstruction).
    """
    scheme: str
    rate_user1: float
    rate_user2: float
    duration: float
    trials: int
    phase_rates: dict = field(default_factory=dict)
    overflow_count: int = 0
    degenerate_count: int = 0
    mimo_residual: float = float("nan")

    @property
    def sum_rate(self):
        return self.rate_user1 + self.rate_user2


def _multiphase(params, rng, private, common_noise, name):
    n = int(params.trials)
    s1 = sample_state(params, rng, n)
    ph1 = run_phase1(params, s1, rng)
    eta_bar = truncation_value(params)
    q1, q2 = quantize(ph1.eta1, eta_bar), quantize(ph1.eta2, eta_bar)
    overflow = q1.overflow | q2.overflow

    m_a = effective_mimo(s1, ph1.plan, 1)
    m_b = effective_mimo(s1, ph1.plan, 2)
    degenerate = cla.singular_mask(m_a) | cla.singular_mask(m_b)
    # probability-zero draws are dropped, i.e. the average is conditioned
    # on a non-degenerate realization
    keep = ~degenerate
    r_pair = (float(np.mean(pair_rate(m_a[keep]))), float(np.mean(pair_rate(m_b[keep]))))

    est_a = reconstruct_mimo(ph1.y1, q1.eta_hat, q2.eta_hat, s1, ph1.plan, 1)
    est_b = reconstruct_mimo(ph1.y2, q1.eta_hat, q2.eta_hat, s1, ph1.plan, 2)
    good = keep & ~overflow
    err = np.concatenate([
        np.abs(est_a.symbols[good] - np.stack([ph1.plan.a1, ph1.plan.a2], -1)[good]) ** 2,
        np.abs(est_b.symbols[good] - np.stack([ph1.plan.b1, ph1.plan.b2], -1)[good]) ** 2,
    ])
    mse = float(np.mean(err)) if err.size else float("nan")

    bits = q1.bits
    slots = []
    private_rates = []
    common_rates = []
    for _ in range(2):
        st = sample_state(params, rng, n)
        out = run_phase2(params, st, rng, common_noise=common_noise, private=private)
        rc = float(np.min(np.mean(_log2_1p(out.sinr_common), axis=1)))
        common_rates.append(rc)
        slots.append(bits / rc)
        if private:
            private_rates.append(tuple(np.mean(_log2_1p(out.sinr_private), axis=1)))
        else:
            private_rates.append((0.0, 0.0))
    t2, t3 = slots
    duration = 1.0 + t2 + t3
    rates = [(r_pair[k] + t2 * private_rates[0][k] + t3 * private_rates[1][k]) / duration
             for k in range(2)]
    phase_rates = {
        "pair": r_pair,
        "common": tuple(common_rates),
        "private2": tuple(float(r) for r in private_rates[0]),
        "private3": tuple(float(r) for r in private_rates[1]),
        "t2": t2,
        "t3": t3,
        "bits": bits,
    }
    return SchemeResult(scheme=name, rate_user1=float(rates[0]), rate_user2=float(rates[1]),
                        duration=duration, trials=n, phase_rates=phase_rates,
                        overflow_count=int(np.sum(overflow)),
                        degenerate_count=int(np.sum(degenerate)), mimo_residual=mse)


def run_optimal_scheme(params, rng, common_noise="printed"):
    """
    Three-phase scheme with private symbols superposed in phases 2 and 3.

    Phase 1 sends two symbols per user in one slot; the quantized
    interference terms are multicast in phases 2 and 3, lasting
    ``t = bits / R_common`` slots each, while one zero-forced private
    symbol per user rides under the multicast layer. Receivers finally
    invert a 2x2 system for their phase-1 symbol pair. Per-user rate::

        (R_pair + t2 R_private,2 + t3 R_private,3) / (1 + t2 + t3)
    """
    return _multiphase(params, rng, True, common_noise, "optimal")


def run_kobayashi_scheme(params, rng):
    """Phase 1 as the optimal scheme; phases 2/3 multicast only, at full power."""
    return _multiphase(params, rng, False, "printed", "kobayashi")


def run_mat_scheme(params, rng, common_noise="printed"):
    """The optimal scheme with the current estimate ignored (``alpha_prime = 0``)."""
    res = _multiphase(replace(params, alpha_prime=0.0), rng, True, common_noise, "mat")
    return res


def run_zf_scheme(params, rng):
    """
    Single-slot zero-forcing, ``x = v a + u b`` with power P/2 per user.

    The leaked cross term (power about P^alpha) is treated as noise.
    """
    n = int(params.trials)
    st = sample_state(params, rng, n)
    fb_v, fb_u = cla.random_unit(rng, n), cla.random_unit(rng, n)
    v = _zf_direction(st.g_hat, fb_v)
    u = _zf_direction(st.h_hat, fb_u)
    half = float(params.power) / 2.0
    gain = lambda ch, bf: np.abs(cla.hermitian_dot(ch, bf)) ** 2  # noqa: E731
    sinr1 = gain(st.h, v) * half / (1.0 + gain(st.h, u) * half)
    sinr2 = gain(st.g, u) * half / (1.0 + gain(st.g, v) * half)
    r1, r2 = float(np.mean(_log2_1p(sinr1))), float(np.mean(_log2_1p(sinr2)))
    return SchemeResult(scheme="zf", rate_user1=r1, rate_user2=r2, duration=1.0,
                        trials=n, phase_rates={"zf": (r1, r2)})


SCHEMES = {
    "zf": run_zf_scheme,
    "mat": run_mat_scheme,
    "kobayashi": run_kobayashi_scheme,
    "optimal": run_optimal_scheme,
}


def run_scheme(name, params, rng, common_noise="printed"):
    if name not in SCHEMES:
        raise ValueError(f"unknown scheme {name!r}")
    if name in ("optimal", "mat"):
        return SCHEMES[name](params, rng, common_noise=common_noise)
    return SCHEMES[name](params, rng)


# ---------------------------------------------------------------------------
# Received power levels
# ---------------------------------------------------------------------------
def phase1_power_levels(params, rng, n):
    """
    Mean received power of each phase-1 symbol at each receiver.

    Keys are ``(receiver, symbol)``, e.g. ``(1, "b1")`` is the leaked power
    of b1 at receiver 1 (order ``P^(1 - alpha_prime)``).
    """
    st = sample_state(params, rng, n)
    plan = run_phase1(params, st, rng, noiseless=True).plan
    out = {}
    for rx, ch in ((1, st.h), (2, st.g)):
        for name, bf, p in (("a1", plan.v1, plan.p_strong), ("a2", plan.v2, plan.p_weak),
                            ("b1", plan.u1, plan.p_strong), ("b2", plan.u2, plan.p_weak)):
            out[(rx, name)] = float(np.mean(np.abs(cla.hermitian_dot(ch, bf)) ** 2) * p)
    return out


def phase2_power_levels(params, rng, n):
    """Mean received power of (c, a, b) at each receiver in a phase-2 slot."""
    out = run_phase2(params, sample_state(params, rng, n), rng)
    levels = {}
    for k, rx in enumerate((1, 2)):
        mine, other = ("a", "b") if rx == 1 else ("b", "a")
        levels[(rx, "c")] = float(np.mean(out.common[k]))
        levels[(rx, mine)] = float(np.mean(out.own[k]))
        levels[(rx, other)] = float(np.mean(out.cross[k]))
    return levels
