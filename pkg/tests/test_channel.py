import dataclasses

import numpy as np
import pytest

from misobc import complexla as cla
from misobc.analysis import fit_dof
from misobc.channel import (SimParams, receive, sample_state, stream,
                            to_equivalent)
from misobc.errors import BadPower, DegenerateRealization, OutOfRange
from misobc.schemes import phase1_power_levels


def test_params_alpha_relation():
    p = SimParams(power=100.0, alpha_prime=0.3)
    assert p.alpha + p.alpha_prime == 1.0
    q = SimParams.from_alpha(100.0, 0.25)
    assert q.alpha_prime == 0.75
    r = SimParams.from_db(40, 0.5)
    assert np.isclose(r.power, 1e4)


@pytest.mark.parametrize("kw", [dict(power=1.0, alpha_prime=0.5),
                                dict(power=0.5, alpha_prime=0.5)])
def test_rejects_power_at_most_one(kw):
    with pytest.raises(BadPower):
        SimParams(**kw)


@pytest.mark.parametrize("ap", [-0.1, 1.1])
def test_rejects_alpha_prime_out_of_range(ap):
    with pytest.raises(OutOfRange):
        SimParams(power=10.0, alpha_prime=ap)


def test_sigma2_examples(rng):
    assert np.isclose(SimParams(power=100.0, alpha_prime=1.0).sigma2, 0.01)
    p0 = SimParams(power=100.0, alpha_prime=0.0)
    assert p0.sigma2 == 1.0
    st = sample_state(p0, rng, 100)
    assert np.all(st.h_hat == 0) and np.all(st.g_hat == 0)
    assert st.sigma2 == 1.0


def test_error_variance_matches_sigma2(rng):
    p = SimParams(power=100.0, alpha_prime=0.5)
    st = sample_state(p, rng, 100_000)
    for err in (st.h_tilde, st.g_tilde):
        emp = np.mean(np.abs(err) ** 2, axis=0)
        assert np.all(np.abs(emp - 0.1) / 0.1 < 0.03)
    for est in (st.h_hat, st.g_hat):
        emp = np.mean(np.abs(est) ** 2, axis=0)
        assert np.all(np.abs(emp - 0.9) / 0.9 < 0.03)


def test_true_channel_is_sum(rng):
    st = sample_state(SimParams(power=1e3, alpha_prime=0.4), rng, 10)
    assert np.array_equal(st.h, st.h_hat + st.h_tilde)
    assert np.array_equal(st.g, st.g_hat + st.g_tilde)


def test_single_slot_shape(rng):
    st = sample_state(SimParams(power=10.0, alpha_prime=0.5), rng)
    assert st.h.shape == (2,)


def test_estimate_and_error_uncorrelated(rng):
    st = sample_state(SimParams(power=100.0, alpha_prime=0.5), rng, 100_000)
    for a, b in ((st.h_hat, st.h_tilde), (st.g_hat, st.g_tilde), (st.h_hat, st.g_hat)):
        for k in range(2):
            corr = np.abs(np.mean(np.conj(a[:, k]) * b[:, k])) / np.sqrt(
                np.mean(np.abs(a[:, k]) ** 2) * np.mean(np.abs(b[:, k]) ** 2))
            assert corr < 0.02


def test_reproducible_streams():
    p = SimParams(power=1e4, alpha_prime=0.5)
    a = sample_state(p, stream(11, 3), 50)
    b = sample_state(p, stream(11, 3), 50)
    c = sample_state(p, stream(11, 4), 50)
    for f in ("h_hat", "g_hat", "h_tilde", "g_tilde"):
        assert getattr(a, f).tobytes() == getattr(b, f).tobytes()
        assert getattr(a, f).tobytes() != getattr(c, f).tobytes()


def test_user_gains_scale_each_user(rng):
    p = SimParams(power=100.0, alpha_prime=0.5, user_gains=(1.0, 4.0))
    st = sample_state(p, rng, 100_000)
    assert abs(np.mean(np.abs(st.h) ** 2) - 1.0) < 0.03
    assert abs(np.mean(np.abs(st.g) ** 2) - 4.0) < 0.12


def _zf_pair(st):
    return cla.orthonormal_complement(st.g_hat), cla.orthonormal_complement(st.h_hat)


def test_equivalent_zero_error_kills_cross_term(rng):
    st = sample_state(SimParams(power=1e4, alpha_prime=0.5), rng, 100)
    st = dataclasses.replace(st, h_tilde=np.zeros_like(st.h_tilde),
                             g_tilde=np.zeros_like(st.g_tilde))
    v, u = _zf_pair(st)
    eq = to_equivalent(st, v, u)
    assert np.all(eq.h_eff == 0) and np.all(eq.g_eff == 0)


def test_equivalent_exact_zero_forcing(rng):
    # estimate equal to the true channel: u is orthogonal to h itself
    st = sample_state(SimParams(power=1e4, alpha_prime=0.5), rng, 100)
    st = dataclasses.replace(st, h_hat=st.h_hat + st.h_tilde, h_tilde=np.zeros_like(st.h_tilde))
    v, u = _zf_pair(st)
    assert np.max(np.abs(cla.hermitian_dot(st.h, u))) < 1e-12
    eq = to_equivalent(st, v, u)
    assert np.max(np.abs(eq.h_eff)) < 1e-12


def test_equivalent_model_reconstructs_received_signal(rng):
    p = SimParams(power=1e4, alpha_prime=0.5)
    st = sample_state(p, rng, 1000)
    v, u = _zf_pair(st)
    eq = to_equivalent(st, v, u)
    x1, x2 = cla.crandn(rng, 1000), cla.crandn(rng, 1000)
    x = v * x1[:, None] + u * x2[:, None]
    y1, _ = receive(x, st, rng, noiseless=True)
    # y1 / (h^H v) = x1 + sqrt(P^(1 - a')) h_eff x2 / sqrt(P)  (unnormalized inputs)
    lhs = y1 * eq.z_scale_1 * np.exp(-1j * np.angle(cla.hermitian_dot(st.h, v)))
    rhs = x1 + np.sqrt(p.sigma2) * eq.h_eff * x2
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


def test_equivalent_cross_coefficient_does_not_scale_with_power(streams):
    # 1/|h^H v|^2 has a divergent mean, so compare robust spread measures
    med, num_var = [], []
    for k, p_lin in enumerate((1e2, 1e4, 1e6)):
        p = SimParams(power=p_lin, alpha_prime=0.5)
        st = sample_state(p, streams(k), 10_000)
        v, u = _zf_pair(st)
        eq = to_equivalent(st, v, u)
        med.append(np.median(np.abs(eq.h_eff) ** 2))
        num = cla.hermitian_dot(st.h_tilde / np.sqrt(st.sigma2), u)
        num_var.append(np.var(num))
    assert max(med) / min(med) < 1.10
    assert max(num_var) / min(num_var) < 1.10


def test_equivalent_requires_zero_forcing_directions(rng):
    st = sample_state(SimParams(power=1e4, alpha_prime=0.5), rng, 5)
    v, u = _zf_pair(st)
    with pytest.raises(ValueError):
        to_equivalent(st, u, v)


def test_equivalent_degenerate(rng):
    st = sample_state(SimParams(power=1e4, alpha_prime=0.5), rng, 3)
    v, u = _zf_pair(st)
    h0 = st.h_hat.copy()
    # make h^H v vanish for the first trial while keeping u orthogonal to h_hat
    h_new = cla.orthonormal_complement(v[0])
    st = dataclasses.replace(st, h_hat=np.vstack([h_new - st.h_tilde[0], h0[1:]]))
    _, u = _zf_pair(st)
    with pytest.raises(DegenerateRealization):
        to_equivalent(st, v, u)


def test_receive_noise_only(rng):
    st = sample_state(SimParams(power=100.0, alpha_prime=0.5), rng, 100_000)
    y1, y2 = receive(np.zeros((100_000, 2)), st, rng)
    assert abs(np.mean(np.abs(y1) ** 2) - 1) < 0.02
    assert abs(np.mean(np.abs(y2) ** 2) - 1) < 0.02


def test_receive_noiseless_is_inner_product(rng):
    st = sample_state(SimParams(power=100.0, alpha_prime=0.5), rng)
    y1, y2 = receive(np.array([1.0, 0.0]), st, rng, noiseless=True)
    assert y1 == np.conj(st.h[0])
    assert y2 == np.conj(st.g[0])


def test_receive_second_moment(rng):
    n, p = 100_000, 100.0
    st = sample_state(SimParams(power=p, alpha_prime=0.5), rng, n)
    x = cla.crandn(rng, (n, 2), var=p / 2)
    y1, _ = receive(x, st, rng)
    # E|h^H x|^2 = E||x||^2 for h ~ CN(0, I) independent of x
    expected = 1.0 + np.mean(np.sum(np.abs(x) ** 2, axis=1))
    assert abs(np.mean(np.abs(y1) ** 2) / expected - 1) < 0.03


@pytest.mark.parametrize("ap", [0.0, 0.3, 0.5, 0.8])
def test_phase1_power_exponents(ap, streams):
    pts_b1, pts_a1 = [], []
    for p_lin in (1e3, 1e4, 1e5):
        p = SimParams(power=p_lin, alpha_prime=ap)
        lv = phase1_power_levels(p, streams(1), 100_000)
        pts_b1.append((p_lin, np.log2(lv[(1, "b1")])))
        pts_a1.append((p_lin, np.log2(lv[(2, "a1")])))
    assert abs(fit_dof(pts_b1).slope - (1 - ap)) < 0.1
    assert abs(fit_dof(pts_a1).slope - (1 - ap)) < 0.1
