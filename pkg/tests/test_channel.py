import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blindalign.beamform import build_beamforming, stream_power
from blindalign.channel import (effective_channel, receiver_rows, sample_channels,
                                sample_streams, simulate_transmission, transmit_signal)
from blindalign.errors import InvalidArgument
from blindalign.matkernel import numeric_rank, orthonormal_complement
from blindalign.pattern import build_supersymbol, supersymbol_length

small = st.sampled_from([(M, K) for M in (2, 3, 4) for K in range(1, 5)
                         if supersymbol_length(M, K) <= 200])


def _setup(M, K, seed=0, J=1):
    p = build_supersymbol(M, K)
    return p, build_beamforming(p), sample_channels(M, K, J, np.random.default_rng(seed))


def test_sampling_is_deterministic():
    a = sample_channels(2, 2, 1, np.random.default_rng(9))
    b = sample_channels(2, 2, 1, np.random.default_rng(9))
    assert a.h.shape == (2, 1, 2, 2)
    np.testing.assert_array_equal(a.h, b.h)
    assert a.receivers() == [(1, 1), (2, 1)]


def test_mode_matrices_full_rank():
    ch = sample_channels(4, 3, 2, np.random.default_rng(1))
    for rx in ch.receivers():
        assert numeric_rank(ch.modes_matrix(rx)).numeric_rank == 4


def test_multicast_members_are_independent():
    ch = sample_channels(3, 2, 3, np.random.default_rng(2))
    assert len(ch.receivers()) == 6
    h = ch.h.reshape(6, -1)
    assert len({row.tobytes() for row in h}) == 6
    corr = np.abs(np.corrcoef(np.abs(h)))
    assert np.all(corr[~np.eye(6, dtype=bool)] < 0.99)


def test_rank_deficient_draws_are_redrawn(caplog):
    class Degenerate:
        """Generator stand-in whose first draw is rank one."""

        def __init__(self):
            self.calls = 0
            self.inner = np.random.default_rng(0)

        def standard_normal(self, shape):
            self.calls += 1
            if self.calls == 1:
                return np.ones(shape)
            return self.inner.standard_normal(shape)

    with caplog.at_level(logging.WARNING):
        ch = sample_channels(2, 1, 1, Degenerate())
    assert ch.resamples == 1
    assert "redrawing" in caplog.text
    assert numeric_rank(ch.modes_matrix(1)).numeric_rank == 2


def test_invalid_sizes():
    with pytest.raises(InvalidArgument):
        sample_channels(1, 2, 1, np.random.default_rng(0))
    ch = sample_channels(2, 2, 1, np.random.default_rng(0))
    with pytest.raises(InvalidArgument):
        ch.modes_matrix((3, 1))


def test_two_by_two_effective_channels():
    p, bf, ch = _setup(2, 2, 3)
    eff = effective_channel(ch, p, bf, 1)
    h = ch.modes_matrix(1)
    np.testing.assert_allclose(eff.dense(1), np.vstack([h[0], h[1], np.zeros(2)]))
    np.testing.assert_allclose(eff.dense(2), np.vstack([h[0], np.zeros(2), h[0]]))
    assert numeric_rank(eff.desired).numeric_rank == 2
    assert numeric_rank(eff.interferers[2]).numeric_rank == 1
    assert numeric_rank(eff.joint()).numeric_rank == 3


def test_three_by_two_interference_directions():
    p, bf, ch = _setup(3, 2, 4)
    eff = effective_channel(ch, p, bf, 1)
    assert numeric_rank(eff.desired).numeric_rank == 6
    G = eff.dense(2)
    assert numeric_rank(G).numeric_rank == 2
    supports = sorted(tuple(np.flatnonzero(np.abs(G[:, c]) > 0) + 1) for c in range(6))
    assert set(supports) == {(1, 3, 7), (2, 4, 8)}


@given(small, st.integers(0, 10_000))
def test_effective_channel_invariants(cfg, seed):
    M, K = cfg
    p, bf, ch = _setup(M, K, seed)
    B = bf.B
    for rx in ch.receivers():
        eff = effective_channel(ch, p, bf, rx)
        rows = receiver_rows(ch, p, rx)
        for j, g in eff.G.items():
            G = g.toarray()
            active = np.array([bf.symbol_rows(j, t).any() for t in range(1, p.L + 1)])
            np.testing.assert_array_equal(np.abs(G).sum(axis=1) > 0, active)
            for t in np.flatnonzero(active):
                np.testing.assert_allclose(G[t], rows[t] @ bf.symbol_rows(j, t + 1))
            if j != rx[0]:
                V = np.zeros((p.L, B))
                for b, blk in enumerate(p.blocks[j - 1]):
                    V[np.asarray(blk.times) - 1, b] = 1.0
                Q = orthonormal_complement(V)
                assert np.linalg.norm(Q @ G) < 1e-10 * np.linalg.norm(G)


def test_mismatched_inputs_rejected():
    p, bf, ch = _setup(3, 2)
    with pytest.raises(InvalidArgument):
        effective_channel(ch, build_supersymbol(3, 3), bf, 1)
    with pytest.raises(InvalidArgument):
        effective_channel(ch, p, build_beamforming(build_supersymbol(2, 2)), 1)


def test_noiseless_single_stream_probe():
    p, bf, ch = _setup(3, 2, 5)
    pw = stream_power(3, 2, 50.0)
    u = np.zeros((2, bf.M * bf.B), complex)
    u[1, 4] = 1.0
    (y1, _) = simulate_transmission(ch, p, bf, pw, u, noise=False)
    col = effective_channel(ch, p, bf, 1).dense(2)[:, 4]
    np.testing.assert_allclose(y1.y, np.sqrt(pw.per_stream_power) * col, atol=1e-14)
    assert y1.noise_var == 0.0


def test_received_signal_matches_effective_channels():
    p, bf, ch = _setup(3, 3, 6, J=2)
    rng = np.random.default_rng(7)
    pw = stream_power(3, 3, 1e3)
    u = sample_streams(bf, rng)
    for rb in simulate_transmission(ch, p, bf, pw, u, rng):
        eff = effective_channel(ch, p, bf, rb.rx)
        clean = sum(np.sqrt(pw.per_stream_power) * (g @ u[j - 1]) for j, g in eff.G.items())
        np.testing.assert_allclose(rb.y, clean + rb.noise, atol=1e-10)
        assert rb.noise_var == 1.0


def test_tiny_power_leaves_noise():
    p, bf, ch = _setup(2, 2, 8)
    u = sample_streams(bf, np.random.default_rng(0))
    out = simulate_transmission(ch, p, bf, stream_power(2, 2, 1e-300), u,
                                np.random.default_rng(1))
    for rb in out:
        np.testing.assert_allclose(rb.y, rb.noise, atol=1e-140)


def test_simulation_is_reproducible():
    p, bf, ch = _setup(3, 2, 9)
    pw = stream_power(3, 2, 100.0)
    runs = []
    for _ in range(2):
        rng = np.random.default_rng(42)
        u = sample_streams(bf, rng)
        runs.append(np.concatenate([rb.y for rb in simulate_transmission(ch, p, bf, pw, u, rng)]))
    np.testing.assert_array_equal(*runs)


def test_noise_requires_generator():
    p, bf, ch = _setup(2, 2)
    with pytest.raises(InvalidArgument):
        simulate_transmission(ch, p, bf, stream_power(2, 2, 1.0), np.zeros((2, 2)))


def test_transmit_power_per_symbol():
    p, bf, _ = _setup(3, 3)
    pw = stream_power(3, 3, 10.0)
    rng = np.random.default_rng(3)
    energy = np.mean([np.sum(np.abs(transmit_signal(bf, pw, sample_streams(bf, rng))) ** 2)
                      for _ in range(4000)])
    assert energy == pytest.approx(p.L * 10.0, rel=0.03)
    with pytest.raises(InvalidArgument):
        transmit_signal(bf, pw, np.zeros((3, 5)))
