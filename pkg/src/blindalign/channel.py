"""
Channel realizations, effective channels and received supersymbols.

A receiver is identified by ``(k, member)``: user (multicast group) ``k`` in
``1..K`` and group member ``1..J``. Every member of group ``k`` follows user
``k``'s switching pattern but has its own, independent channel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .beamform import BeamformingSchedule, PowerAllocation
from .errors import InvalidArgument
from .matkernel import DEFAULT_REL_TOL, numeric_rank, sample_gaussian_matrix
from .pattern import SwitchingPattern

log = logging.getLogger(__name__)

Receiver = tuple[int, int]


def _rx(rx) -> Receiver:
    if isinstance(rx, (int, np.integer)):
        return int(rx), 1
    k, member = rx
    return int(k), int(member)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """
    Mode vectors of every receiver.

    ``h[k-1, member-1, m-1]`` is the ``1 x M`` channel row seen by receiver
    ``(k, member)`` in antenna mode ``m``.
    """

    M: int
    K: int
    J: int
    h: np.ndarray
    resamples: int = 0

    def receivers(self) -> list[Receiver]:
        return [(k, j) for k in range(1, self.K + 1) for j in range(1, self.J + 1)]

    def modes_matrix(self, rx) -> np.ndarray:
        """The ``M x M`` matrix stacking the receiver's mode vectors 1..M."""
        k, member = _rx(rx)
        if not (1 <= k <= self.K and 1 <= member <= self.J):
            raise InvalidArgument(f"no receiver {(k, member)}")
        return self.h[k - 1, member - 1]


def sample_channels(M: int, K: int, J: int, rng: np.random.Generator,
                    rel_tol: float = DEFAULT_REL_TOL) -> ChannelRealization:
    """
    Draw i.i.d. unit Gaussian mode vectors for ``K * J`` receivers.

    A receiver whose ``M x M`` mode matrix is numerically rank deficient is
    redrawn; the number of redraws is kept in ``resamples``.
    """
    if M < 2 or K < 1 or J < 1:
        raise InvalidArgument(f"invalid sizes M={M}, K={K}, J={J}")
    h = np.empty((K, J, M, M), dtype=np.complex128)
    redraws = 0
    for k in range(K):
        for j in range(J):
            while True:
                H = sample_gaussian_matrix(M, M, rng)
                if numeric_rank(H, rel_tol).numeric_rank == M:
                    break
                redraws += 1
                log.warning("rank-deficient channel for receiver %s; redrawing", (k + 1, j + 1))
            h[k, j] = H
    h.setflags(write=False)
    return ChannelRealization(M, K, J, h, redraws)


@dataclass(frozen=True, eq=False)
class EffectiveChannel:
    """
    Per-transmitting-user effective channels ``G[j]`` (``L x M*B``) at one receiver.

    Row ``t`` of ``G[j]`` is the receiver's mode vector at time ``t`` applied
    to user ``j``'s beamforming slice at ``t``. Matrices are kept sparse.
    """

    rx: Receiver
    G: dict[int, sp.csr_array]

    @property
    def desired(self) -> sp.csr_array:
        return self.G[self.rx[0]]

    @property
    def interferers(self) -> dict[int, sp.csr_array]:
        return {j: g for j, g in self.G.items() if j != self.rx[0]}

    def dense(self, j: int) -> np.ndarray:
        return self.G[j].toarray()

    def joint(self) -> sp.csr_array:
        """``[G_desired | G_j for every interferer j]``."""
        parts = [self.desired] + list(self.interferers.values())
        return sp.csr_array(sp.hstack(parts, format="csr"))


def _check_consistent(ch: ChannelRealization, p: SwitchingPattern,
                      bf: BeamformingSchedule | None = None) -> None:
    if (ch.M, ch.K) != (p.M, p.K):
        raise InvalidArgument(f"channel is for (M, K)={(ch.M, ch.K)}, pattern for {(p.M, p.K)}")
    if bf is not None and (bf.M, bf.K, bf.L) != (p.M, p.K, p.L):
        raise InvalidArgument("beamforming schedule does not match the pattern")


def receiver_rows(ch: ChannelRealization, p: SwitchingPattern, rx) -> np.ndarray:
    """``(L, M)`` array whose row ``t`` is the receiver's channel at time ``t``."""
    _check_consistent(ch, p)
    k, _ = _rx(rx)
    modes = p.mode_array[k - 1]
    return ch.modes_matrix(rx)[modes - 1]


def effective_channel(ch: ChannelRealization, p: SwitchingPattern,
                      bf: BeamformingSchedule, rx) -> EffectiveChannel:
    """
    Effective channels at receiver `rx`.

    The time-varying channel is the block-diagonal ``L x L*M`` matrix of
    per-symbol rows; multiplying it by each user's beamforming matrix gives
    ``G[j]``.
    """
    _check_consistent(ch, p, bf)
    rx = _rx(rx)
    M, L = p.M, p.L
    rows = receiver_rows(ch, p, rx)
    H_time = sp.csr_array(
        (rows.ravel(), np.arange(L * M), np.arange(0, L * M + 1, M)), shape=(L, L * M)
    )
    G = {j: sp.csr_array(H_time @ bf.sparse[j - 1]) for j in range(1, p.K + 1)}
    return EffectiveChannel(rx, G)


@dataclass(frozen=True, eq=False)
class ReceivedBlock:
    """One receiver's observation of a whole supersymbol."""

    rx: Receiver
    y: np.ndarray
    noise_var: float = 1.0
    noise: np.ndarray | None = None


def sample_streams(bf: BeamformingSchedule, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance complex Gaussian symbols, shape ``(K, M*B)``."""
    return sample_gaussian_matrix(bf.K, bf.M * bf.B, rng)


def transmit_signal(bf: BeamformingSchedule, pw: PowerAllocation, u) -> np.ndarray:
    """Transmitted vectors ``x(t)`` as an ``(L, M)`` array."""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (bf.K, bf.M * bf.B):
        raise InvalidArgument(f"streams must have shape {(bf.K, bf.M * bf.B)}, got {u.shape}")
    x = sum(mat @ u[j] for j, mat in enumerate(bf.matrices))
    return np.sqrt(pw.per_stream_power) * np.asarray(x).reshape(bf.L, bf.M)


def simulate_transmission(ch: ChannelRealization, p: SwitchingPattern,
                          bf: BeamformingSchedule, pw: PowerAllocation, u,
                          rng: np.random.Generator | None = None,
                          noise: bool = True) -> list[ReceivedBlock]:
    """
    Received supersymbol at every receiver, ``y(t) = h(m(t)) x(t) + z(t)``.

    Noise is unit-variance complex Gaussian drawn from `rng`; pass
    ``noise=False`` for a noiseless probe.
    """
    _check_consistent(ch, p, bf)
    if noise and rng is None:
        raise InvalidArgument("a random generator is required when noise is on")
    x = transmit_signal(bf, pw, u)
    out = []
    for rx in ch.receivers():
        clean = np.einsum("tm,tm->t", receiver_rows(ch, p, rx), x)
        z = sample_gaussian_matrix(1, p.L, rng)[0] if noise else np.zeros(p.L, complex)
        out.append(ReceivedBlock(rx, clean + z, 1.0 if noise else 0.0, z))
    return out
