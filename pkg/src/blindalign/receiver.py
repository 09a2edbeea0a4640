"""
Channel-blind zero-forcing at the receivers.

For one alignment block of user ``k`` the receiver gathers ``K M - K + 1``
symbols: the block's ``M`` own symbols plus, for each of its ``M - 1``
Block-1 symbols and each other user ``j``, the Block-2 symbol of the block
of ``j`` that covers it. At that Block-2 symbol only user ``j`` transmits,
and receiver ``k`` hears it through the same channel as at the Block-1
symbol, so subtracting it removes user ``j``'s interference exactly. The
projector is built from the pattern alone; channel knowledge is used only
to quote the resulting ``M x M`` channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, ReceivedBlock, receiver_rows
from .errors import ConstructionError, InvalidArgument
from .matkernel import log_det_hermitian_plus_identity, orthonormal_complement
from .pattern import SwitchingPattern


@dataclass(frozen=True, eq=False)
class BlockProjector:
    """
    Orthonormal-row projector for one alignment block of one user.

    ``matrix`` has shape ``(M, K*M - K + 1)``; its columns follow
    ``gathered_times`` (ascending). Row ``a < M - 1`` combines own Block-1
    symbol ``a`` with the interferers' Block-2 symbols, scaled by
    ``1/sqrt(K)``; the last row picks the block's own Block-2 symbol.
    """

    user: int
    block: int
    gathered_times: tuple[int, ...]
    matrix: np.ndarray
    own_times: tuple[int, ...]
    cancel_times: tuple[tuple[int, ...], ...]
    pattern: SwitchingPattern

    @property
    def K(self) -> int:
        return self.pattern.K

    @property
    def M(self) -> int:
        return self.pattern.M

    def gather(self, y) -> np.ndarray:
        y = y.y if isinstance(y, ReceivedBlock) else np.asarray(y)
        return y[np.asarray(self.gathered_times) - 1]


def build_block_projector(p: SwitchingPattern, k: int, b: int) -> BlockProjector:
    """
    Projector for block `b` of user `k` (both 1-based).

    Raises
    ------
    ConstructionError
        If two Block-1 symbols of the block fall in the same block of another
        user, which would make the cancellation reuse a Block-2 symbol.
    """
    if not (1 <= k <= p.K and 1 <= b <= p.blocks_per_user):
        raise InvalidArgument(f"no block {b} for user {k}")
    blk = p.blocks[k - 1][b - 1]
    owner = p.block_of
    cancel: list[tuple[int, ...]] = []
    for t in blk.block1_times:
        taus = []
        for j in range(1, p.K + 1):
            if j == k:
                continue
            bj = int(owner[j - 1, t - 1])
            if bj < 0:
                raise ConstructionError(f"time {t} is not covered by any block of user {j}")
            taus.append(p.blocks[j - 1][bj].block2_time)
        cancel.append(tuple(taus))
    flat = [tau for taus in cancel for tau in taus]
    if len(set(flat)) != len(flat) or set(flat) & set(blk.times):
        raise ConstructionError(
            f"user {k} block {b}: interfering Block-2 symbols are not distinct"
        )

    gathered = tuple(sorted(blk.times + tuple(flat)))
    col = {t: i for i, t in enumerate(gathered)}
    M, K = p.M, p.K
    P = np.zeros((M, len(gathered)))
    s = 1.0 / np.sqrt(K)
    for a, (t, taus) in enumerate(zip(blk.block1_times, cancel)):
        P[a, col[t]] = s
        for tau in taus:
            P[a, col[tau]] = -s
    P[M - 1, col[blk.block2_time]] = 1.0
    P.setflags(write=False)
    return BlockProjector(k, b, gathered, P, blk.times, tuple(cancel), p)


def build_projectors(p: SwitchingPattern, k: int) -> list[BlockProjector]:
    return [build_block_projector(p, k, b) for b in range(1, p.blocks_per_user + 1)]


@dataclass(frozen=True, eq=False)
class ZFOutput:
    """Projected observation of one alignment block and its effective channel."""

    rx: tuple[int, int]
    block: int
    channel: np.ndarray
    observation: np.ndarray
    noise_cov: np.ndarray

    def mutual_information(self, per_stream_power: float) -> float:
        """``log2 det(I + p H H^H)`` in bits per alignment block."""
        H = self.channel
        return log_det_hermitian_plus_identity(H @ H.conj().T, per_stream_power)

    def equalize(self, per_stream_power: float) -> np.ndarray:
        """Zero-forcing estimate of the block's ``M`` streams."""
        return np.linalg.solve(np.sqrt(per_stream_power) * self.channel, self.observation)


def projected_channel(proj: BlockProjector, ch: ChannelRealization, rx) -> np.ndarray:
    """
    The ``M x M`` channel seen after projection, from the switching pattern.

    Only the block's own symbols carry its streams; the gathered interferer
    symbols contribute zero rows.
    """
    rows = receiver_rows(ch, proj.pattern, rx)
    own = set(proj.own_times)
    D = np.array([rows[t - 1] if t in own else np.zeros(proj.M, complex)
                  for t in proj.gathered_times])
    return proj.matrix @ D


def zf_decode(proj: BlockProjector, ch: ChannelRealization, y: ReceivedBlock) -> ZFOutput:
    """Apply `proj` to the received block `y` of one member of group ``proj.user``."""
    if y.rx[0] != proj.user:
        raise InvalidArgument(f"projector is for user {proj.user}, observation from {y.rx}")
    obs = proj.matrix @ proj.gather(y)
    H = projected_channel(proj, ch, y.rx)
    noise_cov = y.noise_var * (proj.matrix @ proj.matrix.T)
    return ZFOutput(y.rx, proj.block, H, obs, noise_cov)


def blind_cancel(p: SwitchingPattern, k: int, y) -> np.ndarray:
    """
    Interference-free symbols by plain subtraction, one row per own block.

    Row ``b`` holds ``y[t_a] - sum_j y[tau_j(t_a)]`` for the block's Block-1
    symbols followed by its own Block-2 symbol. No channel values are used;
    the noise variance on each combined symbol is ``K``.

    `y` may hold a batch of supersymbols along leading axes, shape
    ``(..., L)``; the result then has shape ``(..., B, M)``.
    """
    y = y.y if isinstance(y, ReceivedBlock) else np.asarray(y)
    if y.ndim == 0 or y.shape[-1] != p.L:
        raise InvalidArgument(f"expected {p.L} received symbols, got shape {y.shape}")
    projs = build_projectors(p, k)
    own = np.array([proj.own_times for proj in projs]) - 1           # (B, M)
    taus = np.array([proj.cancel_times for proj in projs]) - 1       # (B, M-1, K-1)
    out = y[..., own].astype(np.complex128)
    if taus.size:
        out[..., :-1] -= y[..., taus].sum(axis=-1)
    return out


def interference_indicators(p: SwitchingPattern, k: int) -> np.ndarray:
    """
    ``L x (K-1)B`` 0/1 matrix: one indicator column per interfering block.

    Column order is (user, block). The aligned interference from each block
    of user ``j`` lies along its indicator whatever the channel values are.
    """
    cols = []
    for j, blocks in enumerate(p.blocks, start=1):
        if j == k:
            continue
        for blk in blocks:
            v = np.zeros(p.L)
            v[np.asarray(blk.times) - 1] = 1.0
            cols.append(v)
    return np.array(cols).T if cols else np.zeros((p.L, 0))


def global_projector(p: SwitchingPattern, k: int) -> np.ndarray:
    """
    Orthonormal rows spanning everything orthogonal to the interference at `k`.

    Built from the indicator directions only, this is a channel-independent
    alternative to the per-block projectors, of shape ``(M*B, L)``.
    """
    V = interference_indicators(p, k)
    if V.shape[1] == 0:
        return np.eye(p.L)
    return orthonormal_complement(V)


def block_mutual_informations(projectors, ch: ChannelRealization, rx,
                              per_stream_power: float) -> np.ndarray:
    """Per-block ``log2 det(I + p H H^H)`` with ``H`` from :func:`projected_channel`."""
    Hs = np.stack([projected_channel(proj, ch, rx) for proj in projectors])
    return log_det_hermitian_plus_identity(Hs @ np.conj(np.swapaxes(Hs, -1, -2)),
                                           per_stream_power)
