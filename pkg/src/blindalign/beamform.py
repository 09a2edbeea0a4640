"""
Stacked-identity beamforming and equal per-stream power.

Every alignment block of user ``k`` owns one block column of ``M`` columns in
``k``'s beamforming matrix: an ``M x M`` identity placed at the ``M`` symbol
slots of the block, zeros elsewhere. Streams are ordered (user, alignment
block, transmit antenna). Nothing here depends on channel values.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument, InvalidPattern
from .pattern import SwitchingPattern, verify_pattern


@dataclass(frozen=True, eq=False)
class BeamformingSchedule:
    """Binary beamforming matrices, one ``(L*M, M*B)`` array per user."""

    M: int
    K: int
    L: int
    matrices: tuple[np.ndarray, ...]

    @property
    def B(self) -> int:
        return self.matrices[0].shape[1] // self.M

    @property
    def n_streams(self) -> int:
        return self.K * self.M * self.B

    def block_columns(self, b: int) -> slice:
        """Column range of alignment block `b` (1-based)."""
        if not 1 <= b <= self.B:
            raise InvalidArgument(f"block index {b} outside 1..{self.B}")
        return slice((b - 1) * self.M, b * self.M)

    @property
    def block_column_map(self) -> dict[int, slice]:
        return {b: self.block_columns(b) for b in range(1, self.B + 1)}

    def symbol_rows(self, k: int, t: int) -> np.ndarray:
        """The ``M x (M*B)`` slice of user `k`'s matrix at symbol `t` (1-based)."""
        return self.matrices[k - 1][(t - 1) * self.M : t * self.M]

    def combined(self) -> np.ndarray:
        """All users' matrices side by side, user 1 first."""
        return np.hstack(self.matrices)

    @cached_property
    def sparse(self) -> tuple[sp.csr_array, ...]:
        return tuple(sp.csr_array(m) for m in self.matrices)

    def key(self) -> bytes:
        """Stable byte string identifying the schedule, for golden comparisons."""
        head = np.array([self.M, self.K, self.L], dtype=np.int64).tobytes()
        return head + b"".join(np.packbits(m).tobytes() for m in self.matrices)

    def __eq__(self, other) -> bool:
        return isinstance(other, BeamformingSchedule) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def dump(self) -> str:
        """Rows of 0/1 integers, one ``M``-row stanza per symbol."""
        out = []
        for k, mat in enumerate(self.matrices, start=1):
            out.append(f"beamforming user {k}: {mat.shape[0]}x{mat.shape[1]}")
            for t in range(self.L):
                out.append(f"# symbol {t + 1}")
                for row in mat[t * self.M : (t + 1) * self.M]:
                    out.append(" ".join(map(str, row)))
        return "\n".join(out)


def build_beamforming(p: SwitchingPattern) -> BeamformingSchedule:
    """
    Beamforming schedule of a verified switching pattern.

    Raises
    ------
    InvalidPattern
        If `p` fails :func:`~blindalign.pattern.verify_pattern`.
    """
    problems = verify_pattern(p)
    if problems:
        raise InvalidPattern("; ".join(map(str, problems[:5])))
    M, L, B = p.M, p.L, p.blocks_per_user
    eye = np.eye(M, dtype=np.uint8)
    mats = []
    for blocks in p.blocks:
        mat = np.zeros((L * M, M * B), dtype=np.uint8)
        for b, blk in enumerate(blocks):
            for t in blk.times:
                mat[(t - 1) * M : t * M, b * M : (b + 1) * M] = eye
        mat.setflags(write=False)
        mats.append(mat)
    return BeamformingSchedule(M, p.K, L, tuple(mats))


@dataclass(frozen=True)
class PowerAllocation:
    """Noise-normalised total power and the resulting per-stream power."""

    total_power: float
    per_stream_power: float


def stream_power(M: int, K: int, P: float) -> PowerAllocation:
    """
    Equal power per stream, ``(M + K - 1) P / (M^2 K)``.

    Each of the ``K M (M-1)^(K-1)`` streams is sent ``M`` times, which spends
    exactly ``L * P`` over the supersymbol.
    """
    if not P > 0:
        raise InvalidArgument(f"total power must be positive, got {P}")
    return PowerAllocation(float(P), (M + K - 1) * float(P) / (M * M * K))


def supersymbol_energy(bf: BeamformingSchedule, pw: PowerAllocation) -> float:
    """Expected transmit energy summed over the supersymbol for unit-variance streams."""
    ones = sum(int(m.sum(dtype=np.int64)) for m in bf.matrices)
    return ones * pw.per_stream_power
