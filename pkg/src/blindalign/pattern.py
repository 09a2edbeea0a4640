"""
Staggered antenna-switching patterns (the supersymbol) and alignment blocks.

All public indices are 1-based: users ``1..K``, modes ``1..M`` and symbol
times ``1..L``. The canonical supersymbol places Block 1 (times
``1..(M-1)^K``) first, followed by the Block-2 sub-blocks of users ``1..K``.

An alignment block of user ``n`` is made of ``M - 1`` Block-1 symbols plus one
Block-2 symbol. Over those ``M`` symbols user ``n`` walks through modes
``1..M`` while every other user keeps a single mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidArgument, UnsupportedConfiguration


def block1_length(M: int, K: int) -> int:
    return (M - 1) ** K


def blocks_per_user(M: int, K: int) -> int:
    return (M - 1) ** (K - 1)


def supersymbol_length(M: int, K: int) -> int:
    """``(M-1)^K + K (M-1)^(K-1)`` symbols."""
    return block1_length(M, K) + K * blocks_per_user(M, K)


def _check_mk(M: int, K: int) -> None:
    if M < 2:
        raise UnsupportedConfiguration(f"need M >= 2 transmit antennas, got M={M}")
    if K < 1:
        raise InvalidArgument(f"need K >= 1 users, got K={K}")


def block1_mode(n: int, t: int, M: int, K: int | None = None) -> int:
    """
    Mode used by user `n` at Block-1 time `t`.

    User ``n`` repeats a building block of ``(M-1)^n`` symbols made of
    ``M - 1`` constant runs of length ``(M-1)^(n-1)``; run ``j`` uses mode ``j``.
    When `K` is given, `n` and `t` are also checked against ``1..K`` and
    Block 1 ``1..(M-1)^K``.
    """
    if M < 2 or n < 1 or t < 1:
        raise InvalidArgument(f"invalid arguments n={n}, t={t}, M={M}")
    if K is not None and (n > K or t > block1_length(M, K)):
        raise InvalidArgument(f"n={n}, t={t} outside Block 1 for M={M}, K={K}")
    q = M - 1
    return ((t - 1) % q**n) // q ** (n - 1) + 1


@dataclass(frozen=True)
class AlignmentBlock:
    """The symbol times forming one alignment block of one user."""

    user: int
    building_block: int
    offset: int
    block1_times: tuple[int, ...]
    block2_time: int

    @property
    def times(self) -> tuple[int, ...]:
        """All ``M`` times, in the order the desired user sweeps modes 1..M."""
        return self.block1_times + (self.block2_time,)


def enumerate_alignment_blocks(M: int, K: int, n: int) -> list[AlignmentBlock]:
    """
    Alignment blocks of user `n`, ordered by (building block, offset).

    The ``i``-th group of the ``m``-th building block holds the Block-1
    times ``(m-1)(M-1)^n + i + a (M-1)^(n-1)`` for ``a = 0..M-2``. Its final
    symbol is the ``q``-th symbol of Block-2 sub-block ``n``, where ``q`` is
    the block's ordinal position.
    """
    _check_mk(M, K)
    if not 1 <= n <= K:
        raise InvalidArgument(f"user index {n} outside 1..{K}")
    q = M - 1
    run = q ** (n - 1)
    base2 = block1_length(M, K) + (n - 1) * blocks_per_user(M, K)
    out = []
    for m in range(1, q ** (K - n) + 1):
        for i in range(1, run + 1):
            start = (m - 1) * q**n + i
            times = tuple(start + a * run for a in range(q))
            out.append(AlignmentBlock(n, m, i, times, base2 + len(out) + 1))
    return out


@dataclass(frozen=True)
class SwitchingPattern:
    """
    Per-user mode sequences over a supersymbol plus the alignment-block table.

    ``modes[k-1][t-1]`` is the mode of user ``k`` at time ``t`` and
    ``blocks[k-1]`` lists user ``k``'s alignment blocks. Patterns produced by
    :func:`permute_symbols` keep the same table with relabelled times, so
    downstream code must rely on the table rather than on canonical positions.
    """

    M: int
    K: int
    modes: tuple[tuple[int, ...], ...]
    blocks: tuple[tuple[AlignmentBlock, ...], ...]

    @property
    def L(self) -> int:
        return len(self.modes[0])

    @property
    def block1_len(self) -> int:
        return block1_length(self.M, self.K)

    @property
    def block2_len(self) -> int:
        return self.K * blocks_per_user(self.M, self.K)

    @property
    def blocks_per_user(self) -> int:
        return blocks_per_user(self.M, self.K)

    @cached_property
    def mode_array(self) -> np.ndarray:
        """Modes as a ``(K, L)`` integer array (read-only)."""
        arr = np.array(self.modes, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def block_of(self) -> np.ndarray:
        """``block_of[k-1, t-1]``: 0-based index of user ``k``'s block at time ``t``, or -1."""
        arr = np.full((self.K, self.L), -1, dtype=np.int64)
        for k, blocks in enumerate(self.blocks):
            for b, blk in enumerate(blocks):
                for t in blk.times:
                    arr[k, t - 1] = b
        arr.setflags(write=False)
        return arr

    def dump(self) -> str:
        """Plain-text rendering, with ``|`` between Block 1 and Block 2."""
        lines = [f"M={self.M} K={self.K} L={self.L}"]
        cut = self.block1_len
        for k, seq in enumerate(self.modes, start=1):
            head = " ".join(map(str, seq[:cut]))
            tail = " ".join(map(str, seq[cut:]))
            lines.append(f"user {k}: {head} | {tail}")
        return "\n".join(lines)


def build_supersymbol(M: int, K: int) -> SwitchingPattern:
    """
    Canonical switching pattern for the K-user MISO broadcast channel.

    In Block-2 sub-block ``n`` user ``n`` uses mode ``M``; any other user
    ``j`` repeats the mode it had at the first Block-1 time of the
    corresponding alignment block of user ``n``.
    """
    _check_mk(M, K)
    L = supersymbol_length(M, K)
    n1 = block1_length(M, K)
    modes = np.zeros((K, L), dtype=np.int64)
    for k in range(1, K + 1):
        modes[k - 1, :n1] = [block1_mode(k, t, M) for t in range(1, n1 + 1)]
    table = tuple(tuple(enumerate_alignment_blocks(M, K, n)) for n in range(1, K + 1))
    for n, blocks in enumerate(table, start=1):
        for blk in blocks:
            t1 = blk.block1_times[0]
            modes[:, blk.block2_time - 1] = modes[:, t1 - 1]
            modes[n - 1, blk.block2_time - 1] = M
    return SwitchingPattern(M, K, tuple(tuple(int(v) for v in row) for row in modes), table)


@dataclass(frozen=True)
class Violation:
    """A failed alignment-block requirement."""

    user: int
    block: int | None
    message: str

    def __str__(self) -> str:
        where = f"user {self.user}" + ("" if self.block is None else f" block {self.block}")
        return f"{where}: {self.message}"


def verify_pattern(p: SwitchingPattern) -> list[Violation]:
    """
    Check every alignment block of `p` and the way blocks tile the supersymbol.

    The check reads only the modes and the block table, never canonical
    positions, so it accepts any symbol ordering. An empty list means the
    pattern is valid.
    """
    out: list[Violation] = []
    M, K, L = p.M, p.K, p.L
    modes = np.asarray(p.modes)
    if modes.shape != (K, L):
        return [Violation(0, None, f"mode table has shape {modes.shape}, expected {(K, L)}")]
    if modes.min() < 1 or modes.max() > M:
        out.append(Violation(0, None, f"modes outside 1..{M}"))
    if len(p.blocks) != K:
        return out + [Violation(0, None, f"block table lists {len(p.blocks)} users")]

    B = p.blocks_per_user
    block2_owner: dict[int, int] = {}
    for n, blocks in enumerate(p.blocks, start=1):
        if len(blocks) != B:
            out.append(Violation(n, None, f"{len(blocks)} alignment blocks, expected {B}"))
        for b, blk in enumerate(blocks, start=1):
            times = blk.times
            if len(times) != M or not all(1 <= t <= L for t in times):
                out.append(Violation(n, b, f"bad symbol times {times}"))
                continue
            if blk.block2_time in block2_owner:
                out.append(Violation(n, b, f"Block-2 time {blk.block2_time} reused"))
            block2_owner[blk.block2_time] = n
            sweep = tuple(int(modes[n - 1, t - 1]) for t in times)
            if sweep != tuple(range(1, M + 1)):
                out.append(Violation(n, b, f"desired modes {sweep} do not sweep 1..{M}"))
            for j in range(1, K + 1):
                if j == n:
                    continue
                seen = {int(modes[j - 1, t - 1]) for t in times}
                if len(seen) != 1:
                    out.append(Violation(n, b, f"user {j} changes mode {sorted(seen)}"))

    block1_set = set(range(1, L + 1)) - set(block2_owner)
    for n, blocks in enumerate(p.blocks, start=1):
        covered: list[int] = [t for blk in blocks for t in blk.block1_times]
        if len(covered) != len(set(covered)) or set(covered) != block1_set:
            out.append(Violation(n, None, "Block-1 groups do not partition Block 1"))
    return out


def check_distinct_interferers(p: SwitchingPattern) -> list[Violation]:
    """
    For each block of user ``n`` and other user ``j``, the ``M - 1`` Block-1
    times must fall in ``M - 1`` different blocks of user ``j``.
    """
    out = []
    owner = p.block_of
    for n, blocks in enumerate(p.blocks, start=1):
        for b, blk in enumerate(blocks, start=1):
            for j in range(1, p.K + 1):
                if j == n:
                    continue
                hit = [int(owner[j - 1, t - 1]) for t in blk.block1_times]
                if min(hit) < 0 or len(set(hit)) != len(hit):
                    out.append(Violation(n, b, f"Block-1 times share a block of user {j}"))
    return out


def permute_symbols(p: SwitchingPattern, perm) -> SwitchingPattern:
    """
    Reorder the symbols of `p`.

    ``perm[s]`` is the (1-based) old time placed at new position ``s + 1``.
    Mode sequences and the block table are relabelled consistently.
    """
    perm = [int(t) for t in perm]
    if sorted(perm) != list(range(1, p.L + 1)):
        raise InvalidArgument("perm must be a permutation of 1..L")
    new_of_old = {old: new for new, old in enumerate(perm, start=1)}
    modes = tuple(tuple(row[old - 1] for old in perm) for row in p.modes)
    blocks = tuple(
        tuple(
            AlignmentBlock(
                blk.user, blk.building_block, blk.offset,
                tuple(new_of_old[t] for t in blk.block1_times),
                new_of_old[blk.block2_time],
            )
            for blk in user_blocks
        )
        for user_blocks in p.blocks
    )
    return SwitchingPattern(p.M, p.K, modes, blocks)
