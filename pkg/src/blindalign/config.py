"""Experiment configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidArgument
from .matkernel import DEFAULT_REL_TOL
from .pattern import supersymbol_length

DEFAULT_SNR_DB = (40.0, 50.0, 60.0, 70.0)
DEFAULT_MAX_LENGTH = 100_000


@dataclass(frozen=True)
class SystemConfig:
    """
    One experiment: ``M`` transmit antennas (and modes), ``K`` multicast
    groups of ``J`` receivers, an SNR grid in dB and a Monte Carlo budget.
    """

    M: int
    K: int
    J: int = 1
    snr_db: tuple[float, ...] = DEFAULT_SNR_DB
    trials: int = 1000
    seed: int = 0
    rel_tol: float = DEFAULT_REL_TOL
    out: str | None = None
    max_length: int = DEFAULT_MAX_LENGTH
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if self.M < 2:
            raise InvalidArgument(f"need at least 2 transmit antennas, got {self.M}")
        if self.K < 1 or self.J < 1:
            raise InvalidArgument(f"need K >= 1 and J >= 1, got K={self.K}, J={self.J}")
        if self.trials < 1:
            raise InvalidArgument(f"trials must be positive, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgument(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not 0.0 < self.rel_tol < 1.0:
            raise InvalidArgument(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.workers < 1:
            raise InvalidArgument(f"workers must be positive, got {self.workers}")
        if self.L > self.max_length:
            raise InvalidArgument(
                f"supersymbol length {self.L} exceeds the cap of {self.max_length} symbols"
            )

    @property
    def L(self) -> int:
        return supersymbol_length(self.M, self.K)

    @property
    def dof_target(self) -> float:
        return self.M * self.K / (self.M + self.K - 1)
