"""
End-to-end acceptance checks, one test per criterion.

Every test prints a single ``criterion N [PASS|FAIL] ...`` line; the lines
are repeated in the terminal summary.
"""

import numpy as np

from blindalign.analysis import (closed_form_rate, db_to_linear, dof_slope, high_snr_approx,
                                 monte_carlo_rate, verify_alignment)
from blindalign.beamform import build_beamforming, stream_power
from blindalign.channel import sample_channels, sample_streams, simulate_transmission
from blindalign.config import SystemConfig
from blindalign.golden import BEAMFORMING_3X3, block_matrix
from blindalign.matkernel import child_rng, sample_gaussian_matrix
from blindalign.pattern import build_supersymbol, supersymbol_length
from blindalign.receiver import blind_cancel, build_projectors, zf_decode

GRID = [(M, K) for M in (2, 3, 4) for K in range(1, 7) if supersymbol_length(M, K) <= 10_000]
RATE_CONFIGS = [(2, 2), (2, 3), (3, 2), (3, 3)]
DOF_CONFIGS = {(2, 2): 4 / 3, (2, 3): 3 / 2, (3, 2): 3 / 2, (3, 3): 9 / 5, (4, 2): 8 / 5}


def test_construction_golden(acceptance):
    I2, Z2 = np.eye(2), np.zeros((2, 2))
    failures = []
    bf = build_beamforming(build_supersymbol(2, 2))
    if not (np.array_equal(bf.matrices[0], np.vstack([I2, I2, Z2]))
            and np.array_equal(bf.matrices[1], np.vstack([I2, Z2, I2]))):
        failures.append("M=2 K=2")
    for K in range(2, 7):
        bf = build_beamforming(build_supersymbol(2, K))
        top = np.hstack([I2] * K)
        body = np.kron(np.eye(K), I2)
        if not np.array_equal(bf.combined(), np.vstack([top, body])):
            failures.append(f"M=2 K={K}")
    bf = build_beamforming(build_supersymbol(3, 3))
    for k, layout in BEAMFORMING_3X3.items():
        if not np.array_equal(bf.matrices[k - 1], block_matrix(layout, 3, 4)):
            failures.append(f"M=3 K=3 user {k}")
    acceptance(1, "construction golden matrices", not failures,
               "all reference cases reproduced" if not failures else ", ".join(failures))


def test_length_identities(acceptance):
    bad = []
    for M, K in GRID:
        L = supersymbol_length(M, K)
        B = (M - 1) ** (K - 1)
        if L != (M - 1) ** K + K * B or M * B + (K - 1) * B != L:
            bad.append((M, K))
        if L <= 5000 and build_supersymbol(M, K).L != L:
            bad.append((M, K))
    acceptance(2, "length and dimension identities", not bad,
               f"{len(GRID)} configurations" if not bad else f"mismatch {bad}")


def test_alignment_ranks(acceptance):
    worst = None
    failed = []
    for M, K in GRID:
        rep = verify_alignment(SystemConfig(M, K, seed=2024, rel_tol=1e-8), draws=100)
        if worst is None or rep.draws_passed < worst[1]:
            worst = ((M, K), rep.draws_passed)
        if rep.draws != 100 or rep.draws_passed < 99:
            failed.append(((M, K), rep.draws_passed))
    acceptance(3, "alignment ranks over 100 draws", not failed,
               f"{len(GRID)} configurations, fewest passing draws {worst[1]}/100 at {worst[0]}"
               if not failed else f"failed {failed}")


def _worst_cancellation_residual(M, K, draws=100):
    p = build_supersymbol(M, K)
    bf = build_beamforming(p)
    projectors = {k: build_projectors(p, k) for k in range(1, K + 1)}
    pw = stream_power(M, K, 1e4)
    worst = 0.0
    for d in range(draws):
        rng = child_rng(77, d)
        ch = sample_channels(M, K, 1, rng)
        u = sample_streams(bf, rng)
        for k in range(1, K + 1):
            silent = u.copy()
            silent[k - 1] = 0.0
            (y,) = [r for r in simulate_transmission(ch, p, bf, pw, silent, noise=False)
                    if r.rx[0] == k]
            for proj in projectors[k]:
                obs = zf_decode(proj, ch, y).observation
                worst = max(worst, np.linalg.norm(obs) / np.linalg.norm(proj.gather(y)))
    return worst


def test_channel_independent_cancellation(acceptance):
    residual = max(_worst_cancellation_residual(M, K)
                   for M, K in [(2, 2), (2, 3), (3, 2), (3, 3), (4, 3)])
    ratios = {}
    for M, K in [(2, 2), (2, 3), (3, 3)]:
        p = build_supersymbol(M, K)
        z = sample_gaussian_matrix(100_000, p.L, np.random.default_rng(M * 10 + K))
        combined = blind_cancel(p, 1, z)[..., :-1]
        ratios[(M, K)] = float(np.mean(np.abs(combined) ** 2)) / K
    ok = residual < 1e-10 and all(abs(r - 1.0) < 0.05 for r in ratios.values())
    detail = (f"max relative residual {residual:.2e}; noise variance / K = "
              + ", ".join(f"{r:.4f} at {mk}" for mk, r in ratios.items()))
    acceptance(4, "channel-independent cancellation", ok, detail)


def test_rate_identity(acceptance):
    gaps = {}
    for M, K in RATE_CONFIGS:
        curve = monte_carlo_rate(SystemConfig(M, K, trials=1000, seed=5, snr_db=(20, 60)))
        gaps[(M, K)] = max(curve.max_identity_gap, 0.0)
    worst = max(gaps.values())
    acceptance(5, "simulated ZF mutual information equals closed form", worst < 1e-9,
               f"max per-realization gap {worst:.2e} over 1000 realizations at 20/60 dB")


def test_dof_slope(acceptance):
    errs = {}
    for (M, K), target in DOF_CONFIGS.items():
        curve = monte_carlo_rate(SystemConfig(M, K, trials=2000, seed=6,
                                              snr_db=(40, 50, 60, 70)))
        errs[(M, K)] = (dof_slope(curve), target)
    ok = all(abs(s - t) <= 0.02 * t for s, t in errs.values())
    acceptance(6, "DoF slope within 2%", ok,
               ", ".join(f"{mk} {s:.4f}/{t:.4f}" for mk, (s, t) in errs.items()))


def test_high_snr_gap(acceptance):
    powers = db_to_linear([40.0, 60.0, 80.0])
    violations = 0
    checked = 0
    worst40 = 0.0
    for M, K in DOF_CONFIGS:
        for d in range(100):
            ch = sample_channels(M, K, 1, child_rng(99, d))
            gaps = np.array([np.abs(closed_form_rate(ch, M, K, P).per_receiver
                                    - high_snr_approx(ch, M, K, P).per_receiver)
                             for P in powers])
            checked += 1
            worst40 = max(worst40, float(gaps[0].max()))
            if np.any(np.diff(gaps, axis=0) > 0) or np.any(gaps > gaps[0]):
                violations += 1
    acceptance(7, "high-SNR gap nonincreasing and bounded", violations == 0,
               f"{checked} channels, {violations} violations, largest 40 dB gap {worst40:.3e} bits")


def test_multicast(acceptance):
    problems = []
    for M, K in GRID:
        rep = verify_alignment(SystemConfig(M, K, J=3, seed=31), draws=100)
        passes = rep.member_passes()
        if len(passes) != 3 * K or min(passes.values()) < 99:
            problems.append(f"ranks {M},{K}")
    worst_z = 0.0
    for M, K in RATE_CONFIGS:
        curve = monte_carlo_rate(SystemConfig(M, K, J=3, trials=500, seed=32, snr_db=(20, 60)))
        mean, se = curve.per_receiver_closed, curve.per_receiver_stderr
        for a in range(3):
            for b in range(a + 1, 3):
                z = np.abs(mean[..., a] - mean[..., b]) / np.hypot(se[..., a], se[..., b])
                worst_z = max(worst_z, float(z.max()))
    if worst_z >= 3.0:
        problems.append(f"member means differ by {worst_z:.2f} SE")
    acceptance(8, "multicast groups of three", not problems,
               f"every member passes ranks on {len(GRID)} configurations; "
               f"largest member mean difference {worst_z:.2f} SE"
               if not problems else "; ".join(problems))


