"""Transmit-side block: beams (f1, f2) for a fixed reflect row.

Alternates two exact block updates on a concave minorant of the secrecy
objective: closed-form auxiliary multipliers (t_b, t_e), then one convex
solve for the lifted PSD pair (F1, F2) under the power budget with the
eavesdropper terms wrapped into epigraph rows. After the alternation
converges the rank-one beams are recovered by eigenvector shortcut or
Gaussian randomization. The minorant is tight at the closed-form
multipliers, so its value after a multiplier update equals the true
relaxed secrecy rate at the current (F1, F2).
"""

from dataclasses import dataclass, field

import numpy as np

from . import cvxsolver
from .cvxsolver import AffineForm, EpiRow, LogTerm, LogTraceProgram
from .numerics import herm_eig, trace_inner
from .secrecy import LN2, TxSolution, secrecy_value

# eigenvalue ratio under which the PSD iterate counts as rank one
RANK1_EIG_RATIO = 1e-6


@dataclass
class TxIterate:
    """One state of the multiplier/beamformer alternation.

    objective is the minorant value in bps/Hz; at tight multipliers it
    equals the relaxed secrecy rate at (F1, F2).
    """

    F1: np.ndarray
    F2: np.ndarray
    t_b: float
    t_e: np.ndarray
    objective: float


@dataclass
class TxRun:
    solution: TxSolution
    trace: list
    final: TxIterate
    relaxed_objective: float
    recovered_objective: float
    solver_iterations: int = 0
    solver_statuses: dict = field(default_factory=dict)
    failed: str = ""


def effective_channels(channels, v_ext):
    """Rank-one M x M channel matrices seen by the transmitter.

    With row = v_ext @ H_i, the returned H_i-tilde = row^H row satisfies
    Tr(H_i-tilde f f^H) = |v_ext @ H_i @ f|^2.
    """
    v_ext = np.asarray(v_ext, dtype=complex)

    def lift(H):
        row = v_ext @ np.asarray(H, dtype=complex)
        return np.outer(row.conj(), row)

    H_b = lift(channels.H_b)
    H_e = np.stack([lift(channels.H_e[k]) for k in range(channels.n_eves)])
    return H_b, H_e


def update_t(F1, F2, H_b, H_e, gamma0):
    """Closed-form optimal multipliers for fixed (F1, F2)."""
    jam_b = max(trace_inner(H_b, F2), 0.0)
    t_b = 1.0 / (gamma0 * jam_b + 1.0)
    t_e = np.array(
        [
            1.0 / (gamma0 * max(trace_inner(Hk, F1 + F2), 0.0) + 1.0)
            for Hk in H_e
        ]
    )
    return t_b, t_e


def build_P1_5(t_b, t_e, H_b, H_e, gamma0, p_max, an=True):
    """Convex program of the beamformer block at fixed multipliers.

    Maximizes ln(g0 Tr(H_b (F1+F2)) + 1) - t_b (g0 Tr(H_b F2) + 1)
    + ln t_b + 1 - t, with one epigraph row per eavesdropper
    t_ek (g0 Tr(H_ek (F1+F2)) + 1) - ln(g0 Tr(H_ek F2) + 1)
    - ln t_ek - 1 <= t, under Tr(F1 + F2) <= p_max and F1, F2 PSD.
    With an=False the jamming variable is removed entirely, which is the
    exact F2 = 0 specialization.
    """
    if t_b <= 0 or np.any(np.asarray(t_e) <= 0):
        raise ValueError("multipliers must be positive")
    m = H_b.shape[0]
    f_vars = (0, 1) if an else (0,)

    def on_all(mat):
        return [(v, mat) for v in f_vars]

    obj_logs = [LogTerm(1.0, AffineForm(1.0, on_all(gamma0 * H_b)))]
    obj_linear = AffineForm(
        float(np.log(t_b) + 1.0 - t_b),
        [(1, -t_b * gamma0 * H_b)] if an else [],
    )
    rows = []
    for tk, Hk in zip(np.asarray(t_e, dtype=float), H_e):
        lin = AffineForm(float(tk - np.log(tk) - 1.0), on_all(tk * gamma0 * Hk))
        logs = [LogTerm(1.0, AffineForm(1.0, [(1, gamma0 * Hk)]))] if an else []
        rows.append(EpiRow(lin, logs))
    budget = AffineForm(-float(p_max), [(v, np.eye(m)) for v in f_vars])
    return LogTraceProgram(
        var_dims=[m, m] if an else [m],
        obj_logs=obj_logs,
        obj_linear=obj_linear,
        ineqs=[budget],
        rows=rows,
    )


def relaxed_secrecy(F1, F2, H_b, H_e, gamma0):
    """True secrecy rate of the lifted pair, in bps/Hz."""

    def rate(Hk):
        sig = gamma0 * max(trace_inner(Hk, F1), 0.0)
        jam = gamma0 * max(trace_inner(Hk, F2), 0.0)
        return float(np.log1p(sig / (jam + 1.0)) / LN2)

    return rate(H_b) - max(rate(Hk) for Hk in H_e)


def recover_rank1(F, objective_fn, n_rand=200, rng=None):
    """Rank-one vector from a PSD iterate.

    Near rank-one matrices use the scaled principal eigenvector; anything
    else draws n_rand Gaussian candidates from CN(0, F), rescales each to
    the power Tr(F), and keeps the best under objective_fn.
    """
    F = np.asarray(F, dtype=complex)
    m = F.shape[0]
    w, vecs = herm_eig(F)
    w = np.maximum(w, 0.0)
    total = float(np.sum(w))
    if total <= 0.0 or w[0] <= 0.0:
        return np.zeros(m, dtype=complex)
    principal = np.sqrt(w[0]) * vecs[:, 0]
    if m == 1 or w[1] / w[0] <= RANK1_EIG_RATIO:
        return principal
    if rng is None:
        rng = np.random.default_rng(0)
    scale = np.sqrt(w)
    best, best_val = principal, objective_fn(principal)
    for _ in range(n_rand):
        z = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2.0)
        cand = vecs @ (scale * z)
        norm = np.linalg.norm(cand)
        if norm == 0.0:
            continue
        cand = cand * (np.sqrt(total) / norm)
        val = objective_fn(cand)
        if val > best_val:
            best, best_val = cand, val
    return best


def algorithm1(
    channels,
    v_ext,
    p_max,
    gamma0,
    tol=1e-4,
    max_iter=30,
    an=True,
    n_rand=200,
    rng=None,
    solver_tol=1e-7,
    solver_max_iter=200,
):
    """Beamformer alternation for a fixed reflect row.

    Starts from a 90/10 power split between the matched-filter beam and a
    random jamming direction orthogonal to it, alternates closed-form
    multiplier updates with convex (F1, F2) solves until the minorant
    value settles within tol, then recovers rank-one beams. The trace
    holds the minorant value (bps/Hz) after every convex solve.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    v_ext = np.asarray(v_ext, dtype=complex)
    H_b, H_e = effective_channels(channels, v_ext)
    m = channels.n_tx

    ht_b = (v_ext @ channels.H_b).conj()
    nb = float(np.linalg.norm(ht_b))
    f1 = np.zeros(m, dtype=complex)
    if nb > 0:
        f1 = np.sqrt(0.9 * p_max) * ht_b / nb
    else:
        f1[0] = np.sqrt(0.9 * p_max)
    if an:
        if m == 1:
            f2 = np.array([np.sqrt(0.1 * p_max)], dtype=complex)
        else:
            z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
            if nb > 0:
                z = z - ht_b * (ht_b.conj() @ z) / nb**2
            zn = float(np.linalg.norm(z))
            if zn < 1e-12:
                z = np.zeros(m, dtype=complex)
                z[-1] = 1.0
                zn = 1.0
            f2 = np.sqrt(0.1 * p_max) * z / zn
    else:
        f2 = np.zeros(m, dtype=complex)

    F1 = np.outer(f1, f1.conj())
    F2 = np.outer(f2, f2.conj())
    trace = []
    iters = 0
    statuses = {}
    failed = ""
    prev = None
    warm_vars = None
    warm_t = None
    for _ in range(max_iter):
        t_b, t_e = update_t(F1, F2, H_b, H_e, gamma0)
        prog = build_P1_5(t_b, t_e, H_b, H_e, gamma0, p_max, an=an)
        rep = cvxsolver.solve(
            prog,
            tol=solver_tol,
            max_iter=solver_max_iter,
            init_vars=warm_vars,
            init_t=warm_t,
        )
        iters += rep.iterations
        statuses[rep.status] = statuses.get(rep.status, 0) + 1
        if rep.status == "infeasible":
            failed = "beam subproblem reported infeasible"
            break
        if an:
            F1, F2 = rep.variables
        else:
            F1 = rep.variables[0]
        # the interior iterate, not the initial rank-one seed, is what the
        # next multiplier round can resume from
        warm_vars = list(rep.variables)
        warm_t = rep.epigraph
        val = prog.full_objective(rep.variables) / LN2
        trace.append(val)
        if prev is not None and abs(val - prev) < tol * max(abs(prev), 1e-12):
            break
        prev = val

    t_b, t_e = update_t(F1, F2, H_b, H_e, gamma0)
    relaxed = relaxed_secrecy(F1, F2, H_b, H_e, gamma0)
    final = TxIterate(F1=F1, F2=F2, t_b=t_b, t_e=t_e, objective=relaxed)

    # recovery: f1 against the principal jamming direction, then f2
    # against the recovered beam
    w2, v2 = herm_eig(F2)
    f2_ref = np.sqrt(max(w2[0], 0.0)) * v2[:, 0]

    def obj_f1(f):
        return secrecy_value(channels.H_b, channels.H_e, f, f2_ref, v_ext, gamma0)

    f1 = recover_rank1(F1, obj_f1, n_rand=n_rand, rng=rng)

    def obj_f2(f):
        return secrecy_value(channels.H_b, channels.H_e, f1, f, v_ext, gamma0)

    f2 = recover_rank1(F2, obj_f2, n_rand=n_rand, rng=rng) if an else np.zeros(
        m, dtype=complex
    )
    total = float(np.sum(np.abs(f1) ** 2) + np.sum(np.abs(f2) ** 2))
    if total > p_max > 0:
        rescale = np.sqrt(p_max / total)
        f1 = f1 * rescale
        f2 = f2 * rescale
    solution = TxSolution(f1=f1, f2=f2)
    solution.validate_power(p_max)
    recovered = secrecy_value(
        channels.H_b, channels.H_e, solution.f1, solution.f2, v_ext, gamma0
    )
    return TxRun(
        solution=solution,
        trace=trace,
        final=final,
        relaxed_objective=relaxed,
        recovered_objective=recovered,
        solver_iterations=iters,
        solver_statuses=statuses,
        failed=failed,
    )
