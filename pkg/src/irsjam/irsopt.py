"""Reflect-side block: surface phases for fixed beams (f1, f2).

Mirror image of the transmit block. For fixed beams every receiver sees
the rank-one effective vectors h-bar = H f1 and h-hat = H f2, the
unit-modulus reflect row is lifted to a PSD matrix with pinned unit
diagonal, and the alternation runs closed-form multipliers (z_b, z_e)
against one convex solve per round. Phases are recovered from the lifted
optimum by eigenvector shortcut plus Gaussian randomization, projected
back to exactly unit magnitude.
"""

from dataclasses import dataclass, field

import numpy as np

from . import cvxsolver
from .cvxsolver import AffineForm, EpiRow, LogTerm, LogTraceProgram
from .numerics import herm_eig, trace_inner, unit_phases
from .secrecy import LN2, ReflectVector, secrecy_value


@dataclass
class ReflectForms:
    """Per-receiver effective vectors and their rank-one lifts.

    With the extended row v_ext the quadratic identity
    Tr(H_bar v-lift) = |v_ext @ h_bar|^2 holds, so these matrices are
    the only channel data the reflect subproblem needs.
    """

    h_bar_b: np.ndarray
    h_hat_b: np.ndarray
    h_bar_e: np.ndarray
    h_hat_e: np.ndarray
    H_bar_b: np.ndarray
    H_hat_b: np.ndarray
    H_bar_e: np.ndarray
    H_hat_e: np.ndarray


@dataclass
class ReflectIterate:
    """One state of the multiplier/surface alternation."""

    V: np.ndarray
    z_b: float
    z_e: np.ndarray
    objective: float


@dataclass
class ReflectRun:
    reflect: ReflectVector
    trace: list
    final: ReflectIterate
    relaxed_objective: float
    recovered_objective: float
    solver_iterations: int = 0
    solver_statuses: dict = field(default_factory=dict)
    extraction_fallback: bool = False
    failed: str = ""


def effective_vectors(channels, f1, f2):
    """Effective receive vectors h-bar = H f1, h-hat = H f2 and lifts."""
    f1 = np.asarray(f1, dtype=complex)
    f2 = np.asarray(f2, dtype=complex)

    def lift(h):
        return np.outer(h, h.conj())

    h_bar_b = channels.H_b @ f1
    h_hat_b = channels.H_b @ f2
    h_bar_e = np.stack([Hk @ f1 for Hk in channels.H_e])
    h_hat_e = np.stack([Hk @ f2 for Hk in channels.H_e])
    return ReflectForms(
        h_bar_b=h_bar_b,
        h_hat_b=h_hat_b,
        h_bar_e=h_bar_e,
        h_hat_e=h_hat_e,
        H_bar_b=lift(h_bar_b),
        H_hat_b=lift(h_hat_b),
        H_bar_e=np.stack([lift(h) for h in h_bar_e]),
        H_hat_e=np.stack([lift(h) for h in h_hat_e]),
    )


def update_z(V, forms, gamma0):
    """Closed-form multipliers, each the exact maximizer of its block."""
    jam_b = gamma0 * max(trace_inner(forms.H_hat_b, V), 0.0)
    z_b = 1.0 / (jam_b + 1.0)
    z_e = np.empty(len(forms.H_bar_e))
    for k, (Gb, Gh) in enumerate(zip(forms.H_bar_e, forms.H_hat_e)):
        tot = gamma0 * max(trace_inner(Gb, V) + trace_inner(Gh, V), 0.0)
        z_e[k] = 1.0 / (tot + 1.0)
    return float(z_b), z_e


def build_P2_2(z_b, z_e, forms, gamma0):
    """Convex program of the surface block at fixed multipliers.

    Maximizes ln(g0 Tr((H_bar_b + H_hat_b) V) + 1)
    - z_b (g0 Tr(H_hat_b V) + 1) + ln z_b + 1 - t over unit-diagonal
    PSD V, with one epigraph row per eavesdropper
    z_ek (g0 Tr((H_bar_ek + H_hat_ek) V) + 1)
    - ln(g0 Tr(H_hat_ek V) + 1) - ln z_ek - 1 <= t.
    Zero jamming lifts drop out of the logs exactly.
    """
    if z_b <= 0 or np.any(np.asarray(z_e) <= 0):
        raise ValueError("multipliers must be positive")
    n = forms.H_bar_b.shape[0]
    obj_logs = [
        LogTerm(1.0, AffineForm(1.0, [(0, gamma0 * (forms.H_bar_b + forms.H_hat_b))]))
    ]
    jam_terms = [(0, -z_b * gamma0 * forms.H_hat_b)] if np.any(forms.H_hat_b) else []
    obj_linear = AffineForm(float(np.log(z_b) + 1.0 - z_b), jam_terms)
    rows = []
    for zk, Gb, Gh in zip(np.asarray(z_e, dtype=float), forms.H_bar_e, forms.H_hat_e):
        lin = AffineForm(
            float(zk - np.log(zk) - 1.0), [(0, zk * gamma0 * (Gb + Gh))]
        )
        logs = [LogTerm(1.0, AffineForm(1.0, [(0, gamma0 * Gh)]))] if np.any(Gh) else []
        rows.append(EpiRow(lin, logs))
    return LogTraceProgram(
        var_dims=[n],
        obj_logs=obj_logs,
        obj_linear=obj_linear,
        diag_pins=[(0, i, 1.0) for i in range(n)],
        rows=rows,
    )


def solve_V(z_b, z_e, forms, gamma0, init=None, init_t=None,
            solver_tol=1e-7, solver_max_iter=200):
    """One convex solve of the surface block; returns the SolverReport."""
    prog = build_P2_2(z_b, z_e, forms, gamma0)
    return cvxsolver.solve(
        prog,
        tol=solver_tol,
        max_iter=solver_max_iter,
        init_vars=None if init is None else [init],
        init_t=init_t,
    )


def relaxed_reflect(V, forms, gamma0):
    """True secrecy rate of the lifted surface iterate, in bps/Hz."""

    def rate(Gb, Gh):
        sig = gamma0 * max(trace_inner(Gb, V), 0.0)
        jam = gamma0 * max(trace_inner(Gh, V), 0.0)
        return float(np.log1p(sig / (jam + 1.0)) / LN2)

    return rate(forms.H_bar_b, forms.H_hat_b) - max(
        rate(Gb, Gh) for Gb, Gh in zip(forms.H_bar_e, forms.H_hat_e)
    )


def extract_v(V, objective_fn, n_rand=200, rng=None):
    """Unit-modulus phases from a lifted surface iterate.

    Candidate pool is the principal eigenvector plus n_rand Gaussian
    draws from CN(0, V); each candidate collapses to phases through the
    ratio against its final entry and the best under objective_fn wins.
    Candidates whose final entry is exactly zero carry no usable
    reference phase and are discarded; if every candidate is discarded
    the principal eigenvector is used with the reference phase pinned to
    zero and the fallback is flagged.

    Returns (v, fallback) with |v_n| exactly 1.
    """
    V = np.asarray(V, dtype=complex)
    n = V.shape[0] - 1
    w, vecs = herm_eig(V)
    candidates = [vecs[:, 0]]
    if n_rand:
        if rng is None:
            rng = np.random.default_rng(0)
        root = vecs * np.sqrt(np.maximum(w, 0.0))
        for _ in range(n_rand):
            xi = (
                rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
            ) / np.sqrt(2.0)
            candidates.append(root @ xi)
    best_v, best_val = None, -np.inf
    for u in candidates:
        if u[n] == 0:
            continue
        v = unit_phases(-np.angle(u[:n] / u[n]))
        val = objective_fn(v)
        if val > best_val:
            best_v, best_val = v, val
    if best_v is None:
        return unit_phases(-np.angle(candidates[0][:n])), True
    return best_v, False


def align_init(channels, f1=None):
    """Phases that cophase the cascaded Bob path under an MRT beam.

    Each surface element contributes (row_n @ f1) to the Bob cascade;
    rotating element n by minus that argument stacks every contribution
    on the direct path's phase reference. Without a beam the direct-path
    MRT beam stands in; a zero direct channel falls back to zero phases.
    """
    n = channels.H_ar.shape[0]
    if f1 is None:
        direct = np.conj(channels.H_b[n])
        norm = float(np.linalg.norm(direct))
        if norm == 0.0:
            return ReflectVector(unit_phases(np.zeros(n)))
        f1 = direct / norm
    f1 = np.asarray(f1, dtype=complex)
    cascade = channels.H_b[:n] @ f1
    return ReflectVector(unit_phases(-np.angle(cascade)))


SCAN_CIRCLE = 512


def scan_init(channels, f1, f2, gamma0, n_draws=64, rng=None):
    """Best starting surface from a cheap candidate sweep.

    The multiplier alternation only guarantees ascent from wherever it
    starts, and the secrecy landscape over the phases is multimodal, so
    the start decides which basin the run climbs. Candidates are the
    cascade-aligned surface, the flat surface, and either a dense sweep
    of the phase circle (a single element is cheap to scan outright) or
    uniform random phase draws. Ranking uses the full secrecy objective
    at the fixed beams; no solver work is spent before the alternation.
    """
    n = channels.H_ar.shape[0]
    f1 = np.asarray(f1, dtype=complex)
    f2 = np.asarray(f2, dtype=complex)
    candidates = [
        align_init(channels, f1 if np.any(f1) else None).v,
        unit_phases(np.zeros(n)),
    ]
    if n == 1:
        thetas = np.linspace(0.0, 2.0 * np.pi, SCAN_CIRCLE, endpoint=False)
        candidates.extend(unit_phases(np.array([t])) for t in thetas)
    else:
        if rng is None:
            rng = np.random.default_rng(0)
        for _ in range(n_draws):
            candidates.append(
                unit_phases(rng.uniform(0.0, 2.0 * np.pi, size=n))
            )
    best_v, best_val = None, -np.inf
    for v in candidates:
        v_ext = np.concatenate([v, [1.0]])
        val = secrecy_value(channels.H_b, channels.H_e, f1, f2, v_ext, gamma0)
        if val > best_val:
            best_v, best_val = v, val
    return ReflectVector(best_v)


def optimize_reflect(
    channels,
    f1,
    f2,
    gamma0,
    tol=1e-4,
    max_iter=20,
    v_init=None,
    n_rand=200,
    rng=None,
    solver_tol=1e-7,
    solver_max_iter=200,
):
    """Surface block of the alternation: multipliers against one SDR solve.

    Alternates update_z and solve_V until the surrogate objective moves
    by less than tol relative, then recovers unit-modulus phases from the
    lifted optimum. The candidate ranking and the reported recovered
    objective use the full secrecy objective, not the surrogate. Solver
    failures keep the best iterate and are reported in failed. The run
    never returns a surface worse than its starting one.
    """
    if v_init is None:
        v_init = scan_init(channels, f1, f2, gamma0, rng=rng)
    elif not isinstance(v_init, ReflectVector):
        v_init = ReflectVector(np.asarray(v_init, dtype=complex))
    f1 = np.asarray(f1, dtype=complex)
    f2 = np.asarray(f2, dtype=complex)

    def true_secrecy(v):
        v_ext = np.concatenate([np.asarray(v, dtype=complex), [1.0]])
        return secrecy_value(channels.H_b, channels.H_e, f1, f2, v_ext, gamma0)

    if not np.any(f1) and not np.any(f2):
        # nothing transmitted: the objective is zero for every surface
        z_e = np.ones(len(channels.H_e))
        final = ReflectIterate(
            V=np.eye(channels.H_ar.shape[0] + 1, dtype=complex),
            z_b=1.0, z_e=z_e, objective=0.0,
        )
        return ReflectRun(
            reflect=v_init, trace=[], final=final,
            relaxed_objective=0.0, recovered_objective=true_secrecy(v_init.v),
        )

    forms = effective_vectors(channels, f1, f2)
    v_ext = v_init.extended
    V = np.outer(v_ext.conj(), v_ext)
    trace = []
    iters = 0
    statuses = {}
    failed = ""
    prev = None
    for _ in range(max_iter):
        z_b, z_e = update_z(V, forms, gamma0)
        # each solve runs cold: warm lifts sit on the cone boundary after
        # the previous round and stall the ladder, while the multipliers
        # already carry the round-to-round state
        rep = solve_V(
            z_b, z_e, forms, gamma0,
            solver_tol=solver_tol, solver_max_iter=solver_max_iter,
        )
        iters += rep.iterations
        statuses[rep.status] = statuses.get(rep.status, 0) + 1
        if rep.status == "infeasible":
            failed = "surface subproblem reported infeasible"
            break
        V = rep.variables[0]
        prog = build_P2_2(z_b, z_e, forms, gamma0)
        val = prog.full_objective([V]) / LN2
        trace.append(val)
        if prev is not None and abs(val - prev) < tol * max(abs(prev), 1e-12):
            break
        prev = val

    z_b, z_e = update_z(V, forms, gamma0)
    relaxed = relaxed_reflect(V, forms, gamma0)
    v, fallback = extract_v(V, true_secrecy, n_rand=n_rand, rng=rng)
    if true_secrecy(v_init.v) > true_secrecy(v):
        # randomization missed the start's basin: keep the start
        v, fallback = v_init.v, False
    recovered = true_secrecy(v)
    for _ in range(2):
        # a rank-one candidate above the lifted iterate means the
        # alternation stopped short of stationarity; its lift seeds more
        # rounds, which cannot lose value and restore the bound
        # recovered <= relaxed within the solve accuracy
        if recovered <= relaxed + solver_tol or failed:
            break
        v_ext = np.concatenate([v, [1.0]])
        V = np.outer(v_ext.conj(), v_ext)
        z_b, z_e = update_z(V, forms, gamma0)
        rep = solve_V(
            z_b, z_e, forms, gamma0,
            solver_tol=solver_tol, solver_max_iter=solver_max_iter,
        )
        iters += rep.iterations
        statuses[rep.status] = statuses.get(rep.status, 0) + 1
        if rep.status == "infeasible":
            failed = "surface subproblem reported infeasible"
            break
        V = rep.variables[0]
        trace.append(build_P2_2(z_b, z_e, forms, gamma0).full_objective([V]) / LN2)
        z_b, z_e = update_z(V, forms, gamma0)
        relaxed = relaxed_reflect(V, forms, gamma0)
        v2, fb2 = extract_v(V, true_secrecy, n_rand=n_rand, rng=rng)
        if true_secrecy(v2) > recovered:
            v, fallback = v2, fb2
            recovered = true_secrecy(v2)
    final = ReflectIterate(V=V, z_b=z_b, z_e=z_e, objective=relaxed)
    reflect = ReflectVector(v)
    return ReflectRun(
        reflect=reflect,
        trace=trace,
        final=final,
        relaxed_objective=relaxed,
        recovered_objective=recovered,
        solver_iterations=iters,
        solver_statuses=statuses,
        extraction_fallback=fallback,
        failed=failed,
    )
