"""Interior-point solver for small dense log-trace semidefinite programs.

Problem template, with one or more Hermitian PSD variables X_v of tiny
dimension (everything here is dense and at most a few hundred real
parameters):

    maximize    sum_j c_j ln(a_j + <A_j, X>) + <B, X> + b0 - t
    subject to  f_k(X) <= t    for every epigraph row k (t present iff K >= 1)
                <C_m, X> + d_m <= 0
                <E_q, X> + e_q  = 0
                X_v[i, i] = pin value
                X_v PSD

where <A, X> = Re Tr(A X) summed over the variables a form touches, and
each epigraph row is f_k = <L_k, X> + l_k - sum_j c_kj ln(a_kj + <A_kj, X>)
with all log coefficients c >= 0 and all log constants a > 0, so the
template is concave in X and every log is defined at X = 0.

Method: log-barrier with damped Newton steps on the real parameterization
of the Hermitian variables (diagonals, then sqrt(2)-scaled real and
imaginary off-diagonal parts, an orthonormal basis under Re Tr(A^H B)).
Diagonal pins and equality rows are eliminated exactly before each Newton
system is formed, so returned iterates satisfy them to machine precision.
Infeasible starts fall back to a phase-1 barrier on a single slack that
upper-bounds every linear inequality.
"""

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .numerics import check_hermitian

# barrier schedule and line-search constants
MU_GROWTH = 30.0
ARMIJO = 0.25
BACKTRACK = 0.5
MAX_BACKTRACK = 60
DECREMENT_TOL = 1e-11
# every stage (and the centering pass) exits once the Newton decrement of
# mu*f + B drops to LAMBDA_BAR; the duality-gap bound is widened by the
# standard approximate-centering correction instead of grinding stages to
# machine-level decrements the merit cannot even resolve
LAMBDA_BAR = 0.25
# first line-search trial stays this fraction inside the exact boundary
BOUNDARY_FRAC = 0.99
# below this (scaled) decrement the expected per-step decrease nears the
# merit's rounding floor, so the full step is taken on a domain check
# alone instead of an Armijo comparison of equal-to-noise values
QUAD_REGION = 1e-12


# ---------------------------------------------------------------------------
# real parameterization of Hermitian matrices

@lru_cache(maxsize=None)
def _triu(n):
    i, j = np.triu_indices(n, k=1)
    return i, j


def mat_to_raw(a):
    """Coordinates of a Hermitian matrix in the orthonormal real basis."""
    n = a.shape[0]
    i, j = _triu(n)
    s = np.sqrt(2.0)
    return np.concatenate(
        [a.diagonal().real, s * a[i, j].real, s * a[i, j].imag]
    )


def raw_to_mat(theta, n):
    """Inverse of mat_to_raw."""
    i, j = _triu(n)
    m = i.size
    x = np.zeros((n, n), dtype=complex)
    x[np.arange(n), np.arange(n)] = theta[:n]
    off = (theta[n:n + m] + 1j * theta[n + m:]) / np.sqrt(2.0)
    x[i, j] = off
    x[j, i] = off.conj()
    return x


@lru_cache(maxsize=None)
def _lndet_indices(n):
    # basis element p is sum_s w[p,s] e_{ai[p,s]} e_{bi[p,s]}^T
    m = n * (n - 1) // 2
    i, j = _triu(n)
    w = np.zeros((n * n, 2), dtype=complex)
    ai = np.zeros((n * n, 2), dtype=np.intp)
    bi = np.zeros((n * n, 2), dtype=np.intp)
    w[:n, 0] = 1.0
    ai[:n, 0] = np.arange(n)
    bi[:n, 0] = np.arange(n)
    s = 1.0 / np.sqrt(2.0)
    w[n:n + m, 0] = s
    ai[n:n + m, 0] = i
    bi[n:n + m, 0] = j
    w[n:n + m, 1] = s
    ai[n:n + m, 1] = j
    bi[n:n + m, 1] = i
    w[n + m:, 0] = 1j * s
    ai[n + m:, 0] = i
    bi[n + m:, 0] = j
    w[n + m:, 1] = -1j * s
    ai[n + m:, 1] = j
    bi[n + m:, 1] = i
    return w, ai, bi


def _lndet_hess(s_inv, n):
    """Hessian of -ln det X in raw coordinates, given S = X^{-1}.

    H[p, q] = Tr(S E_p S E_q); with the rank-two basis elements this is
    four fancy-indexed gathers of S, avoiding any explicit basis loop.
    """
    w, ai, bi = _lndet_indices(n)
    h = np.zeros((n * n, n * n))
    for s in (0, 1):
        for t in (0, 1):
            g1 = s_inv[np.ix_(bi[:, s], ai[:, t])]
            g2 = s_inv[np.ix_(bi[:, t], ai[:, s])].T
            h += np.real(np.outer(w[:, s], w[:, t]) * g1 * g2)
    return h


# ---------------------------------------------------------------------------
# program description

@dataclass
class AffineForm:
    """const + sum over terms (var index, Hermitian matrix) of Re Tr(A X)."""

    const: float = 0.0
    terms: list = field(default_factory=list)

    def value(self, variables):
        total = float(self.const)
        for v, a in self.terms:
            total += float(np.real(np.sum(a * variables[v].T)))
        return total


@dataclass
class LogTerm:
    """coef * ln(form); coef must be nonnegative to keep the template concave."""

    coef: float
    form: AffineForm


@dataclass
class EpiRow:
    """One epigraph row f = linear - sum of log terms, constrained f <= t."""

    linear: AffineForm
    logs: list = field(default_factory=list)

    def value(self, variables):
        total = self.linear.value(variables)
        for lt in self.logs:
            total -= lt.coef * np.log(lt.form.value(variables))
        return total


def epigraph_wrap(parts):
    """Rows f_k <= t from (linear form, log terms) objective pieces.

    Maximizing obj - t under the emitted rows equals maximizing
    obj - max_k f_k.
    """
    if not parts:
        raise ValueError("epigraph_wrap needs at least one objective piece")
    return [EpiRow(linear=lin, logs=list(logs)) for lin, logs in parts]


@dataclass
class LogTraceProgram:
    """Data of one solve; see the module docstring for the template."""

    var_dims: list
    obj_logs: list = field(default_factory=list)
    obj_linear: AffineForm = field(default_factory=AffineForm)
    ineqs: list = field(default_factory=list)   # AffineForm expr <= 0
    eqs: list = field(default_factory=list)     # AffineForm expr == 0
    diag_pins: list = field(default_factory=list)  # (var, entry, value)
    rows: list = field(default_factory=list)    # EpiRow f <= t

    def validate(self):
        if not self.var_dims or any(n < 1 for n in self.var_dims):
            raise ValueError(f"bad variable dims {self.var_dims}")
        for form, where in self._all_forms():
            for v, a in form.terms:
                if v < 0 or v >= len(self.var_dims):
                    raise ValueError(f"form in {where} touches unknown variable {v}")
                a = np.asarray(a, dtype=complex)
                if a.shape != (self.var_dims[v], self.var_dims[v]):
                    raise ValueError(
                        f"coefficient shape {a.shape} does not match variable "
                        f"{v} of dim {self.var_dims[v]}"
                    )
                check_hermitian(a)
        for lt, where in self._all_logs():
            if lt.coef < 0:
                raise ValueError(f"negative log coefficient in {where}")
            if lt.form.const <= 0:
                raise ValueError(
                    f"log constant must be positive in {where}, got {lt.form.const}"
                )
        for v, i, val in self.diag_pins:
            if val <= 0:
                raise ValueError(f"diagonal pins must be positive, got {val}")
            if not (0 <= i < self.var_dims[v]):
                raise ValueError(f"pin entry {i} out of range for variable {v}")

    def _all_forms(self):
        for lt in self.obj_logs:
            yield lt.form, "objective log"
        yield self.obj_linear, "objective linear part"
        for f in self.ineqs:
            yield f, "inequality"
        for f in self.eqs:
            yield f, "equality"
        for k, row in enumerate(self.rows):
            yield row.linear, f"row {k} linear part"
            for lt in row.logs:
                yield lt.form, f"row {k} log"

    def _all_logs(self):
        for lt in self.obj_logs:
            yield lt, "objective"
        for k, row in enumerate(self.rows):
            for lt in row.logs:
                yield lt, f"row {k}"

    # direct evaluation at a candidate point, used by oracles and callers
    def objective_value(self, variables):
        """Log-plus-linear objective part, before subtracting any row."""
        total = self.obj_linear.value(variables)
        for lt in self.obj_logs:
            total += lt.coef * np.log(lt.form.value(variables))
        return total

    def row_values(self, variables):
        return [row.value(variables) for row in self.rows]

    def full_objective(self, variables):
        """objective_value minus the worst epigraph row, the true target."""
        total = self.objective_value(variables)
        if self.rows:
            total -= max(self.row_values(variables))
        return total


@dataclass
class SolverReport:
    variables: list
    objective: float
    kkt_residual: float
    constraint_violation: float
    iterations: int
    status: str
    gap_bound: float
    final_decrement: float = np.inf
    stage_objectives: list = field(default_factory=list)
    # final epigraph value, for warm-starting a related program
    epigraph: float = None
    notes: str = ""


# ---------------------------------------------------------------------------
# compiled form

class _Reduction:
    """Exact elimination of pins and affine equality rows.

    Fast path when every equality touches a single coordinate (diagonal
    pins): the free parameters are a coordinate slice. General affine
    rows fall back to an orthonormal null-space basis.
    """

    def __init__(self, dim, eq_vecs, eq_consts):
        self.dim = dim
        self.feasible = True
        if not eq_vecs:
            self.kind = "identity"
            self.free = np.arange(dim)
            return
        r = np.vstack(eq_vecs)
        b = -np.asarray(eq_consts, dtype=float)
        nz = [np.flatnonzero(row) for row in r]
        if all(len(z) == 1 for z in nz):
            fixed = {}
            for row, rhs, z in zip(r, b, nz):
                idx = int(z[0])
                val = rhs / row[idx]
                if idx in fixed and abs(fixed[idx] - val) > 1e-12 * max(1, abs(val)):
                    self.feasible = False
                fixed[idx] = val
            self.kind = "slice"
            self.fixed_idx = np.array(sorted(fixed), dtype=np.intp)
            self.fixed_val = np.array([fixed[i] for i in sorted(fixed)])
            mask = np.ones(dim, dtype=bool)
            mask[self.fixed_idx] = False
            self.free = np.flatnonzero(mask)
            return
        self.kind = "general"
        u, s, vt = np.linalg.svd(r, full_matrices=True)
        rank = int(np.sum(s > 1e-12 * max(1.0, s[0] if s.size else 0.0)))
        self.x_p, *_ = np.linalg.lstsq(r, b, rcond=None)
        if np.linalg.norm(r @ self.x_p - b) > 1e-8 * max(1.0, np.linalg.norm(b)):
            self.feasible = False
        self.z = vt[rank:].T  # dim x free
        self.free = np.arange(self.z.shape[1])

    @property
    def n_free(self):
        if self.kind == "general":
            return self.z.shape[1]
        return self.free.size

    def full_point(self, reduced):
        if self.kind == "identity":
            return reduced.copy()
        if self.kind == "slice":
            x = np.zeros(self.dim)
            x[self.free] = reduced
            x[self.fixed_idx] = self.fixed_val
            return x
        return self.x_p + self.z @ reduced

    def full_dir(self, reduced):
        if self.kind == "general":
            return self.z @ reduced
        d = np.zeros(self.dim)
        d[self.free] = reduced
        return d

    def reduce_point(self, x):
        if self.kind == "general":
            return self.z.T @ (x - self.x_p)
        return x[self.free].copy()

    def reduce_vec(self, g):
        if self.kind == "general":
            return self.z.T @ g
        return g[self.free]

    def reduce_mat(self, h):
        if self.kind == "general":
            return self.z.T @ h @ self.z
        return h[np.ix_(self.free, self.free)]

    def reduce_cols(self, j):
        if self.kind == "general":
            return j @ self.z
        return j[:, self.free]


class _Compiled:
    """Program flattened onto one raw real coordinate vector.

    Layout: the raw parameters of each variable in order, then the
    epigraph slack t (iff rows exist), then the phase-1 slack (iff in
    phase 1). Affine forms become constant + dense gradient rows.
    """

    def __init__(self, prog):
        prog.validate()
        self.prog = prog
        self.dims = list(prog.var_dims)
        self.offsets = []
        off = 0
        for n in self.dims:
            self.offsets.append(off)
            off += n * n
        self.n_var_coords = off
        self.has_t = bool(prog.rows)
        self.t_idx = off if self.has_t else None
        self.dim = off + (1 if self.has_t else 0)

        def compile_form(form):
            g = np.zeros(self.dim)
            for v, a in form.terms:
                a = check_hermitian(np.asarray(a, dtype=complex))
                n = self.dims[v]
                g[self.offsets[v]:self.offsets[v] + n * n] += mat_to_raw(a)
            return float(form.const), g

        # all log forms in one block: objective logs first, then row logs
        self.log_consts, self.log_grads, self.log_coefs, self.log_owner = [], [], [], []
        for lt in prog.obj_logs:
            c, g = compile_form(lt.form)
            self.log_consts.append(c)
            self.log_grads.append(g)
            self.log_coefs.append(float(lt.coef))
            self.log_owner.append(-1)
        for k, row in enumerate(prog.rows):
            for lt in row.logs:
                c, g = compile_form(lt.form)
                self.log_consts.append(c)
                self.log_grads.append(g)
                self.log_coefs.append(float(lt.coef))
                self.log_owner.append(k)
        self.log_consts = np.array(self.log_consts, dtype=float)
        self.log_grads = (
            np.vstack(self.log_grads) if self.log_grads else np.zeros((0, self.dim))
        )
        self.log_coefs = np.array(self.log_coefs, dtype=float)
        self.log_owner = np.array(self.log_owner, dtype=np.intp)
        self.obj_mask = self.log_owner == -1

        self.lin_const, self.lin_grad = compile_form(prog.obj_linear)
        self.row_lin = [compile_form(row.linear) for row in prog.rows]
        self.ineq = [compile_form(f) for f in prog.ineqs]

        eq_vecs, eq_consts = [], []
        for v, i, val in prog.diag_pins:
            g = np.zeros(self.dim)
            g[self.offsets[v] + i] = 1.0
            eq_vecs.append(g)
            eq_consts.append(-float(val))
        for f in prog.eqs:
            c, g = compile_form(f)
            eq_vecs.append(g)
            eq_consts.append(c)
        self.reduction = _Reduction(self.dim, eq_vecs, eq_consts)

        # barrier parameter of the full constraint set
        self.nu = len(self.ineq) + len(prog.rows) + sum(self.dims)

    # ---- evaluations ------------------------------------------------------

    def log_args(self, x):
        return self.log_consts + self.log_grads @ x

    def row_f(self, x, u=None):
        """True row values f_k (no slack), using precomputed log args."""
        if u is None:
            u = self.log_args(x)
        vals = np.array([c + g @ x for c, g in self.row_lin])
        if self.log_owner.size:
            mask = ~self.obj_mask
            if mask.any():
                contrib = np.bincount(
                    self.log_owner[mask],
                    weights=self.log_coefs[mask] * np.log(u[mask]),
                    minlength=len(self.row_lin),
                )
                vals -= contrib
        return vals

    def ineq_g(self, x):
        if not self.ineq:
            return np.zeros(0)
        return np.array([c + g @ x for c, g in self.ineq])

    def objective_part(self, x, u=None):
        """Log-plus-linear objective (no -t term)."""
        if u is None:
            u = self.log_args(x)
        total = self.lin_const + self.lin_grad @ x
        if self.obj_mask.any():
            total += float(np.sum(self.log_coefs[self.obj_mask] * np.log(u[self.obj_mask])))
        return float(total)

    def matrices(self, x):
        return [
            raw_to_mat(x[o:o + n * n], n) for o, n in zip(self.offsets, self.dims)
        ]

    def chol_all(self, x):
        chols = []
        for o, n in zip(self.offsets, self.dims):
            m = raw_to_mat(x[o:o + n * n], n)
            try:
                chols.append(np.linalg.cholesky(m))
            except np.linalg.LinAlgError:
                return None
        return chols

    def in_domain(self, x, phase1_sp=None):
        """Strict interiority check; returns cached pieces or None."""
        u = self.log_args(x)
        if np.any(u <= 0):
            return None
        gvals = self.ineq_g(x)
        if phase1_sp is None:
            if np.any(gvals >= 0):
                return None
        else:
            if np.any(gvals - phase1_sp >= 0):
                return None
        if self.has_t:
            slacks = x[self.t_idx] - self.row_f(x, u)
            if np.any(slacks <= 0):
                return None
        else:
            slacks = np.zeros(0)
        chols = self.chol_all(x)
        if chols is None:
            return None
        return u, gvals, slacks, chols


def _merit(comp, x, mu, phase1, t_mu=None):
    """Scaled barrier merit (mu * objective-to-minimize + barrier) / s.

    t_mu overrides the weight on the epigraph slack t; pure centering
    uses mu = 0 with t_mu = 1 because the barrier alone is unbounded
    below in t. The scale s = max(mu, 1) keeps the merit at objective
    magnitude at every stage, so line-search comparisons resolve
    decreases of order tol instead of order mu * eps.
    """
    sp = x[-1] if phase1 else None
    dom = comp.in_domain(x[:-1] if phase1 else x, phase1_sp=sp)
    if dom is None:
        return None, None
    xv = x[:-1] if phase1 else x
    u, gvals, slacks, chols = dom
    if t_mu is None:
        t_mu = mu
    if phase1:
        total = mu * sp
        resid = sp - gvals
    else:
        total = -mu * comp.objective_part(xv, u)
        if comp.has_t:
            total += t_mu * xv[comp.t_idx]
        resid = -gvals
    barrier = 0.0
    if resid.size:
        barrier -= float(np.sum(np.log(resid)))
    if slacks.size:
        barrier -= float(np.sum(np.log(slacks)))
    for ch in chols:
        barrier -= 2.0 * float(np.sum(np.log(np.diag(ch).real)))
    return (total + barrier) / max(mu, 1.0), (u, gvals, slacks, chols)


def _assemble(comp, x, mu, phase1, cache, t_mu=None):
    """Gradient and a Gram factor J of the merit Hessian (H = J^T J).

    Every curvature term is either rank one with a nonnegative weight or
    the -lndet block, whose factor is the symmetric Kronecker matrix of
    X^{-1/2} (computed by _lndet_hess applied to X^{-1/2}). Returning the
    factor instead of H keeps the Newton system solvable at condition
    numbers whose square would drown double precision.
    """
    u, gvals, slacks, chols = cache
    if t_mu is None:
        t_mu = mu
    dim = comp.dim + (1 if phase1 else 0)
    g = np.zeros(dim)
    rank_vecs = []
    rank_wts = []

    def pad(vec):
        if phase1:
            return np.concatenate([vec, [0.0]])
        return vec

    # objective part (phase 2) or sp (phase 1)
    if phase1:
        g[-1] += mu
    else:
        if mu != 0.0 and comp.obj_mask.any():
            coefs = comp.log_coefs[comp.obj_mask]
            uo = u[comp.obj_mask]
            go = comp.log_grads[comp.obj_mask]
            g -= mu * ((coefs / uo) @ go)
            for cj, uj, gj in zip(coefs, uo, go):
                rank_vecs.append(gj)
                rank_wts.append(mu * cj / uj ** 2)
        g -= mu * comp.lin_grad
        if comp.has_t:
            g[comp.t_idx] += t_mu

    # linear inequality barriers
    for (c, gv), val in zip(comp.ineq, gvals):
        if phase1:
            d = pad(-gv)
            d[-1] += 1.0
            resid = x[-1] - val
        else:
            d = -gv
            resid = -val
        g -= d / resid
        rank_vecs.append(d)
        rank_wts.append(1.0 / resid ** 2)

    # epigraph row barriers: slack = t - f_k
    if comp.has_t:
        row_mask = ~comp.obj_mask
        for k in range(len(comp.row_lin)):
            c, gv = comp.row_lin[k]
            d = gv.copy()
            mk = row_mask & (comp.log_owner == k)
            if mk.any():
                d -= (comp.log_coefs[mk] / u[mk]) @ comp.log_grads[mk]
            d[comp.t_idx] -= 1.0
            d = pad(d)
            sl = slacks[k]
            # -ln(t - f_k): gradient d/sl, curvature from both d d^T and f_k
            g += d / sl
            rank_vecs.append(d)
            rank_wts.append(1.0 / sl ** 2)
            if mk.any():
                for cj, uj, gj in zip(
                    comp.log_coefs[mk], u[mk], comp.log_grads[mk]
                ):
                    rank_vecs.append(pad(gj))
                    rank_wts.append(cj / uj ** 2 / sl)

    # PSD cone barriers: gradient -X^{-1}, factor symKron(X^{-1/2}).
    # Eigenvalues come from the singular values of the Cholesky factor;
    # forming ch ch^H first would bury eigenvalues below eps*||X|| in
    # rounding noise and 1/lambda would overflow.
    cone_rows = []
    for o, n, ch in zip(comp.offsets, comp.dims, chols):
        uvec, sig, _ = np.linalg.svd(ch)
        sig = np.maximum(sig, sig[0] * np.finfo(float).eps)
        t_half = (uvec / sig) @ uvec.conj().T
        s_inv = (uvec / sig ** 2) @ uvec.conj().T
        g[o:o + n * n] += mat_to_raw(-0.5 * (s_inv + s_inv.conj().T))
        block = np.zeros((n * n, dim))
        block[:, o:o + n * n] = _lndet_hess(t_half, n)
        cone_rows.append(block)

    if rank_vecs:
        v = np.vstack(rank_vecs)
        w = np.sqrt(np.asarray(rank_wts))
        cone_rows.append(v * w[:, None])
    j = np.vstack(cone_rows) if cone_rows else np.zeros((0, dim))
    # same 1/max(mu, 1) scaling as the merit, so gradient, Gram factor,
    # and decrement are all in objective units
    s = max(mu, 1.0)
    if s != 1.0:
        g /= s
        j /= np.sqrt(s)
    return g, j


def _max_step(comp, x, d, phase1, chols):
    """Exact largest step keeping logs, inequalities, and cones interior.

    Epigraph row slacks are concave along the direction, so their cutoff
    is left to the backtracking loop; everything else is affine or an
    eigenvalue problem and is computed here.
    """
    xv, dv = (x[:-1], d[:-1]) if phase1 else (x, d)
    amax = np.inf
    if comp.log_grads.size:
        u = comp.log_args(xv)
        du = comp.log_grads @ dv
        neg = du < 0
        if np.any(neg):
            amax = min(amax, float(np.min(u[neg] / -du[neg])))
    if comp.ineq:
        gv = comp.ineq_g(xv)
        dg = np.array([g @ dv for _, g in comp.ineq])
        if phase1:
            gv = gv - x[-1]
            dg = dg - d[-1]
        pos = dg > 0
        if np.any(pos):
            amax = min(amax, float(np.min(-gv[pos] / dg[pos])))
    for o, n, ch in zip(comp.offsets, comp.dims, chols):
        dm = raw_to_mat(dv[o:o + n * n], n)
        li = np.linalg.inv(ch)
        lam = float(np.linalg.eigvalsh(li @ dm @ li.conj().T)[0])
        if lam < 0:
            amax = min(amax, -1.0 / lam)
    return amax


def _factored_newton(jr, gr):
    """Newton step -H^{-1} g and decrement g' H^{-1} g from H = J^T J.

    The R factor of J is a numerically stable Cholesky factor of H; the
    decrement comes out as a plain sum of squares, so it is nonnegative
    by construction. Rank-deficient J falls back to a ridged system.
    """
    gn = float(np.linalg.norm(gr))
    if gn == 0.0 or not np.isfinite(gn):
        return np.zeros_like(gr), 0.0
    try:
        r = np.linalg.qr(jr, mode="r")
        y = np.linalg.solve(r.T, gr / gn)
        dr = -gn * np.linalg.solve(r, y)
        return dr, float(gn * gn * (y @ y))
    except np.linalg.LinAlgError:
        h = jr.T @ jr
        base = np.trace(h) / max(1, h.shape[0])
        ridge = 1e-14 * max(base, 1.0)
        for _ in range(12):
            try:
                ch = np.linalg.cholesky(h + ridge * np.eye(h.shape[0]))
                dr = -np.linalg.solve(ch.T, np.linalg.solve(ch, gr))
                return dr, float(-gr @ dr)
            except np.linalg.LinAlgError:
                ridge *= 10.0
        raise RuntimeError("Newton system not positive definite")


def _newton_loop(comp, x, mu, phase1, budget, state, trace=None,
                 dec_tol=DECREMENT_TOL, gnorm_target=None, t_mu=None):
    """Damped Newton to the stage tolerance; mutates nothing, returns x."""
    red = comp.reduction
    best_dec = np.inf
    no_progress = 0
    for _ in range(budget):
        val, cache = _merit(comp, x, mu, phase1, t_mu)
        if val is None:
            raise RuntimeError("iterate left the barrier domain")
        g, j = _assemble(comp, x, mu, phase1, cache, t_mu)
        if phase1:
            gr = np.concatenate([red.reduce_vec(g[:-1]), g[-1:]])
            jr = np.hstack([red.reduce_cols(j[:, :-1]), j[:, -1:]])
        else:
            gr = red.reduce_vec(g)
            jr = red.reduce_cols(j)
        dr, decrement = _factored_newton(jr, gr)
        state["iterations"] += 1
        state["grad_norm"] = float(np.linalg.norm(gr))
        state["decrement"] = decrement
        if trace is not None:
            trace.write(
                json.dumps(
                    {
                        "mu": mu,
                        "iter": state["iterations"],
                        "merit": val,
                        "decrement": decrement,
                        "grad_norm": state["grad_norm"],
                        "phase1": phase1,
                    }
                )
                + "\n"
            )
        if gnorm_target is not None and state["grad_norm"] <= gnorm_target:
            return x, True
        if decrement < 0 or decrement / 2.0 <= dec_tol:
            return x, True
        # conditioning floor: when the decrement stops shrinking the
        # direction noise has caught up with the centering error, and
        # further steps only wander around the same level
        if decrement < 0.9 * best_dec:
            best_dec = decrement
            no_progress = 0
        else:
            no_progress += 1
            if no_progress >= 10:
                return x, True
        if phase1:
            d = np.concatenate([red.full_dir(dr[:-1]), dr[-1:]])
        else:
            d = red.full_dir(dr)
        amax = _max_step(comp, x, d, phase1, cache[3])
        a0 = 1.0 if amax >= 1.0 / BOUNDARY_FRAC else BOUNDARY_FRAC * amax
        accepted = False
        if decrement / 2.0 <= QUAD_REGION:
            trial = x + a0 * d
            tval, _ = _merit(comp, trial, mu, phase1, t_mu)
            if tval is not None:
                if np.array_equal(trial, x):
                    return x, True  # converged to float resolution
                x = trial
                accepted = True
        if not accepted:
            alpha = a0
            for _ in range(MAX_BACKTRACK):
                trial = x + alpha * d
                tval, _ = _merit(comp, trial, mu, phase1, t_mu)
                if tval is not None and tval <= val + ARMIJO * alpha * (gr @ dr):
                    if np.array_equal(trial, x):
                        return x, True  # converged to float resolution
                    x = trial
                    accepted = True
                    break
                alpha *= BACKTRACK
        if not accepted:
            return x, True  # stalled: accept stage at current point
        if phase1 and x[-1] < -1e-10:
            return x, True  # strictly feasible point found, stop early
        if state["iterations"] >= state["max_iter"]:
            return x, False
    return x, False


def _initial_point(comp, init_vars=None, init_t=None):
    """Strictly interior start, or None if the s-interval search fails.

    The free diagonal entries are set to a common scale s; every affine
    quantity is then affine in s, so the feasible s-interval is computed
    exactly from the log forms and linear inequalities.
    """
    red = comp.reduction

    def base_point(s):
        x = np.zeros(comp.dim)
        for o, n in zip(comp.offsets, comp.dims):
            x[o:o + n] = s
        if red.kind == "slice":
            x[red.fixed_idx] = red.fixed_val
        elif red.kind == "general":
            # keep the equality-consistent component, add s on diagonals
            x = red.full_point(red.reduce_point(x))
        if comp.has_t:
            x[comp.t_idx] = 0.0
            x[comp.t_idx] = float(np.max(comp.row_f(x))) + 1.0
        return x

    x0 = base_point(0.0)
    x1 = base_point(1.0)
    lo, hi = 0.0, np.inf
    ok = True
    pairs = [(comp.log_args(x0), comp.log_args(x1), 1.0)]
    if comp.ineq:
        # flip sign so every condition reads a + s*sl > 0
        pairs.append((-comp.ineq_g(x0), -comp.ineq_g(x1), 1.0))
    for c0, c1, _ in pairs:
        for a, sl in zip(np.atleast_1d(c0), np.atleast_1d(c1 - c0)):
            if abs(sl) < 1e-300:
                if a <= 0:
                    ok = False
            elif sl > 0:
                lo = max(lo, -a / sl)
            else:
                if a <= 0:
                    ok = False
                else:
                    hi = min(hi, -a / sl)
    margin = 1e-9 * max(1.0, abs(lo) if np.isfinite(lo) else 1.0)
    lo = lo + margin if lo > 0 else lo
    if not ok or hi <= lo or hi <= 0:
        return None
    if np.isinf(hi):
        s = max(2.0 * lo, 1.0)
    else:
        s = 0.5 * hi if lo <= 0 else float(np.sqrt(lo * hi))
    x = base_point(s)
    if init_vars is not None:
        xw = np.zeros(comp.dim)
        for o, n, m in zip(comp.offsets, comp.dims, init_vars):
            xw[o:o + n * n] = mat_to_raw(check_hermitian(np.asarray(m, complex)))
        if comp.has_t:
            # a warm epigraph value keeps its centered slack; losing it
            # would park t nine orders off the previous central path
            rows = float(np.max(comp.row_f(xw)))
            if init_t is not None and init_t > rows:
                xw[comp.t_idx] = init_t
            else:
                xw[comp.t_idx] = rows + 1.0
        for blend in (1.0, 0.98, 0.9, 0.7, 0.4):
            cand = blend * xw + (1.0 - blend) * x
            if red.kind == "slice":
                cand[red.fixed_idx] = red.fixed_val
            if comp.has_t:
                rows = float(np.max(comp.row_f(cand)))
                if cand[comp.t_idx] <= rows:
                    cand[comp.t_idx] = rows + 1.0
            if comp.in_domain(cand) is not None:
                return cand
    if comp.in_domain(x) is None:
        return None
    return x


def _initial_mu(comp, x):
    """First barrier weight after centering a cold start.

    The stage-mu Newton decrement at the centered point is
    delta(mu)^2 = mu^2 a + 2 mu b + c in terms of the objective gradient
    f0' and barrier gradient gB under the barrier Hessian metric; the
    returned mu solves delta(mu) = LAMBDA_BAR so the first stage starts
    inside the damped Newton region regardless of the objective's scale.
    The model drops the objective curvature and the epigraph reweighting,
    both negligible below mu = 1, so the root is capped there.
    """
    fallback = 1.0
    _, cache = _merit(comp, x, 0.0, False, t_mu=1.0)
    g_b, j_b = _assemble(comp, x, 0.0, False, cache, t_mu=1.0)
    g_one, _ = _assemble(comp, x, 1.0, False, cache, t_mu=1.0)
    red = comp.reduction
    f0r = red.reduce_vec(g_one - g_b)
    gbr = red.reduce_vec(g_b)
    jr = red.reduce_cols(j_b)
    try:
        r = np.linalg.qr(jr, mode="r")
        wf = np.linalg.solve(r.T, f0r)
        wb = np.linalg.solve(r.T, gbr)
    except np.linalg.LinAlgError:
        return fallback
    a = float(wf @ wf)
    b = float(wf @ wb)
    c = float(wb @ wb)
    target = LAMBDA_BAR ** 2
    if not np.isfinite(a) or a <= 0.0:
        return fallback
    disc = b * b - a * (c - target)
    if disc <= 0.0:
        # barrier gradient alone exceeds the target; start tiny relative
        # to the objective scale
        return max(min(1e-2 / np.sqrt(a), fallback), 1e-12)
    mu = (-b + np.sqrt(disc)) / a
    if not np.isfinite(mu) or mu <= 0.0:
        return fallback
    return float(min(mu, 1.0))


def _gap_bound(nu, lam, mu):
    """Suboptimality bound at a lam-approximate center of mu f + B.

    An exact center is within nu / mu of the optimum; following the
    path to decrement lam < 1 instead costs an extra
    lam (lam + sqrt(nu)) / (1 - lam) in the numerator. Past lam = 1
    the point carries no certificate at all.
    """
    if not np.isfinite(lam) or lam >= 1.0:
        return np.inf
    return (nu + lam * (lam + np.sqrt(nu)) / (1.0 - lam)) / mu


def _warm_mu(comp, x, mu_final):
    """Stage weight and start the warm point is nearly centered for.

    Walks the stage ladder downward and evaluates the actual scaled
    Newton decrement (one factorization per probe); the closed-form
    model used for cold starts cannot see warm centering because the
    objective curvature term mu F'' dominates the metric at large mu.
    A warm point whose epigraph slack matches no rung at all was
    centered for a different program (the rows moved under it); its t
    is re-slacked to the cold offset and the ladder probed once more
    before falling back. Returns (mu, x), possibly with t repaired.
    """
    red = comp.reduction

    def scan(x):
        mu = mu_final
        best_mu, best_dec = None, np.inf
        while mu > 1.0:
            val, cache = _merit(comp, x, mu, False, t_mu=max(mu, 1.0))
            if val is None:
                break
            g, j = _assemble(comp, x, mu, False, cache, t_mu=max(mu, 1.0))
            _, dec = _factored_newton(red.reduce_cols(j), red.reduce_vec(g))
            scaled = dec * max(mu, 1.0)
            if scaled <= 4 * LAMBDA_BAR ** 2:
                return mu, None, None
            if scaled < best_dec:
                best_mu, best_dec = mu, scaled
            mu /= MU_GROWTH
        return None, best_mu, best_dec

    mu, best_mu, best_dec = scan(x)
    if mu is not None:
        return mu, x
    if comp.has_t:
        # no rung accepts the warm epigraph, so the rows moved under it
        # and the slack is squeezed against the new row max (or stranded
        # far above it); a squeezed slack also poisons the fallback: its
        # decrement can look moderate while the line search dies on the
        # epigraph boundary. Restore the cold offset and rescan,
        # preferring even a damped low rung there over the stale t.
        x2 = x.copy()
        x2[comp.t_idx] = float(np.max(comp.row_f(x2))) + 1.0
        mu2, best_mu2, best_dec2 = scan(x2)
        if mu2 is not None:
            return mu2, x2
        if best_mu2 is not None and best_dec2 <= 100.0:
            return best_mu2, x2
        x = x2
    elif best_mu is not None and best_dec <= 100.0:
        # no rung is near-centered, but a moderate decrement still beats
        # restarting the whole ladder: damped steps burn lambda ~ a few
        # down in a handful of iterations
        return best_mu, x
    return min(_initial_mu(comp, x), mu_final), x


def _log_feasible_point(comp):
    """Point with logs and cone strictly interior, ignoring inequalities."""
    red = comp.reduction
    for s in [1.0, 0.1, 10.0, 1e-2, 1e2, 1e-4, 1e4, 1e-6, 1e6, 1e-8]:
        x = np.zeros(comp.dim)
        for o, n in zip(comp.offsets, comp.dims):
            x[o:o + n] = s
        if red.kind == "slice":
            x[red.fixed_idx] = red.fixed_val
        elif red.kind == "general":
            x = red.full_point(red.reduce_point(x))
        if comp.has_t:
            x[comp.t_idx] = 0.0
            x[comp.t_idx] = float(np.max(comp.row_f(x))) + 1.0
        u = comp.log_args(x)
        if np.any(u <= 0):
            continue
        if comp.chol_all(x) is None:
            continue
        return x
    return None


def solve(program, tol=1e-7, max_iter=200, init_vars=None, init_t=None,
          trace_path=None):
    """Barrier solve of a LogTraceProgram.

    tol is the absolute duality-gap target on the (nats-valued) objective;
    max_iter caps the total number of Newton steps across all barrier
    stages. init_vars optionally warm-starts from previous variable values
    (blended toward the cold start until strictly interior); init_t is the
    matching epigraph value from the previous report.

    Returns a SolverReport; status is "converged", "max-iter", or
    "infeasible" (no strictly interior point).
    """
    comp = _Compiled(program)
    red = comp.reduction
    if not red.feasible:
        return SolverReport(
            variables=[np.zeros((n, n), complex) for n in comp.dims],
            objective=np.nan, kkt_residual=np.inf, constraint_violation=np.inf,
            iterations=0, status="infeasible", gap_bound=np.inf,
            notes="inconsistent equality constraints",
        )
    trace = open(trace_path, "a") if trace_path else None
    state = {
        "iterations": 0, "max_iter": max_iter,
        "grad_norm": np.inf, "decrement": np.inf,
    }
    try:
        x = _initial_point(comp, init_vars, init_t)
        warm = x is not None and init_vars is not None
        notes = ""
        if x is None:
            x = _log_feasible_point(comp)
            if x is None:
                return SolverReport(
                    variables=[np.zeros((n, n), complex) for n in comp.dims],
                    objective=np.nan, kkt_residual=np.inf,
                    constraint_violation=np.inf, iterations=0,
                    status="infeasible", gap_bound=np.inf,
                    notes="no interior point for logs and cone",
                )
            # phase 1 on the inequality slack
            sp0 = float(np.max(comp.ineq_g(x))) + 1.0
            xp = np.concatenate([x, [sp0]])
            mu = 10.0
            nu1 = comp.nu
            while True:
                xp, _ = _newton_loop(comp, xp, mu, True, max_iter, state, trace)
                if xp[-1] < -1e-10 or state["iterations"] >= max_iter:
                    break
                if nu1 / mu <= 1e-9 * max(1.0, abs(xp[-1])):
                    break
                mu = mu * MU_GROWTH
            if xp[-1] >= -1e-10:
                return SolverReport(
                    variables=comp.matrices(xp[:-1]),
                    objective=np.nan, kkt_residual=np.inf,
                    constraint_violation=float(max(np.max(comp.ineq_g(xp[:-1]), initial=0.0), 0.0)),
                    iterations=state["iterations"], status="infeasible",
                    gap_bound=np.inf, notes="phase-1 slack nonnegative",
                )
            x = xp[:-1]
            notes = "phase-1 start"

        # pure centering (mu = 0, unit weight on t so the center exists)
        # pulls a cold start to the analytic center so the first stage
        # weight is meaningful; a warm start is already near the central
        # path of the previous program, and the initial-mu rule below
        # recovers the matching stage weight from its barrier gradient
        if not warm:
            x, _ = _newton_loop(
                comp, x, 0.0, False, min(80, max_iter), state, trace,
                dec_tol=LAMBDA_BAR ** 2 / 2.0, t_mu=1.0,
            )
        # gap bound at a lambda-approximate center of mu f + B is
        # (nu + lam (lam + sqrt(nu)) / (1 - lam)) / mu for lam < 1;
        # mu_final is sized so even a stage that stalls at twice the
        # normal LAMBDA_BAR exit level still certifies tol
        lam_head = 2.0 * LAMBDA_BAR
        nu_eff = comp.nu + lam_head * (
            lam_head + np.sqrt(comp.nu)) / (1.0 - lam_head)
        mu_final = nu_eff / tol
        if warm:
            mu, x = _warm_mu(comp, x, mu_final)
        else:
            mu = min(_initial_mu(comp, x), mu_final)
        stage_objectives = []
        converged = True
        rescue = 0
        snap = None
        gap = np.inf
        while True:
            at_final = mu >= mu_final
            # below mu = 1 the slack weight stays at 1 so the epigraph
            # slack does not balloon to n_rows/mu and back; the stage
            # decrement tolerance is LAMBDA_BAR^2 in mu*f + B units
            x, stage_ok = _newton_loop(
                comp, x, mu, False, max_iter, state, trace,
                dec_tol=LAMBDA_BAR ** 2 / (2.0 * max(mu, 1.0)),
                t_mu=max(mu, 1.0),
            )
            stage_objectives.append(comp.objective_part(x) - (
                float(np.max(comp.row_f(x))) if comp.has_t else 0.0
            ))
            lam = float(np.sqrt(max(state["decrement"] * max(mu, 1.0), 0.0)))
            gap = _gap_bound(comp.nu, lam, mu)
            if not stage_ok and state["iterations"] >= max_iter:
                converged = False
                break
            if at_final:
                if gap <= tol:
                    break
                if snap is not None and gap >= snap[1]:
                    # the higher stage lost ground, keep the earlier point
                    x, gap, mu, state["decrement"] = snap
                    break
                # ill-conditioned programs stall above LAMBDA_BAR; the
                # lam-honest bound still tightens with mu as long as the
                # point tracks the path, so climb a little further
                rescue += 1
                if rescue > 2 or lam >= 1.0:
                    if snap is not None and snap[1] < gap:
                        x, gap, mu, state["decrement"] = snap
                    break
                snap = (x.copy(), gap, mu, state["decrement"])
                mu *= MU_GROWTH
            else:
                mu = min(mu * MU_GROWTH, mu_final)

        # polish: a couple of extra full Newton steps at the final mu drive
        # the scaled gradient norm (the reported stationarity residual) far
        # below the stage-exit level inflated by active constraints
        dec_exit = state["decrement"]
        budget = min(10, max(0, max_iter - state["iterations"]))
        scale = max(mu, 1.0)
        if converged and budget and state["grad_norm"] * scale / mu > 1e-9:
            x, _ = _newton_loop(
                comp, x, mu, False, budget, state, trace,
                dec_tol=0.0, gnorm_target=1e-9 * mu / scale,
                t_mu=max(mu, 1.0),
            )
        state["decrement"] = min(dec_exit, state["decrement"])
        lam = float(np.sqrt(max(state["decrement"] * scale, 0.0)))
        gap = min(gap, _gap_bound(comp.nu, lam, mu))

        variables = [check_hermitian(m) for m in comp.matrices(x)]
        kkt = state["grad_norm"] * scale / mu
        viol = float(max(np.max(comp.ineq_g(x), initial=-np.inf), 0.0)) if comp.ineq else 0.0
        objective = comp.objective_part(x)
        if comp.has_t:
            objective -= float(np.max(comp.row_f(x)))
        status = "converged" if (converged and gap <= tol) else "max-iter"
        return SolverReport(
            variables=variables, objective=float(objective), kkt_residual=float(kkt),
            constraint_violation=viol, iterations=state["iterations"],
            status=status, gap_bound=float(gap),
            final_decrement=float(state["decrement"]),
            stage_objectives=stage_objectives,
            epigraph=float(x[comp.t_idx]) if comp.has_t else None,
            notes=notes,
        )
    finally:
        if trace:
            trace.close()
