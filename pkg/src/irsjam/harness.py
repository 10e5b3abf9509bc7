"""Scenario configuration, the full two-block alternation, and sweeps.

One run couples the beamformer block and the surface block around a
shared incumbent: after every block the candidate (beams, phases) is
scored with the exact clamped secrecy rate and kept only if it improves.
The reported outer trace is the incumbent value, which makes it
non-decreasing by construction even if a late block round lands slightly
below an earlier one.

Sweeps pair the channel realizations: trial i of every baseline, power
level, and setup sees the same draw (up to tensors that change size), so
curve differences are paired differences and not resampling noise.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .channel import build_scenario, dbm_to_watt
from .irsopt import align_init, optimize_reflect
from .secrecy import TxSolution, passive_off_row, secrecy_objective
from .txopt import algorithm1

BASELINES = ("an,irs", "irs", "an", "none")

AXES = ("pmax", "k", "n")

CSV_HEADER = (
    "axis,value,baseline,setup,mean_rate_bps_hz,stderr,trials_ok,trials_failed"
)


@dataclass
class ScenarioConfig:
    """Everything one run depends on, in physical units.

    Distances are meters, powers dBm, exponents unitless. c_re and
    beta_re default to None, which resolves per setup tag: the segment
    behind the surface is near line-of-sight, the mirrored one is not.
    """

    n_tx: int = 4
    n_elements: int = 8
    n_eves: int = 3
    pmax_dbm: float = 40.0
    sigma0_dbm: float = -105.0
    setup: str = "a"
    an: bool = True
    irs: bool = True
    eps: float = 1e-3
    max_outer: int = 40
    tol_inner: float = 1e-4
    max_inner: int = 30
    tol_reflect: float = 1e-4
    max_reflect: int = 20
    n_rand: int = 200
    solver_tol: float = 1e-7
    solver_max_iter: int = 200
    seed: int = 0
    carrier_hz: float = 750e6
    l0_db: float = -30.0
    c_ab: float = 5.0
    c_ae: float = 5.0
    c_ar: float = 3.5
    c_rb: float = 2.0
    c_re: float = None
    beta_ab: float = 0.0
    beta_ae: float = 0.0
    beta_ar: float = 0.0
    beta_rb: float = np.inf
    beta_re: float = None
    ura_rows: int = None
    element_spacing: float = None
    alice_pos: tuple = (5.0, 0.0, 20.0)
    rose_pos: tuple = (0.0, 100.0, 2.0)
    bob_pos: tuple = (3.0, 100.0, 0.0)
    eve_positions: tuple = None

    def __post_init__(self):
        self.validate()

    @property
    def pmax_watt(self):
        return float(dbm_to_watt(self.pmax_dbm))

    @property
    def sigma0_watt(self):
        return float(dbm_to_watt(self.sigma0_dbm))

    @property
    def gamma0(self):
        return 1.0 / self.sigma0_watt

    def validate(self):
        if self.n_tx < 1:
            raise ValueError(f"n_tx must be at least 1, got {self.n_tx}")
        if self.n_elements < 1:
            raise ValueError(
                f"n_elements must be at least 1, got {self.n_elements}"
            )
        if self.n_eves < 1:
            raise ValueError(f"n_eves must be at least 1, got {self.n_eves}")
        if self.setup not in ("a", "b"):
            raise ValueError(
                f"unknown setup tag {self.setup!r}, expected 'a' or 'b'"
            )
        if not np.isfinite(self.pmax_dbm):
            raise ValueError(f"pmax_dbm must be finite, got {self.pmax_dbm}")
        if not np.isfinite(self.sigma0_dbm):
            raise ValueError(
                f"sigma0_dbm must be finite, got {self.sigma0_dbm}"
            )
        if self.carrier_hz <= 0:
            raise ValueError(
                f"carrier_hz must be positive, got {self.carrier_hz}"
            )
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        for name in ("max_outer", "max_inner", "max_reflect",
                     "solver_max_iter"):
            if getattr(self, name) < 1:
                raise ValueError(
                    f"{name} must be at least 1, got {getattr(self, name)}"
                )
        for name in ("tol_inner", "tol_reflect", "solver_tol"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(
                    f"{name} must be a positive finite number, got {val}"
                )
        if self.n_rand < 0:
            raise ValueError(f"n_rand must be nonnegative, got {self.n_rand}")
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")
        for name in ("beta_ab", "beta_ae", "beta_ar", "beta_rb", "beta_re"):
            val = getattr(self, name)
            if val is not None and val < 0:
                raise ValueError(
                    f"{name} must be nonnegative, got {val}"
                )
        if self.ura_rows is not None and (
            self.ura_rows < 1 or self.n_elements % self.ura_rows != 0
        ):
            raise ValueError(
                f"ura_rows={self.ura_rows} does not divide "
                f"N={self.n_elements}"
            )
        if self.element_spacing is not None and self.element_spacing <= 0:
            raise ValueError(
                f"element_spacing must be positive, got "
                f"{self.element_spacing}"
            )
        for name in ("alice_pos", "rose_pos", "bob_pos"):
            if len(getattr(self, name)) != 3:
                raise ValueError(f"{name} must have 3 coordinates")

    def digest(self):
        """Stable hex digest of every field, for tagging result files."""
        data = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(data.encode()).hexdigest()


def config_from_dict(data):
    """ScenarioConfig from a plain mapping, e.g. parsed JSON.

    Unknown keys raise with the full offending list. String values for
    unbounded numeric fields are coerced so JSON without the
    nonstandard Infinity literal can still say "inf".
    """
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError("unknown config keys: " + ", ".join(unknown))
    coerced = dict(data)
    for key in ("eps", "beta_ab", "beta_ae", "beta_ar", "beta_rb", "beta_re"):
        if isinstance(coerced.get(key), str):
            coerced[key] = float(coerced[key])
    for key in ("alice_pos", "rose_pos", "bob_pos"):
        if coerced.get(key) is not None:
            coerced[key] = tuple(float(x) for x in coerced[key])
    if coerced.get("eve_positions") is not None:
        coerced["eve_positions"] = tuple(
            tuple(float(x) for x in p) for p in coerced["eve_positions"]
        )
    return ScenarioConfig(**coerced)


@dataclass
class RunRecord:
    """Outcome of one full alternation on one channel realization."""

    secrecy: float
    raw_secrecy: float
    tx: TxSolution
    reflect: np.ndarray
    outer_trace: list
    outers: int
    converged: bool
    solver_iterations: int = 0
    solver_statuses: dict = field(default_factory=dict)
    block_gaps: list = field(default_factory=list)
    inner_traces: list = field(default_factory=list)
    failed: str = ""


def algorithm2(channels, config, rng=None):
    """Alternate the beam block and the surface block to a fixed point.

    Every block result is scored with the exact clamped secrecy rate and
    an incumbent keeps the best (beams, phases) pair seen; the outer
    trace records the incumbent after each outer round. Stops when the
    incumbent moves by less than eps relative, the loop budget runs out,
    or a block fails (the incumbent survives a failure). With the
    surface disabled the beam block runs once against the passive row.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    gamma0 = config.gamma0
    p_max = config.pmax_watt
    n = channels.n_elements

    statuses = {}
    solver_iters = 0
    block_gaps = []
    inner_traces = []
    failed = ""

    def tally(kind, run):
        nonlocal solver_iters
        solver_iters += run.solver_iterations
        for key, count in run.solver_statuses.items():
            statuses[key] = statuses.get(key, 0) + count
        block_gaps.append(run.relaxed_objective - run.recovered_objective)
        inner_traces.append((kind, list(run.trace)))

    v = align_init(channels) if config.irs else None
    v_ext = v.extended if config.irs else passive_off_row(n)

    best = None
    trace = []
    prev = 0.0
    converged = False
    outers = 0
    for outer in range(config.max_outer):
        outers += 1
        tx_run = algorithm1(
            channels, v_ext, p_max, gamma0,
            tol=config.tol_inner, max_iter=config.max_inner,
            an=config.an, n_rand=config.n_rand, rng=rng,
            solver_tol=config.solver_tol,
            solver_max_iter=config.solver_max_iter,
        )
        tally("tx", tx_run)
        if tx_run.failed:
            failed = tx_run.failed
            break
        tx = tx_run.solution
        raw, clamped = secrecy_objective(channels, tx, v_ext, gamma0)
        if best is None or clamped > best[0]:
            best = (clamped, raw, tx, v_ext)

        if config.irs:
            refl_run = optimize_reflect(
                channels, tx.f1, tx.f2, gamma0,
                tol=config.tol_reflect, max_iter=config.max_reflect,
                v_init=None if outer == 0 else v,
                n_rand=config.n_rand, rng=rng,
                solver_tol=config.solver_tol,
                solver_max_iter=config.solver_max_iter,
            )
            tally("reflect", refl_run)
            if refl_run.failed:
                failed = refl_run.failed
                break
            v = refl_run.reflect
            v_ext = v.extended
            raw, clamped = secrecy_objective(channels, tx, v_ext, gamma0)
            if clamped > best[0]:
                best = (clamped, raw, tx, v_ext)

        val = best[0]
        trace.append(val)
        if not config.irs or np.isinf(config.eps):
            converged = True
            break
        if abs(val - prev) <= config.eps * max(abs(val), 1e-12):
            converged = True
            break
        prev = val

    if best is None:
        zero = np.zeros(channels.n_tx, dtype=complex)
        best = (0.0, 0.0, TxSolution(zero, zero), passive_off_row(n))
    clamped, raw, tx, v_ext = best
    return RunRecord(
        secrecy=clamped,
        raw_secrecy=raw,
        tx=tx,
        reflect=v_ext,
        outer_trace=trace,
        outers=outers,
        converged=converged,
        solver_iterations=solver_iters,
        solver_statuses=statuses,
        block_gaps=block_gaps,
        inner_traces=inner_traces,
        failed=failed,
    )


def baseline_flags(name):
    """(artificial noise on, surface on) for a named baseline."""
    table = {
        "an,irs": (True, True),
        "irs": (False, True),
        "an": (True, False),
        "none": (False, False),
    }
    if name not in table:
        raise ValueError(
            f"unknown baseline {name!r}, expected one of {', '.join(BASELINES)}"
        )
    return table[name]


def _apply_axis(config, axis, value):
    if axis == "pmax":
        return replace(config, pmax_dbm=float(value))
    if axis == "k":
        return replace(config, n_eves=int(value))
    if axis == "n":
        return replace(config, n_elements=int(value))
    raise ValueError(f"unknown axis {axis!r}, expected one of {', '.join(AXES)}")


@dataclass
class SweepCell:
    """Aggregated result of one (axis value, baseline) sweep point."""

    axis: str
    value: float
    baseline: str
    setup: str
    rates: list
    failures: int

    @property
    def mean(self):
        return float(np.mean(self.rates)) if self.rates else float("nan")

    @property
    def stderr(self):
        if len(self.rates) < 2:
            return 0.0
        return float(np.std(self.rates, ddof=1) / np.sqrt(len(self.rates)))


def sweep(config, axis, values, trials, baselines=None, progress=None):
    """Paired-trial sweep over one axis for a set of baselines.

    Channels for trial i come from SeedSequence([seed, i]) regardless of
    baseline or transmit power, so those comparisons are paired draw by
    draw. The optimizer stream is separated per trial and baseline.
    Failed runs are excluded from the cell mean and counted.
    """
    if axis not in AXES:
        raise ValueError(
            f"unknown axis {axis!r}, expected one of {', '.join(AXES)}"
        )
    if len(values) == 0:
        raise ValueError("values must not be empty")
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    if baselines is None:
        baselines = list(BASELINES)
    if len(baselines) == 0:
        raise ValueError("baseline set must not be empty")
    cells = []
    for value in values:
        cfg_v = _apply_axis(config, axis, value)
        for bi, name in enumerate(baselines):
            an, irs = baseline_flags(name)
            cfg = replace(cfg_v, an=an, irs=irs)
            rates = []
            failures = 0
            for trial in range(trials):
                channels = build_scenario(
                    cfg, np.random.SeedSequence([cfg.seed, trial])
                )
                rng = np.random.default_rng(
                    np.random.SeedSequence([cfg.seed, trial, 7, bi])
                )
                record = algorithm2(channels, cfg, rng=rng)
                if record.failed:
                    failures += 1
                else:
                    rates.append(record.secrecy)
                if progress is not None:
                    progress(axis, value, name, trial, record)
            cells.append(
                SweepCell(
                    axis=axis, value=value, baseline=name,
                    setup=cfg.setup, rates=rates, failures=failures,
                )
            )
    return cells


def emit_csv(cells, path):
    """Write sweep cells as CSV, bytewise deterministic for fixed input.

    Floats go through repr, which round-trips float64 exactly; integer
    axis values print as integers. Lines end with a single newline.
    """
    lines = [CSV_HEADER]
    for cell in cells:
        value = cell.value
        if float(value) == int(value):
            value_text = str(int(value))
        else:
            value_text = repr(float(value))
        lines.append(
            ",".join(
                [
                    cell.axis,
                    value_text,
                    cell.baseline,
                    cell.setup,
                    repr(float(cell.mean)),
                    repr(float(cell.stderr)),
                    str(len(cell.rates)),
                    str(cell.failures),
                ]
            )
        )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
