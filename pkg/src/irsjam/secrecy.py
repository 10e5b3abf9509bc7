"""SINR and secrecy-rate evaluation for candidate (f1, f2, v) triples.

All rates are in bps/Hz. The reflect row convention follows channel.py:
v_ext = [v_1, ..., v_N, 1] multiplies the composite matrix without
conjugation, so the scalar link toward node i is v_ext @ H_i @ f.
"""

from dataclasses import dataclass

import numpy as np

LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class ReflectVector:
    """Unit-modulus reflect phases with the appended constant entry.

    The extended form [v, 1] is what every evaluation routine consumes;
    the global rotation degree of freedom is pinned by that trailing 1.
    """

    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex).ravel()
        if v.size == 0:
            raise ValueError("reflect vector must have at least one element")
        dev = float(np.max(np.abs(np.abs(v) - 1.0)))
        if dev > 1e-9:
            raise ValueError(
                f"reflect phases must be unit modulus, worst deviation {dev:.3e}"
            )
        object.__setattr__(self, "v", v)

    @property
    def extended(self):
        return np.concatenate([self.v, np.ones(1, dtype=complex)])


# extended row that disables the reflecting surface entirely
def passive_off_row(n_elements):
    """Extended row [0, ..., 0, 1] that removes the reflected path."""
    row = np.zeros(n_elements + 1, dtype=complex)
    row[-1] = 1.0
    return row


@dataclass(frozen=True)
class TxSolution:
    """Information beam f1 and jamming beam f2 at the transmitter."""

    f1: np.ndarray
    f2: np.ndarray

    def __post_init__(self):
        f1 = np.asarray(self.f1, dtype=complex).ravel()
        f2 = np.asarray(self.f2, dtype=complex).ravel()
        if f1.shape != f2.shape:
            raise ValueError(f"beam length mismatch: {f1.shape} vs {f2.shape}")
        object.__setattr__(self, "f1", f1)
        object.__setattr__(self, "f2", f2)

    @property
    def total_power(self):
        return float(np.sum(np.abs(self.f1) ** 2) + np.sum(np.abs(self.f2) ** 2))

    def validate_power(self, p_max, tol=1e-8):
        """Check the total-power budget within a relative tolerance."""
        if self.total_power > p_max * (1.0 + tol) + tol:
            raise ValueError(
                f"total power {self.total_power:.6e} exceeds budget {p_max:.6e}"
            )


def sinr(H_i, f1, f2, v_ext, gamma0):
    """gamma0 |v_ext H f1|^2 / (gamma0 |v_ext H f2|^2 + 1)."""
    if gamma0 <= 0:
        raise ValueError(f"gamma0 must be positive, got {gamma0}")
    row = np.asarray(v_ext, dtype=complex) @ np.asarray(H_i, dtype=complex)
    sig = float(np.abs(row @ np.asarray(f1, dtype=complex)) ** 2)
    jam = float(np.abs(row @ np.asarray(f2, dtype=complex)) ** 2)
    return gamma0 * sig / (gamma0 * jam + 1.0)


def rate(sinr_value):
    """Shannon rate log2(1 + SINR)."""
    return float(np.log1p(sinr_value) / LN2)


def secrecy_value(H_b, H_e, f1, f2, v_ext, gamma0):
    """Raw secrecy rate from composite matrices, in bps/Hz.

    H_e iterates over the eavesdroppers (any iterable of (N+1) x M
    matrices, e.g. the stacked (K, N+1, M) array).
    """
    rate_b = rate(sinr(H_b, f1, f2, v_ext, gamma0))
    rate_e = max(rate(sinr(H_k, f1, f2, v_ext, gamma0)) for H_k in H_e)
    return rate_b - rate_e


def secrecy_objective(channels, tx, refl, gamma0):
    """Secrecy rate of a candidate solution, raw and clamped at zero.

    refl may be a ReflectVector or a raw extended row (the latter admits
    the all-zero row used when the surface is disabled).
    """
    v_ext = refl.extended if hasattr(refl, "extended") else np.asarray(refl)
    raw = secrecy_value(channels.H_b, channels.H_e, tx.f1, tx.f2, v_ext, gamma0)
    return raw, max(raw, 0.0)
