"""Dense complex linear algebra helpers shared by the optimizers.

Everything here operates on plain numpy arrays of complex128. Matrices that
are Hermitian by construction still accumulate rounding error when they are
updated repeatedly, so every decomposition symmetrizes its input first.
"""

import numpy as np

# relative tolerance for accepting a matrix as Hermitian
HERM_TOL = 1e-12


def _as_square(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def symmetrize(a):
    """Return (A + A^H)/2, the Hermitian part of A."""
    a = _as_square(a)
    return 0.5 * (a + a.conj().T)


def check_hermitian(a, tol=HERM_TOL):
    """Validate that A is Hermitian within a relative tolerance.

    Raises ValueError for non-square or non-Hermitian input. Returns the
    symmetrized matrix so callers can keep working with an exactly
    Hermitian array.
    """
    a = _as_square(a)
    scale = max(np.abs(a).max(), 1.0)
    dev = np.abs(a - a.conj().T).max()
    if dev > tol * scale:
        raise ValueError(
            f"matrix is not Hermitian: max deviation {dev:.3e} exceeds "
            f"{tol:.1e} relative"
        )
    return symmetrize(a)


def herm_eig(a):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns (w, V) with real w sorted descending and unitary V whose
    columns are the matching eigenvectors, A = V diag(w) V^H.
    """
    a = check_hermitian(a)
    w, v = np.linalg.eigh(a)
    return w[::-1].copy(), v[:, ::-1].copy()


def trace_inner(a, x):
    """Real trace inner product Re(Tr(A X)) of two same-size matrices.

    For a Hermitian pair the trace is real up to rounding and this equals
    Tr(A X) itself.
    """
    a = np.asarray(a, dtype=complex)
    x = np.asarray(x, dtype=complex)
    if a.shape != x.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {x.shape}")
    # Tr(A X) = sum_ij A_ij X_ji
    return float(np.real(np.sum(a * x.T)))


def psd_project(a):
    """Frobenius-nearest PSD matrix: clamp negative eigenvalues at zero."""
    w, v = herm_eig(a)
    w = np.maximum(w, 0.0)
    return symmetrize((v * w) @ v.conj().T)


def unit_phases(theta):
    """Complex exponentials whose magnitude is exactly 1.0 in float64.

    exp(j theta) alone leaves np.abs one ulp off 1.0 for roughly a third
    of all angles. For those entries the larger component is nudged by
    cumulative ulps; its steps move re^2 + im^2 by less than one rounding
    window of hypot, so a short scan always lands on an exact preimage of
    1.0. Angles move by a few 1e-16 at most. Candidates are tested through
    the same vectorized abs that downstream invariants use, because the
    scalar and array kernels round differently on rare inputs.
    """
    theta = np.asarray(theta, dtype=float)
    out = np.exp(1j * theta)
    if out.ndim == 0:
        out = out.reshape(1)
        scalar = True
    else:
        out = out.copy()
        scalar = False
    for _ in range(3):
        bad = np.flatnonzero(np.abs(out) != 1.0)
        if bad.size == 0:
            break
        for i in bad:
            a, b = out[i].real, out[i].imag
            big_a = abs(a) >= abs(b)
            q = a if big_a else b
            ladder = [q]
            up, down = q, q
            for _ in range(40):
                up = np.nextafter(up, np.inf)
                down = np.nextafter(down, -np.inf)
                ladder.append(up)
                ladder.append(down)
            ladder = np.asarray(ladder)
            cands = (ladder + 1j * b) if big_a else (a + 1j * ladder)
            ok = np.flatnonzero(np.abs(cands) == 1.0)
            if ok.size:
                out[i] = cands[ok[0]]
    if np.any(np.abs(out) != 1.0):
        raise RuntimeError("could not reach exactly unit magnitude")
    return out[0] if scalar else out
