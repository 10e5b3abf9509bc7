"""Rician fading channels, array steering, and composite-matrix assembly.

Conventions, fixed once so every downstream module agrees:

* Vector channels are stored as columns h such that the received scalar
  from a beam f is h^H f. The Rician mixture is sampled directly in this
  stored form, so a deterministic link stores the conjugated steering row.
* The extended reflect row is v_ext = [v_1, ..., v_N, 1] and the cascaded
  link toward node i is the plain product v_ext @ H_i @ f, where H_i
  stacks diag(h_ri^H) H_ar on top of h_ai^H. No conjugation is applied to
  v_ext at evaluation time; its entries are the physical phase factors.
* The reflecting surface is a uniform rectangular array in the x-z plane
  facing +y, rows along z, columns along x, row-major element order.
  The transmit array is a half-wavelength ULA along x. Far-field planar
  wavefronts throughout: the LoS phase of an element at offset delta from
  the array reference point is exp(j 2 pi / lambda * <delta, u>) with u
  the unit direction of the link leaving that node.
"""

from dataclasses import dataclass

import numpy as np

C_LIGHT = 299792458.0

# spawn order of the per-tensor RNG substreams inside build_scenario
TENSOR_STREAMS = ("h_ab", "h_ae", "H_ar", "h_rb", "h_re")


def db_to_linear(db):
    """Power ratio from decibels."""
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def dbm_to_watt(dbm):
    """Power in watts from dBm."""
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def path_loss(distance, exponent, l0):
    """Distance power law l0 * d^-c with l0 the linear gain at 1 m."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    if l0 <= 0:
        raise ValueError(f"reference gain must be positive, got {l0}")
    return float(l0) * float(distance) ** (-float(exponent))


def default_ura_rows(n_elements):
    """Row count for an N-element rectangular surface.

    Five rows when N allows it; otherwise the largest divisor of N not
    exceeding sqrt(N), which keeps the grid as square as possible and
    degrades to a line array when N is prime.
    """
    if n_elements < 1:
        raise ValueError(f"need at least one element, got {n_elements}")
    if n_elements % 5 == 0:
        return 5
    rows = 1
    d = 1
    while d * d <= n_elements:
        if n_elements % d == 0:
            rows = d
        d += 1
    return rows


def ura_offsets(n_elements, rows, spacing):
    """Element offsets of a centered rows x (N/rows) grid in the x-z plane.

    Row-major order: element n = i * cols + j sits at column j along x and
    row i along z. Offsets are relative to the array center.
    """
    if rows < 1 or n_elements % rows != 0:
        raise ValueError(f"rows={rows} does not divide N={n_elements}")
    cols = n_elements // rows
    i = np.repeat(np.arange(rows), cols)
    j = np.tile(np.arange(cols), rows)
    off = np.zeros((n_elements, 3))
    off[:, 0] = (j - (cols - 1) / 2.0) * spacing
    off[:, 2] = (i - (rows - 1) / 2.0) * spacing
    return off


def ula_offsets(n_elements, spacing):
    """Element offsets of a centered line array along x."""
    if n_elements < 1:
        raise ValueError(f"need at least one element, got {n_elements}")
    off = np.zeros((n_elements, 3))
    off[:, 0] = (np.arange(n_elements) - (n_elements - 1) / 2.0) * spacing
    return off


def los_component(tx_pos, rx_pos, wavelength, tx_offsets=None, rx_offsets=None):
    """Deterministic planar-wavefront phase matrix between two nodes.

    Returns an (R, T) matrix of unit-magnitude entries, the outer product
    of the receive and transmit steering vectors. An offsets argument of
    None stands for a single antenna at the node position. Each side uses
    the link direction leaving it, so a direction orthogonal to an array
    (broadside) gives an all-ones steering vector.
    """
    tx_pos = np.asarray(tx_pos, dtype=float)
    rx_pos = np.asarray(rx_pos, dtype=float)
    d = rx_pos - tx_pos
    dist = float(np.linalg.norm(d))
    if dist == 0.0:
        raise ValueError("coincident node positions")
    u = d / dist
    k = 2.0 * np.pi / wavelength
    if tx_offsets is None:
        a_tx = np.ones(1, dtype=complex)
    else:
        a_tx = np.exp(1j * k * (np.asarray(tx_offsets, dtype=float) @ u))
    if rx_offsets is None:
        a_rx = np.ones(1, dtype=complex)
    else:
        a_rx = np.exp(1j * k * (np.asarray(rx_offsets, dtype=float) @ (-u)))
    return np.outer(a_rx, a_tx)


def sample_channel(gain, beta, los, rng):
    """Draw one Rician realization sqrt(gain) * g with the given LoS part.

    g = sqrt(beta/(1+beta)) * los + sqrt(1/(1+beta)) * g_nlos, where g_nlos
    is i.i.d. circularly-symmetric complex Gaussian with unit variance per
    entry. beta = 0 is pure Rayleigh; beta = inf returns the deterministic
    LoS term and consumes no randomness.
    """
    if gain < 0:
        raise ValueError(f"gain must be nonnegative, got {gain}")
    if beta < 0:
        raise ValueError(f"Rician factor must be nonnegative, got {beta}")
    los = np.asarray(los, dtype=complex)
    amp = np.sqrt(gain)
    if np.isinf(beta):
        return amp * los
    g_nlos = (
        rng.standard_normal(los.shape) + 1j * rng.standard_normal(los.shape)
    ) / np.sqrt(2.0)
    g = np.sqrt(beta / (1.0 + beta)) * los + np.sqrt(1.0 / (1.0 + beta)) * g_nlos
    return amp * g


def assemble_composite(H_ar, h_ri, h_ai):
    """Stack the cascaded and direct links into one (N+1) x M matrix.

    Top N rows are diag(h_ri^H) H_ar, the last row is h_ai^H, so that
    v_ext @ H_i @ f reproduces h_ai^H f + h_ri^H diag(v) H_ar f.
    """
    H_ar = np.asarray(H_ar, dtype=complex)
    h_ri = np.asarray(h_ri, dtype=complex).ravel()
    h_ai = np.asarray(h_ai, dtype=complex).ravel()
    if H_ar.ndim != 2:
        raise ValueError(f"H_ar must be a matrix, got shape {H_ar.shape}")
    n, m = H_ar.shape
    if h_ri.shape != (n,) or h_ai.shape != (m,):
        raise ValueError(
            f"dimension mismatch: H_ar {H_ar.shape}, h_ri {h_ri.shape}, "
            f"h_ai {h_ai.shape}"
        )
    top = h_ri.conj()[:, None] * H_ar
    return np.vstack([top, h_ai.conj()[None, :]])


def eve_positions(setup, k):
    """Eavesdropper positions, evenly spaced on the setup's segment.

    Endpoints are included for k >= 2; a single eavesdropper sits at the
    segment midpoint.
    """
    if setup == "a":
        p0, p1 = np.array([2.0, 95.0, 0.0]), np.array([2.0, 105.0, 0.0])
    elif setup == "b":
        p0, p1 = np.array([2.0, -105.0, 0.0]), np.array([2.0, -95.0, 0.0])
    else:
        raise ValueError(f"unknown setup tag {setup!r}, expected 'a' or 'b'")
    if k < 1:
        raise ValueError(f"need at least one eavesdropper, got {k}")
    if k == 1:
        return [0.5 * (p0 + p1)]
    return [p0 + (p1 - p0) * (i / (k - 1)) for i in range(k)]


@dataclass
class ChannelSet:
    """All sampled channels of one realization plus assembled composites.

    Shapes: H_ar (N, M), h_ab (M,), h_ae (K, M), h_rb (N,), h_re (K, N),
    H_b (N+1, M), H_e (K, N+1, M).
    """

    H_ar: np.ndarray
    h_ab: np.ndarray
    h_ae: np.ndarray
    h_rb: np.ndarray
    h_re: np.ndarray
    H_b: np.ndarray
    H_e: np.ndarray

    @property
    def n_tx(self):
        return self.H_ar.shape[1]

    @property
    def n_elements(self):
        return self.H_ar.shape[0]

    @property
    def n_eves(self):
        return self.h_ae.shape[0]


def build_scenario(config, seed_seq):
    """Sample one full channel realization for the configured scenario.

    seed_seq is a numpy SeedSequence. One child substream is spawned per
    channel tensor, in TENSOR_STREAMS order, so each tensor's realization
    is independent of the setup tag and of how many draws the other
    tensors consume. Mirrored-geometry setups therefore reuse identical
    transmit-side channels under the same seed.
    """
    setup = config.setup
    if setup not in ("a", "b"):
        raise ValueError(f"unknown setup tag {setup!r}, expected 'a' or 'b'")

    wavelength = C_LIGHT / config.carrier_hz
    spacing = config.element_spacing
    if spacing is None:
        spacing = 3.0 * wavelength / 8.0
    rows = config.ura_rows
    if rows is None:
        rows = default_ura_rows(config.n_elements)
    if config.n_elements % rows != 0:
        raise ValueError(
            f"ura_rows={rows} does not divide N={config.n_elements}"
        )

    alice = np.asarray(config.alice_pos, dtype=float)
    rose = np.asarray(config.rose_pos, dtype=float)
    bob = np.asarray(config.bob_pos, dtype=float)
    eves = config.eve_positions
    if eves is None:
        eves = eve_positions(setup, config.n_eves)
    eves = [np.asarray(p, dtype=float) for p in eves]
    if len(eves) != config.n_eves:
        raise ValueError(
            f"got {len(eves)} eavesdropper positions for K={config.n_eves}"
        )

    c_re = config.c_re
    if c_re is None:
        c_re = 2.0 if setup == "a" else 5.0
    beta_re = config.beta_re
    if beta_re is None:
        beta_re = np.inf if setup == "a" else 0.0

    l0 = db_to_linear(config.l0_db)
    tx_off = ula_offsets(config.n_tx, wavelength / 2.0)
    irs_off = ura_offsets(config.n_elements, rows, spacing)
    streams = seed_seq.spawn(len(TENSOR_STREAMS))
    rngs = {name: np.random.default_rng(s) for name, s in zip(TENSOR_STREAMS, streams)}

    def vec(tx_pos, rx_pos, tx_offsets, exponent, beta, rng):
        # single-antenna receiver; stored column = conjugated steering row
        gain = path_loss(np.linalg.norm(rx_pos - tx_pos), exponent, l0)
        los = los_component(tx_pos, rx_pos, wavelength, tx_offsets=tx_offsets)
        return sample_channel(gain, beta, los.conj().ravel(), rng)

    h_ab = vec(alice, bob, tx_off, config.c_ab, config.beta_ab, rngs["h_ab"])
    h_ae = np.stack(
        [
            vec(alice, p, tx_off, config.c_ae, config.beta_ae, rngs["h_ae"])
            for p in eves
        ]
    )
    gain_ar = path_loss(np.linalg.norm(rose - alice), config.c_ar, l0)
    los_ar = los_component(
        alice, rose, wavelength, tx_offsets=tx_off, rx_offsets=irs_off
    )
    H_ar = sample_channel(gain_ar, config.beta_ar, los_ar, rngs["H_ar"])
    h_rb = vec(rose, bob, irs_off, config.c_rb, config.beta_rb, rngs["h_rb"])
    h_re = np.stack(
        [vec(rose, p, irs_off, c_re, beta_re, rngs["h_re"]) for p in eves]
    )

    H_b = assemble_composite(H_ar, h_rb, h_ab)
    H_e = np.stack(
        [assemble_composite(H_ar, h_re[k], h_ae[k]) for k in range(len(eves))]
    )
    return ChannelSet(
        H_ar=H_ar, h_ab=h_ab, h_ae=h_ae, h_rb=h_rb, h_re=h_re, H_b=H_b, H_e=H_e
    )
