"""Shared builders for randomized test instances."""

import numpy as np

from irsjam.channel import ChannelSet, assemble_composite


def crandn(rng, *shape):
    """CN(0, 1) array with independent entries."""
    return (
        rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    ) / np.sqrt(2.0)


def rand_herm(n, rng, scale=1.0):
    a = crandn(rng, n, n)
    return scale * (a + a.conj().T)


def rand_herm_psd(n, rng, scale=1.0):
    a = crandn(rng, n, n)
    return scale * (a @ a.conj().T) / n


def rand_channels(rng, m=2, n=2, k=1, scale=1.0):
    """Unstructured channel set with assembled composites.

    No geometry or path loss, just independent CN(0, scale^2) entries;
    enough for optimizer-level tests that do not care where nodes stand.
    """
    H_ar = scale * crandn(rng, n, m)
    h_ab = scale * crandn(rng, m)
    h_ae = scale * crandn(rng, k, m)
    h_rb = scale * crandn(rng, n)
    h_re = scale * crandn(rng, k, n)
    H_b = assemble_composite(H_ar, h_rb, h_ab)
    H_e = np.stack(
        [assemble_composite(H_ar, h_re[i], h_ae[i]) for i in range(k)]
    )
    return ChannelSet(
        H_ar=H_ar, h_ab=h_ab, h_ae=h_ae, h_rb=h_rb, h_re=h_re,
        H_b=H_b, H_e=H_e,
    )
