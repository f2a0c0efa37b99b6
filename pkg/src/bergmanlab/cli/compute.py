"""Cache-aware wrappers around basis and Toeplitz construction."""

from __future__ import annotations

import math

import numpy as np

from ..diagnostics import (DECAY_THRESHOLD, PERSIST_THRESHOLD, CompactnessReport,
                           standard_basis, tail_indicator)
from ..domain import DomainSpec, WeightSpec
from ..kernel import (MonomialBasis, annulus_indices, graded_indices, index_grades,
                      monomial_basis)
from ..operator import OperatorMatrix, toeplitz
from ..symbol import as_symbol, boundary_sup, symbol_text
from .cache import Cache, CacheKey

_META = 6


def cached_basis(cache: Cache | None, domain: DomainSpec, weight: WeightSpec, N: int) -> MonomialBasis:
    """Monomial basis whose norm table is read from or written to the cache."""
    if cache is None:
        return monomial_basis(domain, weight, int(N))
    basis = None
    key = CacheKey("norms", domain.fingerprint(), weight.key(), int(N), None)
    table = cache.get(key)
    if table is not None:
        idx = annulus_indices(N) if domain.kind == "annulus" else graded_indices(domain.n, N)
        if len(idx) == len(table):
            grades = index_grades(domain, idx)
            for arr in (idx, table, grades):
                arr.setflags(write=False)
            basis = MonomialBasis(domain, weight, int(N), idx, table, grades)
    if basis is None:
        basis = monomial_basis(domain, weight, int(N))
        cache.put(key, np.asarray(basis.log_norm2))
    return basis


def _pack(T: OperatorMatrix) -> np.ndarray:
    meta = np.array([T.N, T.quad_order, T.n_angles or -1, T.aux_order or -1,
                     math.nan if T.richardson is None else T.richardson, float(T.hermitian)],
                    dtype=complex)
    return np.concatenate([meta, T.entries.ravel()])


def _unpack(basis, blob: np.ndarray, text: str) -> OperatorMatrix | None:
    D = int(blob[0].real)
    if len(blob) != _META + D * D:
        return None
    entries = blob[_META:].reshape(D, D).copy()
    entries.setflags(write=False)
    meta = blob[:_META].real
    return OperatorMatrix(basis, entries, bool(meta[5]), text, "toeplitz", int(meta[1]),
                          None if meta[2] < 0 else int(meta[2]),
                          None if math.isnan(meta[4]) else float(meta[4]),
                          None if meta[3] < 0 else int(meta[3]))


def cached_toeplitz(cache: Cache | None, basis, weight: WeightSpec, phi, N: int | None = None,
                    order: int | None = None) -> OperatorMatrix:
    """:func:`toeplitz` with the finite section stored in the cache.

    Only monomial bases and symbols given as text are cached.
    """
    phi = as_symbol(phi)
    text = symbol_text(phi)
    cacheable = (cache is not None and isinstance(basis, MonomialBasis)
                 and not callable(phi))
    if cacheable:
        D = len(basis) if N is None else int(N)
        key = CacheKey("gram", basis.domain.fingerprint(), basis.weight.key(), basis.N, order,
                       f"symbol={text};D={D}")
        blob = cache.get(key)
        if blob is not None:
            T = _unpack(basis, blob, text)
            if T is not None:
                return T
    T = toeplitz(basis, weight, phi, N, quad=order)
    if cacheable:
        cache.put(key, _pack(T))
    return T


def compactness_cached(cache: Cache | None, domain: DomainSpec, weight: WeightSpec, phi,
                       truncation: int, cuts=None, order: int | None = None,
                       thresholds=(DECAY_THRESHOLD, PERSIST_THRESHOLD)) -> CompactnessReport:
    """:func:`~bergmanlab.diagnostics.compactness` through the cache."""
    phi = as_symbol(phi)
    if domain.kind == "lens":
        basis = standard_basis(domain, weight, truncation, order)
    else:
        grade = standard_basis(domain, weight, truncation).N
        basis = cached_basis(cache, domain, weight, grade)
    T = cached_toeplitz(cache, basis, weight, phi, order=order)
    return tail_indicator(T, cuts, thresholds, boundary_sup(phi, domain, 64))
