"""Upper and lower bounds on the Lipschitz constant of neural networks.

Estimators return plain dicts mirroring the CLI's JSON reports:
``method``, ``direction`` (upper / lower / estimate), ``value``,
``breakdown``, ``config`` and ``notes``.
"""

import json as _json

import numpy as _np

from . import _core
from ._core import (
    LipboundError,
    SequentialNet,
    alignment_factor,
    dense_net,
    exact_lipschitz_two_layer,
    ideal_net,
    jacobian_norm_at,
    load_lnm,
    random_cnn,
    random_net,
    random_orthogonal,
    random_unit_vector,
    save_lnm,
    spectral_norm,
    svd_dense,
    top_k_singular,
)

__all__ = [
    "LipboundError",
    "SequentialNet",
    "alignment_factor",
    "autolip",
    "autolip_graph",
    "dense_net",
    "exact_lipschitz_two_layer",
    "frobenius",
    "ideal_net",
    "jacobian_norm_at",
    "load_lnm",
    "lower_bound",
    "random_cnn",
    "random_net",
    "random_orthogonal",
    "random_unit_vector",
    "save_lnm",
    "seqlip",
    "spectra",
    "spectral_norm",
    "svd_dense",
    "theorem3",
    "top_k_singular",
]


def autolip(net, seed=0, max_iters=500, tol=1e-9):
    return _json.loads(_core._autolip(net, max_iters, tol, seed))


def autolip_graph(graph, seed=0, max_iters=500, tol=1e-9):
    """AutoLip on a graph description (dict or JSON text)."""
    text = graph if isinstance(graph, str) else _json.dumps(graph)
    return _json.loads(_core._autolip_graph(text, max_iters, tol, seed))


def seqlip(net, mode="exact", rank=200, restarts=8, steps=200, width_limit=20, seed=0):
    return _json.loads(_core._seqlip(net, mode, rank, restarts, steps, width_limit, seed))


def frobenius(net):
    return _json.loads(_core._frobenius(net))


def theorem3(net):
    return _json.loads(_core._theorem3(net))


def spectra(net, layer=0, topk=1, seed=0):
    return _json.loads(_core._spectra(net, layer, topk, seed))


def lower_bound(net, method="annealing", domain=(-1.0, 1.0), resolution=50, proposals=10000, seed=0, points=None):
    if method == "dataset":
        if points is None:
            raise ValueError("dataset method needs points")
        return _json.loads(_core._lower_dataset(net, _np.atleast_2d(_np.asarray(points, dtype=float))))
    lo, hi = (_np.broadcast_to(_np.asarray(b, dtype=float), (net.in_dim,)).copy() for b in domain)
    if method == "grid":
        return _json.loads(_core._lower_grid(net, lo, hi, resolution))
    if method == "annealing":
        return _json.loads(_core._lower_annealing(net, lo, hi, proposals, seed))
    raise ValueError("method must be 'grid', 'annealing' or 'dataset'")
